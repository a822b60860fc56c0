// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/denoiser.hpp"

#include <cstdint>
#include <filesystem>

namespace dmce {

/// What a stored network is used for.
enum class ModelRole : std::uint8_t { Dm = 0, SureDenoiser = 1, SureDm = 2 };

const char* role_name(ModelRole role);

struct Checkpoint {
    ModelRole role = ModelRole::Dm;
    int t_max = 0;     // diffusion steps the network was trained for
    int t_w = 0;       // matched noise level of the SURE denoiser (0 otherwise)
    Denoiser<float> net;
};

// Layout: "DMCKPT01", u8 role, then little-endian u32 {s_init, s_max, n_layers + 1,
// channels..., n_rx, n_tx, T, t_w, n_params}, then n_params float32 values in the
// flat parameter order of Denoiser.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

} // namespace dmce
