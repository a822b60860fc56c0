// SPDX-License-Identifier: Apache-2.0
#include "dmce/checkpoint.hpp"

#include "binary_io.hpp"

namespace dmce {

const char* role_name(ModelRole role)
{
    switch (role) {
    case ModelRole::Dm:
        return "dm";
    case ModelRole::SureDenoiser:
        return "sure-denoiser";
    case ModelRole::SureDm:
        return "sure-dm";
    }
    return "unknown";
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt)
{
    const DenoiserArch& a = ckpt.net.arch();
    auto os = detail::open_for_write(path);
    os.write("DMCKPT01", 8);
    detail::put_u8(os, static_cast<std::uint8_t>(ckpt.role));
    detail::put_u32(os, static_cast<std::uint32_t>(a.s_init));
    detail::put_u32(os, static_cast<std::uint32_t>(a.s_max));
    detail::put_u32(os, static_cast<std::uint32_t>(a.channels.size()));
    for (int c : a.channels) {
        detail::put_u32(os, static_cast<std::uint32_t>(c));
    }
    detail::put_u32(os, static_cast<std::uint32_t>(a.n_rx));
    detail::put_u32(os, static_cast<std::uint32_t>(a.n_tx));
    detail::put_u32(os, static_cast<std::uint32_t>(ckpt.t_max));
    detail::put_u32(os, static_cast<std::uint32_t>(ckpt.t_w));
    const auto& p = ckpt.net.parameters();
    detail::put_u32(os, static_cast<std::uint32_t>(p.size()));
    for (Index i = 0; i < p.size(); ++i) {
        detail::put_f32(os, p[i]);
    }
    detail::finish_write(os, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path)
{
    auto is = detail::open_for_read(path);
    detail::Reader r(is, path);
    r.expect_magic("DMCKPT01");
    const std::uint8_t role = r.u8();
    if (role > 2) {
        throw FormatError(path.string() + ": unknown model role " + std::to_string(role));
    }
    DenoiserArch a;
    a.s_init = static_cast<int>(r.u32());
    a.s_max = static_cast<int>(r.u32());
    const std::uint32_t n_ch = r.u32();
    if (n_ch > 64) {
        throw FormatError(path.string() + ": implausible layer count");
    }
    a.channels.resize(n_ch);
    for (auto& c : a.channels) {
        c = static_cast<int>(r.u32());
    }
    a.n_rx = static_cast<int>(r.u32());
    a.n_tx = static_cast<int>(r.u32());
    const int t_max = static_cast<int>(r.u32());
    const int t_w = static_cast<int>(r.u32());
    const std::uint32_t n_params = r.u32();
    Denoiser<float> net = [&] {
        try {
            return Denoiser<float>(a);
        } catch (const InvalidArgument& e) {
            throw FormatError(path.string() + ": bad architecture header: " + e.what());
        }
    }();
    if (static_cast<Index>(n_params) != net.parameter_count()) {
        throw FormatError(path.string() + ": parameter count " + std::to_string(n_params) +
                          " does not match architecture (" + std::to_string(net.parameter_count()) + ")");
    }
    for (Index i = 0; i < net.parameter_count(); ++i) {
        net.parameters()[i] = r.f32();
    }
    if (!r.at_end()) {
        throw FormatError(path.string() + ": trailing bytes after parameters");
    }
    return Checkpoint{static_cast<ModelRole>(role), t_max, t_w, std::move(net)};
}

} // namespace dmce
