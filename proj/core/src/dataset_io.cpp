// SPDX-License-Identifier: Apache-2.0
#include "binary_io.hpp"
#include "dmce/channel_model.hpp"

namespace dmce {

namespace {
constexpr std::string_view kDatasetMagic = "DMCE0001";
constexpr std::uint32_t kDtypeFloat32 = 0;
} // namespace

void write_dataset(const std::filesystem::path& path, const ChannelDataset& ds)
{
    if (ds.dim() != 2 * static_cast<Index>(ds.n_rx) * ds.n_tx) {
        throw InvalidArgument("write_dataset: sample length does not match 2*n_rx*n_tx");
    }
    auto os = detail::open_for_write(path);
    os.write(kDatasetMagic.data(), static_cast<std::streamsize>(kDatasetMagic.size()));
    detail::put_u32(os, static_cast<std::uint32_t>(ds.n_rx));
    detail::put_u32(os, static_cast<std::uint32_t>(ds.n_tx));
    detail::put_u32(os, static_cast<std::uint32_t>(ds.size()));
    detail::put_u32(os, kDtypeFloat32);
    const float* p = ds.samples.data();
    for (Index i = 0; i < ds.samples.size(); ++i) {
        detail::put_f32(os, p[i]);
    }
    detail::finish_write(os, path);
}

ChannelDataset read_dataset(const std::filesystem::path& path)
{
    auto is = detail::open_for_read(path);
    detail::Reader r(is, path);
    r.expect_magic(kDatasetMagic);
    ChannelDataset ds;
    ds.n_rx = static_cast<int>(r.u32());
    ds.n_tx = static_cast<int>(r.u32());
    const auto n_samples = static_cast<Index>(r.u32());
    const std::uint32_t dtype = r.u32();
    if (dtype != kDtypeFloat32) {
        throw FormatError(path.string() + ": unsupported dtype " + std::to_string(dtype));
    }
    if (ds.n_rx < 1 || ds.n_tx < 1) {
        throw FormatError(path.string() + ": invalid antenna counts in header");
    }
    ds.samples.resize(2 * static_cast<Index>(ds.n_rx) * ds.n_tx, n_samples);
    float* p = ds.samples.data();
    for (Index i = 0; i < ds.samples.size(); ++i) {
        p[i] = r.f32();
    }
    if (!r.at_end()) {
        throw FormatError(path.string() + ": trailing bytes after declared payload");
    }
    return ds;
}

} // namespace dmce
