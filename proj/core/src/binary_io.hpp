// SPDX-License-Identifier: Apache-2.0
#pragma once

// Little-endian encoding helpers shared by the dataset and checkpoint containers.

#include "dmce/common.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string_view>

namespace dmce::detail {

inline void put_u32(std::ostream& os, std::uint32_t v)
{
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    }
    os.write(b.data(), 4);
}

inline void put_f32(std::ostream& os, float f)
{
    put_u32(os, std::bit_cast<std::uint32_t>(f));
}

inline void put_u8(std::ostream& os, std::uint8_t v)
{
    os.put(static_cast<char>(v));
}

class Reader {
public:
    Reader(std::istream& is, std::filesystem::path path) : is_(is), path_(std::move(path)) {}

    void expect_magic(std::string_view magic)
    {
        std::string got(magic.size(), '\0');
        read_raw(got.data(), got.size());
        if (got != magic) {
            throw FormatError(path_.string() + ": bad magic (expected " + std::string(magic) + ")");
        }
    }

    std::uint32_t u32()
    {
        std::array<unsigned char, 4> b{};
        read_raw(reinterpret_cast<char*>(b.data()), 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::uint8_t u8()
    {
        char c = 0;
        read_raw(&c, 1);
        return static_cast<std::uint8_t>(c);
    }

    bool at_end()
    {
        return is_.peek() == std::char_traits<char>::eof();
    }

private:
    void read_raw(char* dst, std::size_t n)
    {
        is_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n) {
            throw FormatError(path_.string() + ": truncated file");
        }
    }

    std::istream& is_;
    std::filesystem::path path_;
};

inline std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError(path.string() + ": cannot open for writing");
    }
    return os;
}

inline std::ifstream open_for_read(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError(path.string() + ": cannot open for reading");
    }
    return is;
}

inline void finish_write(std::ofstream& os, const std::filesystem::path& path)
{
    os.flush();
    if (!os) {
        throw IoError(path.string() + ": write failed");
    }
}

} // namespace dmce::detail
