#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "handsign/error.hpp"
#include "handsign/image.hpp"

// Binary PGM (P5) reader/writer. Samples wider than 8 bits are big-endian,
// as netpbm requires. Plain-text P2 is accepted on read.

namespace handsign::pgm {

struct RawPgm {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<std::uint16_t> samples;
};

namespace detail {

inline void skip_space_and_comments(std::istream& in)
{
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string discard;
            std::getline(in, discard);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
            in.get();
        } else {
            return;
        }
    }
}

inline int read_header_int(std::istream& in, const std::string& what, const std::string& source)
{
    skip_space_and_comments(in);
    long v = -1;
    if (!(in >> v) || v < 0 || v > 1'000'000) {
        throw FormatError(source + ": bad PGM " + what);
    }
    return static_cast<int>(v);
}

}  // namespace detail

inline RawPgm read(std::istream& in, const std::string& source = "<stream>")
{
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2')) {
        throw FormatError(source + ": not a P5/P2 PGM file");
    }
    const bool binary = magic[1] == '5';
    RawPgm img;
    img.width = detail::read_header_int(in, "width", source);
    img.height = detail::read_header_int(in, "height", source);
    img.maxval = detail::read_header_int(in, "maxval", source);
    if (img.maxval < 1 || img.maxval > 65535) {
        throw FormatError(source + ": PGM maxval out of range");
    }
    const std::size_t count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    img.samples.resize(count);
    if (binary) {
        // Exactly one whitespace byte separates the header from the raster.
        in.get();
        const std::size_t bytes_per = img.maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes_per);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
            throw FormatError(source + ": truncated PGM raster");
        }
        for (std::size_t i = 0; i < count; ++i) {
            img.samples[i] = bytes_per == 2
                                 ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                                 : raw[i];
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            long v = -1;
            detail::skip_space_and_comments(in);
            if (!(in >> v) || v < 0 || v > img.maxval) {
                throw FormatError(source + ": bad PGM sample");
            }
            img.samples[i] = static_cast<std::uint16_t>(v);
        }
    }
    for (const auto s : img.samples) {
        if (s > img.maxval) {
            throw FormatError(source + ": PGM sample exceeds maxval");
        }
    }
    return img;
}

inline RawPgm read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFile("cannot open " + path);
    }
    return read(in, path);
}

inline void write(std::ostream& out, int width, int height, int maxval, const std::vector<std::uint16_t>& samples)
{
    out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(samples.size() * 2);
    for (const auto s : samples) {
        if (maxval > 255) {
            raw.push_back(static_cast<unsigned char>(s >> 8));
        }
        raw.push_back(static_cast<unsigned char>(s & 0xFF));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

/// Depth is stored as 16-bit samples in millimeters.
inline DepthImage read_depth(const std::string& path)
{
    RawPgm raw = read_file(path);
    return DepthImage(raw.width, raw.height, std::move(raw.samples));
}

/// Intensity is rescaled to [0,255] if the file's maxval differs.
inline IntensityImage read_intensity(const std::string& path)
{
    const RawPgm raw = read_file(path);
    std::vector<float> v(raw.samples.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = raw.maxval == 255 ? static_cast<float>(raw.samples[i])
                                 : std::round(static_cast<float>(raw.samples[i]) * 255.0F /
                                              static_cast<float>(raw.maxval));
    }
    return IntensityImage(raw.width, raw.height, std::move(v), IntensityDomain::integer);
}

inline void write_depth(const std::string& path, const DepthImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write(out, img.width(), img.height(), 65535, img.data());
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

inline void write_intensity(const std::string& path, const IntensityImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    std::vector<std::uint16_t> samples(img.size());
    const float scale = img.domain() == IntensityDomain::normalized ? 255.0F : 1.0F;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = static_cast<std::uint16_t>(std::clamp(std::lround(img[i] * scale), 0L, 255L));
    }
    write(out, img.width(), img.height(), 255, samples);
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

}  // namespace handsign::pgm
