#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "handsign/dataset.hpp"
#include "handsign/error.hpp"
#include "handsign/features.hpp"
#include "handsign/rbm.hpp"

// Feature matrix file:
//   one ASCII header line "HSFEAT1 <kind> <dimension> <count>\n"
//   then count * dimension little-endian float32 values, row-major.
// Labels sit next to it as CSV with header "user,letter", one row per sample.

namespace handsign::feature_file {

inline constexpr std::string_view kMagic = "HSFEAT1";

struct FeatureSet {
    features::FeatureKind kind = features::FeatureKind::combined;
    FeatureMatrix values;
};

inline void write(std::ostream& out, const FeatureSet& set)
{
    out << kMagic << ' ' << features::to_string(set.kind) << ' ' << set.values.cols() << ' ' << set.values.rows()
        << '\n';
    std::vector<unsigned char> buf(static_cast<std::size_t>(set.values.cols()) * 4);
    for (Eigen::Index r = 0; r < set.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < set.values.cols(); ++c) {
            const auto bits = std::bit_cast<std::uint32_t>(set.values(r, c));
            for (int b = 0; b < 4; ++b) {
                buf[static_cast<std::size_t>(c) * 4 + static_cast<std::size_t>(b)] =
                    static_cast<unsigned char>(bits >> (8 * b));
            }
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
}

inline FeatureSet read(std::istream& in, const std::string& source = "<stream>")
{
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(source + ": empty feature file");
    }
    std::istringstream hs(line);
    std::string magic;
    std::string kind;
    long long dim = -1;
    long long count = -1;
    if (!(hs >> magic >> kind >> dim >> count) || magic != kMagic || dim <= 0 || count < 0) {
        throw FormatError(source + ": bad feature file header");
    }
    FeatureSet set;
    try {
        set.kind = features::parse_kind(kind);
    } catch (const ConfigError&) {
        throw FormatError(source + ": unknown feature kind '" + kind + "'");
    }
    set.values.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    std::vector<unsigned char> buf(static_cast<std::size_t>(dim) * 4);
    for (long long r = 0; r < count; ++r) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
            throw FormatError(source + ": truncated at row " + std::to_string(r));
        }
        for (long long c = 0; c < dim; ++c) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) {
                bits |= static_cast<std::uint32_t>(buf[static_cast<std::size_t>(c) * 4 + static_cast<std::size_t>(b)])
                        << (8 * b);
            }
            set.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::bit_cast<float>(bits);
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(source + ": trailing bytes after feature rows");
    }
    return set;
}

inline void save(const std::string& path, const FeatureSet& set)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write(out, set);
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

inline FeatureSet load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFile("cannot open " + path);
    }
    return read(in, path);
}

inline void save_labels(const std::string& path, const std::vector<dataset::SampleLabel>& labels)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "user,letter\n";
    for (const auto& l : labels) {
        out << l.user_id << ',' << l.letter.symbol() << '\n';
    }
}

inline std::vector<dataset::SampleLabel> load_labels(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MissingFile("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || dataset::detail::strip_cr(line) != "user,letter") {
        throw FormatError(path + ": labels header must be 'user,letter'");
    }
    std::vector<dataset::SampleLabel> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = dataset::detail::strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto cells = dataset::detail::split_csv_line(line);
        if (cells.size() != 2 || cells[0].empty()) {
            throw FormatError(path + " line " + std::to_string(line_no) + ": expected user,letter");
        }
        try {
            out.push_back({cells[0], Letter::parse(cells[1])});
        } catch (const UnknownLetter&) {
            throw UnknownLetter(path + " line " + std::to_string(line_no) + ": unknown letter '" + cells[1] + "'");
        }
    }
    return out;
}

}  // namespace handsign::feature_file
