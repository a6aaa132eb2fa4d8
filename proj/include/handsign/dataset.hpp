#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "handsign/error.hpp"
#include "handsign/image.hpp"
#include "handsign/letters.hpp"
#include "handsign/pgm.hpp"

namespace handsign::dataset {

inline constexpr int kMinSide = 32;
inline constexpr int kMaxSide = 256;

struct Sample {
    std::string user_id;
    Letter letter;
    DepthImage depth;
    IntensityImage intensity;
};

/// Anything carrying a user id and a letter can be split.
template <typename T>
concept Labeled = requires(const T& s) {
    { s.user_id } -> std::convertible_to<std::string>;
    { s.letter } -> std::convertible_to<Letter>;
};

struct SampleLabel {
    std::string user_id;
    Letter letter;

    friend bool operator==(const SampleLabel&, const SampleLabel&) = default;
};

inline void validate_sample(const Sample& s, const std::string& where)
{
    for (const auto& [w, h, what] : {std::tuple{s.depth.width(), s.depth.height(), "depth"},
                                     std::tuple{s.intensity.width(), s.intensity.height(), "intensity"}}) {
        if (w < kMinSide || w > kMaxSide || h < kMinSide || h > kMaxSide) {
            throw FormatError(where + ": " + what + " image " + std::to_string(w) + "x" + std::to_string(h) +
                              " outside [32,256]");
        }
    }
    if (s.user_id.empty()) {
        throw FormatError(where + ": empty user id");
    }
}

// ---------------------------------------------------------------------------
// Manifest

inline constexpr std::string_view kManifestHeader = "depth_path,intensity_path,user,letter";

struct ManifestRow {
    std::string depth_path;
    std::string intensity_path;
    std::string user_id;
    std::string letter;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline std::string strip_cr(std::string s)
{
    if (!s.empty() && s.back() == '\r') {
        s.pop_back();
    }
    return s;
}

}  // namespace detail

inline std::vector<ManifestRow> read_manifest(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest " + path);
    }
    std::string line;
    if (!std::getline(in, line) || detail::strip_cr(line) != kManifestHeader) {
        throw FormatError(path + ": manifest header must be '" + std::string(kManifestHeader) + "'");
    }
    std::vector<ManifestRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 4) {
            throw FormatError(path + " line " + std::to_string(line_no) + ": expected 4 fields");
        }
        rows.push_back({cells[0], cells[1], cells[2], cells[3]});
    }
    return rows;
}

inline void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write manifest " + path);
    }
    out << kManifestHeader << '\n';
    for (const auto& r : rows) {
        out << r.depth_path << ',' << r.intensity_path << ',' << r.user_id << ',' << r.letter << '\n';
    }
    if (!out) {
        throw IoError("write failed for manifest " + path);
    }
}

/// Loads every manifest row in order. Relative paths resolve against the
/// manifest's directory. Errors name the offending line.
inline std::vector<Sample> load_dataset(const std::string& manifest_path)
{
    namespace fs = std::filesystem;
    const auto rows = read_manifest(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();
    std::set<std::string> seen;
    std::vector<Sample> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const std::string where = manifest_path + " row " + std::to_string(i + 1);
        Sample s;
        try {
            s.letter = Letter::parse(r.letter);
        } catch (const UnknownLetter&) {
            throw UnknownLetter(where + ": unknown letter '" + r.letter + "'");
        }
        s.user_id = r.user_id;
        const fs::path dp = fs::path(r.depth_path).is_absolute() ? fs::path(r.depth_path) : base / r.depth_path;
        const fs::path ip =
            fs::path(r.intensity_path).is_absolute() ? fs::path(r.intensity_path) : base / r.intensity_path;
        for (const auto& p : {dp, ip}) {
            if (!fs::exists(p)) {
                throw MissingFile(where + ": missing file " + p.string());
            }
            if (!seen.insert(fs::weakly_canonical(p).string()).second) {
                throw FormatError(where + ": duplicate path " + p.string());
            }
        }
        try {
            s.depth = pgm::read_depth(dp.string());
            s.intensity = pgm::read_intensity(ip.string());
        } catch (const FormatError& e) {
            throw FormatError(where + ": " + e.what());
        }
        validate_sample(s, where);
        out.push_back(std::move(s));
    }
    return out;
}

/// user -> per-letter sample counts.
template <Labeled T>
std::map<std::string, std::array<int, kNumClasses>> count_table(const std::vector<T>& samples)
{
    std::map<std::string, std::array<int, kNumClasses>> table;
    for (const auto& s : samples) {
        auto [it, inserted] = table.try_emplace(s.user_id);
        if (inserted) {
            it->second.fill(0);
        }
        ++it->second[static_cast<std::size_t>(Letter(s.letter).index())];
    }
    return table;
}

// ---------------------------------------------------------------------------
// Splits

enum class SplitMode { allseen, unseen };

struct SplitSpec {
    SplitMode mode = SplitMode::allseen;
    std::string test_user;
    std::uint64_t rng_seed = 1;
    double unseen_valid_fraction = 0.1;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::vector<std::size_t> test;
};

namespace detail {

template <Labeled T>
std::map<std::pair<std::string, int>, std::vector<std::size_t>> strata(const std::vector<T>& samples,
                                                                        const std::string& skip_user = {})
{
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!skip_user.empty() && samples[i].user_id == skip_user) {
            continue;
        }
        out[{samples[i].user_id, Letter(samples[i].letter).index()}].push_back(i);
    }
    return out;
}

}  // namespace detail

/// Stratified by (user, letter): a stratum of n gets floor(n/4) test items,
/// floor((n+1)/4) validation items and the rest for training, so each share
/// stays within one sample of 1/2, 1/4, 1/4.
template <Labeled T>
SplitIndices split_allseen(const std::vector<T>& samples, const SplitSpec& spec)
{
    std::mt19937_64 rng(spec.rng_seed);
    SplitIndices out;
    for (auto& [key, idx] : detail::strata(samples)) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t n = idx.size();
        const std::size_t n_test = n / 4;
        const std::size_t n_valid = (n + 1) / 4;
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_test) {
                out.test.push_back(idx[i]);
            } else if (i < n_test + n_valid) {
                out.valid.push_back(idx[i]);
            } else {
                out.train.push_back(idx[i]);
            }
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.valid.begin(), out.valid.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

/// Leave-one-user-out. The held-out user's samples form the (shuffled) test
/// set; each remaining (user, letter) stratum gives round(n * fraction) to
/// validation.
template <Labeled T>
SplitIndices split_unseen(const std::vector<T>& samples, const SplitSpec& spec)
{
    const bool present = std::any_of(samples.begin(), samples.end(),
                                     [&](const T& s) { return s.user_id == spec.test_user; });
    if (spec.test_user.empty() || !present) {
        throw UnknownUser("test user '" + spec.test_user + "' not in dataset");
    }
    std::mt19937_64 rng(spec.rng_seed);
    SplitIndices out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].user_id == spec.test_user) {
            out.test.push_back(i);
        }
    }
    std::shuffle(out.test.begin(), out.test.end(), rng);
    for (auto& [key, idx] : detail::strata(samples, spec.test_user)) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) *
                                                                   spec.unseen_valid_fraction));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_valid ? out.valid : out.train).push_back(idx[i]);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.valid.begin(), out.valid.end());
    return out;
}

template <Labeled T>
SplitIndices split(const std::vector<T>& samples, const SplitSpec& spec)
{
    return spec.mode == SplitMode::allseen ? split_allseen(samples, spec) : split_unseen(samples, spec);
}

/// Distinct user ids in first-appearance order.
template <Labeled T>
std::vector<std::string> users(const std::vector<T>& samples)
{
    std::vector<std::string> out;
    for (const auto& s : samples) {
        if (std::find(out.begin(), out.end(), s.user_id) == out.end()) {
            out.push_back(s.user_id);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic hands
//
// Each letter owns a fixed hand configuration: every digit is curled onto the
// palm, extended upwards or pointed at the camera, and the 24 configurations
// differ in at least two digits. Users vary in hand size, finger proportions,
// pose bias, depth relief, skin tone and distance from the sensor, and each
// user forms every letter with its own finger angles and lengths; samples
// add pose jitter and sensor noise. The scene behind the hand sits well past
// the 120 mm envelope.

namespace synth {

inline constexpr int kSide = 100;

enum class Digit { curled, extended, forward };

using HandCode = std::array<Digit, 5>;  // thumb, index, middle, ring, pinky

inline std::uint64_t mix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = 0x51A9;
    for (const auto p : parts) {
        h = mix(h ^ p);
    }
    return h;
}

/// The 24 configurations, fixed for every dataset.
inline const std::array<HandCode, kNumClasses>& letter_codes()
{
    static const std::array<HandCode, kNumClasses> codes = [] {
        std::vector<int> order(243);
        for (int i = 0; i < 243; ++i) {
            order[static_cast<std::size_t>(i)] = i;
        }
        std::mt19937_64 rng(0x5EED);
        std::shuffle(order.begin(), order.end(), rng);
        auto decode = [](int v) {
            HandCode c{};
            for (auto& d : c) {
                d = static_cast<Digit>(v % 3);
                v /= 3;
            }
            return c;
        };
        std::array<HandCode, kNumClasses> out{};
        std::size_t count = 0;
        for (const int v : order) {
            const HandCode c = decode(v);
            const bool far_enough = std::all_of(out.begin(), out.begin() + static_cast<long>(count),
                                                [&](const HandCode& o) {
                                                    int diff = 0;
                                                    for (std::size_t k = 0; k < 5; ++k) {
                                                        diff += o[k] != c[k];
                                                    }
                                                    return diff >= 2;
                                                });
            if (far_enough) {
                out[count++] = c;
                if (count == out.size()) {
                    break;
                }
            }
        }
        return out;
    }();
    return codes;
}

struct UserTraits {
    int base_mm = 800;
    double hand_scale = 1.0;
    double finger_length = 1.0;
    double angle_bias = 0.0;  // radians
    double depth_relief = 1.0;
    double skin = 160.0;
};

inline UserTraits user_traits(std::uint64_t seed, int user)
{
    std::mt19937_64 rng(mix({seed, 0xA11CE, static_cast<std::uint64_t>(user)}));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    UserTraits t;
    t.base_mm = 650 + static_cast<int>(std::lround(125.0 * (u(rng) + 1.0)));
    t.hand_scale = 1.0 + 0.12 * u(rng);
    t.finger_length = 1.0 + 0.1 * u(rng);
    t.angle_bias = 0.1 * u(rng);
    t.depth_relief = 1.0 + 0.12 * u(rng);
    t.skin = 150.0 + 40.0 * u(rng);
    return t;
}

/// How one user forms one letter: systematic per-finger deviations from the
/// canonical pose, fixed across that user's samples of the letter.
struct LetterStyle {
    std::array<double, 5> angle{};   // radians
    std::array<double, 5> length{1.0, 1.0, 1.0, 1.0, 1.0};
    double roll = 0.0;               // whole-hand rotation, radians
};

inline LetterStyle letter_style(std::uint64_t seed, int user, Letter letter)
{
    std::mt19937_64 rng(mix({seed, 0x57E1E, static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(letter.index())}));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LetterStyle st;
    for (std::size_t k = 0; k < 5; ++k) {
        st.angle[k] = 0.12 * u(rng);
        st.length[k] = 1.0 + 0.1 * u(rng);
    }
    st.roll = 0.1 * u(rng);
    return st;
}

struct Segment {
    double ax, ay, az, bx, by, bz, radius;
};

struct HandModel {
    std::vector<Segment> segments;
    double palm_cx = 0, palm_cy = 10, palm_rx = 18, palm_ry = 20, palm_z = 60;
};

inline HandModel build_hand(const HandCode& code, const UserTraits& user, const LetterStyle& style,
                            std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    HandModel h;
    const double s = user.hand_scale;
    const double relief = user.depth_relief;
    h.palm_rx *= s;
    h.palm_ry *= s;
    h.palm_cy *= s;
    h.palm_z = 60.0 * relief;
    // Forearm recedes from the wrist and is cut off by the depth threshold.
    h.segments.push_back({0.0, 26.0 * s, 70.0 * relief, 0.0, 70.0 * s, 190.0, 11.0 * s});

    const std::array<double, 5> base_x{-17.0, -13.5, -4.5, 4.5, 13.5};
    const std::array<double, 5> base_y{6.0, -8.0, -10.0, -9.0, -6.0};
    const std::array<double, 5> angle{-1.0, -0.21, -0.07, 0.07, 0.21};
    const std::array<double, 5> length{20.0, 28.0, 31.0, 28.0, 22.0};
    for (std::size_t k = 0; k < 5; ++k) {
        const double bx = base_x[k] * s;
        const double by = base_y[k] * s;
        const double a = angle[k] + user.angle_bias + style.angle[k] + 0.05 * n(rng);
        const double len = length[k] * s * user.finger_length * style.length[k] * (1.0 + 0.05 * n(rng));
        const double dx = std::sin(a);
        const double dy = -std::cos(a);
        const double r = (k == 0 ? 4.8 : 4.0) * s;
        switch (code[k]) {
        case Digit::extended:
            h.segments.push_back({bx, by, 52.0 * relief, bx + dx * len, by + dy * len, 48.0 * relief, r});
            break;
        case Digit::forward:
            h.segments.push_back(
                {bx, by, 50.0 * relief, bx + dx * len * 0.35, by + dy * len * 0.35, 6.0 * relief, r * 1.1});
            break;
        case Digit::curled: {
            const double cx = k == 0 ? bx + 9.0 * s : bx;
            const double cy = k == 0 ? by + 2.0 * s : by + 9.0 * s;
            h.segments.push_back({cx, cy, 34.0 * relief, cx + 0.1, cy + 0.1, 34.0 * relief, r * 1.25});
            break;
        }
        }
    }
    return h;
}

// Relative depth of the hand surface at (x, y) in hand coordinates, or a
// negative value when the point is off the hand.
inline double hand_depth(const HandModel& h, double x, double y)
{
    double best = -1.0;
    auto take = [&](double z) {
        if (best < 0.0 || z < best) {
            best = z;
        }
    };
    const double ex = (x - h.palm_cx) / h.palm_rx;
    const double ey = (y - h.palm_cy) / h.palm_ry;
    const double e = ex * ex + ey * ey;
    if (e <= 1.0) {
        take(h.palm_z + 8.0 * e);
    }
    for (const auto& sg : h.segments) {
        const double vx = sg.bx - sg.ax;
        const double vy = sg.by - sg.ay;
        const double vv = vx * vx + vy * vy;
        const double t = vv > 0.0 ? std::clamp(((x - sg.ax) * vx + (y - sg.ay) * vy) / vv, 0.0, 1.0) : 0.0;
        const double px = sg.ax + t * vx - x;
        const double py = sg.ay + t * vy - y;
        const double d2 = px * px + py * py;
        if (d2 <= sg.radius * sg.radius) {
            const double bulge = 1.0 - std::sqrt(1.0 - d2 / (sg.radius * sg.radius));
            take(sg.az + t * (sg.bz - sg.az) + 4.0 * bulge);
        }
    }
    return best;
}

inline Sample render(const std::string& user_id, int user, Letter letter, int index, std::uint64_t seed)
{
    const UserTraits traits = user_traits(seed, user);
    std::mt19937_64 rng(mix({seed, static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(letter.index()),
                             static_cast<std::uint64_t>(index)}));
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    const LetterStyle style = letter_style(seed, user, letter);
    const HandModel hand = build_hand(letter_codes()[static_cast<std::size_t>(letter.index())], traits, style, rng);
    const double rot = style.roll + 0.14 * u(rng);
    const double scale = 1.0 + 0.05 * u(rng);
    const double cx = 50.0 + 5.0 * u(rng);
    const double cy = 46.0 + 5.0 * u(rng);
    const int base = traits.base_mm + static_cast<int>(std::lround(25.0 * u(rng)));
    const double bg_tilt_x = 0.5 * u(rng);
    const double bg_tilt_y = 0.5 * u(rng);
    const double bg_light = 90.0 + 50.0 * u(rng);

    Sample s;
    s.user_id = user_id;
    s.letter = letter;
    s.depth = DepthImage(kSide, kSide);
    s.intensity = IntensityImage(kSide, kSide);
    std::bernoulli_distribution hole(0.02);
    const double c = std::cos(rot);
    const double sn = std::sin(rot);
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            const double dx = (x - cx) / scale;
            const double dy = (y - cy) / scale;
            const double hx = c * dx + sn * dy;
            const double hy = -sn * dx + c * dy;
            const double z = hand_depth(hand, hx, hy);
            double depth = 0.0;
            double light = 0.0;
            if (z >= 0.0) {
                depth = base + z + 1.2 * n(rng);
                light = traits.skin * (1.15 - 0.004 * z) + 5.0 * n(rng);
            } else {
                depth = base + 320.0 + bg_tilt_x * x + bg_tilt_y * y + 3.0 * n(rng);
                light = bg_light + 0.6 * (x - y) + 25.0 * std::sin(0.3 * x + 0.2 * y) + 8.0 * n(rng);
                if (hole(rng)) {
                    depth = 0.0;
                }
            }
            s.depth.at(x, y) = static_cast<std::uint16_t>(std::clamp(std::lround(depth), 0L, 65535L));
            s.intensity.at(x, y) = static_cast<float>(std::clamp(std::lround(light), 1L, 255L));
        }
    }
    // Interlaced capture: odd scan lines lag by one pixel.
    for (int y = 1; y < kSide; y += 2) {
        for (int x = kSide - 1; x > 0; --x) {
            s.intensity.at(x, y) = s.intensity.at(x - 1, y);
        }
    }
    return s;
}

inline std::string user_name(int user)
{
    return "user" + std::to_string(user + 1);
}

}  // namespace synth

/// Users user1..userN, letters in class order, per_class samples each.
inline std::vector<Sample> gen_synthetic(int n_users, int per_class, std::uint64_t rng_seed)
{
    if (n_users < 1 || per_class < 1) {
        throw ConfigError("gen_synthetic needs at least one user and one sample per class");
    }
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(n_users) * kNumClasses * static_cast<std::size_t>(per_class));
    for (int u = 0; u < n_users; ++u) {
        for (const auto letter : all_letters()) {
            for (int i = 0; i < per_class; ++i) {
                out.push_back(synth::render(synth::user_name(u), u, letter, i, rng_seed));
            }
        }
    }
    return out;
}

/// Writes <dir>/<user>/<letter>_<n>_{depth,intensity}.pgm plus
/// <dir>/manifest.csv with relative paths, in sample order.
inline std::string write_dataset(const std::vector<Sample>& samples, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<ManifestRow> rows;
    std::map<std::pair<std::string, int>, int> counter;
    for (const auto& s : samples) {
        const int n = counter[{s.user_id, s.letter.index()}]++;
        fs::create_directories(fs::path(dir) / s.user_id);
        const std::string stem = s.user_id + "/" + s.letter.str() + "_" + std::to_string(n);
        const std::string dp = stem + "_depth.pgm";
        const std::string ip = stem + "_intensity.pgm";
        pgm::write_depth((fs::path(dir) / dp).string(), s.depth);
        pgm::write_intensity((fs::path(dir) / ip).string(), s.intensity);
        rows.push_back({dp, ip, s.user_id, s.letter.str()});
    }
    const std::string manifest = (fs::path(dir) / "manifest.csv").string();
    write_manifest(manifest, rows);
    return manifest;
}

}  // namespace handsign::dataset
