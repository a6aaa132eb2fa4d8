#pragma once

#include <array>
#include <string>
#include <string_view>

#include "handsign/error.hpp"

namespace handsign {

inline constexpr int kNumClasses = 24;

// The 24 static fingerspelling letters, A-Y without J. Z is dynamic too and
// falls outside A-Y anyway.
inline constexpr std::array<char, kNumClasses> kLetterSymbols = {
    'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'K', 'L', 'M',
    'N', 'O', 'P', 'Q', 'R', 'S', 'T', 'U', 'V', 'W', 'X', 'Y'};

/// Class label for one static letter. Ordering is the class index order used
/// by the network outputs and every report.
class Letter {
public:
    constexpr Letter() = default;

    static constexpr Letter from_index(int index)
    {
        if (index < 0 || index >= kNumClasses) {
            throw LabelOutOfRange("class index " + std::to_string(index) + " outside [0, 24)");
        }
        Letter l;
        l.index_ = index;
        return l;
    }

    static Letter from_char(char c)
    {
        if (c >= 'a' && c <= 'z') {
            c = static_cast<char>(c - 'a' + 'A');
        }
        for (int i = 0; i < kNumClasses; ++i) {
            if (kLetterSymbols[static_cast<std::size_t>(i)] == c) {
                return from_index(i);
            }
        }
        throw UnknownLetter(std::string("unknown letter '") + c + "'");
    }

    static Letter parse(std::string_view s)
    {
        if (s.size() != 1) {
            throw UnknownLetter("unknown letter '" + std::string(s) + "'");
        }
        return from_char(s.front());
    }

    constexpr int index() const { return index_; }
    constexpr char symbol() const { return kLetterSymbols[static_cast<std::size_t>(index_)]; }
    std::string str() const { return std::string(1, symbol()); }

    friend constexpr bool operator==(Letter a, Letter b) { return a.index_ == b.index_; }
    friend constexpr auto operator<=>(Letter a, Letter b) { return a.index_ <=> b.index_; }

private:
    int index_ = 0;
};

inline std::array<Letter, kNumClasses> all_letters()
{
    std::array<Letter, kNumClasses> out{};
    for (int i = 0; i < kNumClasses; ++i) {
        out[static_cast<std::size_t>(i)] = Letter::from_index(i);
    }
    return out;
}

}  // namespace handsign
