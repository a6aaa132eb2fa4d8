#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "handsign/error.hpp"
#include "handsign/letters.hpp"

namespace handsign::eval {

/// Rows are true letters, columns predicted letters.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

    std::uint64_t at(int truth, int pred) const
    {
        return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    }
    std::uint64_t& at(int truth, int pred)
    {
        return counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    }

    std::uint64_t total() const
    {
        std::uint64_t t = 0;
        for (const auto& row : counts) {
            for (const auto c : row) {
                t += c;
            }
        }
        return t;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(const std::vector<Letter>& preds, const std::vector<Letter>& truths)
{
    if (preds.size() != truths.size()) {
        throw LengthMismatch("predictions and truths differ in length");
    }
    if (preds.empty()) {
        throw EmptyInput("confusion matrix needs at least one sample");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        ++cm.at(truths[i].index(), preds[i].index());
    }
    return cm;
}

struct LetterMetrics {
    Letter letter;
    std::optional<double> precision;
    std::optional<double> recall;
    std::uint64_t support = 0;  // true occurrences

    friend bool operator==(const LetterMetrics&, const LetterMetrics&) = default;
};

struct ConfusedPair {
    Letter truth;
    Letter predicted;
    std::uint64_t count = 0;

    friend bool operator==(const ConfusedPair&, const ConfusedPair&) = default;
};

/// Undefined ratios (zero denominators) are empty optionals and are left out
/// of the macro averages.
struct EvalReport {
    std::string split;
    std::uint64_t total = 0;
    std::vector<LetterMetrics> letters;
    std::optional<double> macro_precision;
    std::optional<double> macro_recall;
    std::optional<double> micro_precision;
    std::optional<double> micro_recall;
    std::vector<ConfusedPair> most_confused;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline std::optional<double> mean_defined(const std::vector<std::optional<double>>& values)
{
    double sum = 0.0;
    int n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / n;
}

inline EvalReport precision_recall(const ConfusionMatrix& cm, std::string split = {}, std::size_t top_pairs = 5)
{
    EvalReport r;
    r.split = std::move(split);
    r.total = cm.total();
    std::vector<std::optional<double>> precisions;
    std::vector<std::optional<double>> recalls;
    std::uint64_t diagonal = 0;
    for (int l = 0; l < kNumClasses; ++l) {
        std::uint64_t row = 0;
        std::uint64_t col = 0;
        for (int k = 0; k < kNumClasses; ++k) {
            row += cm.at(l, k);
            col += cm.at(k, l);
        }
        const auto hit = cm.at(l, l);
        diagonal += hit;
        LetterMetrics m;
        m.letter = Letter::from_index(l);
        m.support = row;
        if (row > 0) {
            m.recall = static_cast<double>(hit) / static_cast<double>(row);
        }
        if (col > 0) {
            m.precision = static_cast<double>(hit) / static_cast<double>(col);
        }
        precisions.push_back(m.precision);
        recalls.push_back(m.recall);
        r.letters.push_back(m);
    }
    r.macro_precision = mean_defined(precisions);
    r.macro_recall = mean_defined(recalls);
    if (r.total > 0) {
        // Single-label classification: micro precision and recall are both accuracy.
        r.micro_precision = static_cast<double>(diagonal) / static_cast<double>(r.total);
        r.micro_recall = r.micro_precision;
    }
    for (int t = 0; t < kNumClasses; ++t) {
        for (int p = 0; p < kNumClasses; ++p) {
            if (t != p && cm.at(t, p) > 0) {
                r.most_confused.push_back({Letter::from_index(t), Letter::from_index(p), cm.at(t, p)});
            }
        }
    }
    std::stable_sort(r.most_confused.begin(), r.most_confused.end(),
                     [](const ConfusedPair& a, const ConfusedPair& b) { return a.count > b.count; });
    if (r.most_confused.size() > top_pairs) {
        r.most_confused.resize(top_pairs);
    }
    return r;
}

/// Unweighted mean of several reports: per-letter values over the reports
/// where they are defined, macro values as the mean of the per-report macros.
inline EvalReport average_reports(const std::vector<EvalReport>& reports, std::string split)
{
    if (reports.empty()) {
        throw EmptyInput("nothing to average");
    }
    EvalReport out;
    out.split = std::move(split);
    for (int l = 0; l < kNumClasses; ++l) {
        std::vector<std::optional<double>> p;
        std::vector<std::optional<double>> r;
        LetterMetrics m;
        m.letter = Letter::from_index(l);
        for (const auto& rep : reports) {
            const auto& lm = rep.letters[static_cast<std::size_t>(l)];
            p.push_back(lm.precision);
            r.push_back(lm.recall);
            m.support += lm.support;
        }
        m.precision = mean_defined(p);
        m.recall = mean_defined(r);
        out.letters.push_back(m);
    }
    std::vector<std::optional<double>> mp;
    std::vector<std::optional<double>> mr;
    std::vector<std::optional<double>> up;
    std::vector<std::optional<double>> ur;
    for (const auto& rep : reports) {
        out.total += rep.total;
        mp.push_back(rep.macro_precision);
        mr.push_back(rep.macro_recall);
        up.push_back(rep.micro_precision);
        ur.push_back(rep.micro_recall);
    }
    out.macro_precision = mean_defined(mp);
    out.macro_recall = mean_defined(mr);
    out.micro_precision = mean_defined(up);
    out.micro_recall = mean_defined(ur);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json optional_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> optional_from(const nlohmann::json& j)
{
    if (j.is_null()) {
        return std::nullopt;
    }
    return j.get<double>();
}

inline nlohmann::json to_json(const EvalReport& r)
{
    nlohmann::json j;
    j["split"] = r.split;
    j["total"] = r.total;
    j["macro_precision"] = optional_json(r.macro_precision);
    j["macro_recall"] = optional_json(r.macro_recall);
    j["micro_precision"] = optional_json(r.micro_precision);
    j["micro_recall"] = optional_json(r.micro_recall);
    j["letters"] = nlohmann::json::array();
    for (const auto& m : r.letters) {
        j["letters"].push_back({{"letter", m.letter.str()},
                                {"precision", optional_json(m.precision)},
                                {"recall", optional_json(m.recall)},
                                {"support", m.support}});
    }
    j["most_confused"] = nlohmann::json::array();
    for (const auto& p : r.most_confused) {
        j["most_confused"].push_back(
            {{"truth", p.truth.str()}, {"predicted", p.predicted.str()}, {"count", p.count}});
    }
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j)
{
    try {
        EvalReport r;
        r.split = j.at("split").get<std::string>();
        r.total = j.at("total").get<std::uint64_t>();
        r.macro_precision = optional_from(j.at("macro_precision"));
        r.macro_recall = optional_from(j.at("macro_recall"));
        r.micro_precision = optional_from(j.at("micro_precision"));
        r.micro_recall = optional_from(j.at("micro_recall"));
        for (const auto& m : j.at("letters")) {
            r.letters.push_back({Letter::parse(m.at("letter").get<std::string>()), optional_from(m.at("precision")),
                                 optional_from(m.at("recall")), m.at("support").get<std::uint64_t>()});
        }
        for (const auto& p : j.at("most_confused")) {
            r.most_confused.push_back({Letter::parse(p.at("truth").get<std::string>()),
                                       Letter::parse(p.at("predicted").get<std::string>()),
                                       p.at("count").get<std::uint64_t>()});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed report: ") + e.what());
    }
}

inline std::string format_value(const std::optional<double>& v)
{
    if (!v) {
        return "";
    }
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

/// letter,precision,recall,support; undefined values are empty cells.
inline std::string report_csv(const EvalReport& r)
{
    std::ostringstream os;
    os << "letter,precision,recall,support\n";
    for (const auto& m : r.letters) {
        os << m.letter.symbol() << ',' << format_value(m.precision) << ',' << format_value(m.recall) << ','
           << m.support << '\n';
    }
    return os.str();
}

inline std::string confusion_csv(const ConfusionMatrix& cm)
{
    std::ostringstream os;
    os << "truth\\predicted";
    for (const auto l : kLetterSymbols) {
        os << ',' << l;
    }
    os << '\n';
    for (int t = 0; t < kNumClasses; ++t) {
        os << kLetterSymbols[static_cast<std::size_t>(t)];
        for (int p = 0; p < kNumClasses; ++p) {
            os << ',' << cm.at(t, p);
        }
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Comparison across runs

struct ComparisonTable {
    std::vector<std::string> runs;
    std::vector<EvalReport> reports;

    std::string csv() const
    {
        std::ostringstream os;
        os << "letter";
        for (const auto& n : runs) {
            os << ',' << n << "_precision," << n << "_recall";
        }
        os << '\n';
        for (int l = 0; l < kNumClasses; ++l) {
            os << kLetterSymbols[static_cast<std::size_t>(l)];
            for (const auto& r : reports) {
                const auto& m = r.letters[static_cast<std::size_t>(l)];
                os << ',' << format_value(m.precision) << ',' << format_value(m.recall);
            }
            os << '\n';
        }
        os << "macro";
        for (const auto& r : reports) {
            os << ',' << format_value(r.macro_precision) << ',' << format_value(r.macro_recall);
        }
        os << '\n';
        return os.str();
    }

    nlohmann::json json() const
    {
        nlohmann::json j = nlohmann::json::array();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            j.push_back({{"run", runs[i]}, {"report", to_json(reports[i])}});
        }
        return j;
    }
};

/// Columns keep the order of `named`.
inline ComparisonTable compare_reports(const std::vector<std::pair<std::string, EvalReport>>& named)
{
    if (named.empty()) {
        throw EmptyInput("compare_reports needs at least one report");
    }
    ComparisonTable t;
    for (const auto& [name, report] : named) {
        t.runs.push_back(name);
        t.reports.push_back(report);
    }
    return t;
}

}  // namespace handsign::eval
