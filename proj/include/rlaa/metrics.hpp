#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rlaa/domain.hpp"
#include "rlaa/errors.hpp"
#include "rlaa/util.hpp"

namespace rlaa {

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// Lowercases, splits on whitespace, strips punctuation off token edges.
/// Interior punctuation (don't, e-mail) survives.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        size_t b = 0, e = cur.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
        if (e > b) out.push_back(cur.substr(b, e - b));
        cur.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------
// Attribute matching
// ---------------------------------------------------------------------------

namespace detail {

inline bool parse_strict_int(const std::string& s, long long& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (size_t k = i; k < t.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(t[k]))) return false;
    try {
        out = std::stoll(t);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

inline std::vector<std::string> place_parts(const std::string& s) {
    std::vector<std::string> parts;
    for (const auto& piece : split(s, ',')) {
        std::string p = to_lower(normalize_whitespace(std::string(piece)));
        if (!p.empty()) parts.push_back(std::move(p));
    }
    return parts;
}

}  // namespace detail

/// Kind-aware equivalence between a guessed value and the ground truth.
/// An abstention (blank or "unknown") never matches.
inline bool match_attribute(AttributeKind kind, const std::string& guess,
                            const std::string& truth) {
    if (is_unknown_value(guess) || is_unknown_value(truth)) return false;
    switch (kind) {
        case AttributeKind::Integer: {
            long long g = 0, t = 0;
            return detail::parse_strict_int(guess, g) && detail::parse_strict_int(truth, t) &&
                   g == t;
        }
        case AttributeKind::Enum:
            return iequals(trim(guess), trim(truth));
        case AttributeKind::Place: {
            // City-level and country-level hits both count, so any shared
            // comma-separated component is a match.
            const auto g = detail::place_parts(guess);
            const auto t = detail::place_parts(truth);
            for (const auto& a : g)
                for (const auto& b : t)
                    if (a == b) return true;
            return false;
        }
        case AttributeKind::FreeText: {
            const std::string a = to_lower(normalize_whitespace(guess));
            const std::string b = to_lower(normalize_whitespace(truth));
            if (a.empty() || b.empty()) return false;
            return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
        }
    }
    return false;
}

/// Fraction of the document's protected attributes an adversary recovered.
inline double priv_score(const std::vector<AttributeGuess>& guesses, const Document& doc,
                         const AttributeSchema& schema) {
    const auto prot = protected_set(doc, schema);
    if (prot.empty())
        throw EmptyProtectedSetError("document " + doc.id + " has no protected attributes");
    int hits = 0;
    for (const auto& [name, truth] : prot) {
        const AttributeSpec* spec = schema.find(name);
        for (const auto& g : guesses) {
            if (g.attribute != name) continue;
            if (match_attribute(spec->kind, g.value, truth)) ++hits;
            break;  // one guess per attribute counts
        }
    }
    return static_cast<double>(hits) / static_cast<double>(prot.size());
}

// ---------------------------------------------------------------------------
// Utility scoring
// ---------------------------------------------------------------------------

/// Equal-weight blend of readability/10, meaning/10 and the hallucination bit.
inline double util_score(double readability, double meaning, double hallucination) {
    return (readability / 10.0 + meaning / 10.0 + hallucination) / 3.0;
}

inline double util_score(const JudgeScores& s) {
    return util_score(s.readability, s.meaning, s.hallucination);
}

// ---------------------------------------------------------------------------
// Surface-similarity metrics
// ---------------------------------------------------------------------------

inline size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline double rouge_l_f1(const std::vector<std::string>& reference,
                         const std::vector<std::string>& candidate) {
    if (reference.empty() || candidate.empty()) return 0.0;
    const double lcs = static_cast<double>(lcs_length(reference, candidate));
    if (lcs == 0.0) return 0.0;
    const double p = lcs / static_cast<double>(candidate.size());
    const double r = lcs / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

inline double rouge_l_f1(const std::string& reference, const std::string& candidate) {
    return rouge_l_f1(tokenize(reference), tokenize(candidate));
}

/// BLEU-4 with the short-text smoothing needed for sentence-level scoring:
/// any order whose clipped precision is zero (or that has no n-grams at all)
/// contributes 1 / (2 * |candidate|).
inline double bleu(const std::vector<std::string>& reference,
                   const std::vector<std::string>& candidate) {
    if (candidate.empty()) return 0.0;
    const double smoothing = 1.0 / (2.0 * static_cast<double>(candidate.size()));
    double log_sum = 0.0;
    for (size_t n = 1; n <= 4; ++n) {
        std::map<std::vector<std::string>, int> ref_counts;
        if (reference.size() >= n)
            for (size_t i = 0; i + n <= reference.size(); ++i)
                ++ref_counts[{reference.begin() + i, reference.begin() + i + n}];
        long long matched = 0, total = 0;
        if (candidate.size() >= n) {
            std::map<std::vector<std::string>, int> cand_counts;
            for (size_t i = 0; i + n <= candidate.size(); ++i)
                ++cand_counts[{candidate.begin() + i, candidate.begin() + i + n}];
            for (const auto& [gram, count] : cand_counts) {
                total += count;
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) matched += std::min(count, it->second);
            }
        }
        const double p = (total == 0 || matched == 0)
                             ? smoothing
                             : static_cast<double>(matched) / static_cast<double>(total);
        log_sum += std::log(p);
    }
    const double brevity =
        candidate.size() >= reference.size()
            ? 1.0
            : std::exp(1.0 - static_cast<double>(reference.size()) /
                                 static_cast<double>(candidate.size()));
    return brevity * std::exp(log_sum / 4.0);
}

inline double bleu(const std::string& reference, const std::string& candidate) {
    return bleu(tokenize(reference), tokenize(candidate));
}

// ---------------------------------------------------------------------------
// Marginal economics
// ---------------------------------------------------------------------------

/// Builds the per-step transaction series from privacy and utility levels
/// measured at x0..xT. Entry t prices the step from x(t-1) to x(t).
inline std::vector<MarginalRecord> marginal_series(const std::vector<double>& privacy,
                                                   const std::vector<double>& utility) {
    if (privacy.size() != utility.size())
        throw DomainError("privacy and utility series differ in length");
    if (privacy.empty()) throw DomainError("empty level series");
    std::vector<MarginalRecord> out;
    out.reserve(privacy.size() - 1);
    for (size_t t = 1; t < privacy.size(); ++t)
        out.push_back(make_marginal(static_cast<int>(t), privacy[t - 1] - privacy[t],
                                    utility[t - 1] - utility[t]));
    return out;
}

/// Total utility spent per unit of total privacy gained through step t.
/// Robust to individual no-gain steps because the sums telescope.
inline double cumulative_mrs(const std::vector<MarginalRecord>& records, size_t upto) {
    double dp = 0.0, dc = 0.0;
    for (size_t i = 0; i < records.size() && i < upto; ++i) {
        dp += records[i].delta_p;
        dc += records[i].delta_c;
    }
    return dc / std::max(dp, kEpsilonP);
}

inline double cumulative_mrs(const std::vector<MarginalRecord>& records) {
    return cumulative_mrs(records, records.size());
}

/// Percent reduction in cumulative MRS relative to a baseline agent.
inline double rationality_gain(double baseline_mrs, double our_mrs) {
    if (!(baseline_mrs > 0.0)) throw DomainError("baseline cumulative MRS must be positive");
    return (baseline_mrs - our_mrs) / baseline_mrs * 100.0;
}

}  // namespace rlaa
