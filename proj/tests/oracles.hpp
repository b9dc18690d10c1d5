#pragma once

// Reference implementations used only by tests. Each is written in a
// deliberately different style from the library (brute force where the
// library uses DP, string-keyed maps where the library keys on token
// vectors) so that agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline bool is_subsequence(const Tokens& needle, const Tokens& hay) {
    size_t i = 0;
    for (size_t j = 0; j < hay.size() && i < needle.size(); ++j)
        if (hay[j] == needle[i]) ++i;
    return i == needle.size();
}

/// Brute-force LCS: enumerate every subsequence of the shorter side.
/// Only viable for the short sequences tests use (len <= 12).
inline size_t lcs_brute(const Tokens& a, const Tokens& b) {
    const Tokens& small = a.size() <= b.size() ? a : b;
    const Tokens& large = a.size() <= b.size() ? b : a;
    size_t best = 0;
    for (unsigned mask = 0; mask < (1u << small.size()); ++mask) {
        Tokens sub;
        for (size_t i = 0; i < small.size(); ++i)
            if (mask & (1u << i)) sub.push_back(small[i]);
        if (sub.size() > best && is_subsequence(sub, large)) best = sub.size();
    }
    return best;
}

inline double rouge_l_brute(const Tokens& reference, const Tokens& candidate) {
    if (reference.empty() || candidate.empty()) return 0.0;
    const double lcs = static_cast<double>(lcs_brute(reference, candidate));
    if (lcs == 0.0) return 0.0;
    const double p = lcs / candidate.size();
    const double r = lcs / reference.size();
    return 2.0 * p * r / (p + r);
}

inline std::map<std::string, int> ngram_counts(const Tokens& toks, size_t n) {
    std::map<std::string, int> counts;
    for (size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key;
        for (size_t k = 0; k < n; ++k) {
            key += toks[i + k];
            key += '\x1f';
        }
        ++counts[key];
    }
    return counts;
}

/// BLEU-4, zero-or-missing precisions smoothed to 1/(2*len(candidate)),
/// brevity penalty exp(1 - len(ref)/len(cand)) when the candidate is short.
inline double bleu_reference(const Tokens& reference, const Tokens& candidate) {
    if (candidate.empty()) return 0.0;
    const double smoothing = 1.0 / (2.0 * candidate.size());
    double product = 1.0;
    for (size_t n = 1; n <= 4; ++n) {
        const auto ref = ngram_counts(reference, n);
        const auto cand = ngram_counts(candidate, n);
        long long matched = 0, total = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            auto it = ref.find(gram);
            if (it != ref.end()) matched += std::min<long long>(count, it->second);
        }
        const double p = (total == 0 || matched == 0)
                             ? smoothing
                             : static_cast<double>(matched) / static_cast<double>(total);
        product *= std::pow(p, 0.25);
    }
    const double bp = candidate.size() >= reference.size()
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(reference.size()) /
                                               static_cast<double>(candidate.size()));
    return bp * product;
}

}  // namespace oracle
