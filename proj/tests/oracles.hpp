#pragma once

// Brute-force reference implementations of the surface metrics, kept
// deliberately independent of src/evalsuite.cpp: different containers,
// different counting routes, same final arithmetic. Test-only.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hint/teacher.hpp"

namespace oracles {

using Text = std::vector<std::string>;
using Gram = std::vector<std::string>;

inline std::map<Gram, long> gram_map(const Text& t, int k) {
    std::map<Gram, long> m;
    for (size_t s = 0; s + static_cast<size_t>(k) <= t.size(); ++s)
        ++m[Gram(t.begin() + static_cast<long>(s), t.begin() + static_cast<long>(s) + k)];
    return m;
}

inline double bf_bleu(const std::vector<Text>& cands, const std::vector<Text>& refs, int n) {
    long clen = 0, rlen = 0;
    std::vector<long> clipped(static_cast<size_t>(n), 0), total(static_cast<size_t>(n), 0);
    for (size_t i = 0; i < cands.size(); ++i) {
        clen += static_cast<long>(cands[i].size());
        rlen += static_cast<long>(refs[i].size());
        for (int k = 1; k <= n; ++k) {
            auto cm = gram_map(cands[i], k);
            auto rm = gram_map(refs[i], k);
            for (const auto& [g, c] : cm) {
                const auto it = rm.find(g);
                clipped[static_cast<size_t>(k - 1)] += std::min(c, it == rm.end() ? 0L : it->second);
                total[static_cast<size_t>(k - 1)] += c;
            }
        }
    }
    if (clen == 0) return 0.0;
    double log_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        double p = total[static_cast<size_t>(k)] > 0
                       ? static_cast<double>(clipped[static_cast<size_t>(k)]) /
                             static_cast<double>(total[static_cast<size_t>(k)])
                       : 0.0;
        if (p <= 0.0) p = 1e-9;
        log_sum += std::log(p);
    }
    const double bp =
        clen >= rlen ? 1.0 : std::exp(1.0 - static_cast<double>(rlen) / static_cast<double>(clen));
    return bp * std::exp(log_sum / static_cast<double>(n));
}

// quadratic scan: for each 4-gram position count its equal positions
inline double bf_lexical_repetition(const std::vector<Text>& texts, int n, bool strict_gt = false) {
    long hits = 0;
    for (const Text& t : texts) {
        bool qualifies = false;
        if (t.size() >= 4) {
            for (size_t i = 0; i + 4 <= t.size(); ++i) {
                long count = 0;
                for (size_t j = 0; j + 4 <= t.size(); ++j) {
                    bool eq = true;
                    for (int k = 0; k < 4; ++k) eq = eq && t[i + static_cast<size_t>(k)] == t[j + static_cast<size_t>(k)];
                    count += eq;
                }
                if (strict_gt ? count > n : count >= n) qualifies = true;
            }
        }
        hits += qualifies;
    }
    return static_cast<double>(hits) / static_cast<double>(texts.size());
}

// repeated max extraction instead of sorting
inline double bf_semantic_repetition(const std::vector<std::vector<std::vector<int>>>& texts,
                                     int n, const hint::SimilarityOracle& oracle, long* skipped) {
    double total = 0.0;
    long counted = 0;
    if (skipped) *skipped = 0;
    for (const auto& sents : texts) {
        if (sents.size() < 2) {
            if (skipped) ++*skipped;
            continue;
        }
        std::vector<double> sims;
        for (size_t i = 0; i < sents.size(); ++i)
            for (size_t j = i + 1; j < sents.size(); ++j)
                sims.push_back(hint::golden_similarity(sents[i], sents[j], oracle));
        const size_t take = std::min(sims.size(), static_cast<size_t>(n));
        double acc = 0.0;
        for (size_t k = 0; k < take; ++k) {
            auto it = std::max_element(sims.begin(), sims.end());
            acc += *it;
            sims.erase(it);
        }
        total += acc / static_cast<double>(take);
        ++counted;
    }
    return total / static_cast<double>(counted);
}

inline double bf_distinct4(const std::vector<Text>& texts) {
    std::set<Gram> uniq;
    long total = 0;
    for (const Text& t : texts)
        for (size_t s = 0; s + 4 <= t.size(); ++s) {
            uniq.insert(Gram(t.begin() + static_cast<long>(s), t.begin() + static_cast<long>(s) + 4));
            ++total;
        }
    return static_cast<double>(uniq.size()) / static_cast<double>(total);
}

}  // namespace oracles
