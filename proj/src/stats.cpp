#include "hint/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hint {

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& x) {
    const size_t n = x.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    return rank;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da <= 0.0 || db <= 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::runtime_error("spearman needs paired data");
    return pearson(ranks_with_ties(a), ranks_with_ties(b));
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::runtime_error("auc shape mismatch");
    double pos = 0.0, neg = 0.0;
    for (int l : labels) (l ? pos : neg) += 1.0;
    if (pos == 0.0 || neg == 0.0) throw std::runtime_error("auc needs both classes");
    double wins = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / (pos * neg);
}

ZStats fit_zstats(const std::vector<double>& reference) {
    if (reference.size() < 2) throw std::runtime_error("z-stats need a reference sample");
    ZStats s;
    for (double x : reference) s.mean += x;
    s.mean /= static_cast<double>(reference.size());
    double var = 0.0;
    for (double x : reference) var += (x - s.mean) * (x - s.mean);
    var /= static_cast<double>(reference.size());
    s.stddev = std::sqrt(var);
    if (s.stddev <= 0.0) throw std::runtime_error("degenerate reference sample");
    return s;
}

}  // namespace hint
