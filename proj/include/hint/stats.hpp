#pragma once

#include <vector>

namespace hint {

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Mann-Whitney AUC of scores for the positive class; ties get half credit.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct ZStats {
    double mean = 0.0;
    double stddev = 0.0;
    double z(double x) const { return (x - mean) / stddev; }
};

// Sample mean / standard deviation (population form, N in the denominator).
ZStats fit_zstats(const std::vector<double>& reference);

}  // namespace hint
