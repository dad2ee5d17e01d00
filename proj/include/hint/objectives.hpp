#pragma once

#include <vector>

#include "hint/augment.hpp"
#include "hint/model.hpp"
#include "hint/teacher.hpp"

namespace hint {

struct ObjectiveConfig {
    double delta = 0.1;    // similarity margin
    double lambda1 = 0.1;  // order loss scale
    double lambda2 = 0.1;  // similarity loss scale
    // whether positions whose target is SEN/DIS contribute to the training LM
    // loss (reported perplexity always skips them)
    bool lm_counts_special = true;

    void validate() const;
};

struct LossBreakdown {
    double l_lm = 0.0, l_sen = 0.0, l_dis = 0.0, l_total = 0.0;
    int lm_samples = 0, sen_samples = 0, dis_samples = 0;
    long sen_pairs = 0, dis_pairs = 0;
};

// --- plain-value forms (unit-testable without a model) ---

// Mean -log P(target) over masked-in positions, natural log.
double loss_lm(const std::vector<std::vector<double>>& distributions,
               const std::vector<int>& target_ids, const std::vector<bool>& position_mask);

// (1/K^2) sum over all ordered pairs of max(|p - t|, delta).
double loss_sen(const Tensor& predicted, const Tensor& golden, double delta);

struct DisLoss {
    double value = 0.0;
    bool no_pairs = false;
};
// (2/(K(K-1))) sum_{i<j} of the pairwise cross entropy; K < 2 gives 0 with a flag.
DisLoss loss_dis(const Tensor& q, const std::vector<std::vector<int>>& labels);

// Teacher targets for the presented sentences: t_ij = (cos+1)/2, symmetric,
// diagonal 1 under the default oracle. Each sentence is embedded once.
Tensor teacher_matrix(const std::vector<std::vector<int>>& sentences,
                      const SimilarityOracle& oracle);

// --- graph forms (training path) ---

struct SampleLossNodes {
    ad::NodeId lm = -1, sen = -1, dis = -1;  // scalar nodes; -1 when not built
    long sen_pairs = 0, dis_pairs = 0;
};

// Builds the requested per-sample loss nodes; callers apply the kind masks.
SampleLossNodes build_sample_losses(const BoundModel& bm, const TrainingSample& sample,
                                    const SimilarityOracle& teacher, const ObjectiveConfig& cfg,
                                    bool want_lm, bool want_sen, bool want_dis);

struct BatchLoss {
    ad::NodeId total = -1;
    ad::NodeId lm = -1, sen = -1, dis = -1;
    LossBreakdown breakdown;
};

// L_LM on human samples only, L_Dis on human + shuffled, L_Sen on everything,
// each averaged over the samples it applies to; total per the combination
// L_LM + lambda1 L_Dis + lambda2 L_Sen. A lambda of 0 skips that loss
// entirely, which is what the ablation flags rely on.
BatchLoss loss_pre(const BoundModel& bm, const std::vector<TrainingSample>& batch,
                   const SimilarityOracle& teacher, const ObjectiveConfig& cfg);

// LM-only variant used by plain fine-tuning.
BatchLoss loss_lm_only(const BoundModel& bm, const std::vector<TrainingSample>& batch,
                       const ObjectiveConfig& cfg);

}  // namespace hint
