#include "hint/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace hint {

void ObjectiveConfig::validate() const {
    if (delta < 0.0 || delta > 1.0) throw std::runtime_error("delta must be in [0,1]");
    if (lambda1 < 0.0 || lambda2 < 0.0) throw std::runtime_error("lambdas must be >= 0");
}

double loss_lm(const std::vector<std::vector<double>>& distributions,
               const std::vector<int>& target_ids, const std::vector<bool>& position_mask) {
    if (distributions.size() != target_ids.size() || target_ids.size() != position_mask.size())
        throw std::runtime_error("loss_lm shape mismatch");
    double total = 0.0;
    long count = 0;
    for (size_t t = 0; t < target_ids.size(); ++t) {
        if (!position_mask[t]) continue;
        total += -std::log(distributions[t][static_cast<size_t>(target_ids[t])]);
        ++count;
    }
    if (count == 0) throw std::runtime_error("no LM positions");
    return total / static_cast<double>(count);
}

double loss_sen(const Tensor& predicted, const Tensor& golden, double delta) {
    if (!predicted.same_shape(golden) || predicted.rows != predicted.cols)
        throw std::runtime_error("loss_sen shape mismatch");
    const int k = predicted.rows;
    double total = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            total += std::max(std::fabs(predicted.at(i, j) - golden.at(i, j)), delta);
    return total / static_cast<double>(k) / static_cast<double>(k);
}

DisLoss loss_dis(const Tensor& q, const std::vector<std::vector<int>>& labels) {
    if (q.rows != q.cols || static_cast<size_t>(q.rows) != labels.size())
        throw std::runtime_error("loss_dis shape mismatch");
    const int k = q.rows;
    if (k < 2) return {0.0, true};
    double total = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double o = static_cast<double>(labels[static_cast<size_t>(i)][static_cast<size_t>(j)]);
            const double qij = q.at(i, j);
            total += -o * std::log(qij) - (1.0 - o) * std::log(1.0 - qij);
        }
    return {total * 2.0 / (static_cast<double>(k) * (k - 1)), false};
}

Tensor teacher_matrix(const std::vector<std::vector<int>>& sentences,
                      const SimilarityOracle& oracle) {
    const int k = static_cast<int>(sentences.size());
    std::vector<SentenceEmbedding> embs;
    embs.reserve(sentences.size());
    for (const auto& s : sentences) embs.push_back(oracle.embed(s));
    Tensor t(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            double c = (cosine(embs[static_cast<size_t>(i)], embs[static_cast<size_t>(j)]) + 1.0) / 2.0;
            if (c < 0.0) c = 0.0;
            if (c > 1.0) c = 1.0;
            t.at(i, j) = c;
            t.at(j, i) = c;
        }
    }
    return t;
}

namespace {

std::vector<double> lm_weights(const TrainingSample& s, bool count_special) {
    const auto& ids = s.seq.ids;
    const size_t n = ids.size() - 1;  // targets are ids[1..]
    std::vector<double> w(n, 1.0);
    if (!count_special) {
        for (size_t t = 0; t < n; ++t)
            if (ids[t + 1] == SEN || ids[t + 1] == DIS) w[t] = 0.0;
    }
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) throw std::runtime_error("no LM positions");
    for (double& x : w) x /= total;  // nll node then yields the mean directly
    return w;
}

}  // namespace

SampleLossNodes build_sample_losses(const BoundModel& bm, const TrainingSample& sample,
                                    const SimilarityOracle& teacher, const ObjectiveConfig& cfg,
                                    bool want_lm, bool want_sen, bool want_dis) {
    ad::Graph& g = bm.graph();
    SampleLossNodes out;
    const int k = sample.seq.num_sentences();
    const bool heads = (want_sen && k >= 1) || (want_dis && k >= 2);
    auto f = bm.forward(sample.seq, sample.input_tokens, heads, want_lm);

    if (want_lm)
        out.lm = g.nll(f.logits, f.targets, lm_weights(sample, cfg.lm_counts_special));

    if (want_sen && k >= 1) {
        ad::NodeId p = bm.similarity_matrix(f.hs);
        Tensor t = teacher_matrix(sample.sentences, teacher);
        out.sen = g.scale(g.sum_all(g.margin_abs(p, std::move(t), cfg.delta)),
                          1.0 / (static_cast<double>(k) * k));
        out.sen_pairs = static_cast<long>(k) * k;
    }

    if (want_dis && k >= 2) {
        ad::NodeId qlogits = bm.order_logit_matrix(f.hd);
        auto labels = order_labels(sample);
        Tensor lab(k, k);
        Tensor mask(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                lab.at(i, j) = static_cast<double>(labels[static_cast<size_t>(i)][static_cast<size_t>(j)]);
                mask.at(i, j) = 1.0;
            }
        ad::NodeId ce = g.mul_mask(g.bce_logits(qlogits, std::move(lab)), std::move(mask));
        out.dis = g.scale(g.sum_all(ce), 2.0 / (static_cast<double>(k) * (k - 1)));
        out.dis_pairs = static_cast<long>(k) * (k - 1) / 2;
    }
    return out;
}

namespace {

ad::NodeId mean_of(ad::Graph& g, const std::vector<ad::NodeId>& terms) {
    ad::NodeId acc = terms[0];
    for (size_t i = 1; i < terms.size(); ++i) acc = g.add(acc, terms[i]);
    return g.scale(acc, 1.0 / static_cast<double>(terms.size()));
}

}  // namespace

BatchLoss loss_pre(const BoundModel& bm, const std::vector<TrainingSample>& batch,
                   const SimilarityOracle& teacher, const ObjectiveConfig& cfg) {
    cfg.validate();
    if (batch.empty()) throw std::runtime_error("empty batch");
    ad::Graph& g = bm.graph();
    const bool use_sen = cfg.lambda2 > 0.0;
    const bool use_dis = cfg.lambda1 > 0.0;

    std::vector<ad::NodeId> lm_terms, sen_terms, dis_terms;
    BatchLoss bl;
    for (const TrainingSample& s : batch) {
        const bool human = s.kind == SampleKind::human;
        const bool dis_applies = use_dis && (human || s.kind == SampleKind::shuffled) &&
                                 s.seq.num_sentences() >= 2;
        auto nodes = build_sample_losses(bm, s, teacher, cfg, human, use_sen, dis_applies);
        if (nodes.lm >= 0) lm_terms.push_back(nodes.lm);
        if (nodes.sen >= 0) {
            sen_terms.push_back(nodes.sen);
            bl.breakdown.sen_pairs += nodes.sen_pairs;
        }
        if (nodes.dis >= 0) {
            dis_terms.push_back(nodes.dis);
            bl.breakdown.dis_pairs += nodes.dis_pairs;
        }
    }
    if (lm_terms.empty()) throw std::runtime_error("batch has no human sample");

    bl.lm = mean_of(g, lm_terms);
    bl.breakdown.lm_samples = static_cast<int>(lm_terms.size());
    ad::NodeId total = bl.lm;
    if (!dis_terms.empty()) {
        bl.dis = mean_of(g, dis_terms);
        bl.breakdown.dis_samples = static_cast<int>(dis_terms.size());
        total = g.add(total, g.scale(bl.dis, cfg.lambda1));
    }
    if (!sen_terms.empty()) {
        bl.sen = mean_of(g, sen_terms);
        bl.breakdown.sen_samples = static_cast<int>(sen_terms.size());
        total = g.add(total, g.scale(bl.sen, cfg.lambda2));
    }
    bl.total = total;
    bl.breakdown.l_lm = g.val(bl.lm).at(0, 0);
    bl.breakdown.l_sen = bl.sen >= 0 ? g.val(bl.sen).at(0, 0) : 0.0;
    bl.breakdown.l_dis = bl.dis >= 0 ? g.val(bl.dis).at(0, 0) : 0.0;
    bl.breakdown.l_total = g.val(bl.total).at(0, 0);
    return bl;
}

BatchLoss loss_lm_only(const BoundModel& bm, const std::vector<TrainingSample>& batch,
                       const ObjectiveConfig& cfg) {
    if (batch.empty()) throw std::runtime_error("empty batch");
    ad::Graph& g = bm.graph();
    std::vector<ad::NodeId> lm_terms;
    for (const TrainingSample& s : batch) {
        if (s.kind != SampleKind::human) continue;
        auto f = bm.forward(s.seq, s.input_tokens, false, true);
        lm_terms.push_back(g.nll(f.logits, f.targets, lm_weights(s, cfg.lm_counts_special)));
    }
    if (lm_terms.empty()) throw std::runtime_error("batch has no human sample");
    BatchLoss bl;
    bl.lm = mean_of(g, lm_terms);
    bl.total = bl.lm;
    bl.breakdown.lm_samples = static_cast<int>(lm_terms.size());
    bl.breakdown.l_lm = g.val(bl.lm).at(0, 0);
    bl.breakdown.l_total = bl.breakdown.l_lm;
    return bl;
}

}  // namespace hint
