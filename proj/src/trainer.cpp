#include "hint/trainer.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace hint {

const char* train_mode_name(TrainMode m) {
    switch (m) {
        case TrainMode::pretrain: return "pretrain";
        case TrainMode::finetune: return "finetune";
        case TrainMode::finetune_aux: return "finetune_aux";
    }
    return "?";
}

TrainMode train_mode_from_name(const std::string& s) {
    if (s == "pretrain") return TrainMode::pretrain;
    if (s == "finetune") return TrainMode::finetune;
    if (s == "finetune_aux") return TrainMode::finetune_aux;
    throw std::runtime_error("unknown train mode: " + s);
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0 || adam_eps <= 0.0) throw std::runtime_error("bad optimizer config");
    if (batch_size < 1 || max_steps < 0 || negatives_per_human < 0 || k_target < 1)
        throw std::runtime_error("bad train config counts");
    objective.validate();
}

TrainData frame_documents(const std::vector<Document>& docs, const Vocab& vocab, int k_target,
                          int max_len) {
    TrainData out;
    for (const Document& d : docs) {
        SegmentedDocument seg = encode_document(d, vocab);
        if (seg.input_tokens.empty() && seg.sentences.size() >= 2) {
            seg.input_tokens = seg.sentences.front();
            seg.sentences.erase(seg.sentences.begin());
        }
        if (static_cast<int>(seg.sentences.size()) > k_target)
            seg.sentences.resize(static_cast<size_t>(k_target));
        if (static_cast<int>(seg.input_tokens.size()) > max_len)
            seg.input_tokens.resize(static_cast<size_t>(max_len));
        seg = truncate_to_fit(seg, max_len);
        out.segs.push_back(std::move(seg));
        out.ids.push_back(d.id);
    }
    return out;
}

Trainer::Trainer(Model& model, const TrainConfig& cfg) : model_(&model), cfg_(cfg) {
    cfg_.validate();
    const Parameters& p = model.params();
    for (size_t i = 0; i < p.count(); ++i) {
        adam_m_.add(p.names[i], p.tensors[i].rows, p.tensors[i].cols);
        adam_v_.add(p.names[i], p.tensors[i].rows, p.tensors[i].cols);
    }
    rng_state_ = derive_seed(cfg_.seed, "trainer");
}

std::vector<TrainingSample> Trainer::assemble_batch(const TrainData& data, long step) const {
    const long n = static_cast<long>(data.segs.size());
    const long steps_per_epoch = (n + cfg_.batch_size - 1) / cfg_.batch_size;
    const long epoch = step / steps_per_epoch;
    const long pos = (step % steps_per_epoch) * cfg_.batch_size;

    // epoch-seeded document order, independent of how work is scheduled
    std::vector<long> perm(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    Rng order_rng(derive_seed(cfg_.seed, "order", static_cast<uint64_t>(epoch)));
    for (long i = n - 1; i > 0; --i) {
        const long j = static_cast<long>(order_rng.below(static_cast<uint32_t>(i + 1)));
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }

    std::vector<TrainingSample> batch;
    for (long b = 0; b < cfg_.batch_size && pos + b < n; ++b) {
        const long di = perm[static_cast<size_t>(pos + b)];
        const auto& seg = data.segs[static_cast<size_t>(di)];
        const std::string& id = data.ids[static_cast<size_t>(di)];
        batch.push_back(make_human(seg, id));
        if (cfg_.mode == TrainMode::finetune) continue;
        for (int k = 0; k < cfg_.negatives_per_human; ++k) {
            Rng neg_rng(hash_combine(derive_seed(cfg_.seed, "neg", static_cast<uint64_t>(epoch)),
                                     hash_combine(hash_bytes(id), static_cast<uint64_t>(k))));
            TrainingSample neg = sample_negative(seg, id, data.segs, data.ids, neg_rng);
            batch.push_back(truncate_sample(neg, model_->config().max_len));
        }
    }
    return batch;
}

TrainResult Trainer::train(const TrainData& data, const SimilarityOracle& teacher, int steps,
                           std::ostream* loss_log) {
    if (data.segs.empty()) throw std::runtime_error("empty training corpus");
    TrainResult res;
    res.first_step = step_;
    const Parameters& p = model_->params();

    for (int it = 0; it < steps; ++it) {
        std::vector<TrainingSample> batch = assemble_batch(data, step_);
        ad::Graph g(true);
        BoundModel bm(g, *model_, true);
        BatchLoss bl = cfg_.mode == TrainMode::finetune
                           ? loss_lm_only(bm, batch, cfg_.objective)
                           : loss_pre(bm, batch, teacher, cfg_.objective);
        if (!std::isfinite(bl.breakdown.l_total))
            throw std::runtime_error("non-finite loss at step " + std::to_string(step_));
        g.backward(bl.total);

        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(step_));
        for (size_t t = 0; t < p.count(); ++t) {
            const Tensor& grad = g.grad(bm.param(static_cast<int>(t)));
            Tensor& theta = model_->params().tensors[t];
            Tensor& m = adam_m_.tensors[t];
            Tensor& v = adam_v_.tensors[t];
            for (size_t i = 0; i < theta.size(); ++i) {
                const double gi = grad.v[i];
                m.v[i] = cfg_.adam_beta1 * m.v[i] + (1.0 - cfg_.adam_beta1) * gi;
                v.v[i] = cfg_.adam_beta2 * v.v[i] + (1.0 - cfg_.adam_beta2) * gi * gi;
                const double mhat = m.v[i] / bc1;
                const double vhat = v.v[i] / bc2;
                theta.v[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
            }
        }

        res.log.push_back(bl.breakdown);
        if (loss_log && (step_ % cfg_.log_every == 0 || it + 1 == steps)) {
            nlohmann::json j;
            j["step"] = step_;
            j["l_lm"] = bl.breakdown.l_lm;
            j["l_sen"] = bl.breakdown.l_sen;
            j["l_dis"] = bl.breakdown.l_dis;
            j["l_total"] = bl.breakdown.l_total;
            (*loss_log) << j.dump() << "\n";
        }
    }
    return res;
}

namespace {

nlohmann::json model_config_json(const ModelConfig& c) {
    nlohmann::json j;
    j["d_model"] = c.d_model;
    j["n_layers_enc"] = c.n_layers_enc;
    j["n_layers_dec"] = c.n_layers_dec;
    j["n_heads"] = c.n_heads;
    j["d_ff"] = c.d_ff;
    j["vocab_size"] = c.vocab_size;
    j["max_len"] = c.max_len;
    j["dropout_rate"] = c.dropout_rate;
    return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.d_model = j.at("d_model").get<int>();
    c.n_layers_enc = j.at("n_layers_enc").get<int>();
    c.n_layers_dec = j.at("n_layers_dec").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.dropout_rate = j.value("dropout_rate", 0.0);
    return c;
}

Parameters combined_state(const Model& model, const Parameters& m, const Parameters& v) {
    Parameters all;
    const Parameters& p = model.params();
    for (size_t i = 0; i < p.count(); ++i) {
        all.names.push_back(p.names[i]);
        all.tensors.push_back(p.tensors[i]);
    }
    for (size_t i = 0; i < m.count(); ++i) {
        all.names.push_back("adam_m." + m.names[i]);
        all.tensors.push_back(m.tensors[i]);
    }
    for (size_t i = 0; i < v.count(); ++i) {
        all.names.push_back("adam_v." + v.names[i]);
        all.tensors.push_back(v.tensors[i]);
    }
    return all;
}

}  // namespace

void Trainer::save(const std::string& prefix) const {
    Parameters all = combined_state(*model_, adam_m_, adam_v_);
    save_tensors(all, prefix + ".bin");
    nlohmann::json j;
    j["model"] = model_config_json(model_->config());
    j["step"] = step_;
    j["seed"] = cfg_.seed;
    j["rng_state"] = rng_state_;
    j["has_moments"] = true;
    std::ofstream out(prefix + ".json");
    if (!out.is_open()) throw std::runtime_error("cannot write manifest: " + prefix + ".json");
    out << j.dump(2) << "\n";
}

void Trainer::restore(const std::string& prefix) {
    std::ifstream in(prefix + ".json");
    if (!in.is_open()) throw std::runtime_error("cannot open manifest: " + prefix + ".json");
    nlohmann::json j;
    in >> j;
    const ModelConfig saved = model_config_from_json(j.at("model"));
    const ModelConfig& mine = model_->config();
    if (saved.d_model != mine.d_model || saved.vocab_size != mine.vocab_size ||
        saved.n_layers_enc != mine.n_layers_enc || saved.n_layers_dec != mine.n_layers_dec ||
        saved.n_heads != mine.n_heads || saved.d_ff != mine.d_ff || saved.max_len != mine.max_len)
        throw std::runtime_error("checkpoint model config mismatch: " + prefix);
    Parameters all = combined_state(*model_, adam_m_, adam_v_);
    load_tensors(all, prefix + ".bin");
    const size_t np = model_->params().count();
    for (size_t i = 0; i < np; ++i) model_->params().tensors[i] = all.tensors[i];
    for (size_t i = 0; i < np; ++i) adam_m_.tensors[i] = all.tensors[np + i];
    for (size_t i = 0; i < np; ++i) adam_v_.tensors[i] = all.tensors[2 * np + i];
    step_ = j.at("step").get<long>();
    rng_state_ = j.value("rng_state", uint64_t{0});
}

ModelConfig checkpoint_model_config(const std::string& prefix) {
    std::ifstream in(prefix + ".json");
    if (!in.is_open()) throw std::runtime_error("cannot open manifest: " + prefix + ".json");
    nlohmann::json j;
    in >> j;
    return model_config_from_json(j.at("model"));
}

uint64_t checkpoint_seed(const std::string& prefix) {
    std::ifstream in(prefix + ".json");
    if (!in.is_open()) throw std::runtime_error("cannot open manifest: " + prefix + ".json");
    nlohmann::json j;
    in >> j;
    return j.value("seed", uint64_t{0});
}

// ---------------------------------------------------------------------------
// gradient check
// ---------------------------------------------------------------------------

namespace {

struct LossProbe {
    std::string name;
    // which scalar to read back from a fresh evaluation
    enum class Which { lm, sen, dis, total } which;
};

double eval_loss(const Model& model, const std::vector<TrainingSample>& batch,
                 const SimilarityOracle& teacher, const ObjectiveConfig& cfg,
                 LossProbe::Which which) {
    ad::Graph g(false);
    BoundModel bm(g, model, false);
    BatchLoss bl = loss_pre(bm, batch, teacher, cfg);
    switch (which) {
        case LossProbe::Which::lm: return g.val(bl.lm).at(0, 0);
        case LossProbe::Which::sen: return bl.sen >= 0 ? g.val(bl.sen).at(0, 0) : 0.0;
        case LossProbe::Which::dis: return bl.dis >= 0 ? g.val(bl.dis).at(0, 0) : 0.0;
        case LossProbe::Which::total: return g.val(bl.total).at(0, 0);
    }
    return 0.0;
}

}  // namespace

GradCheckReport gradient_check(Model& model, const std::vector<TrainingSample>& batch,
                               const SimilarityOracle& teacher, const ObjectiveConfig& cfg,
                               int min_coords, uint64_t seed) {
    constexpr double kStep = 1e-5;
    constexpr double kRelTol = 1e-4;
    // coordinates whose gradient magnitude sits below this are checked
    // absolutely: central differences cannot resolve a relative error there
    constexpr double kSmall = 1e-3;
    constexpr double kSmallAbsTol = 1e-7;

    GradCheckReport report;
    const std::vector<LossProbe> probes = {{"l_lm", LossProbe::Which::lm},
                                           {"l_sen", LossProbe::Which::sen},
                                           {"l_dis", LossProbe::Which::dis},
                                           {"l_total", LossProbe::Which::total}};

    Parameters& p = model.params();
    for (const LossProbe& probe : probes) {
        // analytic gradients
        ad::Graph g(true);
        BoundModel bm(g, model, true);
        BatchLoss bl = loss_pre(bm, batch, teacher, cfg);
        ad::NodeId node = -1;
        switch (probe.which) {
            case LossProbe::Which::lm: node = bl.lm; break;
            case LossProbe::Which::sen: node = bl.sen; break;
            case LossProbe::Which::dis: node = bl.dis; break;
            case LossProbe::Which::total: node = bl.total; break;
        }
        if (node < 0) continue;  // loss not present for this batch
        g.backward(node);

        // coordinates: at least two per tensor, then random fill
        std::vector<std::pair<int, int>> coords;  // (tensor, flat index)
        Rng rng(derive_seed(seed, "gradcheck", hash_bytes(probe.name)));
        for (size_t t = 0; t < p.count(); ++t) {
            const int n = static_cast<int>(p.tensors[t].size());
            coords.emplace_back(static_cast<int>(t), static_cast<int>(rng.below(static_cast<uint32_t>(n))));
            coords.emplace_back(static_cast<int>(t), static_cast<int>(rng.below(static_cast<uint32_t>(n))));
        }
        while (static_cast<int>(coords.size()) < min_coords) {
            const int t = static_cast<int>(rng.below(static_cast<uint32_t>(p.count())));
            const int n = static_cast<int>(p.tensors[static_cast<size_t>(t)].size());
            coords.emplace_back(t, static_cast<int>(rng.below(static_cast<uint32_t>(n))));
        }

        GradCheckLossReport lr;
        lr.loss = probe.name;
        lr.coords = static_cast<int>(coords.size());
        for (const auto& [t, idx] : coords) {
            double& theta = p.tensors[static_cast<size_t>(t)].v[static_cast<size_t>(idx)];
            const double saved = theta;
            theta = saved + kStep;
            const double up = eval_loss(model, batch, teacher, cfg, probe.which);
            theta = saved - kStep;
            const double dn = eval_loss(model, batch, teacher, cfg, probe.which);
            theta = saved;
            const double fd = (up - dn) / (2.0 * kStep);
            const double analytic =
                g.grad(bm.param(t)).v[static_cast<size_t>(idx)];
            const double err = std::fabs(analytic - fd);
            const double denom = std::max(std::fabs(analytic), std::fabs(fd));
            const bool relative_regime = denom >= kSmall;
            const double rel = relative_regime ? err / denom : 0.0;
            lr.max_rel_err = std::max(lr.max_rel_err, rel);
            if (relative_regime ? rel > kRelTol : err > kSmallAbsTol) {
                GradCheckCoord bad;
                bad.tensor = p.names[static_cast<size_t>(t)];
                bad.row = idx / p.tensors[static_cast<size_t>(t)].cols;
                bad.col = idx % p.tensors[static_cast<size_t>(t)].cols;
                bad.analytic = analytic;
                bad.fd = fd;
                bad.rel_err = rel;
                lr.failures.push_back(bad);
                report.pass = false;
            }
        }
        report.max_rel_err = std::max(report.max_rel_err, lr.max_rel_err);
        report.per_loss.push_back(std::move(lr));
    }
    return report;
}

}  // namespace hint
