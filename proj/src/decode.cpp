#include "hint/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hint {

void DecodeConfig::validate() const {
    if (!(top_p > 0.0 && top_p <= 1.0)) throw std::runtime_error("top_p must be in (0,1]");
    if (temperature <= 0.0) throw std::runtime_error("temperature must be > 0");
    if (max_new_tokens < 1 || max_sentences < 1) throw std::runtime_error("bad decode limits");
}

void apply_temperature(std::vector<double>& logits, double tau) {
    if (tau <= 0.0) throw std::runtime_error("temperature must be > 0");
    for (double& x : logits) x /= tau;
}

void nucleus_filter(std::vector<double>& probs, double p) {
    const int n = static_cast<int>(probs.size());
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (probs[static_cast<size_t>(a)] != probs[static_cast<size_t>(b)])
            return probs[static_cast<size_t>(a)] > probs[static_cast<size_t>(b)];
        return a < b;  // deterministic tie-break
    });
    double cum = 0.0;
    int keep = 0;
    while (keep < n) {
        cum += probs[static_cast<size_t>(order[static_cast<size_t>(keep)])];
        ++keep;
        if (cum >= p) break;
    }
    std::vector<bool> kept(static_cast<size_t>(n), false);
    double mass = 0.0;
    for (int i = 0; i < keep; ++i) {
        kept[static_cast<size_t>(order[static_cast<size_t>(i)])] = true;
        mass += probs[static_cast<size_t>(order[static_cast<size_t>(i)])];
    }
    for (int i = 0; i < n; ++i) {
        if (kept[static_cast<size_t>(i)])
            probs[static_cast<size_t>(i)] /= mass;
        else
            probs[static_cast<size_t>(i)] = 0.0;
    }
}

namespace {

int sample_from(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    int last_positive = -1;
    for (size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cum += probs[i];
        last_positive = static_cast<int>(i);
        if (u < cum) return static_cast<int>(i);
    }
    return last_positive;  // float spill lands on the last supported token
}

}  // namespace

std::vector<int> generate(const std::vector<int>& input_tokens, const Model& model,
                          const DecodeConfig& cfg, Rng& rng) {
    cfg.validate();
    ad::Graph g(false);
    BoundModel bm(g, model, false);
    ad::NodeId memory = bm.encode(input_tokens);

    std::vector<int> out;  // emitted tokens, BOS excluded
    std::vector<int> prefix = {BOS};
    int sentences_done = 0;

    while (static_cast<int>(out.size()) < cfg.max_new_tokens &&
           static_cast<int>(prefix.size()) < model.config().max_len) {
        int next;
        if (!out.empty() && out.back() == SEN) {
            next = DIS;  // forced discourse marker
        } else {
            ad::NodeId h = bm.decode_states(prefix, memory);
            const Tensor& H = g.val(h);
            std::vector<int> last = {H.rows - 1};
            ad::NodeId logits_node = bm.lm_logits(g.gather_rows(h, last));
            std::vector<double> logits = g.val(logits_node).v;

            const bool at_sentence_start = out.empty() || out.back() == DIS;
            logits[BOS] = -std::numeric_limits<double>::infinity();
            logits[DIS] = -std::numeric_limits<double>::infinity();
            if (at_sentence_start) logits[SEN] = -std::numeric_limits<double>::infinity();

            apply_temperature(logits, cfg.temperature);
            std::vector<double> probs = lm_distribution(logits);
            nucleus_filter(probs, cfg.top_p);
            next = sample_from(probs, rng);
        }
        out.push_back(next);
        prefix.push_back(next);
        if (next == EOS) break;
        if (next == DIS) {
            ++sentences_done;
            if (sentences_done >= cfg.max_sentences) break;
        }
    }
    // the caps may cut right after a SEN; the forced marker completes the
    // pair (or the dangling SEN is dropped when no room is left)
    if (!out.empty() && out.back() == SEN) {
        if (static_cast<int>(prefix.size()) < model.config().max_len)
            out.push_back(DIS);
        else
            out.pop_back();
    }
    return out;
}

std::vector<int> strip_special(const std::vector<int>& ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (int id : ids)
        if (id != PAD && id != BOS && id != EOS && id != SEN && id != DIS) out.push_back(id);
    return out;
}

}  // namespace hint
