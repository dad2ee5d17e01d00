#pragma once

#include <string>
#include <vector>

#include "hint/corpus.hpp"
#include "hint/graph.hpp"
#include "hint/tensor.hpp"

namespace hint {

struct ModelConfig {
    int d_model = 64;
    int n_layers_enc = 2;
    int n_layers_dec = 2;
    int n_heads = 4;
    int d_ff = 128;
    int vocab_size = 0;
    int max_len = 128;
    double dropout_rate = 0.0;  // 0 keeps runs and gradient checks exact

    void validate() const;
};

// Flat named tensor store; ordering is fixed and defines the checkpoint layout.
struct Parameters {
    std::vector<std::string> names;
    std::vector<Tensor> tensors;

    int add(const std::string& name, int rows, int cols);
    int find(const std::string& name) const;  // -1 if absent
    size_t count() const { return tensors.size(); }
    size_t scalar_count() const;
};

// Pre-norm transformer encoder-decoder with learned positions, GELU feed
// forward, a tied-nothing LM head, and the two bilinear pair heads.
class Model {
public:
    explicit Model(const ModelConfig& cfg);

    void init_params(uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    Parameters& params() { return params_; }
    const Parameters& params() const { return params_; }

    struct LayerIdx {
        int ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;          // self attention
        int lnc_g, lnc_b, cwq, cbq, cwk, cbk, cwv, cbv, cwo, cbo;  // cross attention (dec only)
        int ln2_g, ln2_b, w1, b1, w2, b2;                          // feed forward
    };
    int tok_emb, pos_enc, pos_dec;
    int enc_lnf_g, enc_lnf_b, dec_lnf_g, dec_lnf_b;
    int lm_w, lm_b;   // d_model x V, 1 x V
    int w_sim;        // d_model x d_model
    int w_ord;        // d_model x d_model
    std::vector<LayerIdx> enc_layers, dec_layers;

private:
    ModelConfig cfg_;
    Parameters params_;
};

// Decoder states in the shifted frame: the state that predicts target
// position t (t >= 1) is internal row t-1, i.e. it has consumed ids[0..t-1].
struct DecoderStates {
    Tensor h;  // (L-1) x d_model for a length-L augmented sequence
    const double* row_predicting(int t) const { return h.row(t - 1); }
};

// Binds a model's parameters into a graph once; forward builders may then be
// called repeatedly, appending to the same tape (used by generation).
class BoundModel {
public:
    BoundModel(ad::Graph& g, const Model& m, bool trainable);

    ad::NodeId param(int idx) const { return pnodes_[static_cast<size_t>(idx)]; }
    const std::vector<ad::NodeId>& param_nodes() const { return pnodes_; }
    const Model& model() const { return *m_; }
    ad::Graph& graph() const { return *g_; }

    // Encoder memory over the input tokens; -1 when the input is empty
    // (cross-attention then contributes nothing).
    ad::NodeId encode(const std::vector<int>& input_tokens) const;

    // Final-layer states over the shifted inputs (one row per input position).
    ad::NodeId decode_states(const std::vector<int>& shifted_inputs, ad::NodeId memory) const;

    ad::NodeId lm_logits(ad::NodeId h) const;

    // K x d matrices gathered at the rows whose next-token targets are the
    // sentence / discourse markers.
    std::pair<ad::NodeId, ad::NodeId> extract_reps(ad::NodeId h_dec,
                                                   const AugmentedSequence& aug) const;

    // All-pairs p_ij = sigmoid(s_ij + s_ji), K x K, exactly symmetric.
    ad::NodeId similarity_matrix(ad::NodeId hs) const;
    // All-pairs order logits (H^d W^d H^d^T), K x K; sigmoid gives q_ij.
    ad::NodeId order_logit_matrix(ad::NodeId hd) const;

    struct Forward {
        ad::NodeId h_dec = -1;            // (L-1) x d
        ad::NodeId logits = -1;           // (L-1) x V
        std::vector<int> targets;         // ids[1..L-1]
        ad::NodeId hs = -1, hd = -1;      // K x d
    };
    Forward forward(const AugmentedSequence& aug, const std::vector<int>& input_tokens,
                    bool want_heads, bool want_logits = true) const;

private:
    ad::NodeId attention(ad::NodeId x, ad::NodeId kv, bool causal, int wq, int bq, int wk, int bk,
                         int wv, int bv, int wo, int bo) const;
    ad::NodeId ff(ad::NodeId x, const Model::LayerIdx& L) const;
    ad::NodeId embed(const std::vector<int>& ids, int pos_table) const;

    ad::Graph* g_;
    const Model* m_;
    std::vector<ad::NodeId> pnodes_;
};

// Scalar forms of the pair heads; the matrix path above must agree with these.
double similarity_score(const std::vector<double>& hi, const std::vector<double>& hj,
                        const Tensor& w_sim);
double order_score(const std::vector<double>& hi, const std::vector<double>& hj,
                   const Tensor& w_ord);

// softmax over one logit row
std::vector<double> lm_distribution(const std::vector<double>& logits);

// Per-position -log P(ids[t]) for t = 1..L-1, via an inference graph.
std::vector<double> sequence_position_nll(const Model& m, const AugmentedSequence& aug,
                                          const std::vector<int>& input_tokens);

// Named tensor blob. Loading validates names and shapes and fails loudly.
void save_tensors(const Parameters& p, const std::string& path);
void load_tensors(Parameters& p, const std::string& path);

}  // namespace hint
