#include "hint/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hint/rng.hpp"

namespace hint {

void ModelConfig::validate() const {
    if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0)
        throw std::runtime_error("d_model must be a positive multiple of n_heads");
    if (vocab_size < kNumReserved + 1) throw std::runtime_error("vocab_size too small");
    if (max_len < 8) throw std::runtime_error("max_len too small");
    if (d_ff <= 0 || n_layers_enc < 0 || n_layers_dec <= 0)
        throw std::runtime_error("bad layer configuration");
}

int Parameters::add(const std::string& name, int rows, int cols) {
    names.push_back(name);
    tensors.emplace_back(rows, cols);
    return static_cast<int>(tensors.size() - 1);
}

int Parameters::find(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

size_t Parameters::scalar_count() const {
    size_t n = 0;
    for (const Tensor& t : tensors) n += t.size();
    return n;
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.d_model;
    tok_emb = params_.add("tok_emb", cfg_.vocab_size, d);
    pos_enc = params_.add("pos_enc", cfg_.max_len, d);
    pos_dec = params_.add("pos_dec", cfg_.max_len, d);

    auto add_layer = [&](const std::string& prefix, bool cross) {
        LayerIdx L{};
        L.ln1_g = params_.add(prefix + ".ln1.g", 1, d);
        L.ln1_b = params_.add(prefix + ".ln1.b", 1, d);
        L.wq = params_.add(prefix + ".wq", d, d);
        L.bq = params_.add(prefix + ".bq", 1, d);
        L.wk = params_.add(prefix + ".wk", d, d);
        L.bk = params_.add(prefix + ".bk", 1, d);
        L.wv = params_.add(prefix + ".wv", d, d);
        L.bv = params_.add(prefix + ".bv", 1, d);
        L.wo = params_.add(prefix + ".wo", d, d);
        L.bo = params_.add(prefix + ".bo", 1, d);
        if (cross) {
            L.lnc_g = params_.add(prefix + ".lnc.g", 1, d);
            L.lnc_b = params_.add(prefix + ".lnc.b", 1, d);
            L.cwq = params_.add(prefix + ".cross.wq", d, d);
            L.cbq = params_.add(prefix + ".cross.bq", 1, d);
            L.cwk = params_.add(prefix + ".cross.wk", d, d);
            L.cbk = params_.add(prefix + ".cross.bk", 1, d);
            L.cwv = params_.add(prefix + ".cross.wv", d, d);
            L.cbv = params_.add(prefix + ".cross.bv", 1, d);
            L.cwo = params_.add(prefix + ".cross.wo", d, d);
            L.cbo = params_.add(prefix + ".cross.bo", 1, d);
        } else {
            L.lnc_g = L.lnc_b = L.cwq = L.cbq = L.cwk = L.cbk = L.cwv = L.cbv = L.cwo = L.cbo = -1;
        }
        L.ln2_g = params_.add(prefix + ".ln2.g", 1, d);
        L.ln2_b = params_.add(prefix + ".ln2.b", 1, d);
        L.w1 = params_.add(prefix + ".ff.w1", d, cfg_.d_ff);
        L.b1 = params_.add(prefix + ".ff.b1", 1, cfg_.d_ff);
        L.w2 = params_.add(prefix + ".ff.w2", cfg_.d_ff, d);
        L.b2 = params_.add(prefix + ".ff.b2", 1, d);
        return L;
    };

    for (int l = 0; l < cfg_.n_layers_enc; ++l)
        enc_layers.push_back(add_layer("enc" + std::to_string(l), false));
    for (int l = 0; l < cfg_.n_layers_dec; ++l)
        dec_layers.push_back(add_layer("dec" + std::to_string(l), true));

    enc_lnf_g = params_.add("enc_lnf.g", 1, d);
    enc_lnf_b = params_.add("enc_lnf.b", 1, d);
    dec_lnf_g = params_.add("dec_lnf.g", 1, d);
    dec_lnf_b = params_.add("dec_lnf.b", 1, d);
    lm_w = params_.add("lm.w", d, cfg_.vocab_size);
    lm_b = params_.add("lm.b", 1, cfg_.vocab_size);
    w_sim = params_.add("sim.w", d, d);
    w_ord = params_.add("ord.w", d, d);
}

void Model::init_params(uint64_t seed) {
    Rng rng(derive_seed(seed, "param-init"));
    for (size_t i = 0; i < params_.count(); ++i) {
        const std::string& name = params_.names[i];
        Tensor& t = params_.tensors[i];
        const size_t dot = name.rfind('.');
        const std::string last = dot == std::string::npos ? name : name.substr(dot + 1);
        if (last == "g") {
            t.fill(1.0);  // layernorm gain
        } else if (!last.empty() && last[0] == 'b') {
            t.fill(0.0);  // every bias, including layernorm shift
        } else if (name == "sim.w" || name == "ord.w") {
            // zero start puts both pair heads at exactly 0.5, inside the
            // responsive sigmoid range; the bilinear scores scale with
            // ||h||^2 and a random start saturates them immediately
            t.fill(0.0);
        } else {
            const bool is_embedding = name == "tok_emb" || name == "pos_enc" || name == "pos_dec";
            const double std = is_embedding ? 0.08 : 0.02;
            for (double& x : t.v) x = std * rng.gaussian();
        }
    }
}

// ---------------------------------------------------------------------------
// forward graph
// ---------------------------------------------------------------------------

BoundModel::BoundModel(ad::Graph& g, const Model& m, bool trainable) : g_(&g), m_(&m) {
    pnodes_.reserve(m.params().count());
    for (const Tensor& t : m.params().tensors) pnodes_.push_back(g.leaf(t, trainable));
}

ad::NodeId BoundModel::embed(const std::vector<int>& ids, int pos_table) const {
    std::vector<int> pos(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) pos[i] = static_cast<int>(i);
    ad::NodeId tok = g_->gather_rows(param(m_->tok_emb), ids);
    ad::NodeId pe = g_->gather_rows(param(pos_table), pos);
    return g_->add(tok, pe);
}

ad::NodeId BoundModel::attention(ad::NodeId x, ad::NodeId kv, bool causal, int wq, int bq, int wk,
                                 int bk, int wv, int bv, int wo, int bo) const {
    const int d = m_->config().d_model;
    const int heads = m_->config().n_heads;
    const int dh = d / heads;
    ad::NodeId q = g_->add_rowvec(g_->matmul(x, param(wq)), param(bq));
    ad::NodeId k = g_->add_rowvec(g_->matmul(kv, param(wk)), param(bk));
    ad::NodeId v = g_->add_rowvec(g_->matmul(kv, param(wv)), param(bv));
    std::vector<ad::NodeId> head_out;
    head_out.reserve(static_cast<size_t>(heads));
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int h = 0; h < heads; ++h) {
        ad::NodeId qh = g_->slice_cols(q, h * dh, dh);
        ad::NodeId kh = g_->slice_cols(k, h * dh, dh);
        ad::NodeId vh = g_->slice_cols(v, h * dh, dh);
        ad::NodeId scores = g_->scale(g_->matmul_nt(qh, kh), inv_sqrt);
        ad::NodeId attn = g_->softmax_rows(scores, causal);
        head_out.push_back(g_->matmul(attn, vh));
    }
    ad::NodeId cat = g_->concat_cols(head_out);
    return g_->add_rowvec(g_->matmul(cat, param(wo)), param(bo));
}

ad::NodeId BoundModel::ff(ad::NodeId x, const Model::LayerIdx& L) const {
    ad::NodeId h = g_->gelu(g_->add_rowvec(g_->matmul(x, param(L.w1)), param(L.b1)));
    return g_->add_rowvec(g_->matmul(h, param(L.w2)), param(L.b2));
}

ad::NodeId BoundModel::encode(const std::vector<int>& input_tokens) const {
    if (input_tokens.empty()) return -1;
    if (static_cast<int>(input_tokens.size()) > m_->config().max_len)
        throw std::runtime_error("input exceeds max_len");
    ad::NodeId x = embed(input_tokens, m_->pos_enc);
    for (const auto& L : m_->enc_layers) {
        ad::NodeId normed = g_->layernorm(x, param(L.ln1_g), param(L.ln1_b));
        x = g_->add(x, attention(normed, normed, false, L.wq, L.bq, L.wk, L.bk, L.wv, L.bv, L.wo, L.bo));
        x = g_->add(x, ff(g_->layernorm(x, param(L.ln2_g), param(L.ln2_b)), L));
    }
    return g_->layernorm(x, param(m_->enc_lnf_g), param(m_->enc_lnf_b));
}

ad::NodeId BoundModel::decode_states(const std::vector<int>& shifted_inputs, ad::NodeId memory) const {
    if (shifted_inputs.empty()) throw std::runtime_error("empty decoder input");
    if (static_cast<int>(shifted_inputs.size()) > m_->config().max_len)
        throw std::runtime_error("target exceeds max_len");
    ad::NodeId x = embed(shifted_inputs, m_->pos_dec);
    for (const auto& L : m_->dec_layers) {
        ad::NodeId normed = g_->layernorm(x, param(L.ln1_g), param(L.ln1_b));
        x = g_->add(x, attention(normed, normed, true, L.wq, L.bq, L.wk, L.bk, L.wv, L.bv, L.wo, L.bo));
        if (memory >= 0) {
            ad::NodeId cn = g_->layernorm(x, param(L.lnc_g), param(L.lnc_b));
            x = g_->add(x, attention(cn, memory, false, L.cwq, L.cbq, L.cwk, L.cbk, L.cwv, L.cbv,
                                     L.cwo, L.cbo));
        }
        x = g_->add(x, ff(g_->layernorm(x, param(L.ln2_g), param(L.ln2_b)), L));
    }
    return g_->layernorm(x, param(m_->dec_lnf_g), param(m_->dec_lnf_b));
}

ad::NodeId BoundModel::lm_logits(ad::NodeId h) const {
    return g_->add_rowvec(g_->matmul(h, param(m_->lm_w)), param(m_->lm_b));
}

std::pair<ad::NodeId, ad::NodeId> BoundModel::extract_reps(ad::NodeId h_dec,
                                                           const AugmentedSequence& aug) const {
    const int rows = g_->val(h_dec).rows;
    std::vector<int> sen_idx, dis_idx;
    for (int p : aug.sen_positions) {
        if (p - 1 < 0 || p - 1 >= rows) throw std::runtime_error("sen position out of range");
        sen_idx.push_back(p - 1);
    }
    for (int p : aug.dis_positions) {
        if (p - 1 < 0 || p - 1 >= rows) throw std::runtime_error("dis position out of range");
        dis_idx.push_back(p - 1);
    }
    return {g_->gather_rows(h_dec, sen_idx), g_->gather_rows(h_dec, dis_idx)};
}

ad::NodeId BoundModel::similarity_matrix(ad::NodeId hs) const {
    ad::NodeId s = g_->matmul(g_->matmul(hs, param(m_->w_sim)), g_->transpose(hs));
    return g_->sigmoid(g_->add(s, g_->transpose(s)));
}

ad::NodeId BoundModel::order_logit_matrix(ad::NodeId hd) const {
    return g_->matmul(g_->matmul(hd, param(m_->w_ord)), g_->transpose(hd));
}

BoundModel::Forward BoundModel::forward(const AugmentedSequence& aug,
                                        const std::vector<int>& input_tokens, bool want_heads,
                                        bool want_logits) const {
    Forward f;
    const auto& ids = aug.ids;
    if (ids.size() < 2) throw std::runtime_error("degenerate sequence");
    std::vector<int> inputs(ids.begin(), ids.end() - 1);
    f.targets.assign(ids.begin() + 1, ids.end());
    ad::NodeId mem = encode(input_tokens);
    f.h_dec = decode_states(inputs, mem);
    if (want_logits) f.logits = lm_logits(f.h_dec);
    if (want_heads) {
        auto [hs, hd] = extract_reps(f.h_dec, aug);
        f.hs = hs;
        f.hd = hd;
    }
    return f;
}

// ---------------------------------------------------------------------------
// scalar heads and helpers
// ---------------------------------------------------------------------------

namespace {

double bilinear(const std::vector<double>& a, const Tensor& w, const std::vector<double>& b) {
    double out = 0.0;
    for (int i = 0; i < w.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < w.cols; ++j) acc += w.at(i, j) * b[static_cast<size_t>(j)];
        out += a[static_cast<size_t>(i)] * acc;
    }
    return out;
}

double sigmoid1(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double similarity_score(const std::vector<double>& hi, const std::vector<double>& hj,
                        const Tensor& w_sim) {
    const double sij = bilinear(hi, w_sim, hj);
    const double sji = bilinear(hj, w_sim, hi);
    return sigmoid1(sij + sji);
}

double order_score(const std::vector<double>& hi, const std::vector<double>& hj,
                   const Tensor& w_ord) {
    return sigmoid1(bilinear(hi, w_ord, hj));
}

std::vector<double> lm_distribution(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double x : logits) mx = std::max(mx, x);
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

std::vector<double> sequence_position_nll(const Model& m, const AugmentedSequence& aug,
                                          const std::vector<int>& input_tokens) {
    ad::Graph g(false);
    BoundModel bm(g, m, false);
    auto f = bm.forward(aug, input_tokens, false);
    return ad::Graph::row_nll(g.val(f.logits), f.targets);
}

// ---------------------------------------------------------------------------
// tensor blob io
// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'H', 'I', 'N', 'T', 'B', 'L', 'O', 'B'};
}

void save_tensors(const Parameters& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw std::runtime_error("cannot write tensor blob: " + path);
    out.write(kMagic, 8);
    const uint32_t version = 1;
    const uint32_t count = static_cast<uint32_t>(p.count());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (size_t i = 0; i < p.count(); ++i) {
        const uint32_t nlen = static_cast<uint32_t>(p.names[i].size());
        out.write(reinterpret_cast<const char*>(&nlen), 4);
        out.write(p.names[i].data(), nlen);
        const int32_t r = p.tensors[i].rows, c = p.tensors[i].cols;
        out.write(reinterpret_cast<const char*>(&r), 4);
        out.write(reinterpret_cast<const char*>(&c), 4);
        out.write(reinterpret_cast<const char*>(p.tensors[i].v.data()),
                  static_cast<std::streamsize>(p.tensors[i].size() * sizeof(double)));
    }
    if (!out.good()) throw std::runtime_error("write failed: " + path);
}

void load_tensors(Parameters& p, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("cannot open tensor blob: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in.good() || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("bad tensor blob magic: " + path);
    uint32_t version = 0, count = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (version != 1) throw std::runtime_error("unsupported blob version in " + path);
    if (count != p.count())
        throw std::runtime_error("tensor count mismatch in " + path + ": expected " +
                                 std::to_string(p.count()) + ", got " + std::to_string(count));
    for (size_t i = 0; i < p.count(); ++i) {
        uint32_t nlen = 0;
        in.read(reinterpret_cast<char*>(&nlen), 4);
        std::string name(nlen, '\0');
        in.read(name.data(), nlen);
        int32_t r = 0, c = 0;
        in.read(reinterpret_cast<char*>(&r), 4);
        in.read(reinterpret_cast<char*>(&c), 4);
        if (name != p.names[i] || r != p.tensors[i].rows || c != p.tensors[i].cols)
            throw std::runtime_error("tensor mismatch in " + path + " at '" + name +
                                     "': expected " + p.names[i] + " " +
                                     std::to_string(p.tensors[i].rows) + "x" +
                                     std::to_string(p.tensors[i].cols));
        in.read(reinterpret_cast<char*>(p.tensors[i].v.data()),
                static_cast<std::streamsize>(p.tensors[i].size() * sizeof(double)));
        if (!in.good()) throw std::runtime_error("truncated tensor blob: " + path);
    }
}

}  // namespace hint
