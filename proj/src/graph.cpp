#include "hint/graph.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "hint/kernels.hpp"

namespace hint::ad {

namespace k = hint::kernels;

NodeId Graph::push(Tensor val, bool needs_grad, std::function<void()> back) {
    Node n;
    n.val = std::move(val);
    n.rg = with_grad_ && needs_grad;
    if (n.rg) {
        n.grad = Tensor(n.val.rows, n.val.cols);
        n.back = std::move(back);
    }
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::leaf(Tensor t, bool requires_grad) {
    return push(std::move(t), requires_grad, nullptr);
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    assert(A.cols == B.rows);
    Tensor C(A.rows, B.cols);
    k::matmul_nn(A.v.data(), B.v.data(), C.v.data(), A.rows, A.cols, B.cols);
    const bool needs = rg(a) || rg(b);
    NodeId out = push(std::move(C), needs, nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, b, out] {
            const Tensor& A = val(a);
            const Tensor& B = val(b);
            const Tensor& G = grad(out);
            if (rg(a))
                k::matmul_nt(G.v.data(), B.v.data(), grad_mut(a).v.data(), G.rows, G.cols, B.rows, true);
            if (rg(b))
                k::matmul_tn(A.v.data(), G.v.data(), grad_mut(b).v.data(), A.rows, A.cols, G.cols, true);
        };
    }
    return out;
}

NodeId Graph::matmul_nt(NodeId a, NodeId b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    assert(A.cols == B.cols);
    Tensor C(A.rows, B.rows);
    k::matmul_nt(A.v.data(), B.v.data(), C.v.data(), A.rows, A.cols, B.rows);
    const bool needs = rg(a) || rg(b);
    NodeId out = push(std::move(C), needs, nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, b, out] {
            const Tensor& A = val(a);
            const Tensor& B = val(b);
            const Tensor& G = grad(out);
            if (rg(a))
                k::matmul_nn(G.v.data(), B.v.data(), grad_mut(a).v.data(), G.rows, G.cols, B.cols, true);
            if (rg(b))
                k::matmul_tn(G.v.data(), A.v.data(), grad_mut(b).v.data(), G.rows, G.cols, A.cols, true);
        };
    }
    return out;
}

NodeId Graph::add(NodeId a, NodeId b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    assert(A.same_shape(B));
    Tensor C = A;
    for (size_t i = 0; i < C.size(); ++i) C.v[i] += B.v[i];
    NodeId out = push(std::move(C), rg(a) || rg(b), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, b, out] {
            const Tensor& G = grad(out);
            if (rg(a)) {
                Tensor& ga = grad_mut(a);
                for (size_t i = 0; i < G.size(); ++i) ga.v[i] += G.v[i];
            }
            if (rg(b)) {
                Tensor& gb = grad_mut(b);
                for (size_t i = 0; i < G.size(); ++i) gb.v[i] += G.v[i];
            }
        };
    }
    return out;
}

NodeId Graph::add_rowvec(NodeId a, NodeId r) {
    const Tensor& A = val(a);
    const Tensor& R = val(r);
    assert(R.rows == 1 && R.cols == A.cols);
    Tensor C = A;
    for (int i = 0; i < C.rows; ++i)
        for (int j = 0; j < C.cols; ++j) C.at(i, j) += R.at(0, j);
    NodeId out = push(std::move(C), rg(a) || rg(r), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, r, out] {
            const Tensor& G = grad(out);
            if (rg(a)) {
                Tensor& ga = grad_mut(a);
                for (size_t i = 0; i < G.size(); ++i) ga.v[i] += G.v[i];
            }
            if (rg(r)) {
                Tensor& gr = grad_mut(r);
                for (int i = 0; i < G.rows; ++i)
                    for (int j = 0; j < G.cols; ++j) gr.at(0, j) += G.at(i, j);
            }
        };
    }
    return out;
}

NodeId Graph::scale(NodeId a, double c) {
    Tensor C = val(a);
    for (double& x : C.v) x *= c;
    NodeId out = push(std::move(C), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, c, out] {
            const Tensor& G = grad(out);
            Tensor& ga = grad_mut(a);
            for (size_t i = 0; i < G.size(); ++i) ga.v[i] += c * G.v[i];
        };
    }
    return out;
}

NodeId Graph::mul_mask(NodeId a, Tensor mask) {
    const Tensor& A = val(a);
    assert(A.same_shape(mask));
    Tensor C = A;
    for (size_t i = 0; i < C.size(); ++i) C.v[i] *= mask.v[i];
    NodeId out = push(std::move(C), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, out, m = std::move(mask)] {
            const Tensor& G = grad(out);
            Tensor& ga = grad_mut(a);
            for (size_t i = 0; i < G.size(); ++i) ga.v[i] += G.v[i] * m.v[i];
        };
    }
    return out;
}

NodeId Graph::transpose(NodeId a) {
    const Tensor& A = val(a);
    Tensor C(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) C.at(j, i) = A.at(i, j);
    NodeId out = push(std::move(C), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, out] {
            const Tensor& G = grad(out);
            Tensor& ga = grad_mut(a);
            for (int i = 0; i < G.rows; ++i)
                for (int j = 0; j < G.cols; ++j) ga.at(j, i) += G.at(i, j);
        };
    }
    return out;
}

NodeId Graph::gelu(NodeId a) {
    const Tensor& A = val(a);
    Tensor C(A.rows, A.cols);
    k::gelu(A.v.data(), C.v.data(), A.size());
    NodeId out = push(std::move(C), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, out] {
            const Tensor& A = val(a);
            const Tensor& G = grad(out);
            k::gelu_backward(A.v.data(), G.v.data(), grad_mut(a).v.data(), A.size());
        };
    }
    return out;
}

NodeId Graph::sigmoid(NodeId a) {
    const Tensor& A = val(a);
    Tensor C(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) C.v[i] = 1.0 / (1.0 + std::exp(-A.v[i]));
    NodeId out = push(std::move(C), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, out] {
            const Tensor& Y = val(out);
            const Tensor& G = grad(out);
            Tensor& ga = grad_mut(a);
            for (size_t i = 0; i < Y.size(); ++i) ga.v[i] += G.v[i] * Y.v[i] * (1.0 - Y.v[i]);
        };
    }
    return out;
}

NodeId Graph::layernorm(NodeId x, NodeId gain, NodeId bias) {
    const Tensor& X = val(x);
    const Tensor& Gn = val(gain);
    const Tensor& Bs = val(bias);
    assert(Gn.rows == 1 && Gn.cols == X.cols && Bs.rows == 1 && Bs.cols == X.cols);
    Tensor Y(X.rows, X.cols);
    Tensor xhat(X.rows, X.cols);
    std::vector<double> rstd(static_cast<size_t>(X.rows));
    k::layernorm(X.v.data(), Gn.v.data(), Bs.v.data(), Y.v.data(), xhat.v.data(), rstd.data(),
                 X.rows, X.cols);
    const bool needs = rg(x) || rg(gain) || rg(bias);
    NodeId out = push(std::move(Y), needs, nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, x, gain, bias, out, xh = std::move(xhat), rs = std::move(rstd)] {
            const Tensor& G = grad(out);
            const Tensor& Gn = val(gain);
            const int n = G.rows, m = G.cols;
            if (rg(x))
                k::layernorm_backward_x(G.v.data(), Gn.v.data(), xh.v.data(), rs.data(),
                                        grad_mut(x).v.data(), n, m);
            if (rg(gain)) {
                Tensor& gg = grad_mut(gain);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j) gg.at(0, j) += G.at(i, j) * xh.at(i, j);
            }
            if (rg(bias)) {
                Tensor& gb = grad_mut(bias);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j) gb.at(0, j) += G.at(i, j);
            }
        };
    }
    return out;
}

NodeId Graph::softmax_rows(NodeId a, bool causal) {
    const Tensor& A = val(a);
    assert(!causal || A.rows == A.cols);
    Tensor Y(A.rows, A.cols);
    k::softmax_rows(A.v.data(), Y.v.data(), A.rows, A.cols, causal);
    NodeId out = push(std::move(Y), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, out] {
            const Tensor& Y = val(out);
            const Tensor& G = grad(out);
            k::softmax_rows_backward(Y.v.data(), G.v.data(), grad_mut(a).v.data(), Y.rows, Y.cols);
        };
    }
    return out;
}

NodeId Graph::slice_cols(NodeId a, int c0, int len) {
    const Tensor& A = val(a);
    assert(c0 >= 0 && c0 + len <= A.cols);
    Tensor C(A.rows, len);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < len; ++j) C.at(i, j) = A.at(i, c0 + j);
    NodeId out = push(std::move(C), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, c0, len, out] {
            const Tensor& G = grad(out);
            Tensor& ga = grad_mut(a);
            for (int i = 0; i < G.rows; ++i)
                for (int j = 0; j < len; ++j) ga.at(i, c0 + j) += G.at(i, j);
        };
    }
    return out;
}

NodeId Graph::concat_cols(const std::vector<NodeId>& parts) {
    assert(!parts.empty());
    int total = 0;
    bool needs = false;
    const int rows = val(parts[0]).rows;
    for (NodeId p : parts) {
        assert(val(p).rows == rows);
        total += val(p).cols;
        needs = needs || rg(p);
    }
    Tensor C(rows, total);
    int off = 0;
    for (NodeId p : parts) {
        const Tensor& P = val(p);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < P.cols; ++j) C.at(i, off + j) = P.at(i, j);
        off += P.cols;
    }
    NodeId out = push(std::move(C), needs, nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, ps = parts, out] {
            const Tensor& G = grad(out);
            int off = 0;
            for (NodeId p : ps) {
                const int pc = val(p).cols;
                if (rg(p)) {
                    Tensor& gp = grad_mut(p);
                    for (int i = 0; i < G.rows; ++i)
                        for (int j = 0; j < pc; ++j) gp.at(i, j) += G.at(i, off + j);
                }
                off += pc;
            }
        };
    }
    return out;
}

NodeId Graph::gather_rows(NodeId table, std::vector<int> idx) {
    const Tensor& T = val(table);
    Tensor C(static_cast<int>(idx.size()), T.cols);
    for (size_t r = 0; r < idx.size(); ++r) {
        assert(idx[r] >= 0 && idx[r] < T.rows);
        for (int j = 0; j < T.cols; ++j) C.at(static_cast<int>(r), j) = T.at(idx[r], j);
    }
    NodeId out = push(std::move(C), rg(table), nullptr);
    if (nodes_[out].rg) {
        // scatter-add stays serial: idx may repeat
        nodes_[out].back = [this, table, out, ix = std::move(idx)] {
            const Tensor& G = grad(out);
            Tensor& gt = grad_mut(table);
            for (size_t r = 0; r < ix.size(); ++r)
                for (int j = 0; j < G.cols; ++j) gt.at(ix[r], j) += G.at(static_cast<int>(r), j);
        };
    }
    return out;
}

NodeId Graph::sum_all(NodeId a) {
    const Tensor& A = val(a);
    Tensor C(1, 1);
    double s = 0.0;
    for (double x : A.v) s += x;
    C.at(0, 0) = s;
    NodeId out = push(std::move(C), rg(a), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, a, out] {
            const double g = grad(out).at(0, 0);
            Tensor& ga = grad_mut(a);
            for (double& x : ga.v) x += g;
        };
    }
    return out;
}

NodeId Graph::bce_logits(NodeId s, Tensor labels) {
    const Tensor& S = val(s);
    assert(S.same_shape(labels));
    Tensor C(S.rows, S.cols);
    for (size_t i = 0; i < S.size(); ++i) {
        const double x = S.v[i];
        const double o = labels.v[i];
        C.v[i] = std::max(x, 0.0) - x * o + std::log1p(std::exp(-std::fabs(x)));
    }
    NodeId out = push(std::move(C), rg(s), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, s, out, lab = std::move(labels)] {
            const Tensor& S = val(s);
            const Tensor& G = grad(out);
            Tensor& gs = grad_mut(s);
            for (size_t i = 0; i < S.size(); ++i) {
                const double sig = 1.0 / (1.0 + std::exp(-S.v[i]));
                gs.v[i] += G.v[i] * (sig - lab.v[i]);
            }
        };
    }
    return out;
}

NodeId Graph::margin_abs(NodeId p, Tensor target, double delta) {
    const Tensor& P = val(p);
    assert(P.same_shape(target));
    Tensor C(P.rows, P.cols);
    for (size_t i = 0; i < P.size(); ++i)
        C.v[i] = std::max(std::fabs(P.v[i] - target.v[i]), delta);
    NodeId out = push(std::move(C), rg(p), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, p, out, t = std::move(target), delta] {
            const Tensor& P = val(p);
            const Tensor& G = grad(out);
            Tensor& gp = grad_mut(p);
            for (size_t i = 0; i < P.size(); ++i) {
                const double d = P.v[i] - t.v[i];
                if (std::fabs(d) > delta) gp.v[i] += G.v[i] * (d > 0.0 ? 1.0 : -1.0);
            }
        };
    }
    return out;
}

NodeId Graph::nll(NodeId logits, std::vector<int> targets, std::vector<double> weights) {
    const Tensor& L = val(logits);
    assert(static_cast<int>(targets.size()) == L.rows);
    assert(targets.size() == weights.size());
    // keep softmax probabilities for the backward pass
    Tensor probs(L.rows, L.cols);
    k::softmax_rows(L.v.data(), probs.v.data(), L.rows, L.cols, false);
    double total = 0.0;
    for (int t = 0; t < L.rows; ++t) {
        if (weights[t] == 0.0) continue;
        const double* row = L.row(t);
        double mx = row[0];
        for (int j = 1; j < L.cols; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (int j = 0; j < L.cols; ++j) z += std::exp(row[j] - mx);
        const double logp = row[targets[t]] - mx - std::log(z);
        total += weights[t] * (-logp);
    }
    Tensor C(1, 1);
    C.at(0, 0) = total;
    NodeId out = push(std::move(C), rg(logits), nullptr);
    if (nodes_[out].rg) {
        nodes_[out].back = [this, logits, out, tg = std::move(targets), w = std::move(weights),
                            pb = std::move(probs)] {
            const double g = grad(out).at(0, 0);
            Tensor& gl = grad_mut(logits);
            for (int t = 0; t < gl.rows; ++t) {
                if (w[t] == 0.0) continue;
                const double gw = g * w[t];
                for (int j = 0; j < gl.cols; ++j) gl.at(t, j) += gw * pb.at(t, j);
                gl.at(t, tg[t]) -= gw;
            }
        };
    }
    return out;
}

std::vector<double> Graph::row_nll(const Tensor& logits, const std::vector<int>& targets) {
    std::vector<double> out(targets.size());
    for (size_t t = 0; t < targets.size(); ++t) {
        const double* row = logits.row(static_cast<int>(t));
        double mx = row[0];
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (int j = 0; j < logits.cols; ++j) z += std::exp(row[j] - mx);
        out[t] = -(row[targets[t]] - mx - std::log(z));
    }
    return out;
}

void Graph::backward(NodeId root) {
    if (!with_grad_) throw std::logic_error("backward on inference graph");
    const Tensor& r = val(root);
    if (r.rows != 1 || r.cols != 1) throw std::logic_error("backward root must be scalar");
    if (!nodes_[root].rg) return;
    grad_mut(root).at(0, 0) = 1.0;
    for (NodeId id = root; id >= 0; --id) {
        if (nodes_[id].rg && nodes_[id].back) nodes_[id].back();
    }
}

}  // namespace hint::ad
