#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hint/tensor.hpp"

namespace hint::ad {

using NodeId = int32_t;

// Reverse-mode tape over matrices. Ops append nodes that reference earlier
// nodes only, so walking the tape in reverse creation order is a valid
// topological order for backprop. A graph constructed with with_grad=false
// records no backward closures and allocates no gradient storage; that is
// the inference path.
class Graph {
public:
    explicit Graph(bool with_grad = true) : with_grad_(with_grad) {}
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    NodeId leaf(Tensor t, bool requires_grad = false);

    const Tensor& val(NodeId id) const { return nodes_[id].val; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
    Tensor& grad_mut(NodeId id) { return nodes_[id].grad; }
    size_t num_nodes() const { return nodes_.size(); }
    bool with_grad() const { return with_grad_; }

    NodeId matmul(NodeId a, NodeId b);     // A(n,k) B(k,m)
    NodeId matmul_nt(NodeId a, NodeId b);  // A(n,k) B(m,k)^T
    NodeId add(NodeId a, NodeId b);
    NodeId add_rowvec(NodeId a, NodeId r);  // r is 1xC, broadcast over rows
    NodeId scale(NodeId a, double c);
    NodeId mul_mask(NodeId a, Tensor mask);  // elementwise; mask is constant
    NodeId transpose(NodeId a);
    NodeId gelu(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId layernorm(NodeId x, NodeId gain, NodeId bias);
    NodeId softmax_rows(NodeId a, bool causal);
    NodeId slice_cols(NodeId a, int c0, int len);
    NodeId concat_cols(const std::vector<NodeId>& parts);
    NodeId gather_rows(NodeId table, std::vector<int> idx);
    NodeId sum_all(NodeId a);  // 1x1

    // Stable elementwise binary cross-entropy on logits s against constant
    // labels: max(s,0) - s*o + log1p(exp(-|s|)).
    NodeId bce_logits(NodeId s, Tensor labels);

    // max(|p - t|, delta) with subgradient 0 at and below the margin.
    NodeId margin_abs(NodeId p, Tensor target, double delta);

    // sum_t w[t] * -log softmax(logits.row(t))[targets[t]], fused and stable.
    NodeId nll(NodeId logits, std::vector<int> targets, std::vector<double> weights);

    // Per-row -log softmax(row)[target], forward only (perplexity path).
    static std::vector<double> row_nll(const Tensor& logits, const std::vector<int>& targets);

    void backward(NodeId root);  // root must be 1x1

private:
    struct Node {
        Tensor val;
        Tensor grad;
        std::function<void()> back;
        bool rg = false;
    };

    NodeId push(Tensor val, bool rg, std::function<void()> back);
    bool rg(NodeId id) const { return nodes_[id].rg; }

    std::vector<Node> nodes_;
    bool with_grad_;
};

}  // namespace hint::ad
