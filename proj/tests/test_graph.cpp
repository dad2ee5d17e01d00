#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "hint/graph.hpp"
#include "hint/rng.hpp"

using hint::Tensor;
using hint::ad::Graph;
using hint::ad::NodeId;

namespace {

Tensor random_tensor(int r, int c, hint::Rng& rng, double scale = 1.0) {
    Tensor t(r, c);
    for (double& x : t.v) x = scale * rng.gaussian();
    return t;
}

// Central-difference check of d(scalar op output)/d(leaf) for every leaf
// coordinate. builder() must rebuild the graph from the leaf tensors.
void check_gradients(std::vector<Tensor> leaves,
                     const std::function<double(Graph&, std::vector<NodeId>&)>& build,
                     double tol = 1e-6) {
    Graph g(true);
    std::vector<NodeId> ids;
    for (const Tensor& t : leaves) ids.push_back(g.leaf(t, true));
    std::vector<NodeId> inputs = ids;
    const double base = build(g, inputs);
    (void)base;
    // find the scalar node: build returns its value, but we need the id, so
    // rebuild with a wrapper that records it
    Graph g2(true);
    std::vector<NodeId> ids2;
    for (const Tensor& t : leaves) ids2.push_back(g2.leaf(t, true));

    // the builder contract: it appends ops and returns the value of the final
    // scalar node, which is always the last node pushed
    build(g2, ids2);
    const NodeId root = static_cast<NodeId>(g2.num_nodes() - 1);
    g2.backward(root);

    const double h = 1e-6;
    for (size_t li = 0; li < leaves.size(); ++li) {
        for (size_t i = 0; i < leaves[li].size(); ++i) {
            std::vector<Tensor> up = leaves, dn = leaves;
            up[li].v[i] += h;
            dn[li].v[i] -= h;
            Graph gu(false), gd(false);
            std::vector<NodeId> idu, idd;
            for (const Tensor& t : up) idu.push_back(gu.leaf(t, false));
            for (const Tensor& t : dn) idd.push_back(gd.leaf(t, false));
            const double fu = build(gu, idu);
            const double fd = build(gd, idd);
            const double numeric = (fu - fd) / (2.0 * h);
            const double analytic = g2.grad(ids2[li]).v[i];
            CHECK(analytic == doctest::Approx(numeric).epsilon(tol).scale(1.0));
        }
    }
}

double scalar(Graph& g, NodeId id) { return g.val(id).at(0, 0); }

}  // namespace

TEST_CASE("matmul forward and gradient") {
    hint::Rng rng(1);
    check_gradients({random_tensor(3, 4, rng), random_tensor(4, 2, rng)},
                    [](Graph& g, std::vector<NodeId>& in) {
                        return scalar(g, g.sum_all(g.matmul(in[0], in[1])));
                    });
}

TEST_CASE("matmul_nt gradient") {
    hint::Rng rng(2);
    check_gradients({random_tensor(3, 4, rng), random_tensor(5, 4, rng)},
                    [](Graph& g, std::vector<NodeId>& in) {
                        return scalar(g, g.sum_all(g.matmul_nt(in[0], in[1])));
                    });
}

TEST_CASE("add, add_rowvec, scale gradients") {
    hint::Rng rng(3);
    check_gradients({random_tensor(3, 4, rng), random_tensor(3, 4, rng), random_tensor(1, 4, rng)},
                    [](Graph& g, std::vector<NodeId>& in) {
                        NodeId x = g.add(in[0], in[1]);
                        x = g.add_rowvec(x, in[2]);
                        return scalar(g, g.sum_all(g.scale(x, 0.37)));
                    });
}

TEST_CASE("gelu and sigmoid gradients") {
    hint::Rng rng(4);
    check_gradients({random_tensor(4, 5, rng)}, [](Graph& g, std::vector<NodeId>& in) {
        return scalar(g, g.sum_all(g.gelu(in[0])));
    });
    check_gradients({random_tensor(4, 5, rng)}, [](Graph& g, std::vector<NodeId>& in) {
        return scalar(g, g.sum_all(g.sigmoid(in[0])));
    });
}

TEST_CASE("layernorm gradient wrt input, gain, bias") {
    hint::Rng rng(5);
    Tensor gain = random_tensor(1, 6, rng, 0.5);
    for (double& x : gain.v) x += 1.0;
    check_gradients({random_tensor(3, 6, rng), gain, random_tensor(1, 6, rng, 0.2)},
                    [](Graph& g, std::vector<NodeId>& in) {
                        // weight rows unevenly so per-row terms do not cancel
                        Tensor m(3, 6);
                        for (int i = 0; i < 3; ++i)
                            for (int j = 0; j < 6; ++j) m.at(i, j) = 0.17 * (i + 1) + 0.05 * j;
                        NodeId y = g.layernorm(in[0], in[1], in[2]);
                        return scalar(g, g.sum_all(g.mul_mask(y, m)));
                    },
                    1e-5);
}

TEST_CASE("softmax rows gradient, causal and full") {
    hint::Rng rng(6);
    for (bool causal : {false, true}) {
        check_gradients({random_tensor(4, 4, rng)}, [causal](Graph& g, std::vector<NodeId>& in) {
            Tensor m(4, 4);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) m.at(i, j) = 0.3 * i - 0.2 * j + 0.5;
            return scalar(g, g.sum_all(g.mul_mask(g.softmax_rows(in[0], causal), m)));
        });
    }
}

TEST_CASE("slice, concat, transpose, gather gradients") {
    hint::Rng rng(7);
    check_gradients({random_tensor(3, 6, rng)}, [](Graph& g, std::vector<NodeId>& in) {
        NodeId a = g.slice_cols(in[0], 0, 3);
        NodeId b = g.slice_cols(in[0], 3, 3);
        NodeId cat = g.concat_cols({b, a});
        return scalar(g, g.sum_all(g.matmul_nt(cat, cat)));
    });
    check_gradients({random_tensor(4, 3, rng)}, [](Graph& g, std::vector<NodeId>& in) {
        return scalar(g, g.sum_all(g.matmul(in[0], g.transpose(in[0]))));
    });
    check_gradients({random_tensor(5, 3, rng)}, [](Graph& g, std::vector<NodeId>& in) {
        // repeated indices must accumulate in the scatter
        NodeId picked = g.gather_rows(in[0], {0, 2, 2, 4, 0});
        return scalar(g, g.sum_all(g.gelu(picked)));
    });
}

TEST_CASE("bce_logits value and gradient") {
    hint::Rng rng(8);
    Tensor labels(2, 3);
    labels.v = {1, 0, 1, 0, 1, 0};
    check_gradients({random_tensor(2, 3, rng)}, [labels](Graph& g, std::vector<NodeId>& in) {
        return scalar(g, g.sum_all(g.bce_logits(in[0], labels)));
    });
    // value spot check: s=0 gives -log(0.5) regardless of label
    Graph g(false);
    Tensor zeros(1, 2);
    Tensor lab(1, 2);
    lab.v = {1, 0};
    NodeId out = g.bce_logits(g.leaf(zeros), lab);
    CHECK(g.val(out).at(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(g.val(out).at(0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("margin_abs clamps and has zero gradient inside the margin") {
    Tensor target(1, 3);
    target.v = {0.5, 0.5, 0.5};
    Tensor p(1, 3);
    p.v = {0.55, 0.5, 0.9};  // inside, at kink, outside
    Graph g(true);
    NodeId pid = g.leaf(p, true);
    NodeId loss = g.sum_all(g.margin_abs(pid, target, 0.1));
    CHECK(g.val(loss).at(0, 0) == doctest::Approx(0.1 + 0.1 + 0.4).epsilon(1e-12));
    g.backward(loss);
    CHECK(g.grad(pid).v[0] == 0.0);
    CHECK(g.grad(pid).v[1] == 0.0);
    CHECK(g.grad(pid).v[2] == 1.0);
}

TEST_CASE("nll equals manual cross entropy and its gradient checks out") {
    hint::Rng rng(9);
    Tensor logits = random_tensor(3, 5, rng);
    std::vector<int> targets = {2, 0, 4};
    std::vector<double> w = {0.5, 0.25, 0.25};
    Graph g(true);
    NodeId lid = g.leaf(logits, true);
    NodeId loss = g.nll(lid, targets, w);
    double expect = 0.0;
    for (int t = 0; t < 3; ++t) {
        double mx = logits.at(t, 0);
        for (int j = 1; j < 5; ++j) mx = std::max(mx, logits.at(t, j));
        double z = 0.0;
        for (int j = 0; j < 5; ++j) z += std::exp(logits.at(t, j) - mx);
        expect += w[static_cast<size_t>(t)] * -(logits.at(t, targets[static_cast<size_t>(t)]) - mx - std::log(z));
    }
    CHECK(g.val(loss).at(0, 0) == doctest::Approx(expect).epsilon(1e-12));

    check_gradients({logits}, [targets, w](Graph& gg, std::vector<NodeId>& in) {
        return gg.val(gg.nll(in[0], targets, w)).at(0, 0);
    });
}

TEST_CASE("row_nll matches nll with unit weights") {
    hint::Rng rng(10);
    Tensor logits = random_tensor(4, 6, rng);
    std::vector<int> targets = {1, 5, 0, 3};
    auto per = Graph::row_nll(logits, targets);
    Graph g(false);
    NodeId loss = g.nll(g.leaf(logits), targets, {1, 1, 1, 1});
    double sum = 0.0;
    for (double x : per) sum += x;
    CHECK(sum == doctest::Approx(g.val(loss).at(0, 0)).epsilon(1e-12));
}
