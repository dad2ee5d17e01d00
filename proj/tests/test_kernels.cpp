#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "hint/kernels.hpp"
#include "hint/rng.hpp"

namespace k = hint::kernels;

namespace {

std::vector<double> random_vec(size_t n, hint::Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.gaussian();
    return v;
}

}  // namespace

TEST_CASE("matmul variants: omp is bit-identical to serial") {
    hint::Rng rng(7);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(40));
        const int kk = 1 + static_cast<int>(rng.below(40));
        const int m = 1 + static_cast<int>(rng.below(40));
        auto a = random_vec(static_cast<size_t>(n) * kk, rng);
        auto b_nn = random_vec(static_cast<size_t>(kk) * m, rng);
        auto b_nt = random_vec(static_cast<size_t>(m) * kk, rng);
        auto b_tn = random_vec(static_cast<size_t>(n) * m, rng);

        std::vector<double> c1(static_cast<size_t>(n) * m), c2(static_cast<size_t>(n) * m);
        k::matmul_nn_serial(a.data(), b_nn.data(), c1.data(), n, kk, m);
        k::matmul_nn_omp(a.data(), b_nn.data(), c2.data(), n, kk, m);
        CHECK(c1 == c2);

        k::matmul_nt_serial(a.data(), b_nt.data(), c1.data(), n, kk, m);
        k::matmul_nt_omp(a.data(), b_nt.data(), c2.data(), n, kk, m);
        CHECK(c1 == c2);

        std::vector<double> d1(static_cast<size_t>(kk) * m), d2(static_cast<size_t>(kk) * m);
        k::matmul_tn_serial(a.data(), b_tn.data(), d1.data(), n, kk, m);
        k::matmul_tn_omp(a.data(), b_tn.data(), d2.data(), n, kk, m);
        CHECK(d1 == d2);
    }
}

TEST_CASE("matmul accumulate adds instead of overwriting") {
    hint::Rng rng(3);
    const int n = 5, kk = 4, m = 3;
    auto a = random_vec(static_cast<size_t>(n) * kk, rng);
    auto b = random_vec(static_cast<size_t>(kk) * m, rng);
    std::vector<double> base(static_cast<size_t>(n) * m, 1.5);
    std::vector<double> once(static_cast<size_t>(n) * m);
    k::matmul_nn_serial(a.data(), b.data(), once.data(), n, kk, m);
    std::vector<double> acc = base;
    k::matmul_nn_serial(a.data(), b.data(), acc.data(), n, kk, m, true);
    for (size_t i = 0; i < acc.size(); ++i) CHECK(acc[i] == doctest::Approx(base[i] + once[i]));
}

TEST_CASE("matmul against a naive triple loop") {
    hint::Rng rng(11);
    const int n = 7, kk = 9, m = 5;
    auto a = random_vec(static_cast<size_t>(n) * kk, rng);
    auto b = random_vec(static_cast<size_t>(kk) * m, rng);
    std::vector<double> c(static_cast<size_t>(n) * m);
    k::matmul_nn(a.data(), b.data(), c.data(), n, kk, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double expect = 0.0;
            for (int l = 0; l < kk; ++l) expect += a[static_cast<size_t>(i) * kk + l] * b[static_cast<size_t>(l) * m + j];
            CHECK(c[static_cast<size_t>(i) * m + j] == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("softmax rows: normalization, causal mask, omp equality") {
    hint::Rng rng(5);
    const int n = 12, m = 12;
    auto x = random_vec(static_cast<size_t>(n) * m, rng);
    std::vector<double> y1(x.size()), y2(x.size());
    for (bool causal : {false, true}) {
        k::softmax_rows_serial(x.data(), y1.data(), n, m, causal);
        k::softmax_rows_omp(x.data(), y2.data(), n, m, causal);
        CHECK(y1 == y2);
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < m; ++j) sum += y1[static_cast<size_t>(i) * m + j];
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            if (causal)
                for (int j = i + 1; j < m; ++j) CHECK(y1[static_cast<size_t>(i) * m + j] == 0.0);
        }
    }
}

TEST_CASE("layernorm rows have zero mean and unit variance before affine") {
    hint::Rng rng(9);
    const int n = 6, m = 32;
    auto x = random_vec(static_cast<size_t>(n) * m, rng);
    std::vector<double> gain(m, 1.0), bias(m, 0.0), y(x.size()), xhat(x.size()), rstd(n);
    k::layernorm_serial(x.data(), gain.data(), bias.data(), y.data(), xhat.data(), rstd.data(), n, m);
    std::vector<double> y2(x.size()), xhat2(x.size()), rstd2(n);
    k::layernorm_omp(x.data(), gain.data(), bias.data(), y2.data(), xhat2.data(), rstd2.data(), n, m);
    CHECK(y == y2);
    for (int i = 0; i < n; ++i) {
        double mean = 0.0, var = 0.0;
        for (int j = 0; j < m; ++j) mean += y[static_cast<size_t>(i) * m + j];
        mean /= m;
        for (int j = 0; j < m; ++j) {
            const double d = y[static_cast<size_t>(i) * m + j] - mean;
            var += d * d;
        }
        var /= m;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps in the denominator
    }
}

TEST_CASE("gelu matches erf closed form and omp equality") {
    std::vector<double> x = {-3.0, -1.0, -0.1, 0.0, 0.1, 1.0, 3.0};
    std::vector<double> y1(x.size()), y2(x.size());
    k::gelu_serial(x.data(), y1.data(), x.size());
    k::gelu_omp(x.data(), y2.data(), x.size());
    CHECK(y1 == y2);
    CHECK(y1[3] == 0.0);
    CHECK(y1[5] == doctest::Approx(0.8413447460685429).epsilon(1e-12));  // x * Phi(1)
}

TEST_CASE("dispatch honors the parallel switch deterministically") {
    hint::Rng rng(21);
    const int n = 64, kk = 64, m = 64;  // above the dispatch threshold
    auto a = random_vec(static_cast<size_t>(n) * kk, rng);
    auto b = random_vec(static_cast<size_t>(kk) * m, rng);
    std::vector<double> c1(static_cast<size_t>(n) * m), c2(static_cast<size_t>(n) * m);
    k::set_parallel(false);
    k::matmul_nn(a.data(), b.data(), c1.data(), n, kk, m);
    k::set_parallel(true);
    k::matmul_nn(a.data(), b.data(), c2.data(), n, kk, m);
    CHECK(c1 == c2);
}
