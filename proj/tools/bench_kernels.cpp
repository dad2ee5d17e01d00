// Benchmark comparing the serial reference kernels against the OpenMP ones,
// plus a whole-model forward/backward timing at the training shape.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hint/augment.hpp"
#include "hint/kernels.hpp"
#include "hint/objectives.hpp"
#include "hint/rng.hpp"
#include "hint/synthetic.hpp"
#include "hint/trainer.hpp"

namespace k = hint::kernels;

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = clock_type::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_matmul(int n, int kk, int m, int reps) {
    hint::Rng rng(1);
    std::vector<double> a(static_cast<size_t>(n) * kk), b(static_cast<size_t>(kk) * m),
        c(static_cast<size_t>(n) * m);
    for (double& x : a) x = rng.gaussian();
    for (double& x : b) x = rng.gaussian();
    const double serial =
        time_ms([&] { k::matmul_nn_serial(a.data(), b.data(), c.data(), n, kk, m); }, reps);
    const double omp =
        time_ms([&] { k::matmul_nn_omp(a.data(), b.data(), c.data(), n, kk, m); }, reps);
    const double flops = 2.0 * n * kk * m;
    std::printf("matmul %4dx%4dx%4d  serial %8.3f ms (%6.2f GF/s)  omp %8.3f ms (%6.2f GF/s)  "
                "speedup %.2fx\n",
                n, kk, m, serial, flops / serial / 1e6, omp, flops / omp / 1e6, serial / omp);
}

void bench_rows(int n, int m, int reps) {
    hint::Rng rng(2);
    std::vector<double> x(static_cast<size_t>(n) * m), y(x.size());
    for (double& v : x) v = rng.gaussian();
    const double serial =
        time_ms([&] { k::softmax_rows_serial(x.data(), y.data(), n, m, false); }, reps);
    const double omp = time_ms([&] { k::softmax_rows_omp(x.data(), y.data(), n, m, false); }, reps);
    std::printf("softmax rows %4dx%-4d serial %8.3f ms             omp %8.3f ms             "
                "speedup %.2fx\n",
                n, m, serial, omp, serial / omp);
}

void bench_training_step() {
    using namespace hint;
    auto docs = make_synthetic_corpus(64, 5);
    Vocab vocab = build_vocab(docs, 1);
    ModelConfig mc;
    mc.d_model = 64;
    mc.n_heads = 4;
    mc.d_ff = 128;
    mc.n_layers_enc = 2;
    mc.n_layers_dec = 2;
    mc.vocab_size = vocab.size();
    mc.max_len = 96;
    Model model(mc);
    model.init_params(5);
    HashedOracle oracle(5);
    TrainData data = frame_documents(docs, vocab, 10, mc.max_len);
    std::vector<TrainingSample> batch;
    Rng rng(7);
    for (int i = 0; i < 4; ++i) {
        batch.push_back(make_human(data.segs[static_cast<size_t>(i)], data.ids[static_cast<size_t>(i)]));
        batch.push_back(sample_negative(data.segs[static_cast<size_t>(i)],
                                        data.ids[static_cast<size_t>(i)], data.segs, data.ids, rng));
    }
    ObjectiveConfig cfg;
    auto step = [&] {
        ad::Graph g(true);
        BoundModel bm(g, model, true);
        BatchLoss bl = loss_pre(bm, batch, oracle, cfg);
        g.backward(bl.total);
    };
    for (bool parallel : {false, true}) {
        k::set_parallel(parallel);
        const double ms = time_ms(step, 5);
        std::printf("forward+backward, batch 8, d=64: %8.2f ms  (%s)\n", ms,
                    parallel ? "openmp" : "serial");
    }
    k::set_parallel(true);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp\n");
#endif
    bench_matmul(64, 64, 64, 200);
    bench_matmul(96, 64, 320, 100);
    bench_matmul(256, 256, 256, 20);
    bench_matmul(512, 512, 512, 5);
    bench_rows(96, 96, 500);
    bench_rows(512, 512, 50);
    bench_training_step();
    return 0;
}
