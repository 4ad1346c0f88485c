#include <benchmark/benchmark.h>

#include "lightpath/cost_model.hpp"
#include "lightpath/ssl.hpp"
#include "lightpath/synthetic.hpp"

using namespace lightpath;

namespace {

EncoderConfig bench_config(std::size_t vocab, std::size_t d_model) {
    EncoderConfig cfg;
    cfg.layers = 2;
    cfg.heads = 2;
    cfg.d_model = d_model;
    cfg.d_ff = 2 * d_model;
    cfg.decoder_layers = 1;
    cfg.vocab = vocab;
    cfg.max_len = 512;
    return cfg;
}

void bm_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Tensor a({n, n}), b({n, n});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.uniform(-1, 1);
    for (auto _ : state) {
        ad::Tape tape;
        benchmark::DoNotOptimize(tape.matmul(tape.constant(a), tape.constant(b)));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(2 * n * n * n));
}

// Forward encoding cost versus sparsity: higher gamma, shorter input.
void bm_encode(benchmark::State& state) {
    const double gamma = static_cast<double>(state.range(0)) / 10.0;
    RoadNetwork net = generate_grid_network(16, 16, 7);
    PathDataset ds = generate_synthetic_paths(net, 1, 200, 1, 8);
    EncoderConfig cfg = bench_config(net.edge_count(), 64);
    Rng rng(9);
    EncoderModel model = EncoderModel::init(cfg, rng);
    Rng view_rng(10);
    SparsePath view = sparsify(ds.record(0).path, gamma, view_rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode(model, net, view));
    }
}

void bm_pretrain_epoch(benchmark::State& state) {
    RoadNetwork net = generate_grid_network(8, 8, 11);
    PathDataset ds = generate_synthetic_paths(net, 16, 20, 1, 12);
    EncoderConfig cfg = bench_config(net.edge_count(), 32);
    Rng rng(13);
    DualEncoderState dual = DualEncoderState::init(cfg, 0.99, rng);
    RelationHead head = RelationHead::init(cfg.d_model, rng);
    PretrainConfig pc;
    pc.views = {0.4, 0.8};
    pc.batch_size = 16;
    pc.epochs = 1;
    pc.warmup_epochs = 0;
    pc.seed = 14;
    for (auto _ : state) {
        DualEncoderState d = dual;
        RelationHead h = head;
        benchmark::DoNotOptimize(pretrain(d, h, net, ds, pc));
    }
}

void bm_count_flops(benchmark::State& state) {
    EncoderConfig cfg = bench_config(10000, 512);
    cfg.layers = 12;
    cfg.heads = 8;
    cfg.d_ff = 1024;
    for (auto _ : state) {
        benchmark::DoNotOptimize(count_flops(cfg, 200, 0.5, true));
    }
}

} // namespace

BENCHMARK(bm_matmul)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(bm_encode)->Arg(0)->Arg(5)->Arg(9);
BENCHMARK(bm_pretrain_epoch);
BENCHMARK(bm_count_flops);

BENCHMARK_MAIN();
