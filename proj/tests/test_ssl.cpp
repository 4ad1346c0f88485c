#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "lightpath/ssl.hpp"
#include "lightpath/synthetic.hpp"

using namespace lightpath;

namespace {

RoadNetwork grid() {
    return generate_grid_network(6, 6, 404);
}

std::vector<Path> walk_batch(const RoadNetwork& net, std::size_t count, std::size_t length,
                             std::uint64_t seed) {
    PathDataset ds = generate_synthetic_paths(net, count, length, 1, seed);
    std::vector<Path> out;
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(ds.record(i).path);
    return out;
}

EncoderConfig small_cfg(const RoadNetwork& net, std::size_t d = 8, std::size_t layers = 2,
                        std::size_t heads = 2) {
    EncoderConfig cfg;
    cfg.layers = layers;
    cfg.heads = heads;
    cfg.d_model = d;
    cfg.d_ff = 2 * d;
    cfg.decoder_layers = 1;
    cfg.vocab = net.edge_count();
    cfg.max_len = 64;
    return cfg;
}

void zero_head(RelationHead& head) {
    for (std::size_t i = 0; i < head.params.size(); ++i) {
        Tensor& t = head.params.value(i);
        for (std::size_t j = 0; j < t.size(); ++j) t[j] = 0.0;
    }
}

} // namespace

TEST_CASE("view construction lengths and determinism") {
    ViewConfig views{0.4, 0.8};
    Path p{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    Rng rng(1);
    auto [v1, v2] = build_views(p, views, rng);
    CHECK(v1.length() == 6);
    CHECK(v2.length() == 2);

    Rng a(9), b(9);
    auto [a1, a2] = build_views(p, views, a);
    auto [b1, b2] = build_views(p, views, b);
    CHECK(a1.omega == b1.omega);
    CHECK(a2.omega == b2.omega);

    ViewConfig zero_first{0.0, 0.5};
    Rng c(2);
    auto [f1, f2] = build_views(p, zero_first, c);
    CHECK(f1.edge_ids == p.edge_ids);

    ViewConfig equal_ratios{0.4, 0.4};
    CHECK_THROWS_AS(equal_ratios.validate(), std::invalid_argument);
    ViewConfig ratio_out_of_range{1.0, 0.4};
    CHECK_THROWS_AS(ratio_out_of_range.validate(), std::invalid_argument);
}

TEST_CASE("four representations: shapes, copy equality, frozen auxiliary") {
    RoadNetwork net = grid();
    EncoderConfig cfg = small_cfg(net);
    Rng rng(5);
    DualEncoderState dual = DualEncoderState::init(cfg, 0.99, rng);

    Path p = walk_batch(net, 1, 10, 77)[0];
    Rng vr(3);
    auto [v1, v2] = build_views(p, {0.4, 0.8}, vr);

    ad::Tape tape;
    LiftedEncoder main = lift(tape, dual.main, true);
    LiftedEncoder aux = lift(tape, dual.auxiliary, false);
    FourReps reps = four_representations(tape, main, aux, net, v1, v2);

    for (ad::ValueId id : {reps.main_v1, reps.main_v2, reps.aux_v1, reps.aux_v2}) {
        CHECK(tape.value(id).rows() == 1);
        CHECK(tape.value(id).cols() == cfg.d_model);
    }

    // theta_hat == theta at init and identical views: representations match
    CHECK(tape.value(reps.main_v1).raw() == tape.value(reps.aux_v1).raw());
    CHECK(tape.value(reps.main_v2).raw() == tape.value(reps.aux_v2).raw());

    // m = 1 freezes the auxiliary encoder
    dual.momentum = 1.0;
    EncoderModel before = dual.auxiliary;
    Tensor& w = dual.main.params["enc0.h0.wq"];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += 0.5;
    momentum_update(dual);
    for (std::size_t i = 0; i < before.params.size(); ++i) {
        CHECK(dual.auxiliary.params.value(i).raw() == before.params.value(i).raw());
    }
}

TEST_CASE("relation score range, zero head and asymmetry") {
    RoadNetwork net = grid();
    Rng rng(21);
    RelationHead head = RelationHead::init(8, rng);

    ad::Tape tape;
    LiftedHead h = lift(tape, head, false);
    Rng vals(2);
    Tensor a({1, 8}), b({1, 8});
    for (std::size_t i = 0; i < 8; ++i) {
        a[i] = vals.uniform(-2, 2);
        b[i] = vals.uniform(-2, 2);
    }
    ad::ValueId av = tape.constant(a);
    ad::ValueId bv = tape.constant(b);
    const double s_ab = tape.value(relation_score(tape, h, av, bv))[0];
    const double s_ba = tape.value(relation_score(tape, h, bv, av))[0];
    CHECK(s_ab > 0.0);
    CHECK(s_ab < 1.0);
    CHECK(s_ab != s_ba); // concatenation is order-sensitive

    RelationHead zeroed = RelationHead::init(8, rng);
    zero_head(zeroed);
    ad::Tape t2;
    LiftedHead hz = lift(t2, zeroed, false);
    CHECK(t2.value(relation_score(t2, hz, t2.constant(a), t2.constant(b)))[0] == 0.5);

    Tensor wrong({1, 4}, {1, 2, 3, 4});
    CHECK_THROWS_AS(relation_score(tape, h, tape.constant(wrong), bv), std::invalid_argument);
}

TEST_CASE("loss term counts and the uniform-head value") {
    RoadNetwork net = grid();
    EncoderConfig cfg = small_cfg(net);
    Rng rng(31);
    DualEncoderState dual = DualEncoderState::init(cfg, 0.99, rng);
    RelationHead head = RelationHead::init(cfg.d_model, rng);
    zero_head(head); // every score is exactly 0.5

    std::vector<Path> batch = walk_batch(net, 3, 10, 51);
    ViewConfig views{0.4, 0.8};

    ad::Tape tape;
    LiftedEncoder main = lift(tape, dual.main, false);
    LiftedEncoder aux = lift(tape, dual.auxiliary, false);
    LiftedHead h = lift(tape, head, false);

    BatchReps reps;
    Rng vr(7);
    for (const Path& p : batch) {
        auto [v1, v2] = build_views(p, views, vr);
        FourReps four = four_representations(tape, main, aux, net, v1, v2);
        reps.main_v1.push_back(four.main_v1);
        reps.main_v2.push_back(four.main_v2);
        reps.aux_v1.push_back(four.aux_v1);
        reps.aux_v2.push_back(four.aux_v2);
    }

    Rng neg(11);
    LossNodes cn = cross_network_loss_nodes(tape, h, reps, neg);
    LossNodes cv = cross_view_loss_nodes(tape, h, reps, neg);
    CHECK(cn.terms == 12); // 3 paths x 2 views x {pos, neg}
    CHECK(cv.terms == 6);  // 3 paths x {pos, neg}

    // Every BCE term is ln 2; cross-network divides by 2K, cross-view by K.
    CHECK(tape.value(cn.loss)[0] == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(tape.value(cv.loss)[0] == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

    // minibatches of one are rejected
    BatchReps lone;
    lone.main_v1 = {reps.main_v1[0]};
    lone.main_v2 = {reps.main_v2[0]};
    lone.aux_v1 = {reps.aux_v1[0]};
    lone.aux_v2 = {reps.aux_v2[0]};
    CHECK_THROWS_AS(cross_network_loss_nodes(tape, h, lone, neg), std::invalid_argument);
    CHECK_THROWS_AS(cross_view_loss_nodes(tape, h, lone, neg), std::invalid_argument);
}

TEST_CASE("momentum update algebra") {
    RoadNetwork net = grid();
    EncoderConfig cfg = small_cfg(net, 8, 2, 2);
    Rng rng(41);
    DualEncoderState dual = DualEncoderState::init(cfg, 0.99, rng);

    // fixed point: theta_hat == theta stays put (up to one rounding step)
    DualEncoderState fixed = dual;
    momentum_update(fixed);
    for (std::size_t i = 0; i < dual.main.params.size(); ++i) {
        const Tensor& a = fixed.auxiliary.params.value(i);
        const Tensor& b = dual.main.params.value(i);
        for (std::size_t j = 0; j < a.size(); ++j) {
            CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-14));
        }
    }

    // m = 0 copies theta
    DualEncoderState copy = dual;
    Tensor& w = copy.main.params["enc0.h0.wq"];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 3.25;
    copy.momentum = 0.0;
    momentum_update(copy);
    CHECK(copy.auxiliary.params["enc0.h0.wq"].raw() == copy.main.params["enc0.h0.wq"].raw());

    // closed form against the recursion for constant theta
    DualEncoderState cl = dual;
    cl.momentum = 0.99;
    const Tensor theta0_aux = cl.auxiliary.params["embed"];
    Tensor& theta = cl.main.params["embed"];
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = 0.7;
    const int k = 200;
    for (int step = 0; step < k; ++step) momentum_update(cl);
    const double mk = std::pow(0.99, k);
    const Tensor& got = cl.auxiliary.params["embed"];
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double want = mk * theta0_aux[i] + (1.0 - mk) * 0.7;
        CHECK(std::abs(got[i] - want) < 1e-12);
    }
}

TEST_CASE("no gradient reaches the auxiliary encoder") {
    RoadNetwork net = grid();
    EncoderConfig cfg = small_cfg(net);
    Rng rng(51);
    DualEncoderState dual = DualEncoderState::init(cfg, 0.99, rng);
    RelationHead head = RelationHead::init(cfg.d_model, rng);

    std::vector<Path> batch = walk_batch(net, 2, 8, 91);
    ad::Tape tape;
    LiftedEncoder main = lift(tape, dual.main, true);
    LiftedEncoder aux = lift(tape, dual.auxiliary, false);
    LiftedHead h = lift(tape, head, true);

    BatchReps reps;
    Rng vr(3);
    for (const Path& p : batch) {
        auto [v1, v2] = build_views(p, {0.4, 0.8}, vr);
        FourReps four = four_representations(tape, main, aux, net, v1, v2);
        reps.main_v1.push_back(four.main_v1);
        reps.main_v2.push_back(four.main_v2);
        reps.aux_v1.push_back(four.aux_v1);
        reps.aux_v2.push_back(four.aux_v2);
    }
    Rng neg(5);
    LossNodes cn = cross_network_loss_nodes(tape, h, reps, neg);
    LossNodes cv = cross_view_loss_nodes(tape, h, reps, neg);
    tape.backward(tape.add(cn.loss, cv.loss));

    for (std::size_t i = 0; i < dual.auxiliary.params.size(); ++i) {
        const Tensor& g = tape.grad(aux.ids[i]);
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == 0.0);
    }
    // while the main encoder does receive gradient
    double main_norm = 0.0;
    for (std::size_t i = 0; i < dual.main.params.size(); ++i) {
        const Tensor& g = tape.grad(main.ids[i]);
        for (std::size_t j = 0; j < g.size(); ++j) main_norm += std::abs(g[j]);
    }
    CHECK(main_norm > 0.0);
}

TEST_CASE("swapping gamma1 and gamma2 leaves the mean loss unchanged within 2%") {
    RoadNetwork net = grid();
    EncoderConfig cfg = small_cfg(net, 8, 2, 1);
    double mean_a = 0.0, mean_b = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Rng rng(1000 + t);
        DualEncoderState dual = DualEncoderState::init(cfg, 0.99, rng);
        RelationHead head = RelationHead::init(cfg.d_model, rng);
        std::vector<Path> batch = walk_batch(net, 6, 10, 2000 + t);
        Rng ra(3000 + t), rb(3000 + t);
        mean_a += cross_network_loss(dual, head, net, batch, {0.4, 0.8}, ra) +
                  cross_view_loss(dual, head, net, batch, {0.4, 0.8}, ra);
        mean_b += cross_network_loss(dual, head, net, batch, {0.8, 0.4}, rb) +
                  cross_view_loss(dual, head, net, batch, {0.8, 0.4}, rb);
    }
    mean_a /= trials;
    mean_b /= trials;
    CHECK(std::abs(mean_a - mean_b) / mean_a < 0.02);
}

TEST_CASE("pretraining reduces the loss and the auxiliary replays the momentum fold") {
    RoadNetwork net = grid();
    EncoderConfig cfg = small_cfg(net, 16, 2, 2);
    Rng rng(61);
    DualEncoderState dual = DualEncoderState::init(cfg, 0.95, rng);
    RelationHead head = RelationHead::init(cfg.d_model, rng);

    PathDataset ds = generate_synthetic_paths(net, 8, 10, 1, 71);
    PretrainConfig pc;
    pc.views = {0.4, 0.8};
    pc.batch_size = 8;
    pc.epochs = 30;
    pc.warmup_epochs = 3;
    pc.base_lr = 1e-3;
    pc.momentum = 0.95;
    pc.seed = 13;

    // replay: fold the logged main-parameter trajectory through Eq.-14 form
    EncoderModel folded = dual.auxiliary;
    auto observer = [&](std::size_t, const DualEncoderState& state) {
        for (std::size_t i = 0; i < folded.params.size(); ++i) {
            Tensor& acc = folded.params.value(i);
            const Tensor& theta = state.main.params.value(i);
            for (std::size_t j = 0; j < acc.size(); ++j) {
                acc[j] = pc.momentum * acc[j] + (1.0 - pc.momentum) * theta[j];
            }
        }
    };

    PretrainResult result = pretrain(dual, head, net, ds, pc, observer);
    REQUIRE(result.history.size() == 30);
    CHECK(result.history.back().total < result.history.front().total);

    for (std::size_t i = 0; i < folded.params.size(); ++i) {
        const Tensor& a = folded.params.value(i);
        const Tensor& b = dual.auxiliary.params.value(i);
        for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(a[j] - b[j]) < 1e-12);
    }
}

TEST_CASE("pretraining is deterministic given config and seed") {
    RoadNetwork net = grid();
    EncoderConfig cfg = small_cfg(net, 8, 2, 2);
    PathDataset ds = generate_synthetic_paths(net, 4, 8, 1, 5);
    PretrainConfig pc;
    pc.views = {0.4, 0.8};
    pc.batch_size = 4;
    pc.epochs = 3;
    pc.warmup_epochs = 1;
    pc.seed = 99;

    auto run = [&]() {
        Rng rng(3);
        DualEncoderState dual = DualEncoderState::init(cfg, 0.99, rng);
        RelationHead head = RelationHead::init(cfg.d_model, rng);
        pretrain(dual, head, net, ds, pc);
        return dual.main.params["embed"].raw();
    };
    CHECK(run() == run());
}
