#include "lightpath/ssl.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lightpath {

void ViewConfig::validate() const {
    if (gamma1 < 0.0 || gamma1 >= 1.0 || gamma2 < 0.0 || gamma2 >= 1.0) {
        throw std::invalid_argument("reduction ratios must be in [0, 1)");
    }
    if (gamma1 == gamma2) {
        throw std::invalid_argument("view reduction ratios must differ");
    }
}

RelationHead RelationHead::init(std::size_t dim, Rng& rng) {
    RelationHead head;
    head.dim = dim;
    Rng r = rng.fork("relation-head-init");
    auto uniform_init = [&r](Tensor& t, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = r.uniform(-bound, bound);
    };
    Tensor w1({2 * dim, dim});
    uniform_init(w1, 2 * dim);
    head.params.add("w1", std::move(w1));
    head.params.add("b1", Tensor::zeros(1, dim));
    Tensor w2({dim, 1});
    uniform_init(w2, dim);
    head.params.add("w2", std::move(w2));
    head.params.add("b2", Tensor::zeros(1, 1));
    return head;
}

LiftedHead lift(ad::Tape& tape, const RelationHead& head, bool tracked) {
    LiftedHead out;
    out.head = &head;
    out.ids.reserve(head.params.size());
    for (std::size_t i = 0; i < head.params.size(); ++i) {
        out.ids.push_back(tape.leaf(head.params.value(i), tracked));
    }
    return out;
}

ad::ValueId relation_score(ad::Tape& tape, const LiftedHead& head, ad::ValueId a,
                           ad::ValueId b) {
    if (tape.value(a).cols() != head.head->dim || tape.value(b).cols() != head.head->dim) {
        throw std::invalid_argument("relation_score: representation width mismatch");
    }
    ad::ValueId x = tape.concat_cols({a, b});
    ad::ValueId h = tape.relu(tape.add(tape.matmul(x, head.id("w1")), head.id("b1")));
    return tape.sigmoid(tape.add(tape.matmul(h, head.id("w2")), head.id("b2")));
}

DualEncoderState DualEncoderState::init(const EncoderConfig& cfg, double momentum, Rng& rng) {
    if (momentum < 0.0 || momentum > 1.0) {
        throw std::invalid_argument("momentum must be in [0, 1]");
    }
    DualEncoderState dual;
    dual.main = EncoderModel::init(cfg, rng);
    dual.auxiliary = dual.main; // Siamese start: exact copy
    dual.momentum = momentum;
    return dual;
}

void momentum_update(DualEncoderState& dual) {
    const double m = dual.momentum;
    if (dual.main.params.size() != dual.auxiliary.params.size()) {
        throw std::invalid_argument("momentum_update: architectures differ");
    }
    for (std::size_t i = 0; i < dual.main.params.size(); ++i) {
        const Tensor& main = dual.main.params.value(i);
        Tensor& aux = dual.auxiliary.params.value(i);
        if (!main.same_shape(aux)) {
            throw std::invalid_argument("momentum_update: shape mismatch at " +
                                        dual.main.params.name(i));
        }
        for (std::size_t j = 0; j < main.size(); ++j) {
            aux[j] = m * aux[j] + (1.0 - m) * main[j];
        }
    }
}

std::pair<SparsePath, SparsePath> build_views(const Path& path, const ViewConfig& views,
                                              Rng& rng) {
    views.validate();
    SparsePath v1 = sparsify(path, views.gamma1, rng);
    SparsePath v2 = sparsify(path, views.gamma2, rng);
    return {std::move(v1), std::move(v2)};
}

FourReps four_representations(ad::Tape& tape, const LiftedEncoder& main,
                              const LiftedEncoder& aux, const RoadNetwork& network,
                              const SparsePath& view1, const SparsePath& view2) {
    FourReps out;
    out.main_v1 = encode_nodes(tape, main, network, view1).pr;
    out.main_v2 = encode_nodes(tape, main, network, view2).pr;
    out.aux_v1 = encode_nodes(tape, aux, network, view1).pr;
    out.aux_v2 = encode_nodes(tape, aux, network, view2).pr;
    return out;
}

namespace {

std::size_t other_index(std::size_t i, std::size_t k, Rng& rng) {
    std::size_t j = rng.uniform_index(k - 1);
    return j >= i ? j + 1 : j;
}

} // namespace

LossNodes cross_network_loss_nodes(ad::Tape& tape, const LiftedHead& head, const BatchReps& reps,
                                   Rng& rng, bool cross_view_positives) {
    const std::size_t k = reps.size();
    if (k < 2) throw std::invalid_argument("cross-network loss needs a minibatch of >= 2");
    ad::ValueId one = tape.constant_scalar(1.0);
    ad::ValueId zero = tape.constant_scalar(0.0);
    ad::ValueId acc = -1;
    std::size_t terms = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (int view = 0; view < 2; ++view) {
            const auto& main = view == 0 ? reps.main_v1 : reps.main_v2;
            // Equation mode pairs the same view of the auxiliary encoder;
            // the prose variant pairs the opposite view.
            const auto& aux_pos = cross_view_positives ? (view == 0 ? reps.aux_v2 : reps.aux_v1)
                                                       : (view == 0 ? reps.aux_v1 : reps.aux_v2);
            const auto& aux_neg = view == 0 ? reps.aux_v1 : reps.aux_v2;
            ad::ValueId pos = tape.bce(relation_score(tape, head, main[i], aux_pos[i]), one);
            const std::size_t ni = other_index(i, k, rng);
            ad::ValueId neg = tape.bce(relation_score(tape, head, main[i], aux_neg[ni]), zero);
            ad::ValueId pair = tape.add(pos, neg);
            acc = acc < 0 ? pair : tape.add(acc, pair);
            terms += 2;
        }
    }
    ad::ValueId scaled = tape.mul(acc, tape.constant_scalar(1.0 / (2.0 * static_cast<double>(k))));
    return {scaled, terms};
}

LossNodes cross_view_loss_nodes(ad::Tape& tape, const LiftedHead& head, const BatchReps& reps,
                                Rng& rng) {
    const std::size_t k = reps.size();
    if (k < 2) throw std::invalid_argument("cross-view loss needs a minibatch of >= 2");
    ad::ValueId one = tape.constant_scalar(1.0);
    ad::ValueId zero = tape.constant_scalar(0.0);
    ad::ValueId acc = -1;
    std::size_t terms = 0;
    for (std::size_t i = 0; i < k; ++i) {
        ad::ValueId pos = tape.bce(relation_score(tape, head, reps.main_v1[i], reps.main_v2[i]), one);
        const std::size_t ni = other_index(i, k, rng);
        ad::ValueId neg =
            tape.bce(relation_score(tape, head, reps.main_v1[i], reps.main_v2[ni]), zero);
        ad::ValueId pair = tape.add(pos, neg);
        acc = acc < 0 ? pair : tape.add(acc, pair);
        terms += 2;
    }
    ad::ValueId scaled = tape.mul(acc, tape.constant_scalar(1.0 / static_cast<double>(k)));
    return {scaled, terms};
}

namespace {

BatchReps batch_representations(ad::Tape& tape, const LiftedEncoder& main,
                                const LiftedEncoder& aux, const RoadNetwork& network,
                                const std::vector<Path>& minibatch, const ViewConfig& views,
                                Rng& rng) {
    BatchReps reps;
    for (const Path& p : minibatch) {
        auto [v1, v2] = build_views(p, views, rng);
        FourReps four = four_representations(tape, main, aux, network, v1, v2);
        reps.main_v1.push_back(four.main_v1);
        reps.main_v2.push_back(four.main_v2);
        reps.aux_v1.push_back(four.aux_v1);
        reps.aux_v2.push_back(four.aux_v2);
    }
    return reps;
}

} // namespace

double cross_network_loss(const DualEncoderState& dual, const RelationHead& head,
                          const RoadNetwork& network, const std::vector<Path>& minibatch,
                          const ViewConfig& views, Rng& rng) {
    ad::Tape tape;
    LiftedEncoder main = lift(tape, dual.main, false);
    LiftedEncoder aux = lift(tape, dual.auxiliary, false);
    LiftedHead h = lift(tape, head, false);
    BatchReps reps = batch_representations(tape, main, aux, network, minibatch, views, rng);
    return tape.value(cross_network_loss_nodes(tape, h, reps, rng).loss)[0];
}

double cross_view_loss(const DualEncoderState& dual, const RelationHead& head,
                       const RoadNetwork& network, const std::vector<Path>& minibatch,
                       const ViewConfig& views, Rng& rng) {
    ad::Tape tape;
    LiftedEncoder main = lift(tape, dual.main, false);
    LiftedEncoder aux = lift(tape, dual.auxiliary, false);
    LiftedHead h = lift(tape, head, false);
    BatchReps reps = batch_representations(tape, main, aux, network, minibatch, views, rng);
    return tape.value(cross_view_loss_nodes(tape, h, reps, rng).loss)[0];
}

PretrainResult pretrain(DualEncoderState& dual, RelationHead& head, const RoadNetwork& network,
                        const PathDataset& dataset, const PretrainConfig& cfg,
                        const StepObserver& observer) {
    cfg.views.validate();
    if (dataset.empty()) throw std::invalid_argument("pretrain: empty dataset");
    if (cfg.batch_size < 2) throw std::invalid_argument("pretrain: batch size must be >= 2");
    dual.momentum = cfg.momentum;

    Rng root(cfg.seed);
    Rng view_rng = root.fork("views");
    Rng neg_rng = root.fork("negatives");
    Rng shuffle_rng = root.fork("shuffle");

    const std::size_t n = dataset.size();
    const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const std::uint64_t total_steps =
        static_cast<std::uint64_t>(steps_per_epoch) * cfg.epochs;
    const std::uint64_t warmup_steps =
        static_cast<std::uint64_t>(steps_per_epoch) * cfg.warmup_epochs;

    AdamWState enc_state = AdamWState::init(dual.main.params);
    AdamWState head_state = AdamWState::init(head.params);
    AdamWConfig adamw = cfg.adamw;
    adamw.lr = cfg.base_lr;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    PretrainResult result;
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        EpochStats stats;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            std::vector<const Path*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(&dataset.record(order[i]).path);
            }
            if (batch.size() < 2) {
                // fold a lone trailing path into the previous step's stats
                continue;
            }

            ad::Tape tape;
            LiftedEncoder main = lift(tape, dual.main, true);
            LiftedEncoder aux = lift(tape, dual.auxiliary, false);
            LiftedHead h = lift(tape, head, true);

            BatchReps reps;
            ad::ValueId rec_acc = -1;
            for (const Path* p : batch) {
                auto [v1, v2] = build_views(*p, cfg.views, view_rng);
                EncodedNodes e1 = encode_nodes(tape, main, network, v1);
                EncodedNodes e2 = encode_nodes(tape, main, network, v2);
                reps.main_v1.push_back(e1.pr);
                reps.main_v2.push_back(e2.pr);
                reps.aux_v1.push_back(encode_nodes(tape, aux, network, v1).pr);
                reps.aux_v2.push_back(encode_nodes(tape, aux, network, v2).pr);

                // Reconstruction on view 1, the denser view.
                ad::ValueId predicted = decode_reconstruct_nodes(tape, main, e1, p->length());
                ad::ValueId lrec = reconstruction_loss_nodes(
                    tape, main, network, predicted, *p, removed_positions(v1, p->length()),
                    cfg.frozen_recon_targets);
                rec_acc = rec_acc < 0 ? lrec : tape.add(rec_acc, lrec);
            }
            ad::ValueId lrec = tape.mul(
                rec_acc, tape.constant_scalar(1.0 / static_cast<double>(batch.size())));
            LossNodes lcn =
                cross_network_loss_nodes(tape, h, reps, neg_rng, cfg.cross_network_cross_view);
            LossNodes lcv = cross_view_loss_nodes(tape, h, reps, neg_rng);
            ad::ValueId total = tape.add(lrec, tape.add(lcn.loss, lcv.loss));
            tape.backward(total);

            std::vector<Tensor> enc_grads;
            enc_grads.reserve(dual.main.params.size());
            for (std::size_t i = 0; i < dual.main.params.size(); ++i) {
                enc_grads.push_back(tape.grad(main.ids[i]));
            }
            std::vector<Tensor> head_grads;
            head_grads.reserve(head.params.size());
            for (std::size_t i = 0; i < head.params.size(); ++i) {
                head_grads.push_back(tape.grad(h.ids[i]));
            }

            const double lr = cosine_lr(step, warmup_steps, total_steps, cfg.base_lr);
            adamw_step(dual.main.params, enc_grads, enc_state, adamw, lr);
            adamw_step(head.params, head_grads, head_state, adamw, lr);
            momentum_update(dual);

            stats.lrec += tape.value(lrec)[0];
            stats.lcn += tape.value(lcn.loss)[0];
            stats.lcv += tape.value(lcv.loss)[0];
            stats.total += tape.value(total)[0];
            stats.lr = lr;
            ++step;
            ++batches;
            if (observer) observer(step, dual);
        }
        const double denom = static_cast<double>(batches);
        stats.lrec /= denom;
        stats.lcn /= denom;
        stats.lcv /= denom;
        stats.total /= denom;
        result.history.push_back(stats);
    }
    return result;
}

double relation_accuracy(const DualEncoderState& dual, const RelationHead& head,
                         const RoadNetwork& network, const std::vector<Path>& paths,
                         const ViewConfig& views, Rng& rng) {
    if (paths.size() < 2) throw std::invalid_argument("relation_accuracy: need >= 2 paths");
    ad::Tape tape;
    LiftedEncoder main = lift(tape, dual.main, false);
    LiftedEncoder aux = lift(tape, dual.auxiliary, false);
    LiftedHead h = lift(tape, head, false);
    BatchReps reps = batch_representations(tape, main, aux, network, paths, views, rng);
    const std::size_t k = paths.size();
    std::size_t correct = 0, total = 0;
    auto score = [&](ad::ValueId a, ad::ValueId b) {
        return tape.value(relation_score(tape, h, a, b))[0];
    };
    for (std::size_t i = 0; i < k; ++i) {
        for (int view = 0; view < 2; ++view) {
            const auto& main_reps = view == 0 ? reps.main_v1 : reps.main_v2;
            const auto& aux_reps = view == 0 ? reps.aux_v1 : reps.aux_v2;
            correct += score(main_reps[i], aux_reps[i]) > 0.5;
            correct += score(main_reps[i], aux_reps[other_index(i, k, rng)]) < 0.5;
            total += 2;
        }
        correct += score(reps.main_v1[i], reps.main_v2[i]) > 0.5;
        correct += score(reps.main_v1[i], reps.main_v2[other_index(i, k, rng)]) < 0.5;
        total += 2;
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

void write_pretrain_log(const std::string& file, const std::vector<EpochStats>& history) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write log: " + file);
    out << "epoch,lrec,lcn,lcv,total,lr\n";
    char buf[160];
    for (std::size_t i = 0; i < history.size(); ++i) {
        const EpochStats& s = history[i];
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n", i + 1, s.lrec,
                      s.lcn, s.lcv, s.total, s.lr);
        out << buf;
    }
}

} // namespace lightpath
