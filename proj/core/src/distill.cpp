#include "lightpath/distill.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lightpath {

void DistillConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0, 1]");
    if (temperature <= 0.0) throw std::invalid_argument("temperature must be positive");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must be in [0, 1)");
}

namespace {

ad::ValueId soften(ad::Tape& tape, ad::ValueId x, double t, bool softmax_variant) {
    if (t <= 0.0) throw std::invalid_argument("temperature must be positive");
    ad::ValueId scaled = tape.mul(x, tape.constant_scalar(1.0 / t));
    return softmax_variant ? tape.softmax(scaled, 1) : tape.exp(scaled);
}

// Squared L2 discrepancy per row, summed over columns, averaged over rows.
ad::ValueId row_mean_sq_dist(ad::Tape& tape, ad::ValueId a, ad::ValueId b) {
    ad::ValueId diff = tape.sub(a, b);
    ad::ValueId sq = tape.mul(diff, diff);
    const std::size_t rows = tape.value(a).rows();
    // sum over all elements / rows = mean over rows of per-row squared norms
    return tape.mul(tape.sum(sq), tape.constant_scalar(1.0 / static_cast<double>(rows)));
}

} // namespace

ad::ValueId global_kd_loss_nodes(ad::Tape& tape, ad::ValueId teacher_pr, ad::ValueId student_pr,
                                 double t, bool softmax_variant) {
    return row_mean_sq_dist(tape, soften(tape, teacher_pr, t, softmax_variant),
                            soften(tape, student_pr, t, softmax_variant));
}

ad::ValueId local_kd_loss_nodes(ad::Tape& tape, ad::ValueId teacher_states,
                                ad::ValueId student_states, double t, bool softmax_variant) {
    if (tape.value(teacher_states).rows() != tape.value(student_states).rows()) {
        throw std::invalid_argument("local kd loss: edge-state row mismatch");
    }
    return row_mean_sq_dist(tape, soften(tape, teacher_states, t, softmax_variant),
                            soften(tape, student_states, t, softmax_variant));
}

ad::ValueId glkd_loss_nodes(ad::Tape& tape, ad::ValueId teacher_pr, ad::ValueId student_pr,
                            ad::ValueId teacher_states, ad::ValueId student_states,
                            const DistillConfig& cfg) {
    cfg.validate();
    ad::ValueId global =
        global_kd_loss_nodes(tape, teacher_pr, student_pr, cfg.temperature, cfg.softmax_variant);
    ad::ValueId local = local_kd_loss_nodes(tape, teacher_states, student_states,
                                            cfg.temperature, cfg.softmax_variant);
    return tape.add(tape.mul(global, tape.constant_scalar(cfg.alpha)),
                    tape.mul(local, tape.constant_scalar(1.0 - cfg.alpha)));
}

namespace {

struct PairNodes {
    EncodedNodes teacher;
    EncodedNodes student;
};

PairNodes encode_pair(ad::Tape& tape, const LiftedEncoder& teacher, const LiftedEncoder& student,
                      const RoadNetwork& network, const SparsePath& view) {
    return {encode_nodes(tape, teacher, network, view),
            encode_nodes(tape, student, network, view)};
}

} // namespace

double global_kd_loss(const DistillPair& pair, const RoadNetwork& network,
                      const SparsePath& view, double t, bool softmax_variant) {
    ad::Tape tape;
    LiftedEncoder teacher = lift(tape, pair.teacher, false);
    LiftedEncoder student = lift(tape, pair.student, false);
    PairNodes nodes = encode_pair(tape, teacher, student, network, view);
    return tape.value(
        global_kd_loss_nodes(tape, nodes.teacher.pr, nodes.student.pr, t, softmax_variant))[0];
}

double local_kd_loss(const DistillPair& pair, const RoadNetwork& network, const SparsePath& view,
                     double t, bool softmax_variant) {
    ad::Tape tape;
    LiftedEncoder teacher = lift(tape, pair.teacher, false);
    LiftedEncoder student = lift(tape, pair.student, false);
    PairNodes nodes = encode_pair(tape, teacher, student, network, view);
    return tape.value(local_kd_loss_nodes(tape, nodes.teacher.edge_states,
                                          nodes.student.edge_states, t, softmax_variant))[0];
}

double glkd_loss(const DistillPair& pair, const RoadNetwork& network, const SparsePath& view,
                 const DistillConfig& cfg) {
    ad::Tape tape;
    LiftedEncoder teacher = lift(tape, pair.teacher, false);
    LiftedEncoder student = lift(tape, pair.student, false);
    PairNodes nodes = encode_pair(tape, teacher, student, network, view);
    return tape.value(glkd_loss_nodes(tape, nodes.teacher.pr, nodes.student.pr,
                                      nodes.teacher.edge_states, nodes.student.edge_states,
                                      cfg))[0];
}

DistillResult distill(DistillPair& pair, const RoadNetwork& network, const PathDataset& dataset,
                      const DistillConfig& cfg, const DistillHyper& hyper) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("distill: empty dataset");
    if (pair.student.cfg.layers >= pair.teacher.cfg.layers) {
        throw std::invalid_argument("distill: student must have fewer layers than the teacher");
    }
    if (pair.student.cfg.d_model != pair.teacher.cfg.d_model) {
        throw std::invalid_argument("distill: teacher and student must share d_model");
    }

    Rng root(hyper.seed);
    Rng view_rng = root.fork("views");
    Rng shuffle_rng = root.fork("shuffle");

    const std::size_t n = dataset.size();
    const std::size_t steps_per_epoch = (n + hyper.batch_size - 1) / hyper.batch_size;
    const std::uint64_t total_steps =
        static_cast<std::uint64_t>(steps_per_epoch) * hyper.epochs;
    const std::uint64_t warmup_steps =
        static_cast<std::uint64_t>(steps_per_epoch) * hyper.warmup_epochs;

    AdamWState student_state = AdamWState::init(pair.student.params);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    DistillResult result;
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        DistillEpochStats stats;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += hyper.batch_size) {
            const std::size_t end = std::min(n, start + hyper.batch_size);

            ad::Tape tape;
            LiftedEncoder teacher = lift(tape, pair.teacher, false);
            LiftedEncoder student = lift(tape, pair.student, true);

            ad::ValueId global_acc = -1;
            ad::ValueId local_acc = -1;
            for (std::size_t i = start; i < end; ++i) {
                const Path& p = dataset.record(order[i]).path;
                SparsePath view = sparsify(p, cfg.gamma, view_rng);
                PairNodes nodes = encode_pair(tape, teacher, student, network, view);
                ad::ValueId g = global_kd_loss_nodes(tape, nodes.teacher.pr, nodes.student.pr,
                                                     cfg.temperature, cfg.softmax_variant);
                ad::ValueId l =
                    local_kd_loss_nodes(tape, nodes.teacher.edge_states,
                                        nodes.student.edge_states, cfg.temperature,
                                        cfg.softmax_variant);
                global_acc = global_acc < 0 ? g : tape.add(global_acc, g);
                local_acc = local_acc < 0 ? l : tape.add(local_acc, l);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            ad::ValueId global_mean = tape.mul(global_acc, tape.constant_scalar(inv));
            ad::ValueId local_mean = tape.mul(local_acc, tape.constant_scalar(inv));
            ad::ValueId loss =
                tape.add(tape.mul(global_mean, tape.constant_scalar(cfg.alpha)),
                         tape.mul(local_mean, tape.constant_scalar(1.0 - cfg.alpha)));
            tape.backward(loss);

            std::vector<Tensor> grads;
            grads.reserve(pair.student.params.size());
            for (std::size_t i = 0; i < pair.student.params.size(); ++i) {
                grads.push_back(tape.grad(student.ids[i]));
            }
            const double lr = cosine_lr(step, warmup_steps, total_steps, hyper.base_lr);
            AdamWConfig adamw = hyper.adamw;
            adamw.lr = hyper.base_lr;
            adamw_step(pair.student.params, grads, student_state, adamw, lr);

            stats.lglobal += tape.value(global_mean)[0];
            stats.llocal += tape.value(local_mean)[0];
            stats.glkd += tape.value(loss)[0];
            stats.lr = lr;
            ++step;
            ++batches;
        }
        stats.lglobal /= static_cast<double>(batches);
        stats.llocal /= static_cast<double>(batches);
        stats.glkd /= static_cast<double>(batches);
        result.history.push_back(stats);
    }
    return result;
}

void write_distill_log(const std::string& file, const std::vector<DistillEpochStats>& history) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write log: " + file);
    out << "epoch,lglobal,llocal,glkd,lr\n";
    char buf[160];
    for (std::size_t i = 0; i < history.size(); ++i) {
        const DistillEpochStats& s = history[i];
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", i + 1, s.lglobal,
                      s.llocal, s.glkd, s.lr);
        out << buf;
    }
}

} // namespace lightpath
