#pragma once

#include <cstdint>
#include <vector>

#include "lightpath/dataset.hpp"
#include "lightpath/encoder.hpp"

namespace lightpath {

struct DistillConfig {
    double alpha = 0.6;  // balance between global and local terms
    double temperature = 9.0;
    double gamma = 0.5;  // reduction ratio of the shared sparse view
    bool softmax_variant = false; // normalize instead of raw exponential

    void validate() const;
};

// Frozen teacher and trainable student. Both share d_model so PR and
// edge-state spaces subtract elementwise.
struct DistillPair {
    EncoderModel teacher;
    EncoderModel student;
};

// || sp(PR_teacher / t) - sp(PR_student / t) ||^2 with sp = elementwise exp
// (or a softmax when the variant flag is set).
ad::ValueId global_kd_loss_nodes(ad::Tape& tape, ad::ValueId teacher_pr, ad::ValueId student_pr,
                                 double t, bool softmax_variant = false);

// Mean over kept-edge states of the same squared discrepancy.
ad::ValueId local_kd_loss_nodes(ad::Tape& tape, ad::ValueId teacher_states,
                                ad::ValueId student_states, double t,
                                bool softmax_variant = false);

ad::ValueId glkd_loss_nodes(ad::Tape& tape, ad::ValueId teacher_pr, ad::ValueId student_pr,
                            ad::ValueId teacher_states, ad::ValueId student_states,
                            const DistillConfig& cfg);

// Value-level losses on a shared sparse view.
double global_kd_loss(const DistillPair& pair, const RoadNetwork& network,
                      const SparsePath& view, double t, bool softmax_variant = false);
double local_kd_loss(const DistillPair& pair, const RoadNetwork& network,
                     const SparsePath& view, double t, bool softmax_variant = false);
double glkd_loss(const DistillPair& pair, const RoadNetwork& network, const SparsePath& view,
                 const DistillConfig& cfg);

struct DistillHyper {
    std::size_t batch_size = 64;
    std::size_t epochs = 400;
    std::size_t warmup_epochs = 40;
    double base_lr = 1e-3;
    AdamWConfig adamw;
    std::uint64_t seed = 0;
};

struct DistillEpochStats {
    double lglobal = 0.0;
    double llocal = 0.0;
    double glkd = 0.0;
    double lr = 0.0;
};

struct DistillResult {
    std::vector<DistillEpochStats> history;
};

// AdamW on the student only; the teacher is read-only throughout. Every
// step both encoders consume the same sparse view.
DistillResult distill(DistillPair& pair, const RoadNetwork& network, const PathDataset& dataset,
                      const DistillConfig& cfg, const DistillHyper& hyper);

void write_distill_log(const std::string& file, const std::vector<DistillEpochStats>& history);

} // namespace lightpath
