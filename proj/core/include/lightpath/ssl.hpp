#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "lightpath/dataset.hpp"
#include "lightpath/encoder.hpp"

namespace lightpath {

struct ViewConfig {
    double gamma1 = 0.4;
    double gamma2 = 0.8;

    void validate() const;
};

// Two-layer MLP with ReLU and sigmoid output scoring a concatenated pair of
// path representations.
struct RelationHead {
    std::size_t dim = 0; // representation width d
    ParameterSet params;

    static RelationHead init(std::size_t dim, Rng& rng);
};

struct LiftedHead {
    const RelationHead* head = nullptr;
    std::vector<ad::ValueId> ids;

    ad::ValueId id(const std::string& name) const {
        return ids[head->params.index_of(name)];
    }
};

LiftedHead lift(ad::Tape& tape, const RelationHead& head, bool tracked);

// sigmoid(MLP(concat(a, b))), a 1x1 node in (0, 1).
ad::ValueId relation_score(ad::Tape& tape, const LiftedHead& head, ad::ValueId a, ad::ValueId b);

// Main encoder plus a momentum-updated auxiliary twin. The auxiliary is
// initialized as an exact copy and never receives gradients.
struct DualEncoderState {
    EncoderModel main;
    EncoderModel auxiliary;
    double momentum = 0.99;

    static DualEncoderState init(const EncoderConfig& cfg, double momentum, Rng& rng);
};

// theta_hat <- m * theta_hat + (1 - m) * theta, elementwise over every parameter.
void momentum_update(DualEncoderState& dual);

// Two independent sparsify draws at gamma1 and gamma2.
std::pair<SparsePath, SparsePath> build_views(const Path& path, const ViewConfig& views,
                                              Rng& rng);

struct FourReps {
    ad::ValueId main_v1 = -1;
    ad::ValueId main_v2 = -1;
    ad::ValueId aux_v1 = -1;
    ad::ValueId aux_v2 = -1;
};

FourReps four_representations(ad::Tape& tape, const LiftedEncoder& main,
                              const LiftedEncoder& aux, const RoadNetwork& network,
                              const SparsePath& view1, const SparsePath& view2);

struct BatchReps {
    std::vector<ad::ValueId> main_v1, main_v2, aux_v1, aux_v2;

    std::size_t size() const { return main_v1.size(); }
};

struct LossNodes {
    ad::ValueId loss = -1;
    std::size_t terms = 0; // number of BCE terms summed before averaging
};

// Cross-network BCE: per path and view, the same-index main/auxiliary pair
// is a positive and a random other-index pair a negative; the sum is divided
// by 2K. With cross_view_positives the positive pairs the opposite view of
// the auxiliary encoder instead.
LossNodes cross_network_loss_nodes(ad::Tape& tape, const LiftedHead& head, const BatchReps& reps,
                                   Rng& rng, bool cross_view_positives = false);

// Cross-view BCE within the main encoder, divided by K.
LossNodes cross_view_loss_nodes(ad::Tape& tape, const LiftedHead& head, const BatchReps& reps,
                                Rng& rng);

// Value-level wrappers; each builds both views per path with the given rng.
double cross_network_loss(const DualEncoderState& dual, const RelationHead& head,
                          const RoadNetwork& network, const std::vector<Path>& minibatch,
                          const ViewConfig& views, Rng& rng);
double cross_view_loss(const DualEncoderState& dual, const RelationHead& head,
                       const RoadNetwork& network, const std::vector<Path>& minibatch,
                       const ViewConfig& views, Rng& rng);

struct PretrainConfig {
    ViewConfig views;
    std::size_t batch_size = 64;
    std::size_t epochs = 400;
    std::size_t warmup_epochs = 40;
    double base_lr = 1e-3;
    double momentum = 0.99;
    AdamWConfig adamw;
    bool frozen_recon_targets = true;
    bool cross_network_cross_view = false;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double lrec = 0.0;
    double lcn = 0.0;
    double lcv = 0.0;
    double total = 0.0;
    double lr = 0.0;
};

struct PretrainResult {
    std::vector<EpochStats> history;
};

using StepObserver = std::function<void(std::size_t step, const DualEncoderState& dual)>;

// Joint pretraining: per step the total loss L_rec + L_cn + L_cv drives an
// AdamW update of the main encoder and relation head, followed by a momentum
// update of the auxiliary encoder.
PretrainResult pretrain(DualEncoderState& dual, RelationHead& head, const RoadNetwork& network,
                        const PathDataset& dataset, const PretrainConfig& cfg,
                        const StepObserver& observer = {});

// Fraction of correctly classified positive and negative relation pairs
// (threshold 0.5) over the cross-network and cross-view term structure.
double relation_accuracy(const DualEncoderState& dual, const RelationHead& head,
                         const RoadNetwork& network, const std::vector<Path>& paths,
                         const ViewConfig& views, Rng& rng);

void write_pretrain_log(const std::string& file, const std::vector<EpochStats>& history);

} // namespace lightpath
