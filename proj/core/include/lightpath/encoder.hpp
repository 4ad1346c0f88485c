#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lightpath/autodiff.hpp"
#include "lightpath/optim.hpp"
#include "lightpath/rng.hpp"
#include "lightpath/road_network.hpp"

namespace lightpath {

struct EncoderConfig {
    std::size_t layers = 4;        // encoder depth L
    std::size_t heads = 8;         // attention heads M
    std::size_t d_model = 128;     // model width; also the PR and edge width
    std::size_t d_ff = 256;        // FFN hidden width
    std::size_t decoder_layers = 1;
    std::size_t vocab = 0;         // edge count
    std::size_t max_len = 256;     // maximum path length (position 0 is the PR slot)
    double layer_norm_eps = 1e-5;

    std::size_t head_dim() const { return d_model / heads; }
    void validate() const;
};

// Sparse path auto-encoder: edge embedding table, PR token, learnable
// positions, L transformer layers, a shallow reconstruction decoder with a
// shared mask token, and an output projection back to edge space.
struct EncoderModel {
    EncoderConfig cfg;
    ParameterSet params;

    static EncoderModel init(const EncoderConfig& cfg, Rng& rng);
};

// Number of edges removed by the sparsity operation: floor(gamma * n),
// evaluated with a small epsilon so exact products are not lost to rounding.
std::size_t removal_count(std::size_t n, double gamma);

// Removes floor(gamma*N) uniformly chosen edges, preserving order.
SparsePath sparsify(const Path& path, double gamma, Rng& rng);

// Deterministic variant removing exactly the given 0-based positions.
SparsePath sparsify_remove(const Path& path, const std::vector<std::size_t>& removed_positions);

// 0-based positions of the parent path absent from the sparse path.
std::vector<std::size_t> removed_positions(const SparsePath& sparse, std::size_t full_length);

// Model parameters lifted onto a tape. Auxiliary/teacher encoders are
// lifted untracked so no gradient ever reaches them.
struct LiftedEncoder {
    const EncoderModel* model = nullptr;
    ad::Tape* tape = nullptr;
    std::vector<ad::ValueId> ids;

    ad::ValueId id(const std::string& name) const {
        return ids[model->params.index_of(name)];
    }
};

LiftedEncoder lift(ad::Tape& tape, const EncoderModel& model, bool tracked);

// Input assembly: row 0 is the PR token plus position 0; row k is the
// embedding of the k-th kept edge plus the position embedding at omega[k].
ad::ValueId assemble_input(ad::Tape& tape, const LiftedEncoder& enc, const RoadNetwork& network,
                           const SparsePath& sparse);

// One multi-head attention sub-layer under the given parameter prefix
// ("enc3" or "dec0").
ad::ValueId multi_head_attention(ad::Tape& tape, const LiftedEncoder& enc,
                                 const std::string& prefix, ad::ValueId x);

// Full transformer layer: LayerNorm(x + MHA(x)) then LayerNorm(z + FFN(z)).
ad::ValueId encoder_layer(ad::Tape& tape, const LiftedEncoder& enc, const std::string& prefix,
                          ad::ValueId x);

struct EncodedNodes {
    ad::ValueId full = -1;        // (N'+1) x d_model
    ad::ValueId pr = -1;          // 1 x d_model
    ad::ValueId edge_states = -1; // N' x d_model
    std::vector<std::size_t> omega;
};

EncodedNodes encode_nodes(ad::Tape& tape, const LiftedEncoder& enc, const RoadNetwork& network,
                          const SparsePath& sparse);

// Rebuilds the full N+1 sequence (mask token at removed positions), adds
// position embeddings everywhere, runs the decoder stack and projects rows
// 1..N to edge-representation space. Returns an N x d_model prediction.
ad::ValueId decode_reconstruct_nodes(ad::Tape& tape, const LiftedEncoder& enc,
                                     const EncodedNodes& encoded, std::size_t full_length);

// MSE between predicted and original edge embeddings over the removed
// positions; over all positions when nothing was removed. With
// frozen_targets the embedding table is read as a constant so no gradient
// flows through the reconstruction targets.
ad::ValueId reconstruction_loss_nodes(ad::Tape& tape, const LiftedEncoder& enc,
                                      const RoadNetwork& network, ad::ValueId predicted,
                                      const Path& original,
                                      const std::vector<std::size_t>& removed,
                                      bool frozen_targets = true);

// Value-level encode for inference paths (no gradients retained).
struct EncodedPath {
    Tensor pr;
    Tensor edge_states;
    std::vector<std::size_t> omega;
};

EncodedPath encode(const EncoderModel& model, const RoadNetwork& network,
                   const SparsePath& sparse);

} // namespace lightpath
