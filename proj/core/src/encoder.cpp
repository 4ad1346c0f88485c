#include "lightpath/encoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace lightpath {

namespace {

std::string layer_prefix(const char* kind, std::size_t l) {
    return std::string(kind) + std::to_string(l);
}

void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
}

void add_transformer_layer(ParameterSet& params, const EncoderConfig& cfg,
                           const std::string& prefix, Rng& rng) {
    const std::size_t d = cfg.d_model;
    const std::size_t dh = cfg.head_dim();
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        const std::string hp = prefix + ".h" + std::to_string(h);
        for (const char* w : {".wq", ".wk", ".wv"}) {
            Tensor t({d, dh});
            init_uniform(t, d, rng);
            params.add(hp + w, std::move(t));
        }
        for (const char* b : {".bq", ".bk", ".bv"}) {
            params.add(hp + b, Tensor::zeros(1, dh));
        }
    }
    Tensor wo({d, d});
    init_uniform(wo, d, rng);
    params.add(prefix + ".wo", std::move(wo));
    params.add(prefix + ".bo", Tensor::zeros(1, d));

    Tensor w1({d, cfg.d_ff});
    init_uniform(w1, d, rng);
    params.add(prefix + ".ffn.w1", std::move(w1));
    params.add(prefix + ".ffn.b1", Tensor::zeros(1, cfg.d_ff));
    Tensor w2({cfg.d_ff, d});
    init_uniform(w2, cfg.d_ff, rng);
    params.add(prefix + ".ffn.w2", std::move(w2));
    params.add(prefix + ".ffn.b2", Tensor::zeros(1, d));

    params.add(prefix + ".ln1.gain", Tensor::filled(1, d, 1.0));
    params.add(prefix + ".ln1.bias", Tensor::zeros(1, d));
    params.add(prefix + ".ln2.gain", Tensor::filled(1, d, 1.0));
    params.add(prefix + ".ln2.bias", Tensor::zeros(1, d));
}

} // namespace

void EncoderConfig::validate() const {
    if (layers == 0) throw std::invalid_argument("encoder needs at least one layer");
    if (heads == 0 || d_model % heads != 0) {
        throw std::invalid_argument("heads must divide d_model");
    }
    if (decoder_layers >= layers) {
        throw std::invalid_argument("decoder must be shallower than the encoder");
    }
    if (vocab == 0) throw std::invalid_argument("vocab must be positive");
    if (max_len == 0) throw std::invalid_argument("max_len must be positive");
}

EncoderModel EncoderModel::init(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    EncoderModel m;
    m.cfg = cfg;
    Rng init_rng = rng.fork("encoder-init");
    const std::size_t d = cfg.d_model;

    Tensor embed({cfg.vocab, d});
    init_uniform(embed, d, init_rng);
    m.params.add("embed", std::move(embed));

    Tensor pr({1, d});
    init_uniform(pr, d, init_rng);
    m.params.add("pr_token", std::move(pr));

    Tensor pos({cfg.max_len + 1, d});
    init_uniform(pos, d, init_rng);
    m.params.add("pos_table", std::move(pos));

    Tensor mask({1, d});
    init_uniform(mask, d, init_rng);
    m.params.add("mask_token", std::move(mask));

    for (std::size_t l = 0; l < cfg.layers; ++l) {
        add_transformer_layer(m.params, cfg, layer_prefix("enc", l), init_rng);
    }
    for (std::size_t l = 0; l < cfg.decoder_layers; ++l) {
        add_transformer_layer(m.params, cfg, layer_prefix("dec", l), init_rng);
    }

    Tensor wp({d, d});
    init_uniform(wp, d, init_rng);
    m.params.add("out_proj.w", std::move(wp));
    m.params.add("out_proj.b", Tensor::zeros(1, d));
    return m;
}

std::size_t removal_count(std::size_t n, double gamma) {
    if (gamma < 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("reduction ratio must be in [0, 1)");
    }
    return static_cast<std::size_t>(std::floor(gamma * static_cast<double>(n) + 1e-9));
}

SparsePath sparsify(const Path& path, double gamma, Rng& rng) {
    const std::size_t n = path.length();
    if (n < 2) throw std::invalid_argument("sparsify: path must have at least 2 edges");
    const std::size_t r = removal_count(n, gamma);
    std::vector<std::size_t> removed = rng.sample_distinct(n, r);
    return sparsify_remove(path, removed);
}

SparsePath sparsify_remove(const Path& path, const std::vector<std::size_t>& removed_positions) {
    const std::size_t n = path.length();
    std::vector<bool> removed(n, false);
    for (std::size_t p : removed_positions) {
        if (p >= n) throw std::out_of_range("sparsify_remove: position out of range");
        removed[p] = true;
    }
    SparsePath out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!removed[i]) {
            out.edge_ids.push_back(path.edge_ids[i]);
            out.omega.push_back(i + 1); // 1-based order index
        }
    }
    if (out.edge_ids.empty()) {
        throw std::invalid_argument("sparsify_remove: no edges left");
    }
    return out;
}

std::vector<std::size_t> removed_positions(const SparsePath& sparse, std::size_t full_length) {
    std::vector<bool> kept(full_length, false);
    for (std::size_t o : sparse.omega) {
        if (o == 0 || o > full_length) {
            throw std::out_of_range("omega index out of range");
        }
        kept[o - 1] = true;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < full_length; ++i) {
        if (!kept[i]) out.push_back(i);
    }
    return out;
}

LiftedEncoder lift(ad::Tape& tape, const EncoderModel& model, bool tracked) {
    LiftedEncoder enc;
    enc.model = &model;
    enc.tape = &tape;
    enc.ids.reserve(model.params.size());
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        enc.ids.push_back(tape.leaf(model.params.value(i), tracked));
    }
    return enc;
}

ad::ValueId assemble_input(ad::Tape& tape, const LiftedEncoder& enc, const RoadNetwork& network,
                           const SparsePath& sparse) {
    const EncoderConfig& cfg = enc.model->cfg;
    std::vector<std::int32_t> vocab_ids;
    std::vector<std::int32_t> pos_ids;
    vocab_ids.reserve(sparse.length());
    pos_ids.reserve(sparse.length());
    for (std::size_t i = 0; i < sparse.length(); ++i) {
        if (sparse.omega[i] > cfg.max_len) {
            throw std::out_of_range("path position exceeds max_len");
        }
        vocab_ids.push_back(static_cast<std::int32_t>(network.edge_index(sparse.edge_ids[i])));
        pos_ids.push_back(static_cast<std::int32_t>(sparse.omega[i]));
    }
    ad::ValueId pr_row =
        tape.add(enc.id("pr_token"), tape.gather_rows(enc.id("pos_table"), {0}));
    ad::ValueId edge_rows = tape.add(tape.gather_rows(enc.id("embed"), vocab_ids),
                                     tape.gather_rows(enc.id("pos_table"), pos_ids));
    return tape.concat_rows({pr_row, edge_rows});
}

ad::ValueId multi_head_attention(ad::Tape& tape, const LiftedEncoder& enc,
                                 const std::string& prefix, ad::ValueId x) {
    const EncoderConfig& cfg = enc.model->cfg;
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));
    ad::ValueId scale_c = tape.constant_scalar(scale);
    std::vector<ad::ValueId> heads;
    heads.reserve(cfg.heads);
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        const std::string hp = prefix + ".h" + std::to_string(h);
        ad::ValueId q = tape.add(tape.matmul(x, enc.id(hp + ".wq")), enc.id(hp + ".bq"));
        ad::ValueId k = tape.add(tape.matmul(x, enc.id(hp + ".wk")), enc.id(hp + ".bk"));
        ad::ValueId v = tape.add(tape.matmul(x, enc.id(hp + ".wv")), enc.id(hp + ".bv"));
        ad::ValueId scores = tape.mul(tape.matmul(q, tape.transpose(k)), scale_c);
        ad::ValueId attn = tape.softmax(scores, 1);
        heads.push_back(tape.matmul(attn, v));
    }
    ad::ValueId ctx = cfg.heads == 1 ? heads[0] : tape.concat_cols(heads);
    return tape.add(tape.matmul(ctx, enc.id(prefix + ".wo")), enc.id(prefix + ".bo"));
}

ad::ValueId encoder_layer(ad::Tape& tape, const LiftedEncoder& enc, const std::string& prefix,
                          ad::ValueId x) {
    const EncoderConfig& cfg = enc.model->cfg;
    ad::ValueId attended = multi_head_attention(tape, enc, prefix, x);
    ad::ValueId z = tape.layer_norm(tape.add(x, attended), enc.id(prefix + ".ln1.gain"),
                                    enc.id(prefix + ".ln1.bias"), cfg.layer_norm_eps);
    ad::ValueId hidden =
        tape.relu(tape.add(tape.matmul(z, enc.id(prefix + ".ffn.w1")), enc.id(prefix + ".ffn.b1")));
    ad::ValueId ffn =
        tape.add(tape.matmul(hidden, enc.id(prefix + ".ffn.w2")), enc.id(prefix + ".ffn.b2"));
    return tape.layer_norm(tape.add(z, ffn), enc.id(prefix + ".ln2.gain"),
                           enc.id(prefix + ".ln2.bias"), cfg.layer_norm_eps);
}

EncodedNodes encode_nodes(ad::Tape& tape, const LiftedEncoder& enc, const RoadNetwork& network,
                          const SparsePath& sparse) {
    ad::ValueId x = assemble_input(tape, enc, network, sparse);
    for (std::size_t l = 0; l < enc.model->cfg.layers; ++l) {
        x = encoder_layer(tape, enc, layer_prefix("enc", l), x);
    }
    EncodedNodes out;
    out.full = x;
    out.pr = tape.slice_rows(x, 0, 1);
    out.edge_states = tape.slice_rows(x, 1, sparse.length() + 1);
    out.omega = sparse.omega;
    return out;
}

ad::ValueId decode_reconstruct_nodes(ad::Tape& tape, const LiftedEncoder& enc,
                                     const EncodedNodes& encoded, std::size_t full_length) {
    const EncoderConfig& cfg = enc.model->cfg;
    if (full_length > cfg.max_len) {
        throw std::out_of_range("path longer than max_len");
    }
    for (std::size_t o : encoded.omega) {
        if (o > full_length) throw std::out_of_range("omega index exceeds path length");
    }

    // Row source table: encoder output rows first, shared mask token last.
    const std::size_t n_kept = encoded.omega.size();
    ad::ValueId table = tape.concat_rows({encoded.full, enc.id("mask_token")});
    std::vector<std::int32_t> pick(full_length + 1,
                                   static_cast<std::int32_t>(n_kept + 1)); // mask row
    pick[0] = 0;                                                           // PR row
    for (std::size_t k = 0; k < n_kept; ++k) {
        pick[encoded.omega[k]] = static_cast<std::int32_t>(k + 1);
    }
    std::vector<std::int32_t> pos_ids(full_length + 1);
    for (std::size_t i = 0; i <= full_length; ++i) pos_ids[i] = static_cast<std::int32_t>(i);

    ad::ValueId x = tape.add(tape.gather_rows(table, pick),
                             tape.gather_rows(enc.id("pos_table"), pos_ids));
    for (std::size_t l = 0; l < cfg.decoder_layers; ++l) {
        x = encoder_layer(tape, enc, layer_prefix("dec", l), x);
    }
    ad::ValueId edges_only = tape.slice_rows(x, 1, full_length + 1);
    return tape.add(tape.matmul(edges_only, enc.id("out_proj.w")), enc.id("out_proj.b"));
}

ad::ValueId reconstruction_loss_nodes(ad::Tape& tape, const LiftedEncoder& enc,
                                      const RoadNetwork& network, ad::ValueId predicted,
                                      const Path& original,
                                      const std::vector<std::size_t>& removed,
                                      bool frozen_targets) {
    const std::size_t n = original.length();
    if (n == 0) throw std::invalid_argument("reconstruction loss on empty path");
    // Loss positions: the removed set, or every position when nothing was removed.
    std::vector<std::size_t> at = removed;
    if (at.empty()) {
        at.resize(n);
        for (std::size_t i = 0; i < n; ++i) at[i] = i;
    }
    std::vector<std::int32_t> rows;
    std::vector<std::int32_t> vocab_ids;
    rows.reserve(at.size());
    vocab_ids.reserve(at.size());
    for (std::size_t p : at) {
        if (p >= n) throw std::out_of_range("removed position out of range");
        rows.push_back(static_cast<std::int32_t>(p));
        vocab_ids.push_back(static_cast<std::int32_t>(network.edge_index(original.edge_ids[p])));
    }
    ad::ValueId pred_rows = tape.gather_rows(predicted, rows);
    ad::ValueId target;
    if (frozen_targets) {
        const Tensor& embed = enc.model->params["embed"];
        Tensor t({vocab_ids.size(), enc.model->cfg.d_model});
        for (std::size_t i = 0; i < vocab_ids.size(); ++i) {
            const double* src = embed.data() +
                                static_cast<std::size_t>(vocab_ids[i]) * enc.model->cfg.d_model;
            std::copy(src, src + enc.model->cfg.d_model,
                      t.data() + i * enc.model->cfg.d_model);
        }
        target = tape.constant(std::move(t));
    } else {
        target = tape.gather_rows(enc.id("embed"), vocab_ids);
    }
    return tape.mse(pred_rows, target);
}

EncodedPath encode(const EncoderModel& model, const RoadNetwork& network,
                   const SparsePath& sparse) {
    ad::Tape tape;
    LiftedEncoder enc = lift(tape, model, false);
    EncodedNodes nodes = encode_nodes(tape, enc, network, sparse);
    EncodedPath out;
    out.pr = tape.value(nodes.pr);
    out.edge_states = tape.value(nodes.edge_states);
    out.omega = sparse.omega;
    return out;
}

} // namespace lightpath
