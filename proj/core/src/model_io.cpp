#include "lightpath/model_io.hpp"

#include <stdexcept>

namespace lightpath {

namespace {

// Rebuild a model with the canonical parameter layout, then copy loaded
// values in by name; this validates names and shapes in one pass.
EncoderModel model_from_params(const EncoderConfig& cfg, const ParameterSet& loaded,
                               const std::string& prefix) {
    Rng rng(0);
    EncoderModel model = EncoderModel::init(cfg, rng);
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        const std::string& name = model.params.name(i);
        const Tensor& src = loaded[prefix + name];
        Tensor& dst = model.params.value(i);
        if (!src.same_shape(dst)) {
            throw std::runtime_error("checkpoint parameter shape mismatch: " + name);
        }
        dst = src;
    }
    return model;
}

RelationHead head_from_params(std::size_t dim, const ParameterSet& loaded,
                              const std::string& prefix) {
    Rng rng(0);
    RelationHead head = RelationHead::init(dim, rng);
    for (std::size_t i = 0; i < head.params.size(); ++i) {
        const std::string& name = head.params.name(i);
        const Tensor& src = loaded[prefix + name];
        Tensor& dst = head.params.value(i);
        if (!src.same_shape(dst)) {
            throw std::runtime_error("checkpoint head shape mismatch: " + name);
        }
        dst = src;
    }
    return head;
}

} // namespace

nlohmann::json encoder_config_json(const EncoderConfig& cfg) {
    return {{"layers", cfg.layers},
            {"heads", cfg.heads},
            {"d_model", cfg.d_model},
            {"d_ff", cfg.d_ff},
            {"decoder_layers", cfg.decoder_layers},
            {"vocab", cfg.vocab},
            {"max_len", cfg.max_len},
            {"layer_norm_eps", cfg.layer_norm_eps}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    EncoderConfig cfg;
    cfg.layers = j.at("layers").get<std::size_t>();
    cfg.heads = j.at("heads").get<std::size_t>();
    cfg.d_model = j.at("d_model").get<std::size_t>();
    cfg.d_ff = j.at("d_ff").get<std::size_t>();
    cfg.decoder_layers = j.at("decoder_layers").get<std::size_t>();
    cfg.vocab = j.at("vocab").get<std::size_t>();
    cfg.max_len = j.at("max_len").get<std::size_t>();
    cfg.layer_norm_eps = j.value("layer_norm_eps", 1e-5);
    cfg.validate();
    return cfg;
}

void save_encoder_checkpoint(const std::string& file, const EncoderModel& model,
                             const nlohmann::json& extra) {
    nlohmann::json cfg = extra;
    cfg["kind"] = "encoder";
    cfg["encoder"] = encoder_config_json(model.cfg);
    save_checkpoint(file, cfg, model.params);
}

EncoderModel load_encoder_checkpoint(const std::string& file) {
    Checkpoint ck = load_checkpoint(file);
    const std::string kind = ck.config.value("kind", "");
    if (kind == "encoder") {
        EncoderConfig cfg = encoder_config_from_json(ck.config.at("encoder"));
        return model_from_params(cfg, ck.params, "");
    }
    if (kind == "pretrain") {
        EncoderConfig cfg = encoder_config_from_json(ck.config.at("encoder"));
        return model_from_params(cfg, ck.params, "main.");
    }
    throw std::runtime_error("checkpoint kind '" + kind + "' does not hold an encoder");
}

void save_pretrain_checkpoint(const std::string& file, const DualEncoderState& dual,
                              const RelationHead& head, const nlohmann::json& extra) {
    nlohmann::json cfg = extra;
    cfg["kind"] = "pretrain";
    cfg["encoder"] = encoder_config_json(dual.main.cfg);
    cfg["momentum"] = dual.momentum;
    cfg["head_dim"] = head.dim;

    ParameterSet combined;
    for (std::size_t i = 0; i < dual.main.params.size(); ++i) {
        combined.add("main." + dual.main.params.name(i), dual.main.params.value(i));
    }
    for (std::size_t i = 0; i < dual.auxiliary.params.size(); ++i) {
        combined.add("aux." + dual.auxiliary.params.name(i), dual.auxiliary.params.value(i));
    }
    for (std::size_t i = 0; i < head.params.size(); ++i) {
        combined.add("head." + head.params.name(i), head.params.value(i));
    }
    save_checkpoint(file, cfg, combined);
}

PretrainCheckpoint load_pretrain_checkpoint(const std::string& file) {
    Checkpoint ck = load_checkpoint(file);
    if (ck.config.value("kind", "") != "pretrain") {
        throw std::runtime_error("not a pretrain checkpoint: " + file);
    }
    EncoderConfig cfg = encoder_config_from_json(ck.config.at("encoder"));
    PretrainCheckpoint out;
    out.dual.main = model_from_params(cfg, ck.params, "main.");
    out.dual.auxiliary = model_from_params(cfg, ck.params, "aux.");
    out.dual.momentum = ck.config.at("momentum").get<double>();
    out.head = head_from_params(ck.config.at("head_dim").get<std::size_t>(), ck.params, "head.");
    out.config = std::move(ck.config);
    return out;
}

} // namespace lightpath
