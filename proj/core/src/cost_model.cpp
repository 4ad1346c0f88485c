#include "lightpath/cost_model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lightpath {

double CostReport::component_flops(const std::string& name) const {
    for (const CostItem& item : breakdown) {
        if (item.name == name) return item.flops;
    }
    throw std::out_of_range("no cost component named " + name);
}

double CostReport::component_params(const std::string& name) const {
    for (const CostItem& item : breakdown) {
        if (item.name == name) return item.params;
    }
    throw std::out_of_range("no cost component named " + name);
}

double params_per_layer(const EncoderConfig& cfg) {
    const double d = static_cast<double>(cfg.d_model);
    const double dff = static_cast<double>(cfg.d_ff);
    const double attention = 4.0 * (d * d + d);
    const double ffn = d * dff + dff + dff * d + d;
    const double norms = 4.0 * d;
    return attention + ffn + norms;
}

CostReport count_params(const EncoderConfig& cfg) {
    const double d = static_cast<double>(cfg.d_model);
    CostReport report;
    auto item = [&report](const std::string& name, double params) {
        report.breakdown.push_back({name, params, 0.0});
        report.params += params;
    };
    item("embedding", static_cast<double>(cfg.vocab) * d);
    item("pr_token", d);
    item("position_table", static_cast<double>(cfg.max_len + 1) * d);
    item("mask_token", d);
    item("encoder_layers", static_cast<double>(cfg.layers) * params_per_layer(cfg));
    item("decoder_layers", static_cast<double>(cfg.decoder_layers) * params_per_layer(cfg));
    item("output_head", d * d + d);
    return report;
}

namespace {

struct LayerFlops {
    double projections;
    double attention_score;
    double ffn;
    double elementwise;
};

// FLOPs of one transformer layer at sequence length s.
LayerFlops layer_flops(const EncoderConfig& cfg, double s) {
    const double d = static_cast<double>(cfg.d_model);
    const double dff = static_cast<double>(cfg.d_ff);
    const double m = static_cast<double>(cfg.heads);
    LayerFlops f;
    // q/k/v/o projections: 4 matmuls of s*d*d MACs, plus bias adds.
    f.projections = 8.0 * s * d * d + 4.0 * s * d;
    // scores, scaling, softmax and context; every term is proportional to s^2.
    f.attention_score = 4.0 * s * s * d + 6.0 * m * s * s;
    // two linear maps with bias adds.
    f.ffn = 4.0 * s * d * dff + s * dff + s * d;
    // two residual additions and two layer norms at 5 FLOPs per element.
    f.elementwise = 2.0 * s * d + 10.0 * s * d;
    return f;
}

} // namespace

CostReport count_flops(const EncoderConfig& cfg, std::size_t n, double gamma,
                       bool include_decoder) {
    if (n < 2) throw std::invalid_argument("count_flops: path length must be >= 2");
    const double d = static_cast<double>(cfg.d_model);
    const std::size_t n_prime = n - removal_count(n, gamma);
    const double s_enc = static_cast<double>(n_prime + 1);
    const double s_dec = static_cast<double>(n + 1);

    CostReport report;
    auto item = [&report](const std::string& name, double flops) {
        report.breakdown.push_back({name, 0.0, flops});
        report.flops += flops;
    };

    const double l_enc = static_cast<double>(cfg.layers);
    LayerFlops enc = layer_flops(cfg, s_enc);
    item("encoder.assemble", s_enc * d);
    item("encoder.projections", l_enc * enc.projections);
    item("encoder.attention_score", l_enc * enc.attention_score);
    item("encoder.ffn", l_enc * enc.ffn);
    item("encoder.elementwise", l_enc * enc.elementwise);

    if (include_decoder) {
        const double l_dec = static_cast<double>(cfg.decoder_layers);
        LayerFlops dec = layer_flops(cfg, s_dec);
        item("decoder.assemble", s_dec * d);
        item("decoder.projections", l_dec * dec.projections);
        item("decoder.attention_score", l_dec * dec.attention_score);
        item("decoder.ffn", l_dec * dec.ffn);
        item("decoder.elementwise", l_dec * dec.elementwise);
        item("decoder.head", 2.0 * static_cast<double>(n) * d * d +
                                 static_cast<double>(n) * d);
    }
    return report;
}

double memory_estimate(const EncoderConfig& cfg, std::size_t n, double gamma,
                       std::size_t batch) {
    if (batch < 1) throw std::invalid_argument("memory_estimate: batch must be >= 1");
    const double d = static_cast<double>(cfg.d_model);
    const double dff = static_cast<double>(cfg.d_ff);
    const double m = static_cast<double>(cfg.heads);
    const std::size_t n_prime = n - removal_count(n, gamma);

    // Stored forward tensors per layer at sequence length s: q/k/v, head
    // concat, projection output, two residual sums, two norm outputs, FFN
    // hidden and output, plus the per-head score and softmax matrices.
    auto layer_elems = [&](double s) {
        return 9.0 * s * d + s * dff + 2.0 * m * s * s;
    };
    const double s_enc = static_cast<double>(n_prime + 1);
    const double s_dec = static_cast<double>(n + 1);
    double elems = static_cast<double>(cfg.layers) * layer_elems(s_enc) + s_enc * d;
    elems += static_cast<double>(cfg.decoder_layers) * layer_elems(s_dec) + s_dec * d;
    return 8.0 * static_cast<double>(batch) * elems;
}

std::vector<ScalabilityCell> scalability_report(const EncoderConfig& cfg,
                                                std::span<const std::size_t> n_list,
                                                std::span<const double> gamma_list,
                                                std::size_t batch) {
    if (n_list.empty() || gamma_list.empty()) {
        throw std::invalid_argument("scalability_report: empty grid axes");
    }
    const double total_params = count_params(cfg).params;
    std::vector<ScalabilityCell> cells;
    cells.reserve(n_list.size() * gamma_list.size());
    for (std::size_t n : n_list) {
        for (double gamma : gamma_list) {
            ScalabilityCell cell;
            cell.n = n;
            cell.gamma = gamma;
            cell.params = total_params;
            cell.gflops = count_flops(cfg, n, gamma, true).flops / 1e9;
            cell.gflops_encoder = count_flops(cfg, n, gamma, false).flops / 1e9;
            cell.mem_gib = memory_estimate(cfg, n, gamma, batch) / (1024.0 * 1024.0 * 1024.0);
            cells.push_back(cell);
        }
    }
    return cells;
}

namespace {

const char* kConventions =
    "# conventions: 1 MAC = 2 FLOPs; softmax/layer-norm 5 FLOPs per element; "
    "bias/residual adds 1 FLOP per element; activations 8 bytes per stored element\n"
    "# gflops includes the reconstruction decoder at full path length\n";

} // namespace

void write_scalability_csv(const std::string& file, const std::vector<ScalabilityCell>& cells) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write csv: " + file);
    out << kConventions;
    out << "N,gamma,params,gflops,mem_gib\n";
    char buf[200];
    for (const ScalabilityCell& c : cells) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", c.n, c.gamma, c.params,
                      c.gflops, c.mem_gib);
        out << buf;
    }
}

void write_scalability_grid(const std::string& file, const std::vector<ScalabilityCell>& cells) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write csv: " + file);
    std::vector<std::size_t> ns;
    std::vector<double> gammas;
    for (const auto& c : cells) {
        if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
        if (std::find(gammas.begin(), gammas.end(), c.gamma) == gammas.end()) {
            gammas.push_back(c.gamma);
        }
    }
    auto cell_at = [&](std::size_t n, double g) -> const ScalabilityCell& {
        for (const auto& c : cells) {
            if (c.n == n && c.gamma == g) return c;
        }
        throw std::out_of_range("grid cell missing");
    };
    out << kConventions;
    out << "N";
    char buf[120];
    for (double g : gammas) {
        std::snprintf(buf, sizeof(buf), ",gflops@g=%.10g,gmem_gib@g=%.10g", g, g);
        out << buf;
    }
    out << "\n";
    for (std::size_t n : ns) {
        out << n;
        for (double g : gammas) {
            const ScalabilityCell& c = cell_at(n, g);
            std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", c.gflops, c.mem_gib);
            out << buf;
        }
        out << "\n";
    }
}

nlohmann::json scalability_breakdown_json(const EncoderConfig& cfg,
                                          const std::vector<ScalabilityCell>& cells) {
    nlohmann::json j;
    j["config"] = {{"layers", cfg.layers},       {"heads", cfg.heads},
                   {"d_model", cfg.d_model},     {"d_ff", cfg.d_ff},
                   {"decoder_layers", cfg.decoder_layers}, {"vocab", cfg.vocab},
                   {"max_len", cfg.max_len}};
    j["conventions"] = {
        "1 MAC = 2 FLOPs",
        "softmax and layer norm: 5 FLOPs per element",
        "bias and residual adds: 1 FLOP per element",
        "activation memory: 8 bytes per stored forward element",
    };
    j["params"] = nlohmann::json::object();
    for (const CostItem& item : count_params(cfg).breakdown) {
        j["params"][item.name] = item.params;
    }
    j["cells"] = nlohmann::json::array();
    for (const ScalabilityCell& c : cells) {
        nlohmann::json cell;
        cell["N"] = c.n;
        cell["gamma"] = c.gamma;
        cell["gflops"] = c.gflops;
        cell["gflops_encoder_only"] = c.gflops_encoder;
        cell["mem_gib"] = c.mem_gib;
        nlohmann::json items = nlohmann::json::object();
        for (const CostItem& item : count_flops(cfg, c.n, c.gamma, true).breakdown) {
            items[item.name] = item.flops;
        }
        cell["flops_breakdown"] = items;
        j["cells"].push_back(cell);
    }
    return j;
}

} // namespace lightpath
