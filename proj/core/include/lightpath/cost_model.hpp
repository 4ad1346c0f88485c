#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightpath/encoder.hpp"

namespace lightpath {

// Accounting conventions: one multiply-accumulate is 2 FLOPs; softmax and
// layer norm cost 5 FLOPs per element; bias and residual additions 1 FLOP
// per element. Activation memory counts stored forward tensors at 8 bytes
// per element.
struct CostItem {
    std::string name;
    double params = 0.0;
    double flops = 0.0;
};

struct CostReport {
    double params = 0.0;
    double flops = 0.0;
    double activation_bytes = 0.0;
    std::vector<CostItem> breakdown;

    double component_flops(const std::string& name) const;
    double component_params(const std::string& name) const;
};

// Exact parameter count of EncoderModel under this config; the total equals
// enumerating an instantiated model's ParameterSet.
CostReport count_params(const EncoderConfig& cfg);

// Per-layer parameter increment (the count difference of adding one encoder
// layer): 4(d^2+d) attention + FFN + 4d layer norms.
double params_per_layer(const EncoderConfig& cfg);

// Forward FLOPs of one path of length N sparsified at the given ratio.
// The encoder runs at sequence length N' + 1; the decoder, when included,
// at full length N + 1.
CostReport count_flops(const EncoderConfig& cfg, std::size_t n, double gamma,
                       bool include_decoder = true);

// Activation bytes for one forward pass at the given batch size (decoder
// included). Monotone increasing in N and batch, decreasing in gamma.
double memory_estimate(const EncoderConfig& cfg, std::size_t n, double gamma, std::size_t batch);

struct ScalabilityCell {
    std::size_t n = 0;
    double gamma = 0.0;
    double params = 0.0;
    double gflops = 0.0;         // decoder included
    double gflops_encoder = 0.0; // encoder only
    double mem_gib = 0.0;
};

std::vector<ScalabilityCell> scalability_report(const EncoderConfig& cfg,
                                                std::span<const std::size_t> n_list,
                                                std::span<const double> gamma_list,
                                                std::size_t batch = 1);

// Long-form CSV: one line per (N, gamma) cell, prefixed by convention
// comments. Columns: N,gamma,params,gflops,mem_gib.
void write_scalability_csv(const std::string& file, const std::vector<ScalabilityCell>& cells);

// Grid layout: one row per N, per-gamma GFLOPs and GiB columns.
void write_scalability_grid(const std::string& file, const std::vector<ScalabilityCell>& cells);

nlohmann::json scalability_breakdown_json(const EncoderConfig& cfg,
                                          const std::vector<ScalabilityCell>& cells);

} // namespace lightpath
