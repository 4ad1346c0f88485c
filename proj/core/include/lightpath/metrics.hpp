#pragma once

#include <span>
#include <vector>

namespace lightpath {

struct MetricReport {
    double mae = 0.0;  // mean absolute error, target units
    double mare = 0.0; // sum |err| / sum |truth|
    double mape = 0.0; // percent; NaN when not requested
    double tau = 0.0;  // Kendall tau-b
    double rho = 0.0;  // Spearman rho with average ranks for ties
};

// 1-based average (fractional) ranks.
std::vector<double> average_ranks(std::span<const double> v);

double kendall_tau_b(std::span<const double> x, std::span<const double> y);
double spearman_rho(std::span<const double> x, std::span<const double> y);

// All five metrics; with_mape=false skips MAPE (reported as NaN), which is
// how ranking tasks avoid division by zero-valued scores.
MetricReport metrics(std::span<const double> y_true, std::span<const double> y_pred,
                     bool with_mape = true);

} // namespace lightpath
