#include "lightpath/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lightpath {

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("kendall_tau_b: need two sequences of equal length >= 2");
    }
    const std::size_t n = x.size();
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) {
                ++ties_x;
                ++ties_y;
            } else if (dx == 0.0) {
                ++ties_x;
            } else if (dy == 0.0) {
                ++ties_y;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    const double denom = std::sqrt((n0 - static_cast<double>(ties_x)) *
                                   (n0 - static_cast<double>(ties_y)));
    if (denom == 0.0) return 0.0;
    return static_cast<double>(concordant - discordant) / denom;
}

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 && sbb == 0.0) return 1.0;
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman_rho: need two sequences of equal length >= 2");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    return pearson(rx, ry);
}

MetricReport metrics(std::span<const double> y_true, std::span<const double> y_pred,
                     bool with_mape) {
    if (y_true.size() != y_pred.size() || y_true.size() < 2) {
        throw std::invalid_argument("metrics: need two sequences of equal length >= 2");
    }
    const std::size_t n = y_true.size();
    double abs_err = 0.0, abs_true = 0.0, pct = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(y_true[i] - y_pred[i]);
        abs_err += d;
        abs_true += std::abs(y_true[i]);
        if (with_mape) {
            if (y_true[i] == 0.0) {
                throw std::domain_error("metrics: MAPE undefined for zero true value");
            }
            pct += d / std::abs(y_true[i]);
        }
    }
    if (abs_true == 0.0) {
        throw std::domain_error("metrics: MARE undefined for all-zero truth");
    }
    MetricReport r;
    r.mae = abs_err / static_cast<double>(n);
    r.mare = abs_err / abs_true;
    r.mape = with_mape ? 100.0 * pct / static_cast<double>(n)
                       : std::numeric_limits<double>::quiet_NaN();
    r.tau = kendall_tau_b(y_true, y_pred);
    r.rho = spearman_rho(y_true, y_pred);
    return r;
}

} // namespace lightpath
