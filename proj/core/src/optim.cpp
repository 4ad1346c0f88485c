#include "lightpath/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace lightpath {

std::size_t ParameterSet::add(std::string name, Tensor value) {
    if (index_.count(name)) {
        throw std::invalid_argument("parameter name not unique: " + name);
    }
    const std::size_t i = values_.size();
    index_.emplace(name, i);
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return i;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw std::out_of_range("unknown parameter: " + name);
    }
    return it->second;
}

std::size_t ParameterSet::element_count() const {
    std::size_t n = 0;
    for (const Tensor& t : values_) n += t.size();
    return n;
}

AdamWState AdamWState::init(const ParameterSet& params) {
    AdamWState st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m.emplace_back(params.value(i).shape());
        st.v.emplace_back(params.value(i).shape());
    }
    return st;
}

void adamw_step(ParameterSet& params, const std::vector<Tensor>& grads, AdamWState& state,
                const AdamWConfig& cfg, double lr) {
    if (grads.size() != params.size() || state.m.size() != params.size()) {
        throw std::invalid_argument("adamw_step: parameter/gradient/state size mismatch");
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params.value(i);
        const Tensor& g = grads[i];
        if (!p.same_shape(g)) {
            throw std::invalid_argument("adamw_step: gradient shape mismatch for " +
                                        params.name(i));
        }
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= lr * cfg.weight_decay * p[j];
            p[j] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

double cosine_lr(std::uint64_t step, std::uint64_t warmup_steps, std::uint64_t total_steps,
                 double base_lr) {
    if (warmup_steps >= total_steps) {
        throw std::invalid_argument("cosine_lr: warmup_steps must be < total_steps");
    }
    if (step > total_steps) {
        throw std::out_of_range("cosine_lr: step out of range");
    }
    if (step < warmup_steps) {
        return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    }
    const double progress = static_cast<double>(step - warmup_steps) /
                            static_cast<double>(total_steps - warmup_steps);
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

} // namespace lightpath
