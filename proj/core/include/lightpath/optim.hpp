#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lightpath/tensor.hpp"

namespace lightpath {

// Named parameter tensors with a stable iteration order (registration order).
// The order is what checkpoints and optimizer state are keyed on.
class ParameterSet {
public:
    std::size_t add(std::string name, Tensor value);

    std::size_t size() const { return values_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    Tensor& value(std::size_t i) { return values_[i]; }
    const Tensor& value(std::size_t i) const { return values_[i]; }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    std::size_t index_of(const std::string& name) const;
    Tensor& operator[](const std::string& name) { return values_[index_of(name)]; }
    const Tensor& operator[](const std::string& name) const { return values_[index_of(name)]; }

    std::size_t element_count() const;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double weight_decay = 0.01;
    double eps = 1e-8;
};

// First/second moment estimates per parameter, aligned with ParameterSet order.
struct AdamWState {
    std::uint64_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static AdamWState init(const ParameterSet& params);
};

// One decoupled-weight-decay Adam update. `grads` is aligned with the
// parameter order; `lr` is the schedule value for this step.
void adamw_step(ParameterSet& params, const std::vector<Tensor>& grads, AdamWState& state,
                const AdamWConfig& cfg, double lr);

// Linear warmup from 0 to base_lr over warmup_steps, then cosine decay to 0
// at total_steps. Requires 0 <= step <= total_steps and warmup_steps < total_steps.
double cosine_lr(std::uint64_t step, std::uint64_t warmup_steps, std::uint64_t total_steps,
                 double base_lr);

} // namespace lightpath
