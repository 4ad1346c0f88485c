#include "lightpath/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lightpath {

double GradientBoostedRegressor::Tree::eval(std::span<const double> x) const {
    std::int32_t cur = 0;
    while (!nodes[static_cast<std::size_t>(cur)].leaf) {
        const TreeNode& n = nodes[static_cast<std::size_t>(cur)];
        cur = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(cur)].value;
}

namespace {

double mean_of(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += v[i];
    return s / static_cast<double>(idx.size());
}

struct BestSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse = 0.0;
};

// Exhaustive variance-reduction split over all features.
BestSplit best_split(const std::vector<std::vector<double>>& features,
                     const std::vector<double>& residuals, const std::vector<std::size_t>& idx,
                     std::size_t min_leaf) {
    BestSplit best;
    const std::size_t n = idx.size();
    if (n < 2 * min_leaf) return best;
    const std::size_t dims = features[0].size();

    double total_sum = 0.0, total_sq = 0.0;
    for (std::size_t i : idx) {
        total_sum += residuals[i];
        total_sq += residuals[i] * residuals[i];
    }
    best.sse = total_sq - total_sum * total_sum / static_cast<double>(n);

    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < dims; ++f) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return features[a][f] < features[b][f];
        });
        double left_sum = 0.0, left_sq = 0.0;
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
            const double r = residuals[order[pos]];
            left_sum += r;
            left_sq += r * r;
            if (features[order[pos]][f] == features[order[pos + 1]][f]) continue;
            const std::size_t nl = pos + 1, nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                               (right_sq - right_sum * right_sum / static_cast<double>(nr));
            if (sse < best.sse - 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold =
                    0.5 * (features[order[pos]][f] + features[order[pos + 1]][f]);
                best.sse = sse;
            }
        }
    }
    return best;
}

} // namespace

GradientBoostedRegressor::Tree GradientBoostedRegressor::fit_tree(
    const std::vector<std::vector<double>>& features, const std::vector<double>& residuals,
    const GbrConfig& cfg) {
    Tree tree;
    struct Work {
        std::int32_t node;
        std::vector<std::size_t> idx;
        std::size_t depth;
    };
    std::vector<std::size_t> all(features.size());
    std::iota(all.begin(), all.end(), 0);
    tree.nodes.push_back({});
    std::vector<Work> stack;
    stack.push_back({0, std::move(all), 0});
    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        TreeNode& node = tree.nodes[static_cast<std::size_t>(w.node)];
        node.value = mean_of(residuals, w.idx);
        if (w.depth >= cfg.max_depth) continue;
        BestSplit split = best_split(features, residuals, w.idx, cfg.min_leaf);
        if (!split.found) continue;
        std::vector<std::size_t> left, right;
        for (std::size_t i : w.idx) {
            (features[i][split.feature] <= split.threshold ? left : right).push_back(i);
        }
        if (left.empty() || right.empty()) continue;
        const std::int32_t li = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        const std::int32_t ri = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        TreeNode& parent = tree.nodes[static_cast<std::size_t>(w.node)];
        parent.leaf = false;
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = li;
        parent.right = ri;
        stack.push_back({li, std::move(left), w.depth + 1});
        stack.push_back({ri, std::move(right), w.depth + 1});
    }
    return tree;
}

GradientBoostedRegressor GradientBoostedRegressor::fit(
    const std::vector<std::vector<double>>& features, const std::vector<double>& targets,
    const GbrConfig& cfg) {
    if (features.size() != targets.size() || features.size() < 2) {
        throw std::invalid_argument("gbr: need >= 2 samples with matching targets");
    }
    GradientBoostedRegressor model;
    model.nu_ = cfg.learning_rate;
    model.init_ = std::accumulate(targets.begin(), targets.end(), 0.0) /
                  static_cast<double>(targets.size());

    const std::size_t n = targets.size();
    std::vector<double> current(n, model.init_);
    std::vector<double> residuals(n);
    for (std::size_t round = 0; round < cfg.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) residuals[i] = targets[i] - current[i];
        Tree tree = fit_tree(features, residuals, cfg);
        for (std::size_t i = 0; i < n; ++i) {
            current[i] += model.nu_ * tree.eval(features[i]);
        }
        model.trees_.push_back(std::move(tree));
        double mse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = targets[i] - current[i];
            mse += d * d;
        }
        model.mse_history_.push_back(mse / static_cast<double>(n));
    }
    return model;
}

double GradientBoostedRegressor::predict(std::span<const double> x) const {
    double y = init_;
    for (const Tree& t : trees_) y += nu_ * t.eval(x);
    return y;
}

std::vector<double> GradientBoostedRegressor::predict_all(
    const std::vector<std::vector<double>>& features) const {
    std::vector<double> out;
    out.reserve(features.size());
    for (const auto& x : features) out.push_back(predict(x));
    return out;
}

std::vector<std::vector<double>> embed_dataset(const EncoderModel& model,
                                               const RoadNetwork& network,
                                               const PathDataset& dataset, double gamma_eval,
                                               std::uint64_t seed) {
    std::vector<std::vector<double>> out;
    out.reserve(dataset.size());
    Rng rng = Rng(seed).fork("embed");
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Path& p = dataset.record(i).path;
        SparsePath view = gamma_eval > 0.0 ? sparsify(p, gamma_eval, rng)
                                           : sparsify_remove(p, {});
        EncodedPath enc = encode(model, network, view);
        out.push_back(enc.pr.raw());
    }
    return out;
}

std::string task_name(Task task) {
    return task == Task::TravelTime ? "travel_time" : "ranking";
}

EvalResult eval_task(const EncoderModel& model, const RoadNetwork& network,
                     const PathDataset& dataset, Task task, const GbrConfig& gbr,
                     std::uint64_t seed, double gamma_eval) {
    auto label_of = [&](const PathRecord& rec) {
        return task == Task::TravelTime ? rec.travel_time : rec.rank_score;
    };
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const PathRecord& rec = dataset.record(i);
        if (!label_of(rec)) continue;
        if (rec.split == "train") train_idx.push_back(i);
        if (rec.split == "test") test_idx.push_back(i);
    }
    if (train_idx.size() < 2 || test_idx.size() < 2) {
        throw std::invalid_argument("eval_task: need labeled train and test splits (>= 2 each)");
    }

    const auto features = embed_dataset(model, network, dataset, gamma_eval, seed);

    std::vector<std::vector<double>> train_x, test_x;
    std::vector<double> train_y, test_y;
    for (std::size_t i : train_idx) {
        train_x.push_back(features[i]);
        train_y.push_back(*label_of(dataset.record(i)));
    }
    for (std::size_t i : test_idx) {
        test_x.push_back(features[i]);
        test_y.push_back(*label_of(dataset.record(i)));
    }

    GradientBoostedRegressor reg = GradientBoostedRegressor::fit(train_x, train_y, gbr);
    const std::vector<double> pred = reg.predict_all(test_x);

    EvalResult result;
    result.report = metrics(test_y, pred, task == Task::TravelTime);
    result.train_count = train_x.size();
    result.test_count = test_x.size();
    return result;
}

} // namespace lightpath
