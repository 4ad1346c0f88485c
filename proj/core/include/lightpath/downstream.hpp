#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lightpath/dataset.hpp"
#include "lightpath/encoder.hpp"
#include "lightpath/metrics.hpp"

namespace lightpath {

struct GbrConfig {
    std::size_t n_trees = 100;
    double learning_rate = 0.1; // shrinkage nu
    std::size_t max_depth = 3;
    std::size_t min_leaf = 1;
};

// Least-squares gradient boosting with axis-aligned regression trees.
// Prediction is the target mean plus nu times the sum of tree outputs.
class GradientBoostedRegressor {
public:
    static GradientBoostedRegressor fit(const std::vector<std::vector<double>>& features,
                                        const std::vector<double>& targets,
                                        const GbrConfig& cfg = {});

    double predict(std::span<const double> x) const;
    std::vector<double> predict_all(const std::vector<std::vector<double>>& features) const;

    // Training MSE after each boosting round; non-increasing by construction.
    const std::vector<double>& training_mse() const { return mse_history_; }
    std::size_t tree_count() const { return trees_.size(); }

private:
    struct TreeNode {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::int32_t left = -1, right = -1;
        double value = 0.0;
    };
    struct Tree {
        std::vector<TreeNode> nodes;
        double eval(std::span<const double> x) const;
    };

    static Tree fit_tree(const std::vector<std::vector<double>>& features,
                         const std::vector<double>& residuals, const GbrConfig& cfg);

    double init_ = 0.0;
    double nu_ = 0.1;
    std::vector<Tree> trees_;
    std::vector<double> mse_history_;
};

// One PR row per path. gamma_eval = 0 encodes the full path and is fully
// deterministic; a positive ratio draws one seeded sparse view per path.
std::vector<std::vector<double>> embed_dataset(const EncoderModel& model,
                                               const RoadNetwork& network,
                                               const PathDataset& dataset, double gamma_eval = 0.0,
                                               std::uint64_t seed = 0);

enum class Task { TravelTime, Ranking };

struct EvalResult {
    MetricReport report;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
};

// Embed every labeled path, fit a GBR on the train split, report metrics on
// the test split. Travel time reports MAE/MARE/MAPE; ranking reports
// MAE/tau/rho (MAPE is skipped since scores may be zero).
EvalResult eval_task(const EncoderModel& model, const RoadNetwork& network,
                     const PathDataset& dataset, Task task, const GbrConfig& gbr,
                     std::uint64_t seed, double gamma_eval = 0.0);

std::string task_name(Task task);

} // namespace lightpath
