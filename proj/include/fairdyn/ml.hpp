#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairdyn/centrality.hpp"
#include "fairdyn/core.hpp"

namespace fairdyn::ml {

/// Dense row-major feature matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix select_rows(std::span<const std::size_t> idx) const;
  Matrix select_cols(std::span<const std::size_t> idx) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Labels = std::vector<int>;

std::vector<int> select(std::span<const int> y, std::span<const std::size_t> idx);

// ---------------------------------------------------------------------------
// Parameters

enum class Criterion : std::uint8_t { Gini, Entropy, LogLoss };
enum class Splitter : std::uint8_t { Best, Random };
enum class MaxFeatures : std::uint8_t { Sqrt, Log2, All };
enum class ModelFamily : std::uint8_t { DecisionTree, RandomForest, StratifiedRF };

std::string_view to_string(Criterion c) noexcept;
std::string_view to_string(Splitter s) noexcept;
std::string_view to_string(MaxFeatures m) noexcept;
std::string_view to_string(ModelFamily f) noexcept;
std::optional<Criterion> parse_criterion(std::string_view s) noexcept;
std::optional<Splitter> parse_splitter(std::string_view s) noexcept;
std::optional<MaxFeatures> parse_max_features(std::string_view s) noexcept;
std::optional<ModelFamily> parse_model_family(std::string_view s) noexcept;

/// Number of candidate features examined per node for a given width.
std::size_t feature_budget(MaxFeatures m, std::size_t width) noexcept;

struct TreeParams {
  Criterion criterion = Criterion::Gini;
  Splitter splitter = Splitter::Best;
  std::optional<int> max_depth;  // nullopt = unlimited
  MaxFeatures max_features = MaxFeatures::All;
  int min_samples_leaf = 1;
  int min_samples_split = 2;

  void validate() const;
  nlohmann::json to_json() const;
  static TreeParams from_json(const nlohmann::json& obj);
};

inline TreeParams forest_tree_defaults() {
  TreeParams t;
  t.max_features = MaxFeatures::Sqrt;
  return t;
}

struct ForestParams {
  int n_estimators = 100;
  TreeParams tree = forest_tree_defaults();
  bool bootstrap = true;
  bool stratified_bootstrap = false;

  void validate() const;
  nlohmann::json to_json() const;
  static ForestParams from_json(const nlohmann::json& obj);
};

/// One point of a hyperparameter grid. `forest` is ignored for trees.
struct ModelConfig {
  ModelFamily family = ModelFamily::DecisionTree;
  TreeParams tree;
  ForestParams forest;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& obj);
};

// ---------------------------------------------------------------------------
// Trees

/// gini = 1 - sum p^2, entropy in bits, log_loss in nats. Throws
/// ValidationError when all counts are zero.
double impurity(std::span<const double> class_counts, Criterion criterion);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<double, 2> counts{};
  int prediction = 0;
};

class DecisionTree {
 public:
  /// CART growth on the rows listed in `sample` (repeats allowed). Rows go
  /// left when x[feature] <= threshold.
  static DecisionTree fit(const Matrix& X, std::span<const int> y, std::span<const std::size_t> sample,
                          const TreeParams& params, std::uint64_t seed);

  int predict(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& X) const;

  /// Total impurity decrease per feature, normalized to sum 1 (all zero for a
  /// single-leaf tree).
  const std::vector<double>& importances() const noexcept { return importances_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& obj, std::size_t width);

 private:
  std::vector<TreeNode> nodes_;
  std::vector<double> importances_;
};

/// Bootstrap draw of size n. The stratified variant resamples each class
/// separately with its own count, so class proportions are preserved exactly.
std::vector<std::size_t> bootstrap_sample(std::span<const int> y, bool stratified, std::uint64_t seed);

struct TrainedModel {
  ModelFamily kind = ModelFamily::DecisionTree;
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;
  std::vector<std::string> feature_manifest;
  std::vector<double> importances;  // aligned with feature_manifest
  bool constant_target = false;

  /// Majority vote over trees; ties predict 0.
  int predict(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& X) const;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& doc);
};

TrainedModel fit_tree(const Matrix& X, std::span<const int> y, const TreeParams& params, std::uint64_t seed,
                      std::vector<std::string> feature_names = {});

TrainedModel fit_forest(const Matrix& X, std::span<const int> y, const ForestParams& params, std::uint64_t seed,
                        std::vector<std::string> feature_names = {}, ModelFamily kind = ModelFamily::RandomForest,
                        Execution ex = Execution::Parallel);

/// Dispatches on config.family. StratifiedRF turns on stratified bootstrap
/// whenever bootstrap is on.
TrainedModel fit_model(const Matrix& X, std::span<const int> y, const ModelConfig& config, std::uint64_t seed,
                       std::vector<std::string> feature_names = {}, Execution ex = Execution::Parallel);

// ---------------------------------------------------------------------------
// Evaluation

/// F1 of the positive class (1). 0 when precision + recall is 0.
double f1(std::span<const int> y_true, std::span<const int> y_pred);

struct CVConfig {
  int folds = 10;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class shuffled split with round(n_c * test_fraction) test rows per
/// class. Both sets are returned in ascending index order.
Split stratified_split(std::span<const int> y, double test_fraction, std::uint64_t seed);

/// Fold index per row. Each class is shuffled and dealt round-robin, with
/// every class starting where the previous one stopped, so fold sizes and
/// fold class counts differ by at most one.
std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed);

struct CVResult {
  double mean_f1 = 0.0;
  std::vector<double> fold_f1;
};

/// Trains on the other folds and predicts the held-out fold.
using FitPredictFn = std::function<std::vector<int>(const Matrix& X_train, std::span<const int> y_train,
                                                    const Matrix& X_test, std::uint64_t fold_seed)>;

CVResult cross_validate(const Matrix& X, std::span<const int> y, const FitPredictFn& fit_predict,
                        const CVConfig& config);
CVResult cross_validate(const Matrix& X, std::span<const int> y, const ModelConfig& model, const CVConfig& config,
                        Execution ex = Execution::Serial);

// ---------------------------------------------------------------------------
// Model selection

using GridSpec = std::vector<ModelConfig>;

/// Cartesian grids. Forest: n_estimators 50..400 step 50, max_features
/// {sqrt, log2}, max_depth 2..8, min_samples_split 4..8, min_samples_leaf
/// 2..4, bootstrap {true, false}, criterion {gini, entropy}. Tree: criterion
/// {gini, entropy, log_loss}, splitter {best, random}, max_depth {1, 25, 50},
/// max_features {sqrt, log2, all}, min_samples_leaf {1, 5, 10}.
GridSpec default_grid(ModelFamily family);

/// Cartesian product of option lists given as JSON, e.g.
/// {"n_estimators": [50, 100], "max_depth": [2, 3], ...}. Unlisted keys take
/// the family defaults.
GridSpec grid_from_json(ModelFamily family, const nlohmann::json& options);

struct GridRow {
  ModelConfig config;
  CVResult cv;
};

struct GridResult {
  std::size_t best = 0;
  std::vector<GridRow> rows;
  const GridRow& best_row() const { return rows.at(best); }
};

/// Evaluates every config with stratified CV; the highest mean F1 wins,
/// ties going to the earliest config.
GridResult grid_search(const Matrix& X, std::span<const int> y, const GridSpec& grid, const CVConfig& config,
                       Execution ex = Execution::Parallel);

struct SubsetCandidate {
  std::size_t k;
  bool all;
  CVResult cv;
};

struct SubsetResult {
  std::vector<std::size_t> ranking;  // feature indices by descending importance
  std::vector<SubsetCandidate> candidates;
  std::size_t best = 0;
  std::vector<std::size_t> features;  // selected columns, ascending
  double f1 = 0.0;
};

/// Subset sizes evaluated for a feature width: {15, 20, 30} below the width,
/// plus the full set.
std::vector<std::size_t> subset_sizes(std::size_t width);

/// Fits on all columns, ranks by importance (ties by name), cross-validates
/// the top-k subsets and returns the best (ties to the smaller k).
SubsetResult iterative_subset_selection(const Matrix& X, std::span<const int> y,
                                        std::span<const std::string> feature_names, const ModelConfig& tuned,
                                        const CVConfig& config, Execution ex = Execution::Parallel);

}  // namespace fairdyn::ml
