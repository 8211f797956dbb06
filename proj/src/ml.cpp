#include "fairdyn/ml.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fairdyn/rng.hpp"

namespace fairdyn::ml {

using nlohmann::json;

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(idx[r] * cols_), cols_,
                out.data_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
  }
  return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> idx) const {
  Matrix out(rows_, idx.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = (*this)(r, idx[c]);
  }
  return out;
}

std::vector<int> select(std::span<const int> y, std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}

// ---------------------------------------------------------------------------
// Names

std::string_view to_string(Criterion c) noexcept {
  switch (c) {
    case Criterion::Gini: return "gini";
    case Criterion::Entropy: return "entropy";
    case Criterion::LogLoss: return "log_loss";
  }
  return "?";
}

std::string_view to_string(Splitter s) noexcept { return s == Splitter::Best ? "best" : "random"; }

std::string_view to_string(MaxFeatures m) noexcept {
  switch (m) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    case MaxFeatures::All: return "all";
  }
  return "?";
}

std::string_view to_string(ModelFamily f) noexcept {
  switch (f) {
    case ModelFamily::DecisionTree: return "DecisionTree";
    case ModelFamily::RandomForest: return "RandomForest";
    case ModelFamily::StratifiedRF: return "StratifiedRF";
  }
  return "?";
}

std::optional<Criterion> parse_criterion(std::string_view s) noexcept {
  if (s == "gini") return Criterion::Gini;
  if (s == "entropy") return Criterion::Entropy;
  if (s == "log_loss") return Criterion::LogLoss;
  return std::nullopt;
}

std::optional<Splitter> parse_splitter(std::string_view s) noexcept {
  if (s == "best") return Splitter::Best;
  if (s == "random") return Splitter::Random;
  return std::nullopt;
}

std::optional<MaxFeatures> parse_max_features(std::string_view s) noexcept {
  if (s == "sqrt") return MaxFeatures::Sqrt;
  if (s == "log2") return MaxFeatures::Log2;
  if (s == "all" || s == "none") return MaxFeatures::All;
  return std::nullopt;
}

std::optional<ModelFamily> parse_model_family(std::string_view s) noexcept {
  if (s == "DecisionTree" || s == "decision_tree" || s == "dt") return ModelFamily::DecisionTree;
  if (s == "RandomForest" || s == "random_forest" || s == "rf") return ModelFamily::RandomForest;
  if (s == "StratifiedRF" || s == "stratified_rf" || s == "srf") return ModelFamily::StratifiedRF;
  return std::nullopt;
}

std::size_t feature_budget(MaxFeatures m, std::size_t width) noexcept {
  if (width == 0) return 0;
  const double w = static_cast<double>(width);
  switch (m) {
    case MaxFeatures::Sqrt: return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(w)));
    case MaxFeatures::Log2: return std::max<std::size_t>(1, static_cast<std::size_t>(std::log2(w)));
    case MaxFeatures::All: return width;
  }
  return width;
}

namespace {

template <typename T, typename Parse>
T parse_or_throw(const json& obj, const char* key, T fallback, Parse parse) {
  if (!obj.contains(key)) return fallback;
  const auto text = obj[key].get<std::string>();
  auto v = parse(text);
  if (!v) throw ValidationError(std::string("invalid ") + key + " \"" + text + "\"");
  return *v;
}

}  // namespace

void TreeParams::validate() const {
  if (max_depth && *max_depth < 1) throw ValidationError("max_depth must be positive");
  if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be at least 1");
  if (min_samples_split < 2) throw ValidationError("min_samples_split must be at least 2");
}

json TreeParams::to_json() const {
  return {{"criterion", std::string(to_string(criterion))},
          {"splitter", std::string(to_string(splitter))},
          {"max_depth", max_depth ? json(*max_depth) : json(nullptr)},
          {"max_features", std::string(to_string(max_features))},
          {"min_samples_leaf", min_samples_leaf},
          {"min_samples_split", min_samples_split}};
}

TreeParams TreeParams::from_json(const json& obj) {
  TreeParams p;
  p.criterion = parse_or_throw(obj, "criterion", p.criterion, parse_criterion);
  p.splitter = parse_or_throw(obj, "splitter", p.splitter, parse_splitter);
  if (obj.contains("max_depth") && !obj["max_depth"].is_null()) p.max_depth = obj["max_depth"].get<int>();
  p.max_features = parse_or_throw(obj, "max_features", p.max_features, parse_max_features);
  p.min_samples_leaf = obj.value("min_samples_leaf", p.min_samples_leaf);
  p.min_samples_split = obj.value("min_samples_split", p.min_samples_split);
  p.validate();
  return p;
}

void ForestParams::validate() const {
  tree.validate();
  if (n_estimators < 1) throw ValidationError("n_estimators must be positive");
  if (stratified_bootstrap && !bootstrap) throw ValidationError("stratified_bootstrap requires bootstrap");
}

json ForestParams::to_json() const {
  return {{"n_estimators", n_estimators},
          {"tree", tree.to_json()},
          {"bootstrap", bootstrap},
          {"stratified_bootstrap", stratified_bootstrap}};
}

ForestParams ForestParams::from_json(const json& obj) {
  ForestParams p;
  p.n_estimators = obj.value("n_estimators", p.n_estimators);
  if (obj.contains("tree")) p.tree = TreeParams::from_json(obj["tree"]);
  p.bootstrap = obj.value("bootstrap", p.bootstrap);
  p.stratified_bootstrap = obj.value("stratified_bootstrap", p.stratified_bootstrap);
  p.validate();
  return p;
}

json ModelConfig::to_json() const {
  json j = {{"family", std::string(to_string(family))}};
  if (family == ModelFamily::DecisionTree) {
    j["tree"] = tree.to_json();
  } else {
    j["forest"] = forest.to_json();
  }
  return j;
}

ModelConfig ModelConfig::from_json(const json& obj) {
  ModelConfig c;
  c.family = parse_or_throw(obj, "family", c.family, parse_model_family);
  if (obj.contains("tree")) c.tree = TreeParams::from_json(obj["tree"]);
  if (obj.contains("forest")) c.forest = ForestParams::from_json(obj["forest"]);
  return c;
}

// ---------------------------------------------------------------------------
// Impurity

double impurity(std::span<const double> counts, Criterion criterion) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw ValidationError("class counts must be non-negative");
    total += c;
  }
  if (total <= 0.0) throw ValidationError("impurity of an empty node");
  double acc = 0.0;
  for (double c : counts) {
    const double p = c / total;
    if (criterion == Criterion::Gini) {
      acc += p * p;
    } else if (p > 0.0) {
      acc -= p * (criterion == Criterion::Entropy ? std::log2(p) : std::log(p));
    }
  }
  return criterion == Criterion::Gini ? 1.0 - acc : acc;
}

// ---------------------------------------------------------------------------
// Tree growth

namespace {

constexpr double kTieEpsilon = 1e-12;

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const int> y, const TreeParams& params, std::uint64_t seed,
              std::size_t sample_size)
      : X_(X),
        y_(y),
        params_(params),
        rng_(seed),
        budget_(feature_budget(params.max_features, X.cols())),
        importances_(X.cols(), 0.0),
        total_(static_cast<double>(sample_size)) {}

  int build(std::vector<std::size_t>& idx, int depth) {
    std::array<double, 2> counts{};
    for (std::size_t i : idx) counts[static_cast<std::size_t>(y_[i])] += 1.0;
    const int node = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_[static_cast<std::size_t>(node)].counts = counts;
    nodes_[static_cast<std::size_t>(node)].prediction = counts[1] > counts[0] ? 1 : 0;

    const double node_impurity = impurity(counts, params_.criterion);
    const bool depth_ok = !params_.max_depth || depth < *params_.max_depth;
    if (!depth_ok || node_impurity <= 0.0 || idx.size() < static_cast<std::size_t>(params_.min_samples_split) ||
        idx.size() < 2 * static_cast<std::size_t>(params_.min_samples_leaf)) {
      return node;
    }
    const SplitChoice split = find_split(idx, counts, node_impurity);
    if (split.feature < 0) return node;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (X_(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(i);
    }
    importances_[static_cast<std::size_t>(split.feature)] +=
        static_cast<double>(idx.size()) / total_ * std::max(0.0, split.decrease);
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& n = nodes_[static_cast<std::size_t>(node)];
    n.feature = split.feature;
    n.threshold = split.threshold;
    n.left = l;
    n.right = r;
    return node;
  }

  std::vector<TreeNode> take_nodes() { return std::move(nodes_); }
  std::vector<double> take_importances() { return std::move(importances_); }

 private:
  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> f(X_.cols());
    std::iota(f.begin(), f.end(), 0);
    if (budget_ < f.size()) {
      for (std::size_t i = 0; i < budget_; ++i) std::swap(f[i], f[i + uniform_index(rng_, f.size() - i)]);
      f.resize(budget_);
      std::sort(f.begin(), f.end());
    }
    return f;
  }

  void consider(SplitChoice& best, std::size_t feature, double threshold, const std::array<double, 2>& left,
                const std::array<double, 2>& total, double node_impurity) {
    const std::array<double, 2> right{total[0] - left[0], total[1] - left[1]};
    const double nl = left[0] + left[1];
    const double nr = right[0] + right[1];
    const auto min_leaf = static_cast<double>(params_.min_samples_leaf);
    if (nl < min_leaf || nr < min_leaf) return;
    const double n = nl + nr;
    const double child = (nl * impurity(left, params_.criterion) + nr * impurity(right, params_.criterion)) / n;
    const double decrease = node_impurity - child;
    if (decrease < -kTieEpsilon) return;
    // Candidates arrive by ascending feature, then ascending threshold, so a
    // strict improvement is needed to displace an earlier one.
    if (best.feature < 0 || decrease > best.decrease + kTieEpsilon) {
      best = {static_cast<int>(feature), threshold, decrease};
    }
  }

  SplitChoice find_split(const std::vector<std::size_t>& idx, const std::array<double, 2>& total,
                         double node_impurity) {
    SplitChoice best;
    std::vector<std::pair<double, int>> vals(idx.size());
    for (std::size_t f : candidate_features()) {
      for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = {X_(idx[k], f), y_[idx[k]]};
      if (params_.splitter == Splitter::Best) {
        std::sort(vals.begin(), vals.end());
        std::array<double, 2> left{};
        for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
          left[static_cast<std::size_t>(vals[k].second)] += 1.0;
          if (vals[k].first == vals[k + 1].first) continue;
          double thr = 0.5 * (vals[k].first + vals[k + 1].first);
          if (thr >= vals[k + 1].first) thr = vals[k].first;
          consider(best, f, thr, left, total, node_impurity);
        }
      } else {
        double lo = vals.front().first, hi = lo;
        for (const auto& v : vals) {
          lo = std::min(lo, v.first);
          hi = std::max(hi, v.first);
        }
        if (!(lo < hi)) continue;
        double thr = lo + uniform01(rng_) * (hi - lo);
        if (thr >= hi) thr = lo;
        std::array<double, 2> left{};
        for (const auto& v : vals) {
          if (v.first <= thr) left[static_cast<std::size_t>(v.second)] += 1.0;
        }
        consider(best, f, thr, left, total, node_impurity);
      }
    }
    return best;
  }

  const Matrix& X_;
  std::span<const int> y_;
  const TreeParams& params_;
  Rng rng_;
  std::size_t budget_;
  std::vector<TreeNode> nodes_;
  std::vector<double> importances_;
  double total_;
};

void normalize(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total > 0.0) {
    for (double& x : v) x /= total;
  }
}

void check_training_set(const Matrix& X, std::span<const int> y) {
  if (X.rows() == 0) throw ValidationError("empty training set");
  if (X.rows() != y.size()) throw ValidationError("feature matrix and target lengths differ");
  for (int v : y) {
    if (v != 0 && v != 1) throw ValidationError("targets must be binary 0/1");
  }
}

bool single_class(std::span<const int> y) {
  return std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
}

std::vector<std::string> default_names(std::size_t width) {
  std::vector<std::string> names(width);
  for (std::size_t i = 0; i < width; ++i) names[i] = "f" + std::to_string(i);
  return names;
}

}  // namespace

DecisionTree DecisionTree::fit(const Matrix& X, std::span<const int> y, std::span<const std::size_t> sample,
                               const TreeParams& params, std::uint64_t seed) {
  params.validate();
  if (sample.empty()) throw ValidationError("empty training set");
  TreeBuilder builder(X, y, params, seed, sample.size());
  std::vector<std::size_t> idx(sample.begin(), sample.end());
  builder.build(idx, 0);
  DecisionTree t;
  t.nodes_ = builder.take_nodes();
  t.importances_ = builder.take_importances();
  normalize(t.importances_);
  return t;
}

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t n = 0;
  while (nodes_[n].feature >= 0) {
    const auto& node = nodes_[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return nodes_[n].prediction;
}

std::vector<int> DecisionTree::predict(const Matrix& X) const {
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict(X.row(r));
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].feature < 0) continue;
    d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
    d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

json DecisionTree::to_json() const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1], n.prediction});
  }
  return {{"nodes", nodes}, {"importances", importances_}};
}

DecisionTree DecisionTree::from_json(const json& obj, std::size_t width) {
  DecisionTree t;
  for (const auto& n : obj.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.counts = {n.at(4).get<double>(), n.at(5).get<double>()};
    node.prediction = n.at(6).get<int>();
    t.nodes_.push_back(node);
  }
  const auto count = static_cast<int>(t.nodes_.size());
  if (count == 0) throw ValidationError("serialized tree has no nodes");
  for (const auto& n : t.nodes_) {
    if (n.feature >= 0 && (n.feature >= static_cast<int>(width) || n.left <= 0 || n.right <= 0 || n.left >= count ||
                           n.right >= count)) {
      throw ValidationError("serialized tree is malformed");
    }
  }
  t.importances_ = obj.at("importances").get<std::vector<double>>();
  return t;
}

std::vector<std::size_t> bootstrap_sample(std::span<const int> y, bool stratified, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(y.size());
  if (!stratified) {
    for (std::size_t i = 0; i < y.size(); ++i) out.push_back(uniform_index(rng, y.size()));
    return out;
  }
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) members.push_back(i);
    }
    for (std::size_t k = 0; k < members.size(); ++k) out.push_back(members[uniform_index(rng, members.size())]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models

int TrainedModel::predict(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += static_cast<std::size_t>(t.predict(x));
  return 2 * votes > trees.size() ? 1 : 0;
}

std::vector<int> TrainedModel::predict(const Matrix& X) const {
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict(X.row(r));
  return out;
}

json TrainedModel::to_json() const {
  json t = json::array();
  for (const auto& tree : trees) t.push_back(tree.to_json());
  return {{"kind", std::string(to_string(kind))},
          {"config", config.to_json()},
          {"seed", seed},
          {"feature_manifest", feature_manifest},
          {"importances", importances},
          {"constant_target", constant_target},
          {"trees", t}};
}

TrainedModel TrainedModel::from_json(const json& doc) {
  TrainedModel m;
  auto kind = parse_model_family(doc.at("kind").get<std::string>());
  if (!kind) throw ValidationError("unknown model kind");
  m.kind = *kind;
  m.config = ModelConfig::from_json(doc.at("config"));
  m.seed = doc.at("seed").get<std::uint64_t>();
  m.feature_manifest = doc.at("feature_manifest").get<std::vector<std::string>>();
  m.importances = doc.at("importances").get<std::vector<double>>();
  m.constant_target = doc.value("constant_target", false);
  for (const auto& t : doc.at("trees")) m.trees.push_back(DecisionTree::from_json(t, m.feature_manifest.size()));
  if (m.trees.empty()) throw ValidationError("serialized model has no trees");
  return m;
}

TrainedModel fit_tree(const Matrix& X, std::span<const int> y, const TreeParams& params, std::uint64_t seed,
                      std::vector<std::string> feature_names) {
  check_training_set(X, y);
  std::vector<std::size_t> all(X.rows());
  std::iota(all.begin(), all.end(), 0);
  TrainedModel m;
  m.kind = ModelFamily::DecisionTree;
  m.config.family = ModelFamily::DecisionTree;
  m.config.tree = params;
  m.seed = seed;
  m.constant_target = single_class(y);
  m.trees.push_back(DecisionTree::fit(X, y, all, params, derive_seed(seed, "tree", 0)));
  m.importances = m.trees.front().importances();
  m.feature_manifest = feature_names.empty() ? default_names(X.cols()) : std::move(feature_names);
  return m;
}

TrainedModel fit_forest(const Matrix& X, std::span<const int> y, const ForestParams& params, std::uint64_t seed,
                        std::vector<std::string> feature_names, ModelFamily kind, Execution ex) {
  params.validate();
  check_training_set(X, y);
  const auto count = static_cast<std::size_t>(params.n_estimators);
  std::vector<DecisionTree> trees(count);
  std::vector<std::size_t> all(X.rows());
  std::iota(all.begin(), all.end(), 0);
  auto grow = [&](std::size_t t) {
    const auto sample = params.bootstrap
                            ? bootstrap_sample(y, params.stratified_bootstrap, derive_seed(seed, "bootstrap", t))
                            : all;
    trees[t] = DecisionTree::fit(X, y, sample, params.tree, derive_seed(seed, "tree", t));
  };
  if (ex == Execution::Serial) {
    for (std::size_t t = 0; t < count; ++t) grow(t);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(count); ++t) grow(static_cast<std::size_t>(t));
  }
  TrainedModel m;
  m.kind = kind;
  m.config.family = kind;
  m.config.forest = params;
  m.seed = seed;
  m.constant_target = single_class(y);
  m.importances.assign(X.cols(), 0.0);
  for (const auto& t : trees) {
    for (std::size_t f = 0; f < X.cols(); ++f) m.importances[f] += t.importances()[f];
  }
  normalize(m.importances);
  m.trees = std::move(trees);
  m.feature_manifest = feature_names.empty() ? default_names(X.cols()) : std::move(feature_names);
  return m;
}

TrainedModel fit_model(const Matrix& X, std::span<const int> y, const ModelConfig& config, std::uint64_t seed,
                       std::vector<std::string> feature_names, Execution ex) {
  switch (config.family) {
    case ModelFamily::DecisionTree: return fit_tree(X, y, config.tree, seed, std::move(feature_names));
    case ModelFamily::RandomForest:
      return fit_forest(X, y, config.forest, seed, std::move(feature_names), ModelFamily::RandomForest, ex);
    case ModelFamily::StratifiedRF: {
      ForestParams p = config.forest;
      p.stratified_bootstrap = p.bootstrap;
      return fit_forest(X, y, p, seed, std::move(feature_names), ModelFamily::StratifiedRF, ex);
    }
  }
  throw ValidationError("unknown model family");
}

// ---------------------------------------------------------------------------
// Evaluation

double f1(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("f1: length mismatch (" + std::to_string(y_true.size()) + " vs " +
                          std::to_string(y_pred.size()) + ")");
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    tp += y_true[i] == 1 && y_pred[i] == 1;
    fp += y_true[i] == 0 && y_pred[i] == 1;
    fn += y_true[i] == 1 && y_pred[i] == 0;
  }
  // 2PR/(P+R) written in counts.
  const double denom = 2 * tp + fp + fn;
  return tp > 0 ? 2 * tp / denom : 0.0;
}

void CVConfig::validate() const {
  if (folds < 2) throw ValidationError("cv folds must be at least 2");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
}

namespace {

std::array<std::vector<std::size_t>, 2> shuffled_classes(std::span<const int> y, Rng& rng) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);
  for (auto& members : by_class) {
    for (std::size_t r = members.size(); r > 1; --r) std::swap(members[r - 1], members[uniform_index(rng, r)]);
  }
  return by_class;
}

}  // namespace

Split stratified_split(std::span<const int> y, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
  Rng rng(seed);
  const auto by_class = shuffled_classes(y, rng);
  for (int c = 0; c < 2; ++c) {
    if (by_class[static_cast<std::size_t>(c)].size() < 2) {
      throw ValidationError("cannot stratify: class " + std::to_string(c) + " has fewer than 2 members");
    }
  }
  Split s;
  for (const auto& members : by_class) {
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    s.test.insert(s.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cv folds must be at least 2");
  Rng rng(seed);
  const auto by_class = shuffled_classes(y, rng);
  const std::size_t minority = std::min(by_class[0].size(), by_class[1].size());
  if (static_cast<std::size_t>(folds) > minority) {
    throw ValidationError("infeasible fold count: " + std::to_string(folds) + " folds but the minority class has " +
                          std::to_string(minority) + " members");
  }
  std::vector<int> fold(y.size(), 0);
  std::size_t offset = 0;
  for (const auto& members : by_class) {
    for (std::size_t k = 0; k < members.size(); ++k) {
      fold[members[k]] = static_cast<int>((offset + k) % static_cast<std::size_t>(folds));
    }
    offset += members.size();
  }
  return fold;
}

CVResult cross_validate(const Matrix& X, std::span<const int> y, const FitPredictFn& fit_predict,
                        const CVConfig& config) {
  config.validate();
  const auto fold = stratified_folds(y, config.folds, derive_seed(config.seed, "cv-folds"));
  CVResult r;
  for (int f = 0; f < config.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    const auto y_train = select(y, train);
    const auto y_test = select(y, test);
    const auto pred = fit_predict(X.select_rows(train), y_train, X.select_rows(test),
                                  derive_seed(config.seed, "cv-fit", static_cast<std::uint64_t>(f)));
    r.fold_f1.push_back(f1(y_test, pred));
  }
  r.mean_f1 = std::accumulate(r.fold_f1.begin(), r.fold_f1.end(), 0.0) / static_cast<double>(r.fold_f1.size());
  return r;
}

CVResult cross_validate(const Matrix& X, std::span<const int> y, const ModelConfig& model, const CVConfig& config,
                        Execution ex) {
  return cross_validate(
      X, y,
      [&](const Matrix& Xtr, std::span<const int> ytr, const Matrix& Xte, std::uint64_t seed) {
        return fit_model(Xtr, ytr, model, seed, {}, ex).predict(Xte);
      },
      config);
}

// ---------------------------------------------------------------------------
// Model selection

namespace {

struct GridAxes {
  std::vector<int> n_estimators;
  std::vector<MaxFeatures> max_features;
  std::vector<std::optional<int>> max_depth;
  std::vector<int> min_samples_split;
  std::vector<int> min_samples_leaf;
  std::vector<bool> bootstrap;
  std::vector<Criterion> criterion;
  std::vector<Splitter> splitter;
};

GridAxes default_axes(ModelFamily family) {
  GridAxes a;
  if (family == ModelFamily::DecisionTree) {
    a.n_estimators = {1};
    a.criterion = {Criterion::Gini, Criterion::Entropy, Criterion::LogLoss};
    a.splitter = {Splitter::Best, Splitter::Random};
    a.max_depth = {1, 25, 50};
    a.max_features = {MaxFeatures::Sqrt, MaxFeatures::Log2, MaxFeatures::All};
    a.min_samples_leaf = {1, 5, 10};
    a.min_samples_split = {2};
    a.bootstrap = {false};
  } else {
    for (int n = 50; n <= 400; n += 50) a.n_estimators.push_back(n);
    a.max_features = {MaxFeatures::Sqrt, MaxFeatures::Log2};
    for (int d = 2; d <= 8; ++d) a.max_depth.push_back(d);
    for (int s = 4; s <= 8; ++s) a.min_samples_split.push_back(s);
    a.min_samples_leaf = {2, 3, 4};
    a.bootstrap = {true, false};
    a.criterion = {Criterion::Gini, Criterion::Entropy};
    a.splitter = {Splitter::Best};
  }
  return a;
}

GridSpec expand(ModelFamily family, const GridAxes& a) {
  GridSpec grid;
  auto push = [&](int n_est, MaxFeatures mf, std::optional<int> depth, int split, int leaf, bool boot, Criterion crit,
                  Splitter sp) {
    ModelConfig c;
    c.family = family;
    TreeParams t;
    t.criterion = crit;
    t.splitter = sp;
    t.max_depth = depth;
    t.max_features = mf;
    t.min_samples_leaf = leaf;
    t.min_samples_split = split;
    if (family == ModelFamily::DecisionTree) {
      c.tree = t;
    } else {
      c.forest.n_estimators = n_est;
      c.forest.tree = t;
      c.forest.bootstrap = boot;
      c.forest.stratified_bootstrap = family == ModelFamily::StratifiedRF && boot;
    }
    grid.push_back(c);
  };
  if (family == ModelFamily::DecisionTree) {
    for (auto crit : a.criterion)
      for (auto sp : a.splitter)
        for (auto depth : a.max_depth)
          for (auto mf : a.max_features)
            for (int leaf : a.min_samples_leaf)
              for (int split : a.min_samples_split) push(1, mf, depth, split, leaf, false, crit, sp);
  } else {
    for (int n_est : a.n_estimators)
      for (auto mf : a.max_features)
        for (auto depth : a.max_depth)
          for (int split : a.min_samples_split)
            for (int leaf : a.min_samples_leaf)
              for (bool boot : a.bootstrap)
                for (auto crit : a.criterion)
                  for (auto sp : a.splitter) push(n_est, mf, depth, split, leaf, boot, crit, sp);
  }
  return grid;
}

template <typename T, typename Parse>
std::vector<T> parse_axis(const json& options, const char* key, std::vector<T> fallback, Parse parse) {
  if (!options.contains(key)) return fallback;
  std::vector<T> out;
  for (const auto& v : options[key]) out.push_back(parse(v));
  if (out.empty()) throw ValidationError(std::string("empty grid axis ") + key);
  return out;
}

}  // namespace

GridSpec default_grid(ModelFamily family) { return expand(family, default_axes(family)); }

GridSpec grid_from_json(ModelFamily family, const json& options) {
  if (options.is_string() && options.get<std::string>() == "default") return default_grid(family);
  if (!options.is_object()) throw ValidationError("grid must be \"default\" or an object of option lists");
  // Unlisted axes collapse to a single default value.
  GridAxes base;
  const ForestParams fp;
  const TreeParams tp = family == ModelFamily::DecisionTree ? TreeParams{} : fp.tree;
  base.n_estimators = {fp.n_estimators};
  base.max_features = {tp.max_features};
  base.max_depth = {tp.max_depth};
  base.min_samples_split = {tp.min_samples_split};
  base.min_samples_leaf = {tp.min_samples_leaf};
  base.bootstrap = {family != ModelFamily::DecisionTree && fp.bootstrap};
  base.criterion = {tp.criterion};
  base.splitter = {tp.splitter};
  auto text = [](auto parse) {
    return [parse](const json& v) {
      auto r = parse(v.get<std::string>());
      if (!r) throw ValidationError("invalid grid option \"" + v.get<std::string>() + "\"");
      return *r;
    };
  };
  GridAxes a;
  a.n_estimators = parse_axis<int>(options, "n_estimators", base.n_estimators, [](const json& v) { return v.get<int>(); });
  a.max_features = parse_axis<MaxFeatures>(options, "max_features", base.max_features, text(parse_max_features));
  a.max_depth = parse_axis<std::optional<int>>(options, "max_depth", base.max_depth, [](const json& v) {
    return v.is_null() ? std::optional<int>{} : std::optional<int>{v.get<int>()};
  });
  a.min_samples_split =
      parse_axis<int>(options, "min_samples_split", base.min_samples_split, [](const json& v) { return v.get<int>(); });
  a.min_samples_leaf =
      parse_axis<int>(options, "min_samples_leaf", base.min_samples_leaf, [](const json& v) { return v.get<int>(); });
  a.bootstrap = parse_axis<bool>(options, "bootstrap", base.bootstrap, [](const json& v) { return v.get<bool>(); });
  a.criterion = parse_axis<Criterion>(options, "criterion", base.criterion, text(parse_criterion));
  a.splitter = parse_axis<Splitter>(options, "splitter", base.splitter, text(parse_splitter));
  auto grid = expand(family, a);
  for (const auto& c : grid) {
    if (c.family == ModelFamily::DecisionTree) {
      c.tree.validate();
    } else {
      c.forest.validate();
    }
  }
  return grid;
}

GridResult grid_search(const Matrix& X, std::span<const int> y, const GridSpec& grid, const CVConfig& config,
                       Execution ex) {
  if (grid.empty()) throw ValidationError("empty hyperparameter grid");
  config.validate();
  GridResult result;
  result.rows.resize(grid.size());
  auto evaluate = [&](std::size_t i) {
    result.rows[i] = {grid[i], cross_validate(X, y, grid[i], config, Execution::Serial)};
  };
  if (ex == Execution::Serial) {
    for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
  } else {
    // Exceptions must not escape an OpenMP region; the first one is rethrown.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid.size()); ++i) {
      try {
        evaluate(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(fairdyn_grid_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].cv.mean_f1 > result.rows[result.best].cv.mean_f1) result.best = i;
  }
  return result;
}

std::vector<std::size_t> subset_sizes(std::size_t width) {
  std::vector<std::size_t> out;
  for (std::size_t k : {15U, 20U, 30U}) {
    if (k < width) out.push_back(k);
  }
  out.push_back(width);
  return out;
}

SubsetResult iterative_subset_selection(const Matrix& X, std::span<const int> y,
                                        std::span<const std::string> feature_names, const ModelConfig& tuned,
                                        const CVConfig& config, Execution ex) {
  if (feature_names.size() != X.cols()) throw ValidationError("feature name count does not match matrix width");
  const auto full = fit_model(X, y, tuned, derive_seed(config.seed, "subset-rank"),
                              {feature_names.begin(), feature_names.end()}, ex);
  SubsetResult r;
  r.ranking.resize(X.cols());
  std::iota(r.ranking.begin(), r.ranking.end(), 0);
  std::sort(r.ranking.begin(), r.ranking.end(), [&](std::size_t a, std::size_t b) {
    if (full.importances[a] != full.importances[b]) return full.importances[a] > full.importances[b];
    return feature_names[a] < feature_names[b];
  });
  std::vector<std::vector<std::size_t>> subsets;
  for (std::size_t k : subset_sizes(X.cols())) {
    std::vector<std::size_t> cols(r.ranking.begin(), r.ranking.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(cols.begin(), cols.end());
    r.candidates.push_back({k, k == X.cols(), {}});
    subsets.push_back(std::move(cols));
  }
  auto evaluate = [&](std::size_t i) {
    r.candidates[i].cv = cross_validate(X.select_cols(subsets[i]), y, tuned, config, Execution::Serial);
  };
  if (ex == Execution::Serial) {
    for (std::size_t i = 0; i < subsets.size(); ++i) evaluate(i);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(subsets.size()); ++i) {
      try {
        evaluate(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(fairdyn_subset_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  for (std::size_t i = 1; i < r.candidates.size(); ++i) {
    if (r.candidates[i].cv.mean_f1 > r.candidates[r.best].cv.mean_f1) r.best = i;
  }
  r.features = subsets[r.best];
  r.f1 = r.candidates[r.best].cv.mean_f1;
  return r;
}

}  // namespace fairdyn::ml
