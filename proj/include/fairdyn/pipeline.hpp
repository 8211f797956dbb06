#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairdyn/centrality.hpp"
#include "fairdyn/cogsnet.hpp"
#include "fairdyn/data_model.hpp"
#include "fairdyn/fairness.hpp"
#include "fairdyn/features.hpp"
#include "fairdyn/ml.hpp"
#include "fairdyn/opinion_sim.hpp"
#include "fairdyn/synthetic.hpp"

namespace fairdyn {

/// A failure inside one named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Where the dataset comes from: a synthetic population or files on disk.
struct DatasetSource {
  std::optional<SyntheticConfig> synthetic;
  std::filesystem::path directory;
  DataFormat format = DataFormat::Csv;
  std::filesystem::path codebook;
};

struct MlSettings {
  std::map<Pipeline, ml::ModelFamily> families{{Pipeline::Survey, ml::ModelFamily::StratifiedRF},
                                               {Pipeline::Topology, ml::ModelFamily::DecisionTree},
                                               {Pipeline::Hybrid, ml::ModelFamily::StratifiedRF}};
  /// Per family: the string "default" or an object of option lists.
  std::map<ml::ModelFamily, nlohmann::json> grids;
  int cv_folds = 10;
  double test_fraction = 0.2;
  bool subset_selection = true;

  ml::GridSpec grid_for(ml::ModelFamily family) const;
};

struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path output = "fairdyn-out";
  int jobs = 0;  // 0 = OpenMP default
  DatasetSource dataset;
  CogsnetParams cogsnet;
  CodingParams coding;
  CentralityOptions centrality;
  std::vector<Question> questions{kAllQuestions.begin(), kAllQuestions.end()};
  std::vector<Pipeline> pipelines{kAllPipelines.begin(), kAllPipelines.end()};
  MlSettings ml;
  MinorityOpinionOptions minority_opinion;
  Aggregation misprediction_aggregation = Aggregation::PerSample;

  /// Parses a config document. Relative paths resolve against `base_dir`.
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
  /// Hash of everything that affects results (output directory and job
  /// count excluded).
  std::string hash() const;
};

/// Named seeds derived from the root seed.
std::uint64_t generation_seed(std::uint64_t root) noexcept;
std::uint64_t simulation_seed(std::uint64_t root, Question q) noexcept;
std::uint64_t split_seed(std::uint64_t root, Question q) noexcept;
std::uint64_t cv_seed(std::uint64_t root, Question q) noexcept;
std::uint64_t model_seed(std::uint64_t root, Question q, Pipeline p) noexcept;

/// Predicts waves 1..6 by running CoDiNG with the run's simulation seed, so
/// the generated follow-up answers are conditioned on the very simulation the
/// audit performs later.
FollowupPredictor coding_predictor(const CogsnetParams& net, const CodingParams& coding, std::uint64_t root_seed);

/// Generates or loads the dataset (stage "generate" or "load").
Dataset prepare_dataset(const RunConfig& config, Codebook& codebook);

/// Writes the dataset files plus codebook.json into `dir`.
void write_dataset(const Dataset& data, const Codebook& codebook, const std::filesystem::path& dir);

/// Everything the audit computes for one question before model training.
struct QuestionData {
  Question question;
  SimulationTrace trace;
  std::vector<MisclassificationSample> samples;
  std::vector<SampleKey> keys;
  ml::Labels labels;
};

QuestionData simulate_question(const Dataset& data, const RunConfig& config, Question q);

/// Topology features for every participant at every wave, computed once and
/// shared by all questions.
FeatureTable full_topology_table(const Dataset& data, const RunConfig& config);

/// Feature table for a pipeline over the question's sample keys.
/// `topology` is the table from full_topology_table.
FeatureTable pipeline_features(const Dataset& data, const Codebook& codebook, const FeatureTable& topology,
                               const QuestionData& qd, Pipeline p);

/// Runs every selected (question, pipeline), writes all artifacts under
/// config.output and returns the audit report. A failing stage writes
/// error.json next to the partial artifacts and throws StageError.
nlohmann::json run_audit(const RunConfig& config);

/// The convention flags recorded in every report.
nlohmann::json convention_flags(const RunConfig& config);

/// `# fairdyn config_hash=<hash> seed=<seed>`
std::string artifact_comment(const RunConfig& config);

}  // namespace fairdyn
