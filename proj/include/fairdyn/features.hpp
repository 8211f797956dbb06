#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairdyn/centrality.hpp"
#include "fairdyn/cogsnet.hpp"
#include "fairdyn/data_model.hpp"
#include "fairdyn/ml.hpp"

namespace fairdyn {

enum class Pipeline : std::uint8_t { Survey, Topology, Hybrid };

inline constexpr std::array<Pipeline, 3> kAllPipelines = {Pipeline::Survey, Pipeline::Topology, Pipeline::Hybrid};

std::string_view to_string(Pipeline p) noexcept;
std::optional<Pipeline> parse_pipeline(std::string_view name) noexcept;

/// Identifies one feature row: a participant at the wave being predicted.
struct SampleKey {
  NodeId participant;
  int wave;

  auto operator<=>(const SampleKey&) const = default;
};

struct FeatureRow {
  SampleKey key;
  std::vector<double> values;  // aligned with FeatureTable::names
  /// Names of columns whose source value was absent for this row.
  std::set<std::string> missing;
};

struct FeatureTable {
  Pipeline pipeline = Pipeline::Survey;
  std::vector<std::string> names;
  std::vector<FeatureRow> rows;

  std::size_t width() const noexcept { return names.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws ValidationError for an unknown column.
  double value(std::size_t row, std::string_view name) const;
  ml::Matrix matrix() const;
};

/// Survey features for each key, read from the participant's answers at the
/// key's wave (falling back to the latest earlier answer). Categorical
/// attributes become `survey.<attr>=<value>` indicator columns over every
/// value seen in the dataset; numeric ones pass through as `survey.<attr>`.
/// Every attribute also gets a `survey.<attr>_missing` indicator; a missing
/// attribute leaves its value columns at 0 and lists them in the row's
/// missing set. Columns are sorted by name.
FeatureTable extract_survey_features(const Dataset& data, const Codebook& codebook, std::span<const SampleKey> keys);

/// One `topo.<kind>` column per centrality kind, sorted by name, computed on
/// the CogSNet snapshot at each key's wave timestamp.
FeatureTable extract_topology_features(const Dataset& data, const CogsnetParams& params,
                                       std::span<const SampleKey> keys, const CentralityOptions& options = {});

/// Same as above with the snapshots supplied directly (index = wave - 1).
FeatureTable extract_topology_features(std::span<const WeightedGraph> wave_snapshots, std::span<const SampleKey> keys,
                                       const CentralityOptions& options = {});

/// Row-wise concatenation matched on (participant, wave). A topology table
/// without rows contributes nothing. Throws ValidationError when the key sets
/// differ.
FeatureTable assemble_hybrid(const FeatureTable& survey, const FeatureTable& topology);

/// Rows of `table` for the given keys, in key order. Throws ValidationError
/// for a key the table lacks.
FeatureTable select_rows(const FeatureTable& table, std::span<const SampleKey> keys);

/// participant_id,question,wave,<features...> with a leading comment line
/// carrying `meta`.
void write_feature_csv(std::ostream& out, const FeatureTable& table, const Dataset& data, Question question,
                       const std::string& meta);

/// Ordered column list plus pipeline and row count.
nlohmann::json column_manifest(const FeatureTable& table);

}  // namespace fairdyn
