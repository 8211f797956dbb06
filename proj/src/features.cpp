#include "fairdyn/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "fairdyn/csv.hpp"

namespace fairdyn {

std::string_view to_string(Pipeline p) noexcept {
  switch (p) {
    case Pipeline::Survey: return "survey";
    case Pipeline::Topology: return "topology";
    case Pipeline::Hybrid: return "hybrid";
  }
  return "?";
}

std::optional<Pipeline> parse_pipeline(std::string_view name) noexcept {
  for (Pipeline p : kAllPipelines) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::optional<std::size_t> FeatureTable::column(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

double FeatureTable::value(std::size_t row, std::string_view name) const {
  const auto c = column(name);
  if (!c) throw ValidationError("unknown feature column \"" + std::string(name) + "\"");
  return rows.at(row).values[*c];
}

ml::Matrix FeatureTable::matrix() const {
  ml::Matrix m(rows.size(), names.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) m(r, c) = rows[r].values[c];
  }
  return m;
}

namespace {

std::optional<std::string> answer_at(const Participant& p, const std::string& name, int wave) {
  for (int w = wave; w >= 1; --w) {
    if (auto v = p.attribute(name, w)) return v;
  }
  return std::nullopt;
}

double parse_numeric(const std::string& attribute, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ValidationError("numeric attribute " + attribute + " has non-numeric value \"" + text + "\"");
  }
  return v;
}

void check_keys(const Dataset& data, std::span<const SampleKey> keys) {
  for (const auto& k : keys) {
    if (k.participant >= data.size() || k.wave < 1 || k.wave > kWaveCount) {
      throw ValidationError("feature key out of range (participant " + std::to_string(k.participant) + ", wave " +
                            std::to_string(k.wave) + ")");
    }
  }
}

}  // namespace

FeatureTable extract_survey_features(const Dataset& data, const Codebook& codebook, std::span<const SampleKey> keys) {
  check_keys(data, keys);
  // Every attribute answered anywhere, with the categorical vocabulary.
  std::map<std::string, std::set<std::string>> vocabulary;
  for (const auto& p : data.participants()) {
    for (const auto& wave : p.survey) {
      for (const auto& [name, value] : wave) vocabulary[name].insert(value);
    }
  }

  // Per attribute: its value columns (name, category; empty for numeric).
  struct Source {
    std::string attribute;
    bool numeric;
    std::vector<std::pair<std::string, std::string>> columns;  // column name, category
    std::string missing_column;
  };
  std::vector<Source> sources;
  std::vector<std::string> names;
  for (const auto& [attribute, values] : vocabulary) {
    Source s{attribute, codebook.type_of(attribute) == AttributeType::Numeric, {}, "survey." + attribute + "_missing"};
    if (s.numeric) {
      s.columns.emplace_back("survey." + attribute, "");
    } else {
      for (const auto& v : values) s.columns.emplace_back("survey." + attribute + "=" + v, v);
    }
    for (const auto& c : s.columns) names.push_back(c.first);
    names.push_back(s.missing_column);
    sources.push_back(std::move(s));
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ValidationError("survey feature names collide after encoding");
  }
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < names.size(); ++i) position[names[i]] = i;

  FeatureTable table;
  table.pipeline = Pipeline::Survey;
  table.names = names;
  table.rows.reserve(keys.size());
  for (const auto& key : keys) {
    FeatureRow row{key, std::vector<double>(names.size(), 0.0), {}};
    const auto& p = data.participants()[key.participant];
    for (const auto& s : sources) {
      const auto answer = answer_at(p, s.attribute, key.wave);
      if (!answer) {
        row.values[position[s.missing_column]] = 1.0;
        for (const auto& c : s.columns) row.missing.insert(c.first);
        continue;
      }
      if (s.numeric) {
        row.values[position[s.columns.front().first]] = parse_numeric(s.attribute, *answer);
      } else {
        row.values[position["survey." + s.attribute + "=" + *answer]] = 1.0;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

FeatureTable extract_topology_features(std::span<const WeightedGraph> wave_snapshots, std::span<const SampleKey> keys,
                                       const CentralityOptions& options) {
  if (wave_snapshots.size() != static_cast<std::size_t>(kWaveCount)) {
    throw ValidationError("topology features need one snapshot per wave");
  }
  std::vector<std::size_t> order(kCentralityKindCount);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [](std::size_t a, std::size_t b) {
    return to_string(kAllCentralityKinds[a]) < to_string(kAllCentralityKinds[b]);
  });
  FeatureTable table;
  table.pipeline = Pipeline::Topology;
  for (std::size_t k : order) table.names.push_back("topo." + std::string(to_string(kAllCentralityKinds[k])));

  std::set<int> waves;
  for (const auto& k : keys) {
    if (k.wave < 1 || k.wave > kWaveCount) throw ValidationError("feature key wave out of range");
    waves.insert(k.wave);
  }
  std::map<int, std::array<std::vector<double>, kCentralityKindCount>> per_wave;
  for (int w : waves) {
    per_wave.emplace(w, compute_all_centralities(wave_snapshots[static_cast<std::size_t>(w - 1)], options));
  }
  for (const auto& key : keys) {
    const auto& values = per_wave.at(key.wave);
    if (key.participant >= values.front().size()) throw ValidationError("feature key participant out of range");
    FeatureRow row{key, {}, {}};
    row.values.reserve(order.size());
    for (std::size_t k : order) row.values.push_back(values[k][key.participant]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

FeatureTable extract_topology_features(const Dataset& data, const CogsnetParams& params,
                                       std::span<const SampleKey> keys, const CentralityOptions& options) {
  check_keys(data, keys);
  const auto& times = data.wave_times();
  const auto snapshots = snapshots_at(data, params, times);
  return extract_topology_features(snapshots, keys, options);
}

FeatureTable assemble_hybrid(const FeatureTable& survey, const FeatureTable& topology) {
  FeatureTable out = survey;
  out.pipeline = Pipeline::Hybrid;
  if (topology.rows.empty()) return out;

  std::map<SampleKey, std::size_t> topo_rows;
  for (std::size_t i = 0; i < topology.rows.size(); ++i) {
    if (!topo_rows.emplace(topology.rows[i].key, i).second) {
      throw ValidationError("duplicate topology feature row");
    }
  }
  if (topo_rows.size() != survey.rows.size()) {
    throw ValidationError("participant mismatch: survey has " + std::to_string(survey.rows.size()) +
                          " rows, topology has " + std::to_string(topo_rows.size()));
  }
  for (const auto& n : topology.names) {
    if (survey.column(n)) throw ValidationError("feature name \"" + n + "\" appears in both tables");
  }
  out.names.insert(out.names.end(), topology.names.begin(), topology.names.end());
  for (auto& row : out.rows) {
    auto it = topo_rows.find(row.key);
    if (it == topo_rows.end()) {
      throw ValidationError("participant mismatch: no topology row for participant " +
                            std::to_string(row.key.participant) + " at wave " + std::to_string(row.key.wave));
    }
    const auto& t = topology.rows[it->second];
    row.values.insert(row.values.end(), t.values.begin(), t.values.end());
    row.missing.insert(t.missing.begin(), t.missing.end());
  }
  return out;
}

FeatureTable select_rows(const FeatureTable& table, std::span<const SampleKey> keys) {
  std::map<SampleKey, std::size_t> index;
  for (std::size_t i = 0; i < table.rows.size(); ++i) index.emplace(table.rows[i].key, i);
  FeatureTable out;
  out.pipeline = table.pipeline;
  out.names = table.names;
  out.rows.reserve(keys.size());
  for (const auto& k : keys) {
    auto it = index.find(k);
    if (it == index.end()) {
      throw ValidationError("no feature row for participant " + std::to_string(k.participant) + " at wave " +
                            std::to_string(k.wave));
    }
    out.rows.push_back(table.rows[it->second]);
  }
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureTable& table, const Dataset& data, Question question,
                       const std::string& meta) {
  out << "# " << meta << '\n';
  std::vector<std::string> header{"participant_id", "question", "wave"};
  header.insert(header.end(), table.names.begin(), table.names.end());
  csv::write_row(out, header);
  for (const auto& row : table.rows) {
    std::vector<std::string> fields{data.id(row.key.participant), std::string(shortcode(question)),
                                    std::to_string(row.key.wave)};
    for (double v : row.values) fields.push_back(csv::format_double(v));
    csv::write_row(out, fields);
  }
}

nlohmann::json column_manifest(const FeatureTable& table) {
  return {{"pipeline", std::string(to_string(table.pipeline))},
          {"keys", {"participant_id", "question", "wave"}},
          {"columns", table.names},
          {"rows", table.rows.size()}};
}

}  // namespace fairdyn
