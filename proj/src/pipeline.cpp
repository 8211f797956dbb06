#include "fairdyn/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "fairdyn/csv.hpp"
#include "fairdyn/rng.hpp"

namespace fairdyn {

using nlohmann::json;
namespace fs = std::filesystem;

StageError::StageError(std::string stage, const std::string& what)
    : Error("stage " + stage + " failed: " + what), stage_(std::move(stage)) {}

// ---------------------------------------------------------------------------
// Configuration

ml::GridSpec MlSettings::grid_for(ml::ModelFamily family) const {
  auto it = grids.find(family);
  if (it == grids.end()) return ml::default_grid(family);
  return ml::grid_from_json(family, it->second);
}

namespace {

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ValidationError("unknown key \"" + key + "\" in " + where);
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc, const fs::path& base_dir) {
  reject_unknown_keys(doc,
                      {"seed", "output", "jobs", "dataset", "cogsnet", "coding", "centrality", "questions",
                       "pipelines", "ml", "fairness"},
                      "run config");
  RunConfig c;
  c.seed = doc.value("seed", c.seed);
  if (doc.contains("output")) c.output = resolve(base_dir, doc["output"].get<std::string>());
  c.jobs = doc.value("jobs", c.jobs);

  if (doc.contains("dataset")) {
    const auto& d = doc["dataset"];
    reject_unknown_keys(d, {"synthetic", "directory", "format", "codebook"}, "dataset");
    if (d.contains("synthetic")) {
      c.dataset.synthetic = SyntheticConfig::from_json(d["synthetic"]);
    } else {
      if (!d.contains("directory")) throw ValidationError("dataset needs either \"synthetic\" or \"directory\"");
      c.dataset.directory = resolve(base_dir, d["directory"].get<std::string>());
      const auto fmt = parse_format(d.value("format", std::string("csv")));
      if (!fmt) throw ValidationError("unknown dataset format");
      c.dataset.format = *fmt;
      c.dataset.codebook = d.contains("codebook") ? resolve(base_dir, d["codebook"].get<std::string>())
                                                  : c.dataset.directory / "codebook.json";
    }
  } else {
    c.dataset.synthetic = SyntheticConfig::defaults();
  }

  if (doc.contains("cogsnet")) c.cogsnet = CogsnetParams::from_json(doc["cogsnet"]);
  if (doc.contains("coding")) c.coding = CodingParams::from_json(doc["coding"]);
  if (doc.contains("centrality")) {
    reject_unknown_keys(doc["centrality"], {"weighted"}, "centrality");
    c.centrality.weighted = doc["centrality"].value("weighted", c.centrality.weighted);
  }
  if (doc.contains("questions")) {
    c.questions.clear();
    for (const auto& q : doc["questions"]) {
      auto parsed = parse_question(q.get<std::string>());
      if (!parsed) throw ValidationError("unknown question \"" + q.get<std::string>() + "\"");
      c.questions.push_back(*parsed);
    }
  }
  if (doc.contains("pipelines")) {
    c.pipelines.clear();
    for (const auto& p : doc["pipelines"]) {
      auto parsed = parse_pipeline(p.get<std::string>());
      if (!parsed) throw ValidationError("unknown pipeline \"" + p.get<std::string>() + "\"");
      c.pipelines.push_back(*parsed);
    }
  }
  if (doc.contains("ml")) {
    const auto& m = doc["ml"];
    reject_unknown_keys(m, {"families", "grids", "cv_folds", "test_fraction", "subset_selection"}, "ml");
    if (m.contains("families")) {
      for (const auto& [key, value] : m["families"].items()) {
        auto p = parse_pipeline(key);
        auto f = ml::parse_model_family(value.get<std::string>());
        if (!p || !f) throw ValidationError("invalid ml.families entry \"" + key + "\"");
        c.ml.families[*p] = *f;
      }
    }
    if (m.contains("grids")) {
      for (const auto& [key, value] : m["grids"].items()) {
        auto f = ml::parse_model_family(key);
        if (!f) throw ValidationError("unknown model family \"" + key + "\" in ml.grids");
        c.ml.grids[*f] = value;
      }
    }
    c.ml.cv_folds = m.value("cv_folds", c.ml.cv_folds);
    c.ml.test_fraction = m.value("test_fraction", c.ml.test_fraction);
    c.ml.subset_selection = m.value("subset_selection", c.ml.subset_selection);
  }
  if (doc.contains("fairness")) {
    const auto& f = doc["fairness"];
    reject_unknown_keys(f, {"count_ab_as_minority", "aggregation"}, "fairness");
    c.minority_opinion.count_ab = f.value("count_ab_as_minority", false);
    if (f.contains("aggregation")) {
      auto a = parse_aggregation(f["aggregation"].get<std::string>());
      if (!a) throw ValidationError("fairness.aggregation must be per_sample or per_participant");
      c.minority_opinion.aggregation = *a;
      c.misprediction_aggregation = *a;
    }
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return from_json(doc, path.parent_path());
}

json RunConfig::to_json() const {
  json dataset;
  if (this->dataset.synthetic) {
    dataset["synthetic"] = this->dataset.synthetic->to_json();
  } else {
    dataset = {{"directory", this->dataset.directory.generic_string()},
               {"format", this->dataset.format == DataFormat::Csv ? "csv" : "json"},
               {"codebook", this->dataset.codebook.generic_string()}};
  }
  json qs = json::array();
  for (Question q : questions) qs.push_back(std::string(shortcode(q)));
  json ps = json::array();
  for (Pipeline p : pipelines) ps.push_back(std::string(to_string(p)));
  json families = json::object();
  for (const auto& [p, f] : ml.families) families[std::string(to_string(p))] = std::string(ml::to_string(f));
  json grids = json::object();
  for (const auto& [f, g] : ml.grids) grids[std::string(ml::to_string(f))] = g;
  return {{"seed", seed},
          {"output", output.generic_string()},
          {"jobs", jobs},
          {"dataset", dataset},
          {"cogsnet", cogsnet.to_json()},
          {"coding", coding.to_json()},
          {"centrality", {{"weighted", centrality.weighted}}},
          {"questions", qs},
          {"pipelines", ps},
          {"ml",
           {{"families", families},
            {"grids", grids},
            {"cv_folds", ml.cv_folds},
            {"test_fraction", ml.test_fraction},
            {"subset_selection", ml.subset_selection}}},
          {"fairness",
           {{"count_ab_as_minority", minority_opinion.count_ab},
            {"aggregation", std::string(to_string(minority_opinion.aggregation))}}}};
}

void RunConfig::validate() const {
  if (questions.empty()) throw ValidationError("at least one question must be selected");
  if (pipelines.empty()) throw ValidationError("at least one pipeline must be selected");
  if (std::set<Question>(questions.begin(), questions.end()).size() != questions.size()) {
    throw ValidationError("duplicate question in selection");
  }
  if (std::set<Pipeline>(pipelines.begin(), pipelines.end()).size() != pipelines.size()) {
    throw ValidationError("duplicate pipeline in selection");
  }
  if (jobs < 0) throw ValidationError("jobs must be non-negative");
  if (dataset.synthetic) dataset.synthetic->validate();
  cogsnet.validate();
  coding.validate();
  ml::CVConfig{ml.cv_folds, ml.test_fraction, 0}.validate();
  for (const auto& [f, g] : ml.grids) {
    if (ml::grid_from_json(f, g).empty()) throw ValidationError("empty grid for " + std::string(ml::to_string(f)));
  }
}

std::string RunConfig::hash() const {
  json doc = to_json();
  doc.erase("output");
  doc.erase("jobs");
  return hex16(fnv1a(doc.dump()));
}

std::uint64_t generation_seed(std::uint64_t root) noexcept { return derive_seed(root, "generate"); }
std::uint64_t simulation_seed(std::uint64_t root, Question q) noexcept {
  return derive_seed(root, "simulate", index_of(q));
}
std::uint64_t split_seed(std::uint64_t root, Question q) noexcept { return derive_seed(root, "split", index_of(q)); }
std::uint64_t cv_seed(std::uint64_t root, Question q) noexcept { return derive_seed(root, "cv", index_of(q)); }
std::uint64_t model_seed(std::uint64_t root, Question q, Pipeline p) noexcept {
  return derive_seed(root, "model", index_of(q) * 3 + static_cast<std::uint64_t>(p));
}

std::string artifact_comment(const RunConfig& config) {
  return "# fairdyn config_hash=" + config.hash() + " seed=" + std::to_string(config.seed);
}

// ---------------------------------------------------------------------------
// Stages

FollowupPredictor coding_predictor(const CogsnetParams& net, const CodingParams& coding, std::uint64_t root_seed) {
  return [net, coding, root_seed](const Dataset& d, Question q) {
    const auto trace = run_coding(d, net, q, coding, simulation_seed(root_seed, q));
    std::vector<std::array<Stance, kWaveCount>> out(d.size());
    for (NodeId v = 0; v < d.size(); ++v) {
      for (int w = 1; w <= kWaveCount; ++w) {
        out[v][static_cast<std::size_t>(w - 1)] = trace.state_at(v, d.wave_times()[static_cast<std::size_t>(w - 1)]);
      }
    }
    return out;
  };
}

namespace {

Dataset with_provenance(const Dataset& data, Provenance prov) {
  std::vector<RawEvent> events;
  events.reserve(data.events().size());
  for (const auto& e : data.events()) events.push_back({data.id(e.source), data.id(e.target), e.timestamp, e.channel});
  return Dataset::build(data.participants(), events, data.opinions(), data.wave_times(), std::move(prov));
}

template <typename F>
auto run_stage(const std::string& name, F&& f) -> decltype(f()) {
  spdlog::debug("stage {} started", name);
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace

Dataset prepare_dataset(const RunConfig& config, Codebook& codebook) {
  if (config.dataset.synthetic) {
    return run_stage("generate", [&] {
      codebook = synthetic_codebook();
      const Dataset raw = generate_synthetic(*config.dataset.synthetic, generation_seed(config.seed),
                                             coding_predictor(config.cogsnet, config.coding, config.seed));
      return with_provenance(raw, {true, config.seed, config.hash()});
    });
  }
  return run_stage("load", [&] {
    codebook = Codebook::load(config.dataset.codebook);
    const auto paths = DatasetPaths::in_directory(config.dataset.directory, config.dataset.format);
    return load_dataset(paths, config.dataset.format, &codebook);
  });
}

void write_dataset(const Dataset& data, const Codebook& codebook, const fs::path& dir) {
  save_dataset(data, dir, DataFormat::Csv);
  json cb = codebook.to_json();
  cb["_run"] = {{"config_hash", data.provenance().config_hash}, {"seed", data.provenance().seed}};
  write_text(dir / "codebook.json", cb.dump(2) + "\n");
}

QuestionData simulate_question(const Dataset& data, const RunConfig& config, Question q) {
  QuestionData qd{q, run_coding(data, config.cogsnet, q, config.coding, simulation_seed(config.seed, q)), {}, {}, {}};
  qd.samples = label_mispredictions(qd.trace, data, data.wave_times());
  for (const auto& s : qd.samples) {
    qd.keys.push_back({s.participant, s.wave});
    qd.labels.push_back(s.target ? 1 : 0);
  }
  return qd;
}

FeatureTable full_topology_table(const Dataset& data, const RunConfig& config) {
  std::vector<SampleKey> keys;
  for (NodeId v = 0; v < data.size(); ++v) {
    for (int w = 1; w <= kWaveCount; ++w) keys.push_back({v, w});
  }
  return extract_topology_features(data, config.cogsnet, keys, config.centrality);
}

FeatureTable pipeline_features(const Dataset& data, const Codebook& codebook, const FeatureTable& topology,
                               const QuestionData& qd, Pipeline p) {
  if (p == Pipeline::Topology) return select_rows(topology, qd.keys);
  auto survey = extract_survey_features(data, codebook, qd.keys);
  if (p == Pipeline::Survey) return survey;
  return assemble_hybrid(survey, select_rows(topology, qd.keys));
}

json convention_flags(const RunConfig& config) {
  return {
      {"centrality_mode", config.centrality.weighted ? "weighted" : "unweighted"},
      {"centrality_path_length", "1/weight"},
      {"centrality_disconnected", "per component, closeness scaled by reachability"},
      {"centrality_isolates", "0 except subgraph = 1 and pagerank = 1/n"},
      {"snapshot_time", "wave timestamp"},
      {"current_flow", "betweenness and closeness emitted as separate columns"},
      {"minority_opinion_pole", "rarer of A and B over pooled non-Missing answers, ties to B"},
      {"minority_opinion_count_ab", config.minority_opinion.count_ab},
      {"rate_aggregation", std::string(to_string(config.minority_opinion.aggregation))},
      {"volatility_missing", "Missing breaks adjacency; participants with fewer than 2 answers excluded"},
      {"coding_init", config.coding.init == InitPolicy::FromWave1 ? "from_wave1" : "uniform"},
      {"naming_game_missing_start", "AB"},
      {"stratified_random_forest", "per-class stratified bootstrap"},
      {"split_thresholds", "midpoints of sorted unique values"},
      {"tie_breaking", "lowest feature index, then lowest threshold; leaf ties predict 0"},
      {"missing_features", "0 plus a *_missing indicator column"},
      {"survey_wave", "answers at the sample wave, else the latest earlier answer"},
      {"subgroup_f1", "shared held-out test set restricted to the subgroup"},
      {"reported_scores", "grid and subset CV F1 on the training split; test_f1 on the held-out split"},
      {"cv", std::to_string(config.ml.cv_folds) + "-fold stratified"},
      {"test_fraction", config.ml.test_fraction},
      {"grid_discretization",
       "n_estimators 50..400 step 50, max_depth 2..8, min_samples_split 4..8, min_samples_leaf 2..4"},
      {"subset_sizes", "15, 20, 30 and all, limited to the feature width"},
  };
}

namespace {

void write_grid_csv(const fs::path& path, const std::string& meta, const ml::GridResult& gr) {
  std::ofstream out(path);
  out << meta << '\n';
  csv::write_row(out, {"index", "family", "n_estimators", "criterion", "splitter", "max_depth", "max_features",
                       "min_samples_split", "min_samples_leaf", "bootstrap", "mean_cv_f1", "best"});
  for (std::size_t i = 0; i < gr.rows.size(); ++i) {
    const auto& c = gr.rows[i].config;
    const bool tree = c.family == ml::ModelFamily::DecisionTree;
    const auto& t = tree ? c.tree : c.forest.tree;
    csv::write_row(out, {std::to_string(i), std::string(ml::to_string(c.family)),
                         tree ? "1" : std::to_string(c.forest.n_estimators), std::string(ml::to_string(t.criterion)),
                         std::string(ml::to_string(t.splitter)), t.max_depth ? std::to_string(*t.max_depth) : "none",
                         std::string(ml::to_string(t.max_features)), std::to_string(t.min_samples_split),
                         std::to_string(t.min_samples_leaf), tree ? "false" : (c.forest.bootstrap ? "true" : "false"),
                         csv::format_double(gr.rows[i].cv.mean_f1), i == gr.best ? "true" : "false"});
  }
}

void write_subset_csv(const fs::path& path, const std::string& meta, const ml::SubsetResult& sr) {
  std::ofstream out(path);
  out << meta << '\n';
  csv::write_row(out, {"k", "all", "mean_cv_f1", "selected"});
  for (std::size_t i = 0; i < sr.candidates.size(); ++i) {
    const auto& c = sr.candidates[i];
    csv::write_row(out, {std::to_string(c.k), c.all ? "true" : "false", csv::format_double(c.cv.mean_f1),
                         i == sr.best ? "true" : "false"});
  }
}

json run_block(const RunConfig& config) { return {{"config_hash", config.hash()}, {"seed", config.seed}}; }

PipelineOutcome audit_pipeline(const Dataset& data, const Codebook& codebook, const FeatureTable& topology,
                               const RunConfig& config, const QuestionData& qd, const ml::Split& split,
                               std::span<const MinorityMembership> memberships, Pipeline p, const fs::path& dir) {
  const std::string meta = artifact_comment(config);
  const std::string tag = std::string(shortcode(qd.question)) + "/" + std::string(to_string(p));
  fs::create_directories(dir);

  const FeatureTable table = run_stage("features:" + tag, [&] {
    auto t = pipeline_features(data, codebook, topology, qd, p);
    std::ofstream out(dir / "features.csv");
    write_feature_csv(out, t, data, qd.question, meta.substr(2));
    auto manifest = column_manifest(t);
    manifest["run"] = run_block(config);
    write_text(dir / "features_manifest.json", manifest.dump(2) + "\n");
    return t;
  });

  const ml::Matrix X = table.matrix();
  const ml::Matrix X_train = X.select_rows(split.train);
  const ml::Matrix X_test = X.select_rows(split.test);
  const auto y_train = ml::select(qd.labels, split.train);
  const auto y_test = ml::select(qd.labels, split.test);
  const ml::ModelFamily family = config.ml.families.at(p);
  const ml::CVConfig cv{config.ml.cv_folds, config.ml.test_fraction, cv_seed(config.seed, qd.question)};

  PipelineOutcome outcome;
  outcome.pipeline = p;
  outcome.family = family;
  outcome.samples = qd.labels.size();
  outcome.positives = static_cast<std::size_t>(std::count(qd.labels.begin(), qd.labels.end(), 1));
  outcome.feature_width = table.width();

  const auto grid = run_stage("grid-search:" + tag, [&] {
    const auto spec = config.ml.grid_for(family);
    auto gr = ml::grid_search(X_train, y_train, spec, cv);
    write_grid_csv(dir / "grid.csv", meta, gr);
    return gr;
  });
  outcome.grid_size = grid.rows.size();
  outcome.best_config = grid.best_row().config;
  outcome.grid_cv_f1 = grid.best_row().cv.mean_f1;

  std::vector<std::size_t> selected(table.width());
  std::iota(selected.begin(), selected.end(), 0);
  outcome.subset_cv_f1 = outcome.grid_cv_f1;
  if (config.ml.subset_selection) {
    const auto subsets = run_stage("subset-selection:" + tag, [&] {
      auto sr = ml::iterative_subset_selection(X_train, y_train, table.names, outcome.best_config, cv);
      write_subset_csv(dir / "subsets.csv", meta, sr);
      return sr;
    });
    selected = subsets.features;
    outcome.subset_candidates = subsets.candidates;
    outcome.subset_cv_f1 = subsets.f1;
  }
  for (std::size_t c : selected) outcome.selected_features.push_back(table.names[c]);

  const auto model = run_stage("train:" + tag, [&] {
    auto m = ml::fit_model(X_train.select_cols(selected), y_train, outcome.best_config,
                           model_seed(config.seed, qd.question, p), outcome.selected_features);
    json doc = {{"run", run_block(config)},
                {"question", std::string(shortcode(qd.question))},
                {"pipeline", std::string(to_string(p))},
                {"model", m.to_json()}};
    write_text(dir / "model.json", doc.dump() + "\n");
    return m;
  });
  std::vector<std::size_t> order(model.importances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return model.importances[a] > model.importances[b]; });
  for (std::size_t i = 0; i < std::min<std::size_t>(10, order.size()); ++i) {
    outcome.top_importances.emplace_back(model.feature_manifest[order[i]], model.importances[order[i]]);
  }

  outcome.subgroups = run_stage("evaluate:" + tag, [&] {
    const auto pred = model.predict(X_test.select_cols(selected));
    outcome.test_f1 = ml::f1(y_test, pred);
    std::vector<NodeId> owners;
    std::ofstream out(dir / "predictions.csv");
    out << meta << '\n';
    csv::write_row(out, {"participant_id", "wave", "target", "predicted"});
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      const auto& key = qd.keys[split.test[i]];
      owners.push_back(key.participant);
      csv::write_row(out, {data.id(key.participant), std::to_string(key.wave), std::to_string(y_test[i]),
                           std::to_string(pred[i])});
    }
    return subgroup_f1_report(y_test, pred, owners, memberships, qd.question, p);
  });
  return outcome;
}

json audit(const RunConfig& config) {
  const fs::path out = config.output;
  fs::create_directories(out);
  const std::string meta = artifact_comment(config);
  {
    json doc = config.to_json();
    doc["config_hash"] = config.hash();
    write_text(out / "config.json", doc.dump(2) + "\n");
  }

  Codebook codebook;
  const Dataset data = prepare_dataset(config, codebook);
  run_stage("write-dataset", [&] {
    if (config.dataset.synthetic) write_dataset(data, codebook, out / "dataset");
    return 0;
  });
  const auto memberships = derive_minorities(data);

  const bool needs_topology = std::any_of(config.pipelines.begin(), config.pipelines.end(),
                                          [](Pipeline p) { return p != Pipeline::Survey; });
  const FeatureTable topology =
      needs_topology ? run_stage("topology", [&] { return full_topology_table(data, config); }) : FeatureTable{};

  AuditInputs inputs;
  inputs.config_hash = config.hash();
  inputs.seed = config.seed;
  inputs.conventions = convention_flags(config);
  inputs.dataset = {{"source", config.dataset.synthetic ? "synthetic" : "files"},
                    {"participants", data.size()},
                    {"events", data.events().size()},
                    {"opinions", data.opinions().size()}};
  if (!config.dataset.synthetic) inputs.dataset["directory"] = config.dataset.directory.generic_string();
  json seeds = {{"generation", hex16(generation_seed(config.seed))}};

  for (Question q : config.questions) {
    const std::string code(shortcode(q));
    const fs::path qdir = out / code;
    fs::create_directories(qdir);
    const auto qd = run_stage("simulate:" + code, [&] {
      auto r = simulate_question(data, config, q);
      std::ofstream trace(qdir / "trace.csv");
      trace << meta << '\n';
      write_trace_csv(trace, r.trace, data);
      std::ofstream samples(qdir / "samples.csv");
      samples << meta << '\n';
      write_samples_csv(samples, r.samples, data);
      return r;
    });
    seeds["simulation"][code] = hex16(simulation_seed(config.seed, q));
    seeds["split"][code] = hex16(split_seed(config.seed, q));
    seeds["cv"][code] = hex16(cv_seed(config.seed, q));

    QuestionOutcome qo{q,
                       run_stage("eda:" + code,
                                 [&] { return minority_opinion_rate(data, memberships, q, config.minority_opinion); }),
                       run_stage("eda:" + code, [&] { return opinion_volatility(data, memberships, q); }),
                       run_stage("eda:" + code,
                                 [&] {
                                   return baseline_misprediction_rate(qd.samples, memberships, q,
                                                                      config.misprediction_aggregation);
                                 }),
                       run_stage("eda:" + code,
                                 [&] { return misprediction_by_intersectionality(qd.samples, memberships, q); }),
                       {}};
    const auto split = run_stage("split:" + code, [&] {
      return ml::stratified_split(qd.labels, config.ml.test_fraction, split_seed(config.seed, q));
    });
    for (Pipeline p : config.pipelines) {
      seeds["model"][code][std::string(to_string(p))] = hex16(model_seed(config.seed, q, p));
      qo.pipelines.push_back(
          audit_pipeline(data, codebook, topology, config, qd, split, memberships, p, qdir / std::string(to_string(p))));
    }
    inputs.questions.push_back(std::move(qo));
  }
  inputs.seeds = seeds;

  return run_stage("report", [&] {
    json report = compile_audit_report(inputs);
    write_text(out / "report.json", dump_report(report));
    std::ofstream flat(out / "report_flat.csv");
    write_report_flat_csv(flat, report);
    std::ofstream long_form(out / "report_long.csv");
    write_report_long_csv(long_form, report);
    std::ofstream summary(out / "summary.txt");
    write_report_summary(summary, report);
    return report;
  });
}

}  // namespace

json run_audit(const RunConfig& config) {
  config.validate();
  try {
    return audit(config);
  } catch (const StageError& e) {
    std::error_code ec;
    fs::create_directories(config.output, ec);
    json err = {{"stage", e.stage()}, {"message", e.what()}, {"run", run_block(config)}};
    std::ofstream(config.output / "error.json") << err.dump(2) << '\n';
    throw;
  }
}

}  // namespace fairdyn
