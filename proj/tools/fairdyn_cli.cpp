#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/spdlog.h>

#include "fairdyn/pipeline.hpp"
#include "fairdyn/schema.hpp"

namespace fs = std::filesystem;
using namespace fairdyn;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::vector<std::string> questions;
  std::vector<std::string> pipelines;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_pipelines) {
  cmd->add_option("--config", f.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Root seed (overrides the config)");
  cmd->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f.out, "Output directory (overrides the config)");
  cmd->add_option("--questions", f.questions, "Comma-separated question codes")->delimiter(',');
  if (with_pipelines) {
    cmd->add_option("--pipelines", f.pipelines, "Comma-separated pipelines: survey,topology,hybrid")->delimiter(',');
  }
}

/// Flags override the config file, which overrides the defaults.
RunConfig resolve_config(const CommonFlags& f) {
  json doc = json::object();
  fs::path base;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(f.config, 0, e.what());
    }
    base = fs::path(f.config).parent_path();
  }
  if (f.seed) doc["seed"] = *f.seed;
  if (f.jobs) doc["jobs"] = *f.jobs;
  if (!f.questions.empty()) doc["questions"] = f.questions;
  if (!f.pipelines.empty()) doc["pipelines"] = f.pipelines;
  RunConfig config = RunConfig::from_json(doc, base);
  if (!f.out.empty()) config.output = f.out;
  if (config.jobs > 0) omp_set_num_threads(config.jobs);
  return config;
}

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("FAIRDYN_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::string(level) != "off") {
      spdlog::warn("unknown FAIRDYN_LOG level \"{}\"; keeping warn", level);
    } else {
      spdlog::set_level(parsed);
    }
  }
  spdlog::set_pattern("[%l] %v");
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

int cmd_generate(const CommonFlags& f) {
  RunConfig config = resolve_config(f);
  if (!config.dataset.synthetic) throw ValidationError("generate needs a synthetic dataset section in the config");
  const fs::path dir = f.out.empty() ? config.output / "dataset" : fs::path(f.out);
  Codebook codebook;
  const Dataset data = prepare_dataset(config, codebook);
  write_dataset(data, codebook, dir);
  std::cout << "wrote " << data.size() << " participants, " << data.events().size() << " events to " << dir.string()
            << " (config_hash " << config.hash() << ", seed " << config.seed << ")\n";
  return 0;
}

int cmd_audit(const CommonFlags& f) {
  const RunConfig config = resolve_config(f);
  const json report = run_audit(config);
  write_report_summary(std::cout, report);
  std::cout << "\nreport: " << (config.output / "report.json").string() << '\n';
  return 0;
}

int cmd_simulate(const CommonFlags& f, const std::string& model) {
  const RunConfig config = resolve_config(f);
  Codebook codebook;
  const Dataset data = prepare_dataset(config, codebook);
  fs::create_directories(config.output);
  const std::string meta = artifact_comment(config);
  for (Question q : config.questions) {
    const std::string code(shortcode(q));
    const auto seed = simulation_seed(config.seed, q);
    const auto trace = model == "coding"
                           ? run_coding(data, config.cogsnet, q, config.coding, seed)
                           : run_naming_game(data, config.cogsnet, q, seed, config.coding.interactions_per_day);
    auto out = open_output(config.output / ("trace_" + code + ".csv"));
    out << meta << '\n';
    write_trace_csv(out, trace, data);
    const auto samples = label_mispredictions(trace, data, data.wave_times());
    auto s = open_output(config.output / ("samples_" + code + ".csv"));
    s << meta << '\n';
    write_samples_csv(s, samples, data);
    std::size_t wrong = 0;
    for (const auto& sample : samples) wrong += sample.target ? 1 : 0;
    std::cout << code << ": " << samples.size() << " labelled samples, " << wrong << " mispredicted\n";
  }
  return 0;
}

int cmd_features(const CommonFlags& f) {
  const RunConfig config = resolve_config(f);
  Codebook codebook;
  const Dataset data = prepare_dataset(config, codebook);
  fs::create_directories(config.output);
  const std::string meta = artifact_comment(config);
  const bool needs_topology = std::any_of(config.pipelines.begin(), config.pipelines.end(),
                                          [](Pipeline p) { return p != Pipeline::Survey; });
  const FeatureTable topology = needs_topology ? full_topology_table(data, config) : FeatureTable{};
  for (Question q : config.questions) {
    const auto qd = simulate_question(data, config, q);
    for (Pipeline p : config.pipelines) {
      const auto table = pipeline_features(data, codebook, topology, qd, p);
      const std::string stem = std::string(shortcode(q)) + "_" + std::string(to_string(p));
      auto out = open_output(config.output / ("features_" + stem + ".csv"));
      write_feature_csv(out, table, data, q, meta.substr(2));
      json manifest = column_manifest(table);
      manifest["run"] = {{"config_hash", config.hash()}, {"seed", config.seed}};
      open_output(config.output / ("features_" + stem + "_manifest.json")) << manifest.dump(2) << '\n';
      std::cout << stem << ": " << table.rows.size() << " rows x " << table.width() << " features\n";
    }
  }
  return 0;
}

int cmd_report(const std::string& path, const std::string& format, const std::string& out_path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open report");
  json report;
  try {
    report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  const auto errors = validate_against_schema(report, audit_report_schema());
  if (!errors.empty()) {
    std::string msg = "report does not match the audit report schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  std::ofstream file;
  if (!out_path.empty()) file = open_output(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;
  if (format == "summary") {
    write_report_summary(out, report);
  } else if (format == "flat") {
    write_report_flat_csv(out, report);
  } else if (format == "long") {
    write_report_long_csv(out, report);
  } else {
    out << dump_report(report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"fairdyn: opinion-model misprediction fairness audits"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  add_common(generate, flags, false);
  auto* audit = app.add_subcommand("audit", "Run the full audit pipeline");
  add_common(audit, flags, true);
  auto* simulate = app.add_subcommand("simulate", "Simulate opinions and write traces only");
  add_common(simulate, flags, false);
  std::string model = "coding";
  simulate->add_option("--model", model, "Opinion model")->check(CLI::IsMember({"coding", "naming_game"}));
  auto* features = app.add_subcommand("features", "Write feature matrices only");
  add_common(features, flags, true);
  auto* report = app.add_subcommand("report", "Render a report as text or CSV");
  std::string report_path, format = "summary", report_out;
  report->add_option("report", report_path, "report.json path")->required();
  report->add_option("--format", format, "summary, flat, long or json")
      ->check(CLI::IsMember({"summary", "flat", "long", "json"}));
  report->add_option("--out", report_out, "Output file (stdout by default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cmd_generate(flags);
    if (*audit) return cmd_audit(flags);
    if (*simulate) return cmd_simulate(flags, model);
    if (*features) return cmd_features(flags);
    if (*report) return cmd_report(report_path, format, report_out);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
