#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fairdyn/pipeline.hpp"
#include "fairdyn/schema.hpp"
#include "temp_dir.hpp"

using namespace fairdyn;
using fairdyn::testing::TempDir;
using nlohmann::json;

namespace {

json tiny_config(const std::filesystem::path& out, std::uint64_t seed) {
  return {{"seed", seed},
          {"output", out.string()},
          {"dataset", {{"synthetic", {{"population", 20}, {"mean_degree", 5}}}}},
          {"questions", {"euthanasia"}},
          {"pipelines", {"survey", "topology"}},
          {"ml",
           {{"cv_folds", 3},
            {"subset_selection", false},
            {"grids",
             {{"StratifiedRF", {{"n_estimators", {5}}, {"max_depth", {3}}}},
              {"DecisionTree", {{"max_depth", {3}}, {"criterion", {"gini"}}}}}}}}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("run config parsing") {
  CHECK_THROWS_AS(RunConfig::from_json({{"seed", 1}, {"sed", 2}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json({{"ml", {{"folds", 3}}}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json({{"questions", {"abortion"}}}), ValidationError);

  const auto c = RunConfig::from_json({{"questions", {"jobguar", "marijuana"}}, {"output", "x"}}, "/base");
  CHECK(c.questions == std::vector<Question>{Question::JobGuar, Question::Marijuana});
  CHECK(c.output == std::filesystem::path("/base/x"));
  CHECK(c.dataset.synthetic.has_value());
  CHECK_NOTHROW(c.validate());

  const json bad = {{"dataset", {{"synthetic", {{"minority_fractions", {{"gender", 1.5}}}}}}}};
  CHECK_THROWS_AS(RunConfig::from_json(bad).validate(), ValidationError);

  const auto round = RunConfig::from_json(c.to_json());
  CHECK(round.hash() == c.hash());
}

TEST_CASE("config hash ignores output and job count") {
  auto a = RunConfig::from_json({{"seed", 3}});
  auto b = a;
  b.output = "elsewhere";
  b.jobs = 4;
  CHECK(a.hash() == b.hash());
  b.seed = 4;
  CHECK(a.hash() != b.hash());
  CHECK(artifact_comment(a).find(a.hash()) != std::string::npos);
}

TEST_CASE("derived seeds are distinct") {
  CHECK(split_seed(1, Question::Euthanasia) != cv_seed(1, Question::Euthanasia));
  CHECK(simulation_seed(1, Question::Euthanasia) != simulation_seed(1, Question::JobGuar));
  CHECK(model_seed(1, Question::Euthanasia, Pipeline::Survey) != model_seed(1, Question::Euthanasia, Pipeline::Hybrid));
  CHECK(generation_seed(1) != generation_seed(2));
}

TEST_CASE("a dataset directory without a codebook fails to load") {
  TempDir dir("no-codebook");
  std::ofstream(dir / "participants.csv") << "id\np1\n";
  std::ofstream(dir / "events.csv") << "source,target,timestamp,channel\n";
  std::ofstream(dir / "opinions.csv") << "participant_id,question,wave,stance\n";
  const auto c = RunConfig::from_json({{"dataset", {{"directory", dir.path().string()}}}});
  Codebook cb;
  try {
    (void)prepare_dataset(c, cb);
    FAIL("expected a failure");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load");
    CHECK(std::string(e.what()).find("codebook.json") != std::string::npos);
  }
}

TEST_CASE("audit report is schema-valid and deterministic") {
  TempDir dir("audit");
  const auto a = RunConfig::from_json(tiny_config(dir / "a", 5));
  const auto b = RunConfig::from_json(tiny_config(dir / "b", 5));
  const json report = run_audit(a);
  (void)run_audit(b);

  const auto problems = validate_against_schema(report, audit_report_schema());
  for (const auto& p : problems) FAIL_CHECK(p);
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "report.json") == dump_report(report));
  CHECK(std::filesystem::exists(dir / "a" / "euthanasia" / "survey" / "model.json"));

  std::ostringstream flat, summary;
  write_report_flat_csv(flat, report);
  write_report_summary(summary, report);
  CHECK(flat.str().rfind("# fairdyn", 0) == 0);
  CHECK(flat.str().find("\nquestion,typology,pipeline,group,") != std::string::npos);
  CHECK(summary.str().find("euthanasia") != std::string::npos);
}

TEST_CASE("schema validator") {
  const json schema = {{"type", "object"},
                       {"required", {"a"}},
                       {"properties", {{"a", {{"type", "number"}, {"minimum", 0}}}}},
                       {"additionalProperties", false}};
  CHECK(validate_against_schema({{"a", 1}}, schema).empty());
  CHECK(validate_against_schema({{"a", -1}}, schema).size() == 1);
  CHECK(validate_against_schema({{"b", 1}}, schema).size() == 2);
  CHECK(validate_against_schema({{"a", "x"}}, schema).front().find("/a") != std::string::npos);
}
