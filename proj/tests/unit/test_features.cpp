#include <doctest.h>

#include <sstream>

#include "fairdyn/features.hpp"

using namespace fairdyn;

namespace {

Dataset three_people() {
  std::vector<Participant> people(3);
  people[0].id = "p0";
  people[0].survey[0] = {{"gender", "female"}, {"age", "19"}, {"parents_income_bracket", "$50k-$60k"}};
  people[1].id = "p1";
  people[1].survey[0] = {{"gender", "male"}, {"age", "20"}};
  people[2].id = "p2";
  people[2].survey[0] = {{"gender", "male"}, {"age", "20"}, {"parents_income_bracket", "$250k+"}};
  people[2].survey[2] = {{"age", "21"}};
  const std::vector<RawEvent> events{{"p0", "p1", 1000, Channel::Text}, {"p1", "p2", 2000, Channel::Call}};
  WaveSchedule waves{};
  for (int i = 0; i < kWaveCount; ++i) waves[static_cast<std::size_t>(i)] = 5000 + 1000 * i;
  return Dataset::build(people, events, {}, waves, {});
}

Codebook age_is_numeric() {
  Codebook cb;
  cb.set_type("age", AttributeType::Numeric);
  return cb;
}

FeatureTable fake_table(Pipeline p, const std::string& prefix, std::size_t width, std::span<const SampleKey> keys) {
  FeatureTable t;
  t.pipeline = p;
  for (std::size_t c = 0; c < width; ++c) t.names.push_back(prefix + std::to_string(c));
  for (const auto& k : keys) t.rows.push_back({k, std::vector<double>(width, static_cast<double>(k.participant)), {}});
  return t;
}

}  // namespace

TEST_CASE("survey one-hot encoding") {
  const Dataset d = three_people();
  const std::vector<SampleKey> keys{{0, 2}, {1, 2}, {2, 2}};
  const auto t = extract_survey_features(d, age_is_numeric(), keys);
  CHECK(std::is_sorted(t.names.begin(), t.names.end()));
  CHECK(t.value(0, "survey.gender=female") == 1.0);
  CHECK(t.value(0, "survey.gender=male") == 0.0);
  CHECK(t.value(1, "survey.gender=male") == 1.0);
  CHECK(t.value(0, "survey.age") == 19.0);
  CHECK_THROWS_AS(t.value(0, "survey.shoe_size"), ValidationError);
}

TEST_CASE("later waves override earlier answers") {
  const Dataset d = three_people();
  const std::vector<SampleKey> keys{{2, 2}, {2, 3}, {2, 6}};
  const auto t = extract_survey_features(d, age_is_numeric(), keys);
  CHECK(t.value(0, "survey.age") == 20.0);
  CHECK(t.value(1, "survey.age") == 21.0);
  CHECK(t.value(2, "survey.age") == 21.0);
}

TEST_CASE("a missing attribute sets its indicator and zeroes its columns") {
  const Dataset d = three_people();
  const std::vector<SampleKey> keys{{1, 2}};
  const auto t = extract_survey_features(d, age_is_numeric(), keys);
  CHECK(t.value(0, "survey.parents_income_bracket_missing") == 1.0);
  CHECK(t.value(0, "survey.parents_income_bracket=$250k+") == 0.0);
  CHECK(t.value(0, "survey.parents_income_bracket=$50k-$60k") == 0.0);
  CHECK(t.rows[0].missing.count("survey.parents_income_bracket=$250k+") == 1);
  CHECK(t.value(0, "survey.gender_missing") == 0.0);
}

TEST_CASE("identical answers give identical vectors") {
  const Dataset d = three_people();
  const std::vector<SampleKey> keys{{1, 2}, {2, 2}};
  const auto t = extract_survey_features(d, age_is_numeric(), keys);
  // p1 and p2 differ only in the income answer.
  std::size_t differing = 0;
  for (std::size_t c = 0; c < t.width(); ++c) differing += t.rows[0].values[c] != t.rows[1].values[c];
  CHECK(differing == 2);
  const std::vector<SampleKey> twice{{1, 2}, {1, 2}};
  const auto same = extract_survey_features(d, age_is_numeric(), twice);
  CHECK(same.rows[0].values == same.rows[1].values);
}

TEST_CASE("non-numeric value of a numeric attribute") {
  Dataset d = three_people();
  Codebook cb;
  cb.set_type("gender", AttributeType::Numeric);
  const std::vector<SampleKey> keys{{0, 2}};
  CHECK_THROWS_AS(extract_survey_features(d, cb, keys), ValidationError);
}

TEST_CASE("topology features") {
  const Dataset d = three_people();
  const std::vector<SampleKey> keys{{0, 1}, {1, 1}, {2, 1}};
  CogsnetParams params;
  const auto t = extract_topology_features(d, params, keys);
  CHECK(t.width() == kCentralityKindCount);
  CHECK(std::is_sorted(t.names.begin(), t.names.end()));
  // The path p0 - p1 - p2 puts p1 in the middle.
  CHECK(t.value(1, "topo.betweenness") == doctest::Approx(1.0));
  CHECK(t.value(0, "topo.betweenness") == 0.0);
  CHECK(t.value(1, "topo.degree") > t.value(0, "topo.degree"));

  std::vector<WeightedGraph> too_few(2, WeightedGraph(3));
  CHECK_THROWS_AS(extract_topology_features(too_few, keys), ValidationError);
}

TEST_CASE("hybrid assembly") {
  const std::vector<SampleKey> keys{{0, 2}, {1, 2}, {2, 3}};
  const auto survey = fake_table(Pipeline::Survey, "survey.x", 10, keys);
  const auto topo = fake_table(Pipeline::Topology, "topo.x", 14, keys);
  const auto h = assemble_hybrid(survey, topo);
  CHECK(h.pipeline == Pipeline::Hybrid);
  CHECK(h.width() == 24);
  CHECK(h.rows[2].values.size() == 24);
  CHECK(h.rows[2].values.back() == 2.0);

  SUBCASE("an empty topology table contributes nothing") {
    const FeatureTable empty{Pipeline::Topology, {}, {}};
    CHECK(assemble_hybrid(survey, empty).width() == 10);
  }
  SUBCASE("key sets must match") {
    const std::vector<SampleKey> other{{0, 2}, {1, 2}, {2, 4}};
    CHECK_THROWS_AS(assemble_hybrid(survey, fake_table(Pipeline::Topology, "topo.x", 14, other)), ValidationError);
    const std::vector<SampleKey> fewer{{0, 2}};
    CHECK_THROWS_AS(assemble_hybrid(survey, fake_table(Pipeline::Topology, "topo.x", 14, fewer)), ValidationError);
  }
}

TEST_CASE("row selection and exports") {
  const Dataset d = three_people();
  const std::vector<SampleKey> keys{{0, 2}, {1, 2}, {2, 2}};
  const auto t = extract_survey_features(d, age_is_numeric(), keys);
  const std::vector<SampleKey> pick{{2, 2}, {0, 2}};
  const auto s = select_rows(t, pick);
  CHECK(s.rows[0].key == SampleKey{2, 2});
  const std::vector<SampleKey> absent{{1, 5}};
  CHECK_THROWS_AS(select_rows(t, absent), ValidationError);

  const auto m = t.matrix();
  CHECK(m.rows() == 3);
  CHECK(m.cols() == t.width());

  std::ostringstream csv;
  write_feature_csv(csv, t, d, Question::Euthanasia, "meta");
  CHECK(csv.str().rfind("# meta\n", 0) == 0);
  CHECK(csv.str().find("participant_id,question,wave,") != std::string::npos);
  const auto manifest = column_manifest(t);
  CHECK(manifest.dump().find("survey.age") != std::string::npos);
}
