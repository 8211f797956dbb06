#include "eda_fixture.hpp"

#include <map>
#include <optional>
#include <set>

#include "fairdyn/fairness.hpp"

namespace fairdyn::fixture {

namespace {

using M = Minority;

// Minority flags per participant (intersection count in brackets):
//   p0 -          [0]    p5 Eth            [1]
//   p1 Gen Eth Ed [3]    p6 Ed             [1]
//   p2 Ed         [1]    p7 Gen Eth        [2]
//   p3 Gen Eth FB En Ed [5]   p8 -         [0]
//   p4 -          [0]    p9 Eth            [1]
const std::map<std::string, std::set<M>> kFlags{
    {"p0", {}},
    {"p1", {M::Gender, M::Ethnicity, M::ParentsEducation}},
    {"p2", {M::ParentsEducation}},
    {"p3", {M::Gender, M::Ethnicity, M::FBPrivacy, M::EnglishNative, M::ParentsEducation}},
    {"p4", {}},
    {"p5", {M::Ethnicity}},
    {"p6", {M::ParentsEducation}},
    {"p7", {M::Gender, M::Ethnicity}},
    {"p8", {}},
    {"p9", {M::Ethnicity}},
};

// jobguar answers, waves 1..6. "-" is Missing.
//   p0 A  A  A  A  A  A    changes 0
//   p1 A  B  A  B  A  B    changes 5
//   p2 A  -  B  B  -  A    changes 0 (gaps break adjacency)
//   p3 B  B  AB AB A  A    changes 2
//   p4 -  -  -  -  -  A    one answer, not counted
//   p5 AB A  AB A  -  -    changes 3
//   p6 B  B  B  B  B  B    changes 0
//   p7 A  AB B  AB A  AB   changes 5
//   p8 -  -  -  -  -  -
//   p9 B  A  -  A  B  -    changes 2
const std::map<std::string, std::array<const char*, 6>> kAnswers{
    {"p0", {"A", "A", "A", "A", "A", "A"}},  {"p1", {"A", "B", "A", "B", "A", "B"}},
    {"p2", {"A", "", "B", "B", "", "A"}},    {"p3", {"B", "B", "AB", "AB", "A", "A"}},
    {"p4", {"", "", "", "", "", "A"}},       {"p5", {"AB", "A", "AB", "A", "", ""}},
    {"p6", {"B", "B", "B", "B", "B", "B"}},  {"p7", {"A", "AB", "B", "AB", "A", "AB"}},
    {"p8", {"", "", "", "", "", ""}},        {"p9", {"B", "A", "", "A", "B", ""}},
};

// (participant, wave, mispredicted)
struct LabelledWave {
  const char* id;
  int wave;
  bool target;
};

const std::vector<LabelledWave> kSamples{
    {"p0", 2, false}, {"p0", 3, false},                                      //
    {"p1", 2, true},  {"p1", 3, true},  {"p1", 4, false},                    //
    {"p2", 4, true},                                                         //
    {"p3", 2, true},  {"p3", 3, true},  {"p3", 4, true},  {"p3", 5, false},  //
    {"p5", 2, false}, {"p5", 4, true},                                       //
    {"p6", 2, false},                                                        //
    {"p7", 2, true},  {"p7", 3, false},                                      //
    {"p9", 2, true},  {"p9", 4, true},
};

Participant make_participant(const std::string& id, const std::set<M>& flags) {
  auto has = [&](M m) { return flags.count(m) > 0; };
  Participant p;
  p.id = id;
  auto& w1 = p.survey[0];
  w1[attr::kGender] = has(M::Gender) ? "female" : "male";
  w1[attr::kEthnicity] = has(M::Ethnicity) ? "Asian" : attr::kWhite;
  w1[attr::kFbPrivacy] = has(M::FBPrivacy) ? "custom" : attr::kFbDefault;
  w1[attr::kEnglishNative] = has(M::EnglishNative) ? "no" : "yes";
  w1[attr::kParentsIncome] = has(M::ParentsIncome) ? "$250k+" : "$50k-$60k";
  const char* education = has(M::ParentsEducation) ? "high_school" : "bachelors";
  w1[attr::kMotherEducation] = education;
  w1[attr::kFatherEducation] = education;
  const char* religion = has(M::ParentsReligion) ? "protestant" : attr::kRomanCatholic;
  w1[attr::kMotherReligion] = religion;
  w1[attr::kFatherReligion] = religion;
  return p;
}

class Checker {
 public:
  void equal(const std::string& what, std::optional<double> got, double want) {
    ++result.comparisons;
    if (!got || *got != want) {
      result.failures.push_back(what + ": got " + (got ? std::to_string(*got) : "none") + ", want " +
                                std::to_string(want));
    }
  }
  void equal_size(const std::string& what, std::size_t got, std::size_t want) {
    ++result.comparisons;
    if (got != want) {
      result.failures.push_back(what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
    }
  }
  void truth(const std::string& what, bool ok) {
    ++result.comparisons;
    if (!ok) result.failures.push_back(what);
  }

  FixtureCheck result;
};

const GroupStat* group(const std::vector<GroupStat>& groups, std::optional<M> m, bool complement = false) {
  for (const auto& g : groups) {
    if (g.group.minority == m && g.group.complement == complement) return &g;
  }
  return nullptr;
}

std::optional<double> value(const std::vector<GroupStat>& groups, std::optional<M> m, bool complement = false) {
  const auto* g = group(groups, m, complement);
  return g ? g->value : std::nullopt;
}

}  // namespace

Dataset eda_dataset() {
  std::vector<Participant> people;
  std::vector<OpinionRecord> opinions;
  for (const auto& [id, flags] : kFlags) {
    people.push_back(make_participant(id, flags));
    const auto& answers = kAnswers.at(id);
    for (int w = 1; w <= kWaveCount; ++w) {
      const auto s = *parse_stance(answers[static_cast<std::size_t>(w - 1)]);
      if (s != Stance::Missing) opinions.push_back({id, Question::JobGuar, w, s});
    }
  }
  WaveSchedule waves{};
  for (int w = 0; w < kWaveCount; ++w) waves[static_cast<std::size_t>(w)] = 1'000'000 + w * 10'000;
  return Dataset::build(std::move(people), {}, std::move(opinions), waves, {});
}

std::vector<MisclassificationSample> eda_samples(const Dataset& data) {
  std::vector<MisclassificationSample> out;
  for (const auto& s : kSamples) {
    const NodeId node = *data.find(s.id);
    const Stance truth = data.stance(node, Question::JobGuar, s.wave);
    const Stance predicted = s.target ? (truth == Stance::A ? Stance::B : Stance::A) : truth;
    out.push_back({node, Question::JobGuar, s.wave, s.target, truth, predicted});
  }
  return out;
}

FixtureCheck check_eda_fixture() {
  const Dataset data = eda_dataset();
  const auto members = derive_minorities(data);
  const auto samples = eda_samples(data);
  const Question q = Question::JobGuar;
  Checker c;

  const std::array<int, 10> counts{0, 3, 1, 5, 0, 1, 1, 2, 0, 1};
  for (NodeId v = 0; v < data.size(); ++v) {
    c.equal_size("intersection count of " + data.id(v), static_cast<std::size_t>(members[v].intersection_count),
                 static_cast<std::size_t>(counts[v]));
    for (M m : kAllMinorities) {
      c.truth("flag " + std::string(to_string(m)) + " of " + data.id(v),
              members[v].holds(m) == (kFlags.at(data.id(v)).count(m) > 0));
    }
  }

  // Volatility: counted participants p0 p1 p2 p3 p5 p6 p7 p9 with changes
  // 0 5 0 2 3 0 5 2.
  const auto vol = opinion_volatility(data, members, q).groups;
  c.equal("volatility general", value(vol, std::nullopt), 17.0 / 8.0);
  c.equal_size("volatility general n", group(vol, std::nullopt)->n, 8);
  c.equal("volatility Ethnicity", value(vol, M::Ethnicity), 17.0 / 5.0);
  c.equal("volatility non-Ethnicity", value(vol, M::Ethnicity, true), 0.0);
  c.equal("volatility ParentsEducation", value(vol, M::ParentsEducation), 7.0 / 4.0);
  c.equal("volatility non-ParentsEducation", value(vol, M::ParentsEducation, true), 10.0 / 4.0);
  c.equal("volatility Gender", value(vol, M::Gender), 12.0 / 3.0);
  c.equal("volatility non-Gender", value(vol, M::Gender, true), 5.0 / 5.0);
  c.truth("volatility ParentsIncome has no members", !value(vol, M::ParentsIncome).has_value());

  // Pooled answers: A 20, B 16, AB 7 of 43, so B is the minority pole.
  const auto rate = minority_opinion_rate(data, members, q);
  c.truth("minority stance is B", rate.minority_stance == Stance::B);
  c.equal("minority rate general", value(rate.groups, std::nullopt), 16.0 / 43.0);
  c.equal_size("minority rate general n", group(rate.groups, std::nullopt)->n, 43);
  c.equal("minority rate Ethnicity", value(rate.groups, M::Ethnicity), 8.0 / 26.0);
  c.equal("minority rate non-Ethnicity", value(rate.groups, M::Ethnicity, true), 8.0 / 17.0);
  c.equal("minority rate ParentsEducation", value(rate.groups, M::ParentsEducation), 13.0 / 22.0);
  c.equal("minority rate non-ParentsEducation", value(rate.groups, M::ParentsEducation, true), 3.0 / 21.0);
  c.equal("minority rate Gender", value(rate.groups, M::Gender), 6.0 / 18.0);

  MinorityOpinionOptions per_person;
  per_person.aggregation = Aggregation::PerParticipant;
  const auto rate_pp = minority_opinion_rate(data, members, q, per_person);
  const double pp_sum =
      0.0 + 0.0 / 6 + 3.0 / 6 + 2.0 / 4 + 2.0 / 6 + 0.0 / 1 + 0.0 / 4 + 6.0 / 6 + 1.0 / 6 + 2.0 / 4;
  c.equal("minority rate per participant general", value(rate_pp.groups, std::nullopt), pp_sum / 9.0);
  c.equal_size("minority rate per participant n", group(rate_pp.groups, std::nullopt)->n, 9);

  MinorityOpinionOptions with_ab;
  with_ab.count_ab = true;
  const auto rate_ab = minority_opinion_rate(data, members, q, with_ab);
  c.truth("AB is the minority stance when counted", rate_ab.minority_stance == Stance::AB);
  c.equal("AB rate general", value(rate_ab.groups, std::nullopt), 7.0 / 43.0);
  c.equal("AB rate Ethnicity", value(rate_ab.groups, M::Ethnicity), 7.0 / 26.0);
  c.equal("AB rate non-Ethnicity", value(rate_ab.groups, M::Ethnicity, true), 0.0);

  MinorityOpinionOptions first_wave;
  first_wave.wave = 1;
  const auto rate_w1 = minority_opinion_rate(data, members, q, first_wave);
  c.truth("wave-1 minority stance is B", rate_w1.minority_stance == Stance::B);
  c.equal("wave-1 minority rate general", value(rate_w1.groups, std::nullopt), 3.0 / 8.0);

  // 17 samples, 10 mispredicted.
  const auto mis = baseline_misprediction_rate(samples, members, q).groups;
  c.equal("misprediction general", value(mis, std::nullopt), 10.0 / 17.0);
  c.equal_size("misprediction general n", group(mis, std::nullopt)->n, 17);
  c.equal("misprediction Ethnicity", value(mis, M::Ethnicity), 9.0 / 13.0);
  c.equal("misprediction non-Ethnicity", value(mis, M::Ethnicity, true), 1.0 / 4.0);
  c.equal("misprediction ParentsEducation", value(mis, M::ParentsEducation), 6.0 / 9.0);
  c.equal("misprediction non-ParentsEducation", value(mis, M::ParentsEducation, true), 4.0 / 8.0);
  c.equal("misprediction Gender", value(mis, M::Gender), 6.0 / 9.0);

  const auto mis_pp = baseline_misprediction_rate(samples, members, q, Aggregation::PerParticipant).groups;
  const double mis_pp_sum = 0.0 + 0.0 / 2 + 2.0 / 3 + 1.0 / 1 + 3.0 / 4 + 1.0 / 2 + 0.0 / 1 + 1.0 / 2 + 2.0 / 2;
  c.equal("misprediction per participant general", value(mis_pp, std::nullopt), mis_pp_sum / 8.0);

  const auto curve = misprediction_by_intersectionality(samples, members, q);
  const std::vector<std::tuple<int, double, std::size_t>> expected_curve{
      {0, 0.0 / 2.0, 2}, {1, 4.0 / 6.0, 6}, {2, 1.0 / 2.0, 2}, {3, 2.0 / 3.0, 3}, {5, 3.0 / 4.0, 4}};
  c.equal_size("intersectionality points", curve.points.size(), expected_curve.size());
  for (std::size_t i = 0; i < std::min(curve.points.size(), expected_curve.size()); ++i) {
    const auto& [k, r, n] = expected_curve[i];
    c.equal_size("intersectionality k at " + std::to_string(i), static_cast<std::size_t>(curve.points[i].k),
                 static_cast<std::size_t>(k));
    c.equal("intersectionality rate k=" + std::to_string(k), curve.points[i].rate, r);
    c.equal_size("intersectionality n k=" + std::to_string(k), curve.points[i].n, n);
  }
  return c.result;
}

}  // namespace fairdyn::fixture
