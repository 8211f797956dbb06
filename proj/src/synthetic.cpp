#include "fairdyn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include <spdlog/spdlog.h>

#include "fairdyn/rng.hpp"

namespace fairdyn {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 4> kNonWhite = {"Black/African American", "Hispanic/Latino",
                                                  "Asian/Pacific Islander", "Other"};
constexpr std::array<const char*, 3> kNonGraduate = {"high_school", "some_college", "associate"};
constexpr std::array<const char*, 4> kOtherReligion = {"protestant", "jewish", "none", "other"};
constexpr std::array<const char*, 4> kResidence = {"north_quad", "south_quad", "west_quad", "off_campus"};

json group_targets_to_json(const GroupTargets& g) {
  json groups = json::object();
  for (const auto& [m, v] : g.groups) groups[std::string(config_key(m))] = v;
  return {{"base", g.base}, {"groups", groups}};
}

void group_targets_from_json(const json& obj, GroupTargets& g) {
  if (obj.is_null()) return;
  g.base = obj.value("base", g.base);
  if (obj.contains("groups")) {
    g.groups.clear();
    for (const auto& [key, value] : obj["groups"].items()) {
      auto m = parse_minority(key);
      if (!m) throw ValidationError("unknown minority \"" + key + "\" in synthetic targets");
      g.groups[*m] = value.get<double>();
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("infeasible synthetic config: " + what);
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Config

SyntheticConfig SyntheticConfig::defaults() {
  SyntheticConfig c;
  c.flag_correlations = {
      {Minority::Ethnicity, Minority::EnglishNative, 0.4},
      {Minority::Ethnicity, Minority::ParentsEducation, 0.3},
      {Minority::EnglishNative, Minority::ParentsEducation, 0.3},
      {Minority::Ethnicity, Minority::ParentsReligion, 0.2},
      {Minority::ParentsIncome, Minority::ParentsEducation, -0.2},
  };
  auto& eu = c.questions[index_of(Question::Euthanasia)];
  eu.misprediction = {0.425, {}};
  eu.intersectionality_slope = 0.0668;
  eu.volatility = {0.67, {{Minority::ParentsEducation, 1.11}}};
  eu.minority_pole = {0.30, {{Minority::ParentsReligion, 0.393}, {Minority::FBPrivacy, 0.355}}};

  auto& jg = c.questions[index_of(Question::JobGuar)];
  jg.misprediction = {0.4335, {{Minority::Ethnicity, 0.729}}};
  jg.intersectionality_slope = 0.03775;
  jg.volatility = {1.20, {{Minority::ParentsEducation, 1.57}}};

  auto& ss = c.questions[index_of(Question::FsSocSec)];
  ss.minority_pole = {0.051, {{Minority::Ethnicity, 0.172}}};
  return c;
}

SyntheticConfig SyntheticConfig::from_json(const json& obj) {
  SyntheticConfig c = defaults();
  if (obj.is_null()) return c;
  c.population = obj.value("population", c.population);
  if (obj.contains("minority_fractions")) {
    for (const auto& [key, value] : obj["minority_fractions"].items()) {
      auto m = parse_minority(key);
      if (!m) throw ValidationError("unknown minority \"" + key + "\" in minority_fractions");
      c.minority_fraction[index_of(*m)] = value.get<double>();
    }
  }
  c.income_unsure_fraction = obj.value("income_unsure_fraction", c.income_unsure_fraction);
  c.fbprivacy_absent_fraction = obj.value("fbprivacy_absent_fraction", c.fbprivacy_absent_fraction);
  if (obj.contains("flag_correlations")) {
    c.flag_correlations.clear();
    for (const auto& item : obj["flag_correlations"]) {
      auto a = parse_minority(item.at("a").get<std::string>());
      auto b = parse_minority(item.at("b").get<std::string>());
      if (!a || !b) throw ValidationError("unknown minority in flag_correlations");
      c.flag_correlations.push_back({*a, *b, item.at("rho").get<double>()});
    }
  }
  c.homophily = obj.value("homophily", c.homophily);
  c.mean_degree = obj.value("mean_degree", c.mean_degree);
  c.events_per_tie_per_day = obj.value("events_per_tie_per_day", c.events_per_tie_per_day);
  c.call_fraction = obj.value("call_fraction", c.call_fraction);
  c.dropout_hazard = obj.value("dropout_hazard", c.dropout_hazard);
  c.start_time = obj.value("start_time", c.start_time);
  c.warmup_days = obj.value("warmup_days", c.warmup_days);
  c.wave_spacing_days = obj.value("wave_spacing_days", c.wave_spacing_days);
  if (obj.contains("questions")) {
    for (const auto& [key, q] : obj["questions"].items()) {
      auto question = parse_question(key);
      if (!question) throw ValidationError("unknown question \"" + key + "\" in synthetic config");
      auto& t = c.questions[index_of(*question)];
      if (q.contains("minority_pole")) group_targets_from_json(q["minority_pole"], t.minority_pole);
      t.ab_rate = q.value("ab_rate", t.ab_rate);
      if (q.contains("misprediction")) group_targets_from_json(q["misprediction"], t.misprediction);
      t.intersectionality_slope = q.value("intersectionality_slope", t.intersectionality_slope);
      if (q.contains("volatility")) group_targets_from_json(q["volatility"], t.volatility);
    }
  }
  c.validate();
  return c;
}

json SyntheticConfig::to_json() const {
  json fractions = json::object();
  for (Minority m : kAllMinorities) fractions[std::string(config_key(m))] = minority_fraction[index_of(m)];
  json corr = json::array();
  for (const auto& fc : flag_correlations) {
    corr.push_back({{"a", std::string(config_key(fc.a))}, {"b", std::string(config_key(fc.b))}, {"rho", fc.rho}});
  }
  json qs = json::object();
  for (Question q : kAllQuestions) {
    const auto& t = questions[index_of(q)];
    qs[std::string(shortcode(q))] = {{"minority_pole", group_targets_to_json(t.minority_pole)},
                                     {"ab_rate", t.ab_rate},
                                     {"misprediction", group_targets_to_json(t.misprediction)},
                                     {"intersectionality_slope", t.intersectionality_slope},
                                     {"volatility", group_targets_to_json(t.volatility)}};
  }
  return {{"population", population},
          {"minority_fractions", fractions},
          {"income_unsure_fraction", income_unsure_fraction},
          {"fbprivacy_absent_fraction", fbprivacy_absent_fraction},
          {"flag_correlations", corr},
          {"homophily", homophily},
          {"mean_degree", mean_degree},
          {"events_per_tie_per_day", events_per_tie_per_day},
          {"call_fraction", call_fraction},
          {"dropout_hazard", dropout_hazard},
          {"start_time", start_time},
          {"warmup_days", warmup_days},
          {"wave_spacing_days", wave_spacing_days},
          {"questions", qs}};
}

void SyntheticConfig::validate() const {
  require(population >= 2, "population must be at least 2");
  for (Minority m : kAllMinorities) {
    require(in_unit(minority_fraction[index_of(m)]),
            "minority fraction for " + std::string(config_key(m)) + " must lie in [0, 1], got " +
                std::to_string(minority_fraction[index_of(m)]));
  }
  require(in_unit(income_unsure_fraction), "income_unsure_fraction must lie in [0, 1]");
  require(minority_fraction[index_of(Minority::ParentsIncome)] + income_unsure_fraction <= 1.0,
          "parents_income fraction plus income_unsure_fraction exceeds 1");
  require(in_unit(fbprivacy_absent_fraction), "fbprivacy_absent_fraction must lie in [0, 1]");
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(kMinorityCount, kMinorityCount);
  for (const auto& fc : flag_correlations) {
    require(fc.a != fc.b, "flag correlation of " + std::string(config_key(fc.a)) + " with itself");
    require(std::abs(fc.rho) < 1.0, "flag correlations must lie in (-1, 1)");
    R(index_of(fc.a), index_of(fc.b)) = fc.rho;
    R(index_of(fc.b), index_of(fc.a)) = fc.rho;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  require(llt.info() == Eigen::Success, "flag correlation matrix is not positive definite");
  require(homophily > 0.0, "homophily multiplier must be positive");
  require(mean_degree >= 0.0 && mean_degree <= static_cast<double>(population - 1),
          "mean_degree must lie in [0, population - 1]");
  require(events_per_tie_per_day >= 0.0, "events_per_tie_per_day must be non-negative");
  require(in_unit(call_fraction), "call_fraction must lie in [0, 1]");
  require(dropout_hazard >= 0.0 && dropout_hazard < 1.0, "dropout_hazard must lie in [0, 1)");
  require(start_time >= 0, "start_time must be non-negative");
  require(warmup_days >= 0, "warmup_days must be non-negative");
  require(wave_spacing_days >= 1, "wave_spacing_days must be at least 1");
  for (Question q : kAllQuestions) {
    const auto& t = questions[index_of(q)];
    const std::string name(shortcode(q));
    require(in_unit(t.ab_rate), name + ": ab_rate must lie in [0, 1]");
    require(in_unit(t.minority_pole.base) && t.minority_pole.base + t.ab_rate < 1.0,
            name + ": minority_pole.base + ab_rate must be below 1");
    for (const auto& [m, v] : t.minority_pole.groups) {
      require(in_unit(v) && v + t.ab_rate < 1.0,
              name + ": minority-pole target for " + std::string(config_key(m)) + " plus ab_rate must be below 1");
    }
    require(in_unit(t.misprediction.base), name + ": misprediction.base must lie in [0, 1]");
    for (const auto& [m, v] : t.misprediction.groups) {
      require(in_unit(v), name + ": misprediction target for " + std::string(config_key(m)) + " must lie in [0, 1]");
    }
    require(std::isfinite(t.intersectionality_slope), name + ": intersectionality_slope must be finite");
    const double max_changes = kWaveCount - 1;
    require(t.volatility.base >= 0.0 && t.volatility.base <= max_changes,
            name + ": volatility.base must lie in [0, 5]");
    for (const auto& [m, v] : t.volatility.groups) {
      require(v >= 0.0 && v <= max_changes,
              name + ": volatility target for " + std::string(config_key(m)) + " must lie in [0, 5]");
    }
  }
}

std::string SyntheticConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json().dump())));
  return buf;
}

WaveSchedule SyntheticConfig::wave_schedule() const {
  WaveSchedule w{};
  for (int k = 0; k < kWaveCount; ++k) {
    w[static_cast<std::size_t>(k)] =
        start_time + (static_cast<Timestamp>(warmup_days) + static_cast<Timestamp>(k) * wave_spacing_days) *
                         kSecondsPerDay;
  }
  return w;
}

FollowupPredictor persistence_predictor() {
  return [](const Dataset& data, Question q) {
    std::vector<std::array<Stance, kWaveCount>> out(data.size());
    for (NodeId v = 0; v < data.size(); ++v) out[v].fill(data.stance(v, q, 1));
    return out;
  };
}

Codebook synthetic_codebook() {
  Codebook cb;
  cb.set_type("age", AttributeType::Numeric);
  cb.set_type("political_interest", AttributeType::Numeric);
  for (const char* name : {attr::kGender, attr::kEthnicity, attr::kFbPrivacy, attr::kEnglishNative,
                           attr::kParentsIncome, attr::kMotherEducation, attr::kFatherEducation,
                           attr::kMotherReligion, attr::kFatherReligion, "residence"}) {
    cb.set_type(name, AttributeType::Categorical);
  }
  for (Question q : kAllQuestions) {
    cb.set_answer(q, "agree", Stance::A);
    cb.set_answer(q, "disagree", Stance::B);
    cb.set_answer(q, "neutral", Stance::AB);
  }
  return cb;
}

// ---------------------------------------------------------------------------
// Sequence model

namespace detail {

std::vector<double> tilted_sequence_distribution(Stance first, std::span<const Stance> predicted,
                                                 const std::array<double, 4>& targets,
                                                 std::array<double, 4>* theta_io, std::array<double, 4>* achieved) {
  const std::size_t len = predicted.size();
  std::size_t count = 1;
  for (std::size_t k = 0; k < len; ++k) count *= 3;

  // Statistics per sequence: mispredictions, changes, B count, AB count.
  Eigen::MatrixXd S(static_cast<Eigen::Index>(count), 4);
  for (std::size_t idx = 0; idx < count; ++idx) {
    double mis = 0, changes = 0, nb = 0, nab = 0;
    Stance prev = first;
    std::size_t rest = idx;
    std::size_t place = count / 3;
    for (std::size_t k = 0; k < len; ++k) {
      const auto s = static_cast<Stance>(rest / place);
      rest %= place;
      place = std::max<std::size_t>(place / 3, 1);
      mis += s != predicted[k];
      changes += s != prev;
      nb += s == Stance::B;
      nab += s == Stance::AB;
      prev = s;
    }
    S.row(static_cast<Eigen::Index>(idx)) << mis, changes, nb, nab;
  }

  // Dual of the maximum-entropy problem with a ridge that keeps the solution
  // finite when targets sit on or beyond the feasible boundary. The pole
  // counts get a much stronger ridge, so when the four targets conflict the
  // misprediction and change counts win.
  const Eigen::Vector4d ridge(1e-6, 1e-6, 2e-2, 2e-2);
  const Eigen::Vector4d t(targets[0], targets[1], targets[2], targets[3]);
  Eigen::Vector4d theta = Eigen::Vector4d::Zero();
  if (theta_io) theta = Eigen::Vector4d((*theta_io)[0], (*theta_io)[1], (*theta_io)[2], (*theta_io)[3]);

  Eigen::VectorXd p(static_cast<Eigen::Index>(count));
  auto objective = [&](const Eigen::Vector4d& th, Eigen::VectorXd& probs) {
    Eigen::VectorXd logits = S * th;
    const double top = logits.maxCoeff();
    probs = (logits.array() - top).exp();
    const double z = probs.sum();
    probs /= z;
    return std::log(z) + top - th.dot(t) + 0.5 * th.dot(ridge.cwiseProduct(th));
  };
  double f = objective(theta, p);
  for (int it = 0; it < 100; ++it) {
    const Eigen::Vector4d mean = S.transpose() * p;
    const Eigen::Vector4d grad = mean - t + ridge.cwiseProduct(theta);
    if (grad.cwiseAbs().maxCoeff() < 1e-10) break;
    Eigen::Matrix4d H = S.transpose() * (S.array().colwise() * p.array()).matrix();
    H -= mean * mean.transpose();
    H.diagonal() += ridge;
    const Eigen::Vector4d step = H.ldlt().solve(grad);
    double alpha = 1.0;
    Eigen::VectorXd trial_p(p.size());
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::Vector4d trial = theta - alpha * step;
      const double ft = objective(trial, trial_p);
      if (ft <= f - 1e-4 * alpha * grad.dot(step) || ft < f) {
        theta = trial;
        f = ft;
        p.swap(trial_p);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }
  if (theta_io) *theta_io = {theta[0], theta[1], theta[2], theta[3]};
  if (achieved) {
    const Eigen::Vector4d mean = S.transpose() * p;
    *achieved = {mean[0], mean[1], mean[2], mean[3]};
  }
  return {p.data(), p.data() + p.size()};
}

}  // namespace detail

namespace {

struct Person {
  std::array<bool, kMinorityCount> flags{};
  bool income_unsure = false;
  int k = 0;
  int last_wave = kWaveCount;  // waves 1..last_wave answered
};

std::vector<Person> sample_flags(const SyntheticConfig& c, std::uint64_t seed) {
  const std::size_t n = c.population;
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(kMinorityCount, kMinorityCount);
  for (const auto& fc : c.flag_correlations) {
    R(index_of(fc.a), index_of(fc.b)) = fc.rho;
    R(index_of(fc.b), index_of(fc.a)) = fc.rho;
  }
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(R).matrixL();
  Rng rng = make_rng(seed, "flags");
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kMinorityCount));
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd e(static_cast<Eigen::Index>(kMinorityCount));
    for (std::size_t f = 0; f < kMinorityCount; ++f) e[static_cast<Eigen::Index>(f)] = standard_normal(rng);
    Z.row(static_cast<Eigen::Index>(i)) = (L * e).transpose();
  }
  std::vector<Person> people(n);
  std::vector<std::size_t> order(n);
  for (std::size_t f = 0; f < kMinorityCount; ++f) {
    // Exact marginal count: the round(p n) largest latent values are flagged.
    const auto flagged = static_cast<std::size_t>(std::llround(c.minority_fraction[f] * static_cast<double>(n)));
    std::iota(order.begin(), order.end(), 0);
    const auto col = static_cast<Eigen::Index>(f);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return Z(static_cast<Eigen::Index>(a), col) > Z(static_cast<Eigen::Index>(b), col);
    });
    for (std::size_t r = 0; r < flagged; ++r) people[order[r]].flags[f] = true;
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (!people[i].flags[index_of(Minority::ParentsIncome)]) pool.push_back(i);
  }
  const auto unsure = std::min(
      pool.size(), static_cast<std::size_t>(std::llround(c.income_unsure_fraction * static_cast<double>(n))));
  for (std::size_t r = 0; r < unsure; ++r) {
    const auto j = r + uniform_index(rng, pool.size() - r);
    std::swap(pool[r], pool[j]);
    people[pool[r]].income_unsure = true;
  }
  for (auto& p : people) p.k = static_cast<int>(std::count(p.flags.begin(), p.flags.end(), true));
  return people;
}

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& options) {
  return options[uniform_index(rng, N)];
}

std::map<std::string, std::string> realize_attributes(const Person& p, const SyntheticConfig& c, Rng& rng) {
  auto has = [&p](Minority m) { return p.flags[index_of(m)]; };
  std::map<std::string, std::string> a;
  a[attr::kGender] = has(Minority::Gender) ? attr::kFemale : "male";
  a[attr::kEthnicity] = has(Minority::Ethnicity) ? pick(rng, kNonWhite) : attr::kWhite;
  if (has(Minority::FBPrivacy)) {
    if (!bernoulli(rng, c.fbprivacy_absent_fraction)) a[attr::kFbPrivacy] = "edited";
  } else {
    a[attr::kFbPrivacy] = attr::kFbDefault;
  }
  a[attr::kEnglishNative] = has(Minority::EnglishNative) ? "no" : "yes";
  if (has(Minority::ParentsIncome)) {
    a[attr::kParentsIncome] = attr::kIncomeBrackets[attr::kHighIncomeBracket + uniform_index(rng, 2)];
  } else if (p.income_unsure) {
    a[attr::kParentsIncome] = attr::kUnsure;
  } else {
    a[attr::kParentsIncome] = attr::kIncomeBrackets[uniform_index(rng, attr::kHighIncomeBracket)];
  }
  if (has(Minority::ParentsEducation)) {
    a[attr::kMotherEducation] = pick(rng, kNonGraduate);
    a[attr::kFatherEducation] = pick(rng, kNonGraduate);
  } else {
    // At least one parent graduated.
    const bool mother_grad = bernoulli(rng, 0.7);
    const bool father_grad = !mother_grad || bernoulli(rng, 0.6);
    a[attr::kMotherEducation] = mother_grad ? pick(rng, attr::kCollegeGraduate) : pick(rng, kNonGraduate);
    a[attr::kFatherEducation] = father_grad ? pick(rng, attr::kCollegeGraduate) : pick(rng, kNonGraduate);
  }
  if (has(Minority::ParentsReligion)) {
    const int which = static_cast<int>(uniform_index(rng, 3));  // mother, father, both
    a[attr::kMotherReligion] = which != 1 ? pick(rng, kOtherReligion) : attr::kRomanCatholic;
    a[attr::kFatherReligion] = which != 0 ? pick(rng, kOtherReligion) : attr::kRomanCatholic;
  } else {
    a[attr::kMotherReligion] = attr::kRomanCatholic;
    a[attr::kFatherReligion] = attr::kRomanCatholic;
  }
  a["age"] = std::to_string(18 + uniform_index(rng, 2));
  a["residence"] = pick(rng, kResidence);
  a["political_interest"] = std::to_string(1 + uniform_index(rng, 5));
  return a;
}

std::vector<RawEvent> sample_events(const std::vector<Person>& people, const std::vector<std::string>& ids,
                                    const SyntheticConfig& c, std::uint64_t seed) {
  const std::size_t n = people.size();
  const std::size_t pairs = n * (n - 1) / 2;
  const auto ties = std::min(pairs, static_cast<std::size_t>(std::llround(c.mean_degree * static_cast<double>(n) / 2)));
  if (ties == 0 || c.events_per_tie_per_day <= 0.0) return {};

  // Weighted sampling without replacement: the `ties` largest log(u)/affinity
  // keys.
  Rng rng = make_rng(seed, "ties");
  struct Keyed {
    double key;
    NodeId u, v;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(pairs);
  const double log_h = std::log(c.homophily);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      int shared = 0;
      for (std::size_t f = 0; f < kMinorityCount; ++f) shared += people[u].flags[f] && people[v].flags[f];
      const double affinity = std::exp(log_h * shared);
      double uu = uniform01(rng);
      if (uu <= 0.0) uu = 0x1.0p-53;
      keyed.push_back({std::log(uu) / affinity, u, v});
    }
  }
  std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(ties - 1), keyed.end(),
                   [](const Keyed& a, const Keyed& b) { return a.key > b.key; });
  keyed.resize(ties);
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });

  const Timestamp begin = c.start_time;
  const Timestamp end = c.wave_schedule().back();
  const double span_days = static_cast<double>(end - begin) / kSecondsPerDay;
  std::vector<RawEvent> events;
  std::uint64_t tie_index = 0;
  for (const auto& t : keyed) {
    Rng tr = make_rng(seed, "tie-events", tie_index++);
    const double rate = c.events_per_tie_per_day * std::exp(0.5 * standard_normal(tr) - 0.125);
    double day = 0.0;
    while (true) {
      day += -std::log1p(-uniform01(tr)) / rate;
      if (day >= span_days) break;
      const Timestamp ts = begin + static_cast<Timestamp>(day * kSecondsPerDay);
      const bool forward = bernoulli(tr, 0.5);
      const Channel ch = bernoulli(tr, c.call_fraction) ? Channel::Call : Channel::Text;
      events.push_back({ids[forward ? t.u : t.v], ids[forward ? t.v : t.u], ts, ch});
    }
  }
  return events;
}

// Linear response of group means to group offsets, then iterative correction
// against the achieved expectations.
class OffsetCalibrator {
 public:
  OffsetCalibrator(const GroupTargets& targets, const std::vector<Person>& people) : base_(targets.base) {
    for (const auto& [m, v] : targets.groups) {
      groups_.push_back(m);
      goal_.push_back(v);
    }
    x_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(groups_.size()));
    people_ = &people;
  }

  bool empty() const { return groups_.empty(); }

  /// Offset sum for a participant.
  double shift(std::size_t i) const {
    double s = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      if ((*people_)[i].flags[index_of(groups_[g])]) s += x_[static_cast<Eigen::Index>(g)];
    }
    return s;
  }
  double base() const { return base_; }

  /// `num[i]` is the participant's achieved contribution to the group mean's
  /// numerator, `den[i]` its weight, `slope[i]` d num / d shift.
  double update(const std::vector<double>& num, const std::vector<double>& den, const std::vector<double>& slope) {
    const auto G = static_cast<Eigen::Index>(groups_.size());
    if (G == 0) return 0.0;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(G, G);
    Eigen::VectorXd resid = Eigen::VectorXd::Zero(G);
    for (Eigen::Index g = 0; g < G; ++g) {
      double sum_num = 0.0, sum_den = 0.0;
      for (std::size_t i = 0; i < people_->size(); ++i) {
        if (!(*people_)[i].flags[index_of(groups_[static_cast<std::size_t>(g)])]) continue;
        sum_num += num[i];
        sum_den += den[i];
        for (Eigen::Index h = 0; h < G; ++h) {
          if ((*people_)[i].flags[index_of(groups_[static_cast<std::size_t>(h)])]) J(g, h) += slope[i];
        }
      }
      if (sum_den <= 0.0) {
        J.row(g).setZero();
        J(g, g) = 1.0;
        continue;
      }
      J.row(g) /= sum_den;
      resid[g] = goal_[static_cast<std::size_t>(g)] - sum_num / sum_den;
    }
    x_ += J.completeOrthogonalDecomposition().solve(resid);
    return resid.cwiseAbs().maxCoeff();
  }

 private:
  double base_;
  std::vector<Minority> groups_;
  std::vector<double> goal_;
  Eigen::VectorXd x_;
  const std::vector<Person>* people_;
};

std::vector<Stance> decode_sequence(std::size_t index, std::size_t len) {
  std::vector<Stance> seq(len);
  for (std::size_t k = len; k-- > 0;) {
    seq[k] = static_cast<Stance>(index % 3);
    index /= 3;
  }
  return seq;
}

std::vector<double> stratified_uniforms(const std::vector<Person>& people, Rng rng) {
  std::map<std::array<bool, kMinorityCount>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < people.size(); ++i) cells[people[i].flags].push_back(i);
  std::vector<double> u(people.size());
  for (auto& [flags, members] : cells) {
    const std::size_t m = members.size();
    for (std::size_t r = m; r > 1; --r) std::swap(members[r - 1], members[uniform_index(rng, r)]);
    for (std::size_t r = 0; r < m; ++r) u[members[r]] = (static_cast<double>(r) + uniform01(rng)) / static_cast<double>(m);
  }
  return u;
}

// Inverse-CDF draw in three stages: change count from u_changes, then
// misprediction count given it from u_mis, then the sequence within that
// class from u_rest.
std::vector<Stance> draw_sequence(Stance first, std::span<const Stance> predicted, const std::vector<double>& dist,
                                  double u_changes, double u_mis, double u_rest) {
  const std::size_t len = predicted.size();
  std::vector<int> changes(dist.size()), mis(dist.size());
  for (std::size_t idx = 0; idx < dist.size(); ++idx) {
    const auto seq = decode_sequence(idx, len);
    Stance prev = first;
    for (std::size_t k = 0; k < len; ++k) {
      changes[idx] += seq[k] != prev;
      mis[idx] += seq[k] != predicted[k];
      prev = seq[k];
    }
  }
  auto invert = [](const std::vector<double>& mass, double u) {
    double total = 0.0;
    for (double x : mass) total += x;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t v = 0; v < mass.size(); ++v) {
      if (mass[v] <= 0.0) continue;
      last = v;
      acc += mass[v];
      if (u * total < acc) return v;
    }
    return last;
  };
  std::vector<double> by_changes(len + 1, 0.0), by_mis(len + 1, 0.0);
  for (std::size_t idx = 0; idx < dist.size(); ++idx) by_changes[static_cast<std::size_t>(changes[idx])] += dist[idx];
  const auto c = static_cast<int>(invert(by_changes, u_changes));
  for (std::size_t idx = 0; idx < dist.size(); ++idx) {
    if (changes[idx] == c) by_mis[static_cast<std::size_t>(mis[idx])] += dist[idx];
  }
  const auto m = static_cast<int>(invert(by_mis, u_mis));
  std::vector<double> within(dist.size(), 0.0);
  for (std::size_t idx = 0; idx < dist.size(); ++idx) {
    if (changes[idx] == c && mis[idx] == m) within[idx] = dist[idx];
  }
  return decode_sequence(invert(within, u_rest), len);
}

std::string padded_id(std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n).size();
  std::string digits = std::to_string(i + 1);
  return "P" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed, const FollowupPredictor& predictor) {
  config.validate();
  const std::size_t n = config.population;
  const WaveSchedule waves = config.wave_schedule();
  std::vector<Person> people = sample_flags(config, seed);

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = padded_id(i, n);

  {
    Rng rng = make_rng(seed, "dropout");
    for (auto& p : people) {
      p.last_wave = 1;
      while (p.last_wave < kWaveCount && !bernoulli(rng, config.dropout_hazard)) ++p.last_wave;
    }
  }

  std::vector<Participant> participants(n);
  {
    Rng rng = make_rng(seed, "attributes");
    for (std::size_t i = 0; i < n; ++i) {
      participants[i].id = ids[i];
      const auto attrs = realize_attributes(people[i], config, rng);
      for (int w = 1; w <= people[i].last_wave; ++w) participants[i].survey[static_cast<std::size_t>(w - 1)] = attrs;
    }
  }
  const std::vector<RawEvent> events = sample_events(people, ids, config, seed);

  // Wave-1 stances, with pole offsets solved as if every answer followed the
  // participant's rate.
  std::array<std::vector<Stance>, 6> first{};
  std::vector<OffsetCalibrator> pole;
  for (Question q : kAllQuestions) pole.emplace_back(config.questions[index_of(q)].minority_pole, people);
  auto pole_rate = [&](std::size_t q, std::size_t i) {
    return std::clamp(pole[q].base() + pole[q].shift(i), 0.01, 0.95);
  };
  std::vector<OpinionRecord> wave1;
  for (Question q : kAllQuestions) {
    const std::size_t qi = index_of(q);
    std::vector<double> num(n), den(n), slope(n);
    for (int round = 0; round < 20; ++round) {
      for (std::size_t i = 0; i < n; ++i) {
        num[i] = pole_rate(qi, i) * people[i].last_wave;
        den[i] = people[i].last_wave;
        slope[i] = people[i].last_wave;
      }
      if (pole[qi].update(num, den, slope) < 1e-12) break;
    }
    Rng rng = make_rng(seed, "wave1", qi);
    first[qi].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double pb = pole_rate(qi, i);
      const double pab = std::min(config.questions[qi].ab_rate, 0.99 - pb);
      const double u = uniform01(rng);
      first[qi][i] = u < pb ? Stance::B : (u < pb + pab ? Stance::AB : Stance::A);
      wave1.push_back({ids[i], q, 1, first[qi][i]});
    }
  }

  const Provenance provenance{true, seed, config.hash()};
  const Dataset wave1_only = Dataset::build(participants, events, wave1, waves, provenance);

  std::vector<OpinionRecord> opinions = wave1;
  for (Question q : kAllQuestions) {
    const std::size_t qi = index_of(q);
    const QuestionTargets& t = config.questions[qi];
    const auto predicted = predictor(wave1_only, q);
    if (predicted.size() != n) throw ValidationError("follow-up predictor returned the wrong participant count");

    OffsetCalibrator mis(t.misprediction, people);
    OffsetCalibrator vol(t.volatility, people);
    std::vector<std::array<double, 4>> theta(n, std::array<double, 4>{});
    std::vector<std::array<double, 4>> achieved(n);
    std::vector<std::vector<double>> dist(n);

    // Participants are independent, so the solve parallelizes without
    // affecting the result.
    auto solve_all = [&] {
#pragma omp parallel for schedule(dynamic, 16)
      for (std::size_t i = 0; i < n; ++i) {
        const int len = people[i].last_wave - 1;
        if (len == 0) continue;
        const double K = len;
        const double m = std::clamp(mis.base() + t.intersectionality_slope * people[i].k + mis.shift(i), 0.02, 0.98);
        const double c = std::clamp((vol.base() + vol.shift(i)) / (kWaveCount - 1), 0.02, 0.98);
        const double b = pole_rate(qi, i);
        const double ab = std::clamp(t.ab_rate, 0.01, 0.98 - b);
        const std::span<const Stance> pred(predicted[i].data() + 1, static_cast<std::size_t>(len));
        dist[i] = detail::tilted_sequence_distribution(first[qi][i], pred, {m * K, c * K, b * K, ab * K}, &theta[i],
                                                       &achieved[i]);
      }
    };

    std::vector<double> num(n), den(n), slope(n);
    for (int round = 0; round < 12; ++round) {
      solve_all();
      double worst = 0.0;
      if (!mis.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
          const double K = people[i].last_wave - 1;
          num[i] = achieved[i][0] * (K > 0);
          den[i] = K;
          slope[i] = K;
        }
        worst = std::max(worst, mis.update(num, den, slope));
      }
      if (!vol.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
          const double K = people[i].last_wave - 1;
          num[i] = K > 0 ? achieved[i][1] : 0.0;
          den[i] = K > 0 ? 1.0 : 0.0;
          slope[i] = K / (kWaveCount - 1);
        }
        worst = std::max(worst, vol.update(num, den, slope));
      }
      if (!pole[qi].empty()) {
        for (std::size_t i = 0; i < n; ++i) {
          const double K = people[i].last_wave - 1;
          num[i] = (first[qi][i] == Stance::B) + (K > 0 ? achieved[i][2] : 0.0);
          den[i] = people[i].last_wave;
          slope[i] = K;
        }
        worst = std::max(worst, pole[qi].update(num, den, slope));
      }
      spdlog::debug("synthetic {}: calibration round {} residual {:.2e}", shortcode(q), round, worst);
      if (worst < 1e-4) break;
    }
    solve_all();

    // Latin hypercube draws within each cell of identical flag vectors: every
    // participant's u is still marginally uniform, but the u values inside a
    // cell are stratified, which shrinks the sampling noise of group means.
    const auto strata_changes = stratified_uniforms(people, make_rng(seed, "followup-strata-c", qi));
    const auto strata_mis = stratified_uniforms(people, make_rng(seed, "followup-strata-m", qi));
    for (std::size_t i = 0; i < n; ++i) {
      const int len = people[i].last_wave - 1;
      Rng rng = make_rng(seed, "followup", qi * n + i);
      if (len > 0) {
        const std::span<const Stance> pred(predicted[i].data() + 1, static_cast<std::size_t>(len));
        const auto seq = draw_sequence(first[qi][i], pred, dist[i], strata_changes[i], strata_mis[i], uniform01(rng));
        for (int w = 2; w <= people[i].last_wave; ++w) {
          opinions.push_back({ids[i], q, w, seq[static_cast<std::size_t>(w - 2)]});
        }
      }
      for (int w = people[i].last_wave + 1; w <= kWaveCount; ++w) opinions.push_back({ids[i], q, w, Stance::Missing});
    }
  }
  return Dataset::build(std::move(participants), events, std::move(opinions), waves, provenance);
}

}  // namespace fairdyn
