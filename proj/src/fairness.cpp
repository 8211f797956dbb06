#include "fairdyn/fairness.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "fairdyn/csv.hpp"

namespace fairdyn {

using nlohmann::json;

std::string_view to_string(Aggregation a) noexcept {
  return a == Aggregation::PerSample ? "per_sample" : "per_participant";
}

std::optional<Aggregation> parse_aggregation(std::string_view s) noexcept {
  if (s == "per_sample") return Aggregation::PerSample;
  if (s == "per_participant") return Aggregation::PerParticipant;
  return std::nullopt;
}

std::string GroupKey::label() const {
  if (!minority) return "general";
  return (complement ? "non-" : "") + std::string(to_string(*minority));
}

bool GroupKey::contains(const MinorityMembership& m) const noexcept {
  if (!minority) return true;
  return m.holds(*minority) != complement;
}

std::vector<GroupKey> standard_groups() {
  std::vector<GroupKey> out{GroupKey{}};
  for (Minority m : kAllMinorities) {
    out.push_back({m, false});
    out.push_back({m, true});
  }
  return out;
}

namespace {

void check_memberships(std::size_t population, std::span<const MinorityMembership> memberships) {
  if (memberships.size() != population) {
    throw ValidationError("membership table has " + std::to_string(memberships.size()) + " rows for " +
                          std::to_string(population) + " participants");
  }
}

/// Accumulates hits/trials per participant, then reduces per group.
class GroupAccumulator {
 public:
  explicit GroupAccumulator(std::size_t population) : hits_(population, 0.0), trials_(population, 0.0) {}

  void add(NodeId participant, double hit) {
    hits_[participant] += hit;
    trials_[participant] += 1.0;
  }

  std::vector<GroupStat> reduce(std::span<const MinorityMembership> memberships, Aggregation aggregation) const {
    std::vector<GroupStat> out;
    for (const auto& g : standard_groups()) {
      double hits = 0.0, trials = 0.0, rate_sum = 0.0;
      std::size_t people = 0;
      for (std::size_t i = 0; i < hits_.size(); ++i) {
        if (trials_[i] == 0.0 || !g.contains(memberships[i])) continue;
        hits += hits_[i];
        trials += trials_[i];
        rate_sum += hits_[i] / trials_[i];
        ++people;
      }
      GroupStat s{g, std::nullopt, 0};
      if (aggregation == Aggregation::PerSample) {
        s.n = static_cast<std::size_t>(trials);
        if (trials > 0) s.value = hits / trials;
      } else {
        s.n = people;
        if (people > 0) s.value = rate_sum / static_cast<double>(people);
      }
      out.push_back(s);
    }
    return out;
  }

 private:
  std::vector<double> hits_;
  std::vector<double> trials_;
};

}  // namespace

MinorityOpinionResult minority_opinion_rate(const Dataset& data, std::span<const MinorityMembership> memberships,
                                            Question q, const MinorityOpinionOptions& options) {
  check_memberships(data.size(), memberships);
  if (options.wave && (*options.wave < 1 || *options.wave > kWaveCount)) {
    throw ValidationError("wave " + std::to_string(*options.wave) + " out of range");
  }
  const int first = options.wave.value_or(1);
  const int last = options.wave.value_or(kWaveCount);
  std::array<std::size_t, 3> counts{};
  for (NodeId v = 0; v < data.size(); ++v) {
    for (int w = first; w <= last; ++w) {
      const Stance s = data.stance(v, q, w);
      if (s != Stance::Missing) ++counts[static_cast<std::size_t>(s)];
    }
  }
  if (counts[0] + counts[1] + counts[2] == 0) {
    throw ValidationError("no answers for question " + std::string(shortcode(q)));
  }
  const std::size_t a = counts[0], b = counts[1], ab = counts[2];
  Stance pole = a < b ? Stance::A : Stance::B;
  if (options.count_ab && ab < std::min(a, b)) pole = Stance::AB;

  GroupAccumulator acc(data.size());
  for (NodeId v = 0; v < data.size(); ++v) {
    for (int w = first; w <= last; ++w) {
      const Stance s = data.stance(v, q, w);
      if (s != Stance::Missing) acc.add(v, s == pole ? 1.0 : 0.0);
    }
  }
  return {q, pole, acc.reduce(memberships, options.aggregation)};
}

std::optional<int> count_changes(std::span<const Stance> waves) {
  int answered = 0, changes = 0;
  for (std::size_t i = 0; i < waves.size(); ++i) {
    if (waves[i] == Stance::Missing) continue;
    ++answered;
    if (i > 0 && waves[i - 1] != Stance::Missing && waves[i - 1] != waves[i]) ++changes;
  }
  if (answered < 2) return std::nullopt;
  return changes;
}

VolatilityResult opinion_volatility(const Dataset& data, std::span<const MinorityMembership> memberships, Question q) {
  check_memberships(data.size(), memberships);
  std::vector<std::optional<int>> changes(data.size());
  for (NodeId v = 0; v < data.size(); ++v) {
    std::array<Stance, kWaveCount> seq{};
    for (int w = 1; w <= kWaveCount; ++w) seq[static_cast<std::size_t>(w - 1)] = data.stance(v, q, w);
    changes[v] = count_changes(seq);
  }
  VolatilityResult r{q, {}};
  for (const auto& g : standard_groups()) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < changes.size(); ++i) {
      if (!changes[i] || !g.contains(memberships[i])) continue;
      sum += *changes[i];
      ++n;
    }
    r.groups.push_back({g, n > 0 ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt, n});
  }
  return r;
}

MispredictionResult baseline_misprediction_rate(std::span<const MisclassificationSample> samples,
                                                std::span<const MinorityMembership> memberships, Question q,
                                                Aggregation aggregation) {
  GroupAccumulator acc(memberships.size());
  std::size_t used = 0;
  for (const auto& s : samples) {
    if (s.question != q) continue;
    if (s.participant >= memberships.size()) throw ValidationError("sample participant has no membership row");
    acc.add(s.participant, s.target ? 1.0 : 0.0);
    ++used;
  }
  if (used == 0) throw ValidationError("no misclassification samples for question " + std::string(shortcode(q)));
  return {q, acc.reduce(memberships, aggregation)};
}

IntersectionalityCurve misprediction_by_intersectionality(std::span<const MisclassificationSample> samples,
                                                          std::span<const MinorityMembership> memberships,
                                                          Question q) {
  std::map<int, std::pair<std::size_t, std::size_t>> by_k;  // k -> (mispredicted, n)
  for (const auto& s : samples) {
    if (s.question != q) continue;
    if (s.participant >= memberships.size()) throw ValidationError("sample participant has no membership row");
    auto& cell = by_k[memberships[s.participant].intersection_count];
    cell.first += s.target ? 1 : 0;
    ++cell.second;
  }
  IntersectionalityCurve c{q, {}};
  for (const auto& [k, cell] : by_k) {
    c.points.push_back({k, static_cast<double>(cell.first) / static_cast<double>(cell.second), cell.second});
  }
  return c;
}

// ---------------------------------------------------------------------------
// Published reference values

namespace {

constexpr std::array<double, 6> kSurveyStratifiedRf = {0.5602, 0.5708, 0.5892, 0.5318, 0.5757, 0.5678};
constexpr std::array<double, 6> kTopologyDecisionTree = {0.5524, 0.4555, 0.4410, 0.5244, 0.5241, 0.6225};
constexpr std::array<double, 6> kHybridStratifiedRf = {0.5147, 0.4839, 0.6021, 0.5161, 0.7327, 0.5835};

struct SubgroupQuote {
  Pipeline pipeline;
  Question question;
  Minority minority;
  double f1;
};

constexpr std::array<SubgroupQuote, 22> kSubgroupQuotes = {{
    {Pipeline::Survey, Question::Euthanasia, Minority::FBPrivacy, 0.806},
    {Pipeline::Survey, Question::FsWelfare, Minority::FBPrivacy, 0.750},
    {Pipeline::Survey, Question::Marijuana, Minority::ParentsIncome, 0.825},
    {Pipeline::Survey, Question::FsSocSec, Minority::ParentsIncome, 0.775},
    {Pipeline::Survey, Question::Euthanasia, Minority::ParentsIncome, 0.743},
    {Pipeline::Survey, Question::JobGuar, Minority::ParentsEducation, 0.869},
    {Pipeline::Survey, Question::TooMuchEqRights, Minority::ParentsEducation, 0.704},
    {Pipeline::Topology, Question::FsSocSec, Minority::Gender, 0.730},
    {Pipeline::Topology, Question::FsWelfare, Minority::Ethnicity, 0.737},
    {Pipeline::Topology, Question::TooMuchEqRights, Minority::FBPrivacy, 0.000},
    {Pipeline::Hybrid, Question::Euthanasia, Minority::FBPrivacy, 0.806},
    {Pipeline::Hybrid, Question::Marijuana, Minority::FBPrivacy, 0.746},
    {Pipeline::Hybrid, Question::FsWelfare, Minority::FBPrivacy, 0.500},
    {Pipeline::Hybrid, Question::TooMuchEqRights, Minority::FBPrivacy, 0.590},
    {Pipeline::Hybrid, Question::FsSocSec, Minority::ParentsIncome, 1.000},
    {Pipeline::Hybrid, Question::Euthanasia, Minority::ParentsIncome, 0.378},
    {Pipeline::Hybrid, Question::Marijuana, Minority::ParentsIncome, 0.571},
    {Pipeline::Hybrid, Question::JobGuar, Minority::ParentsEducation, 0.733},
    {Pipeline::Hybrid, Question::Euthanasia, Minority::Ethnicity, 0.810},
    {Pipeline::Hybrid, Question::TooMuchEqRights, Minority::ParentsReligion, 0.742},
    {Pipeline::Hybrid, Question::FsSocSec, Minority::Ethnicity, 0.364},
    {Pipeline::Hybrid, Question::JobGuar, Minority::Ethnicity, 0.433},
}};

std::vector<EdaReference> build_eda_references() {
  auto group = [](Minority m, bool complement = false) { return GroupKey{m, complement}; };
  const std::string rate = "published minority opinion rate (non-binding)";
  const std::string vol = "published mean opinion changes (non-binding)";
  const std::string mis = "published CoDiNG misprediction rate (non-binding)";
  const std::string inter = "published misprediction rate by intersection count (non-binding)";
  return {
      {"minority_opinion_rate", Question::Euthanasia, group(Minority::ParentsReligion), std::nullopt, {0.393, rate}},
      {"minority_opinion_rate", Question::Euthanasia, group(Minority::ParentsReligion, true), std::nullopt,
       {0.207, rate}},
      {"minority_opinion_rate", Question::Euthanasia, group(Minority::FBPrivacy), std::nullopt, {0.355, rate}},
      {"minority_opinion_rate", Question::FsSocSec, group(Minority::Ethnicity), std::nullopt, {0.172, rate}},
      {"minority_opinion_rate", Question::FsSocSec, group(Minority::Ethnicity, true), std::nullopt, {0.051, rate}},
      {"volatility", Question::JobGuar, group(Minority::ParentsEducation), std::nullopt, {1.57, vol}},
      {"volatility", Question::JobGuar, group(Minority::ParentsEducation, true), std::nullopt, {1.20, vol}},
      {"volatility", Question::Euthanasia, group(Minority::ParentsEducation), std::nullopt, {1.11, vol}},
      {"volatility", Question::Euthanasia, group(Minority::ParentsEducation, true), std::nullopt, {0.67, vol}},
      {"volatility", Question::JobGuar, group(Minority::Ethnicity), std::nullopt, {1.27, vol}},
      {"volatility", Question::JobGuar, group(Minority::Ethnicity, true), std::nullopt, {1.26, vol}},
      {"baseline_misprediction", Question::JobGuar, group(Minority::Ethnicity), std::nullopt, {0.729, mis}},
      {"baseline_misprediction", Question::TooMuchEqRights, group(Minority::ParentsIncome), std::nullopt,
       {0.667, mis + "; the published group label reads parental income below $200k"}},
      {"baseline_misprediction", Question::TooMuchEqRights, GroupKey{}, std::nullopt,
       {0.55, mis + "; quoted as approximate"}},
      {"intersectionality", Question::Euthanasia, GroupKey{}, 1, {0.492, inter}},
      {"intersectionality", Question::Euthanasia, GroupKey{}, 5, {0.759, inter}},
      {"intersectionality", Question::JobGuar, GroupKey{}, 1, {0.471, inter}},
      {"intersectionality", Question::JobGuar, GroupKey{}, 5, {0.621, inter}},
  };
}

}  // namespace

std::optional<ReferenceValue> reference_general_f1(Pipeline p, Question q) {
  const auto i = index_of(q);
  const auto cite = [](const char* model) {
    return "published general-population F1, " + std::string(model) + " (non-binding)";
  };
  switch (p) {
    case Pipeline::Survey: return ReferenceValue{kSurveyStratifiedRf[i], cite("Stratified RF on survey features")};
    case Pipeline::Topology:
      return ReferenceValue{kTopologyDecisionTree[i], cite("Decision Tree on topology features")};
    case Pipeline::Hybrid: return ReferenceValue{kHybridStratifiedRf[i], cite("Stratified RF on hybrid features")};
  }
  return std::nullopt;
}

std::optional<ReferenceValue> reference_subgroup_f1(Pipeline p, Question q, Minority m) {
  for (const auto& quote : kSubgroupQuotes) {
    if (quote.pipeline == p && quote.question == q && quote.minority == m) {
      return ReferenceValue{quote.f1, "published per-minority F1, " + std::string(to_string(p)) +
                                          " pipeline (non-binding)"};
    }
  }
  return std::nullopt;
}

std::span<const EdaReference> eda_references() {
  static const std::vector<EdaReference> refs = build_eda_references();
  return refs;
}

// ---------------------------------------------------------------------------
// Subgroup evaluation

std::vector<SubgroupReport> subgroup_f1_report(std::span<const int> y_true, std::span<const int> y_pred,
                                               std::span<const NodeId> participants,
                                               std::span<const MinorityMembership> memberships, Question q,
                                               Pipeline p) {
  if (y_true.size() != y_pred.size() || y_true.size() != participants.size()) {
    throw ValidationError("subgroup report inputs have different lengths");
  }
  const double general = ml::f1(y_true, y_pred);
  std::vector<GroupKey> groups{GroupKey{}};
  for (Minority m : kAllMinorities) groups.push_back({m, false});

  std::vector<SubgroupReport> out;
  for (const auto& g : groups) {
    std::vector<int> t, pr;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      if (participants[i] >= memberships.size()) throw ValidationError("test row participant has no membership row");
      if (!g.contains(memberships[participants[i]])) continue;
      t.push_back(y_true[i]);
      pr.push_back(y_pred[i]);
    }
    SubgroupReport r;
    r.question = q;
    r.pipeline = p;
    r.group = g;
    r.f1_general = general;
    r.n = t.size();
    r.positives = static_cast<std::size_t>(std::count(t.begin(), t.end(), 1));
    r.predicted_positives = static_cast<std::size_t>(std::count(pr.begin(), pr.end(), 1));
    if (r.n > 0) {
      r.f1 = ml::f1(t, pr);
      r.degenerate = r.positives == 0 && r.predicted_positives == 0;
    }
    r.reference = g.minority ? reference_subgroup_f1(p, q, *g.minority) : reference_general_f1(p, q);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audit report

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const ReferenceValue& r) { return {{"value", r.value}, {"citation", r.citation}, {"non_binding", true}}; }

json to_json(const std::vector<GroupStat>& stats) {
  json arr = json::array();
  for (const auto& s : stats) arr.push_back({{"group", s.group.label()}, {"value", optional_number(s.value)}, {"n", s.n}});
  return arr;
}

json eda_reference_rows(Question q) {
  json arr = json::array();
  for (const auto& r : eda_references()) {
    if (r.question != q) continue;
    json row = {{"metric", r.metric}, {"group", r.group.label()}, {"reference", to_json(r.reference)}};
    if (r.k) row["k"] = *r.k;
    arr.push_back(row);
  }
  return arr;
}

json pipeline_json(const PipelineOutcome& p) {
  json candidates = json::array();
  for (const auto& c : p.subset_candidates) {
    candidates.push_back({{"k", c.k}, {"all", c.all}, {"mean_cv_f1", c.cv.mean_f1}, {"fold_f1", c.cv.fold_f1}});
  }
  json importances = json::array();
  for (const auto& [name, value] : p.top_importances) importances.push_back({{"feature", name}, {"importance", value}});
  json subgroups = json::array();
  for (const auto& s : p.subgroups) {
    json row = {{"group", s.group.label()},
                {"f1", optional_number(s.f1)},
                {"f1_general", s.f1_general},
                {"n", s.n},
                {"positives", s.positives},
                {"predicted_positives", s.predicted_positives},
                {"degenerate", s.degenerate},
                {"reference", s.reference ? to_json(*s.reference) : json(nullptr)}};
    subgroups.push_back(row);
  }
  return {{"pipeline", std::string(to_string(p.pipeline))},
          {"model_family", std::string(ml::to_string(p.family))},
          {"samples", p.samples},
          {"positives", p.positives},
          {"feature_width", p.feature_width},
          {"grid", {{"size", p.grid_size}, {"best_config", p.best_config.to_json()}, {"best_mean_cv_f1", p.grid_cv_f1}}},
          {"subset_selection",
           {{"candidates", candidates}, {"selected_features", p.selected_features}, {"mean_cv_f1", p.subset_cv_f1}}},
          {"test_f1", p.test_f1},
          {"top_importances", importances},
          {"subgroups", subgroups}};
}

}  // namespace

json compile_audit_report(const AuditInputs& inputs) {
  if (inputs.questions.empty()) throw ValidationError("audit report needs at least one question");
  json questions = json::array();
  for (const auto& q : inputs.questions) {
    json curve = json::array();
    for (const auto& p : q.intersectionality.points) curve.push_back({{"k", p.k}, {"rate", p.rate}, {"n", p.n}});
    json pipelines = json::array();
    for (const auto& p : q.pipelines) pipelines.push_back(pipeline_json(p));
    questions.push_back(
        {{"question", std::string(shortcode(q.question))},
         {"typology", std::string(to_string(typology(q.question)))},
         {"eda",
          {{"minority_opinion_rate",
            {{"minority_stance", std::string(to_string(q.minority_opinion.minority_stance))},
             {"groups", to_json(q.minority_opinion.groups)}}},
           {"volatility", to_json(q.volatility.groups)},
           {"baseline_misprediction", to_json(q.misprediction.groups)},
           {"intersectionality", curve}}},
         {"eda_references", eda_reference_rows(q.question)},
         {"pipelines", pipelines}});
  }
  return {{"format", "fairdyn-audit-report"},
          {"version", 1},
          {"run", {{"config_hash", inputs.config_hash}, {"seed", inputs.seed}, {"seeds", inputs.seeds}}},
          {"dataset", inputs.dataset},
          {"conventions", inputs.conventions},
          {"questions", questions}};
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

namespace {

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return csv::format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

const json* find_group(const json& groups, const std::string& label) {
  for (const auto& g : groups) {
    if (g.at("group") == label) return &g;
  }
  return nullptr;
}

json group_value(const json& groups, const std::string& label) {
  const json* g = find_group(groups, label);
  return g ? g->at("value") : json(nullptr);
}

std::string meta_line(const json& report) {
  return "# fairdyn config_hash=" + report.at("run").at("config_hash").get<std::string>() +
         " seed=" + std::to_string(report.at("run").at("seed").get<std::uint64_t>());
}

}  // namespace

void write_report_flat_csv(std::ostream& out, const json& report) {
  out << meta_line(report) << '\n';
  csv::write_row(out, {"question", "typology", "pipeline", "group", "f1", "f1_general", "n", "positives", "degenerate",
                       "reference_f1", "reference_citation", "baseline_misprediction", "volatility",
                       "minority_opinion_rate"});
  for (const auto& q : report.at("questions")) {
    const auto& eda = q.at("eda");
    for (const auto& p : q.at("pipelines")) {
      for (const auto& s : p.at("subgroups")) {
        const std::string label = s.at("group").get<std::string>();
        const auto& ref = s.at("reference");
        csv::write_row(out, {cell(q.at("question")), cell(q.at("typology")), cell(p.at("pipeline")), label,
                             cell(s.at("f1")), cell(s.at("f1_general")), cell(s.at("n")), cell(s.at("positives")),
                             cell(s.at("degenerate")), ref.is_null() ? "" : cell(ref.at("value")),
                             ref.is_null() ? "" : cell(ref.at("citation")),
                             cell(group_value(eda.at("baseline_misprediction"), label)),
                             cell(group_value(eda.at("volatility"), label)),
                             cell(group_value(eda.at("minority_opinion_rate").at("groups"), label))});
      }
    }
  }
}

void write_report_long_csv(std::ostream& out, const json& report) {
  out << meta_line(report) << '\n';
  csv::write_row(out, {"question", "pipeline", "subgroup", "metric", "value"});
  for (const auto& q : report.at("questions")) {
    const std::string question = q.at("question").get<std::string>();
    const auto& eda = q.at("eda");
    auto emit_groups = [&](const json& groups, const std::string& metric) {
      for (const auto& g : groups) {
        if (!g.at("value").is_null()) csv::write_row(out, {question, "eda", cell(g.at("group")), metric, cell(g.at("value"))});
      }
    };
    emit_groups(eda.at("minority_opinion_rate").at("groups"), "minority_opinion_rate");
    emit_groups(eda.at("volatility"), "volatility");
    emit_groups(eda.at("baseline_misprediction"), "baseline_misprediction");
    for (const auto& pt : eda.at("intersectionality")) {
      csv::write_row(out, {question, "eda", "k=" + cell(pt.at("k")), "misprediction_by_intersectionality",
                           cell(pt.at("rate"))});
    }
    for (const auto& p : q.at("pipelines")) {
      const std::string pipeline = p.at("pipeline").get<std::string>();
      csv::write_row(out, {question, pipeline, "general", "test_f1", cell(p.at("test_f1"))});
      csv::write_row(out, {question, pipeline, "general", "cv_f1", cell(p.at("subset_selection").at("mean_cv_f1"))});
      for (const auto& s : p.at("subgroups")) {
        if (!s.at("f1").is_null()) csv::write_row(out, {question, pipeline, cell(s.at("group")), "f1", cell(s.at("f1"))});
        if (!s.at("reference").is_null()) {
          csv::write_row(out, {question, pipeline, cell(s.at("group")), "reference_f1",
                               cell(s.at("reference").at("value"))});
        }
      }
    }
  }
}

void write_report_summary(std::ostream& out, const json& report) {
  out << meta_line(report) << '\n';
  for (const auto& q : report.at("questions")) {
    out << "\n== " << q.at("question").get<std::string>() << " (" << q.at("typology").get<std::string>() << ") ==\n";
    const auto& pipelines = q.at("pipelines");
    std::ostringstream head;
    head << std::left << std::setw(20) << "group";
    for (const auto& p : pipelines) head << std::setw(12) << p.at("pipeline").get<std::string>();
    out << head.str() << '\n';
    std::vector<std::string> labels{"general"};
    for (Minority m : kAllMinorities) labels.emplace_back(to_string(m));
    for (const auto& label : labels) {
      std::ostringstream line;
      line << std::left << std::setw(20) << label;
      for (const auto& p : pipelines) {
        const json* s = find_group(p.at("subgroups"), label);
        std::string text = "-";
        if (s && !s->at("f1").is_null()) {
          std::ostringstream v;
          v << std::fixed << std::setprecision(3) << s->at("f1").get<double>();
          if (s->at("degenerate").get<bool>()) v << '*';
          text = v.str();
        }
        line << std::setw(12) << text;
      }
      out << line.str() << '\n';
    }
    std::ostringstream refs;
    refs << std::left << std::setw(20) << "reference";
    for (const auto& p : pipelines) {
      const json* s = find_group(p.at("subgroups"), "general");
      std::string text = "-";
      if (s && !s->at("reference").is_null()) {
        std::ostringstream v;
        v << std::fixed << std::setprecision(4) << s->at("reference").at("value").get<double>();
        text = v.str();
      }
      refs << std::setw(12) << text;
    }
    out << refs.str() << '\n';
  }
}

}  // namespace fairdyn
