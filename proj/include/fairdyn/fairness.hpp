#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairdyn/data_model.hpp"
#include "fairdyn/features.hpp"
#include "fairdyn/opinion_sim.hpp"

namespace fairdyn {

/// How a group rate is averaged: over every (participant, wave) record, or
/// over participants (each participant's own rate, then the group mean).
enum class Aggregation : std::uint8_t { PerSample, PerParticipant };

std::string_view to_string(Aggregation a) noexcept;
std::optional<Aggregation> parse_aggregation(std::string_view s) noexcept;

/// The general population, a minority, or a minority's complement.
struct GroupKey {
  std::optional<Minority> minority;
  bool complement = false;

  /// "general", "Ethnicity" or "non-Ethnicity".
  std::string label() const;
  bool contains(const MinorityMembership& m) const noexcept;
  auto operator<=>(const GroupKey&) const = default;
};

/// Group order used by every metric: general, then each minority followed by
/// its complement.
std::vector<GroupKey> standard_groups();

struct GroupStat {
  GroupKey group;
  std::optional<double> value;  // empty when n == 0
  std::size_t n = 0;
};

// ---------------------------------------------------------------------------
// Exploratory metrics

struct MinorityOpinionOptions {
  /// Lets AB be the minority stance when it is rarer than both poles.
  bool count_ab = false;
  Aggregation aggregation = Aggregation::PerSample;
  /// Restrict to one wave; all waves are pooled otherwise.
  std::optional<int> wave;
};

struct MinorityOpinionResult {
  Question question;
  Stance minority_stance;
  std::vector<GroupStat> groups;
};

/// The minority stance is the rarer pole among pooled non-Missing answers
/// (ties pick B). A group's rate is the share of its non-Missing answers that
/// hold it. Throws ValidationError when the question has no answers.
MinorityOpinionResult minority_opinion_rate(const Dataset& data, std::span<const MinorityMembership> memberships,
                                            Question q, const MinorityOpinionOptions& options = {});

/// Changes between consecutive waves that are both answered; a Missing wave
/// breaks adjacency. Empty when fewer than two waves are answered.
std::optional<int> count_changes(std::span<const Stance> waves);

struct VolatilityResult {
  Question question;
  std::vector<GroupStat> groups;  // mean changes over counted participants
};

VolatilityResult opinion_volatility(const Dataset& data, std::span<const MinorityMembership> memberships, Question q);

struct MispredictionResult {
  Question question;
  std::vector<GroupStat> groups;
};

/// Share of the question's samples whose target is set, per group. Throws
/// ValidationError when the question has no samples.
MispredictionResult baseline_misprediction_rate(std::span<const MisclassificationSample> samples,
                                                std::span<const MinorityMembership> memberships, Question q,
                                                Aggregation aggregation = Aggregation::PerSample);

struct CurvePoint {
  int k;
  double rate;
  std::size_t n;
};

struct IntersectionalityCurve {
  Question question;
  std::vector<CurvePoint> points;  // ascending k, only k with samples
};

IntersectionalityCurve misprediction_by_intersectionality(std::span<const MisclassificationSample> samples,
                                                          std::span<const MinorityMembership> memberships, Question q);

// ---------------------------------------------------------------------------
// Published reference values

/// A published number kept for side-by-side display. Never a threshold.
struct ReferenceValue {
  double value;
  std::string citation;
};

/// General-population F1 of the best published model family for a pipeline.
std::optional<ReferenceValue> reference_general_f1(Pipeline p, Question q);
/// Per-minority F1 values quoted in the published discussion, where given.
std::optional<ReferenceValue> reference_subgroup_f1(Pipeline p, Question q, Minority m);

struct EdaReference {
  std::string metric;  // minority_opinion_rate, volatility, baseline_misprediction, intersectionality
  Question question;
  GroupKey group;
  std::optional<int> k;  // intersection count for intersectionality rows
  ReferenceValue reference;
};

std::span<const EdaReference> eda_references();

// ---------------------------------------------------------------------------
// Subgroup evaluation

struct SubgroupReport {
  Question question;
  Pipeline pipeline;
  GroupKey group;
  std::optional<double> f1;  // empty when the subgroup has no test rows
  double f1_general = 0.0;
  std::size_t n = 0;
  std::size_t positives = 0;
  std::size_t predicted_positives = 0;
  /// No positives and no predicted positives: F1 is reported as 0.
  bool degenerate = false;
  std::optional<ReferenceValue> reference;
};

/// F1 on the held-out rows, for the general population and restricted to
/// each minority's members. `participants` gives each test row's owner.
std::vector<SubgroupReport> subgroup_f1_report(std::span<const int> y_true, std::span<const int> y_pred,
                                               std::span<const NodeId> participants,
                                               std::span<const MinorityMembership> memberships, Question q,
                                               Pipeline p);

// ---------------------------------------------------------------------------
// Audit report

struct PipelineOutcome {
  Pipeline pipeline;
  ml::ModelFamily family;
  std::size_t samples = 0;
  std::size_t positives = 0;
  std::size_t feature_width = 0;
  ml::ModelConfig best_config;
  double grid_cv_f1 = 0.0;
  std::size_t grid_size = 0;
  std::vector<ml::SubsetCandidate> subset_candidates;
  std::vector<std::string> selected_features;
  double subset_cv_f1 = 0.0;
  double test_f1 = 0.0;
  std::vector<std::pair<std::string, double>> top_importances;
  std::vector<SubgroupReport> subgroups;
};

struct QuestionOutcome {
  Question question;
  MinorityOpinionResult minority_opinion;
  VolatilityResult volatility;
  MispredictionResult misprediction;
  IntersectionalityCurve intersectionality;
  std::vector<PipelineOutcome> pipelines;
};

struct AuditInputs {
  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json seeds;        // named derived seeds
  nlohmann::json dataset;      // provenance block
  nlohmann::json conventions;  // every convention default in force
  std::vector<QuestionOutcome> questions;
};

/// Nested report document. Keys are sorted and nothing time-dependent is
/// included, so equal inputs give byte-identical dumps.
nlohmann::json compile_audit_report(const AuditInputs& inputs);

/// Canonical text form of a report (2-space indent, trailing newline).
std::string dump_report(const nlohmann::json& report);

/// question,typology,pipeline,group,f1,f1_general,n,positives,degenerate,
/// reference_f1,reference_citation,baseline_misprediction,volatility,
/// minority_opinion_rate
void write_report_flat_csv(std::ostream& out, const nlohmann::json& report);
/// question,pipeline,subgroup,metric,value
void write_report_long_csv(std::ostream& out, const nlohmann::json& report);
/// One block per question: per-minority F1 for each pipeline next to the
/// general-population row and its reference value.
void write_report_summary(std::ostream& out, const nlohmann::json& report);

}  // namespace fairdyn
