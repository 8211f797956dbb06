#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "fairdyn/core.hpp"
#include "fairdyn/data_model.hpp"

namespace fairdyn {

/// Group-level targets for one per-participant quantity. The quantity of a
/// participant is `base` plus an offset for every targeted group it belongs
/// to; offsets are calibrated so each group's measured mean hits its target.
struct GroupTargets {
  double base = 0.0;
  std::map<Minority, double> groups;
};

struct QuestionTargets {
  /// Share of answers on the minority pole (B) and on the middle (AB).
  GroupTargets minority_pole{0.30, {}};
  double ab_rate = 0.20;
  /// Misprediction probability for a participant with no minority status;
  /// each held status adds `intersectionality_slope`.
  GroupTargets misprediction{0.45, {}};
  double intersectionality_slope = 0.04;
  /// Expected opinion changes of a participant answering all six waves.
  GroupTargets volatility{1.0, {}};
};

struct FlagCorrelation {
  Minority a;
  Minority b;
  double rho;
};

struct SyntheticConfig {
  std::size_t population = 200;
  std::array<double, kMinorityCount> minority_fraction{0.48, 0.33, 0.19, 0.16, 0.15, 0.15, 0.40};
  /// Share of participants answering "unsure" for parental income.
  double income_unsure_fraction = 0.13;
  /// Share of FBPrivacy-minority participants who leave the answer blank.
  double fbprivacy_absent_fraction = 0.2;
  /// Latent Gaussian correlations between flag indicators.
  std::vector<FlagCorrelation> flag_correlations;

  /// Contact affinity of a pair is homophily^(minority flags both hold).
  double homophily = 2.0;
  double mean_degree = 8.0;
  double events_per_tie_per_day = 0.15;
  double call_fraction = 0.3;

  /// Probability of leaving the study after each wave.
  double dropout_hazard = 0.05;

  Timestamp start_time = 1312156800;  // 2011-08-01 UTC
  int warmup_days = 30;
  int wave_spacing_days = 120;

  std::array<QuestionTargets, 6> questions;

  /// Defaults with the population shares and per-question targets of the
  /// study this toolkit models.
  static SyntheticConfig defaults();
  /// Reads a JSON object; absent keys keep `defaults()`.
  static SyntheticConfig from_json(const nlohmann::json& obj);
  nlohmann::json to_json() const;
  /// Throws ValidationError naming the violated constraint.
  void validate() const;
  /// Hex FNV-1a of the canonical JSON form.
  std::string hash() const;

  WaveSchedule wave_schedule() const;
};

/// Predicted stance per participant (NodeId order) at waves 1..6, produced
/// from a dataset that holds only wave-1 opinions and the full event stream.
using FollowupPredictor =
    std::function<std::vector<std::array<Stance, kWaveCount>>(const Dataset& wave1_only, Question q)>;

/// Predicts every wave as the participant's wave-1 stance.
FollowupPredictor persistence_predictor();

/// Builds a synthetic population. Flags come from a Gaussian copula with
/// exact marginal counts; events from a homophily-weighted Poisson process;
/// wave-1 stances from the pole rates; waves 2..6 from an exponential-family
/// model over answer sequences whose expected misprediction count (against
/// `predictor`), change count and pole counts match each participant's
/// targets. Deterministic for a fixed (config, seed, predictor).
Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed,
                           const FollowupPredictor& predictor = persistence_predictor());

/// Codebook describing the attributes the generator emits.
Codebook synthetic_codebook();

namespace detail {

/// Maximum-entropy distribution over {A, B, AB} answer sequences of the given
/// length (after a fixed first answer) whose expected statistics
/// (mispredictions vs `predicted`, changes, B count, AB count) approach
/// `targets`. Returns sequence probabilities in lexicographic order
/// (A < B < AB per position).
std::vector<double> tilted_sequence_distribution(Stance first, std::span<const Stance> predicted,
                                                 const std::array<double, 4>& targets,
                                                 std::array<double, 4>* theta_io = nullptr,
                                                 std::array<double, 4>* achieved = nullptr);

}  // namespace detail

}  // namespace fairdyn
