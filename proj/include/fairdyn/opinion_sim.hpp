#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairdyn/cogsnet.hpp"
#include "fairdyn/core.hpp"
#include "fairdyn/data_model.hpp"
#include "fairdyn/rng.hpp"

namespace fairdyn {

enum class InitPolicy : std::uint8_t { FromWave1, Uniform };

struct CodingParams {
  double gamma = 0.2;
  double delta = 0.1;
  /// Daily interaction probability along an edge is min(1, weight * this).
  double interactions_per_day = 1.0;
  InitPolicy init = InitPolicy::FromWave1;

  void validate() const;
  static CodingParams from_json(const nlohmann::json& obj);
  nlohmann::json to_json() const;
};

struct OpinionVector {
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const OpinionVector&, const OpinionVector&) = default;
};

/// A or B when |a - b| > gamma (the larger side), AB otherwise.
Stance express(const OpinionVector& o, double gamma) noexcept;

/// Word a speaker utters: its expressed pole, or a fair coin between A and B
/// when it expresses AB.
Stance utter(const OpinionVector& speaker, double gamma, Rng& rng);

/// Applies one interaction in which the speaker uttered `word` (A or B).
/// The listener's o_word grows by delta; the speaker's does too when the
/// listener expressed `word` or AB before the interaction, and in that case
/// both sides also lose delta on the other word. Components stay in [0, 1].
void apply_utterance(OpinionVector& speaker, OpinionVector& listener, Stance word, const CodingParams& params);

/// utter + apply_utterance. Returns the uttered word.
Stance interact(OpinionVector& speaker, OpinionVector& listener, const CodingParams& params, Rng& rng);

/// Naming Game transition for a fixed uttered word. A listener that lacks the
/// word adds it (A or B becomes AB); a listener that has it collapses, and so
/// does the speaker.
std::pair<Stance, Stance> naming_game_step(Stance speaker, Stance listener, Stance word);

/// Uttered word of a Naming Game agent (coin flip for AB).
Stance naming_game_utter(Stance speaker, Rng& rng);

struct TracePoint {
  Timestamp time;
  Stance state;
};

enum class OpinionModel : std::uint8_t { Coding, NamingGame };

/// Per-agent discrete-state time series. Every series starts with the state
/// at `start`; later points are recorded only when the state changes.
struct SimulationTrace {
  OpinionModel model = OpinionModel::Coding;
  Question question = Question::Euthanasia;
  std::uint64_t seed = 0;
  nlohmann::json params;
  Timestamp start = 0;
  Timestamp end = 0;
  std::vector<std::vector<TracePoint>> series;

  /// State at time t; throws ValidationError when t lies outside [start, end].
  Stance state_at(NodeId node, Timestamp t) const;
};

/// Core simulation, independent of a Dataset. `initial` holds each agent's
/// wave-1 stance. Days run from waves[0] to waves[5]; on each day every edge
/// present in the CogSNet snapshot fires a Bernoulli trial in each direction,
/// in ascending (u, v) order.
SimulationTrace simulate_coding(std::size_t node_count, std::span<const CommEvent> events, const WaveSchedule& waves,
                                std::span<const Stance> initial, Question question, const CogsnetParams& net_params,
                                const CodingParams& params, std::uint64_t seed);

SimulationTrace simulate_naming_game(std::size_t node_count, std::span<const CommEvent> events,
                                     const WaveSchedule& waves, std::span<const Stance> initial, Question question,
                                     const CogsnetParams& net_params, double interactions_per_day,
                                     std::uint64_t seed);

SimulationTrace run_coding(const Dataset& data, const CogsnetParams& net_params, Question question,
                           const CodingParams& params, std::uint64_t seed);

/// Missing wave-1 stances start as AB.
SimulationTrace run_naming_game(const Dataset& data, const CogsnetParams& net_params, Question question,
                                std::uint64_t seed, double interactions_per_day = 1.0);

struct MisclassificationSample {
  NodeId participant;
  Question question;
  int wave;
  bool target;
  Stance truth;
  Stance predicted;
};

/// One sample per (participant, wave 2..6) with a non-Missing ground truth.
std::vector<MisclassificationSample> label_mispredictions(const SimulationTrace& trace, const Dataset& data,
                                                          const WaveSchedule& waves);

/// participant,question,timestamp,state
void write_trace_csv(std::ostream& out, const SimulationTrace& trace, const Dataset& data);
/// participant,question,wave,predicted,truth,target
void write_samples_csv(std::ostream& out, std::span<const MisclassificationSample> samples, const Dataset& data);

}  // namespace fairdyn
