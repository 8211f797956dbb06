#include "fairdyn/opinion_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <spdlog/spdlog.h>

#include "fairdyn/csv.hpp"

namespace fairdyn {

void CodingParams::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("coding.gamma must lie in [0, 1)");
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("coding.delta must lie in (0, 1]");
  if (!(interactions_per_day >= 0.0) || !std::isfinite(interactions_per_day)) {
    throw ValidationError("coding.interactions_per_day must be non-negative");
  }
}

CodingParams CodingParams::from_json(const nlohmann::json& obj) {
  CodingParams p;
  if (obj.is_null()) return p;
  p.gamma = obj.value("gamma", p.gamma);
  p.delta = obj.value("delta", p.delta);
  p.interactions_per_day = obj.value("interactions_per_day", p.interactions_per_day);
  if (obj.contains("init_policy")) {
    const auto s = obj["init_policy"].get<std::string>();
    if (s == "from_wave1") {
      p.init = InitPolicy::FromWave1;
    } else if (s == "uniform") {
      p.init = InitPolicy::Uniform;
    } else {
      throw ValidationError("coding.init_policy must be from_wave1 or uniform, got " + s);
    }
  }
  p.validate();
  return p;
}

nlohmann::json CodingParams::to_json() const {
  return {{"gamma", gamma},
          {"delta", delta},
          {"interactions_per_day", interactions_per_day},
          {"init_policy", init == InitPolicy::FromWave1 ? "from_wave1" : "uniform"}};
}

Stance express(const OpinionVector& o, double gamma) noexcept {
  if (std::abs(o.a - o.b) <= gamma) return Stance::AB;
  return o.a > o.b ? Stance::A : Stance::B;
}

Stance utter(const OpinionVector& speaker, double gamma, Rng& rng) {
  const Stance s = express(speaker, gamma);
  if (s != Stance::AB) return s;
  return bernoulli(rng, 0.5) ? Stance::A : Stance::B;
}

void apply_utterance(OpinionVector& speaker, OpinionVector& listener, Stance word, const CodingParams& params) {
  const Stance heard_by = express(listener, params.gamma);
  auto component = [word](OpinionVector& o) -> double& { return word == Stance::A ? o.a : o.b; };
  auto other = [word](OpinionVector& o) -> double& { return word == Stance::A ? o.b : o.a; };
  double& lw = component(listener);
  lw = std::min(1.0, lw + params.delta);
  if (heard_by == word || heard_by == Stance::AB) {
    double& sw = component(speaker);
    sw = std::min(1.0, sw + params.delta);
    // Agreement also weakens the competing word on both sides.
    for (OpinionVector* o : {&speaker, &listener}) other(*o) = std::max(0.0, other(*o) - params.delta);
  }
}

Stance interact(OpinionVector& speaker, OpinionVector& listener, const CodingParams& params, Rng& rng) {
  const Stance word = utter(speaker, params.gamma, rng);
  apply_utterance(speaker, listener, word, params);
  return word;
}

std::pair<Stance, Stance> naming_game_step(Stance speaker, Stance listener, Stance word) {
  if (word != Stance::A && word != Stance::B) throw ValidationError("uttered word must be A or B");
  if (listener == word || listener == Stance::AB) return {word, word};
  return {speaker, Stance::AB};
}

Stance naming_game_utter(Stance speaker, Rng& rng) {
  if (speaker == Stance::A || speaker == Stance::B) return speaker;
  return bernoulli(rng, 0.5) ? Stance::A : Stance::B;
}

Stance SimulationTrace::state_at(NodeId node, Timestamp t) const {
  if (t < start || t > end) {
    throw ValidationError("time " + std::to_string(t) + " outside trace range [" + std::to_string(start) + ", " +
                          std::to_string(end) + "]");
  }
  const auto& s = series.at(node);
  auto it = std::upper_bound(s.begin(), s.end(), t, [](Timestamp x, const TracePoint& p) { return x < p.time; });
  return std::prev(it)->state;
}

namespace {

void check_schedule(const WaveSchedule& waves) {
  for (int w = 1; w < kWaveCount; ++w) {
    if (waves[w] < waves[w - 1]) throw ValidationError("wave times must be non-decreasing");
  }
}

// Shared day-stepped scheduler. `Model` supplies the per-agent state type and
// the directed interaction.
template <typename Model>
SimulationTrace simulate(std::size_t n, std::span<const CommEvent> events, const WaveSchedule& waves,
                         Question question, const CogsnetParams& net_params, double interactions_per_day,
                         std::uint64_t seed, Model& model) {
  check_schedule(waves);
  SimulationTrace trace;
  trace.question = question;
  trace.seed = seed;
  trace.start = waves.front();
  trace.end = waves.back();
  trace.series.resize(n);
  for (NodeId v = 0; v < n; ++v) trace.series[v].push_back({trace.start, model.state(v)});

  Rng rng = make_rng(seed, "interactions", index_of(question));
  TemporalNetwork net(net_params, n);
  std::size_t cursor = net.advance(events, 0, trace.start);
  bool any_edge = false;
  auto record = [&](NodeId v, Timestamp t) {
    const Stance s = model.state(v);
    if (trace.series[v].back().state != s) trace.series[v].push_back({t, s});
  };
  for (Timestamp t = trace.start; t <= trace.end; t += kSecondsPerDay) {
    cursor = net.advance(events, cursor, t);
    for (const auto& [pair, state] : net.edges()) {
      if (state.last_event_time > t) continue;
      const double w = net.weight_at(pair, state, t);
      if (w <= 0.0) continue;
      any_edge = true;
      const double p = std::min(1.0, w * interactions_per_day);
      for (int dir = 0; dir < 2; ++dir) {
        const NodeId speaker = dir == 0 ? pair.first : pair.second;
        const NodeId listener = dir == 0 ? pair.second : pair.first;
        if (!bernoulli(rng, p)) continue;
        model.interact(speaker, listener, rng);
        record(speaker, t);
        record(listener, t);
      }
    }
  }
  if (!any_edge) {
    spdlog::warn("{} simulation on {}: network has no edges in the simulated period; states stay constant",
                 model.name(), shortcode(question));
  }
  return trace;
}

struct CodingModel {
  const CodingParams& params;
  std::vector<OpinionVector> agents;

  Stance state(NodeId v) const { return express(agents[v], params.gamma); }
  void interact(NodeId s, NodeId l, Rng& rng) { fairdyn::interact(agents[s], agents[l], params, rng); }
  static const char* name() { return "CoDiNG"; }
};

struct NamingGameModel {
  std::vector<Stance> agents;

  Stance state(NodeId v) const { return agents[v]; }
  void interact(NodeId s, NodeId l, Rng& rng) {
    const Stance word = naming_game_utter(agents[s], rng);
    std::tie(agents[s], agents[l]) = naming_game_step(agents[s], agents[l], word);
  }
  static const char* name() { return "Naming Game"; }
};

std::vector<Stance> wave1_stances(const Dataset& data, Question q) {
  std::vector<Stance> out(data.size());
  for (NodeId v = 0; v < data.size(); ++v) out[v] = data.stance(v, q, 1);
  return out;
}

}  // namespace

SimulationTrace simulate_coding(std::size_t node_count, std::span<const CommEvent> events, const WaveSchedule& waves,
                                std::span<const Stance> initial, Question question, const CogsnetParams& net_params,
                                const CodingParams& params, std::uint64_t seed) {
  params.validate();
  if (initial.size() != node_count) throw ValidationError("initial stance count does not match node count");
  CodingModel model{params, std::vector<OpinionVector>(node_count)};
  Rng init_rng = make_rng(seed, "coding-init", index_of(question));
  for (NodeId v = 0; v < node_count; ++v) {
    const Stance s = params.init == InitPolicy::Uniform ? Stance::Missing : initial[v];
    switch (s) {
      case Stance::A: model.agents[v] = {1.0, 0.0}; break;
      case Stance::B: model.agents[v] = {0.0, 1.0}; break;
      case Stance::AB: model.agents[v] = {0.5, 0.5}; break;
      case Stance::Missing: {
        const double a = uniform01(init_rng);
        model.agents[v] = {a, uniform01(init_rng)};
        break;
      }
    }
  }
  auto trace = simulate(node_count, events, waves, question, net_params, params.interactions_per_day, seed, model);
  trace.model = OpinionModel::Coding;
  trace.params = {{"coding", params.to_json()}, {"cogsnet", net_params.to_json()}};
  return trace;
}

SimulationTrace simulate_naming_game(std::size_t node_count, std::span<const CommEvent> events,
                                     const WaveSchedule& waves, std::span<const Stance> initial, Question question,
                                     const CogsnetParams& net_params, double interactions_per_day,
                                     std::uint64_t seed) {
  if (initial.size() != node_count) throw ValidationError("initial stance count does not match node count");
  NamingGameModel model;
  model.agents.assign(initial.begin(), initial.end());
  for (auto& s : model.agents) {
    if (s == Stance::Missing) s = Stance::AB;
  }
  auto trace = simulate(node_count, events, waves, question, net_params, interactions_per_day, seed, model);
  trace.model = OpinionModel::NamingGame;
  trace.params = {{"interactions_per_day", interactions_per_day}, {"cogsnet", net_params.to_json()}};
  return trace;
}

SimulationTrace run_coding(const Dataset& data, const CogsnetParams& net_params, Question question,
                           const CodingParams& params, std::uint64_t seed) {
  const auto initial = wave1_stances(data, question);
  return simulate_coding(data.size(), data.events(), data.wave_times(), initial, question, net_params, params, seed);
}

SimulationTrace run_naming_game(const Dataset& data, const CogsnetParams& net_params, Question question,
                                std::uint64_t seed, double interactions_per_day) {
  const auto initial = wave1_stances(data, question);
  return simulate_naming_game(data.size(), data.events(), data.wave_times(), initial, question, net_params,
                              interactions_per_day, seed);
}

std::vector<MisclassificationSample> label_mispredictions(const SimulationTrace& trace, const Dataset& data,
                                                          const WaveSchedule& waves) {
  if (trace.series.size() != data.size()) throw ValidationError("trace does not cover the dataset's participants");
  std::vector<MisclassificationSample> out;
  for (NodeId v = 0; v < data.size(); ++v) {
    for (int w = 2; w <= kWaveCount; ++w) {
      const Stance truth = data.stance(v, trace.question, w);
      if (truth == Stance::Missing) continue;
      const Stance predicted = trace.state_at(v, waves[static_cast<std::size_t>(w - 1)]);
      out.push_back({v, trace.question, w, predicted != truth, truth, predicted});
    }
  }
  return out;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace, const Dataset& data) {
  csv::write_row(out, {"participant", "question", "timestamp", "state"});
  const std::string q(shortcode(trace.question));
  for (NodeId v = 0; v < trace.series.size(); ++v) {
    for (const auto& p : trace.series[v]) {
      csv::write_row(out, {data.id(v), q, std::to_string(p.time), std::string(to_string(p.state))});
    }
  }
}

void write_samples_csv(std::ostream& out, std::span<const MisclassificationSample> samples, const Dataset& data) {
  csv::write_row(out, {"participant", "question", "wave", "predicted", "truth", "target"});
  for (const auto& s : samples) {
    csv::write_row(out, {data.id(s.participant), std::string(shortcode(s.question)), std::to_string(s.wave),
                         std::string(to_string(s.predicted)), std::string(to_string(s.truth)),
                         s.target ? "1" : "0"});
  }
}

}  // namespace fairdyn
