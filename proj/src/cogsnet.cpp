#include "fairdyn/cogsnet.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace fairdyn {

void CogsnetParams::validate() const {
  if (!(mu > 0.0 && mu <= 1.0)) throw ValidationError("cogsnet.mu must lie in (0, 1]");
  if (!(theta > 0.0 && theta < mu)) throw ValidationError("cogsnet.theta must lie in (0, mu)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("cogsnet.lambda must be positive");
  for (double m : channel_mu_multiplier) {
    if (!(m > 0.0)) throw ValidationError("cogsnet channel multipliers must be positive");
  }
}

CogsnetParams CogsnetParams::from_json(const nlohmann::json& obj) {
  CogsnetParams p;
  if (obj.is_null()) return p;
  p.mu = obj.value("mu", p.mu);
  p.theta = obj.value("theta", p.theta);
  if (obj.contains("lambda_per_day")) p.lambda = obj["lambda_per_day"].get<double>() / kSecondsPerDay;
  if (obj.contains("channel_mu_multiplier")) {
    const auto& m = obj["channel_mu_multiplier"];
    p.channel_mu_multiplier = {m.value("call", 1.0), m.value("text", 1.0)};
  }
  p.validate();
  return p;
}

nlohmann::json CogsnetParams::to_json() const {
  return {{"mu", mu},
          {"theta", theta},
          {"lambda_per_day", lambda * kSecondsPerDay},
          {"forgetting", "exponential"},
          {"channel_mu_multiplier", {{"call", channel_mu_multiplier[0]}, {"text", channel_mu_multiplier[1]}}}};
}

double forgetting(const CogsnetParams& params, double delta_t) {
  if (delta_t < 0.0) throw ValidationError("forgetting: negative time interval " + std::to_string(delta_t));
  return std::exp(-params.lambda * delta_t);
}

OutOfOrderEvent::OutOfOrderEvent(Timestamp event_time, Timestamp clock)
    : ValidationError("out-of-order event: timestamp " + std::to_string(event_time) +
                      " precedes network clock " + std::to_string(clock)) {}

TemporalNetwork::TemporalNetwork(CogsnetParams params, std::size_t node_count)
    : params_(params), node_count_(node_count) {
  params_.validate();
}

void TemporalNetwork::process_event(const CommEvent& event) {
  if (event.timestamp < clock_) throw OutOfOrderEvent(event.timestamp, clock_);
  if (event.source >= node_count_ || event.target >= node_count_ || event.source == event.target) {
    throw ValidationError("event endpoints invalid for this network");
  }
  const double mu = std::min(1.0, params_.mu * params_.channel_mu_multiplier[static_cast<std::size_t>(event.channel)]);
  const NodePair key = make_pair_key(event.source, event.target);
  auto [it, inserted] = edges_.try_emplace(key, EdgeState{mu, event.timestamp});
  if (!inserted) {
    EdgeState& s = it->second;
    const double decayed =
        s.weight_at_last_event * forgetting(params_, static_cast<double>(event.timestamp - s.last_event_time));
    s.weight_at_last_event = decayed < params_.theta ? mu : mu + decayed * (1.0 - mu);
    s.last_event_time = event.timestamp;
  }
  clock_ = event.timestamp;
}

std::size_t TemporalNetwork::advance(std::span<const CommEvent> events, std::size_t cursor, Timestamp t) {
  while (cursor < events.size() && events[cursor].timestamp <= t) process_event(events[cursor++]);
  return cursor;
}

double TemporalNetwork::weight_at(const NodePair& pair, const EdgeState& state, Timestamp t) const {
  if (t < state.last_event_time) {
    throw ValidationError("weight query at " + std::to_string(t) + " precedes last event " +
                          std::to_string(state.last_event_time) + " of pair (" + std::to_string(pair.first) +
                          ", " + std::to_string(pair.second) + ")");
  }
  const double w =
      state.weight_at_last_event * forgetting(params_, static_cast<double>(t - state.last_event_time));
  return w < params_.theta ? 0.0 : w;
}

double TemporalNetwork::weight_at(NodeId u, NodeId v, Timestamp t) const {
  const NodePair key = make_pair_key(u, v);
  auto it = edges_.find(key);
  if (it == edges_.end()) return 0.0;
  return weight_at(key, it->second, t);
}

WeightedGraph TemporalNetwork::snapshot_at(Timestamp t) const {
  std::vector<WeightedEdge> kept;
  for (const auto& [pair, state] : edges_) {
    if (state.last_event_time > t) continue;
    const double w = weight_at(pair, state, t);
    if (w >= params_.theta) kept.push_back({pair.first, pair.second, w});
  }
  return WeightedGraph::from_edges(node_count_, kept);
}

std::vector<WeightedGraph> snapshots_at(const Dataset& data, const CogsnetParams& params,
                                        std::span<const Timestamp> times) {
  TemporalNetwork net(params, data.size());
  std::vector<WeightedGraph> out;
  out.reserve(times.size());
  std::size_t cursor = 0;
  Timestamp prev = std::numeric_limits<Timestamp>::min();
  for (Timestamp t : times) {
    if (t < prev) throw ValidationError("snapshot times must be non-decreasing");
    prev = t;
    cursor = net.advance(data.events(), cursor, t);
    out.push_back(net.snapshot_at(t));
  }
  return out;
}

}  // namespace fairdyn
