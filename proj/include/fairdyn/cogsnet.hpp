#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairdyn/core.hpp"
#include "fairdyn/data_model.hpp"
#include "fairdyn/graph.hpp"

namespace fairdyn {

enum class ForgettingKind : std::uint8_t { Exponential };

/// Parameters of the cognitive temporal network.
///
/// `mu` is the reinforcement peak, `theta` the removal threshold and `lambda`
/// the forgetting rate in 1/second. Requires 0 < theta < mu <= 1, lambda > 0.
struct CogsnetParams {
  double mu = 0.4;
  double theta = 0.1;
  double lambda = std::log(2.0) / (7.0 * kSecondsPerDay);
  ForgettingKind forgetting = ForgettingKind::Exponential;
  /// Per-channel multiplier on mu (call, text); the effective peak is
  /// clamped to 1.
  std::array<double, 2> channel_mu_multiplier{1.0, 1.0};

  void validate() const;

  /// Reads `mu`, `theta`, `lambda_per_day` (and optional
  /// `channel_mu_multiplier`) from a `cogsnet` config object; absent keys keep
  /// the defaults.
  static CogsnetParams from_json(const nlohmann::json& obj);
  nlohmann::json to_json() const;
};

/// f(delta_t) = exp(-lambda * delta_t). Throws ValidationError for negative
/// delta_t.
double forgetting(const CogsnetParams& params, double delta_t);

struct EdgeState {
  double weight_at_last_event;
  Timestamp last_event_time;
};

/// Unordered participant pair with first < second.
using NodePair = std::pair<NodeId, NodeId>;

inline NodePair make_pair_key(NodeId a, NodeId b) noexcept {
  return a < b ? NodePair{a, b} : NodePair{b, a};
}

class OutOfOrderEvent : public ValidationError {
 public:
  OutOfOrderEvent(Timestamp event_time, Timestamp clock);
};

/// Event-driven edge weights with exponential forgetting and threshold
/// pruning. Ingestion is single-writer and must be time-monotone.
class TemporalNetwork {
 public:
  TemporalNetwork(CogsnetParams params, std::size_t node_count);

  /// Reinforces the event's edge. A new or already-pruned edge starts at mu;
  /// an existing one becomes mu + w * f(dt) * (1 - mu).
  void process_event(const CommEvent& event);

  /// Processes every event with timestamp <= t, starting at `cursor`.
  /// Returns the new cursor.
  std::size_t advance(std::span<const CommEvent> events, std::size_t cursor, Timestamp t);

  /// Decayed weight at time t, or 0 when the pair has no edge or the decayed
  /// weight fell below theta. Throws when t precedes the pair's last event.
  double weight_at(NodeId u, NodeId v, Timestamp t) const;
  double weight_at(const NodePair& pair, const EdgeState& state, Timestamp t) const;

  /// Graph over all participants holding every edge whose weight at t is at
  /// least theta. Edges whose last event lies after t are not part of the
  /// state at t and are left out.
  WeightedGraph snapshot_at(Timestamp t) const;

  const CogsnetParams& params() const noexcept { return params_; }
  Timestamp clock() const noexcept { return clock_; }
  std::size_t node_count() const noexcept { return node_count_; }
  const std::map<NodePair, EdgeState>& edges() const noexcept { return edges_; }

 private:
  CogsnetParams params_;
  std::size_t node_count_;
  std::map<NodePair, EdgeState> edges_;
  Timestamp clock_ = std::numeric_limits<Timestamp>::min();
};

/// Replays `data`'s events and snapshots the network at each requested time.
/// `times` must be non-decreasing.
std::vector<WeightedGraph> snapshots_at(const Dataset& data, const CogsnetParams& params,
                                        std::span<const Timestamp> times);

}  // namespace fairdyn
