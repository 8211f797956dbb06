#include <doctest.h>

#include <cmath>

#include "fairdyn/cogsnet.hpp"

using namespace fairdyn;
using doctest::Approx;

namespace {

CogsnetParams params(double mu, double theta, double lambda) {
  CogsnetParams p;
  p.mu = mu;
  p.theta = theta;
  p.lambda = lambda;
  return p;
}

CommEvent at(Timestamp t, NodeId u = 0, NodeId v = 1) { return {u, v, t, Channel::Text}; }

}  // namespace

TEST_CASE("forgetting function") {
  const auto p = params(0.4, 0.1, std::log(2.0) / 3600.0);
  CHECK(forgetting(p, 0.0) == 1.0);
  CHECK(forgetting(p, 3600.0) == Approx(0.5).epsilon(1e-12));
  CHECK(forgetting(p, 10.0 / p.lambda) == Approx(std::exp(-10.0)).epsilon(1e-12));
  CHECK_THROWS_AS(forgetting(p, -1.0), ValidationError);
}

TEST_CASE("reinforcement rule") {
  const double lambda = std::log(2.0) / 3600.0;
  TemporalNetwork net(params(0.4, 0.1, lambda), 3);

  net.process_event(at(0));
  CHECK(net.weight_at(0, 1, 0) == Approx(0.4));

  // One half-life later: 0.4 + 0.4 * 0.5 * 0.6.
  net.process_event(at(3600));
  CHECK(net.weight_at(0, 1, 3600) == Approx(0.52).epsilon(1e-12));

  // Immediate repeat: 0.4 + 0.52 * 0.6.
  net.process_event(at(3600, 1, 0));
  CHECK(net.weight_at(1, 0, 3600) == Approx(0.712).epsilon(1e-12));
}

TEST_CASE("weight queries") {
  const double lambda = std::log(2.0) / 3600.0;
  TemporalNetwork net(params(0.4, 0.1, lambda), 3);
  net.process_event(at(1000));
  CHECK(net.weight_at(0, 2, 5000) == 0.0);
  CHECK(net.weight_at(0, 1, 1000) == 0.4);
  // Three half-lives take 0.4 to 0.05, below theta.
  CHECK(net.weight_at(0, 1, 1000 + 3 * 3600) == 0.0);
  CHECK(net.weight_at(0, 1, 1000 + 3600) == Approx(0.2));
  CHECK_THROWS_AS(net.weight_at(0, 1, 999), ValidationError);
}

TEST_CASE("a pruned edge restarts at mu") {
  const double lambda = std::log(2.0) / 3600.0;
  TemporalNetwork net(params(0.4, 0.1, lambda), 2);
  net.process_event(at(0));
  net.process_event(at(4 * 3600));
  CHECK(net.weight_at(0, 1, 4 * 3600) == 0.4);
}

TEST_CASE("out-of-order events are rejected") {
  TemporalNetwork net(params(0.4, 0.1, 1e-5), 2);
  net.process_event(at(100));
  CHECK_THROWS_AS(net.process_event(at(50)), OutOfOrderEvent);
}

TEST_CASE("channel multipliers clamp the peak at 1") {
  auto p = params(0.6, 0.1, 1e-5);
  p.channel_mu_multiplier = {2.0, 1.0};
  TemporalNetwork net(p, 2);
  net.process_event({0, 1, 0, Channel::Call});
  CHECK(net.weight_at(0, 1, 0) == 1.0);
}

TEST_CASE("snapshots") {
  const double lambda = std::log(2.0) / 3600.0;
  SUBCASE("empty history") {
    TemporalNetwork net(params(0.4, 0.1, lambda), 4);
    const auto g = net.snapshot_at(0);
    CHECK(g.node_count() == 4);
    CHECK(g.edge_count() == 0);
  }
  SUBCASE("single event") {
    TemporalNetwork net(params(0.4, 0.1, lambda), 4);
    net.process_event(at(500, 2, 3));
    const auto now = net.snapshot_at(500);
    CHECK(now.edge_count() == 1);
    CHECK(now.weight(2, 3) == 0.4);
    CHECK(net.snapshot_at(500 + 100 * 3600).edge_count() == 0);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(0.4, 0.5, 1e-5).validate(), ValidationError);
  CHECK_THROWS_AS(params(1.2, 0.1, 1e-5).validate(), ValidationError);
  CHECK_THROWS_AS(params(0.4, 0.1, 0.0).validate(), ValidationError);
  const auto p = CogsnetParams::from_json({{"mu", 0.5}, {"theta", 0.2}, {"lambda_per_day", 0.1}});
  CHECK(p.lambda == Approx(0.1 / 86400.0));
  CHECK(CogsnetParams::from_json(p.to_json()).lambda == Approx(p.lambda));
}
