/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gossipsim/adversary.hpp"
#include "gossipsim/baselines.hpp"
#include "gossipsim/metrics.hpp"
#include "gossipsim/router.hpp"

namespace gossipsim {

  enum class Protocol { kGossipSub, kPlain, kFlood, kSqrtN };

  std::string to_string(Protocol p);
  /// gossipsub, plain, flood or sqrtn. Throws std::invalid_argument.
  Protocol parse_protocol(const std::string &name);

  struct LatencyModel {
    enum class Distribution { kUniform, kLognormal };

    SimTime min_ms = 10;
    SimTime max_ms = 150;
    Distribution distribution = Distribution::kUniform;
    /// Parameters of the underlying normal, in log-milliseconds.
    double mu = 4.0;
    double sigma = 0.5;

    void validate() const;
  };

  /// Uniform integer in [min, max], or a lognormal draw rounded and clamped
  /// to that range.
  SimTime sample_latency(const LatencyModel &model, Rng &rng);

  struct TrafficParams {
    /// Aggregate messages per second across all publishers.
    double message_rate = 10.0;
    std::uint32_t message_size = 2000;
    std::vector<std::string> topics{"blocks"};
    /// Publishing starts this long after the honest nodes join...
    SimTime warmup_ms = 0;
    /// ...and stops this long before the end, so the last messages can
    /// settle.
    SimTime drain_ms = 5000;
  };

  struct ScenarioConfig {
    std::string name = "custom";
    std::uint64_t seed = 1;
    SimTime duration_ms = 300000;

    std::size_t n_honest = 200;
    /// Honest nodes 0..n_publishers-1 publish.
    std::size_t n_publishers = 20;
    std::size_t n_sybil = 0;

    /// Outbound dials per honest node at join time.
    int honest_max_conns = 20;
    /// Inbound cap for honest nodes; 0 means unlimited.
    int honest_max_inbound = 0;
    /// Extra outbound connections a node may open towards PX peers.
    int px_dial_budget = 50;
    int sybil_max_conns = 100;
    /// Number of Sybils sharing one IP label.
    int sybil_ip_group = 1;

    Protocol protocol = Protocol::kGossipSub;
    MeshParams mesh;
    ScoreParams score;
    /// Derive the P3a threshold from the traffic rate instead of taking
    /// score.topic_defaults.mesh_deliveries_threshold verbatim.
    bool p3a_threshold_auto = true;
    FloodParams flood;
    /// sqrtn forwarding degree; ceil(sqrt(n_honest)) when unset.
    std::optional<std::size_t> sqrtn_degree;

    SimTime honest_join_ms = 0;
    SimTime sybil_join_ms = 0;
    AdversaryBehavior adversary;

    TrafficParams traffic;
    LatencyModel latency;

    bool mesh_snapshots = true;

    /// Throws std::invalid_argument on the first violated constraint.
    void validate() const;

    /// Mesh parameters honest nodes actually run with: `mesh`, with every
    /// mitigation switched off for the plain protocol.
    MeshParams effective_mesh() const;
    /// Score parameters after resolving the automatic P3a threshold.
    ScoreParams effective_score() const;
    std::size_t effective_sqrtn_degree() const;
  };

  /// rate * heartbeat seconds * 0.25, the automatic P3a threshold.
  double auto_p3a_threshold(double message_rate, SimTime heartbeat_ms);

  struct Topology {
    struct Link {
      PeerId dialer;
      PeerId acceptor;
    };
    std::vector<Link> links;
    std::uint64_t refused = 0;
  };

  /// Initial connections of a scenario, all join groups applied in order.
  /// Used by tests and `explain` tooling; `run` builds the same graph.
  Topology build_topology(const ScenarioConfig &cfg);

  struct RunHooks {
    /// Called after every honest heartbeat.
    std::function<void(const Node &, SimTime)> after_heartbeat;
  };

  /// Executes the scenario. `extra` receives every trace event as well.
  RunReport run(const ScenarioConfig &cfg, TraceSink *extra = nullptr,
                const RunHooks &hooks = {});

}  // namespace gossipsim
