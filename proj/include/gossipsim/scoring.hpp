/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <optional>
#include <unordered_map>

#include "gossipsim/types.hpp"

namespace gossipsim {

  /// Weights, caps and thresholds for the per-topic part of the score.
  ///
  /// Weight signs are fixed: time-in-mesh and first deliveries reward,
  /// the mesh delivery deficit, delivery failures and invalid messages
  /// penalise.
  struct TopicScoreParams {
    double topic_weight = 1.0;

    /// P1, time in mesh, counted in seconds and capped.
    double time_in_mesh_weight = 1.0 / 3600.0;
    double time_in_mesh_cap_s = 3600.0;

    /// P2, first message deliveries.
    double first_deliveries_weight = 1.0;
    double first_deliveries_cap = 100.0;

    /// P3a, squared deficit of mesh deliveries against a threshold.
    double mesh_deliveries_weight = -1.0;
    double mesh_deliveries_threshold = 2.5;
    double mesh_deliveries_cap = 100.0;
    /// Time in mesh before the deficit is charged.
    SimTime mesh_deliveries_activation_ms = 2000;
    /// A duplicate from a mesh peer only counts if it arrives within this
    /// long of the first copy.
    SimTime mesh_deliveries_window_ms = 500;

    /// P3b, squared at evaluation time.
    double mesh_failure_penalty_weight = -1.0;

    /// P4, invalid messages, linear and uncapped.
    double invalid_messages_weight = -10.0;

    void validate() const;
  };

  struct DecayFactors {
    double first_deliveries = 0.9;
    double mesh_deliveries = 0.9;
    double mesh_failure_penalty = 0.9;
    double invalid_messages = 0.9;
  };

  struct ScoreParams {
    /// Applies to every topic without an explicit entry in `topics`.
    TopicScoreParams topic_defaults;
    std::map<TopicId, TopicScoreParams> topics;

    /// Ceiling on the weighted per-topic sum. Negative sums are not capped.
    double topic_cap = 100.0;
    /// P5, application-specific score.
    double app_specific_weight = 1.0;
    /// P6, IP collocation surplus squared.
    double ip_colocation_weight = -1.0;
    double ip_colocation_threshold = 1.0;

    SimTime decay_interval_ms = 1000;
    DecayFactors decay;
    double decay_to_zero = 0.01;

    const TopicScoreParams &for_topic(const TopicId &topic) const;

    /// Throws std::invalid_argument on a sign, range or decay violation.
    void validate() const;
  };

  struct TopicStats {
    bool in_mesh = false;
    std::optional<SimTime> mesh_since;
    double first_deliveries = 0;
    double mesh_deliveries = 0;
    double mesh_failure_penalty = 0;
    double invalid_messages = 0;
  };

  struct PeerStats {
    std::map<TopicId, TopicStats> topics;
    double app_score = 0;
    IpLabel ip;
    bool connected = true;
  };

  enum class DeliveryKind { kFirst, kDuplicate };

  /// Evaluates the score of one peer from its counters. `peers_on_ip` is the
  /// number of connected peers sharing its IP label.
  double evaluate_score(const PeerStats &stats, std::size_t peers_on_ip,
                        SimTime now, const ScoreParams &params);

  /// Deficit of mesh deliveries that is currently being charged; zero while
  /// the peer is outside the mesh or still within the activation window.
  double active_delivery_deficit(const TopicStats &stats, SimTime now,
                                 const TopicScoreParams &params);

  /// Scores kept by one node for every peer it talks to. Never shared.
  class ScoreBook {
   public:
    explicit ScoreBook(ScoreParams params = {});

    const ScoreParams &params() const {
      return params_;
    }

    void add_peer(PeerId peer, const IpLabel &ip);
    /// Marks the peer disconnected; its counters are retained.
    void remove_peer(PeerId peer);

    void record_graft(PeerId peer, const TopicId &topic, SimTime now);
    void record_prune(PeerId peer, const TopicId &topic, SimTime now);
    void record_delivery(PeerId peer, const TopicId &topic, DeliveryKind kind,
                         bool in_mesh, bool within_window);
    void record_invalid(PeerId peer, const TopicId &topic);
    void set_app_score(PeerId peer, double value);

    void decay_tick(SimTime now);

    /// Unknown peers score 0.
    double score(PeerId peer, SimTime now) const;

    const PeerStats *stats(PeerId peer) const;
    std::size_t peers_on_ip(const IpLabel &ip) const;

   private:
    PeerStats &entry(PeerId peer);
    TopicStats &topic_entry(PeerId peer, const TopicId &topic);

    ScoreParams params_;
    std::unordered_map<PeerId, PeerStats> stats_;
    std::map<IpLabel, std::size_t> ip_census_;
  };

}  // namespace gossipsim
