/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/scoring.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gossipsim {

  namespace {

    void require(bool ok, const char *what) {
      if (!ok) {
        throw std::invalid_argument(std::string("score params: ") + what);
      }
    }

    void decay_counter(double &c, double factor, double to_zero) {
      c *= factor;
      if (c < to_zero) {
        c = 0;
      }
    }

  }  // namespace

  void TopicScoreParams::validate() const {
    require(topic_weight >= 0, "topic_weight must be >= 0");
    require(time_in_mesh_weight > 0, "w1 must be > 0");
    require(time_in_mesh_cap_s > 0, "p1_cap must be > 0");
    require(first_deliveries_weight > 0, "w2 must be > 0");
    require(first_deliveries_cap > 0, "p2_cap must be > 0");
    require(mesh_deliveries_weight <= 0, "w3a must be <= 0");
    require(mesh_deliveries_threshold > 0, "p3a_threshold must be > 0");
    require(mesh_deliveries_cap > 0, "p3a_cap must be > 0");
    require(mesh_deliveries_activation_ms >= 0,
            "p3a_activation_window must be >= 0");
    require(mesh_deliveries_window_ms >= 0, "mesh delivery window must be >= 0");
    require(mesh_failure_penalty_weight <= 0, "w3b must be <= 0");
    require(invalid_messages_weight <= 0, "w4 must be <= 0");
  }

  const TopicScoreParams &ScoreParams::for_topic(const TopicId &topic) const {
    auto it = topics.find(topic);
    return it == topics.end() ? topic_defaults : it->second;
  }

  void ScoreParams::validate() const {
    topic_defaults.validate();
    for (const auto &[_, p] : topics) {
      p.validate();
    }
    require(topic_cap > 0, "topic_cap must be > 0");
    require(app_specific_weight >= 0, "w5 must be >= 0");
    require(ip_colocation_weight <= 0, "w6 must be <= 0");
    require(ip_colocation_threshold >= 1, "p6_ip_threshold must be >= 1");
    require(decay_interval_ms > 0, "decay_interval must be > 0");
    for (double f : {decay.first_deliveries, decay.mesh_deliveries,
                     decay.mesh_failure_penalty, decay.invalid_messages}) {
      require(f > 0 && f <= 1, "decay factors must lie in (0, 1]");
    }
    require(decay_to_zero >= 0, "decay_to_zero must be >= 0");
  }

  double active_delivery_deficit(const TopicStats &stats, SimTime now,
                                 const TopicScoreParams &params) {
    if (!stats.in_mesh || !stats.mesh_since) {
      return 0;
    }
    if (now - *stats.mesh_since < params.mesh_deliveries_activation_ms) {
      return 0;
    }
    return std::max(0.0,
                    params.mesh_deliveries_threshold - stats.mesh_deliveries);
  }

  double evaluate_score(const PeerStats &stats, std::size_t peers_on_ip,
                        SimTime now, const ScoreParams &params) {
    double topic_sum = 0;
    for (const auto &[topic, ts] : stats.topics) {
      const auto &tp = params.for_topic(topic);
      double time_in_mesh = 0;
      if (ts.in_mesh && ts.mesh_since) {
        time_in_mesh = std::clamp(
            static_cast<double>(now - *ts.mesh_since) / 1000.0, 0.0,
            tp.time_in_mesh_cap_s);
      }
      const double first = std::min(ts.first_deliveries, tp.first_deliveries_cap);
      const double deficit = active_delivery_deficit(ts, now, tp);
      const double deficit_sq = std::min(tp.mesh_deliveries_cap, deficit * deficit);
      const double failures_sq = ts.mesh_failure_penalty * ts.mesh_failure_penalty;

      topic_sum += tp.topic_weight
                 * (tp.time_in_mesh_weight * time_in_mesh
                    + tp.first_deliveries_weight * first
                    + tp.mesh_deliveries_weight * deficit_sq
                    + tp.mesh_failure_penalty_weight * failures_sq
                    + tp.invalid_messages_weight * ts.invalid_messages);
    }
    topic_sum = std::min(topic_sum, params.topic_cap);

    double colocation = 0;
    if (!stats.ip.empty()) {
      const double surplus =
          static_cast<double>(peers_on_ip) - params.ip_colocation_threshold;
      if (surplus > 0) {
        colocation = surplus * surplus;
      }
    }
    return topic_sum + params.app_specific_weight * stats.app_score
         + params.ip_colocation_weight * colocation;
  }

  ScoreBook::ScoreBook(ScoreParams params) : params_(std::move(params)) {}

  PeerStats &ScoreBook::entry(PeerId peer) {
    return stats_[peer];
  }

  TopicStats &ScoreBook::topic_entry(PeerId peer, const TopicId &topic) {
    return entry(peer).topics[topic];
  }

  void ScoreBook::add_peer(PeerId peer, const IpLabel &ip) {
    auto [it, inserted] = stats_.try_emplace(peer);
    auto &st = it->second;
    if (!inserted && st.connected) {
      if (st.ip == ip) {
        return;
      }
      if (!st.ip.empty()) {
        --ip_census_[st.ip];
      }
    }
    st.connected = true;
    st.ip = ip;
    if (!ip.empty()) {
      ++ip_census_[ip];
    }
  }

  void ScoreBook::remove_peer(PeerId peer) {
    auto it = stats_.find(peer);
    if (it == stats_.end() || !it->second.connected) {
      return;
    }
    it->second.connected = false;
    if (!it->second.ip.empty()) {
      auto c = ip_census_.find(it->second.ip);
      if (c != ip_census_.end() && --c->second == 0) {
        ip_census_.erase(c);
      }
    }
    for (auto &[_, ts] : it->second.topics) {
      ts.in_mesh = false;
      ts.mesh_since.reset();
    }
  }

  void ScoreBook::record_graft(PeerId peer, const TopicId &topic, SimTime now) {
    auto &ts = topic_entry(peer, topic);
    if (ts.in_mesh) {
      return;
    }
    ts.in_mesh = true;
    ts.mesh_since = now;
  }

  void ScoreBook::record_prune(PeerId peer, const TopicId &topic, SimTime now) {
    auto it = stats_.find(peer);
    if (it == stats_.end()) {
      return;
    }
    auto ts_it = it->second.topics.find(topic);
    if (ts_it == it->second.topics.end() || !ts_it->second.in_mesh) {
      return;
    }
    auto &ts = ts_it->second;
    const double deficit =
        active_delivery_deficit(ts, now, params_.for_topic(topic));
    if (deficit > 0 && score(peer, now) < 0) {
      ts.mesh_failure_penalty += deficit;
    }
    ts.in_mesh = false;
    ts.mesh_since.reset();
  }

  void ScoreBook::record_delivery(PeerId peer, const TopicId &topic,
                                  DeliveryKind kind, bool in_mesh,
                                  bool within_window) {
    auto &ts = topic_entry(peer, topic);
    if (kind == DeliveryKind::kFirst) {
      ts.first_deliveries += 1;
      if (in_mesh) {
        ts.mesh_deliveries += 1;
      }
    } else if (in_mesh && within_window) {
      ts.mesh_deliveries += 1;
    }
  }

  void ScoreBook::record_invalid(PeerId peer, const TopicId &topic) {
    topic_entry(peer, topic).invalid_messages += 1;
  }

  void ScoreBook::set_app_score(PeerId peer, double value) {
    entry(peer).app_score = value;
  }

  void ScoreBook::decay_tick(SimTime /*now*/) {
    const auto &d = params_.decay;
    const double z = params_.decay_to_zero;
    for (auto &[_, st] : stats_) {
      for (auto &[__, ts] : st.topics) {
        decay_counter(ts.first_deliveries, d.first_deliveries, z);
        decay_counter(ts.mesh_deliveries, d.mesh_deliveries, z);
        decay_counter(ts.mesh_failure_penalty, d.mesh_failure_penalty, z);
        decay_counter(ts.invalid_messages, d.invalid_messages, z);
      }
    }
  }

  double ScoreBook::score(PeerId peer, SimTime now) const {
    auto it = stats_.find(peer);
    if (it == stats_.end()) {
      return 0;
    }
    const auto &st = it->second;
    return evaluate_score(st, st.connected ? peers_on_ip(st.ip) : 0, now,
                          params_);
  }

  const PeerStats *ScoreBook::stats(PeerId peer) const {
    auto it = stats_.find(peer);
    return it == stats_.end() ? nullptr : &it->second;
  }

  std::size_t ScoreBook::peers_on_ip(const IpLabel &ip) const {
    auto it = ip_census_.find(ip);
    return it == ip_census_.end() ? 0 : it->second;
  }

}  // namespace gossipsim
