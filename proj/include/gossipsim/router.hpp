/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "gossipsim/mcache.hpp"
#include "gossipsim/node.hpp"
#include "gossipsim/rng.hpp"
#include "gossipsim/scoring.hpp"

namespace gossipsim {

  struct MeshParams {
    int d = 8;
    int d_low = 6;
    int d_high = 12;
    int d_score = 6;
    int d_out = 2;
    /// Gossip target floor, and the fixed target count when adaptive
    /// gossip is off.
    int d_lazy = 6;

    SimTime heartbeat_interval_ms = 1000;
    double gossip_factor = 0.25;
    int gossip_rounds = 3;
    int mcache_len = 5;
    SimTime prune_backoff_ms = 60000;
    int px_count = 16;

    SimTime opp_graft_period_ms = 60000;
    double opp_graft_threshold = 1.0;
    int opp_graft_peers = 2;

    int max_iwant_per_heartbeat = 512;
    SimTime seen_ttl_ms = 120000;
    /// Lets mesh members receive IHAVE too.
    bool gossip_to_mesh = false;

    /// Mitigations. All off gives plain GossipSub.
    bool scoring = true;
    bool controlled_mesh = true;
    bool backoff = true;
    bool flood_publish = true;
    bool opportunistic_graft = true;
    bool adaptive_gossip = true;
    bool gossip_enabled = true;

    /// Defaults with every mitigation disabled.
    static MeshParams plain();

    /// Throws std::invalid_argument when a degree or window bound is broken.
    void validate() const;
  };

  /// Number of IHAVE targets for `candidates` non-mesh peers.
  std::size_t gossip_target_count(const MeshParams &params,
                                  std::size_t candidates);

  /// Uniform sample of gossip targets from `candidates`.
  std::vector<PeerId> select_gossip_targets(const MeshParams &params,
                                            std::vector<PeerId> candidates,
                                            Rng &rng);

  class Router : public Node {
   public:
    Router(PeerId self, MeshParams mesh, ScoreParams score,
           std::uint64_t seed);

    PeerId id() const override {
      return self_;
    }

    const MeshParams &mesh_params() const {
      return params_;
    }
    MeshParams &mutable_mesh_params() {
      return params_;
    }

    void add_peer(PeerId peer, Direction dir, const IpLabel &ip,
                  SimTime now) override;
    void remove_peer(PeerId peer, SimTime now) override;
    /// Explicit peers get every valid message and never enter the mesh.
    void add_explicit_peer(PeerId peer);

    void set_validator(const TopicId &topic, Validator validator);

    Effects join(const TopicId &topic, SimTime now) override;
    Effects leave(const TopicId &topic, SimTime now);

    Effects handle_rpc(const Rpc &rpc, SimTime now) override;
    Effects handle_graft(PeerId from, const TopicId &topic, SimTime now);
    Effects handle_prune(PeerId from, const Prune &prune, SimTime now);
    Effects handle_message(PeerId from, const Message &msg, SimTime now);
    Effects handle_ihave(PeerId from, const IHave &ihave, SimTime now);
    Effects handle_iwant(PeerId from, const IWant &iwant, SimTime now);

    Effects publish(const Message &msg, SimTime now) override;
    Effects heartbeat(SimTime now) override;

    Effects maintain_mesh(const TopicId &topic, SimTime now);
    Effects opportunistic_graft(const TopicId &topic, SimTime now);
    Effects emit_gossip(const TopicId &topic, SimTime now);

    /// Adds `peer` to the local mesh and sends GRAFT, bypassing every gate.
    Effects force_graft(PeerId peer, const TopicId &topic, SimTime now);

    bool subscribed(const TopicId &topic) const;
    std::vector<PeerId> mesh_peers(const TopicId &topic) const override;
    const std::map<PeerId, Direction> *mesh(const TopicId &topic) const;
    std::size_t outbound_in_mesh(const TopicId &topic) const;
    std::vector<PeerId> connected_peers() const;
    bool connected(PeerId peer) const;
    std::optional<Direction> direction(PeerId peer) const;

    /// Either table below holds an unexpired entry for `peer`.
    bool backed_off(PeerId peer, const TopicId &topic, SimTime now) const;
    /// We sent `peer` a PRUNE; a GRAFT from it now is a violation.
    bool announced_backoff(PeerId peer, const TopicId &topic,
                           SimTime now) const;
    bool seen(MessageId id) const {
      return seen_.contains(id);
    }

    double score(PeerId peer, SimTime now) const;
    ScoreBook &scorebook() {
      return scores_;
    }
    const ScoreBook &scorebook() const {
      return scores_;
    }
    const MessageCache &mcache() const {
      return mcache_;
    }

   private:
    struct PeerInfo {
      Direction dir;
      IpLabel ip;
    };

    bool in_mesh(PeerId peer, const TopicId &topic) const;
    using BackoffTable = std::map<TopicId, std::unordered_map<PeerId, SimTime>>;

    bool score_ok(PeerId peer, SimTime now) const;
    bool score_positive(PeerId peer, SimTime now) const;
    /// No backoff forbids us from grafting `peer`.
    bool may_graft(PeerId peer, const TopicId &topic, SimTime now) const;
    void graft(Effects &fx, PeerId peer, const TopicId &topic, SimTime now);
    void prune(Effects &fx, PeerId peer, const TopicId &topic, SimTime now,
               bool with_px);
    /// Also records the announced backoff in `backoff_`.
    void send_prune(Effects &fx, PeerId peer, const TopicId &topic,
                    SimTime now, bool with_px);
    static void arm_backoff(BackoffTable &table, PeerId peer,
                            const TopicId &topic, SimTime until);
    std::vector<PeerId> px_for(PeerId exclude, SimTime now);
    /// Connected, non-mesh, non-explicit peers of `topic`, PeerId order.
    /// Up to `k` graftable peers from `pool`: positive scorers, then
    /// zero-score outbound peers, then zero-score inbound peers.
    std::vector<PeerId> pick_repair(const std::vector<PeerId> &pool,
                                    const TopicId &topic, SimTime now,
                                    std::size_t k);
    std::vector<PeerId> non_mesh_peers(const TopicId &topic) const;
    void mark_seen(MessageId id, SimTime now);
    void forward(Effects &fx, const Message &msg, PeerId from);

    PeerId self_;
    MeshParams params_;
    ScoreBook scores_;
    Rng rng_;
    MessageCache mcache_;
    ValidatorRegistry validators_;

    std::map<PeerId, PeerInfo> peers_;
    std::set<PeerId> explicit_;
    std::set<TopicId> topics_;
    std::map<TopicId, std::map<PeerId, Direction>> mesh_;
    /// Backoffs we announced in PRUNEs, cleared when we graft the peer.
    BackoffTable backoff_;
    /// Peers we must not graft: they pruned us, or we pruned them from the
    /// mesh. Cleared when we accept their GRAFT.
    BackoffTable graft_backoff_;
    std::unordered_map<MessageId, SimTime> seen_;
    std::deque<std::pair<SimTime, MessageId>> seen_order_;
    std::unordered_map<PeerId, int> iwant_budget_used_;
    /// PX candidates, rebuilt lazily once per heartbeat.
    std::optional<std::vector<PeerId>> px_pool_;
    SimTime last_decay_ = 0;
    SimTime last_opp_graft_ = 0;
    bool heartbeat_started_ = false;
  };

}  // namespace gossipsim
