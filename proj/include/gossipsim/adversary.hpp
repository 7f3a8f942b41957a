/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>

#include "gossipsim/router.hpp"

namespace gossipsim {

  enum class AttackKind { kGraftSpam, kEclipseDrop, kCensor, kCovertFlash, kSpam };

  std::string to_string(AttackKind kind);
  /// Accepts the config spellings: graft_spam, eclipse_drop, censor,
  /// covert_flash, spam. Throws std::invalid_argument otherwise.
  AttackKind parse_attack_kind(const std::string &name);

  struct AdversaryBehavior {
    AttackKind kind = AttackKind::kEclipseDrop;
    /// Censor: publisher whose messages are suppressed.
    PeerId target = PeerId{0};
    /// CovertFlash: time at which forwarding stops.
    SimTime attack_time_ms = 0;
    /// Spam: probability of attaching a garbage message to each forward.
    double invalid_rate = 0.0;
    int conn_budget = 100;

    void validate() const;
  };

  /// A Sybil. Relay behaviours (GraftSpam, Censor, Spam, CovertFlash before
  /// its attack time) run a full router underneath and doctor its output;
  /// drop behaviours accept every GRAFT, forward nothing, and keep grafting
  /// onto every honest peer that is not currently meshed with them.
  class AdversaryNode : public Node {
   public:
    using ColluderTest = std::function<bool(PeerId)>;

    AdversaryNode(PeerId self, AdversaryBehavior behavior, MeshParams mesh,
                  ScoreParams score, std::uint64_t seed,
                  ColluderTest is_colluder);

    PeerId id() const override {
      return self_;
    }
    bool honest() const override {
      return false;
    }
    const AdversaryBehavior &behavior() const {
      return behavior_;
    }

    void add_peer(PeerId peer, Direction dir, const IpLabel &ip,
                  SimTime now) override;
    void remove_peer(PeerId peer, SimTime now) override;

    Effects join(const TopicId &topic, SimTime now) override;
    Effects handle_rpc(const Rpc &rpc, SimTime now) override;
    Effects publish(const Message &msg, SimTime now) override;
    Effects heartbeat(SimTime now) override;

    std::vector<PeerId> mesh_peers(const TopicId &topic) const override;

    /// True once the node forwards nothing.
    bool dropping(SimTime now) const;

    const Router &inner() const {
      return *inner_;
    }

   private:
    void enter_drop_mode();
    Effects graft_spam(SimTime now);
    void censor(Effects &fx) const;
    void inject_garbage(Effects &fx, SimTime now);

    PeerId self_;
    AdversaryBehavior behavior_;
    std::unique_ptr<Router> inner_;
    ColluderTest is_colluder_;
    Rng rng_;

    std::set<PeerId> peers_;
    std::set<TopicId> topics_;
    /// Drop mode: honest peers presumed to hold us in their mesh.
    std::map<TopicId, std::set<PeerId>> meshed_;
    bool drop_mode_ = false;
    std::uint64_t garbage_seqno_ = 0;
  };

}  // namespace gossipsim
