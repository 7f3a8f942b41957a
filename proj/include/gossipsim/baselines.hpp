/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <deque>
#include <set>
#include <unordered_map>

#include "gossipsim/node.hpp"
#include "gossipsim/rng.hpp"

namespace gossipsim {

  /// Bitcoin-style connection budget.
  struct FloodParams {
    int max_inbound = 125;
    int max_outbound = 8;

    int total() const {
      return max_inbound + max_outbound;
    }
  };

  struct SqrtNParams {
    std::size_t network_size = 1000;

    /// ceil(sqrt(network_size)), computed exactly.
    std::size_t degree() const;
  };

  /// Common part of the meshless baselines: a seen-set with the same TTL
  /// rule as the router, local delivery and duplicate notes.
  class BroadcastNode : public Node {
   public:
    BroadcastNode(PeerId self, SimTime seen_ttl_ms);

    PeerId id() const override {
      return self_;
    }

    void add_peer(PeerId peer, Direction dir, const IpLabel &ip,
                  SimTime now) override;
    void remove_peer(PeerId peer, SimTime now) override;

    Effects join(const TopicId &topic, SimTime now) override;
    Effects handle_rpc(const Rpc &rpc, SimTime now) override;
    Effects publish(const Message &msg, SimTime now) override;
    Effects heartbeat(SimTime now) override;

    /// Outcome of one incoming message, without going through an Rpc.
    Effects on_message(PeerId from, const Message &msg, SimTime now);

    const std::set<PeerId> &peers() const {
      return peers_;
    }

   protected:
    /// Peers that receive a new message; `from` is kNoPeer for own
    /// publications.
    virtual std::vector<PeerId> targets(PeerId from) = 0;

    PeerId self_;

   private:
    void relay(Effects &fx, const Message &msg, PeerId from);

    SimTime seen_ttl_ms_;
    std::set<PeerId> peers_;
    std::set<TopicId> topics_;
    std::unordered_map<MessageId, SimTime> seen_;
    std::deque<std::pair<SimTime, MessageId>> seen_order_;
  };

  /// Forwards every new message to all connections except the sender.
  class FloodNode : public BroadcastNode {
   public:
    using BroadcastNode::BroadcastNode;

   protected:
    std::vector<PeerId> targets(PeerId from) override;
  };

  /// Forwards every new message to a fresh uniform sample of `degree`
  /// connections, excluding the sender.
  class SqrtNNode : public BroadcastNode {
   public:
    SqrtNNode(PeerId self, std::size_t degree, SimTime seen_ttl_ms,
              std::uint64_t seed);

    std::size_t degree() const {
      return degree_;
    }

   protected:
    std::vector<PeerId> targets(PeerId from) override;

   private:
    std::size_t degree_;
    Rng rng_;
  };

}  // namespace gossipsim
