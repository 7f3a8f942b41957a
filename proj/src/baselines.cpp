/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/baselines.hpp"

namespace gossipsim {

  std::size_t SqrtNParams::degree() const {
    std::size_t r = 0;
    while (r * r < network_size) {
      ++r;
    }
    return r;
  }

  BroadcastNode::BroadcastNode(PeerId self, SimTime seen_ttl_ms)
      : self_(self), seen_ttl_ms_(seen_ttl_ms) {}

  void BroadcastNode::add_peer(PeerId peer, Direction /*dir*/,
                               const IpLabel & /*ip*/, SimTime /*now*/) {
    if (peer != self_) {
      peers_.insert(peer);
    }
  }

  void BroadcastNode::remove_peer(PeerId peer, SimTime /*now*/) {
    peers_.erase(peer);
  }

  Effects BroadcastNode::join(const TopicId &topic, SimTime /*now*/) {
    topics_.insert(topic);
    return {};
  }

  Effects BroadcastNode::on_message(PeerId from, const Message &msg,
                                    SimTime now) {
    Effects fx;
    const MessageId id = compute_message_id(msg);
    if (seen_.contains(id)) {
      fx.note(NoteKind::kDuplicate, from, id);
      return fx;
    }
    if (!topics_.contains(msg.topic)) {
      fx.note(NoteKind::kUnknownTopic, from, id);
      return fx;
    }
    seen_.emplace(id, now);
    seen_order_.emplace_back(now, id);
    fx.deliver(msg);
    relay(fx, msg, from);
    return fx;
  }

  Effects BroadcastNode::handle_rpc(const Rpc &rpc, SimTime now) {
    Effects fx;
    for (const auto &msg : rpc.messages) {
      fx.append(on_message(rpc.from, msg, now));
    }
    return fx;
  }

  Effects BroadcastNode::publish(const Message &msg, SimTime now) {
    Effects fx;
    const MessageId id = compute_message_id(msg);
    if (seen_.emplace(id, now).second) {
      seen_order_.emplace_back(now, id);
    }
    fx.deliver(msg);
    relay(fx, msg, kNoPeer);
    return fx;
  }

  Effects BroadcastNode::heartbeat(SimTime now) {
    while (!seen_order_.empty()
           && seen_order_.front().first + seen_ttl_ms_ <= now) {
      seen_.erase(seen_order_.front().second);
      seen_order_.pop_front();
    }
    return {};
  }

  void BroadcastNode::relay(Effects &fx, const Message &msg, PeerId from) {
    for (auto p : targets(from)) {
      fx.to(self_, p).messages.push_back(msg);
    }
  }

  std::vector<PeerId> FloodNode::targets(PeerId from) {
    std::vector<PeerId> out;
    out.reserve(peers().size());
    for (auto p : peers()) {
      if (p != from) {
        out.push_back(p);
      }
    }
    return out;
  }

  SqrtNNode::SqrtNNode(PeerId self, std::size_t degree, SimTime seen_ttl_ms,
                       std::uint64_t seed)
      : BroadcastNode(self, seen_ttl_ms), degree_(degree), rng_(seed) {}

  std::vector<PeerId> SqrtNNode::targets(PeerId from) {
    std::vector<PeerId> pool;
    pool.reserve(peers().size());
    for (auto p : peers()) {
      if (p != from) {
        pool.push_back(p);
      }
    }
    return rng_.sample(std::move(pool), degree_);
  }

}  // namespace gossipsim
