/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/adversary.hpp"

#include <algorithm>
#include <stdexcept>

namespace gossipsim {

  std::string to_string(AttackKind kind) {
    switch (kind) {
      case AttackKind::kGraftSpam:
        return "graft_spam";
      case AttackKind::kEclipseDrop:
        return "eclipse_drop";
      case AttackKind::kCensor:
        return "censor";
      case AttackKind::kCovertFlash:
        return "covert_flash";
      case AttackKind::kSpam:
        return "spam";
    }
    return "unknown";
  }

  AttackKind parse_attack_kind(const std::string &name) {
    for (auto k : {AttackKind::kGraftSpam, AttackKind::kEclipseDrop,
                   AttackKind::kCensor, AttackKind::kCovertFlash,
                   AttackKind::kSpam}) {
      if (to_string(k) == name) {
        return k;
      }
    }
    throw std::invalid_argument("unknown adversary behaviour '" + name + "'");
  }

  void AdversaryBehavior::validate() const {
    if (conn_budget <= 0) {
      throw std::invalid_argument("adversary conn_budget must be > 0");
    }
    if (invalid_rate < 0 || invalid_rate > 1) {
      throw std::invalid_argument("adversary invalid_rate must lie in [0, 1]");
    }
    if (attack_time_ms < 0) {
      throw std::invalid_argument("adversary attack_time must be >= 0");
    }
  }

  namespace {

    MeshParams relay_params(MeshParams mesh, const AdversaryBehavior &b) {
      // Relaying Sybils accept every GRAFT they can get.
      if (b.kind != AttackKind::kCovertFlash) {
        mesh.d_high = std::max(mesh.d_high, b.conn_budget);
      }
      return mesh;
    }

  }  // namespace

  AdversaryNode::AdversaryNode(PeerId self, AdversaryBehavior behavior,
                               MeshParams mesh, ScoreParams score,
                               std::uint64_t seed, ColluderTest is_colluder)
      : self_(self),
        behavior_(behavior),
        inner_(std::make_unique<Router>(self, relay_params(mesh, behavior),
                                        std::move(score), seed)),
        is_colluder_(std::move(is_colluder)),
        rng_(derive_seed(seed, 1)),
        drop_mode_(behavior.kind == AttackKind::kEclipseDrop) {
    behavior_.validate();
  }

  bool AdversaryNode::dropping(SimTime now) const {
    return drop_mode_
        || (behavior_.kind == AttackKind::kCovertFlash
            && now >= behavior_.attack_time_ms);
  }

  void AdversaryNode::add_peer(PeerId peer, Direction dir, const IpLabel &ip,
                               SimTime now) {
    if (peer == self_) {
      return;
    }
    peers_.insert(peer);
    inner_->add_peer(peer, dir, ip, now);
  }

  void AdversaryNode::remove_peer(PeerId peer, SimTime now) {
    peers_.erase(peer);
    inner_->remove_peer(peer, now);
    for (auto &[_, m] : meshed_) {
      m.erase(peer);
    }
  }

  Effects AdversaryNode::join(const TopicId &topic, SimTime now) {
    topics_.insert(topic);
    if (dropping(now)) {
      meshed_[topic];
      return {};
    }
    return inner_->join(topic, now);
  }

  void AdversaryNode::enter_drop_mode() {
    drop_mode_ = true;
    for (const auto &topic : topics_) {
      auto &m = meshed_[topic];
      for (auto p : inner_->mesh_peers(topic)) {
        if (!is_colluder_(p)) {
          m.insert(p);
        }
      }
    }
  }

  Effects AdversaryNode::handle_rpc(const Rpc &rpc, SimTime now) {
    if (!drop_mode_ && dropping(now)) {
      enter_drop_mode();
    }
    if (drop_mode_) {
      for (const auto &ctl : rpc.control) {
        if (auto *g = std::get_if<Graft>(&ctl)) {
          if (!is_colluder_(rpc.from) && peers_.contains(rpc.from)) {
            meshed_[g->topic].insert(rpc.from);
          }
        } else if (auto *p = std::get_if<Prune>(&ctl)) {
          meshed_[p->topic].erase(rpc.from);
        }
      }
      return {};
    }
    Effects fx = inner_->handle_rpc(rpc, now);
    if (behavior_.kind == AttackKind::kCensor) {
      censor(fx);
    } else if (behavior_.kind == AttackKind::kSpam) {
      inject_garbage(fx, now);
    }
    return fx;
  }

  Effects AdversaryNode::publish(const Message &msg, SimTime now) {
    if (dropping(now)) {
      return {};
    }
    return inner_->publish(msg, now);
  }

  Effects AdversaryNode::heartbeat(SimTime now) {
    if (!drop_mode_ && dropping(now)) {
      enter_drop_mode();
    }
    if (drop_mode_) {
      return graft_spam(now);
    }
    Effects fx = inner_->heartbeat(now);
    if (behavior_.kind == AttackKind::kCovertFlash) {
      return fx;
    }
    for (const auto &topic : topics_) {
      for (auto p : peers_) {
        if (!is_colluder_(p)) {
          fx.append(inner_->force_graft(p, topic, now));
        }
      }
    }
    if (behavior_.kind == AttackKind::kCensor) {
      censor(fx);
    }
    return fx;
  }

  Effects AdversaryNode::graft_spam(SimTime /*now*/) {
    Effects fx;
    for (const auto &topic : topics_) {
      auto &m = meshed_[topic];
      for (auto p : peers_) {
        if (is_colluder_(p) || m.contains(p)) {
          continue;
        }
        fx.to(self_, p).control.emplace_back(Graft{topic});
        m.insert(p);
      }
    }
    return fx;
  }

  std::vector<PeerId> AdversaryNode::mesh_peers(const TopicId &topic) const {
    if (drop_mode_) {
      auto it = meshed_.find(topic);
      if (it == meshed_.end()) {
        return {};
      }
      return {it->second.begin(), it->second.end()};
    }
    return inner_->mesh_peers(topic);
  }

  void AdversaryNode::censor(Effects &fx) const {
    const PeerId target = behavior_.target;
    const auto &cache = inner_->mcache();
    for (auto &out : fx.sends) {
      auto &msgs = out.rpc.messages;
      std::erase_if(msgs,
                    [&](const Message &m) { return m.publisher == target; });
      auto &ctl = out.rpc.control;
      for (auto &c : ctl) {
        if (auto *h = std::get_if<IHave>(&c)) {
          std::erase_if(h->ids, [&](MessageId id) {
            const Message *m = cache.get(id);
            return m != nullptr && m->publisher == target;
          });
        }
      }
      std::erase_if(ctl, [](const ControlMessage &c) {
        auto *h = std::get_if<IHave>(&c);
        return h != nullptr && h->ids.empty();
      });
    }
  }

  void AdversaryNode::inject_garbage(Effects &fx, SimTime now) {
    if (behavior_.invalid_rate <= 0) {
      return;
    }
    for (auto &out : fx.sends) {
      const std::size_t n = out.rpc.messages.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (rng_.uniform01() >= behavior_.invalid_rate) {
          continue;
        }
        const Message &m = out.rpc.messages[i];
        out.rpc.messages.push_back(Message{self_, ++garbage_seqno_, m.topic,
                                           m.payload_size, now, true});
      }
    }
  }

}  // namespace gossipsim
