/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/router.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gossipsim {

  namespace {

    void require(bool ok, const char *what) {
      if (!ok) {
        throw std::invalid_argument(std::string("mesh params: ") + what);
      }
    }

    template <class... Fs>
    struct Overloaded : Fs... {
      using Fs::operator()...;
    };
    template <class... Fs>
    Overloaded(Fs...) -> Overloaded<Fs...>;

  }  // namespace

  MeshParams MeshParams::plain() {
    MeshParams p;
    p.scoring = false;
    p.controlled_mesh = false;
    p.backoff = false;
    p.flood_publish = false;
    p.opportunistic_graft = false;
    p.adaptive_gossip = false;
    return p;
  }

  void MeshParams::validate() const {
    require(d_low <= d && d <= d_high, "need D_low <= D <= D_high");
    require(d_low >= 1, "D_low must be >= 1");
    require(d_score >= 0 && d_score < d, "need 0 <= D_score < D");
    require(d_out >= 0 && d_out < d_low && 2 * d_out <= d,
            "need D_out < D_low and D_out <= D/2");
    require(d_lazy >= 0, "D_lazy must be >= 0");
    require(heartbeat_interval_ms > 0, "heartbeat_interval must be > 0");
    require(gossip_factor > 0 && gossip_factor <= 1,
            "gossip_factor must lie in (0, 1]");
    require(gossip_rounds >= 1 && mcache_len >= gossip_rounds,
            "need mcache_len >= gossip_rounds >= 1");
    require(prune_backoff_ms > 0, "prune_backoff must be > 0");
    require(px_count >= 0, "px_count must be >= 0");
    require(opp_graft_period_ms > 0, "opp_graft_period must be > 0");
    require(opp_graft_peers >= 0, "opp_graft_peers must be >= 0");
    require(max_iwant_per_heartbeat >= 0, "max_iwant must be >= 0");
    require(seen_ttl_ms > 0, "seen_ttl must be > 0");
  }

  std::size_t gossip_target_count(const MeshParams &params,
                                  std::size_t candidates) {
    const std::size_t floor =
        std::min(candidates, static_cast<std::size_t>(params.d_lazy));
    if (!params.adaptive_gossip) {
      return floor;
    }
    const auto scaled = static_cast<std::size_t>(
        std::ceil(params.gossip_factor * static_cast<double>(candidates)));
    return std::max(floor, std::min(scaled, candidates));
  }

  std::vector<PeerId> select_gossip_targets(const MeshParams &params,
                                            std::vector<PeerId> candidates,
                                            Rng &rng) {
    const std::size_t k = gossip_target_count(params, candidates.size());
    return rng.sample(std::move(candidates), k);
  }

  Router::Router(PeerId self, MeshParams mesh, ScoreParams score,
                 std::uint64_t seed)
      : self_(self),
        params_(mesh),
        scores_(std::move(score)),
        rng_(seed),
        mcache_(static_cast<std::size_t>(mesh.mcache_len),
                static_cast<std::size_t>(mesh.gossip_rounds)) {
    params_.validate();
    scores_.params().validate();
  }

  void Router::add_peer(PeerId peer, Direction dir, const IpLabel &ip,
                        SimTime /*now*/) {
    if (peer == self_) {
      return;
    }
    peers_[peer] = PeerInfo{dir, ip};
    scores_.add_peer(peer, ip);
    px_pool_.reset();
  }

  void Router::remove_peer(PeerId peer, SimTime /*now*/) {
    if (peers_.erase(peer) == 0) {
      return;
    }
    for (auto &[_, m] : mesh_) {
      m.erase(peer);
    }
    scores_.remove_peer(peer);
    iwant_budget_used_.erase(peer);
    px_pool_.reset();
  }

  void Router::add_explicit_peer(PeerId peer) {
    if (peer == self_) {
      return;
    }
    explicit_.insert(peer);
    for (auto &[_, m] : mesh_) {
      m.erase(peer);
    }
  }

  void Router::set_validator(const TopicId &topic, Validator validator) {
    validators_.set(topic, std::move(validator));
  }

  bool Router::subscribed(const TopicId &topic) const {
    return topics_.contains(topic);
  }

  std::vector<PeerId> Router::mesh_peers(const TopicId &topic) const {
    std::vector<PeerId> out;
    if (auto *m = mesh(topic)) {
      out.reserve(m->size());
      for (const auto &[p, _] : *m) {
        out.push_back(p);
      }
    }
    return out;
  }

  const std::map<PeerId, Direction> *Router::mesh(const TopicId &topic) const {
    auto it = mesh_.find(topic);
    return it == mesh_.end() ? nullptr : &it->second;
  }

  std::size_t Router::outbound_in_mesh(const TopicId &topic) const {
    std::size_t n = 0;
    if (auto *m = mesh(topic)) {
      for (const auto &[_, dir] : *m) {
        n += dir == Direction::kOutbound ? 1 : 0;
      }
    }
    return n;
  }

  std::vector<PeerId> Router::connected_peers() const {
    std::vector<PeerId> out;
    out.reserve(peers_.size());
    for (const auto &[p, _] : peers_) {
      out.push_back(p);
    }
    return out;
  }

  bool Router::connected(PeerId peer) const {
    return peers_.contains(peer);
  }

  std::optional<Direction> Router::direction(PeerId peer) const {
    auto it = peers_.find(peer);
    if (it == peers_.end()) {
      return std::nullopt;
    }
    return it->second.dir;
  }

  namespace {

    bool active(const std::map<TopicId, std::unordered_map<PeerId, SimTime>> &table,
                PeerId peer, const TopicId &topic, SimTime now) {
      auto t = table.find(topic);
      if (t == table.end()) {
        return false;
      }
      auto it = t->second.find(peer);
      return it != t->second.end() && it->second > now;
    }

  }  // namespace

  bool Router::backed_off(PeerId peer, const TopicId &topic,
                          SimTime now) const {
    return announced_backoff(peer, topic, now)
        || active(graft_backoff_, peer, topic, now);
  }

  bool Router::announced_backoff(PeerId peer, const TopicId &topic,
                                 SimTime now) const {
    return active(backoff_, peer, topic, now);
  }

  double Router::score(PeerId peer, SimTime now) const {
    return scores_.score(peer, now);
  }

  bool Router::in_mesh(PeerId peer, const TopicId &topic) const {
    auto *m = mesh(topic);
    return m != nullptr && m->contains(peer);
  }

  bool Router::score_ok(PeerId peer, SimTime now) const {
    return !params_.scoring || scores_.score(peer, now) >= 0;
  }

  bool Router::score_positive(PeerId peer, SimTime now) const {
    return !params_.scoring || scores_.score(peer, now) > 0;
  }

  bool Router::may_graft(PeerId peer, const TopicId &topic,
                         SimTime now) const {
    return !(params_.backoff && active(graft_backoff_, peer, topic, now));
  }

  void Router::graft(Effects &fx, PeerId peer, const TopicId &topic,
                     SimTime now) {
    mesh_[topic][peer] = peers_.at(peer).dir;
    scores_.record_graft(peer, topic, now);
    // Grafting a peer we turned away earlier invites it back.
    if (auto t = backoff_.find(topic); t != backoff_.end()) {
      t->second.erase(peer);
    }
    fx.to(self_, peer).control.emplace_back(Graft{topic});
  }

  void Router::prune(Effects &fx, PeerId peer, const TopicId &topic,
                     SimTime now, bool with_px) {
    scores_.record_prune(peer, topic, now);
    mesh_[topic].erase(peer);
    if (params_.backoff) {
      arm_backoff(graft_backoff_, peer, topic, now + params_.prune_backoff_ms);
    }
    send_prune(fx, peer, topic, now, with_px);
  }

  void Router::send_prune(Effects &fx, PeerId peer, const TopicId &topic,
                          SimTime now, bool with_px) {
    Prune p{topic, {}, 0};
    if (with_px) {
      p.px = px_for(peer, now);
    }
    if (params_.backoff) {
      p.backoff_ms = params_.prune_backoff_ms;
      arm_backoff(backoff_, peer, topic, now + params_.prune_backoff_ms);
    }
    fx.to(self_, peer).control.emplace_back(std::move(p));
  }

  void Router::arm_backoff(BackoffTable &table, PeerId peer,
                           const TopicId &topic, SimTime until) {
    auto &slot = table[topic][peer];
    slot = std::max(slot, until);
  }

  std::vector<PeerId> Router::px_for(PeerId exclude, SimTime now) {
    if (params_.px_count == 0) {
      return {};
    }
    if (!px_pool_) {
      px_pool_.emplace();
      for (const auto &[p, _] : peers_) {
        if (!explicit_.contains(p) && score_positive(p, now)) {
          px_pool_->push_back(p);
        }
      }
    }
    std::vector<PeerId> pool;
    pool.reserve(px_pool_->size());
    for (auto p : *px_pool_) {
      if (p != exclude) {
        pool.push_back(p);
      }
    }
    return rng_.sample(std::move(pool),
                       static_cast<std::size_t>(params_.px_count));
  }

  std::vector<PeerId> Router::pick_repair(const std::vector<PeerId> &pool,
                                         const TopicId &topic, SimTime now,
                                         std::size_t k) {
    // Peers that earned credit come first. Neutral peers only fill the gap,
    // those we dialed ahead of those that dialed us.
    std::vector<PeerId> tiers[3];
    for (auto p : pool) {
      const bool outbound = peers_.at(p).dir == Direction::kOutbound;
      if (!may_graft(p, topic, now)) {
        continue;
      }
      if (score_positive(p, now)) {
        tiers[0].push_back(p);
      } else if (score_ok(p, now)) {
        tiers[outbound ? 1 : 2].push_back(p);
      }
    }
    std::vector<PeerId> picks;
    for (auto &tier : tiers) {
      if (picks.size() == k) {
        break;
      }
      for (auto p : rng_.sample(std::move(tier), k - picks.size())) {
        picks.push_back(p);
      }
    }
    return picks;
  }

  std::vector<PeerId> Router::non_mesh_peers(const TopicId &topic) const {
    std::vector<PeerId> out;
    for (const auto &[p, _] : peers_) {
      if (!explicit_.contains(p) && !in_mesh(p, topic)) {
        out.push_back(p);
      }
    }
    return out;
  }

  void Router::mark_seen(MessageId id, SimTime now) {
    if (seen_.try_emplace(id, now).second) {
      seen_order_.emplace_back(now, id);
    }
  }

  void Router::forward(Effects &fx, const Message &msg, PeerId from) {
    if (auto *m = mesh(msg.topic)) {
      for (const auto &[p, _] : *m) {
        if (p != from && p != msg.publisher) {
          fx.to(self_, p).messages.push_back(msg);
        }
      }
    }
    for (auto p : explicit_) {
      if (p != from && p != msg.publisher && peers_.contains(p)) {
        fx.to(self_, p).messages.push_back(msg);
      }
    }
  }

  Effects Router::join(const TopicId &topic, SimTime now) {
    Effects fx;
    if (subscribed(topic)) {
      return fx;
    }
    topics_.insert(topic);
    validators_.ensure_default(topic);
    mesh_[topic];
    std::vector<PeerId> candidates;
    for (auto p : non_mesh_peers(topic)) {
      if (may_graft(p, topic, now) && score_ok(p, now)) {
        candidates.push_back(p);
      }
    }
    for (auto p : rng_.sample(std::move(candidates),
                              static_cast<std::size_t>(params_.d))) {
      graft(fx, p, topic, now);
    }
    return fx;
  }

  Effects Router::leave(const TopicId &topic, SimTime now) {
    Effects fx;
    if (!subscribed(topic)) {
      return fx;
    }
    for (auto p : mesh_peers(topic)) {
      prune(fx, p, topic, now, true);
    }
    mesh_.erase(topic);
    topics_.erase(topic);
    return fx;
  }

  Effects Router::handle_rpc(const Rpc &rpc, SimTime now) {
    Effects fx;
    if (!peers_.contains(rpc.from)) {
      return fx;
    }
    for (const auto &msg : rpc.messages) {
      fx.append(handle_message(rpc.from, msg, now));
    }
    for (const auto &ctl : rpc.control) {
      fx.append(std::visit(
          Overloaded{
              [&](const Graft &g) { return handle_graft(rpc.from, g.topic, now); },
              [&](const Prune &p) { return handle_prune(rpc.from, p, now); },
              [&](const IHave &h) { return handle_ihave(rpc.from, h, now); },
              [&](const IWant &w) { return handle_iwant(rpc.from, w, now); },
          },
          ctl));
    }
    return fx;
  }

  Effects Router::handle_graft(PeerId from, const TopicId &topic, SimTime now) {
    Effects fx;
    if (!peers_.contains(from)) {
      return fx;
    }
    if (!subscribed(topic) || explicit_.contains(from)) {
      send_prune(fx, from, topic, now, false);
      return fx;
    }
    if (in_mesh(from, topic)) {
      return fx;
    }
    // Grafting through a backoff we announced restarts it, so a peer that
    // keeps doing so stays locked out.
    if (params_.backoff && announced_backoff(from, topic, now)) {
      send_prune(fx, from, topic, now, false);
      return fx;
    }
    if (params_.scoring && scores_.score(from, now) < 0) {
      send_prune(fx, from, topic, now, false);
      return fx;
    }
    // Peers we dialed are let in above D_high; the oversubscription prune
    // sorts them out by score.
    if (params_.controlled_mesh
        && mesh_[topic].size() >= static_cast<std::size_t>(params_.d_high)
        && peers_.at(from).dir != Direction::kOutbound) {
      send_prune(fx, from, topic, now, true);
      return fx;
    }
    mesh_[topic][from] = peers_.at(from).dir;
    scores_.record_graft(from, topic, now);
    if (auto t = graft_backoff_.find(topic); t != graft_backoff_.end()) {
      t->second.erase(from);
    }
    return fx;
  }

  Effects Router::handle_prune(PeerId from, const Prune &prune, SimTime now) {
    Effects fx;
    if (in_mesh(from, prune.topic)) {
      scores_.record_prune(from, prune.topic, now);
      mesh_[prune.topic].erase(from);
    }
    if (params_.backoff) {
      const SimTime b =
          prune.backoff_ms > 0 ? prune.backoff_ms : params_.prune_backoff_ms;
      arm_backoff(graft_backoff_, from, prune.topic, now + b);
    }
    if (!prune.px.empty()
        && !(params_.scoring && scores_.score(from, now) < 0)) {
      for (auto p : prune.px) {
        if (p != self_ && !peers_.contains(p)) {
          fx.discovered.push_back(p);
        }
      }
    }
    return fx;
  }

  Effects Router::handle_message(PeerId from, const Message &msg,
                                 SimTime now) {
    Effects fx;
    const MessageId id = compute_message_id(msg);
    if (auto it = seen_.find(id); it != seen_.end()) {
      const SimTime window =
          scores_.params().for_topic(msg.topic).mesh_deliveries_window_ms;
      scores_.record_delivery(from, msg.topic, DeliveryKind::kDuplicate,
                              in_mesh(from, msg.topic),
                              now - it->second <= window);
      fx.note(NoteKind::kDuplicate, from, id);
      return fx;
    }
    if (!subscribed(msg.topic)) {
      fx.note(NoteKind::kUnknownTopic, from, id);
      return fx;
    }
    if (validators_.validate(msg) == Validation::kInvalid) {
      scores_.record_invalid(from, msg.topic);
      fx.note(NoteKind::kInvalid, from, id);
      return fx;
    }
    scores_.record_delivery(from, msg.topic, DeliveryKind::kFirst,
                            in_mesh(from, msg.topic), true);
    mark_seen(id, now);
    mcache_.put(msg, id);
    fx.deliver(msg);
    forward(fx, msg, from);
    return fx;
  }

  Effects Router::handle_ihave(PeerId from, const IHave &ihave,
                               SimTime /*now*/) {
    Effects fx;
    if (!subscribed(ihave.topic)) {
      return fx;
    }
    int &used = iwant_budget_used_[from];
    std::vector<MessageId> want;
    for (auto id : ihave.ids) {
      if (used >= params_.max_iwant_per_heartbeat) {
        break;
      }
      if (seen_.contains(id) || mcache_.contains(id)
          || std::find(want.begin(), want.end(), id) != want.end()) {
        continue;
      }
      want.push_back(id);
      ++used;
    }
    if (!want.empty()) {
      fx.to(self_, from).control.emplace_back(IWant{std::move(want)});
    }
    return fx;
  }

  Effects Router::handle_iwant(PeerId from, const IWant &iwant,
                               SimTime /*now*/) {
    Effects fx;
    for (auto id : iwant.ids) {
      if (const Message *m = mcache_.get(id)) {
        fx.to(self_, from).messages.push_back(*m);
      }
    }
    return fx;
  }

  Effects Router::publish(const Message &msg, SimTime now) {
    Effects fx;
    const MessageId id = compute_message_id(msg);
    mark_seen(id, now);
    mcache_.put(msg, id);
    fx.deliver(msg);

    if (params_.flood_publish) {
      const auto *m = mesh(msg.topic);
      for (const auto &[p, _] : peers_) {
        if (explicit_.contains(p)) {
          continue;
        }
        if (score_positive(p, now) || (m != nullptr && m->contains(p))) {
          fx.to(self_, p).messages.push_back(msg);
        }
      }
    } else if (subscribed(msg.topic)) {
      for (const auto &[p, _] : mesh_[msg.topic]) {
        fx.to(self_, p).messages.push_back(msg);
      }
    } else {
      std::vector<PeerId> candidates;
      for (const auto &[p, _] : peers_) {
        if (!explicit_.contains(p) && score_ok(p, now)) {
          candidates.push_back(p);
        }
      }
      for (auto p : rng_.sample(std::move(candidates),
                                static_cast<std::size_t>(params_.d))) {
        fx.to(self_, p).messages.push_back(msg);
      }
    }
    for (auto p : explicit_) {
      if (peers_.contains(p)) {
        fx.to(self_, p).messages.push_back(msg);
      }
    }
    return fx;
  }

  Effects Router::maintain_mesh(const TopicId &topic, SimTime now) {
    Effects fx;
    if (!subscribed(topic)) {
      return fx;
    }
    auto &m = mesh_[topic];
    const auto d = static_cast<std::size_t>(params_.d);

    if (params_.scoring) {
      std::vector<PeerId> negative;
      for (const auto &[p, _] : m) {
        if (scores_.score(p, now) < 0) {
          negative.push_back(p);
        }
      }
      for (auto p : negative) {
        prune(fx, p, topic, now, true);
      }
    }

    if (m.size() < static_cast<std::size_t>(params_.d_low)) {
      auto picks = pick_repair(non_mesh_peers(topic), topic, now, d - m.size());
      for (auto p : picks) {
        graft(fx, p, topic, now);
      }
    }

    if (m.size() > static_cast<std::size_t>(params_.d_high)) {
      std::vector<PeerId> members;
      for (const auto &[p, _] : m) {
        members.push_back(p);
      }
      std::vector<PeerId> keep;
      if (params_.controlled_mesh) {
        std::vector<std::pair<double, PeerId>> ranked;
        for (auto p : members) {
          ranked.emplace_back(scores_.score(p, now), p);
        }
        std::sort(ranked.begin(), ranked.end(), [](auto &a, auto &b) {
          return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        const auto top = static_cast<std::size_t>(params_.d_score);
        std::vector<PeerId> rest;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
          (i < top ? keep : rest).push_back(ranked[i].second);
        }
        rng_.shuffle(rest);
        const std::size_t fill = std::min(d - keep.size(), rest.size());
        keep.insert(keep.end(), rest.begin(), rest.begin() + fill);
        rest.erase(rest.begin(), rest.begin() + fill);

        auto is_out = [&](PeerId p) {
          return m.at(p) == Direction::kOutbound;
        };
        std::size_t outbound =
            std::count_if(keep.begin(), keep.end(), is_out);
        // Swap pruned outbound peers into the random-fill part of the
        // retained set, replacing inbound ones from the back.
        std::size_t slot = keep.size();
        for (auto &cand : rest) {
          if (outbound >= static_cast<std::size_t>(params_.d_out)) {
            break;
          }
          if (!is_out(cand)) {
            continue;
          }
          while (slot > top && is_out(keep[slot - 1])) {
            --slot;
          }
          if (slot <= top) {
            break;
          }
          std::swap(keep[slot - 1], cand);
          --slot;
          ++outbound;
        }
      } else {
        rng_.shuffle(members);
        keep.assign(members.begin(), members.begin() + d);
      }
      std::sort(keep.begin(), keep.end());
      for (auto p : members) {
        if (!std::binary_search(keep.begin(), keep.end(), p)) {
          prune(fx, p, topic, now, true);
        }
      }
    }

    if (params_.controlled_mesh
        && m.size() >= static_cast<std::size_t>(params_.d_low)) {
      const std::size_t outbound = outbound_in_mesh(topic);
      const auto want = static_cast<std::size_t>(params_.d_out);
      if (outbound < want) {
        std::vector<PeerId> inbound;
        for (const auto &[p, dir] : m) {
          if (dir == Direction::kInbound) {
            inbound.push_back(p);
          }
        }
        // Evicting a member is only worth it for a peer with a track record.
        // Neutral outbound peers join alongside the members while there is
        // room below D_high.
        std::vector<PeerId> earned;
        std::vector<PeerId> neutral;
        for (auto p : non_mesh_peers(topic)) {
          if (peers_.at(p).dir != Direction::kOutbound
              || !may_graft(p, topic, now)) {
            continue;
          }
          if (score_positive(p, now)) {
            earned.push_back(p);
          } else if (score_ok(p, now)) {
            neutral.push_back(p);
          }
        }
        auto picks = rng_.sample(std::move(earned), want - outbound);
        auto evict = rng_.sample(std::move(inbound), picks.size());
        for (auto p : evict) {
          prune(fx, p, topic, now, true);
        }
        for (auto p : picks) {
          graft(fx, p, topic, now);
        }
        // A full mesh gives up its weakest inbound members for them.
        auto extra = rng_.sample(std::move(neutral),
                                 want - outbound - picks.size());
        const auto cap = static_cast<std::size_t>(params_.d_high);
        if (m.size() + extra.size() > cap) {
          std::vector<std::pair<double, PeerId>> weakest;
          for (const auto &[p, dir] : m) {
            if (dir == Direction::kInbound) {
              weakest.emplace_back(scores_.score(p, now), p);
            }
          }
          std::sort(weakest.begin(), weakest.end());
          const auto over = m.size() + extra.size() - cap;
          for (std::size_t i = 0; i < over && i < weakest.size(); ++i) {
            prune(fx, weakest[i].second, topic, now, true);
          }
        }
        for (auto p : extra) {
          graft(fx, p, topic, now);
        }
      }
    }
    return fx;
  }

  Effects Router::opportunistic_graft(const TopicId &topic, SimTime now) {
    Effects fx;
    if (!subscribed(topic)) {
      return fx;
    }
    auto &m = mesh_[topic];
    if (m.empty()) {
      return fx;
    }
    std::vector<double> scores;
    for (const auto &[p, _] : m) {
      scores.push_back(scores_.score(p, now));
    }
    std::sort(scores.begin(), scores.end());
    const double median = scores[scores.size() / 2];
    if (median >= params_.opp_graft_threshold) {
      return fx;
    }
    std::vector<PeerId> candidates;
    for (auto p : non_mesh_peers(topic)) {
      if (may_graft(p, topic, now) && scores_.score(p, now) > median) {
        candidates.push_back(p);
      }
    }
    for (auto p :
         rng_.sample(std::move(candidates),
                     static_cast<std::size_t>(params_.opp_graft_peers))) {
      graft(fx, p, topic, now);
    }
    return fx;
  }

  Effects Router::emit_gossip(const TopicId &topic, SimTime now) {
    Effects fx;
    if (!subscribed(topic)) {
      return fx;
    }
    auto ids = mcache_.gossip_ids(topic);
    if (ids.empty()) {
      return fx;
    }
    std::vector<PeerId> candidates;
    for (const auto &[p, _] : peers_) {
      if (explicit_.contains(p)) {
        continue;
      }
      if (!params_.gossip_to_mesh && in_mesh(p, topic)) {
        continue;
      }
      if (score_ok(p, now)) {
        candidates.push_back(p);
      }
    }
    for (auto p : select_gossip_targets(params_, std::move(candidates), rng_)) {
      fx.to(self_, p).control.emplace_back(IHave{topic, ids});
    }
    return fx;
  }

  Effects Router::force_graft(PeerId peer, const TopicId &topic, SimTime now) {
    Effects fx;
    if (!peers_.contains(peer) || !subscribed(topic) || in_mesh(peer, topic)) {
      return fx;
    }
    graft(fx, peer, topic, now);
    return fx;
  }

  Effects Router::heartbeat(SimTime now) {
    Effects fx;
    px_pool_.reset();
    if (!heartbeat_started_) {
      heartbeat_started_ = true;
      last_decay_ = now;
      last_opp_graft_ = now;
    } else {
      const SimTime interval = scores_.params().decay_interval_ms;
      while (now - last_decay_ >= interval) {
        scores_.decay_tick(now);
        last_decay_ += interval;
      }
    }

    for (const auto &topic : topics_) {
      fx.append(maintain_mesh(topic, now));
    }
    if (params_.opportunistic_graft
        && now - last_opp_graft_ >= params_.opp_graft_period_ms) {
      last_opp_graft_ = now;
      for (const auto &topic : topics_) {
        fx.append(opportunistic_graft(topic, now));
      }
    }
    if (params_.gossip_enabled) {
      for (const auto &topic : topics_) {
        fx.append(emit_gossip(topic, now));
      }
    }
    mcache_.shift();

    while (!seen_order_.empty()
           && seen_order_.front().first + params_.seen_ttl_ms <= now) {
      seen_.erase(seen_order_.front().second);
      seen_order_.pop_front();
    }
    iwant_budget_used_.clear();
    for (auto *table : {&backoff_, &graft_backoff_}) {
      for (auto &[_, b] : *table) {
        std::erase_if(b, [now](const auto &kv) { return kv.second <= now; });
      }
    }
    return fx;
  }

}  // namespace gossipsim
