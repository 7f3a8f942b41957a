/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace gossipsim {

  std::string to_string(Protocol p) {
    switch (p) {
      case Protocol::kGossipSub:
        return "gossipsub";
      case Protocol::kPlain:
        return "plain";
      case Protocol::kFlood:
        return "flood";
      case Protocol::kSqrtN:
        return "sqrtn";
    }
    return "unknown";
  }

  Protocol parse_protocol(const std::string &name) {
    for (auto p : {Protocol::kGossipSub, Protocol::kPlain, Protocol::kFlood,
                   Protocol::kSqrtN}) {
      if (to_string(p) == name) {
        return p;
      }
    }
    throw std::invalid_argument("unknown protocol '" + name + "'");
  }

  void LatencyModel::validate() const {
    if (min_ms < 0 || max_ms < min_ms) {
      throw std::invalid_argument("latency: need 0 <= min_ms <= max_ms");
    }
    if (distribution == Distribution::kLognormal && !(sigma >= 0)) {
      throw std::invalid_argument("latency: sigma must be >= 0");
    }
  }

  SimTime sample_latency(const LatencyModel &model, Rng &rng) {
    if (model.distribution == LatencyModel::Distribution::kUniform) {
      return rng.uniform_int(model.min_ms, model.max_ms);
    }
    const double v = std::exp(model.mu + model.sigma * rng.normal());
    const auto ms = static_cast<SimTime>(std::llround(std::min(v, 1e12)));
    return std::clamp(ms, model.min_ms, model.max_ms);
  }

  double auto_p3a_threshold(double message_rate, SimTime heartbeat_ms) {
    constexpr double kMeshShare = 1.0;
    constexpr double kSafety = 0.25;
    return message_rate * (static_cast<double>(heartbeat_ms) / 1000.0)
         * kMeshShare * kSafety;
  }

  MeshParams ScenarioConfig::effective_mesh() const {
    MeshParams m = mesh;
    if (protocol == Protocol::kPlain) {
      m.scoring = false;
      m.controlled_mesh = false;
      m.backoff = false;
      m.flood_publish = false;
      m.opportunistic_graft = false;
      m.adaptive_gossip = false;
    }
    return m;
  }

  ScoreParams ScenarioConfig::effective_score() const {
    ScoreParams s = score;
    if (p3a_threshold_auto) {
      s.topic_defaults.mesh_deliveries_threshold =
          auto_p3a_threshold(traffic.message_rate, mesh.heartbeat_interval_ms);
    }
    return s;
  }

  std::size_t ScenarioConfig::effective_sqrtn_degree() const {
    return sqrtn_degree ? *sqrtn_degree
                        : SqrtNParams{n_honest + n_sybil}.degree();
  }

  void ScenarioConfig::validate() const {
    auto fail = [](const std::string &what) {
      throw std::invalid_argument(what);
    };
    if (n_honest == 0) {
      fail("n_honest must be >= 1");
    }
    if (n_publishers == 0 || n_publishers > n_honest) {
      fail("n_publishers must lie in [1, n_honest]");
    }
    if (duration_ms < 0) {
      fail("duration_ms must be >= 0");
    }
    if (honest_join_ms < 0 || sybil_join_ms < 0) {
      fail("join times must be >= 0");
    }
    if (duration_ms > 0 && honest_join_ms >= duration_ms) {
      fail("honest_join_ms must be < duration_ms");
    }
    if (duration_ms > 0 && n_sybil > 0 && sybil_join_ms >= duration_ms) {
      fail("sybil_join_ms must be < duration_ms");
    }
    if (honest_max_conns < 0 || honest_max_inbound < 0 || px_dial_budget < 0) {
      fail("connection budgets must be >= 0");
    }
    if (sybil_max_conns <= 0) {
      fail("sybil_max_conns must be > 0");
    }
    if (sybil_ip_group < 1) {
      fail("sybil_ip_group must be >= 1");
    }
    if (!(traffic.message_rate > 0)) {
      fail("traffic.message_rate must be > 0");
    }
    if (traffic.message_size == 0) {
      fail("traffic.message_size must be > 0");
    }
    if (traffic.topics.empty()) {
      fail("traffic.topics must be nonempty");
    }
    for (const auto &t : traffic.topics) {
      if (t.empty()) {
        fail("topic names must be nonempty");
      }
    }
    if (traffic.warmup_ms < 0 || traffic.drain_ms < 0) {
      fail("traffic warmup and drain must be >= 0");
    }
    if (n_sybil > 0
        && (protocol == Protocol::kFlood || protocol == Protocol::kSqrtN)) {
      fail("adversaries are only modelled against gossipsub and plain");
    }
    if (protocol == Protocol::kSqrtN && sqrtn_degree && *sqrtn_degree == 0) {
      fail("sqrtn_degree must be >= 1");
    }
    if (flood.max_inbound < 0 || flood.max_outbound < 0
        || flood.total() == 0) {
      fail("flood connection budget must be positive");
    }
    mesh.validate();
    effective_score().validate();
    latency.validate();
    adversary.validate();
    if (n_sybil > 0 && adversary.kind == AttackKind::kCensor
        && adversary.target.value >= n_honest) {
      fail("adversary.target must be an honest node");
    }
    if (n_sybil > 0 && adversary.kind == AttackKind::kCovertFlash
        && duration_ms > 0 && adversary.attack_time_ms >= duration_ms) {
      fail("adversary.attack_time_ms must be < duration_ms");
    }
  }

  namespace {

    enum class EventKind : std::uint8_t {
      kDeliverRpc,
      kHeartbeat,
      kPublishTick,
      kJoin,
      kAttack,
    };

    struct Event {
      SimTime at;
      std::uint64_t seq;
      EventKind kind;
      std::uint32_t node;
      std::uint32_t slot;
    };

    struct Later {
      bool operator()(const Event &a, const Event &b) const {
        return a.at != b.at ? a.at > b.at : a.seq > b.seq;
      }
    };

    constexpr std::uint64_t kMessageOverhead = 64;
    constexpr std::uint64_t kControlOverhead = 16;
    constexpr std::uint64_t kIdBytes = 32;
    constexpr std::uint64_t kPeerBytes = 40;

    std::uint64_t rpc_bytes(const Rpc &rpc) {
      std::uint64_t b = 0;
      for (const auto &m : rpc.messages) {
        b += kMessageOverhead + m.payload_size;
      }
      for (const auto &c : rpc.control) {
        b += kControlOverhead;
        if (auto *p = std::get_if<Prune>(&c)) {
          b += kPeerBytes * p->px.size();
        } else if (auto *h = std::get_if<IHave>(&c)) {
          b += kIdBytes * h->ids.size();
        } else if (auto *w = std::get_if<IWant>(&c)) {
          b += kIdBytes * w->ids.size();
        }
      }
      return b;
    }

    class NullSink : public TraceSink {
     public:
      void on_event(const TraceEvent &) override {}
    };

    class Simulation {
     public:
      Simulation(const ScenarioConfig &cfg, TraceSink &sink,
                 const RunHooks &hooks, bool wiring_only)
          : cfg_(cfg),
            sink_(sink),
            hooks_(hooks),
            wiring_only_(wiring_only),
            n_(cfg.n_honest + cfg.n_sybil),
            mesh_(cfg.effective_mesh()),
            rng_(derive_seed(cfg.seed, 0xfeedULL << 32)),
            latency_rng_(derive_seed(cfg.seed, 0x1a7eULL << 32)),
            traffic_rng_(derive_seed(cfg.seed, 0x7aff1cULL << 32)),
            conns_(n_),
            inbound_(n_, 0),
            outbound_(n_, 0),
            px_dials_(n_, 0),
            present_(n_, false),
            joined_(n_, false),
            heartbeats_(n_, 0),
            seqnos_(n_, 0) {
        for (const auto &t : cfg.traffic.topics) {
          topics_.emplace_back(t);
        }
        ips_.reserve(n_);
        for (std::size_t i = 0; i < n_; ++i) {
          if (i < cfg.n_honest) {
            ips_.push_back("h" + std::to_string(i));
          } else {
            const std::size_t s = i - cfg.n_honest;
            ips_.push_back("s" + std::to_string(s / cfg.sybil_ip_group));
          }
        }
        if (!wiring_only_) {
          make_nodes();
        }
      }

      void run() {
        emit({0, TraceKind::kRunStart, kNoPeer, kNoPeer, {}, true, n_});
        if (cfg_.duration_ms > 0) {
          schedule_initial();
          loop();
        }
        counters_.rpcs_in_flight = 0;
        while (!queue_.empty()) {
          counters_.rpcs_in_flight +=
              queue_.top().kind == EventKind::kDeliverRpc ? 1 : 0;
          queue_.pop();
        }
        emit({cfg_.duration_ms, TraceKind::kRunEnd, kNoPeer, kNoPeer, {},
              true, n_});
      }

      /// Join groups only, for build_topology.
      Topology wire() {
        for (const auto &[at, group] : join_groups()) {
          wire_group(group, at);
        }
        return Topology{std::move(links_), counters_.connections_refused};
      }

      const TrafficCounters &counters() const {
        return counters_;
      }

     private:
      bool honest(std::size_t i) const {
        return i < cfg_.n_honest;
      }

      void make_nodes() {
        const ScoreParams score = cfg_.effective_score();
        nodes_.reserve(n_);
        const auto n_honest = cfg_.n_honest;
        for (std::size_t i = 0; i < n_; ++i) {
          const PeerId id{static_cast<std::uint32_t>(i)};
          const auto seed = derive_seed(cfg_.seed, i);
          std::unique_ptr<Node> node;
          if (!honest(i)) {
            node = std::make_unique<AdversaryNode>(
                id, cfg_.adversary, mesh_, score, seed,
                [n_honest](PeerId p) { return p.value >= n_honest; });
          } else if (cfg_.protocol == Protocol::kFlood) {
            node = std::make_unique<FloodNode>(id, mesh_.seen_ttl_ms);
          } else if (cfg_.protocol == Protocol::kSqrtN) {
            node = std::make_unique<SqrtNNode>(
                id, cfg_.effective_sqrtn_degree(), mesh_.seen_ttl_ms, seed);
          } else {
            auto r = std::make_unique<Router>(id, mesh_, score, seed);
            for (const auto &t : topics_) {
              r->set_validator(t, reject_garbage);
            }
            node = std::move(r);
          }
          nodes_.push_back(std::move(node));
        }
      }

      std::map<SimTime, std::vector<std::uint32_t>> join_groups() const {
        std::map<SimTime, std::vector<std::uint32_t>> groups;
        for (std::size_t i = 0; i < n_; ++i) {
          const SimTime at = honest(i) ? cfg_.honest_join_ms : cfg_.sybil_join_ms;
          groups[at].push_back(static_cast<std::uint32_t>(i));
        }
        return groups;
      }

      void schedule_initial() {
        for (const auto &[at, group] : join_groups()) {
          for (auto i : group) {
            groups_[at].push_back(i);
          }
          push({at, 0, EventKind::kJoin, 0, 0});
        }
        if (cfg_.n_sybil > 0
            && cfg_.adversary.kind == AttackKind::kCovertFlash) {
          push({cfg_.adversary.attack_time_ms, 0, EventKind::kAttack, 0, 0});
        }
        publish_start_ = cfg_.honest_join_ms + cfg_.traffic.warmup_ms;
        publish_end_ = cfg_.duration_ms - cfg_.traffic.drain_ms;
        if (publish_start_ < publish_end_) {
          push({publish_start_, 0, EventKind::kPublishTick, 0, 0});
        }
      }

      void push(Event e) {
        e.seq = next_seq_++;
        queue_.push(e);
      }

      void loop() {
        while (!queue_.empty() && queue_.top().at < cfg_.duration_ms) {
          const Event e = queue_.top();
          queue_.pop();
          switch (e.kind) {
            case EventKind::kDeliverRpc:
              on_deliver(e);
              break;
            case EventKind::kHeartbeat:
              on_heartbeat(e);
              break;
            case EventKind::kPublishTick:
              on_publish_tick(e);
              break;
            case EventKind::kJoin:
              on_join(e.at);
              break;
            case EventKind::kAttack:
              emit({e.at, TraceKind::kAttack, kNoPeer, kNoPeer, {}, false, 0});
              break;
          }
        }
      }

      // -- wiring ---------------------------------------------------------

      bool connected(std::size_t a, std::size_t b) const {
        return conns_[a].contains(static_cast<std::uint32_t>(b));
      }

      bool dial(std::size_t a, std::size_t b, SimTime now) {
        if (a == b || connected(a, b)) {
          return false;
        }
        bool accept = true;
        if (!honest(b)) {
          accept = conns_[b].size() < static_cast<std::size_t>(cfg_.sybil_max_conns);
        } else if (cfg_.honest_max_inbound > 0) {
          accept = inbound_[b] < cfg_.honest_max_inbound;
        }
        if (!accept) {
          ++counters_.connections_refused;
          emit({now, TraceKind::kRefused, PeerId{static_cast<std::uint32_t>(a)},
                PeerId{static_cast<std::uint32_t>(b)}, {}, honest(a), 0});
          return false;
        }
        conns_[a].insert(static_cast<std::uint32_t>(b));
        conns_[b].insert(static_cast<std::uint32_t>(a));
        ++outbound_[a];
        ++inbound_[b];
        const PeerId pa{static_cast<std::uint32_t>(a)};
        const PeerId pb{static_cast<std::uint32_t>(b)};
        links_.push_back({pa, pb});
        if (!wiring_only_) {
          nodes_[a]->add_peer(pb, Direction::kOutbound, ips_[b], now);
          nodes_[b]->add_peer(pa, Direction::kInbound, ips_[a], now);
        }
        return true;
      }

      void wire_group(const std::vector<std::uint32_t> &group, SimTime now) {
        for (auto i : group) {
          present_[i] = true;
        }
        if (cfg_.protocol == Protocol::kFlood) {
          wire_flood(group, now);
          return;
        }
        for (auto i : group) {
          if (!honest(i)) {
            continue;
          }
          std::vector<std::uint32_t> pool;
          for (std::size_t j = 0; j < n_; ++j) {
            if (present_[j] && j != i && !connected(i, j)) {
              pool.push_back(static_cast<std::uint32_t>(j));
            }
          }
          for (auto j : rng_.sample(std::move(pool),
                                    static_cast<std::size_t>(cfg_.honest_max_conns))) {
            dial(i, j, now);
          }
        }
        // Sybils top up towards every honest node present so far.
        for (std::size_t s = cfg_.n_honest; s < n_; ++s) {
          if (!present_[s]) {
            continue;
          }
          const auto budget = static_cast<std::size_t>(cfg_.sybil_max_conns);
          // Censors surround their victim before spreading out.
          if (cfg_.adversary.kind == AttackKind::kCensor) {
            const auto v = cfg_.adversary.target.value;
            if (present_[v] && conns_[s].size() < budget) {
              dial(s, v, now);
            }
          }
          if (conns_[s].size() >= budget) {
            continue;
          }
          std::vector<std::uint32_t> pool;
          for (std::size_t h = 0; h < cfg_.n_honest; ++h) {
            if (present_[h] && !connected(s, h)) {
              pool.push_back(static_cast<std::uint32_t>(h));
            }
          }
          for (auto h : rng_.sample(std::move(pool), budget - conns_[s].size())) {
            dial(s, h, now);
          }
        }
      }

      /// Brings every node of the group up to the flood connection count,
      /// choosing uniformly among present nodes that still have room.
      void wire_flood(const std::vector<std::uint32_t> &group, SimTime now) {
        std::size_t n_present = 0;
        for (std::size_t j = 0; j < n_; ++j) {
          n_present += present_[j] ? 1 : 0;
        }
        const std::size_t target = std::min<std::size_t>(
            static_cast<std::size_t>(cfg_.flood.total()), n_present - 1);
        for (auto i : group) {
          if (conns_[i].size() >= target) {
            continue;
          }
          std::vector<std::uint32_t> pool;
          for (std::size_t j = 0; j < n_; ++j) {
            if (present_[j] && j != i && !connected(i, j)
                && conns_[j].size() < target) {
              pool.push_back(static_cast<std::uint32_t>(j));
            }
          }
          for (auto j : rng_.sample(std::move(pool), target - conns_[i].size())) {
            dial(i, j, now);
          }
        }
      }

      void px_dial(std::size_t node, PeerId peer, SimTime now) {
        const std::size_t p = peer.value;
        if (!honest(node) || p >= n_ || !present_[p] || connected(node, p)) {
          return;
        }
        if (px_dials_[node] >= cfg_.px_dial_budget) {
          return;
        }
        ++px_dials_[node];
        dial(node, p, now);
      }

      // -- event handlers -------------------------------------------------

      void on_join(SimTime now) {
        const auto group = groups_[now];
        wire_group(group, now);
        for (auto i : group) {
          joined_[i] = true;
          const PeerId id{i};
          emit({now, TraceKind::kJoin, id, kNoPeer, {}, honest(i), 0});
          for (const auto &t : topics_) {
            apply(i, nodes_[i]->join(t, now), now, id);
          }
          SimTime phase = static_cast<SimTime>(i) % mesh_.heartbeat_interval_ms;
          if (phase == 0) {
            phase = mesh_.heartbeat_interval_ms;
          }
          push({now + phase, 0, EventKind::kHeartbeat, i, 0});
        }
      }

      void on_heartbeat(const Event &e) {
        const std::uint32_t i = e.node;
        apply(i, nodes_[i]->heartbeat(e.at), e.at, PeerId{i});
        const std::uint64_t hb = ++heartbeats_[i];
        if (honest(i) && cfg_.mesh_snapshots
            && (cfg_.protocol == Protocol::kGossipSub
                || cfg_.protocol == Protocol::kPlain)) {
          std::uint32_t h = 0;
          std::uint32_t s = 0;
          for (auto p : nodes_[i]->mesh_peers(topics_.front())) {
            (honest(p.value) ? h : s) += 1;
          }
          TraceEvent snap{e.at, TraceKind::kMeshSnapshot, PeerId{i}, kNoPeer,
                          {},   true,                     0};
          snap.heartbeat = hb;
          snap.honest_in_mesh = h;
          snap.sybil_in_mesh = s;
          emit(snap);
        }
        if (honest(i) && hooks_.after_heartbeat) {
          hooks_.after_heartbeat(*nodes_[i], e.at);
        }
        push({e.at + mesh_.heartbeat_interval_ms, 0, EventKind::kHeartbeat, i,
              0});
      }

      void on_publish_tick(const Event &e) {
        std::vector<std::uint32_t> live;
        for (std::size_t i = 0; i < cfg_.n_publishers; ++i) {
          if (joined_[i]) {
            live.push_back(static_cast<std::uint32_t>(i));
          }
        }
        if (!live.empty()) {
          const auto pub = live[traffic_rng_.below(live.size())];
          const auto &topic =
              topics_[traffic_rng_.below(topics_.size())];
          Message msg{PeerId{pub}, ++seqnos_[pub], topic,
                      cfg_.traffic.message_size, e.at, false};
          emit({e.at, TraceKind::kPublish, PeerId{pub}, kNoPeer,
                compute_message_id(msg), true, 0});
          apply(pub, nodes_[pub]->publish(msg, e.at), e.at, PeerId{pub});
        }
        ++publish_count_;
        const SimTime next =
            publish_start_
            + static_cast<SimTime>(std::floor(
                static_cast<double>(publish_count_) * 1000.0
                / cfg_.traffic.message_rate));
        if (next < publish_end_) {
          push({next, 0, EventKind::kPublishTick, 0, 0});
        }
      }

      void on_deliver(const Event &e) {
        Rpc rpc = std::move(slab_[e.slot]);
        free_.push_back(e.slot);
        const std::uint32_t to = e.node;
        if (!joined_[to] || !connected(to, rpc.from.value)) {
          ++counters_.rpcs_dropped;
          return;
        }
        ++counters_.rpcs_delivered;
        apply(to, nodes_[to]->handle_rpc(rpc, e.at), e.at, rpc.from);
      }

      // -- effects --------------------------------------------------------

      void apply(std::uint32_t node, Effects &&fx, SimTime now, PeerId from) {
        const PeerId self{node};
        for (const auto &m : fx.local_deliveries) {
          emit({now, TraceKind::kDeliver, self, from, compute_message_id(m),
                honest(node), 0});
        }
        for (const auto &n : fx.notes) {
          TraceKind k = TraceKind::kDuplicate;
          if (n.kind == NoteKind::kInvalid) {
            k = TraceKind::kInvalid;
          } else if (n.kind == NoteKind::kUnknownTopic) {
            k = TraceKind::kUnknownTopic;
          }
          emit({now, k, self, n.from, n.id, honest(node), 0});
        }
        for (auto &out : fx.sends) {
          if (!out.rpc.empty()) {
            send(node, out.to.value, std::move(out.rpc), now);
          }
        }
        for (auto p : fx.discovered) {
          px_dial(node, p, now);
        }
      }

      void trace_control(std::uint32_t from, std::uint32_t to, const Rpc &rpc,
                         SimTime now) {
        for (const auto &c : rpc.control) {
          TraceEvent ev{now, TraceKind::kGraft, PeerId{from}, PeerId{to},
                        {},  honest(from),      1};
          if (auto *p = std::get_if<Prune>(&c)) {
            ev.kind = TraceKind::kPrune;
            ev.count = p->px.size();
          } else if (auto *h = std::get_if<IHave>(&c)) {
            ev.kind = TraceKind::kIHave;
            ev.count = h->ids.size();
          } else if (auto *w = std::get_if<IWant>(&c)) {
            ev.kind = TraceKind::kIWant;
            ev.count = w->ids.size();
          }
          emit(ev);
        }
      }

      void send(std::uint32_t from, std::uint32_t to, Rpc &&rpc, SimTime now) {
        ++counters_.rpcs_sent;
        if (honest(from)) {
          counters_.honest_bytes_sent += rpc_bytes(rpc);
        }
        if (trace_control_) {
          trace_control(from, to, rpc, now);
        }
        if (to >= n_ || !connected(from, to)) {
          ++counters_.rpcs_dropped;
          return;
        }
        SimTime at = now + sample_latency(cfg_.latency, latency_rng_);
        // Per-link FIFO: never overtake an earlier send on the same link.
        auto &last = link_clock_[(static_cast<std::uint64_t>(from) << 32) | to];
        at = std::max(at, last);
        last = at;
        std::uint32_t slot;
        if (!free_.empty()) {
          slot = free_.back();
          free_.pop_back();
          slab_[slot] = std::move(rpc);
        } else {
          slot = static_cast<std::uint32_t>(slab_.size());
          slab_.push_back(std::move(rpc));
        }
        push({at, 0, EventKind::kDeliverRpc, to, slot});
      }

      void emit(const TraceEvent &e) {
        sink_.on_event(e);
      }

      const ScenarioConfig &cfg_;
      TraceSink &sink_;
      const RunHooks &hooks_;
      bool wiring_only_;
      bool trace_control_ = false;
      std::size_t n_;
      MeshParams mesh_;
      Rng rng_;
      Rng latency_rng_;
      Rng traffic_rng_;
      std::vector<TopicId> topics_;
      std::vector<IpLabel> ips_;

      std::vector<std::unique_ptr<Node>> nodes_;
      std::vector<std::set<std::uint32_t>> conns_;
      std::vector<int> inbound_;
      std::vector<int> outbound_;
      std::vector<int> px_dials_;
      std::vector<bool> present_;
      std::vector<bool> joined_;
      std::vector<std::uint64_t> heartbeats_;
      std::vector<std::uint64_t> seqnos_;
      std::vector<Topology::Link> links_;
      std::map<SimTime, std::vector<std::uint32_t>> groups_;

      std::priority_queue<Event, std::vector<Event>, Later> queue_;
      std::uint64_t next_seq_ = 0;
      std::vector<Rpc> slab_;
      std::vector<std::uint32_t> free_;
      std::unordered_map<std::uint64_t, SimTime> link_clock_;

      SimTime publish_start_ = 0;
      SimTime publish_end_ = 0;
      std::uint64_t publish_count_ = 0;
      TrafficCounters counters_;

     public:
      void enable_control_trace(bool on) {
        trace_control_ = on;
      }
    };

  }  // namespace

  Topology build_topology(const ScenarioConfig &cfg) {
    cfg.validate();
    NullSink sink;
    RunHooks hooks;
    Simulation sim(cfg, sink, hooks, true);
    return sim.wire();
  }

  RunReport run(const ScenarioConfig &cfg, TraceSink *extra,
                const RunHooks &hooks) {
    cfg.validate();
    ReportBuilder builder;
    TeeSink tee;
    tee.add(&builder);
    if (extra != nullptr) {
      tee.add(extra);
    }
    Simulation sim(cfg, tee, hooks, false);
    sim.enable_control_trace(tee.wants_control());
    sim.run();

    RunReport report = builder.build();
    report.scenario = cfg.name;
    report.protocol = to_string(cfg.protocol);
    report.seed = cfg.seed;
    report.n_honest = cfg.n_honest;
    report.n_sybil = cfg.n_sybil;
    report.traffic = sim.counters();

    double connections = cfg.mesh.d;
    if (cfg.protocol == Protocol::kFlood) {
      connections = cfg.flood.total();
    } else if (cfg.protocol == Protocol::kSqrtN) {
      connections = static_cast<double>(cfg.effective_sqrtn_degree());
    }
    report.bandwidth_estimate_gb_month = bandwidth_estimate(
        cfg.traffic.message_rate, cfg.traffic.message_size, connections);
    const SimTime active = cfg.duration_ms - cfg.honest_join_ms;
    if (active > 0) {
      const double per_node_per_s =
          static_cast<double>(report.traffic.honest_bytes_sent)
          / static_cast<double>(cfg.n_honest)
          / (static_cast<double>(active) / 1000.0);
      report.measured_gb_month_per_node =
          per_node_per_s * kSecondsPerMonth / 1e9;
    }
    return report;
  }

}  // namespace gossipsim
