/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "builtin_scenarios.hpp"

namespace gossipsim {

  ConfigError::ConfigError(const std::string &what, std::string source,
                           int line)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : "")
                           + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  namespace {

    /// Thrown by setters; turned into a ConfigError once the position of
    /// the offending node is known.
    struct BadValue {
      std::string what;
    };

    template <class T>
    T as(const YAML::Node &n, const char *type) {
      if (!n.IsScalar()) {
        throw BadValue{std::string("expected ") + type};
      }
      try {
        return n.as<T>();
      } catch (const YAML::Exception &) {
        throw BadValue{std::string("expected ") + type + ", got '"
                       + n.Scalar() + "'"};
      }
    }

    std::string show(double v) {
      std::ostringstream os;
      os << std::setprecision(10) << v;
      return os.str();
    }
    std::string show(bool v) {
      return v ? "true" : "false";
    }
    template <class T>
    std::string show(T v)
      requires std::is_integral_v<T>
    {
      return std::to_string(v);
    }

    struct Key {
      std::string path;
      std::string type;
      std::string doc;
      std::function<void(ScenarioConfig &, const YAML::Node &)> set;
      std::function<std::string(const ScenarioConfig &)> get;
    };

    template <class T>
    const char *type_name() {
      if constexpr (std::is_same_v<T, bool>) {
        return "bool";
      } else if constexpr (std::is_floating_point_v<T>) {
        return "number";
      } else {
        return "integer";
      }
    }

    template <class T, class Acc>
    Key field(std::string path, std::string doc, Acc acc) {
      Key k;
      k.path = std::move(path);
      k.type = type_name<T>();
      k.doc = std::move(doc);
      k.set = [acc](ScenarioConfig &c, const YAML::Node &n) {
        if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
          const auto v = as<long long>(n, "nonnegative integer");
          if (v < 0) {
            throw BadValue{"expected nonnegative integer"};
          }
          acc(c) = static_cast<T>(v);
        } else {
          acc(c) = as<T>(n, type_name<T>());
        }
      };
      k.get = [acc](const ScenarioConfig &c) {
        return show(acc(const_cast<ScenarioConfig &>(c)));
      };
      return k;
    }

    Key custom(std::string path, std::string type, std::string doc,
               std::function<void(ScenarioConfig &, const YAML::Node &)> set,
               std::function<std::string(const ScenarioConfig &)> get) {
      return Key{std::move(path), std::move(type), std::move(doc),
                 std::move(set), std::move(get)};
    }

    void set_d_profile(ScenarioConfig &c, int d) {
      if (d < 2) {
        throw BadValue{"d_profile must be >= 2"};
      }
      c.mesh.d = d;
      c.mesh.d_low = (3 * d) / 4;
      c.mesh.d_score = (3 * d) / 4;
      c.mesh.d_high = (3 * d) / 2;
    }

    std::vector<Key> make_registry() {
      std::vector<Key> r;
      auto add = [&r](Key k) { r.push_back(std::move(k)); };

      add(custom(
          "name", "string", "Run name, used in reports and output paths.",
          [](ScenarioConfig &c, const YAML::Node &n) {
            c.name = as<std::string>(n, "string");
          },
          [](const ScenarioConfig &c) { return c.name; }));
      add(field<std::uint64_t>("seed", "RNG seed; `seeds` overrides it.",
                               [](auto &c) -> auto & { return c.seed; }));
      add(field<SimTime>("duration_ms", "Virtual run length.",
                         [](auto &c) -> auto & { return c.duration_ms; }));
      add(custom(
          "protocol", "gossipsub|plain|flood|sqrtn",
          "Honest protocol. plain is gossipsub with every mitigation off.",
          [](ScenarioConfig &c, const YAML::Node &n) {
            try {
              c.protocol = parse_protocol(as<std::string>(n, "string"));
            } catch (const std::invalid_argument &ex) {
              throw BadValue{ex.what()};
            }
          },
          [](const ScenarioConfig &c) { return to_string(c.protocol); }));
      add(field<std::size_t>("n_honest", "Honest nodes.",
                             [](auto &c) -> auto & { return c.n_honest; }));
      add(field<std::size_t>(
          "n_publishers",
          "Honest nodes that publish. Defaults to n_honest / 10, at least 1.",
          [](auto &c) -> auto & { return c.n_publishers; }));
      add(field<std::size_t>("n_sybil", "Adversarial nodes.",
                             [](auto &c) -> auto & { return c.n_sybil; }));
      add(field<int>("honest_max_conns",
                     "Peers each honest node dials when it joins.",
                     [](auto &c) -> auto & { return c.honest_max_conns; }));
      add(field<int>("honest_max_inbound",
                     "Inbound connection cap of honest nodes, 0 = unlimited.",
                     [](auto &c) -> auto & { return c.honest_max_inbound; }));
      add(field<int>("px_dial_budget",
                     "Extra connections a node opens towards PX peers.",
                     [](auto &c) -> auto & { return c.px_dial_budget; }));
      add(field<int>("sybil_max_conns", "Connection budget of each Sybil.",
                     [](auto &c) -> auto & { return c.sybil_max_conns; }));
      add(field<int>("sybil_ip_group",
                     "Sybils sharing one IP label (P6 collocation).",
                     [](auto &c) -> auto & { return c.sybil_ip_group; }));
      add(field<SimTime>("honest_join_ms", "When honest nodes join.",
                         [](auto &c) -> auto & { return c.honest_join_ms; }));
      add(field<SimTime>("sybil_join_ms", "When Sybils join.",
                         [](auto &c) -> auto & { return c.sybil_join_ms; }));
      add(custom(
          "sqrtn_degree", "integer",
          "Forwarding degree of sqrtn; ceil(sqrt(N)) when absent.",
          [](ScenarioConfig &c, const YAML::Node &n) {
            const auto v = as<long long>(n, "integer");
            if (v < 1) {
              throw BadValue{"sqrtn_degree must be >= 1"};
            }
            c.sqrtn_degree = static_cast<std::size_t>(v);
          },
          [](const ScenarioConfig &c) {
            return c.sqrtn_degree ? std::to_string(*c.sqrtn_degree)
                                  : std::string("auto");
          }));
      add(field<bool>("mesh_snapshots",
                      "Record per-heartbeat mesh composition of honest nodes.",
                      [](auto &c) -> auto & { return c.mesh_snapshots; }));

      add(custom(
          "mesh.d_profile", "integer",
          "Sets D, and D_low = D_score = 3D/4, D_high = 3D/2. Applied "
          "before the individual degree keys.",
          [](ScenarioConfig &c, const YAML::Node &n) {
            set_d_profile(c, as<int>(n, "integer"));
          },
          [](const ScenarioConfig &c) { return std::to_string(c.mesh.d); }));
      add(field<int>("mesh.d", "Target mesh degree D.",
                     [](auto &c) -> auto & { return c.mesh.d; }));
      add(field<int>("mesh.d_low", "Graft below this many mesh members.",
                     [](auto &c) -> auto & { return c.mesh.d_low; }));
      add(field<int>("mesh.d_high", "Prune above this many mesh members.",
                     [](auto &c) -> auto & { return c.mesh.d_high; }));
      add(field<int>("mesh.d_score",
                     "Best scorers kept when pruning an oversubscribed mesh.",
                     [](auto &c) -> auto & { return c.mesh.d_score; }));
      add(field<int>("mesh.d_out", "Minimum outbound mesh members.",
                     [](auto &c) -> auto & { return c.mesh.d_out; }));
      add(field<int>("mesh.d_lazy",
                     "Gossip target floor; fixed target count without "
                     "adaptive gossip.",
                     [](auto &c) -> auto & { return c.mesh.d_lazy; }));
      add(field<SimTime>(
          "mesh.heartbeat_interval_ms", "Heartbeat period.",
          [](auto &c) -> auto & { return c.mesh.heartbeat_interval_ms; }));
      add(field<double>("mesh.gossip_factor",
                        "Share of non-mesh peers receiving IHAVE.",
                        [](auto &c) -> auto & { return c.mesh.gossip_factor; }));
      add(field<int>("mesh.gossip_rounds", "mcache windows advertised.",
                     [](auto &c) -> auto & { return c.mesh.gossip_rounds; }));
      add(field<int>("mesh.mcache_len", "mcache windows kept for IWANT.",
                     [](auto &c) -> auto & { return c.mesh.mcache_len; }));
      add(field<SimTime>(
          "mesh.prune_backoff_ms", "Backoff attached to PRUNE.",
          [](auto &c) -> auto & { return c.mesh.prune_backoff_ms; }));
      add(field<int>("mesh.px_count", "Peers offered in PRUNE peer exchange.",
                     [](auto &c) -> auto & { return c.mesh.px_count; }));
      add(field<SimTime>(
          "mesh.opp_graft_period_ms", "Opportunistic grafting period.",
          [](auto &c) -> auto & { return c.mesh.opp_graft_period_ms; }));
      add(field<double>(
          "mesh.opp_graft_threshold",
          "Median mesh score below which opportunistic grafting kicks in.",
          [](auto &c) -> auto & { return c.mesh.opp_graft_threshold; }));
      add(field<int>("mesh.opp_graft_peers",
                     "Peers grafted per opportunistic round.",
                     [](auto &c) -> auto & { return c.mesh.opp_graft_peers; }));
      add(field<int>(
          "mesh.max_iwant_per_heartbeat", "IWANT ids per peer per heartbeat.",
          [](auto &c) -> auto & { return c.mesh.max_iwant_per_heartbeat; }));
      add(field<SimTime>("mesh.seen_ttl_ms", "Lifetime of seen-set entries.",
                         [](auto &c) -> auto & { return c.mesh.seen_ttl_ms; }));
      add(field<bool>("mesh.gossip_to_mesh", "Also send IHAVE to mesh peers.",
                      [](auto &c) -> auto & { return c.mesh.gossip_to_mesh; }));
      add(field<bool>("mesh.scoring", "Score gates and negative-score pruning.",
                      [](auto &c) -> auto & { return c.mesh.scoring; }));
      add(field<bool>("mesh.controlled_mesh",
                      "D_high graft gate, D_score retention and D_out quota.",
                      [](auto &c) -> auto & { return c.mesh.controlled_mesh; }));
      add(field<bool>("mesh.backoff", "PRUNE backoff.",
                      [](auto &c) -> auto & { return c.mesh.backoff; }));
      add(field<bool>("mesh.flood_publish",
                      "Publishers send to every eligible peer.",
                      [](auto &c) -> auto & { return c.mesh.flood_publish; }));
      add(field<bool>(
          "mesh.opportunistic_graft", "Opportunistic grafting.",
          [](auto &c) -> auto & { return c.mesh.opportunistic_graft; }));
      add(field<bool>("mesh.adaptive_gossip",
                      "Gossip to gossip_factor of candidates, not just D_lazy.",
                      [](auto &c) -> auto & { return c.mesh.adaptive_gossip; }));
      add(field<bool>("mesh.gossip_enabled", "Emit IHAVE at all.",
                      [](auto &c) -> auto & { return c.mesh.gossip_enabled; }));

      add(field<double>("score.topic_weight", "Weight of the topic.",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.topic_weight;
                        }));
      add(field<double>("score.w1", "P1 time-in-mesh weight (> 0).",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.time_in_mesh_weight;
                        }));
      add(field<double>("score.p1_cap_s", "P1 cap in seconds.",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.time_in_mesh_cap_s;
                        }));
      add(field<double>("score.w2", "P2 first-delivery weight (> 0).",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.first_deliveries_weight;
                        }));
      add(field<double>("score.p2_cap", "P2 cap.",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.first_deliveries_cap;
                        }));
      add(field<double>("score.w3a", "P3a mesh-delivery deficit weight (<= 0).",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.mesh_deliveries_weight;
                        }));
      add(custom(
          "score.p3a_threshold", "number|auto",
          "Expected mesh deliveries; auto = message_rate * heartbeat_s * 0.25.",
          [](ScenarioConfig &c, const YAML::Node &n) {
            if (n.IsScalar() && n.Scalar() == "auto") {
              c.p3a_threshold_auto = true;
              return;
            }
            c.p3a_threshold_auto = false;
            c.score.topic_defaults.mesh_deliveries_threshold =
                as<double>(n, "number or auto");
          },
          [](const ScenarioConfig &c) {
            return c.p3a_threshold_auto
                     ? std::string("auto")
                     : show(c.score.topic_defaults.mesh_deliveries_threshold);
          }));
      add(field<double>("score.p3a_cap", "Cap of the squared P3a deficit.",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.mesh_deliveries_cap;
                        }));
      add(field<SimTime>(
          "score.p3a_activation_ms", "Time in mesh before P3a applies.",
          [](auto &c) -> auto & {
            return c.score.topic_defaults.mesh_deliveries_activation_ms;
          }));
      add(field<SimTime>(
          "score.p3a_window_ms",
          "Window after the first copy in which a mesh duplicate counts.",
          [](auto &c) -> auto & {
            return c.score.topic_defaults.mesh_deliveries_window_ms;
          }));
      add(field<double>("score.w3b", "P3b mesh-failure weight (<= 0).",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults
                              .mesh_failure_penalty_weight;
                        }));
      add(field<double>("score.w4", "P4 invalid-message weight (<= 0).",
                        [](auto &c) -> auto & {
                          return c.score.topic_defaults.invalid_messages_weight;
                        }));
      add(field<double>("score.w5", "P5 application score weight (>= 0).",
                        [](auto &c) -> auto & {
                          return c.score.app_specific_weight;
                        }));
      add(field<double>("score.w6", "P6 IP collocation weight (<= 0).",
                        [](auto &c) -> auto & {
                          return c.score.ip_colocation_weight;
                        }));
      add(field<double>("score.p6_ip_threshold", "Peers allowed per IP.",
                        [](auto &c) -> auto & {
                          return c.score.ip_colocation_threshold;
                        }));
      add(field<double>("score.topic_cap", "Cap of the per-topic sum.",
                        [](auto &c) -> auto & { return c.score.topic_cap; }));
      add(field<SimTime>(
          "score.decay_interval_ms", "Counter decay period.",
          [](auto &c) -> auto & { return c.score.decay_interval_ms; }));
      add(custom(
          "score.decay_factor", "number",
          "Per-interval multiplier of every decaying counter, in (0, 1].",
          [](ScenarioConfig &c, const YAML::Node &n) {
            const double f = as<double>(n, "number");
            c.score.decay = DecayFactors{f, f, f, f};
          },
          [](const ScenarioConfig &c) {
            return show(c.score.decay.first_deliveries);
          }));
      add(field<double>("score.decay_to_zero",
                        "Counters below this snap to 0.",
                        [](auto &c) -> auto & { return c.score.decay_to_zero; }));

      add(field<double>(
          "traffic.message_rate", "Messages per second, all publishers.",
          [](auto &c) -> auto & { return c.traffic.message_rate; }));
      add(field<std::uint32_t>(
          "traffic.message_size", "Payload bytes.",
          [](auto &c) -> auto & { return c.traffic.message_size; }));
      add(custom(
          "traffic.topics", "list of strings", "Topics; every node joins all.",
          [](ScenarioConfig &c, const YAML::Node &n) {
            if (!n.IsSequence()) {
              throw BadValue{"expected a list of topic names"};
            }
            c.traffic.topics.clear();
            for (const auto &t : n) {
              c.traffic.topics.push_back(as<std::string>(t, "string"));
            }
          },
          [](const ScenarioConfig &c) {
            std::string s = "[";
            for (std::size_t i = 0; i < c.traffic.topics.size(); ++i) {
              s += (i ? ", " : "") + c.traffic.topics[i];
            }
            return s + "]";
          }));
      add(field<SimTime>("traffic.warmup_ms",
                         "Delay between honest join and first publication.",
                         [](auto &c) -> auto & { return c.traffic.warmup_ms; }));
      add(field<SimTime>("traffic.drain_ms",
                         "Quiet period at the end of the run.",
                         [](auto &c) -> auto & { return c.traffic.drain_ms; }));

      add(field<SimTime>("latency.min_ms", "Smallest link latency.",
                         [](auto &c) -> auto & { return c.latency.min_ms; }));
      add(field<SimTime>("latency.max_ms", "Largest link latency.",
                         [](auto &c) -> auto & { return c.latency.max_ms; }));
      add(custom(
          "latency.distribution", "uniform|lognormal",
          "Per-send latency law; lognormal draws are clamped to [min, max].",
          [](ScenarioConfig &c, const YAML::Node &n) {
            const auto s = as<std::string>(n, "string");
            if (s == "uniform") {
              c.latency.distribution = LatencyModel::Distribution::kUniform;
            } else if (s == "lognormal") {
              c.latency.distribution = LatencyModel::Distribution::kLognormal;
            } else {
              throw BadValue{"expected uniform or lognormal, got '" + s + "'"};
            }
          },
          [](const ScenarioConfig &c) {
            return std::string(c.latency.distribution
                                       == LatencyModel::Distribution::kUniform
                                   ? "uniform"
                                   : "lognormal");
          }));
      add(field<double>("latency.mu", "Lognormal mu (log ms).",
                        [](auto &c) -> auto & { return c.latency.mu; }));
      add(field<double>("latency.sigma", "Lognormal sigma.",
                        [](auto &c) -> auto & { return c.latency.sigma; }));

      add(custom(
          "adversary.behavior",
          "graft_spam|eclipse_drop|censor|covert_flash|spam",
          "What every Sybil does.",
          [](ScenarioConfig &c, const YAML::Node &n) {
            try {
              c.adversary.kind = parse_attack_kind(as<std::string>(n, "string"));
            } catch (const std::invalid_argument &ex) {
              throw BadValue{ex.what()};
            }
          },
          [](const ScenarioConfig &c) { return to_string(c.adversary.kind); }));
      add(custom(
          "adversary.target", "integer", "Censored publisher (honest id).",
          [](ScenarioConfig &c, const YAML::Node &n) {
            const auto v = as<long long>(n, "integer");
            if (v < 0) {
              throw BadValue{"target must be >= 0"};
            }
            c.adversary.target = PeerId{static_cast<std::uint32_t>(v)};
          },
          [](const ScenarioConfig &c) {
            return std::to_string(c.adversary.target.value);
          }));
      add(field<SimTime>(
          "adversary.attack_time_ms", "When covert-flash Sybils turn.",
          [](auto &c) -> auto & { return c.adversary.attack_time_ms; }));
      add(field<double>(
          "adversary.invalid_rate",
          "Spam: chance of a garbage message riding on each forward.",
          [](auto &c) -> auto & { return c.adversary.invalid_rate; }));

      add(field<int>("flood.max_inbound", "Flood baseline inbound budget.",
                     [](auto &c) -> auto & { return c.flood.max_inbound; }));
      add(field<int>("flood.max_outbound", "Flood baseline outbound budget.",
                     [](auto &c) -> auto & { return c.flood.max_outbound; }));
      return r;
    }

    const std::vector<Key> &registry() {
      static const std::vector<Key> keys = make_registry();
      return keys;
    }

    const Key *find_key(const std::string &path) {
      for (const auto &k : registry()) {
        if (k.path == path) {
          return &k;
        }
      }
      return nullptr;
    }

    const std::set<std::string> kGroups = {"mesh",      "score",   "traffic",
                                           "latency",   "adversary", "flood"};

    int line_of(const YAML::Node &n) {
      return n.Mark().line >= 0 ? n.Mark().line + 1 : 0;
    }

    struct Entry {
      std::string path;
      YAML::Node value;
      int line;
    };

    std::string lower(std::string s) {
      std::transform(s.begin(), s.end(), s.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      return s;
    }

    /// Sybil budget and publisher defaults follow the other keys.
    void finalize(ScenarioConfig &cfg, bool auto_publishers) {
      cfg.adversary.conn_budget = cfg.sybil_max_conns;
      if (auto_publishers) {
        cfg.n_publishers = std::max<std::size_t>(1, cfg.n_honest / 10);
      }
    }

    void check(const ScenarioConfig &cfg, const std::vector<Entry> &entries,
               const std::string &source) {
      try {
        cfg.validate();
      } catch (const std::invalid_argument &ex) {
        const std::string msg = lower(ex.what());
        int line = 0;
        for (const auto &e : entries) {
          const auto leaf = lower(e.path.substr(e.path.rfind('.') + 1));
          if (msg.find(leaf) != std::string::npos) {
            line = e.line;
            break;
          }
        }
        throw ConfigError(std::string("constraint violation: ") + ex.what(),
                          source, line);
      }
    }

    void apply_entry(ScenarioConfig &cfg, const Entry &e,
                     const std::string &source) {
      const Key *k = find_key(e.path);
      try {
        k->set(cfg, e.value);
      } catch (const BadValue &bad) {
        throw ConfigError(e.path + ": " + bad.what, source, e.line);
      }
    }

  }  // namespace

  ConfigFile parse_config_text(const std::string &text,
                               const std::string &source) {
    YAML::Node root;
    try {
      root = YAML::Load(text);
    } catch (const YAML::ParserException &ex) {
      throw ConfigError("malformed file: " + ex.msg, source, ex.mark.line + 1);
    }
    if (root.IsNull()) {
      root = YAML::Node(YAML::NodeType::Map);
    }
    if (!root.IsMap()) {
      throw ConfigError("top level must be a mapping", source, line_of(root));
    }

    ConfigFile file;
    bool auto_publishers = true;
    std::vector<Entry> entries;

    std::function<void(const YAML::Node &, const std::string &)> walk =
        [&](const YAML::Node &map, const std::string &prefix) {
          for (const auto &kv : map) {
            const auto key = kv.first.as<std::string>();
            const std::string path = prefix.empty() ? key : prefix + "." + key;
            const int line = line_of(kv.first);
            if (prefix.empty() && kGroups.contains(key)) {
              if (!kv.second.IsMap()) {
                throw ConfigError("'" + key + "' must be a mapping", source,
                                  line);
              }
              walk(kv.second, key);
              continue;
            }
            if (prefix.empty() && key == "description") {
              continue;
            }
            if (prefix.empty() && key == "output_dir") {
              file.output_dir = kv.second.as<std::string>();
              continue;
            }
            if (prefix.empty() && key == "trace") {
              try {
                file.trace = kv.second.as<bool>();
              } catch (const YAML::Exception &) {
                throw ConfigError("trace: expected bool", source, line);
              }
              continue;
            }
            if (prefix.empty() && key == "seeds") {
              if (!kv.second.IsSequence() || kv.second.size() == 0) {
                throw ConfigError("seeds: expected a nonempty list", source,
                                  line);
              }
              for (const auto &s : kv.second) {
                try {
                  file.seeds.push_back(s.as<std::uint64_t>());
                } catch (const YAML::Exception &) {
                  throw ConfigError("seeds: expected integers", source,
                                    line_of(s));
                }
              }
              continue;
            }
            if (prefix.empty() && key == "sweep") {
              if (!kv.second.IsSequence()) {
                throw ConfigError("sweep: expected a list of axes", source,
                                  line);
              }
              for (const auto &axis : kv.second) {
                const int aline = line_of(axis);
                if (!axis.IsMap() || !axis["key"] || !axis["values"]
                    || !axis["values"].IsSequence() || axis.size() != 2) {
                  throw ConfigError(
                      "sweep axis needs exactly 'key' and a 'values' list",
                      source, aline);
                }
                SweepAxis a;
                a.key = axis["key"].as<std::string>();
                if (find_key(a.key) == nullptr || a.key == "seed") {
                  throw ConfigError("sweep: unknown key '" + a.key + "'",
                                    source, aline);
                }
                for (const auto &v : axis["values"]) {
                  if (!v.IsScalar()) {
                    throw ConfigError("sweep values must be scalars", source,
                                      line_of(v));
                  }
                  a.values.push_back(v.Scalar());
                }
                if (a.values.empty()) {
                  throw ConfigError("sweep axis '" + a.key + "' has no values",
                                    source, aline);
                }
                file.sweep.push_back(std::move(a));
              }
              continue;
            }
            if (find_key(path) == nullptr) {
              throw ConfigError("unknown key '" + path + "'", source, line);
            }
            if (path == "n_publishers") {
              auto_publishers = false;
            }
            entries.push_back({path, kv.second, line});
          }
        };
    walk(root, "");

    // YAML::Node assignment writes through to the referenced node, so the
    // entries are never reordered; d_profile simply goes first.
    for (const bool profile : {true, false}) {
      for (const auto &e : entries) {
        if ((e.path == "mesh.d_profile") == profile) {
          apply_entry(file.base, e, source);
        }
      }
    }
    finalize(file.base, auto_publishers);
    file.auto_publishers = auto_publishers;
    check(file.base, entries, source);
    if (file.seeds.empty()) {
      file.seeds.push_back(file.base.seed);
    }
    file.source = source;
    return file;
  }

  ConfigFile parse_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open file", path, 0);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
  }

  ConfigFile load_config(const std::string &name_or_path) {
    if (!std::filesystem::exists(name_or_path)) {
      if (auto b = find_builtin(name_or_path)) {
        return parse_config_text(b->yaml, "builtin:" + b->name);
      }
    }
    return parse_config_file(name_or_path);
  }

  void apply_override(ScenarioConfig &cfg, const std::string &key,
                      const std::string &value) {
    const Key *k = find_key(key);
    if (k == nullptr) {
      throw ConfigError("unknown key '" + key + "'", "override", 0);
    }
    try {
      k->set(cfg, YAML::Load(value));
    } catch (const BadValue &bad) {
      throw ConfigError(key + ": " + bad.what, "override", 0);
    } catch (const YAML::Exception &ex) {
      throw ConfigError(key + ": " + ex.msg, "override", 0);
    }
  }

  std::vector<ExpandedRun> expand(const ConfigFile &file, bool with_sweep) {
    struct Partial {
      std::string label;
      ScenarioConfig cfg;
      bool auto_publishers;
    };
    std::vector<Partial> points{{"", file.base, file.auto_publishers}};
    if (with_sweep) {
      for (const auto &axis : file.sweep) {
        std::vector<Partial> next;
        for (const auto &p : points) {
          for (const auto &v : axis.values) {
            Partial q = p;
            apply_override(q.cfg, axis.key, v);
            if (axis.key == "n_publishers") {
              q.auto_publishers = false;
            }
            q.label += (q.label.empty() ? "" : "_") + axis.key + "=" + v;
            next.push_back(std::move(q));
          }
        }
        points = std::move(next);
      }
    }
    std::vector<ExpandedRun> runs;
    for (const auto &p : points) {
      for (auto seed : file.seeds) {
        ExpandedRun r;
        r.config = p.cfg;
        r.config.seed = seed;
        finalize(r.config, p.auto_publishers);
        r.label = (p.label.empty() ? "" : p.label + "_") + "seed="
                + std::to_string(seed);
        std::replace(r.label.begin(), r.label.end(), '/', '-');
        try {
          r.config.validate();
        } catch (const std::invalid_argument &ex) {
          throw ConfigError(
              std::string("constraint violation in ") + r.label + ": "
                  + ex.what(),
              file.source, 0);
        }
        runs.push_back(std::move(r));
      }
    }
    return runs;
  }

  const std::vector<BuiltinScenario> &builtin_scenarios() {
    static const std::vector<BuiltinScenario> all = [] {
      std::vector<BuiltinScenario> v;
      for (const auto &[name, yaml] : kBuiltinScenarioSources) {
        BuiltinScenario b{std::string(name), "", std::string(yaml)};
        const auto root = YAML::Load(b.yaml);
        if (root["description"]) {
          b.description = root["description"].as<std::string>();
        }
        v.push_back(std::move(b));
      }
      return v;
    }();
    return all;
  }

  std::optional<BuiltinScenario> find_builtin(const std::string &name) {
    for (const auto &b : builtin_scenarios()) {
      if (b.name == name) {
        return b;
      }
    }
    return std::nullopt;
  }

  void explain_config(std::ostream &out) {
    const ScenarioConfig defaults;
    out << "# gossipsim scenario file, schema version 1\n"
        << "#\n"
        << "# YAML mapping. Dotted keys below are written nested, e.g.\n"
        << "#   mesh:\n"
        << "#     d: 8\n"
        << "# Unknown keys are rejected.\n\n";
    out << "description  (string)\n    Free text, ignored.\n";
    out << "output_dir  (string)  default: out\n"
        << "    Where run directories are written.\n";
    out << "trace  (bool)  default: false\n"
        << "    Also write trace.jsonl for every run.\n";
    out << "seeds  (list of integers)  default: [seed]\n"
        << "    One run per seed.\n";
    out << "sweep  (list of {key, values})\n"
        << "    Cartesian product of overrides, used by `sweep`.\n";
    for (const auto &k : registry()) {
      out << k.path << "  (" << k.type << ")  default: " << k.get(defaults)
          << "\n    " << k.doc << '\n';
    }
  }

}  // namespace gossipsim
