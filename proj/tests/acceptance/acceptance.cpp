/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are fixed here and not
// configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gossipsim/config.hpp"
#include "gossipsim/parallel.hpp"
#include "oracles/random_inputs.hpp"
#include "oracles/score_oracle.hpp"

using namespace gossipsim;

namespace {

  struct Verdict {
    bool pass = false;
    std::string detail;
  };

  std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
  }

  double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }

  ScenarioConfig builtin(const std::string &name) {
    return load_config(name).base;
  }

  long long p99_of(const WindowStats &w) {
    return w.p99 ? static_cast<long long>(*w.p99) : -1;
  }

  const TopicId kTopic{"blocks"};

  // 1. Bandwidth estimates, GB per 30-day month.
  Verdict bandwidth() {
    struct Row {
      double rate, size, conns, expect, tol;
    };
    const Row rows[] = {
        {10.0 / 60.0, 2000, 8, 6.912, 0.0005},
        {2, 2000, 8, 82.9, 0.05},
        {2, 2000, 100, 1036.8, 0.05},
        {2, 2000, 133, 1378, 0.5},
    };
    Verdict v{true, ""};
    for (const auto &r : rows) {
      const double got = bandwidth_estimate(r.rate, r.size, r.conns);
      const bool ok = std::abs(got - r.expect) <= r.tol;
      v.pass = v.pass && ok;
      v.detail += fmt("%s%g->%.3f (want %g+-%g)%s", v.detail.empty() ? "" : "; ",
                      r.conns, got, r.expect, r.tol, ok ? "" : " MISS");
    }
    return v;
  }

  // 2. Chance that one peer never receives gossip over three rounds.
  Verdict gossip_coverage() {
    MeshParams params;
    params.gossip_factor = 0.25;
    constexpr std::size_t kCandidates = 100;
    constexpr int kRounds = 3;
    constexpr std::uint64_t kTrials = 100'000;
    const auto t0 = std::chrono::steady_clock::now();
    const auto misses =
        gossip_miss_count(params, kCandidates, kRounds, kTrials, 42);
    const double secs = seconds_since(t0);
    const double p = static_cast<double>(misses) / kTrials;
    const bool ok = std::abs(p - 0.421875) <= 0.01 && secs < 1.0;
    return {ok, fmt("miss=%.5f over %llu trials (want 0.421875+-0.01), %.3f s "
                    "(want <1 s)",
                    p, static_cast<unsigned long long>(kTrials), secs)};
  }

  // 3. Counter decay.
  Verdict decay_law() {
    ScoreParams params;
    params.decay = {0.9, 0.9, 0.9, 0.9};
    params.decay_interval_ms = 1000;
    ScoreBook book(params);
    const PeerId p{1};
    book.add_peer(p, "a");
    book.record_graft(p, kTopic, 0);
    // Pruning a negative peer that is short of deliveries builds the
    // failure penalty.
    book.set_app_score(p, -1e6);
    book.record_prune(p, kTopic, 10'000);
    for (int i = 0; i < 100; ++i) {
      book.record_delivery(p, kTopic, DeliveryKind::kFirst, true, true);
    }
    for (int i = 0; i < 80; ++i) {
      book.record_invalid(p, kTopic);
    }
    auto read = [&] {
      const auto &t = book.stats(p)->topics.at(kTopic);
      return std::vector<double>{t.first_deliveries, t.mesh_deliveries,
                                 t.mesh_failure_penalty, t.invalid_messages};
    };
    const auto c0 = read();
    std::string detail;
    bool ok = true;
    double worst = 0;
    auto prev = c0;
    for (int k = 1; k <= 30; ++k) {
      book.decay_tick(k * 1000);
      const auto ck = read();
      for (std::size_t i = 0; i < ck.size(); ++i) {
        if (c0[i] == 0) {
          continue;
        }
        if (k == 1 && ck[i] != c0[i] * 0.9) {
          ok = false;
          detail += fmt("counter %zu one tick %.17g vs %.17g; ", i, ck[i],
                        c0[i] * 0.9);
        }
        const double want = c0[i] * std::pow(0.9, k);
        if (want < params.decay_to_zero) {
          continue;
        }
        const double rel = std::abs(ck[i] - want) / want;
        worst = std::max(worst, rel);
        if (rel > 1e-12) {
          ok = false;
        }
        if (!(ck[i] < prev[i])) {
          ok = false;
        }
      }
      prev = ck;
    }
    const bool nonzero =
        std::all_of(c0.begin(), c0.end(), [](double c) { return c > 0; });
    ok = ok && nonzero;
    detail += fmt("4 counters (%s), 30 ticks, worst rel err %.2e (want "
                  "<=1e-12), one tick == x*0.9",
                  nonzero ? "all nonzero" : "SOME ZERO", worst);
    return {ok, detail};
  }

  // 4. Score against the straight-line oracle and boundary properties.
  Verdict score_oracle() {
    Rng rng(2024);
    double worst = 0;
    int bad = 0;
    constexpr int kPairs = 1000;
    for (int i = 0; i < kPairs; ++i) {
      const auto c = oracle::random_case(rng);
      const double got = evaluate_score(c.stats, c.peers_on_ip, c.now, c.params);
      const double want = oracle::score(c.stats, c.peers_on_ip, c.now, c.params);
      const double rel =
          std::abs(got - want) / std::max(std::abs(want), 1e-12);
      worst = std::max(worst, rel);
      if (rel > 1e-9) {
        ++bad;
      }
    }

    int boundary_bad = 0;
    std::string which;
    auto check = [&](bool ok, const char *name) {
      if (!ok) {
        ++boundary_bad;
        which += std::string(" ") + name;
      }
    };
    ScoreParams params;
    const auto &tp = params.topic_defaults;
    // Topic sum saturates at the cap; app score sits on top of it.
    {
      PeerStats s;
      auto &t = s.topics[kTopic];
      t.in_mesh = true;
      t.mesh_since = 0;
      t.first_deliveries = 1e9;
      t.mesh_deliveries = 1e9;
      const SimTime now = 1'000'000'000;
      check(evaluate_score(s, 1, now, params) == params.topic_cap, "tc-ceiling");
      s.app_score = 7;
      check(evaluate_score(s, 1, now, params) == params.topic_cap + 7,
            "tc-plus-app");
      // Exactly at the cap.
      PeerStats e;
      e.topics[kTopic].first_deliveries = params.topic_cap;
      check(evaluate_score(e, 1, 0, params) == params.topic_cap, "tc-exact");
      // Negative sums are not floored.
      PeerStats n;
      n.topics[kTopic].invalid_messages = 1e6;
      check(evaluate_score(n, 1, 0, params)
                == tp.invalid_messages_weight * 1e6,
            "tc-no-floor");
    }
    // Deficit vanishes at and above the threshold, and before activation.
    {
      PeerStats s;
      auto &t = s.topics[kTopic];
      t.in_mesh = true;
      t.mesh_since = 0;
      const SimTime now = tp.mesh_deliveries_activation_ms;
      for (double d : {tp.mesh_deliveries_threshold,
                       std::nextafter(tp.mesh_deliveries_threshold, 1e9),
                       tp.mesh_deliveries_threshold * 40}) {
        t.mesh_deliveries = d;
        check(active_delivery_deficit(t, now, tp) == 0.0, "p3a-at-threshold");
      }
      t.mesh_deliveries = 0;
      check(active_delivery_deficit(t, now - 1, tp) == 0.0, "p3a-activation");
      check(active_delivery_deficit(t, now, tp) == tp.mesh_deliveries_threshold,
            "p3a-active");
      // Squared deficit capped.
      ScoreParams big = params;
      big.topic_defaults.mesh_deliveries_threshold = 1000;
      PeerStats b;
      b.topics[kTopic] = t;
      b.topics[kTopic].first_deliveries = 0;
      check(evaluate_score(b, 1, now, big)
                == big.topic_defaults.mesh_deliveries_weight
                           * big.topic_defaults.mesh_deliveries_cap
                       + big.topic_defaults.time_in_mesh_weight * now / 1000.0,
            "p3a-cap");
    }
    // Collocation surplus is squared, zero up to the threshold.
    {
      PeerStats s;
      s.ip = "x";
      check(evaluate_score(s, 1, 0, params) == 0.0, "p6-alone");
      check(evaluate_score(s, 2, 0, params) == -1.0, "p6-two");
      check(evaluate_score(s, 4, 0, params) == -9.0, "p6-four");
      check(evaluate_score(s, 11, 0, params) == -100.0, "p6-eleven");
      ScoreParams t2 = params;
      t2.ip_colocation_threshold = 3;
      check(evaluate_score(s, 3, 0, t2) == 0.0, "p6-at-threshold");
      check(evaluate_score(s, 5, 0, t2) == -4.0, "p6-surplus-two");
    }
    const bool ok = bad == 0 && boundary_bad == 0;
    return {ok, fmt("%d/%d pairs beyond 1e-9 rel err (worst %.2e); %d boundary "
                    "failures%s",
                    bad, kPairs, worst, boundary_bad, which.c_str())};
  }

  // 5. Mesh invariants after every heartbeat.
  Verdict mesh_invariants() {
    struct Counts {
      std::uint64_t checks = 0;
      std::uint64_t over_high = 0;
      std::uint64_t under_low = 0;
      std::uint64_t under_out = 0;
      std::uint64_t negative = 0;
      std::uint64_t backoff = 0;
    } n;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      ScenarioConfig cfg;
      cfg.name = "mesh-invariants";
      cfg.seed = seed;
      cfg.duration_ms = 60'000;
      cfg.n_honest = 50;
      cfg.n_publishers = 5;
      cfg.n_sybil = 0;
      cfg.mesh_snapshots = false;
      RunHooks hooks;
      hooks.after_heartbeat = [&](const Node &node, SimTime now) {
        const auto *r = dynamic_cast<const Router *>(&node);
        if (r == nullptr || !r->subscribed(kTopic)) {
          return;
        }
        const auto &mp = r->mesh_params();
        const auto *mesh = r->mesh(kTopic);
        const std::size_t size = mesh ? mesh->size() : 0;
        ++n.checks;
        n.over_high += size > static_cast<std::size_t>(mp.d_high);
        n.under_low += size < static_cast<std::size_t>(mp.d_low);
        n.under_out +=
            r->outbound_in_mesh(kTopic) < static_cast<std::size_t>(mp.d_out);
        if (mesh) {
          for (const auto &[p, _] : *mesh) {
            n.negative += r->score(p, now) < 0;
            n.backoff += r->backed_off(p, kTopic, now);
          }
        }
      };
      run(cfg, nullptr, hooks);
    }
    const std::uint64_t total =
        n.over_high + n.under_low + n.under_out + n.negative + n.backoff;
    return {total == 0 && n.checks > 0,
            fmt("%llu node-heartbeats; violations: >D_high %llu, <D_low %llu, "
                "<D_out %llu, negative %llu, backoff %llu (want 0); %.0f s",
                static_cast<unsigned long long>(n.checks),
                static_cast<unsigned long long>(n.over_high),
                static_cast<unsigned long long>(n.under_low),
                static_cast<unsigned long long>(n.under_out),
                static_cast<unsigned long long>(n.negative),
                static_cast<unsigned long long>(n.backoff),
                seconds_since(t0))};
  }

  struct Timed {
    RunReport report;
    double secs = 0;
  };

  Timed timed_run(const ScenarioConfig &cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed t{run(cfg), 0};
    t.secs = seconds_since(t0);
    return t;
  }

  // 6. Eclipse attack on a warm network.
  Verdict eclipse_warm() {
    const auto base = builtin("eclipse-warm");
    auto calm = base;
    calm.n_sybil = 0;
    auto plain = base;
    plain.protocol = Protocol::kPlain;

    const auto full = timed_run(base);
    const auto ref = timed_run(calm);
    const auto pl = timed_run(plain);
    const SimTime from = base.sybil_join_ms;
    const SimTime to = base.duration_ms;
    const auto wf = summarize(full.report.outcomes, from, to);
    const auto wr = summarize(ref.report.outcomes, from, to);
    const auto wp = summarize(pl.report.outcomes, from, to);

    const bool full_ok = full.report.messages > 0
                      && full.report.loss_fraction == 0.0 && wf.p99 && wr.p99
                      && *wf.p99 <= 2 * *wr.p99;
    const bool plain_ok =
        pl.report.loss_fraction >= 0.02 || (wp.p99 && *wp.p99 >= 10 * *wr.p99);
    const double slowest = std::max({full.secs, ref.secs, pl.secs});
    return {full_ok && plain_ok && slowest < 300.0,
            fmt("full loss %.4f%% p99 %lld ms vs baseline %lld ms (want 0%%, "
                "<=2x); plain loss %.2f%% p99 %lld ms (want >=2%% or >=10x); "
                "slowest run %.0f s (want <300)",
                100 * full.report.loss_fraction, p99_of(wf), p99_of(wr),
                100 * pl.report.loss_fraction, p99_of(wp), slowest)};
  }

  // 7. Sybils first, honest nodes later.
  Verdict cold_boot() {
    const auto base = builtin("cold-boot");
    auto plain = base;
    plain.protocol = Protocol::kPlain;
    const auto full = run(base);
    const auto pl = run(plain);

    const auto series = honest_fraction_series(full.mesh_timeline);
    double at_join = -1;
    double at_end = -1;
    for (const auto &[t, frac] : series) {
      if (t >= base.honest_join_ms && at_join < 0) {
        at_join = frac;
      }
      at_end = frac;
    }
    const bool ok = at_join >= 0 && at_join < 0.5 && at_end > 0.8
                 && full.messages > 0 && full.loss_fraction == 0.0
                 && pl.loss_fraction > 0.0;
    return {ok, fmt("honest share %.3f at join (want <0.5), %.3f at end (want "
                    ">0.8); full loss %.3f%% (want 0); plain loss %.2f%% (want "
                    ">0)",
                    at_join, at_end, 100 * full.loss_fraction,
                    100 * pl.loss_fraction)};
  }

  // 8. Sybils behave, then stop forwarding.
  Verdict covert_flash() {
    const auto cfg = builtin("covert-flash");
    const auto r = run(cfg);
    const SimTime attack = cfg.adversary.attack_time_ms;
    const SimTime end = cfg.duration_ms;
    const auto before = summarize(r.outcomes, 0, attack);
    const auto after = summarize(r.outcomes, attack, end);
    if (!before.p99) {
      return {false, "no messages before the attack"};
    }
    const SimTime limit = 2 * *before.p99;
    // Earliest point after which every 10 s window stays within 2x. A
    // window whose messages all went missing has no p99 and counts as bad.
    constexpr SimTime kWindow = 10'000;
    SimTime recovered = -1;
    for (SimTime t = attack; t + kWindow <= end; t += kWindow) {
      const auto w = summarize(r.outcomes, t, t + kWindow);
      const bool good = w.messages == 0 || (w.p99 && *w.p99 <= limit);
      if (!good) {
        recovered = -1;
      } else if (recovered < 0) {
        recovered = t;
      }
    }
    const bool recovery_ok = recovered >= 0 && recovered - attack <= 120'000;
    const bool ok = after.messages > 0 && after.lost == 0 && recovery_ok;
    return {ok, fmt("after attack loss %.3f%% (%zu/%zu, want 0); pre-attack p99 "
                    "%lld ms; p99 within 2x from +%lld s (want <=120 s)",
                    100 * after.loss_fraction, after.lost, after.messages,
                    p99_of(before),
                    recovered < 0 ? -1LL
                                  : static_cast<long long>(
                                        (recovered - attack) / 1000))};
  }

  // 9. Duplicate ordering across protocols and across D.
  Verdict duplicates() {
    auto base = builtin("baselines");
    std::vector<ScenarioConfig> cfgs;
    for (auto p : {Protocol::kFlood, Protocol::kSqrtN, Protocol::kGossipSub}) {
      auto c = base;
      c.protocol = p;
      c.sqrtn_degree = 32;
      cfgs.push_back(c);
    }
    const auto runs = run_all(cfgs, 0);
    for (const auto &o : runs) {
      if (!o.ok) {
        return {false, "run failed: " + o.error};
      }
    }
    const auto flood = runs[0].report.duplicates;
    const auto sqrtn = runs[1].report.duplicates;
    const auto gsub = runs[2].report.duplicates;
    const bool order_ok = flood > sqrtn && sqrtn >= gsub;

    const auto file = load_config("d-sweep");
    const auto sweep = expand(file, true);
    std::vector<ScenarioConfig> sweep_cfgs;
    for (const auto &e : sweep) {
      sweep_cfgs.push_back(e.config);
    }
    const auto sruns = run_all(sweep_cfgs, 0);
    std::map<int, std::pair<double, double>> by_d;  // dups, mean latency
    std::map<int, int> count;
    for (std::size_t i = 0; i < sruns.size(); ++i) {
      if (!sruns[i].ok) {
        return {false, "sweep run failed: " + sruns[i].error};
      }
      const int d = sweep_cfgs[i].mesh.d;
      by_d[d].first += static_cast<double>(sruns[i].report.duplicates);
      by_d[d].second += sruns[i].report.mean_latency;
      ++count[d];
    }
    bool sweep_ok = by_d.size() == 4;
    std::string rows;
    double prev_dups = -1;
    double prev_lat = 1e300;
    for (auto &[d, v] : by_d) {
      const double dups = v.first / count[d];
      const double lat = v.second / count[d];
      // Latency may wobble by 5% between neighbouring D values.
      sweep_ok = sweep_ok && dups > prev_dups && lat <= prev_lat * 1.05;
      rows += fmt(" D=%d dups %.0f mean %.0f ms;", d, dups, lat);
      prev_dups = dups;
      prev_lat = lat;
    }
    return {order_ok && sweep_ok,
            fmt("flood %llu > sqrtn(32) %llu >= gossipsub %llu;",
                static_cast<unsigned long long>(flood),
                static_cast<unsigned long long>(sqrtn),
                static_cast<unsigned long long>(gsub))
                + rows};
  }

  // 10. Censorship of one publisher.
  Verdict censorship() {
    const auto cfg = builtin("censorship");
    auto ablated = cfg;
    ablated.mesh.flood_publish = false;
    ablated.mesh.gossip_enabled = false;
    const auto full = run(cfg);
    const auto abl = run(ablated);
    const PeerId target = cfg.adversary.target;
    const auto wf = summarize(full.outcomes, 0, cfg.duration_ms, target);
    const auto wa = summarize(abl.outcomes, 0, cfg.duration_ms, target);
    const bool ok = wf.messages > 0 && wf.lost == 0 && wa.messages > 0
                 && wa.loss_fraction >= 0.01;
    return {ok, fmt("target loss %zu/%zu with flood publish and gossip (want "
                    "0); %zu/%zu without (want >=1%%)",
                    wf.lost, wf.messages, wa.lost, wa.messages)};
  }

  std::string unstamped(const RunReport &r) {
    auto j = nlohmann::json::parse(report_json(r));
    j.erase("version");
    return j.dump();
  }

  // 11. Same seed, same report.
  Verdict determinism() {
    std::vector<ScenarioConfig> cfgs;
    auto a = builtin("eclipse-warm");
    a.duration_ms = 90'000;
    auto b = builtin("censorship");
    b.duration_ms = 40'000;
    cfgs = {a, a, b, b};
    const auto serial = run_all_serial(cfgs);
    const auto parallel = run_all(cfgs, 2);
    std::set<std::string> distinct;
    bool ok = true;
    for (std::size_t i = 0; i < cfgs.size(); i += 2) {
      const auto x = report_json(serial[i].report);
      ok = ok && serial[i].ok && serial[i + 1].ok && parallel[i].ok
        && x == report_json(serial[i + 1].report)
        && x == report_json(parallel[i].report)
        && x == report_json(parallel[i + 1].report);
      distinct.insert(unstamped(serial[i].report));
    }
    ok = ok && distinct.size() == 2;
    return {ok, fmt("eclipse-warm 90 s and censorship 40 s, each run 4 times "
                    "(serial and threaded): %s",
                    ok ? "byte-identical report.json" : "reports differ")};
  }

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"gossipsim acceptance checks"};
  std::vector<int> only;
  app.add_option("criteria", only, "Criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char *, std::function<Verdict()>>> all = {
      {"bandwidth-table", bandwidth},
      {"gossip-coverage", gossip_coverage},
      {"decay-law", decay_law},
      {"score-oracle", score_oracle},
      {"mesh-invariants", mesh_invariants},
      {"eclipse-warm", eclipse_warm},
      {"cold-boot", cold_boot},
      {"covert-flash", covert_flash},
      {"duplicate-ordering", duplicates},
      {"censorship", censorship},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int num = static_cast<int>(i + 1);
    if (!only.empty()
        && std::find(only.begin(), only.end(), num) == only.end()) {
      continue;
    }
    Verdict v;
    try {
      v = all[i].second();
    } catch (const std::exception &ex) {
      v = {false, std::string("exception: ") + ex.what()};
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " C" << num << ' '
              << all[i].first << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
