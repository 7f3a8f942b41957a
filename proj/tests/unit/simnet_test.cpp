/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <set>

#include <doctest.h>

#include "gossipsim/parallel.hpp"
#include "gossipsim/simnet.hpp"

using namespace gossipsim;

namespace {

  ScenarioConfig small(Protocol p = Protocol::kGossipSub) {
    ScenarioConfig c;
    c.name = "small";
    c.duration_ms = 10'000;
    c.n_honest = 30;
    c.n_publishers = 3;
    c.protocol = p;
    c.traffic.drain_ms = 2000;
    return c;
  }

}  // namespace

TEST_SUITE("simnet") {
  TEST_CASE("protocol names") {
    for (auto p : {Protocol::kGossipSub, Protocol::kPlain, Protocol::kFlood,
                   Protocol::kSqrtN}) {
      CHECK(parse_protocol(to_string(p)) == p);
    }
    CHECK_THROWS_AS(parse_protocol("x"), std::invalid_argument);
  }

  TEST_CASE("latency samples stay in range") {
    Rng rng(1);
    LatencyModel m;
    for (int i = 0; i < 1000; ++i) {
      const auto v = sample_latency(m, rng);
      CHECK(v >= m.min_ms);
      CHECK(v <= m.max_ms);
    }
    m.distribution = LatencyModel::Distribution::kLognormal;
    for (int i = 0; i < 1000; ++i) {
      const auto v = sample_latency(m, rng);
      CHECK(v >= m.min_ms);
      CHECK(v <= m.max_ms);
    }
    m.min_ms = 200;
    CHECK_THROWS(m.validate());
  }

  TEST_CASE("automatic P3a threshold") {
    CHECK(auto_p3a_threshold(10, 1000) == doctest::Approx(2.5));
    auto c = small();
    CHECK(c.effective_score().topic_defaults.mesh_deliveries_threshold
          == doctest::Approx(2.5));
    c.p3a_threshold_auto = false;
    c.score.topic_defaults.mesh_deliveries_threshold = 7;
    CHECK(c.effective_score().topic_defaults.mesh_deliveries_threshold == 7);
  }

  TEST_CASE("plain protocol runs with mitigations off") {
    auto c = small(Protocol::kPlain);
    const auto m = c.effective_mesh();
    CHECK_FALSE(m.scoring);
    CHECK_FALSE(m.flood_publish);
  }

  TEST_CASE("config validation") {
    auto c = small();
    CHECK_NOTHROW(c.validate());
    c.n_publishers = 40;
    CHECK_THROWS(c.validate());
    c = small(Protocol::kFlood);
    c.n_sybil = 3;
    CHECK_THROWS(c.validate());
  }

  TEST_CASE("topology has no self loops or duplicate links") {
    auto c = small();
    c.n_sybil = 10;
    const auto t = build_topology(c);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto &l : t.links) {
      CHECK(l.dialer != l.acceptor);
      const auto key = std::minmax(l.dialer.value, l.acceptor.value);
      CHECK(seen.insert(key).second);
    }
    CHECK(t.links.size() >= 30 * 10);
  }

  TEST_CASE("deterministic protocols deliver everything in a calm network") {
    for (auto p : {Protocol::kGossipSub, Protocol::kPlain, Protocol::kFlood}) {
      CAPTURE(to_string(p));
      const auto r = run(small(p));
      CHECK(r.messages > 50);
      CHECK(r.loss_fraction == 0.0);
      CHECK(r.p99.has_value());
    }
  }

  TEST_CASE("random forwarding delivers nearly everything") {
    const auto r = run(small(Protocol::kSqrtN));
    CHECK(r.messages > 50);
    CHECK(r.loss_fraction < 0.05);
  }

  TEST_CASE("heartbeat hook sees every honest node") {
    auto c = small();
    std::set<std::uint32_t> nodes;
    std::size_t calls = 0;
    RunHooks h;
    h.after_heartbeat = [&](const Node &n, SimTime) {
      nodes.insert(n.id().value);
      ++calls;
    };
    run(c, nullptr, h);
    CHECK(nodes.size() == 30);
    CHECK(calls >= 30 * 9);
  }

  TEST_CASE("same seed same report, different seed different report") {
    auto a = run(small());
    auto b = run(small());
    CHECK(report_json(a) == report_json(b));
    auto c = small();
    c.seed = 2;
    CHECK(report_json(run(c)) != report_json(a));
  }
}

TEST_SUITE("parallel") {
  TEST_CASE("gossip miss count matches its serial reference") {
    MeshParams p;
    const auto serial = gossip_miss_count_serial(p, 100, 3, 5000, 9);
    CHECK(gossip_miss_count(p, 100, 3, 5000, 9, 1) == serial);
    CHECK(gossip_miss_count(p, 100, 3, 5000, 9, 3) == serial);
    const double rate = static_cast<double>(serial) / 5000;
    CHECK(rate == doctest::Approx(0.421875).epsilon(0.08));
  }

  TEST_CASE("run_all matches run_all_serial and keeps order") {
    std::vector<ScenarioConfig> cfgs;
    for (auto p : {Protocol::kGossipSub, Protocol::kFlood, Protocol::kSqrtN}) {
      cfgs.push_back(small(p));
    }
    cfgs[0].seed = 4;
    std::vector<std::size_t> done;
    const auto serial = run_all_serial(cfgs);
    const auto threaded = run_all(cfgs, 3, [&](std::size_t i, const ScenarioConfig &,
                                                 RunOutcome &) {
#pragma omp critical
      done.push_back(i);
    });
    REQUIRE(serial.size() == 3);
    REQUIRE(threaded.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(serial[i].ok);
      CHECK(report_json(serial[i].report) == report_json(threaded[i].report));
    }
    CHECK(done.size() == 3);
  }

  TEST_CASE("a failing run is reported, not thrown") {
    auto bad = small();
    bad.n_publishers = 1000;
    const auto out = run_all({bad}, 1);
    REQUIRE(out.size() == 1);
    CHECK_FALSE(out[0].ok);
    CHECK_FALSE(out[0].error.empty());
  }
}
