/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <set>
#include <sstream>

#include <doctest.h>

#include "gossipsim/config.hpp"

using namespace gossipsim;

TEST_SUITE("config") {
  TEST_CASE("minimal file takes defaults") {
    const auto f = parse_config_text("name: tiny\n");
    CHECK(f.base.name == "tiny");
    CHECK(f.base.n_honest == 200);
    CHECK(f.base.mesh.d == 8);
    CHECK(f.base.protocol == Protocol::kGossipSub);
    CHECK(f.seeds == std::vector<std::uint64_t>{1});
    CHECK(expand(f, false).size() == 1);
  }

  TEST_CASE("nested keys and overrides") {
    const auto f = parse_config_text(
        "n_honest: 50\nmesh:\n  d: 10\n  d_high: 14\nadversary:\n  behavior: "
        "censor\n  target: 3\ntraffic:\n  message_rate: 2\n");
    CHECK(f.base.n_honest == 50);
    CHECK(f.base.n_publishers == 5);
    CHECK(f.base.mesh.d == 10);
    CHECK(f.base.adversary.kind == AttackKind::kCensor);
    CHECK(f.base.adversary.target == PeerId{3});
    CHECK(f.base.traffic.message_rate == 2);
    auto cfg = f.base;
    apply_override(cfg, "mesh.d", "12");
    CHECK(cfg.mesh.d == 12);
    CHECK_THROWS_AS(apply_override(cfg, "mesh.nope", "1"), ConfigError);
  }

  TEST_CASE("sweep expands axes times seeds") {
    const auto f = parse_config_text(
        "name: grid\nseeds: [1, 2]\nsweep:\n"
        "  - key: mesh.d_profile\n    values: [4, 8, 16]\n"
        "  - key: protocol\n    values: [gossipsub, plain]\n");
    const auto runs = expand(f, true);
    CHECK(runs.size() == 12);
    std::set<std::string> labels;
    for (const auto &r : runs) {
      labels.insert(r.label);
    }
    CHECK(labels.size() == 12);
    CHECK(runs.front().config.mesh.d == 4);
    CHECK(runs.back().config.mesh.d == 16);
    CHECK(runs.back().config.protocol == Protocol::kPlain);
    CHECK(runs[0].config.seed == 1);
    CHECK(runs[1].config.seed == 2);
    CHECK(expand(f, false).size() == 2);
  }

  TEST_CASE("violated degree constraint is rejected") {
    CHECK_THROWS_AS(parse_config_text("mesh:\n  d: 8\n  d_low: 9\n"), ConfigError);
  }

  TEST_CASE("unknown key reports its line") {
    try {
      parse_config_text("name: x\nseed: 3\nbogus_key: 1\n", "file.yaml");
      FAIL("expected a ConfigError");
    } catch (const ConfigError &e) {
      CHECK(e.line() == 3);
      CHECK(e.source() == "file.yaml");
      CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
  }

  TEST_CASE("wrong value types are rejected") {
    CHECK_THROWS_AS(parse_config_text("n_honest: lots\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("protocol: carrier_pigeon\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("- just\n- a list\n"), ConfigError);
  }

  TEST_CASE("every builtin scenario loads and validates") {
    CHECK(builtin_scenarios().size() == 6);
    for (const auto &b : builtin_scenarios()) {
      const auto f = load_config(b.name);
      CHECK(f.base.name == b.name);
      CHECK_FALSE(b.description.empty());
      CHECK_NOTHROW(f.base.validate());
      CHECK_FALSE(expand(f, true).empty());
    }
    CHECK_FALSE(find_builtin("missing").has_value());
    CHECK_THROWS_AS(load_config("/nonexistent/file.yaml"), ConfigError);
  }

  TEST_CASE("explain lists the keys") {
    std::ostringstream out;
    explain_config(out);
    CHECK(out.str().find("mesh.d_low") != std::string::npos);
    CHECK(out.str().find("adversary.behavior") != std::string::npos);
  }
}
