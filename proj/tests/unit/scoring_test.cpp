/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>

#include <doctest.h>

#include "gossipsim/parallel.hpp"
#include "gossipsim/scoring.hpp"
#include "oracles/random_inputs.hpp"
#include "oracles/score_oracle.hpp"

using namespace gossipsim;

namespace {

  const TopicId kTopic{"blocks"};

  ScoreParams one_topic() {
    ScoreParams p;
    p.topic_cap = 1e6;
    p.topic_defaults.time_in_mesh_weight = 0.5;
    return p;
  }

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("fresh peer scores zero, unknown peer scores zero") {
    ScoreBook book;
    book.add_peer(PeerId{1}, "a");
    CHECK(book.score(PeerId{1}, 12345) == 0.0);
    CHECK(book.score(PeerId{99}, 12345) == 0.0);
  }

  TEST_CASE("time in mesh grows linearly and is capped") {
    ScoreBook book(one_topic());
    const PeerId p{1};
    book.add_peer(p, "a");
    book.record_graft(p, kTopic, 0);
    CHECK(book.score(p, 0) == 0.0);
    // Deficit is charged once active, so keep deliveries above threshold.
    for (int i = 0; i < 5; ++i) {
      book.record_delivery(p, kTopic, DeliveryKind::kDuplicate, true, true);
    }
    CHECK(book.score(p, 5000) == doctest::Approx(2.5));
    CHECK(book.score(p, 100'000'000) == doctest::Approx(0.5 * 3600));
  }

  TEST_CASE("double graft keeps the original mesh time") {
    ScoreBook book(one_topic());
    const PeerId p{1};
    book.add_peer(p, "a");
    book.record_graft(p, kTopic, 0);
    book.record_graft(p, kTopic, 4000);
    CHECK(*book.stats(p)->topics.at(kTopic).mesh_since == 0);
  }

  TEST_CASE("hand evaluation of a mixed score") {
    ScoreParams params = one_topic();
    params.topic_defaults.mesh_deliveries_threshold = 3;
    params.topic_defaults.mesh_deliveries_activation_ms = 0;
    PeerStats s;
    auto &t = s.topics[kTopic];
    t.in_mesh = true;
    t.mesh_since = 0;
    t.first_deliveries = 3;
    t.mesh_deliveries = 1;
    // 0.5 * 5 + 3 - (3 - 1)^2 = 1.5
    CHECK(evaluate_score(s, 1, 5000, params) == doctest::Approx(1.5));
  }

  TEST_CASE("deliveries") {
    ScoreBook book;
    const PeerId p{1};
    book.add_peer(p, "a");
    book.record_delivery(p, kTopic, DeliveryKind::kFirst, true, true);
    auto t = book.stats(p)->topics.at(kTopic);
    CHECK(t.first_deliveries == 1);
    CHECK(t.mesh_deliveries == 1);
    book.record_delivery(p, kTopic, DeliveryKind::kDuplicate, true, false);
    CHECK(book.stats(p)->topics.at(kTopic).mesh_deliveries == 1);
    book.record_delivery(p, kTopic, DeliveryKind::kDuplicate, true, true);
    CHECK(book.stats(p)->topics.at(kTopic).mesh_deliveries == 2);
    book.record_delivery(p, kTopic, DeliveryKind::kFirst, false, true);
    CHECK(book.stats(p)->topics.at(kTopic).first_deliveries == 2);
    CHECK(book.stats(p)->topics.at(kTopic).mesh_deliveries == 2);
  }

  TEST_CASE("first deliveries are capped") {
    ScoreBook book;
    const PeerId p{1};
    book.add_peer(p, "a");
    for (int i = 0; i < 10; ++i) {
      book.record_delivery(p, kTopic, DeliveryKind::kFirst, false, true);
    }
    CHECK(book.score(p, 0) == doctest::Approx(10));
    for (int i = 0; i < 500; ++i) {
      book.record_delivery(p, kTopic, DeliveryKind::kFirst, false, true);
    }
    CHECK(book.score(p, 0) == doctest::Approx(100));
  }

  TEST_CASE("invalid messages are linear and uncapped") {
    ScoreBook book;
    const PeerId p{1};
    book.add_peer(p, "a");
    for (int i = 0; i < 3; ++i) {
      book.record_invalid(p, kTopic);
    }
    CHECK(book.score(p, 0) == doctest::Approx(-30));
  }

  TEST_CASE("prune of an underdelivering negative peer adds the deficit") {
    ScoreParams params;
    params.topic_defaults.mesh_deliveries_threshold = 4;
    ScoreBook book(params);
    const PeerId p{1};
    book.add_peer(p, "a");
    book.record_graft(p, kTopic, 0);
    book.record_delivery(p, kTopic, DeliveryKind::kFirst, true, true);
    book.set_app_score(p, -50);
    book.record_prune(p, kTopic, 10'000);
    const auto &t = book.stats(p)->topics.at(kTopic);
    CHECK(t.mesh_failure_penalty == doctest::Approx(3));
    CHECK_FALSE(t.in_mesh);
    CHECK_FALSE(t.mesh_since.has_value());

    SUBCASE("penalty accumulates across cycles") {
      book.record_graft(p, kTopic, 20'000);
      book.record_prune(p, kTopic, 30'000);
      CHECK(book.stats(p)->topics.at(kTopic).mesh_failure_penalty
            == doctest::Approx(3 + 4 - 1));
    }
  }

  TEST_CASE("prune of a peer meeting the threshold adds nothing") {
    ScoreBook book;
    const PeerId p{1};
    book.add_peer(p, "a");
    book.record_graft(p, kTopic, 0);
    for (int i = 0; i < 5; ++i) {
      book.record_delivery(p, kTopic, DeliveryKind::kFirst, true, true);
    }
    book.set_app_score(p, -50);
    book.record_prune(p, kTopic, 10'000);
    CHECK(book.stats(p)->topics.at(kTopic).mesh_failure_penalty == 0);
  }

  TEST_CASE("app score is last write wins") {
    ScoreBook book;
    const PeerId p{1};
    book.add_peer(p, "a");
    book.set_app_score(p, 5);
    book.set_app_score(p, -5);
    CHECK(book.score(p, 0) == -5);
    book.set_app_score(p, -100);
    CHECK(book.score(p, 0) == -100);
  }

  TEST_CASE("ip collocation follows the census of connected peers") {
    ScoreBook book;
    for (std::uint32_t i = 0; i < 4; ++i) {
      book.add_peer(PeerId{i}, "shared");
    }
    book.add_peer(PeerId{9}, "alone");
    CHECK(book.peers_on_ip("shared") == 4);
    CHECK(book.score(PeerId{0}, 0) == -9);
    CHECK(book.score(PeerId{9}, 0) == 0);
    book.remove_peer(PeerId{3});
    CHECK(book.peers_on_ip("shared") == 3);
    CHECK(book.score(PeerId{0}, 0) == -4);
    book.add_peer(PeerId{3}, "shared");
    CHECK(book.peers_on_ip("shared") == 4);
  }

  TEST_CASE("decay multiplies and snaps small counters to zero") {
    ScoreBook book;
    const PeerId p{1};
    book.add_peer(p, "a");
    for (int i = 0; i < 10; ++i) {
      book.record_delivery(p, kTopic, DeliveryKind::kFirst, false, true);
    }
    book.decay_tick(1000);
    CHECK(book.stats(p)->topics.at(kTopic).first_deliveries
          == doctest::Approx(9.0));
    book.decay_tick(2000);
    CHECK(book.stats(p)->topics.at(kTopic).first_deliveries
          == doctest::Approx(8.1));
    for (int i = 0; i < 100; ++i) {
      book.decay_tick(3000 + i * 1000);
    }
    CHECK(book.stats(p)->topics.at(kTopic).first_deliveries == 0);
  }

  TEST_CASE("parameter validation rejects wrong signs") {
    ScoreParams p;
    CHECK_NOTHROW(p.validate());
    p.topic_defaults.invalid_messages_weight = 1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.decay.first_deliveries = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.ip_colocation_weight = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }

  TEST_CASE("monotonicity in penalties and rewards") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
      auto c = oracle::random_case(rng);
      if (c.stats.topics.empty()) {
        continue;
      }
      const double base =
          evaluate_score(c.stats, c.peers_on_ip, c.now, c.params);
      auto worse = c.stats;
      worse.topics.begin()->second.invalid_messages += 1;
      worse.topics.begin()->second.mesh_failure_penalty += 1;
      CHECK(evaluate_score(worse, c.peers_on_ip, c.now, c.params) <= base);
      CHECK(evaluate_score(c.stats, c.peers_on_ip + 1, c.now, c.params)
            <= base);
      auto better = c.stats;
      better.topics.begin()->second.first_deliveries += 1;
      CHECK(evaluate_score(better, c.peers_on_ip, c.now, c.params) >= base);
    }
  }

  TEST_CASE("oracle agreement on randomized inputs") {
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
      const auto c = oracle::random_case(rng);
      const double got =
          evaluate_score(c.stats, c.peers_on_ip, c.now, c.params);
      const double want = oracle::score(c.stats, c.peers_on_ip, c.now, c.params);
      CHECK(std::abs(got - want) <= 1e-9 * std::max(std::abs(want), 1e-12));
    }
  }

  TEST_CASE("batch scoring matches its serial reference") {
    Rng rng(3);
    std::vector<ScoreInput> in;
    for (int i = 0; i < 500; ++i) {
      const auto c = oracle::random_case(rng);
      in.push_back({c.stats, c.peers_on_ip});
    }
    const ScoreParams params;
    const auto serial = batch_scores_serial(in, 50'000, params);
    CHECK(batch_scores(in, 50'000, params, 1) == serial);
    CHECK(batch_scores(in, 50'000, params, 4) == serial);
  }
}
