/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <set>

#include <doctest.h>

#include "gossipsim/mcache.hpp"
#include "gossipsim/message.hpp"
#include "gossipsim/node.hpp"
#include "gossipsim/rng.hpp"

using namespace gossipsim;

namespace {

  const TopicId kTopic{"blocks"};

  Message msg(std::uint32_t publisher, std::uint64_t seq,
              const TopicId &topic = kTopic) {
    return Message{PeerId{publisher}, seq, topic, 10, 0, false};
  }

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("topic names must be nonempty") {
    CHECK_THROWS_AS(TopicId(""), std::invalid_argument);
    CHECK(TopicId("a") < TopicId("b"));
  }

  TEST_CASE("rng is reproducible and seeds are independent") {
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
      CHECK(a.next() == b.next());
    }
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(9, 3) == derive_seed(9, 3));
  }

  TEST_CASE("rng draws stay in range") {
    Rng r(11);
    for (int i = 0; i < 10000; ++i) {
      CHECK(r.below(7) < 7);
      const auto v = r.uniform_int(-3, 3);
      CHECK(v >= -3);
      CHECK(v <= 3);
      const double u = r.uniform01();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("rng sample returns distinct members of the pool") {
    Rng r(2);
    std::vector<int> pool(50);
    for (int i = 0; i < 50; ++i) {
      pool[i] = i;
    }
    const auto s = r.sample(pool, 10);
    CHECK(s.size() == 10);
    CHECK(std::set<int>(s.begin(), s.end()).size() == 10);
    CHECK(r.sample(pool, 80).size() == 50);
    auto shuffled = pool;
    r.shuffle(shuffled);
    std::sort(shuffled.begin(), shuffled.end());
    CHECK(shuffled == pool);
  }

  TEST_CASE("normal draws have the right moments") {
    Rng r(17);
    double sum = 0;
    double sq = 0;
    constexpr int kN = 200000;
    for (int i = 0; i < kN; ++i) {
      const double x = r.normal();
      sum += x;
      sq += x * x;
    }
    CHECK(sum / kN == doctest::Approx(0.0).epsilon(0.01).scale(1));
    CHECK(sq / kN == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("message ids") {
    CHECK(compute_message_id(msg(1, 1)) == compute_message_id(msg(1, 1)));
    std::set<MessageId> ids;
    for (std::uint32_t p = 0; p < 30; ++p) {
      for (std::uint64_t s = 0; s < 100; ++s) {
        ids.insert(compute_message_id(msg(p, s)));
      }
    }
    CHECK(ids.size() == 3000);
    CHECK(compute_message_id(msg(1, 1)) != compute_message_id(msg(1, 1, TopicId("other"))));
    CHECK(to_hex(MessageId{255}) == "00000000000000ff");
  }

  TEST_CASE("validators") {
    ValidatorRegistry reg;
    CHECK(reg.validate(msg(1, 1)) == Validation::kInvalid);
    reg.ensure_default(kTopic);
    CHECK(reg.validate(msg(1, 1)) == Validation::kValid);
    reg.set(kTopic, reject_garbage);
    auto bad = msg(1, 2);
    bad.garbage = true;
    CHECK(validate_message(bad, reg) == Validation::kInvalid);
    CHECK(validate_message(msg(1, 3), reg) == Validation::kValid);
  }

  TEST_CASE("message cache windows") {
    MessageCache mc(5, 3);
    const auto m1 = msg(1, 1);
    const auto id1 = compute_message_id(m1);
    CHECK(mc.put(m1, id1));
    CHECK_FALSE(mc.put(m1, id1));
    CHECK(mc.contains(id1));
    CHECK(*mc.get(id1) == m1);
    CHECK(mc.gossip_ids(kTopic) == std::vector<MessageId>{id1});
    CHECK(mc.gossip_ids(TopicId("other")).empty());
    mc.shift();
    mc.shift();
    CHECK(mc.gossip_ids(kTopic).size() == 1);
    mc.shift();
    // Out of the gossip window but still servable.
    CHECK(mc.gossip_ids(kTopic).empty());
    CHECK(mc.contains(id1));
    mc.shift();
    mc.shift();
    CHECK_FALSE(mc.contains(id1));
    CHECK(mc.get(id1) == nullptr);
    CHECK(mc.size() == 0);
    CHECK_THROWS_AS(MessageCache(2, 3), std::invalid_argument);
  }

  TEST_CASE("effects merge into one rpc per destination") {
    const PeerId self{0};
    Effects a;
    a.to(self, PeerId{1}).messages.push_back(msg(0, 1));
    a.to(self, PeerId{1}).control.emplace_back(Graft{kTopic});
    CHECK(a.sends.size() == 1);
    Effects b;
    b.to(self, PeerId{1}).control.emplace_back(Graft{kTopic});
    b.to(self, PeerId{2}).messages.push_back(msg(0, 2));
    b.discovered.push_back(PeerId{9});
    a.append(std::move(b));
    CHECK(a.sends.size() == 2);
    CHECK(a.sends[0].rpc.control.size() == 2);
    CHECK(a.sends[1].to == PeerId{2});
    CHECK(a.discovered.size() == 1);

    SUBCASE("the lookup index stays consistent past the linear scan") {
      Effects big;
      for (std::uint32_t i = 1; i <= 40; ++i) {
        big.to(self, PeerId{i}).messages.push_back(msg(0, i));
      }
      for (std::uint32_t i = 1; i <= 40; ++i) {
        big.to(self, PeerId{i}).messages.push_back(msg(0, 100 + i));
      }
      REQUIRE(big.sends.size() == 40);
      for (const auto &o : big.sends) {
        CHECK(o.rpc.messages.size() == 2);
        CHECK(o.rpc.from == self);
      }
    }
  }
}
