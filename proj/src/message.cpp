/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/message.hpp"

#include <cstdio>

namespace gossipsim {

  namespace {

    constexpr std::uint64_t mix64(std::uint64_t x) {
      x += 0x9e3779b97f4a7c15ULL;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
      return x ^ (x >> 31);
    }

    std::uint64_t fnv1a(const std::string &s) {
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
      return h;
    }

  }  // namespace

  MessageId compute_message_id(const Message &msg) {
    // mix64 is a bijection, so for a fixed (publisher, topic) distinct
    // seqnos never collide.
    std::uint64_t h = mix64(fnv1a(msg.topic.name()));
    h = mix64(h ^ (static_cast<std::uint64_t>(msg.publisher.value) << 1));
    h = mix64(h ^ msg.seqno);
    return MessageId{h};
  }

  std::string to_hex(MessageId id) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(id.value));
    return buf;
  }

  void ValidatorRegistry::ensure_default(const TopicId &topic) {
    hooks_.try_emplace(topic,
                       [](const Message &) { return Validation::kValid; });
  }

  void ValidatorRegistry::set(const TopicId &topic, Validator validator) {
    hooks_[topic] = std::move(validator);
  }

  bool ValidatorRegistry::knows(const TopicId &topic) const {
    return hooks_.contains(topic);
  }

  Validation ValidatorRegistry::validate(const Message &msg) const {
    auto it = hooks_.find(msg.topic);
    if (it == hooks_.end()) {
      return Validation::kInvalid;
    }
    return it->second(msg);
  }

  Validation validate_message(const Message &msg,
                              const ValidatorRegistry &validators) {
    return validators.validate(msg);
  }

  Validation reject_garbage(const Message &msg) {
    return msg.garbage ? Validation::kInvalid : Validation::kValid;
  }

}  // namespace gossipsim
