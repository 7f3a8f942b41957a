/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gossipsim/types.hpp"

namespace gossipsim {

  /// Published payload. Only the size of the payload is modelled.
  struct Message {
    PeerId publisher;
    std::uint64_t seqno{0};
    TopicId topic;
    std::uint32_t payload_size{1};
    SimTime publish_time{0};
    /// Set by adversaries injecting junk; the scenario validator rejects it.
    bool garbage{false};

    bool operator==(const Message &) const = default;
  };

  struct MessageId {
    std::uint64_t value{0};

    constexpr auto operator<=>(const MessageId &) const = default;
  };

  /// Digest of (publisher, seqno, topic). Stable across runs and processes.
  MessageId compute_message_id(const Message &msg);

  std::string to_hex(MessageId id);

  struct Graft {
    TopicId topic;
    bool operator==(const Graft &) const = default;
  };

  struct Prune {
    TopicId topic;
    std::vector<PeerId> px;
    SimTime backoff_ms{0};
    bool operator==(const Prune &) const = default;
  };

  struct IHave {
    TopicId topic;
    std::vector<MessageId> ids;
    bool operator==(const IHave &) const = default;
  };

  struct IWant {
    std::vector<MessageId> ids;
    bool operator==(const IWant &) const = default;
  };

  using ControlMessage = std::variant<Graft, Prune, IHave, IWant>;

  struct Rpc {
    PeerId from;
    std::vector<Message> messages;
    std::vector<ControlMessage> control;

    bool empty() const {
      return messages.empty() && control.empty();
    }
  };

  enum class Validation { kValid, kInvalid };

  using Validator = std::function<Validation(const Message &)>;

  /// Per-topic application validation hooks. Topics without a registered
  /// hook are treated as unknown and their messages as invalid.
  class ValidatorRegistry {
   public:
    /// Registers the accept-all hook unless one is already present.
    void ensure_default(const TopicId &topic);
    void set(const TopicId &topic, Validator validator);
    bool knows(const TopicId &topic) const;

    Validation validate(const Message &msg) const;

   private:
    std::map<TopicId, Validator> hooks_;
  };

  Validation validate_message(const Message &msg,
                              const ValidatorRegistry &validators);

  /// Rejects adversary-flagged payloads, accepts everything else.
  Validation reject_garbage(const Message &msg);

}  // namespace gossipsim

template <>
struct std::hash<gossipsim::MessageId> {
  std::size_t operator()(gossipsim::MessageId id) const noexcept {
    return static_cast<std::size_t>(id.value);
  }
};
