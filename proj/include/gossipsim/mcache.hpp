/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <deque>
#include <unordered_map>
#include <vector>

#include "gossipsim/message.hpp"

namespace gossipsim {

  /// Sliding history of recently seen messages. The newest `gossip_rounds`
  /// windows feed IHAVE; all `history_len` windows answer IWANT.
  class MessageCache {
   public:
    MessageCache(std::size_t history_len, std::size_t gossip_rounds);

    /// Returns false if the id is already cached.
    bool put(const Message &msg, MessageId id);
    bool contains(MessageId id) const;
    const Message *get(MessageId id) const;

    /// Ids of `topic` in the gossip windows, newest first.
    std::vector<MessageId> gossip_ids(const TopicId &topic) const;

    /// Drops the oldest window and opens a fresh one.
    void shift();

    std::size_t size() const {
      return store_.size();
    }

   private:
    std::size_t gossip_rounds_;
    std::deque<std::vector<MessageId>> windows_;
    std::unordered_map<MessageId, Message> store_;
  };

}  // namespace gossipsim
