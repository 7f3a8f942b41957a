/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/mcache.hpp"

#include <stdexcept>

namespace gossipsim {

  MessageCache::MessageCache(std::size_t history_len, std::size_t gossip_rounds)
      : gossip_rounds_(gossip_rounds), windows_(history_len) {
    if (gossip_rounds == 0 || history_len < gossip_rounds) {
      throw std::invalid_argument(
          "mcache: need history_len >= gossip_rounds >= 1");
    }
  }

  bool MessageCache::put(const Message &msg, MessageId id) {
    if (!store_.try_emplace(id, msg).second) {
      return false;
    }
    windows_.front().push_back(id);
    return true;
  }

  bool MessageCache::contains(MessageId id) const {
    return store_.contains(id);
  }

  const Message *MessageCache::get(MessageId id) const {
    auto it = store_.find(id);
    return it == store_.end() ? nullptr : &it->second;
  }

  std::vector<MessageId> MessageCache::gossip_ids(const TopicId &topic) const {
    std::vector<MessageId> out;
    for (std::size_t w = 0; w < gossip_rounds_; ++w) {
      for (auto id : windows_[w]) {
        if (store_.at(id).topic == topic) {
          out.push_back(id);
        }
      }
    }
    return out;
  }

  void MessageCache::shift() {
    for (auto id : windows_.back()) {
      store_.erase(id);
    }
    windows_.pop_back();
    windows_.emplace_front();
  }

}  // namespace gossipsim
