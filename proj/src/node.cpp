/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/node.hpp"

#include <cassert>

namespace gossipsim {

  namespace {

    constexpr std::size_t kLinearScanLimit = 16;

  }  // namespace

  std::size_t Effects::slot(PeerId self, PeerId to) {
    if (index_.empty()) {
      for (std::size_t i = 0; i < sends.size(); ++i) {
        if (sends[i].to == to) {
          return i;
        }
      }
      sends.push_back({to, Rpc{self, {}, {}}});
      if (sends.size() > kLinearScanLimit) {
        for (std::size_t i = 0; i < sends.size(); ++i) {
          index_.emplace(sends[i].to, i);
        }
      }
      return sends.size() - 1;
    }
    auto [it, inserted] = index_.try_emplace(to, sends.size());
    if (inserted) {
      sends.push_back({to, Rpc{self, {}, {}}});
    }
    return it->second;
  }

  Rpc &Effects::to(PeerId self, PeerId to) {
    assert(to != self);
    return sends[slot(self, to)].rpc;
  }

  void Effects::append(Effects &&other) {
    for (auto &out : other.sends) {
      const std::size_t before = sends.size();
      const std::size_t i = slot(out.rpc.from, out.to);
      if (i == before) {
        sends[i].rpc = std::move(out.rpc);
        continue;
      }
      auto &rpc = sends[i].rpc;
      for (auto &m : out.rpc.messages) {
        rpc.messages.push_back(std::move(m));
      }
      for (auto &c : out.rpc.control) {
        rpc.control.push_back(std::move(c));
      }
    }
    for (auto &m : other.local_deliveries) {
      local_deliveries.push_back(std::move(m));
    }
    notes.insert(notes.end(), other.notes.begin(), other.notes.end());
    discovered.insert(discovered.end(), other.discovered.begin(),
                      other.discovered.end());
  }

}  // namespace gossipsim
