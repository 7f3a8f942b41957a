/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace gossipsim {

  /// Simulation time and durations, in milliseconds.
  using SimTime = std::int64_t;

  /// Opaque node identity. Totally ordered so that ties can be broken
  /// deterministically.
  struct PeerId {
    std::uint32_t value{0};

    constexpr auto operator<=>(const PeerId &) const = default;
  };

  inline constexpr PeerId kNoPeer{std::numeric_limits<std::uint32_t>::max()};

  enum class Direction : std::uint8_t { kInbound, kOutbound };

  /// Label standing in for an IP address. Equal labels model collocated
  /// identities.
  using IpLabel = std::string;

  class TopicId {
   public:
    TopicId() = default;

    explicit TopicId(std::string name) : name_(std::move(name)) {
      if (name_.empty()) {
        throw std::invalid_argument("topic name must be nonempty");
      }
    }

    const std::string &name() const {
      return name_;
    }

    auto operator<=>(const TopicId &) const = default;

   private:
    std::string name_;
  };

}  // namespace gossipsim

template <>
struct std::hash<gossipsim::PeerId> {
  std::size_t operator()(gossipsim::PeerId p) const noexcept {
    return std::hash<std::uint32_t>{}(p.value);
  }
};

template <>
struct std::hash<gossipsim::TopicId> {
  std::size_t operator()(const gossipsim::TopicId &t) const noexcept {
    return std::hash<std::string>{}(t.name());
  }
};
