/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gossipsim/message.hpp"

namespace gossipsim {

  enum class TraceKind : std::uint8_t {
    kRunStart,
    kJoin,
    kLeave,
    kPublish,
    kDeliver,
    kDuplicate,
    kInvalid,
    kUnknownTopic,
    kGraft,
    kPrune,
    kIHave,
    kIWant,
    kMeshSnapshot,
    kAttack,
    kRefused,
    kRunEnd,
  };

  std::string to_string(TraceKind kind);
  /// Throws std::invalid_argument on an unknown name.
  TraceKind parse_trace_kind(const std::string &name);

  /// One trace record. Which fields are meaningful depends on `kind`:
  ///  - join/leave: node, honest
  ///  - publish: node (publisher), id
  ///  - deliver/duplicate/invalid/unknown_topic: node, peer (sender), id
  ///  - graft/prune/ihave/iwant: node (sender), peer (receiver), count
  ///  - mesh_snapshot: node, heartbeat, honest_in_mesh, sybil_in_mesh
  ///  - refused: node (dialer), peer
  ///  - run_start/run_end: count (node population)
  struct TraceEvent {
    SimTime time_ms = 0;
    TraceKind kind = TraceKind::kRunStart;
    PeerId node = kNoPeer;
    PeerId peer = kNoPeer;
    MessageId id{};
    bool honest = true;
    std::uint64_t count = 0;
    std::uint64_t heartbeat = 0;
    std::uint32_t honest_in_mesh = 0;
    std::uint32_t sybil_in_mesh = 0;

    bool operator==(const TraceEvent &) const = default;
  };

  /// Single-line JSON, keys limited to the fields that `kind` uses.
  std::string to_json_line(const TraceEvent &e);
  /// Inverse of to_json_line. Throws std::invalid_argument on bad input.
  TraceEvent from_json_line(const std::string &line);

  class TraceSink {
   public:
    virtual ~TraceSink() = default;
    virtual void on_event(const TraceEvent &e) = 0;
    /// Control-message events are only generated when some sink asks.
    virtual bool wants_control() const {
      return false;
    }
  };

  class VectorSink : public TraceSink {
   public:
    explicit VectorSink(bool with_control = true)
        : with_control_(with_control) {}

    void on_event(const TraceEvent &e) override {
      events.push_back(e);
    }
    bool wants_control() const override {
      return with_control_;
    }

    std::vector<TraceEvent> events;

   private:
    bool with_control_;
  };

  class JsonlTraceWriter : public TraceSink {
   public:
    explicit JsonlTraceWriter(std::ostream &out) : out_(out) {}

    void on_event(const TraceEvent &e) override;
    bool wants_control() const override {
      return true;
    }

   private:
    std::ostream &out_;
  };

  /// Fans events out to several sinks.
  class TeeSink : public TraceSink {
   public:
    void add(TraceSink *sink) {
      sinks_.push_back(sink);
    }
    void on_event(const TraceEvent &e) override {
      for (auto *s : sinks_) {
        s->on_event(e);
      }
    }
    bool wants_control() const override;

   private:
    std::vector<TraceSink *> sinks_;
  };

}  // namespace gossipsim
