/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "gossipsim/trace.hpp"

#include <array>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace gossipsim {

  namespace {

    constexpr std::array<const char *, 16> kNames = {
        "run_start", "join",  "leave", "publish", "deliver",       "duplicate",
        "invalid",   "unknown_topic", "graft", "prune", "ihave",   "iwant",
        "mesh_snapshot", "attack", "refused", "run_end",
    };

    bool carries_message(TraceKind k) {
      return k == TraceKind::kPublish || k == TraceKind::kDeliver
          || k == TraceKind::kDuplicate || k == TraceKind::kInvalid
          || k == TraceKind::kUnknownTopic;
    }

    bool carries_peer(TraceKind k) {
      return k == TraceKind::kDeliver || k == TraceKind::kDuplicate
          || k == TraceKind::kInvalid || k == TraceKind::kUnknownTopic
          || k == TraceKind::kGraft || k == TraceKind::kPrune
          || k == TraceKind::kIHave || k == TraceKind::kIWant
          || k == TraceKind::kRefused;
    }

    bool carries_count(TraceKind k) {
      return k == TraceKind::kGraft || k == TraceKind::kPrune
          || k == TraceKind::kIHave || k == TraceKind::kIWant
          || k == TraceKind::kRunStart || k == TraceKind::kRunEnd;
    }

    MessageId parse_hex_id(const std::string &s) {
      if (s.size() != 16) {
        throw std::invalid_argument("trace: bad message id '" + s + "'");
      }
      return MessageId{std::stoull(s, nullptr, 16)};
    }

  }  // namespace

  std::string to_string(TraceKind kind) {
    return kNames.at(static_cast<std::size_t>(kind));
  }

  TraceKind parse_trace_kind(const std::string &name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
      if (name == kNames[i]) {
        return static_cast<TraceKind>(i);
      }
    }
    throw std::invalid_argument("trace: unknown event '" + name + "'");
  }

  std::string to_json_line(const TraceEvent &e) {
    nlohmann::ordered_json j;
    j["time_ms"] = e.time_ms;
    j["node"] = e.node.value;
    j["event"] = to_string(e.kind);
    if (carries_peer(e.kind)) {
      j["peer"] = e.peer.value;
    }
    if (carries_message(e.kind)) {
      j["msg"] = to_hex(e.id);
    }
    if (carries_count(e.kind)) {
      j["count"] = e.count;
    }
    j["honest"] = e.honest;
    if (e.kind == TraceKind::kMeshSnapshot) {
      j["heartbeat"] = e.heartbeat;
      j["honest_in_mesh"] = e.honest_in_mesh;
      j["sybil_in_mesh"] = e.sybil_in_mesh;
    }
    return j.dump();
  }

  TraceEvent from_json_line(const std::string &line) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &ex) {
      throw std::invalid_argument(std::string("trace: ") + ex.what());
    }
    try {
      TraceEvent e;
      e.time_ms = j.at("time_ms").get<SimTime>();
      e.node = PeerId{j.at("node").get<std::uint32_t>()};
      e.kind = parse_trace_kind(j.at("event").get<std::string>());
      if (carries_peer(e.kind)) {
        e.peer = PeerId{j.at("peer").get<std::uint32_t>()};
      }
      if (carries_message(e.kind)) {
        e.id = parse_hex_id(j.at("msg").get<std::string>());
      }
      if (carries_count(e.kind)) {
        e.count = j.at("count").get<std::uint64_t>();
      }
      e.honest = j.value("honest", true);
      if (e.kind == TraceKind::kMeshSnapshot) {
        e.heartbeat = j.at("heartbeat").get<std::uint64_t>();
        e.honest_in_mesh = j.at("honest_in_mesh").get<std::uint32_t>();
        e.sybil_in_mesh = j.at("sybil_in_mesh").get<std::uint32_t>();
      }
      return e;
    } catch (const nlohmann::json::exception &ex) {
      throw std::invalid_argument(std::string("trace: ") + ex.what());
    }
  }

  void JsonlTraceWriter::on_event(const TraceEvent &e) {
    out_ << to_json_line(e) << '\n';
  }

  bool TeeSink::wants_control() const {
    for (auto *s : sinks_) {
      if (s->wants_control()) {
        return true;
      }
    }
    return false;
  }

}  // namespace gossipsim
