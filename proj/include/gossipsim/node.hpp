/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <unordered_map>
#include <vector>

#include "gossipsim/message.hpp"

namespace gossipsim {

  struct Outgoing {
    PeerId to;
    Rpc rpc;
  };

  enum class NoteKind : std::uint8_t { kDuplicate, kInvalid, kUnknownTopic };

  /// Side observations that do not produce traffic but end up in the trace.
  struct Note {
    NoteKind kind;
    PeerId from;
    MessageId id;
  };

  /// Everything a node wants done as the result of one event. Nodes never
  /// perform I/O; the simulator applies effects.
  class Effects {
   public:
    /// Rpc addressed to `to`, created on first use. Repeated calls for the
    /// same peer return the same Rpc so one event yields one Rpc per peer.
    Rpc &to(PeerId self, PeerId to);

    void deliver(const Message &msg) {
      local_deliveries.push_back(msg);
    }

    void note(NoteKind kind, PeerId from, MessageId id) {
      notes.push_back({kind, from, id});
    }

    void append(Effects &&other);

    bool empty() const {
      return sends.empty() && local_deliveries.empty() && notes.empty()
          && discovered.empty();
    }

    std::vector<Outgoing> sends;
    std::vector<Message> local_deliveries;
    std::vector<Note> notes;
    /// Peers learnt through PX; the simulator decides whether to dial them.
    std::vector<PeerId> discovered;

   private:
    /// Position of the send to `to`, appending an empty one when missing.
    std::size_t slot(PeerId self, PeerId to);

    /// Built once `sends` outgrows a linear scan.
    std::unordered_map<PeerId, std::size_t> index_;
  };

  /// Contract shared by the router, the baselines and the adversaries.
  /// Exactly one event is applied at a time.
  class Node {
   public:
    virtual ~Node() = default;

    virtual PeerId id() const = 0;
    virtual bool honest() const {
      return true;
    }

    virtual void add_peer(PeerId peer, Direction dir, const IpLabel &ip,
                          SimTime now) = 0;
    virtual void remove_peer(PeerId peer, SimTime now) = 0;

    virtual Effects join(const TopicId &topic, SimTime now) = 0;
    virtual Effects handle_rpc(const Rpc &rpc, SimTime now) = 0;
    virtual Effects publish(const Message &msg, SimTime now) = 0;
    virtual Effects heartbeat(SimTime now) = 0;

    /// Current mesh for `topic`; empty for protocols without one.
    virtual std::vector<PeerId> mesh_peers(const TopicId &topic) const {
      (void)topic;
      return {};
    }
  };

}  // namespace gossipsim
