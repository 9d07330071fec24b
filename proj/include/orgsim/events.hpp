#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace orgsim {

using Tick = std::int64_t;
using Json = nlohmann::ordered_json;

enum class EventKind {
  ConditionFired,
  MeetingHeld,
  ElectionHeld,
  ExceptionRaised,
  ExceptionEscalated,
  ExceptionForwarded,
  RoleAssigned,
  SonFormed,
  SonDissolved,
  ProtocolFailed,
  ConflictRecorded,
  NodeFailed,
  NodeRecovered,
  MessageSent,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

// Receives every observable state change. The engine stamps tick and seq.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void emit(EventKind kind, Json payload) = 0;
};

// Keeps emitted events in order; used by callers that drive protocol
// operations outside the engine.
class RecordingSink final : public EventSink {
 public:
  struct Entry {
    EventKind kind;
    Json payload;
  };

  void emit(EventKind kind, Json payload) override { entries.push_back({kind, std::move(payload)}); }
  std::size_t count(EventKind kind) const;

  std::vector<Entry> entries;
};

}  // namespace orgsim
