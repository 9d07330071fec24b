#include "orgsim/events.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace orgsim {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 14> kNames = {{
    {EventKind::ConditionFired, "ConditionFired"},
    {EventKind::MeetingHeld, "MeetingHeld"},
    {EventKind::ElectionHeld, "ElectionHeld"},
    {EventKind::ExceptionRaised, "ExceptionRaised"},
    {EventKind::ExceptionEscalated, "ExceptionEscalated"},
    {EventKind::ExceptionForwarded, "ExceptionForwarded"},
    {EventKind::RoleAssigned, "RoleAssigned"},
    {EventKind::SonFormed, "SonFormed"},
    {EventKind::SonDissolved, "SonDissolved"},
    {EventKind::ProtocolFailed, "ProtocolFailed"},
    {EventKind::ConflictRecorded, "ConflictRecorded"},
    {EventKind::NodeFailed, "NodeFailed"},
    {EventKind::NodeRecovered, "NodeRecovered"},
    {EventKind::MessageSent, "MessageSent"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::size_t RecordingSink::count(EventKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.kind == kind; }));
}

}  // namespace orgsim
