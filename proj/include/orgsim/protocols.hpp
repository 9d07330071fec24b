#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orgsim/events.hpp"
#include "orgsim/org_model.hpp"
#include "orgsim/semantics.hpp"

namespace orgsim::protocols {

enum class Mode { Strict, Sociocracy, Fso };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);

struct Condition {
  std::string id;
  std::string kind;
  org::OrgId org;
  org::NodeId origin_node;
  Tick fired_at = 0;
  Tick deadline = 1;

  bool operator==(const Condition&) const = default;
};

struct TreatmentProtocol {
  std::string condition_kind;
  std::vector<semantics::RoleSpec> roles;
  Tick son_duration = 1;

  bool operator==(const TreatmentProtocol&) const = default;
};

// Search state of one role that the originating region could not fill.
struct RoleException {
  std::string condition;
  std::string role;
  std::size_t role_index = 0;
  org::OrgId org;
  org::NodeId current_node;
  std::set<org::NodeId> searched_nodes;
  int hops = 0;
  int remaining = 1;
  std::vector<org::NodeId> chain;  // nodes visited, origin first
};

struct SonMember {
  org::ActorId actor;
  std::string role;
  org::OrgId org;
  org::NodeId node;
  int layer = 0;
  std::optional<std::size_t> link;  // origin-org neighbor link when lent
};

struct SocialOverlayNetwork {
  std::string id;
  std::string condition;
  std::vector<SonMember> members;
  org::OrgId origin_org;
  Tick formed_at = 0;
  Tick dissolves_at = 0;
  int layer_span = 0;
  int org_span = 1;
  std::optional<std::string> bubble;
};

struct Representative {
  org::NodeId node;
  Tick tenure_until = 0;
};

// The children of one parent node, meeting periodically.
struct Circle {
  org::OrgId org;
  org::NodeId parent_node;
  std::vector<org::NodeId> members;
  std::optional<Representative> representative;
  std::set<std::string> advertised_capabilities;
  std::optional<std::string> bubble;

  // A representative holds office on [election tick, tenure_until).
  bool represented_at(Tick now) const {
    return representative.has_value() && now < representative->tenure_until;
  }
};

enum class BubbleSource { RootPersona, Representative, Son };

std::string_view to_string(BubbleSource source);

struct ControlBubble {
  std::string id;
  BubbleSource source = BubbleSource::RootPersona;
  std::string subject;  // root node, representative node or SON id
  Tick opened_at = 0;
  std::optional<Tick> closed_at;
};

// Mutable simulation state shared by the rule engines.
struct World {
  std::vector<org::Organization> orgs;
  std::vector<Circle> circles;
  std::vector<ControlBubble> bubbles;

  // One circle per node that has children.
  static World build(std::vector<org::Organization> orgs);

  org::Organization& org(std::string_view id);
  const org::Organization& org(std::string_view id) const;

  // Actor across all organizations; `owner` receives its organization.
  org::Actor* find_actor(std::string_view id, org::Organization** owner = nullptr);
  const org::Actor* find_actor(std::string_view id) const;

  Circle* find_circle(std::string_view org_id, std::string_view parent);
  const Circle* find_circle(std::string_view org_id, std::string_view parent) const;

  ControlBubble& open_bubble(BubbleSource source, std::string id, std::string subject, Tick now);
  void close_bubble(std::string_view id, Tick now);
  ControlBubble* find_bubble(std::string_view id);

  std::size_t actor_count() const;
  std::size_t committed_count() const;
};

std::string son_id_for(std::string_view condition_id);

enum class ScopeKind { Local, Strict, Sociocracy, Fso, Neighbor };

std::string_view to_string(ScopeKind kind);

struct SearchScope {
  org::OrgId org;
  ScopeKind kind = ScopeKind::Local;
  org::NodeId decided_at;
  std::vector<org::NodeId> nodes;           // regions searched, ascending id
  std::set<org::NodeId> hierarchy_nodes;    // part of `nodes` on the strict hierarchy path
  bool via_root = false;
  std::optional<std::size_t> link;          // set for neighbor scopes
};

struct Assignment {
  semantics::MatchResult match;
  org::OrgId org;
  org::NodeId decided_at;
  ScopeKind scope = ScopeKind::Local;
  std::optional<std::size_t> link;
  bool via_root = false;
};

struct RuleOptions {
  std::set<std::string> confined_roles;
};

// Mode-specific organizational rules behind one interface.
class RuleEngine {
 public:
  explicit RuleEngine(RuleOptions options) : options_(std::move(options)) {}
  virtual ~RuleEngine() = default;

  virtual Mode mode() const = 0;

  // Regions searched for `exception` at its current node, excluding those
  // already searched. The current node must be alive.
  virtual SearchScope escalation_scope(const World& world, const RoleException& exception,
                                       Tick now) const = 0;

  virtual bool forwards_to_neighbors() const { return false; }
  virtual bool holds_meetings() const { return false; }
  virtual bool son_opens_bubble() const { return false; }
  virtual bool resolves_contention() const { return false; }

  // Roles that may only be recruited along the strict hierarchy path.
  virtual const std::set<std::string>& confined_roles() const;

  const RuleOptions& options() const { return options_; }

 protected:
  RuleOptions options_;
};

std::unique_ptr<RuleEngine> make_rule_engine(Mode mode, RuleOptions options = {});

// The protocol treating `condition.kind`. On a miss emits
// ProtocolFailed(reason=unknown-kind) and returns nullptr.
const TreatmentProtocol* select_protocol(std::span<const TreatmentProtocol> library,
                                         const Condition& condition, EventSink& sink);

SearchScope local_scope(const World& world, const Condition& condition);

// Best `count` free matching actors within `scope`, without committing.
std::vector<Assignment> plan_fill(const World& world, const RuleEngine& rules, const SearchScope& scope,
                                  const Condition& condition, const semantics::RoleSpec& role, int count);

// Marks the planned actors committed, emitting RoleAssigned and the dispatch
// MessageSent events from the deciding node down to each actor.
void commit(World& world, const Condition& condition, const SearchScope& scope,
            std::span<const Assignment> assignments, EventSink& sink);

std::vector<Assignment> fill_role(World& world, const RuleEngine& rules, const SearchScope& scope,
                                  const Condition& condition, const semantics::RoleSpec& role, int count,
                                  EventSink& sink);

struct UnfilledRole {
  std::size_t role_index = 0;
  std::string role;
  int remaining = 0;
};

struct LocalOutcome {
  bool origin_dead = false;
  std::vector<Assignment> assignments;
  std::vector<UnfilledRole> unfilled;
};

LocalOutcome assign_locally(World& world, const RuleEngine& rules, const Condition& condition,
                            const TreatmentProtocol& protocol, EventSink& sink);

enum class EscalationStatus { Filled, Escalated, Exhausted, RouteDead };

struct EscalationOutcome {
  EscalationStatus status = EscalationStatus::Exhausted;
  std::vector<Assignment> assignments;
  RoleException next;  // searched set grown; current node moved up when Escalated
};

// One escalation step. Searches the mode's scope at the current node, then
// moves one layer up (ExceptionEscalated + MessageSent) if roles remain.
// RouteDead means the current node or its parent is down.
EscalationOutcome escalate_exception(World& world, const RuleEngine& rules, const RoleException& exception,
                                     const Condition& condition, const semantics::RoleSpec& role, Tick now,
                                     EventSink& sink);

// Neighbor organizations that could lend `exception.role`, in link order,
// each as a scope over the target's alive regions.
std::vector<SearchScope> neighbor_scopes(const World& world, const RoleException& exception);

std::vector<Assignment> plan_forward(const World& world, const RuleEngine& rules, const RoleException& exception,
                                     const Condition& condition, const semantics::RoleSpec& role);

struct ForwardOutcome {
  bool filled = false;
  std::vector<Assignment> assignments;
  int remaining = 0;
};

ForwardOutcome forward_to_neighbor(World& world, const RuleEngine& rules, const RoleException& exception,
                                   const Condition& condition, const semantics::RoleSpec& role,
                                   EventSink& sink);

// Frees every actor committed for `condition` and emits ProtocolFailed.
std::vector<org::ActorId> fail_condition(World& world, const Condition& condition,
                                         std::span<const Assignment> committed, std::string_view reason,
                                         EventSink& sink, Json detail = Json::object());

// Forms the SON for a fully staffed condition; past the deadline the
// condition fails instead and its commitments roll back.
std::optional<SocialOverlayNetwork> form_son(World& world, const RuleEngine& rules, const Condition& condition,
                                             const TreatmentProtocol& protocol,
                                             std::span<const Assignment> assignments, Tick now, EventSink& sink);

std::vector<org::ActorId> dissolve_son(World& world, const SocialOverlayNetwork& son, Tick now, EventSink& sink,
                                       bool truncated = false);

// Elects the member whose region offers the widest capability union (ties to
// the lowest id). Returns false, emitting nothing, for a circle with no alive
// members. Throws Error("off-schedule") unless now is a multiple of the period.
bool hold_meeting(World& world, Circle& circle, Tick now, Tick meeting_period, Tick tenure, EventSink& sink);

struct ContentionRequest {
  std::string condition;
  Tick fired_at = 0;
  std::string role;
};

// Earlier fired_at first, then lower condition id.
bool contention_precedes(const ContentionRequest& a, const ContentionRequest& b);

struct ContentionResult {
  std::size_t winner = 0;
  std::vector<std::size_t> losers;
};

// Picks the winner among requests for one actor and emits one
// ConflictRecorded per loser. Throws Error("bad-contention") for fewer than two.
ContentionResult resolve_contention(std::span<const ContentionRequest> requests, std::string_view actor,
                                    EventSink& sink);

bool check_confinement(const std::set<std::string>& confined_roles, const semantics::MatchResult& assignment);

}  // namespace orgsim::protocols
