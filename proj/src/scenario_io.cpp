#include "orgsim/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "orgsim/events.hpp"
#include "orgsim/hash.hpp"

namespace orgsim::scenario {

namespace {

using protocols::Condition;
using protocols::TreatmentProtocol;

std::string join(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    if (!out.empty()) out += "; ";
    out += d.to_string();
  }
  return out;
}

std::string at(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string at(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

// Field extraction that records every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<Diagnostic> diagnostics;

  void error(std::string location, std::string message) {
    diagnostics.push_back({std::move(location), std::move(message)});
  }

  bool object(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
      error(path.empty() ? "/" : path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        error(at(path, key), "unknown field");
      }
    }
    return true;
  }

  const Json* field(const Json& obj, std::string_view key, const std::string& path, bool required) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end() || (it->is_null() && !required)) {
      if (required) error(at(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string(const Json& obj, std::string_view key, const std::string& path,
                                    bool required = true) {
    const Json* v = field(obj, key, path, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string() || v->get_ref<const std::string&>().empty()) {
      error(at(path, key), "expected a non-empty string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::int64_t> integer(const Json& obj, std::string_view key, const std::string& path,
                                      bool required = true) {
    const Json* v = field(obj, key, path, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) {
      error(at(path, key), "expected an integer");
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<double> number(const Json& obj, std::string_view key, const std::string& path,
                               bool required = true) {
    const Json* v = field(obj, key, path, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) {
      error(at(path, key), "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  const Json* array(const Json& obj, std::string_view key, const std::string& path, bool required = true) {
    const Json* v = field(obj, key, path, required);
    if (v == nullptr) return nullptr;
    if (!v->is_array()) {
      error(at(path, key), "expected an array");
      return nullptr;
    }
    return v;
  }

  std::set<std::string> string_set(const Json& obj, std::string_view key, const std::string& path,
                                   bool required = true) {
    std::set<std::string> out;
    const Json* arr = array(obj, key, path, required);
    if (arr == nullptr) return out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto& v = (*arr)[i];
      if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
        error(at(at(path, key), i), "expected a non-empty string");
      } else if (!out.insert(v.get<std::string>()).second) {
        error(at(at(path, key), i), "duplicate entry '" + v.get<std::string>() + "'");
      }
    }
    return out;
  }
};

std::optional<systemic::SystemicClass> read_class(Reader& r, const Json& obj, std::string_view key,
                                                  const std::string& path) {
  const Json* v = r.field(obj, key, path, true);
  if (v == nullptr) return std::nullopt;
  if (v->is_number_integer()) {
    const auto level = v->get<std::int64_t>();
    if (level >= 1 && level <= 9) return systemic::SystemicClass(static_cast<int>(level));
  } else if (v->is_string()) {
    for (int level = 1; level <= 9; ++level) {
      const systemic::SystemicClass c(level);
      if (c.name() == v->get_ref<const std::string&>()) return c;
    }
  }
  r.error(at(path, key), "expected a systemic class 1..9 or its name");
  return std::nullopt;
}

org::Organization read_org(Reader& r, const Json& j, const std::string& path) {
  org::Organization o;
  if (!r.object(j, path, {"id", "root", "nodes", "actors", "neighbor_links"})) return o;
  o.id = r.string(j, "id", path).value_or("");
  o.root = r.string(j, "root", path).value_or("");

  if (const Json* nodes = r.array(j, "nodes", path)) {
    for (std::size_t i = 0; i < nodes->size(); ++i) {
      const auto& nj = (*nodes)[i];
      const auto np = at(at(path, "nodes"), i);
      if (!r.object(nj, np, {"id", "parent", "layer", "region"})) continue;
      org::OrgNode n;
      n.id = r.string(nj, "id", np).value_or("");
      n.parent = r.string(nj, "parent", np, false);
      const auto layer = r.integer(nj, "layer", np);
      if (layer && *layer < 0) r.error(at(np, "layer"), "layer must be >= 0");
      n.layer = static_cast<int>(layer.value_or(0));
      n.region = r.string_set(nj, "region", np, false);
      o.nodes.push_back(std::move(n));
    }
  }

  if (const Json* actors = r.array(j, "actors", path, false)) {
    for (std::size_t i = 0; i < actors->size(); ++i) {
      const auto& aj = (*actors)[i];
      const auto ap = at(at(path, "actors"), i);
      if (!r.object(aj, ap, {"id", "capabilities", "class"})) continue;
      org::Actor a;
      a.id = r.string(aj, "id", ap).value_or("");
      a.capabilities = r.string_set(aj, "capabilities", ap);
      if (auto c = read_class(r, aj, "class", ap)) a.systemic_class = *c;
      for (const auto& n : o.nodes) {
        if (n.region.contains(a.id)) {
          a.home_node = n.id;
          break;
        }
      }
      o.actors.push_back(std::move(a));
    }
  }

  if (const Json* links = r.array(j, "neighbor_links", path, false)) {
    for (std::size_t i = 0; i < links->size(); ++i) {
      const auto& lj = (*links)[i];
      const auto lp = at(at(path, "neighbor_links"), i);
      if (!r.object(lj, lp, {"to_org", "lendable_roles", "max_concurrent_loans"})) continue;
      org::NeighborLink l;
      l.from_org = o.id;
      l.to_org = r.string(lj, "to_org", lp).value_or("");
      l.cooperation_rule.lendable_roles = r.string_set(lj, "lendable_roles", lp);
      if (l.cooperation_rule.lendable_roles.empty()) r.error(at(lp, "lendable_roles"), "must not be empty");
      l.cooperation_rule.max_concurrent_loans = static_cast<int>(r.integer(lj, "max_concurrent_loans", lp).value_or(1));
      o.neighbor_links.push_back(std::move(l));
    }
  }
  return o;
}

TreatmentProtocol read_protocol(Reader& r, const Json& j, const std::string& path) {
  TreatmentProtocol p;
  if (!r.object(j, path, {"condition_kind", "roles", "son_duration"})) return p;
  p.condition_kind = r.string(j, "condition_kind", path).value_or("");
  p.son_duration = r.integer(j, "son_duration", path).value_or(1);
  if (p.son_duration < 1) r.error(at(path, "son_duration"), "must be >= 1");
  std::set<std::string> names;
  if (const Json* roles = r.array(j, "roles", path)) {
    if (roles->empty()) r.error(at(path, "roles"), "a protocol needs at least one role");
    for (std::size_t i = 0; i < roles->size(); ++i) {
      const auto& rj = (*roles)[i];
      const auto rp = at(at(path, "roles"), i);
      if (!r.object(rj, rp, {"name", "capabilities", "min_class", "count"})) continue;
      semantics::RoleSpec role;
      role.name = r.string(rj, "name", rp).value_or("");
      if (!role.name.empty() && !names.insert(role.name).second) r.error(at(rp, "name"), "duplicate-role '" + role.name + "'");
      role.required_capabilities = r.string_set(rj, "capabilities", rp);
      if (role.required_capabilities.empty()) r.error(at(rp, "capabilities"), "must not be empty");
      if (auto c = read_class(r, rj, "min_class", rp)) role.min_class = *c;
      role.count = static_cast<int>(r.integer(rj, "count", rp, false).value_or(1));
      if (role.count < 1) r.error(at(rp, "count"), "must be >= 1");
      p.roles.push_back(std::move(role));
    }
  }
  return p;
}

const org::Organization* find_org(const ScenarioSpec& spec, std::string_view id) {
  for (const auto& o : spec.organizations) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

// Resolves an optional "org" reference: may be omitted with one organization.
std::string resolve_org(Reader& r, const ScenarioSpec& spec, const Json& obj, const std::string& path) {
  if (auto org = r.string(obj, "org", path, false)) {
    if (find_org(spec, *org) == nullptr) r.error(at(path, "org"), "undefined organization '" + *org + "'");
    return *org;
  }
  if (spec.organizations.size() == 1) return spec.organizations.front().id;
  r.error(at(path, "org"), "required when the scenario has several organizations");
  return {};
}

void check_node_ref(Reader& r, const ScenarioSpec& spec, const std::string& org, const std::string& node,
                    const std::string& location) {
  const auto* o = find_org(spec, org);
  if (o != nullptr && !node.empty() && o->find_node(node) == nullptr) {
    r.error(location, "undefined node '" + node + "' in organization '" + org + "'");
  }
}

void validate(Reader& r, const ScenarioSpec& spec) {
  std::set<std::string> org_ids;
  std::map<std::string, std::string> actor_owner;
  for (std::size_t i = 0; i < spec.organizations.size(); ++i) {
    const auto& o = spec.organizations[i];
    const auto path = at(std::string("/organizations"), i);
    if (!o.id.empty() && !org_ids.insert(o.id).second) r.error(at(path, "id"), "duplicate organization '" + o.id + "'");
    for (const auto& v : org::validate_topology(o)) r.error(path, v.to_string());
    for (const auto& a : o.actors) {
      if (auto [it, fresh] = actor_owner.emplace(a.id, o.id); !fresh && it->second != o.id) {
        r.error(path, "actor-shared(" + a.id + ")");
      }
    }
    for (std::size_t l = 0; l < o.neighbor_links.size(); ++l) {
      const auto& to = o.neighbor_links[l].to_org;
      if (!to.empty() && find_org(spec, to) == nullptr) {
        r.error(at(at(at(path, "neighbor_links"), l), "to_org"), "undefined organization '" + to + "'");
      }
    }
  }

  std::set<std::string> kinds;
  for (std::size_t i = 0; i < spec.protocol_library.size(); ++i) {
    const auto& kind = spec.protocol_library[i].condition_kind;
    if (!kind.empty() && !kinds.insert(kind).second) {
      r.error(at(at(std::string("/protocols"), i), "condition_kind"), "duplicate-kind '" + kind + "'");
    }
  }

  for (std::size_t i = 0; i < spec.static_force_factors.size(); ++i) {
    if (!(spec.static_force_factors[i].magnitude >= 0.0)) {
      r.error(at(at(std::string("/force_factors"), i), "magnitude"), "must be >= 0");
    }
  }
  const auto& w = spec.qoe_weights;
  for (auto [name, value] : {std::pair{"mismatch", w.mismatch}, std::pair{"conflict", w.conflict},
                             std::pair{"failure", w.failure}, std::pair{"success", w.success}}) {
    if (!(value >= 0.0)) r.error(at(std::string("/qoe_weights"), name), "bad-weight: must be >= 0");
  }

  if (const auto* gen = std::get_if<ConditionGenerator>(&spec.condition_source)) {
    if (!(gen->rate >= 0.0 && gen->rate <= 1.0)) r.error("/generator/rate", "rate must lie in [0, 1]");
    if (gen->deadline_offset < 1) r.error("/generator/deadline_offset", "must be >= 1");
    if (gen->kinds.empty()) r.error("/generator/kinds", "must not be empty");
    double total = 0.0;
    for (const auto& k : gen->kinds) {
      if (!(k.probability >= 0.0)) r.error("/generator/kinds", "negative probability for '" + k.kind + "'");
      total += k.probability;
    }
    if (!gen->kinds.empty() && std::abs(total - 1.0) > 1e-9) r.error("/generator/kinds", "probabilities must sum to 1");
  }

  const auto& run = spec.run;
  if (run.horizon < 1) r.error("/run/horizon", "horizon must be >= 1");
  if (run.meeting_period < 1) r.error("/run/meeting_period", "must be >= 1");
  if (run.tenure < 1) r.error("/run/tenure", "must be >= 1");
}

Json class_json(systemic::SystemicClass c) { return c.level(); }

Json strings(const auto& items) {
  Json out = Json::array();
  for (const auto& s : items) out.push_back(s);
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<Diagnostic> diagnostics)
    : Error("invalid-scenario", join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ScenarioSpec parse_scenario(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ScenarioError(std::vector<Diagnostic>{{"document", e.what()}});
  }

  Reader r;
  ScenarioSpec spec;
  if (!r.object(doc, "", {"format", "name", "organizations", "protocols", "force_factors", "qoe_weights",
                          "conditions", "generator", "failures", "run"})) {
    throw ScenarioError(std::move(r.diagnostics));
  }
  if (auto format = r.string(doc, "format", "")) {
    if (*format != kFormat) r.error("/format", "unsupported format '" + *format + "'");
  }
  spec.name = r.string(doc, "name", "", false).value_or("");

  if (const Json* orgs = r.array(doc, "organizations", "")) {
    if (orgs->empty()) r.error("/organizations", "at least one organization is required");
    for (std::size_t i = 0; i < orgs->size(); ++i) {
      spec.organizations.push_back(read_org(r, (*orgs)[i], at(std::string("/organizations"), i)));
    }
  }

  if (const Json* protos = r.array(doc, "protocols", "", false)) {
    for (std::size_t i = 0; i < protos->size(); ++i) {
      spec.protocol_library.push_back(read_protocol(r, (*protos)[i], at(std::string("/protocols"), i)));
    }
  }

  if (const Json* factors = r.array(doc, "force_factors", "", false)) {
    for (std::size_t i = 0; i < factors->size(); ++i) {
      const auto& fj = (*factors)[i];
      const auto fp = at(std::string("/force_factors"), i);
      if (!r.object(fj, fp, {"name", "sign", "magnitude"})) continue;
      systemic::ForceFactor f;
      f.name = r.string(fj, "name", fp).value_or("");
      const auto sign = r.string(fj, "sign", fp).value_or("");
      if (sign == "centripetal") {
        f.sign = systemic::ForceSign::Centripetal;
      } else if (sign == "centrifugal") {
        f.sign = systemic::ForceSign::Centrifugal;
      } else if (!sign.empty()) {
        r.error(at(fp, "sign"), "expected 'centripetal' or 'centrifugal'");
      }
      f.magnitude = r.number(fj, "magnitude", fp).value_or(0.0);
      spec.static_force_factors.push_back(std::move(f));
    }
  }

  if (const Json* w = r.field(doc, "qoe_weights", "", false)) {
    if (r.object(*w, "/qoe_weights", {"mismatch", "conflict", "failure", "success"})) {
      spec.qoe_weights.mismatch = r.number(*w, "mismatch", "/qoe_weights", false).value_or(1.0);
      spec.qoe_weights.conflict = r.number(*w, "conflict", "/qoe_weights", false).value_or(1.0);
      spec.qoe_weights.failure = r.number(*w, "failure", "/qoe_weights", false).value_or(1.0);
      spec.qoe_weights.success = r.number(*w, "success", "/qoe_weights", false).value_or(1.0);
    }
  }

  const Json* conditions = r.array(doc, "conditions", "", false);
  const Json* generator = r.field(doc, "generator", "", false);
  if (conditions != nullptr && generator != nullptr) {
    r.error("/generator", "ambiguous condition source: give either 'conditions' or 'generator'");
  }
  if (conditions != nullptr) {
    std::vector<Condition> list;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < conditions->size(); ++i) {
      const auto& cj = (*conditions)[i];
      const auto cp = at(std::string("/conditions"), i);
      if (!r.object(cj, cp, {"id", "tick", "kind", "org", "origin", "deadline"})) continue;
      Condition c;
      c.id = r.string(cj, "id", cp).value_or("");
      if (!c.id.empty() && !ids.insert(c.id).second) r.error(at(cp, "id"), "duplicate condition '" + c.id + "'");
      c.fired_at = r.integer(cj, "tick", cp).value_or(0);
      if (c.fired_at < 0) r.error(at(cp, "tick"), "must be >= 0");
      c.kind = r.string(cj, "kind", cp).value_or("");
      c.org = resolve_org(r, spec, cj, cp);
      c.origin_node = r.string(cj, "origin", cp).value_or("");
      check_node_ref(r, spec, c.org, c.origin_node, at(cp, "origin"));
      c.deadline = r.integer(cj, "deadline", cp).value_or(c.fired_at + 1);
      if (c.deadline <= c.fired_at) r.error(at(cp, "deadline"), "deadline must be after the firing tick");
      list.push_back(std::move(c));
    }
    spec.condition_source = std::move(list);
  } else if (generator != nullptr) {
    ConditionGenerator gen;
    if (r.object(*generator, "/generator", {"rate", "kinds", "deadline_offset", "orgs", "until"})) {
      gen.rate = r.number(*generator, "rate", "/generator").value_or(0.0);
      gen.deadline_offset = r.integer(*generator, "deadline_offset", "/generator").value_or(1);
      for (const auto& o : r.string_set(*generator, "orgs", "/generator", false)) {
        if (find_org(spec, o) == nullptr) r.error("/generator/orgs", "undefined organization '" + o + "'");
        gen.orgs.push_back(o);
      }
      gen.until = r.integer(*generator, "until", "/generator", false);
      if (gen.until && *gen.until < 0) r.error("/generator/until", "must be >= 0");
      if (const Json* kinds = r.array(*generator, "kinds", "/generator")) {
        for (std::size_t i = 0; i < kinds->size(); ++i) {
          const auto& kj = (*kinds)[i];
          const auto kp = at(std::string("/generator/kinds"), i);
          if (!r.object(kj, kp, {"kind", "p"})) continue;
          gen.kinds.push_back({r.string(kj, "kind", kp).value_or(""), r.number(kj, "p", kp).value_or(0.0)});
        }
      }
    }
    spec.condition_source = std::move(gen);
  }

  if (const Json* failures = r.array(doc, "failures", "", false)) {
    for (std::size_t i = 0; i < failures->size(); ++i) {
      const auto& fj = (*failures)[i];
      const auto fp = at(std::string("/failures"), i);
      if (!r.object(fj, fp, {"org", "node", "at", "recover_at"})) continue;
      FailureSpec f;
      f.org = resolve_org(r, spec, fj, fp);
      f.node = r.string(fj, "node", fp).value_or("");
      check_node_ref(r, spec, f.org, f.node, at(fp, "node"));
      f.at = r.integer(fj, "at", fp).value_or(0);
      if (f.at < 0) r.error(at(fp, "at"), "must be >= 0");
      f.recover_at = r.integer(fj, "recover_at", fp, false);
      if (f.recover_at && *f.recover_at <= f.at) r.error(at(fp, "recover_at"), "must be after 'at'");
      spec.failures.push_back(std::move(f));
    }
  }

  if (const Json* run = r.field(doc, "run", "", false)) {
    if (r.object(*run, "/run", {"mode", "horizon", "seed", "meeting_period", "tenure", "confined_roles"})) {
      if (auto mode = r.string(*run, "mode", "/run", false)) {
        if (auto m = protocols::parse_mode(*mode)) {
          spec.run.mode = *m;
        } else {
          r.error("/run/mode", "unknown mode '" + *mode + "'");
        }
      }
      spec.run.horizon = r.integer(*run, "horizon", "/run", false).value_or(spec.run.horizon);
      if (const Json* seed = r.field(*run, "seed", "/run", false)) {
        if (seed->is_number_unsigned()) {
          spec.run.seed = seed->get<std::uint64_t>();
        } else {
          r.error("/run/seed", "expected a non-negative integer");
        }
      }
      spec.run.meeting_period = r.integer(*run, "meeting_period", "/run", false).value_or(1);
      spec.run.tenure = r.integer(*run, "tenure", "/run", false).value_or(1);
      spec.run.confined_roles = r.string_set(*run, "confined_roles", "/run", false);
    }
  }

  if (r.diagnostics.empty()) validate(r, spec);
  if (!r.diagnostics.empty()) throw ScenarioError(std::move(r.diagnostics));
  return spec;
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  Json doc;
  doc["format"] = kFormat;
  doc["name"] = spec.name;

  Json orgs = Json::array();
  for (const auto& o : spec.organizations) {
    Json oj;
    oj["id"] = o.id;
    oj["root"] = o.root;
    Json nodes = Json::array();
    for (const auto& n : o.nodes) {
      Json nj;
      nj["id"] = n.id;
      nj["parent"] = n.parent ? Json(*n.parent) : Json(nullptr);
      nj["layer"] = n.layer;
      nj["region"] = strings(n.region);
      nodes.push_back(std::move(nj));
    }
    oj["nodes"] = std::move(nodes);
    Json actors = Json::array();
    for (const auto& a : o.actors) {
      actors.push_back(Json{{"id", a.id}, {"capabilities", strings(a.capabilities)}, {"class", class_json(a.systemic_class)}});
    }
    oj["actors"] = std::move(actors);
    Json links = Json::array();
    for (const auto& l : o.neighbor_links) {
      links.push_back(Json{{"to_org", l.to_org},
                           {"lendable_roles", strings(l.cooperation_rule.lendable_roles)},
                           {"max_concurrent_loans", l.cooperation_rule.max_concurrent_loans}});
    }
    oj["neighbor_links"] = std::move(links);
    orgs.push_back(std::move(oj));
  }
  doc["organizations"] = std::move(orgs);

  Json protos = Json::array();
  for (const auto& p : spec.protocol_library) {
    Json roles = Json::array();
    for (const auto& role : p.roles) {
      roles.push_back(Json{{"name", role.name},
                           {"capabilities", strings(role.required_capabilities)},
                           {"min_class", class_json(role.min_class)},
                           {"count", role.count}});
    }
    protos.push_back(Json{{"condition_kind", p.condition_kind}, {"roles", std::move(roles)}, {"son_duration", p.son_duration}});
  }
  doc["protocols"] = std::move(protos);

  Json factors = Json::array();
  for (const auto& f : spec.static_force_factors) {
    factors.push_back(Json{{"name", f.name}, {"sign", systemic::to_string(f.sign)}, {"magnitude", f.magnitude}});
  }
  doc["force_factors"] = std::move(factors);
  doc["qoe_weights"] = Json{{"mismatch", spec.qoe_weights.mismatch},
                            {"conflict", spec.qoe_weights.conflict},
                            {"failure", spec.qoe_weights.failure},
                            {"success", spec.qoe_weights.success}};

  if (const auto* list = std::get_if<std::vector<Condition>>(&spec.condition_source)) {
    Json conds = Json::array();
    for (const auto& c : *list) {
      conds.push_back(Json{{"id", c.id}, {"tick", c.fired_at}, {"kind", c.kind}, {"org", c.org},
                           {"origin", c.origin_node}, {"deadline", c.deadline}});
    }
    doc["conditions"] = std::move(conds);
  } else {
    const auto& gen = std::get<ConditionGenerator>(spec.condition_source);
    Json kinds = Json::array();
    for (const auto& k : gen.kinds) kinds.push_back(Json{{"kind", k.kind}, {"p", k.probability}});
    doc["generator"] = Json{{"rate", gen.rate}, {"kinds", std::move(kinds)}, {"deadline_offset", gen.deadline_offset}};
    if (!gen.orgs.empty()) doc["generator"]["orgs"] = strings(gen.orgs);
    if (gen.until) doc["generator"]["until"] = *gen.until;
  }

  Json failures = Json::array();
  for (const auto& f : spec.failures) {
    Json fj{{"org", f.org}, {"node", f.node}, {"at", f.at}};
    if (f.recover_at) fj["recover_at"] = *f.recover_at;
    failures.push_back(std::move(fj));
  }
  doc["failures"] = std::move(failures);

  doc["run"] = Json{{"mode", protocols::to_string(spec.run.mode)},
                    {"horizon", spec.run.horizon},
                    {"seed", spec.run.seed},
                    {"meeting_period", spec.run.meeting_period},
                    {"tenure", spec.run.tenure},
                    {"confined_roles", strings(spec.run.confined_roles)}};
  return doc.dump(2) + "\n";
}

std::string scenario_digest(const ScenarioSpec& spec) { return hex64(fnv1a64(serialize_scenario(spec))); }

bool scheduled_alive(const ScenarioSpec& spec, std::string_view org, std::string_view node, Tick tick) {
  for (const auto& f : spec.failures) {
    if (f.org == org && f.node == node && f.at <= tick && (!f.recover_at || tick < *f.recover_at)) return false;
  }
  return true;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::vector<Condition> generate_conditions(const ScenarioSpec& spec, std::uint64_t seed, Tick horizon) {
  const auto* gen = std::get_if<ConditionGenerator>(&spec.condition_source);
  if (gen == nullptr) throw Error("no-generator", "scenario lists its conditions explicitly");
  if (!(gen->rate >= 0.0 && gen->rate <= 1.0)) throw Error("bad-rate", "rate must lie in [0, 1]");

  struct Site {
    std::string org;
    std::string node;
  };
  std::vector<Site> sites;
  for (const auto& o : spec.organizations) {
    if (!gen->orgs.empty() && std::find(gen->orgs.begin(), gen->orgs.end(), o.id) == gen->orgs.end()) continue;
    std::vector<std::string> ids;
    for (const auto& n : o.nodes) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end());
    for (auto& id : ids) sites.push_back({o.id, std::move(id)});
  }

  Rng rng(seed);
  std::vector<Condition> out;
  const Tick stop = gen->until ? std::min(horizon, *gen->until) : horizon;
  for (Tick t = 0; t < stop; ++t) {
    for (const auto& s : sites) {
      if (!scheduled_alive(spec, s.org, s.node, t)) continue;
      if (!rng.chance(gen->rate)) continue;
      const double u = rng.uniform01();
      std::string kind = gen->kinds.empty() ? std::string() : gen->kinds.back().kind;
      double cumulative = 0.0;
      for (const auto& k : gen->kinds) {
        cumulative += k.probability;
        if (u < cumulative) {
          kind = k.kind;
          break;
        }
      }
      char id[32];
      std::snprintf(id, sizeof id, "gen-%06zu", out.size());
      out.push_back({id, std::move(kind), s.org, s.node, t, t + gen->deadline_offset});
    }
  }
  return out;
}

std::vector<Condition> condition_stream(const ScenarioSpec& spec, std::uint64_t seed, Tick horizon) {
  if (std::holds_alternative<ConditionGenerator>(spec.condition_source)) {
    return generate_conditions(spec, seed, horizon);
  }
  auto list = std::get<std::vector<Condition>>(spec.condition_source);
  std::stable_sort(list.begin(), list.end(),
                   [](const Condition& a, const Condition& b) { return a.fired_at < b.fired_at; });
  return list;
}

ScenarioSpec random_scenario(const RandomScenarioParams& params, std::uint64_t seed) {
  Rng rng(seed);
  auto between = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); };

  std::vector<std::string> pool;
  for (int i = 0; i < params.capability_pool; ++i) pool.push_back("cap" + std::to_string(i));
  auto random_caps = [&](int min_size, int max_size) {
    std::set<std::string> caps;
    const int n = between(min_size, max_size);
    while (static_cast<int>(caps.size()) < n) caps.insert(pool[rng.below(pool.size())]);
    return caps;
  };

  ScenarioSpec spec;
  spec.name = "random-" + std::to_string(seed);
  char buf[32];
  for (int o = 0; o < params.organizations; ++o) {
    org::Organization org;
    org.id = "org" + std::to_string(o);
    const int node_count = between(params.min_nodes, params.max_nodes);
    for (int i = 0; i < node_count; ++i) {
      org::OrgNode n;
      std::snprintf(buf, sizeof buf, "o%dn%02d", o, i);
      n.id = buf;
      if (i > 0) {
        const auto& parent = org.nodes[rng.below(static_cast<std::uint64_t>(i))];
        n.parent = parent.id;
        n.layer = parent.layer + 1;
      }
      org.nodes.push_back(std::move(n));
    }
    org.root = org.nodes.front().id;

    const int actor_count = between(params.min_actors, params.max_actors);
    for (int i = 0; i < actor_count; ++i) {
      org::Actor a;
      std::snprintf(buf, sizeof buf, "o%da%02d", o, i);
      a.id = buf;
      a.capabilities = random_caps(1, std::min(3, params.capability_pool));
      a.systemic_class = systemic::SystemicClass(between(1, 9));
      auto& home = org.nodes[rng.below(org.nodes.size())];
      a.home_node = home.id;
      home.region.insert(a.id);
      org.actors.push_back(std::move(a));
    }
    spec.organizations.push_back(std::move(org));
  }
  // Each organization lends everything to the next one.
  if (params.organizations > 1) {
    for (int o = 0; o < params.organizations; ++o) {
      auto& org = spec.organizations[static_cast<std::size_t>(o)];
      org::NeighborLink l;
      l.from_org = org.id;
      l.to_org = spec.organizations[static_cast<std::size_t>((o + 1) % params.organizations)].id;
      l.cooperation_rule.lendable_roles = {std::string(org::kWildcardRole)};
      l.cooperation_rule.max_concurrent_loans = between(1, 3);
      org.neighbor_links.push_back(std::move(l));
    }
  }

  for (int p = 0; p < params.protocols; ++p) {
    TreatmentProtocol proto;
    proto.condition_kind = "kind" + std::to_string(p);
    proto.son_duration = between(1, static_cast<int>(params.max_son_duration));
    const int roles = between(1, params.max_roles);
    for (int r = 0; r < roles; ++r) {
      semantics::RoleSpec role;
      role.name = "role" + std::to_string(r);
      role.required_capabilities = random_caps(1, std::min(2, params.capability_pool));
      role.min_class = systemic::SystemicClass(between(1, 5));
      role.count = between(1, params.max_role_count);
      proto.roles.push_back(std::move(role));
    }
    spec.protocol_library.push_back(std::move(proto));
  }

  std::vector<Condition> conds;
  for (int c = 0; c < params.conditions; ++c) {
    Condition cond;
    std::snprintf(buf, sizeof buf, "c%03d", c);
    cond.id = buf;
    const auto& org = spec.organizations[rng.below(spec.organizations.size())];
    cond.org = org.id;
    cond.origin_node = org.nodes[rng.below(org.nodes.size())].id;
    cond.kind = "kind" + std::to_string(rng.below(static_cast<std::uint64_t>(params.protocols)));
    cond.fired_at = static_cast<Tick>(rng.below(static_cast<std::uint64_t>(std::max<Tick>(1, params.horizon / 2))));
    cond.deadline = cond.fired_at + between(1, static_cast<int>(params.max_deadline_offset));
    conds.push_back(std::move(cond));
  }
  spec.condition_source = std::move(conds);
  spec.run.mode = params.mode;
  spec.run.horizon = params.horizon;
  spec.run.meeting_period = between(1, 4);
  spec.run.tenure = between(1, 6);
  return spec;
}

}  // namespace orgsim::scenario
