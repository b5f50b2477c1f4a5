#ifndef SHAPQ_GENERIC_DP_HPP
#define SHAPQ_GENERIC_DP_HPP

#include <optional>
#include <set>
#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/cq.hpp"
#include "shapq/errors.hpp"
#include "shapq/model.hpp"

namespace shapq {

// Outcome of grounding a variable-free subquery against a database: whether
// the single potential answer can be produced at all, and how many of the
// required facts are endogenous (they must all be picked for the answer to
// appear; the remaining endogenous facts are free).
struct GroundBase {
  bool possible = false;
  std::size_t required_endo = 0;
};

inline GroundBase ground_base(const ConjunctiveQuery& q, const Database& d) {
  std::set<Fact> required;
  for (const auto& atom : q.body) {
    Fact fact{atom.relation, {}};
    for (const auto& arg : atom.args) {
      fact.tuple.push_back(std::get<Constant>(arg));
    }
    required.insert(std::move(fact));
  }
  GroundBase out;
  out.possible = true;
  for (const auto& fact : required) {
    if (!d.contains(fact)) {
      out.possible = false;
      out.required_endo = 0;
      return out;
    }
    if (d.is_endogenous(fact)) ++out.required_endo;
  }
  return out;
}

// The split variable for the next recursion step: a variable occurring in
// every atom, preferring free ones (first in head-slot order), otherwise the
// lexicographically least root.
inline std::optional<Variable> pick_root(const ConjunctiveQuery& q) {
  const auto roots = root_variables(q);
  if (roots.empty()) return std::nullopt;
  for (const auto& slot : q.head_slots) {
    if (const auto* v = std::get_if<Variable>(&slot)) {
      if (roots.count(*v)) return *v;
    }
  }
  return *roots.begin();
}

// Shared recursion skeleton of the table-building engines. A plugin supplies
// the table type and the three node kinds:
//
//   base_case(q, tau, d)       — variable-free q;
//   combine_union(parts, leftover, free_root, q, tau, d)
//                              — q split on a root variable, one part per
//                                value (ascending), leftover = endogenous
//                                facts of d consistent with no value;
//   combine_cross(parts, leftover, q, tau, d)
//                              — q split into connected components;
//   tau_for_component(q, comp, tau)
//                              — value function handed to a component.
//
// Tables must always range over all endogenous facts of the database handed
// to the node, so the combine steps pad `leftover` irrelevant facts in.
// NotAllHierarchical when a connected subquery with variables has no root.
template <typename Plugin>
typename Plugin::Table run_dp(const Plugin& plugin, const ConjunctiveQuery& q,
                              const ValueFunction& tau, const Database& d) {
  if (variables(q).empty()) return plugin.base_case(q, tau, d);

  if (auto root = pick_root(q)) {
    const bool free_root = free_variables(q).count(*root) > 0;
    std::vector<typename Plugin::Table> parts;
    std::size_t used = 0;
    for (const auto& a : values_variable_can_take(q, d, *root)) {
      Database da = consistent_subset(d, q, *root, a);
      used += count_endogenous(da);
      ConjunctiveQuery qa = substitute(q, *root, a);
      ValueFunction ta = tau_on_substituted(tau, qa);
      parts.push_back(run_dp(plugin, qa, ta, da));
    }
    if (used > count_endogenous(d)) {
      fail(errc::precondition_violated, "value splits overlap");
    }
    const std::size_t leftover = count_endogenous(d) - used;
    return plugin.combine_union(std::move(parts), leftover, free_root, q, tau,
                                d);
  }

  auto comps = connected_components(q);
  if (comps.size() < 2) {
    fail(errc::not_all_hierarchical,
         "connected subquery without a root variable: " + to_string(q));
  }
  std::vector<typename Plugin::Table> parts;
  std::size_t used = 0;
  for (const auto& comp : comps) {
    Database dc = restrict_to_relations(d, body_relations(comp));
    used += count_endogenous(dc);
    ValueFunction tc = plugin.tau_for_component(q, comp, tau);
    parts.push_back(run_dp(plugin, comp, tc, dc));
  }
  if (used > count_endogenous(d)) {
    fail(errc::precondition_violated, "components overlap");
  }
  const std::size_t leftover = count_endogenous(d) - used;
  return plugin.combine_cross(std::move(parts), leftover, q, tau, d);
}

}  // namespace shapq

#endif  // SHAPQ_GENERIC_DP_HPP
