#include "shapq/engine_dup.hpp"

#include <algorithm>
#include <optional>
#include <utility>

#include "shapq/cq.hpp"
#include "shapq/engine_boolean.hpp"
#include "shapq/errors.hpp"

namespace shapq {

namespace {

bool body_contains(const ConjunctiveQuery& q, const std::string& relation) {
  for (const auto& atom : q.body) {
    if (atom.relation == relation) return true;
  }
  return false;
}

// Matches a fact against the atom of its relation, returning the bindings
// it forces (nullopt when constants or repeated variables disagree).
std::optional<std::map<Variable, Constant>> match_fact(const Atom& atom,
                                                       const Fact& fact) {
  std::map<Variable, Constant> binding;
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (const auto* c = std::get_if<Constant>(&atom.args[i])) {
      if (!(*c == fact.tuple[i])) return std::nullopt;
      continue;
    }
    const auto& v = std::get<Variable>(atom.args[i]);
    const auto [it, inserted] = binding.emplace(v, fact.tuple[i]);
    if (!inserted && !(it->second == fact.tuple[i])) return std::nullopt;
  }
  return binding;
}

}  // namespace

AfactPartition afact_partition(const ConjunctiveQuery& q, const Database& d,
                               const ValueFunction& tau) {
  if (connected_components(q).size() != 1) {
    fail(errc::not_connected_sq,
         "answer-fact partition needs a connected query: " + to_string(q));
  }
  const Database core = restrict_to_relations(d, body_relations(q));
  AfactPartition out;
  out.residual.schema = core.schema;
  for (const auto& [fact, endo] : core.facts) {
    const Atom* atom = nullptr;
    for (const auto& a : q.body) {
      if (a.relation == fact.relation) {
        atom = &a;
        break;
      }
    }
    const auto binding = match_fact(*atom, fact);
    if (!binding || !exists_hom_with_fact(q, core, fact)) {
      out.residual.facts.emplace(fact, endo);
      continue;
    }
    // Every atom of a connected sq-hierarchical query carries all free
    // variables, so the binding pins the whole head.
    std::vector<Constant> head;
    head.reserve(q.head_slots.size());
    for (const auto& slot : q.head_slots) {
      if (const auto* c = std::get_if<Constant>(&slot)) {
        head.push_back(*c);
        continue;
      }
      const auto it = binding->find(std::get<Variable>(slot));
      if (it == binding->end()) {
        fail(errc::variant_mismatch,
             "free variable not fixed by its atom in " + to_string(q));
      }
      head.push_back(it->second);
    }
    auto& group = out.groups[eval_tuple(tau, head)];
    if (group.schema.empty()) group.schema = core.schema;
    group.facts.emplace(fact, endo);
  }
  return out;
}

std::vector<Integer> nodup_counts(const ConjunctiveQuery& q, const Database& d,
                                  const ValueFunction& tau) {
  const Database core = restrict_to_relations(d, body_relations(q));
  const std::size_t extra = count_endogenous(d) - count_endogenous(core);
  const AfactPartition parts = afact_partition(q, core, tau);

  // Values differ across groups, so no value repeats exactly when every
  // group contributes at most one answer; group subsets pair independently.
  std::vector<Integer> acc{Integer(1)};
  for (const auto& [value, group] : parts.groups) {
    const PTable t = p1_table(q, group);
    std::vector<Integer> at_most_one(t.n + 1);
    for (std::size_t k = 0; k <= t.n; ++k) {
      at_most_one[k] = t.p0[k] + t.p1[k];
    }
    acc = convolve(acc, at_most_one);
  }
  acc = pad_binomial(acc, count_endogenous(parts.residual) + extra);
  acc.resize(count_endogenous(d) + 1, Integer(0));
  return acc;
}

std::vector<Integer> dup_counts(const ConjunctiveQuery& q, const Database& d,
                                const ValueFunction& tau) {
  const Database core = restrict_to_relations(d, body_relations(q));
  const std::size_t extra = count_endogenous(d) - count_endogenous(core);
  const std::size_t n = count_endogenous(core);

  const auto comps = connected_components(q);
  std::vector<Integer> counts;
  if (comps.size() <= 1) {
    const auto nodup = nodup_counts(q, core, tau);
    counts.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      counts[k] = binomial(n, k) - nodup[k];
    }
  } else {
    // Answers are pairs of a value-carrying component answer and a rest
    // answer; a value repeats when the value side duplicates next to a
    // unique rest answer, or anything answers next to several rest answers.
    const std::string rho = q.body[designated_atom_index(q, tau)].relation;
    std::size_t value_comp = comps.size();
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (body_contains(comps[i], rho)) value_comp = i;
    }
    if (value_comp == comps.size()) {
      fail(errc::variant_mismatch, "no component carries the value function");
    }
    const ConjunctiveQuery& q1 = comps[value_comp];
    ConjunctiveQuery q2;
    q2.name = q.name;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (i == value_comp) continue;
      q2.head_slots.insert(q2.head_slots.end(), comps[i].head_slots.begin(),
                           comps[i].head_slots.end());
      q2.body.insert(q2.body.end(), comps[i].body.begin(),
                     comps[i].body.end());
    }
    const Database d1 = restrict_to_relations(core, body_relations(q1));
    const Database d2 = restrict_to_relations(core, body_relations(q2));
    const std::size_t n1 = count_endogenous(d1);
    const std::size_t n2 = count_endogenous(d2);
    const PTable t1 = p0_table(q1, d1);
    const PTable t2 = p1_table(q2, d2);
    const auto dup1 = dup_counts(q1, d1, tau_project(q, q1, tau));

    std::vector<Integer> some1(n1 + 1), many2(n2 + 1);
    for (std::size_t k = 0; k <= n1; ++k) {
      some1[k] = binomial(n1, k) - t1.p0[k];
    }
    for (std::size_t k = 0; k <= n2; ++k) {
      many2[k] = binomial(n2, k) - t2.p0[k] - t2.p1[k];
    }
    counts = convolve(some1, many2);
    const auto beside_unique = convolve(dup1, t2.p1);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      counts[k] += beside_unique[k];
    }
  }
  counts = pad_binomial(counts, extra);
  counts.resize(count_endogenous(d) + 1, Integer(0));
  return counts;
}

Rational dup_shapley(const AggregateQuery& aq, const Database& d,
                     const Fact& f, ValueKind kind) {
  if (aq.alpha.kind != AggregateFunction::Kind::Dup) {
    fail(errc::precondition_violated, "engine handles dup only");
  }
  if (!self_join_free(aq.q)) {
    fail(errc::self_join, "query " + aq.q.name + " has a self-join");
  }
  if (!is_boolean(aq.q) &&
      !at_least(classify(aq.q), HierarchyClass::SQHierarchical)) {
    fail(errc::not_sq_hierarchical,
         "dup engine needs an sq-hierarchical query: " +
             class_failure_witness(aq.q, HierarchyClass::SQHierarchical));
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  validate_schema(aq.q, d);
  if (is_boolean(aq.q)) return 0;  // a single potential answer never repeats

  const std::size_t n = count_endogenous(d);
  auto sumk = [&](const Database& db) {
    const auto counts = dup_counts(aq.q, db, aq.tau);
    std::vector<Rational> sums(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      sums[k] = Rational(counts[k]);
    }
    return sums;
  };
  return value_from_sumk(kind, n, sumk(make_fact_exogenous(d, f)),
                         sumk(remove_fact(d, f)));
}

}  // namespace shapq
