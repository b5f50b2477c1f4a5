#include "shapq/engine_boolean.hpp"

#include <algorithm>

#include "shapq/errors.hpp"
#include "shapq/generic_dp.hpp"

namespace shapq {

namespace {

std::vector<Integer> add_vectors(const std::vector<Integer>& a,
                                 const std::vector<Integer>& b) {
  std::vector<Integer> out(std::max(a.size(), b.size()), Integer(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

void resize_to(PTable& t) {
  t.p0.resize(t.n + 1, Integer(0));
  t.p1.resize(t.n + 1, Integer(0));
}

void invalidate_p1(PTable& t) {
  t.p1.assign(t.n + 1, Integer(0));
  t.p1_valid = false;
}

// For Boolean subqueries there is at most one answer, so "exactly one" is
// the complement of "none".
void complement_p1(PTable& t) {
  t.p1.resize(t.n + 1);
  for (std::size_t k = 0; k <= t.n; ++k) {
    t.p1[k] = binomial(t.n, k) - t.p0[k];
  }
  t.p1_valid = true;
}

struct PPlugin {
  using Table = PTable;

  Table base_case(const ConjunctiveQuery& q, const ValueFunction&,
                  const Database& d) const {
    const std::size_t n = count_endogenous(d);
    PTable t;
    t.n = n;

    // The atoms are fully ground; the (single potential) answer is present
    // exactly when every required endogenous fact is chosen.
    const GroundBase base = ground_base(q, d);
    t.p0 = binomial_row(n);
    t.p1.assign(n + 1, Integer(0));
    t.p1_valid = true;
    if (!base.possible) return t;
    const std::size_t e = n - base.required_endo;
    for (std::size_t k = base.required_endo; k <= n; ++k) {
      const Integer present = binomial(e, k - base.required_endo);
      t.p0[k] -= present;
      t.p1[k] = present;
    }
    return t;
  }

  Table combine_union(std::vector<Table> parts, std::size_t leftover,
                      bool free_root, const ConjunctiveQuery& q,
                      const ValueFunction&, const Database&) const {
    // Empty union: the subquery holds on no subset.
    PTable acc;
    acc.n = 0;
    acc.p0 = {Integer(1)};
    acc.p1 = {Integer(0)};
    acc.p1_valid = true;
    bool p1_ok = free_root;
    for (auto& part : parts) {
      p1_ok = p1_ok && part.p1_valid;
      std::vector<Integer> new_p1;
      if (p1_ok) {
        // Exactly one answer overall: one answer on one side, none on the
        // other (a free root makes the children's answer sets disjoint).
        new_p1 = add_vectors(convolve(acc.p1, part.p0),
                             convolve(acc.p0, part.p1));
      }
      acc.p0 = convolve(acc.p0, part.p0);
      acc.n += part.n;
      if (p1_ok) {
        acc.p1 = std::move(new_p1);
      }
    }
    acc.n += leftover;
    acc.p0 = pad_binomial(acc.p0, leftover);
    if (p1_ok) {
      acc.p1 = pad_binomial(acc.p1, leftover);
      acc.p1_valid = true;
      resize_to(acc);
    } else {
      invalidate_p1(acc);
    }
    acc.p0.resize(acc.n + 1, Integer(0));
    if (is_boolean(q)) complement_p1(acc);
    return acc;
  }

  Table combine_cross(std::vector<Table> parts, std::size_t leftover,
                      const ConjunctiveQuery& q, const ValueFunction&,
                      const Database&) const {
    // Empty cross: one (empty) answer on every subset.
    PTable acc;
    acc.n = 0;
    acc.p0 = {Integer(0)};
    acc.p1 = {Integer(1)};
    acc.p1_valid = true;
    for (auto& part : parts) {
      // No answer iff either side has none.
      std::vector<Integer> p0 = add_vectors(
          convolve(acc.p0, binomial_row(part.n)),
          convolve(binomial_row(acc.n), part.p0));
      const std::vector<Integer> both = convolve(acc.p0, part.p0);
      for (std::size_t k = 0; k < both.size(); ++k) p0[k] -= both[k];
      // Exactly one answer iff exactly one on each side.
      acc.p1_valid = acc.p1_valid && part.p1_valid;
      acc.p1 = acc.p1_valid ? convolve(acc.p1, part.p1)
                            : std::vector<Integer>{};
      acc.p0 = std::move(p0);
      acc.n += part.n;
    }
    acc.n += leftover;
    acc.p0 = pad_binomial(acc.p0, leftover);
    acc.p0.resize(acc.n + 1, Integer(0));
    if (acc.p1_valid) {
      acc.p1 = pad_binomial(acc.p1, leftover);
      resize_to(acc);
    } else {
      invalidate_p1(acc);
    }
    if (is_boolean(q)) complement_p1(acc);
    return acc;
  }

  ValueFunction tau_for_component(const ConjunctiveQuery&,
                                  const ConjunctiveQuery&,
                                  const ValueFunction& tau) const {
    return tau;
  }
};

PTable build_p_table(const ConjunctiveQuery& q, const Database& d) {
  if (!self_join_free(q)) {
    fail(errc::self_join, "query " + q.name + " has a self-join");
  }
  validate_schema(q, d);
  Database core = restrict_to_relations(d, body_relations(q));
  const std::size_t extra = count_endogenous(d) - count_endogenous(core);
  PTable t = run_dp(PPlugin{}, q, constant_vf(0), core);
  t.n += extra;
  t.p0 = pad_binomial(t.p0, extra);
  t.p0.resize(t.n + 1, Integer(0));
  if (t.p1_valid) {
    t.p1 = pad_binomial(t.p1, extra);
    t.p1.resize(t.n + 1, Integer(0));
  } else {
    invalidate_p1(t);
  }
  return t;
}

}  // namespace

PTable p0_table(const ConjunctiveQuery& q, const Database& d) {
  return build_p_table(q, d);
}

PTable p1_table(const ConjunctiveQuery& q, const Database& d) {
  if (!is_boolean(q) &&
      !at_least(classify(q), HierarchyClass::QHierarchical)) {
    fail(errc::not_q_hierarchical,
         "p1 table needs a q-hierarchical or Boolean query");
  }
  PTable t = build_p_table(q, d);
  if (!t.p1_valid) {
    fail(errc::variant_mismatch, "p1 side unexpectedly invalid");
  }
  return t;
}

Rational boolean_shapley(const ConjunctiveQuery& q, const Database& d,
                         const Fact& f, ValueKind kind) {
  if (!is_boolean(q)) {
    fail(errc::precondition_violated,
         "boolean game needs a Boolean query, got " + to_string(q));
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  const std::size_t n = count_endogenous(d);
  auto sumk = [&](const Database& db) {
    PTable t = build_p_table(q, db);
    std::vector<Rational> sums(t.n + 1);
    for (std::size_t k = 0; k <= t.n; ++k) {
      sums[k] = Rational(binomial(t.n, k) - t.p0[k]);
    }
    return sums;
  };
  return value_from_sumk(kind, n, sumk(make_fact_exogenous(d, f)),
                         sumk(remove_fact(d, f)));
}

Rational membership_shapley(const ConjunctiveQuery& q, const Database& d,
                            const Fact& f, const std::vector<Constant>& t,
                            ValueKind kind) {
  if (t.size() != q.head_slots.size()) {
    fail(errc::length_mismatch,
         "tuple arity " + std::to_string(t.size()) + " differs from head arity " +
             std::to_string(q.head_slots.size()));
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  ConjunctiveQuery grounded = q;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Term& slot = grounded.head_slots[i];
    if (const auto* v = std::get_if<Variable>(&slot)) {
      grounded = substitute(grounded, *v, t[i]);
    } else if (!(std::get<Constant>(slot) == t[i])) {
      return 0;  // t can never be an answer
    }
  }
  return boolean_shapley(grounded, d, f, kind);
}

Rational sumcount_shapley(const AggregateQuery& aq, const Database& d,
                          const Fact& f, ValueKind kind) {
  const bool is_sum = aq.alpha.kind == AggregateFunction::Kind::Sum;
  if (!is_sum && aq.alpha.kind != AggregateFunction::Kind::Count) {
    fail(errc::precondition_violated, "engine handles sum and count only");
  }
  if (!self_join_free(aq.q)) {
    fail(errc::self_join, "query " + aq.q.name + " has a self-join");
  }
  if (!at_least(classify(aq.q), HierarchyClass::ExistsHierarchical)) {
    fail(errc::not_exists_hierarchical,
         "sum/count engine needs an exists-hierarchical query: " +
             class_failure_witness(aq.q, HierarchyClass::ExistsHierarchical));
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  // A(E) is the weighted count of answers, so the value decomposes over the
  // membership games of the answers possible on the full database.
  Rational total = 0;
  for (const auto& t : answers(aq.q, d)) {
    const Rational w = is_sum ? Rational(eval_tuple(aq.tau, t)) : Rational(1);
    if (w == 0) continue;
    total += w * membership_shapley(aq.q, d, f, t, kind);
  }
  return total;
}

Rational cdist_shapley(const AggregateQuery& aq, const Database& d,
                       const Fact& f, ValueKind kind) {
  if (aq.alpha.kind != AggregateFunction::Kind::CountDistinct) {
    fail(errc::precondition_violated, "engine handles cdist only");
  }
  if (!self_join_free(aq.q)) {
    fail(errc::self_join, "query " + aq.q.name + " has a self-join");
  }
  if (!at_least(classify(aq.q), HierarchyClass::AllHierarchical)) {
    fail(errc::not_all_hierarchical,
         "cdist engine needs an all-hierarchical query: " +
             class_failure_witness(aq.q, HierarchyClass::AllHierarchical));
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  validate_schema(aq.q, d);

  // CountDistinct only asks whether each value is realized, not by which
  // tuple; once the database is filtered to one value group the head can be
  // dropped and the game is Boolean.
  ConjunctiveQuery existence = aq.q;
  existence.head_slots.clear();

  if (is_constant_vf(aq.tau)) {
    // Every answer has the same value: the aggregate is the Boolean game.
    return boolean_shapley(existence, d, f, kind);
  }

  const Atom& atom = aq.q.body[designated_atom_index(aq.q, aq.tau)];
  const std::size_t column = designated_column(aq.q, aq.tau);

  // One Boolean game per realized answer value, over the database keeping
  // only the designated-relation facts carrying that value. Facts filtered
  // out are null players of that game, so skipping groups without f loses
  // nothing.
  Rational total = 0;
  for (const auto& [a, mult] : value_bag(aq.q, d, aq.tau)) {
    Database da;
    da.schema = d.schema;
    for (const auto& [fact, endo] : d.facts) {
      if (fact.relation == atom.relation &&
          eval_scalar(aq.tau, fact.tuple[column]) != a) {
        continue;
      }
      da.facts.emplace(fact, endo);
    }
    if (!da.is_endogenous(f)) continue;
    total += boolean_shapley(existence, da, f, kind);
  }
  return total;
}

Rational cdist_single_relation_closed(const AggregateQuery& aq,
                                      const Database& d, const Fact& f,
                                      ValueKind kind) {
  if (aq.q.body.size() != 1) {
    fail(errc::precondition_violated, "closed form needs a single atom");
  }
  const Atom& atom = aq.q.body[0];
  std::set<Variable> seen;
  for (const auto& arg : atom.args) {
    const auto* v = std::get_if<Variable>(&arg);
    if (!v || !seen.insert(*v).second) {
      fail(errc::precondition_violated,
           "closed form needs pairwise-distinct variable arguments");
    }
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  std::size_t column = 0;  // which tuple position the value function reads
  if (!is_constant_vf(aq.tau)) {
    const auto& var = std::get<Variable>(aq.q.head_slots[aq.tau.position - 1]);
    while (column < atom.args.size() &&
           !(std::get<Variable>(atom.args[column]) == var)) {
      ++column;
    }
  }
  Integer same = 0;
  const Integer value = is_constant_vf(aq.tau)
                            ? aq.tau.constant
                            : eval_scalar(aq.tau, f.tuple[column]);
  for (const auto& [fact, endo] : d.facts) {
    if (!endo) {
      fail(errc::precondition_violated, "closed form needs all facts endogenous");
    }
    const Integer v = is_constant_vf(aq.tau)
                          ? aq.tau.constant
                          : eval_scalar(aq.tau, fact.tuple[column]);
    if (v == value) ++same;
  }
  // f shares its value group with `same` facts (itself included); the game
  // "some group member present" gives 1/m under Shapley and 2^(1-m) under
  // Banzhaf.
  if (kind == ValueKind::Shapley) return Rational(1, same);
  return Rational(1, Integer(1) << static_cast<std::size_t>(same - 1));
}

}  // namespace shapq
