#ifndef SHAPQ_ENGINE_MAXMIN_HPP
#define SHAPQ_ENGINE_MAXMIN_HPP

#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"
#include "shapq/shapley.hpp"

namespace shapq {

// Per-size counting table for "the maximum answer value". Subqueries whose
// body contains the designated relation (the one the value function is
// anchored to) carry one row per candidate value plus a no-answer row
// (variant A); subqueries without it only gate existence and carry nonempty
// counts (variant B).
struct MaxTable {
  bool variant_a = true;
  std::size_t n = 0;

  // Variant A: candidate values ascending; rows[0] counts k-subsets with no
  // answer, rows[i] those whose maximum value is values[i-1].
  std::vector<Integer> values;
  std::vector<std::vector<Integer>> rows;

  // Variant B: ne[k] counts k-subsets with at least one answer.
  std::vector<Integer> ne;
};

// Builds the table for q over d (exposed for tests). The candidate set is
// read off the designated relation's facts in d. Preconditions as for the
// engine: self-join-free, all-hierarchical reachable splits. Tests may
// override the designated relation; a name not in the body yields the
// existence-only variant.
MaxTable max_table(const ConjunctiveQuery& q, const Database& d,
                   const ValueFunction& tau,
                   const std::string& designated_override = "");

// sum_k for Max or Min (Min runs the same recursion on negated values).
std::vector<Rational> sumk_maxmin(const AggregateQuery& aq, const Database& d);

// Exact engine for Min and Max. Needs the query all-hierarchical
// (NotAllHierarchical); SelfJoin, FactNotEndogenous as usual.
Rational maxmin_shapley(const AggregateQuery& aq, const Database& d,
                        const Fact& f, ValueKind kind);

// Closed form for Max over a single-atom query with pairwise-distinct
// variable arguments and an all-endogenous database.
Rational max_single_relation_closed(const AggregateQuery& aq,
                                    const Database& d, const Fact& f,
                                    ValueKind kind);

}  // namespace shapq

#endif  // SHAPQ_ENGINE_MAXMIN_HPP
