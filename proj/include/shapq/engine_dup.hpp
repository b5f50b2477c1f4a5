#ifndef SHAPQ_ENGINE_DUP_HPP
#define SHAPQ_ENGINE_DUP_HPP

#include <map>
#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"
#include "shapq/shapley.hpp"

namespace shapq {

// For a connected sq-hierarchical query every atom carries all free
// variables, so a fact determines the one answer it could ever witness.
// Facts sort into groups by that answer's value; facts that match no atom
// or have no completing homomorphism over the full database are residual.
struct AfactPartition {
  std::map<Integer, Database> groups;
  Database residual;
};

// NotConnectedSQ when q has several components.
AfactPartition afact_partition(const ConjunctiveQuery& q, const Database& d,
                               const ValueFunction& tau);

// Per-size counts of endogenous subsets on which no answer value repeats /
// some value repeats. Connected queries split by value group; disconnected
// ones reduce to the component carrying the value function against the
// rest. Exposed for tests.
std::vector<Integer> nodup_counts(const ConjunctiveQuery& q, const Database& d,
                                  const ValueFunction& tau);
std::vector<Integer> dup_counts(const ConjunctiveQuery& q, const Database& d,
                                const ValueFunction& tau);

// Exact engine for Dup. Needs the query sq-hierarchical
// (NotSQHierarchical); SelfJoin, FactNotEndogenous as usual. Boolean
// queries never duplicate, so every value is zero.
Rational dup_shapley(const AggregateQuery& aq, const Database& d,
                     const Fact& f, ValueKind kind);

}  // namespace shapq

#endif  // SHAPQ_ENGINE_DUP_HPP
