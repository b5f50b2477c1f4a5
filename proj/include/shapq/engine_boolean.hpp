#ifndef SHAPQ_ENGINE_BOOLEAN_HPP
#define SHAPQ_ENGINE_BOOLEAN_HPP

#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"
#include "shapq/shapley.hpp"

namespace shapq {

// Per-size counting table over the n endogenous facts of a (sub)database:
//   p0[k] — k-subsets E with no answer of the subquery on E plus the
//           exogenous facts;
//   p1[k] — k-subsets with exactly one answer.
// p1 is only maintained where the recursion can track it (q-hierarchical
// splits on free roots, and Boolean subqueries by complement); p1_valid
// says whether it holds.
struct PTable {
  std::size_t n = 0;
  std::vector<Integer> p0;
  std::vector<Integer> p1;
  bool p1_valid = false;
};

// Builds the table for q over d. d is restricted to q's relations first;
// endogenous facts of other relations are padded back in as irrelevant
// players. SelfJoin for self-joins; NotAllHierarchical when the recursion
// gets stuck.
PTable p0_table(const ConjunctiveQuery& q, const Database& d);

// Same, but guarantees the p1 side. NotQHierarchical unless q is
// q-hierarchical or Boolean.
PTable p1_table(const ConjunctiveQuery& q, const Database& d);

// Value of a fact in the Boolean game "q has an answer". q must be Boolean.
Rational boolean_shapley(const ConjunctiveQuery& q, const Database& d,
                         const Fact& f, ValueKind kind);

// Value of f in the membership game of tuple t: "t is an answer of q".
// LengthMismatch when t does not have the full head arity.
Rational membership_shapley(const ConjunctiveQuery& q, const Database& d,
                            const Fact& f, const std::vector<Constant>& t,
                            ValueKind kind);

// Exact engine for Sum and Count: the weighted sum of the membership games
// over the answers on the full database. Needs the query hierarchical in
// its existential variables (NotExistsHierarchical).
Rational sumcount_shapley(const AggregateQuery& aq, const Database& d,
                          const Fact& f, ValueKind kind);

// Exact engine for CountDistinct: one Boolean game per realized answer
// value, each on the database filtered to the designated relation's facts
// carrying that value. Needs the query all-hierarchical
// (NotAllHierarchical).
Rational cdist_shapley(const AggregateQuery& aq, const Database& d,
                       const Fact& f, ValueKind kind);

// Closed form for a single-atom query with pairwise-distinct variable
// arguments over an all-endogenous database: with m facts sharing f's
// answer value, Shapley gives 1/m and Banzhaf 2^(1-m).
Rational cdist_single_relation_closed(const AggregateQuery& aq,
                                      const Database& d, const Fact& f,
                                      ValueKind kind);

}  // namespace shapq

#endif  // SHAPQ_ENGINE_BOOLEAN_HPP
