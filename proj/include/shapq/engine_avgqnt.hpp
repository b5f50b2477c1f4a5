#ifndef SHAPQ_ENGINE_AVGQNT_HPP
#define SHAPQ_ENGINE_AVGQNT_HPP

#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"
#include "shapq/shapley.hpp"

namespace shapq {

// Per-size counting table rich enough for the order statistics Avg and
// Quantile need. Subqueries carrying the designated relation count, for
// every candidate value a, how the answer-value bag splits around a
// (variant Values); other subqueries count how many answers they produce
// (variant Counts), or just whether their single potential answer exists
// once the head is fully pinned (variant Existence).
struct QuintupleTable {
  enum class Variant { Values, Counts, Existence };

  // Key of a Values cell: (subset size, below, equal, above).
  using ValueKey = std::tuple<std::size_t, Integer, Integer, Integer>;

  Variant variant = Variant::Values;
  std::size_t n = 0;

  // Values: candidates ascending, rows aligned with them.
  std::vector<Integer> values;
  std::vector<std::map<ValueKey, Integer>> rows;

  // Counts: (subset size, number of answers) -> count.
  std::map<std::pair<std::size_t, Integer>, Integer> counts;

  // Existence: per-size counts of subsets with no answer.
  std::vector<Integer> p0;
};

// Builds the table for q over d (exposed for tests). Preconditions as for
// the engine.
QuintupleTable quintuple_table(const ConjunctiveQuery& q, const Database& d,
                               const ValueFunction& tau);

// sum_k for Avg or Quantile.
std::vector<Rational> sumk_avgqnt(const AggregateQuery& aq, const Database& d);

// Exact engine for Avg and Quantile. Needs the query q-hierarchical
// (NotQHierarchical); SelfJoin, FactNotEndogenous as usual.
Rational avgqnt_shapley(const AggregateQuery& aq, const Database& d,
                        const Fact& f, ValueKind kind);

// Closed form for the Shapley value of Avg over a single-atom query with
// pairwise-distinct variable arguments and an all-endogenous database.
Rational avg_single_relation_closed(const AggregateQuery& aq,
                                    const Database& d, const Fact& f);

}  // namespace shapq

#endif  // SHAPQ_ENGINE_AVGQNT_HPP
