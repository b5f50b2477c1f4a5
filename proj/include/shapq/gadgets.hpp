#ifndef SHAPQ_GADGETS_HPP
#define SHAPQ_GADGETS_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/cq.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"

namespace shapq {

// Counting pipelines: databases engineered so that Shapley values of one
// designated fact encode the solution of a counting problem, plus the exact
// linear-system solves that read the counts back out. They double as the
// strongest end-to-end tests of the Shapley machinery, since the recovered
// counts can be checked against direct enumeration.

// --- #Set-Cover instances ----------------------------------------------

struct SetCoverInstance {
  std::size_t n = 0;                    // universe {1..n}
  std::vector<std::set<Integer>> sets;  // Y_1..Y_m (1-based in messages)

  std::size_t m() const { return sets.size(); }
};

// OutOfRange unless there is at least one set and every set is a nonempty
// subset of {1..n}.
void validate_instance(const SetCoverInstance& inst);

// Z[i][j] = number of j-subsets of the collection whose union has exactly
// i elements, by enumerating all 2^m subcollections. Row n sums to the
// number of set covers.
std::vector<std::vector<Integer>> cover_counts_direct(
    const SetCoverInstance& inst);

Integer count_set_covers_direct(const SetCoverInstance& inst);

// Shapley value of player i (1-based) in the set-cover game, where a
// coalition wins iff its sets cover the whole universe. Direct subset
// enumeration.
Rational setcover_game_shapley(const SetCoverInstance& inst, std::size_t i);

// --- pipeline plumbing ---------------------------------------------------

// A generated database together with the aggregate query it is meant for
// and its designated fact.
struct GadgetInput {
  AggregateQuery aq;
  Database d;
  Fact f;
};

// How the pipelines obtain Shapley(f, aq) on generated databases. The
// queries are intractable for the exact engines by design, so callers
// normally pass the exhaustive method here; sizes are kept within its
// reach.
using ShapleyFn = std::function<Rational(const AggregateQuery&,
                                         const Database&, const Fact&)>;

// --- average pipeline ----------------------------------------------------

// The padded database D_{q,r} for Avg over Q(x) :- R(x,y), S(y) with a
// ReLU value function. Selecting set j contributes the answers {-i : i in
// Y_j}; an always-present blocker column contributes q+1 more negative
// answers; the designated fact S(0) and r decoy facts all contribute the
// single positive answer 1. Averaging therefore rates S(0) by 1/(i+q+2)
// against coalitions covering i elements and containing no decoy.
// Requires q <= n and r <= m (OutOfRange).
GadgetInput build_avg_setcover_db(const SetCoverInstance& inst, std::size_t q,
                                  std::size_t r);

// Recovers the full matrix Z[i][j] (i in 0..n, j in 0..m) from Shapley
// values over the whole (q, r) grid by solving the Kronecker system
// L = M (x) N, where M holds the coalition-size weights and N the shifted
// Hilbert weights 1/(q+i+2). Entries are integers when shapley is exact.
std::vector<std::vector<Rational>> recover_cover_counts_avg(
    const SetCoverInstance& inst, const ShapleyFn& shapley);

// --- quantile gadget -----------------------------------------------------

// A database on which Qnt_{a/b} over GreaterThan(0) answers plays exactly
// the set-cover game: the quantile lands on a positive answer iff the
// selected sets cover the universe. Endogenous facts are S(1..m); the
// returned designated fact is S(1). Requires 0 < q < 1 (OutOfRange).
GadgetInput build_qnt_setcover_db(const SetCoverInstance& inst,
                                  const Rational& q);

// --- permanent pipeline --------------------------------------------------

using Matrix01 = std::vector<std::vector<int>>;

// The two value-function flavors of the has-duplicates gadget. Both play
// the same game over Q(x,y) :- R(x,y), S(y): ReLU keeps the bookkeeping
// rows at negative first components and maps them to zero; TauId instead
// moves them to zero directly and reads the component unchanged.
enum class DupGadget { ReLU, TauId };

// Number of 1-entries of the matrix = number of pairs in the derived
// exact-cover collection. OutOfRange unless m01 is square with 0/1 entries.
std::size_t pair_count(const Matrix01& m01);

// The database D_r: each 1-entry (i, j) becomes a pair {i, N+j} selectable
// via an endogenous fact; duplicates appear iff two selected pairs
// intersect, the designated fact S(0) is chosen, or one of r decoys is
// chosen. Requires r <= pair_count (OutOfRange).
GadgetInput build_dup_permanent_db(const Matrix01& m01, std::size_t r,
                                   DupGadget variant);

// Z[j] = number of pairwise-disjoint j-subsets of the pair collection
// (j in 0..m), recovered from Shapley values at every padding level r by
// solving the factorial-Hankel system.
std::vector<Rational> recover_matching_counts_dup(const Matrix01& m01,
                                                  DupGadget variant,
                                                  const ShapleyFn& shapley);

// Z[N] for an NxN matrix: the permanent.
Rational permanent_via_dup(const Matrix01& m01, DupGadget variant,
                           const ShapleyFn& shapley);

// Expansion over permutations (column-bitmask recursion); the check value
// for the pipeline. InstanceTooLarge beyond 16x16.
Integer permanent_direct(const Matrix01& m01);

// --- embedding into a general non-q-hierarchical query -------------------

// Output of embedding a Q(x) :- R(x,y), S(y) input database into an
// arbitrary self-join-free query that is all-hierarchical but not
// q-hierarchical. Endogenous facts map bijectively via fact_map and keep
// their Shapley values once the value function is re-anchored at
// head_position (see embed_vf).
struct EmbedResult {
  ConjunctiveQuery q0;
  Database d0;
  std::map<Fact, Fact> fact_map;  // endogenous facts of D -> of D0
  std::size_t head_position = 0;  // 1-based position of x0 in q0's head
  Constant filler;                // the constant filling all other slots
};

// Picks a head variable x0 dominated by an existential y0, mirrors R-facts
// into x0's atom and S-facts into a y0-only atom (provenance copied), and
// saturates every other atom with exogenous facts for each joining (a, b)
// pair so the embedded query has the same answers as the original on every
// coalition. PreconditionViolated when q0 is not of the required shape;
// SchemaMismatch when d is not an R/2, S/1 database.
EmbedResult embed_qxyy(const ConjunctiveQuery& q0, const Database& d);

// Re-anchors an arity-one positional value function at the embedded head
// position; constants pass through. PreconditionViolated if tau reads a
// position other than 1.
ValueFunction embed_vf(const ValueFunction& tau, std::size_t head_position);

// --- monotone transform --------------------------------------------------

// Applies gamma at exactly the argument positions where the i-th head
// variable of q occurs in its atoms; facts of other relations pass through
// unchanged. gamma is a finite value table: it must cover every value
// occurring at those positions (PreconditionViolated) and be injective on
// them (NonInjectiveOnDomain). Values at mapped positions must be integers
// (NonNumericConstant); i must name a variable head slot (OutOfRange).
Database monotone_push(const Database& d, const ConjunctiveQuery& q,
                       std::size_t i, const std::map<Integer, Integer>& gamma);

// The same transformation for a single fact.
Fact monotone_push_fact(const Fact& f, const ConjunctiveQuery& q,
                        std::size_t i, const std::map<Integer, Integer>& gamma);

}  // namespace shapq

#endif  // SHAPQ_GADGETS_HPP
