#ifndef SHAPQ_TESTS_ORACLE_HPP
#define SHAPQ_TESTS_ORACLE_HPP

// Reference implementations used only by the tests. Everything here is
// written directly from the definitions (permutations, explicit subset
// enumeration) and deliberately shares no code with the engines it checks.

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/corpus.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"
#include "shapq/shapley.hpp"

namespace shapq::oracle {

// A cooperative game: players are facts, nu maps coalitions to payoffs.
using Game = std::function<Rational(const std::set<Fact>&)>;

// nu(C) = A(exogenous facts plus C) - A(exogenous facts).
Game aggregate_game(const AggregateQuery& aq, const Database& d);

// The permutation form: average marginal contribution over all |players|!
// orders. Only usable for tiny player sets.
Rational permutation_shapley(const std::vector<Fact>& players, const Game& nu,
                             const Fact& f);

// The subset forms, straight from the definitions.
Rational subset_shapley(const std::vector<Fact>& players, const Game& nu,
                        const Fact& f);
Rational subset_banzhaf(const std::vector<Fact>& players, const Game& nu,
                        const Fact& f);

// Value of an endogenous fact in the aggregate-query game.
Rational value(const AggregateQuery& aq, const Database& d, const Fact& f,
               ValueKind kind);

// sum_k[k] = sum of A(exo plus E) over the k-subsets E of the endogenous
// facts.
std::vector<Rational> sumk(const AggregateQuery& aq, const Database& d);

// Calls visit(exo plus E, |E|) for every subset E of the endogenous facts.
void for_each_subset(
    const Database& d,
    const std::function<void(const Database&, std::size_t)>& visit);

// Per-size counts of subsets with no answer / exactly one answer.
std::vector<Integer> count_p0(const ConjunctiveQuery& q, const Database& d);
std::vector<Integer> count_p1(const ConjunctiveQuery& q, const Database& d);

// Per-size counts of subsets keyed by the maximum answer value (nullopt for
// "no answers").
std::map<std::pair<std::optional<Integer>, std::size_t>, Integer> count_max(
    const ConjunctiveQuery& q, const Database& d, const ValueFunction& tau);

// Per-size counts keyed by (candidate value a, |{answers < a}|,
// |{answers = a}|, |{answers > a}|) for every a in `candidates`.
struct LtEqGt {
  Integer lt, eq, gt;
  bool operator<(const LtEqGt& o) const {
    if (lt != o.lt) return lt < o.lt;
    if (eq != o.eq) return eq < o.eq;
    return gt < o.gt;
  }
  bool operator==(const LtEqGt& o) const {
    return lt == o.lt && eq == o.eq && gt == o.gt;
  }
};
std::map<std::tuple<Integer, std::size_t, LtEqGt>, Integer> count_quintuple(
    const ConjunctiveQuery& q, const Database& d, const ValueFunction& tau,
    const std::vector<Integer>& candidates);

// Per-size counts of subsets keyed by the number of answers.
std::map<std::pair<std::size_t, Integer>, Integer> count_answers(
    const ConjunctiveQuery& q, const Database& d);

// --- random corpus -----------------------------------------------------

// The generators live in the library (shapq/corpus.hpp) so the CLI can
// produce fixtures; the tests keep addressing them through this namespace.
using shapq::engine_families;
using shapq::Family;
using shapq::random_database;
using shapq::random_instance;
using shapq::RandomInstance;

}  // namespace shapq::oracle

#endif  // SHAPQ_TESTS_ORACLE_HPP
