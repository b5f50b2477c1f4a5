#ifndef SHAPQ_SHAPLEY_HPP
#define SHAPQ_SHAPLEY_HPP

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"

namespace shapq {

// Which attribution value to compute. Both are linear combinations of the
// same per-size coalition sums, so every engine supports both.
enum class ValueKind { Shapley, Banzhaf };

const char* to_string(ValueKind kind);
ValueKind parse_value_kind(const std::string& text);

// Default refusal threshold for the exponential fallback, in endogenous
// facts. 0 disables the check.
constexpr std::size_t kDefaultBruteforceCap = 20;

// k! (n-k-1)! / n! — the weight of a coalition of size k among n players.
Rational shapley_coefficient(std::size_t k, std::size_t n);

// nu(C) = A(exogenous facts plus C) - A(exogenous facts only), for a
// coalition C of endogenous facts of d.
Rational coalition_value(const AggregateQuery& aq, const Database& d,
                         const std::set<Fact>& coalition);

// sum_k[k] = sum over the k-subsets E of the endogenous facts of
// A(exogenous facts plus E), for k = 0..n. Enumerates all 2^n subsets.
std::vector<Rational> sumk_bruteforce(const AggregateQuery& aq,
                                      const Database& d);

// Combines the per-size sums of the two modified databases (f made
// exogenous / f removed) into the requested value. n_original is the
// endogenous count of the unmodified database.
Rational value_from_sumk(ValueKind kind, std::size_t n_original,
                         const std::vector<Rational>& sum_with,
                         const std::vector<Rational>& sum_without);

using SumkFn = std::function<std::vector<Rational>(const AggregateQuery&,
                                                   const Database&)>;

// The sum_k reduction: evaluates `sumk` on d with f exogenous and on d with
// f removed, then combines. Every exact engine and the brute force are this
// function with a different `sumk`.
Rational shapley_via_sumk(const AggregateQuery& aq, const Database& d,
                          const Fact& f, ValueKind kind, const SumkFn& sumk);

// Exponential fallback, valid for every aggregate query (self-joins
// included). InstanceTooLarge when the endogenous count exceeds `cap`.
Rational bruteforce_shapley(const AggregateQuery& aq, const Database& d,
                            const Fact& f, ValueKind kind,
                            std::size_t cap = kDefaultBruteforceCap);

// All endogenous facts in one sweep over a single table of 2^n coalition
// evaluations.
std::map<Fact, Rational> bruteforce_shapley_all(
    const AggregateQuery& aq, const Database& d, ValueKind kind,
    std::size_t cap = kDefaultBruteforceCap);

// --- game-theoretic sanity checks --------------------------------------

struct AxiomReport {
  bool efficiency_checked = false;  // skipped for Banzhaf
  bool efficiency_ok = true;
  Rational total = 0;           // sum of the reported values
  Rational expected_total = 0;  // A(D) - A(exogenous part)
  std::vector<Fact> null_player_failures;
  std::vector<std::pair<Fact, Fact>> symmetry_failures;
  std::size_t symmetric_pairs_checked = 0;

  bool all_pass() const {
    return efficiency_ok && null_player_failures.empty() &&
           symmetry_failures.empty();
  }
};

// Checks efficiency (Shapley only), the null-player axiom (facts used by no
// homomorphism must get 0), and symmetry (endogenous facts of the same
// relation exchanged by a constant involution that fixes the database, the
// query constants, and the answer values must get equal values). `values`
// must cover exactly the endogenous facts of d.
AxiomReport check_axioms(const AggregateQuery& aq, const Database& d,
                         const std::map<Fact, Rational>& values,
                         ValueKind kind);

}  // namespace shapq

#endif  // SHAPQ_SHAPLEY_HPP
