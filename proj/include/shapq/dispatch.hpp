#ifndef SHAPQ_DISPATCH_HPP
#define SHAPQ_DISPATCH_HPP

#include <map>
#include <string>

#include "shapq/aggregates.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"
#include "shapq/shapley.hpp"

namespace shapq {

struct DispatchOptions {
  // Fall back to subset enumeration when no exact engine applies (query
  // below the aggregate's class, or a self-join). When false such inputs
  // are refused with IntractableClass / SelfJoin.
  bool allow_bruteforce = true;
  // Skip the engines entirely.
  bool force_bruteforce = false;
  // Endogenous-fact threshold for the fallback (0 = unlimited).
  std::size_t cap = kDefaultBruteforceCap;
  ValueKind kind = ValueKind::Shapley;
};

struct DispatchResult {
  Rational value;
  // Which path produced the value:
  // bruteforce | boolean | sumcount | cdist | maxmin | avgqnt | dup
  std::string engine;
};

// The engine a valid aggregate query routes to when its class suffices
// (ignores self-joins and the fallback); "" when it routes nowhere.
std::string engine_for(const AggregateQuery& aq);

// Routes an aggregate query to the cheapest engine that handles it exactly.
DispatchResult dispatch_shapley(const AggregateQuery& aq, const Database& d,
                                const Fact& f, const DispatchOptions& opts);

// Values of all endogenous facts (one evaluation table for the fallback,
// one engine sweep otherwise).
std::map<Fact, DispatchResult> dispatch_shapley_all(
    const AggregateQuery& aq, const Database& d, const DispatchOptions& opts);

}  // namespace shapq

#endif  // SHAPQ_DISPATCH_HPP
