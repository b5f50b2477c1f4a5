#include "shapq/dispatch.hpp"

#include "shapq/cq.hpp"
#include "shapq/engine_avgqnt.hpp"
#include "shapq/engine_boolean.hpp"
#include "shapq/engine_dup.hpp"
#include "shapq/engine_maxmin.hpp"
#include "shapq/errors.hpp"

namespace shapq {

namespace {

using Kind = AggregateFunction::Kind;

// A Boolean query has one potential answer of one known value, so the
// aggregate is a multiple of the membership game.
Rational boolean_scale(const AggregateFunction& alpha, const Integer& c) {
  switch (alpha.kind) {
    case Kind::Sum:
      return Rational(c);
    case Kind::Count:
    case Kind::CountDistinct:
      return 1;
    case Kind::Min:
    case Kind::Max:
    case Kind::Avg:
    case Kind::Quantile:
      return Rational(c);
    case Kind::Dup:
      return 0;
  }
  return 0;
}

Rational run_engine(const std::string& engine, const AggregateQuery& aq,
                    const Database& d, const Fact& f, ValueKind kind) {
  if (engine == "boolean") {
    const Rational scale = boolean_scale(aq.alpha, aq.tau.constant);
    if (scale == 0) return 0;
    return scale * boolean_shapley(aq.q, d, f, kind);
  }
  if (engine == "sumcount") return sumcount_shapley(aq, d, f, kind);
  if (engine == "cdist") return cdist_shapley(aq, d, f, kind);
  if (engine == "maxmin") return maxmin_shapley(aq, d, f, kind);
  if (engine == "avgqnt") return avgqnt_shapley(aq, d, f, kind);
  if (engine == "dup") return dup_shapley(aq, d, f, kind);
  fail(errc::variant_mismatch, "unknown engine " + engine);
}

// Shared routing; returns the engine tag, or "bruteforce", or fails.
std::string route(const AggregateQuery& aq, const DispatchOptions& opts) {
  if (opts.force_bruteforce) return "bruteforce";
  if (!self_join_free(aq.q)) {
    if (opts.allow_bruteforce) return "bruteforce";
    fail(errc::self_join,
         "query " + aq.q.name + " has a self-join and the fallback is off");
  }
  const std::string engine = engine_for(aq);
  if (!engine.empty()) return engine;
  if (opts.allow_bruteforce) return "bruteforce";
  const HierarchyClass req = required_class(aq.alpha);
  fail(errc::intractable_class,
       to_string(aq.alpha) + " needs a " + to_string(req) + " query: " +
           class_failure_witness(aq.q, req));
}

}  // namespace

std::string engine_for(const AggregateQuery& aq) {
  if (!at_least(classify(aq.q), required_class(aq.alpha))) return "";
  if (is_boolean(aq.q)) return "boolean";
  switch (aq.alpha.kind) {
    case Kind::Sum:
    case Kind::Count:
      return "sumcount";
    case Kind::CountDistinct:
      return "cdist";
    case Kind::Min:
    case Kind::Max:
      return "maxmin";
    case Kind::Avg:
    case Kind::Quantile:
      return "avgqnt";
    case Kind::Dup:
      return "dup";
  }
  return "";
}

DispatchResult dispatch_shapley(const AggregateQuery& aq, const Database& d,
                                const Fact& f, const DispatchOptions& opts) {
  validate_query(aq);
  validate_schema(aq.q, d);
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  const std::string engine = route(aq, opts);
  if (engine == "bruteforce") {
    return {bruteforce_shapley(aq, d, f, opts.kind, opts.cap), engine};
  }
  return {run_engine(engine, aq, d, f, opts.kind), engine};
}

std::map<Fact, DispatchResult> dispatch_shapley_all(
    const AggregateQuery& aq, const Database& d,
    const DispatchOptions& opts) {
  validate_query(aq);
  validate_schema(aq.q, d);
  const std::string engine = route(aq, opts);
  std::map<Fact, DispatchResult> out;
  if (engine == "bruteforce") {
    for (auto& [fact, value] :
         bruteforce_shapley_all(aq, d, opts.kind, opts.cap)) {
      out.emplace(fact, DispatchResult{value, engine});
    }
    return out;
  }
  for (const auto& fact : endogenous_facts(d)) {
    out.emplace(fact, DispatchResult{run_engine(engine, aq, d, fact, opts.kind),
                                     engine});
  }
  return out;
}

}  // namespace shapq
