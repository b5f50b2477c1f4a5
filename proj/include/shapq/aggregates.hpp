#ifndef SHAPQ_AGGREGATES_HPP
#define SHAPQ_AGGREGATES_HPP

#include <map>
#include <string>
#include <vector>

#include "shapq/cq.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"

namespace shapq {

// --- value functions ---------------------------------------------------

// A value function turns an answer tuple into a number. Positional kinds
// read one head position (1-based, over the full head arity); the constant
// kind ignores the tuple.
struct ValueFunction {
  enum class Kind { Identity, GreaterThan, ReLU, Constant };

  Kind kind = Kind::Identity;
  std::size_t position = 0;  // positional kinds: 1-based head position
  Integer bound = 0;         // GreaterThan: threshold
  Integer constant = 0;      // Constant: payload

  bool operator==(const ValueFunction& other) const {
    return kind == other.kind && position == other.position &&
           bound == other.bound && constant == other.constant;
  }
};

ValueFunction identity_vf(std::size_t position);
ValueFunction greater_than_vf(const Integer& bound, std::size_t position);
ValueFunction relu_vf(std::size_t position);
ValueFunction constant_vf(const Integer& c);

inline bool is_constant_vf(const ValueFunction& vf) {
  return vf.kind == ValueFunction::Kind::Constant;
}

// Applies the value function to a single constant (the content of the head
// position it reads). NonNumericConstant when a positional kind meets a
// symbol.
Integer eval_scalar(const ValueFunction& vf, const Constant& c);

// Applies the value function to a full-arity answer tuple.
Integer eval_tuple(const ValueFunction& vf, const std::vector<Constant>& t);

// Grammar: id:<i> | gt:<b>:<i> | relu:<i> | const:<c>
ValueFunction parse_tau(const std::string& text);
std::string to_string(const ValueFunction& vf);

// --- aggregate functions -----------------------------------------------

struct AggregateFunction {
  enum class Kind { Sum, Count, CountDistinct, Min, Max, Avg, Quantile, Dup };

  Kind kind = Kind::Sum;
  Rational quantile = Rational(1, 2);  // Quantile only, in (0, 1)

  bool operator==(const AggregateFunction& other) const {
    return kind == other.kind &&
           (kind != Kind::Quantile || quantile == other.quantile);
  }
};

// Grammar: sum | count | cdist | min | max | avg | median | qnt:<p>/<q> | dup
// (median is normalized to qnt:1/2 on parse).
AggregateFunction parse_agg(const std::string& text);
std::string to_string(const AggregateFunction& alpha);

// A bag of values: value -> multiplicity (>= 1).
using ValueBag = std::map<Integer, Integer>;

// Applies the aggregate to a bag. The empty bag yields 0 for every kind.
// Quantile at fraction p over a bag of size s averages the ceil(p*s)-th and
// floor(p*s+1)-th smallest elements counted with multiplicity.
Rational aggregate(const AggregateFunction& alpha, const ValueBag& bag);

// --- aggregate queries -------------------------------------------------

struct AggregateQuery {
  ConjunctiveQuery q;
  AggregateFunction alpha;
  ValueFunction tau;
};

// Checks that a positional value function points at a live variable head
// slot within the head arity (so Boolean queries require a constant value
// function), and that a quantile fraction lies in (0, 1).
void validate_query(const AggregateQuery& aq);

// The body atom a value function is anchored to: for positional kinds the
// first atom containing the variable it reads, for the constant kind the
// first atom.
std::size_t designated_atom_index(const ConjunctiveQuery& q,
                                  const ValueFunction& tau);

// The argument position (0-based) within the designated atom holding the
// variable a positional value function reads. UnknownVariable when the atom
// does not carry it.
std::size_t designated_column(const ConjunctiveQuery& q,
                              const ValueFunction& tau);

// SchemaMismatch when a body relation is missing from db's schema or an
// atom's arity disagrees with it.
void validate_schema(const ConjunctiveQuery& q, const Database& db);

// Set-semantics answers of q on db, at full head arity (pinned constant
// slots re-inserted), in sorted order. SchemaMismatch when a body relation
// is missing from db or an atom's arity disagrees with the schema.
std::vector<std::vector<Constant>> answers(const ConjunctiveQuery& q,
                                           const Database& db);

// True iff some homomorphism from q into db uses f (maps an atom onto f).
bool exists_hom_with_fact(const ConjunctiveQuery& q, const Database& db,
                          const Fact& f);

// Values of tau over the answers of q, with multiplicities.
ValueBag value_bag(const ConjunctiveQuery& q, const Database& db,
                   const ValueFunction& tau);

// A(db) = alpha(tau-values of the answers).
Rational evaluate(const AggregateQuery& aq, const Database& db);

// After substitutions have pinned the head slot a positional value function
// reads, the function collapses to the constant it would output there.
// Idempotent; other cases are returned unchanged.
ValueFunction tau_on_substituted(const ValueFunction& tau,
                                 const ConjunctiveQuery& qsub);

// Rebases a positional value function onto a connected component of
// `parent` (components keep the variable head slots they contain, so the
// position shifts). The component must contain the variable being read.
ValueFunction tau_project(const ConjunctiveQuery& parent,
                          const ConjunctiveQuery& component,
                          const ValueFunction& tau);

// The least hierarchy class whose engine handles the aggregate exactly.
HierarchyClass required_class(const AggregateFunction& alpha);

}  // namespace shapq

#endif  // SHAPQ_AGGREGATES_HPP
