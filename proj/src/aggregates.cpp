#include "shapq/aggregates.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "shapq/errors.hpp"

namespace shapq {

// --- value functions ---------------------------------------------------

ValueFunction identity_vf(std::size_t position) {
  ValueFunction vf;
  vf.kind = ValueFunction::Kind::Identity;
  vf.position = position;
  return vf;
}

ValueFunction greater_than_vf(const Integer& bound, std::size_t position) {
  ValueFunction vf;
  vf.kind = ValueFunction::Kind::GreaterThan;
  vf.position = position;
  vf.bound = bound;
  return vf;
}

ValueFunction relu_vf(std::size_t position) {
  ValueFunction vf;
  vf.kind = ValueFunction::Kind::ReLU;
  vf.position = position;
  return vf;
}

ValueFunction constant_vf(const Integer& c) {
  ValueFunction vf;
  vf.kind = ValueFunction::Kind::Constant;
  vf.constant = c;
  return vf;
}

Integer eval_scalar(const ValueFunction& vf, const Constant& c) {
  if (vf.kind == ValueFunction::Kind::Constant) return vf.constant;
  if (!constant_is_integer(c)) {
    fail(errc::non_numeric_constant,
         "value function applied to symbol " + to_string(c));
  }
  const Integer& v = std::get<Integer>(c);
  switch (vf.kind) {
    case ValueFunction::Kind::Identity: return v;
    case ValueFunction::Kind::GreaterThan: return v > vf.bound ? 1 : 0;
    case ValueFunction::Kind::ReLU: return v > 0 ? v : Integer(0);
    case ValueFunction::Kind::Constant: break;  // handled above
  }
  return 0;
}

Integer eval_tuple(const ValueFunction& vf, const std::vector<Constant>& t) {
  if (vf.kind == ValueFunction::Kind::Constant) return vf.constant;
  if (vf.position == 0 || vf.position > t.size()) {
    fail(errc::out_of_range, "value function position " +
                                 std::to_string(vf.position) +
                                 " outside tuple of arity " +
                                 std::to_string(t.size()));
  }
  return eval_scalar(vf, t[vf.position - 1]);
}

namespace {

Integer parse_integer_token(const std::string& s) {
  if (s.empty()) fail(errc::syntax_error, "expected integer");
  std::size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) fail(errc::syntax_error, "expected integer, got '" + s + "'");
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      fail(errc::syntax_error, "expected integer, got '" + s + "'");
    }
  }
  return Integer(s);
}

std::size_t parse_position_token(const std::string& s) {
  Integer v = parse_integer_token(s);
  if (v <= 0) {
    fail(errc::out_of_range, "position must be >= 1, got " + s);
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_colon(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t sep = text.find(':', start);
    if (sep == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, sep - start));
    start = sep + 1;
  }
}

}  // namespace

ValueFunction parse_tau(const std::string& text) {
  auto parts = split_colon(text);
  if (parts[0] == "id" && parts.size() == 2) {
    return identity_vf(parse_position_token(parts[1]));
  }
  if (parts[0] == "gt" && parts.size() == 3) {
    return greater_than_vf(parse_integer_token(parts[1]),
                           parse_position_token(parts[2]));
  }
  if (parts[0] == "relu" && parts.size() == 2) {
    return relu_vf(parse_position_token(parts[1]));
  }
  if (parts[0] == "const" && parts.size() == 2) {
    return constant_vf(parse_integer_token(parts[1]));
  }
  fail(errc::syntax_error, "bad value function '" + text +
                               "' (expected id:<i> | gt:<b>:<i> | relu:<i> | "
                               "const:<c>)");
}

std::string to_string(const ValueFunction& vf) {
  switch (vf.kind) {
    case ValueFunction::Kind::Identity:
      return "id:" + std::to_string(vf.position);
    case ValueFunction::Kind::GreaterThan:
      return "gt:" + vf.bound.str() + ":" + std::to_string(vf.position);
    case ValueFunction::Kind::ReLU:
      return "relu:" + std::to_string(vf.position);
    case ValueFunction::Kind::Constant:
      return "const:" + vf.constant.str();
  }
  return "?";
}

// --- aggregate functions -----------------------------------------------

AggregateFunction parse_agg(const std::string& text) {
  AggregateFunction alpha;
  using Kind = AggregateFunction::Kind;
  if (text == "sum") {
    alpha.kind = Kind::Sum;
  } else if (text == "count") {
    alpha.kind = Kind::Count;
  } else if (text == "cdist") {
    alpha.kind = Kind::CountDistinct;
  } else if (text == "min") {
    alpha.kind = Kind::Min;
  } else if (text == "max") {
    alpha.kind = Kind::Max;
  } else if (text == "avg") {
    alpha.kind = Kind::Avg;
  } else if (text == "median") {
    alpha.kind = Kind::Quantile;
    alpha.quantile = Rational(1, 2);
  } else if (text == "dup") {
    alpha.kind = Kind::Dup;
  } else if (text.rfind("qnt:", 0) == 0) {
    alpha.kind = Kind::Quantile;
    alpha.quantile = parse_rational(text.substr(4));
    if (alpha.quantile <= 0 || alpha.quantile >= 1) {
      fail(errc::out_of_range,
           "quantile fraction must lie in (0,1), got " + text.substr(4));
    }
  } else {
    fail(errc::syntax_error, "unknown aggregate '" + text + "'");
  }
  return alpha;
}

std::string to_string(const AggregateFunction& alpha) {
  using Kind = AggregateFunction::Kind;
  switch (alpha.kind) {
    case Kind::Sum: return "sum";
    case Kind::Count: return "count";
    case Kind::CountDistinct: return "cdist";
    case Kind::Min: return "min";
    case Kind::Max: return "max";
    case Kind::Avg: return "avg";
    case Kind::Quantile: return "qnt:" + to_fraction_string(alpha.quantile);
    case Kind::Dup: return "dup";
  }
  return "?";
}

namespace {

// The i-th smallest element of the bag, counted with multiplicity, 1-based.
Integer bag_element(const ValueBag& bag, const Integer& i) {
  Integer seen = 0;
  for (const auto& [value, mult] : bag) {
    seen += mult;
    if (seen >= i) return value;
  }
  fail(errc::out_of_range, "bag index past end");
}

}  // namespace

Rational aggregate(const AggregateFunction& alpha, const ValueBag& bag) {
  using Kind = AggregateFunction::Kind;
  if (bag.empty()) return 0;
  switch (alpha.kind) {
    case Kind::Sum: {
      Integer total = 0;
      for (const auto& [value, mult] : bag) total += value * mult;
      return Rational(total);
    }
    case Kind::Count: {
      Integer total = 0;
      for (const auto& [value, mult] : bag) total += mult;
      return Rational(total);
    }
    case Kind::CountDistinct:
      return Rational(Integer(bag.size()));
    case Kind::Min:
      return Rational(bag.begin()->first);
    case Kind::Max:
      return Rational(bag.rbegin()->first);
    case Kind::Avg: {
      Integer total = 0;
      Integer count = 0;
      for (const auto& [value, mult] : bag) {
        total += value * mult;
        count += mult;
      }
      return Rational(total) / Rational(count);
    }
    case Kind::Quantile: {
      Integer s = 0;
      for (const auto& [value, mult] : bag) s += mult;
      Rational qs = alpha.quantile * Rational(s);
      const Integer num = numerator(qs);
      const Integer den = denominator(qs);
      Integer lo = (num + den - 1) / den;  // ceil(q*s)
      Integer hi = num / den + 1;          // floor(q*s + 1)
      return (Rational(bag_element(bag, lo)) + Rational(bag_element(bag, hi))) /
             2;
    }
    case Kind::Dup: {
      for (const auto& [value, mult] : bag) {
        if (mult >= 2) return 1;
      }
      return 0;
    }
  }
  return 0;
}

// --- aggregate queries -------------------------------------------------

void validate_query(const AggregateQuery& aq) {
  if (!is_constant_vf(aq.tau)) {
    if (aq.tau.position == 0 || aq.tau.position > aq.q.head_slots.size()) {
      fail(errc::out_of_range,
           "value function position " + std::to_string(aq.tau.position) +
               " outside head of arity " +
               std::to_string(aq.q.head_slots.size()));
    }
    if (!term_is_variable(aq.q.head_slots[aq.tau.position - 1])) {
      fail(errc::out_of_range,
           "value function position " + std::to_string(aq.tau.position) +
               " refers to a constant head slot");
    }
  }
  if (aq.alpha.kind == AggregateFunction::Kind::Quantile &&
      (aq.alpha.quantile <= 0 || aq.alpha.quantile >= 1)) {
    fail(errc::out_of_range, "quantile fraction must lie in (0,1)");
  }
}

std::size_t designated_atom_index(const ConjunctiveQuery& q,
                                  const ValueFunction& tau) {
  if (q.body.empty()) fail(errc::syntax_error, "query has no body atoms");
  if (is_constant_vf(tau)) return 0;
  if (tau.position == 0 || tau.position > q.head_slots.size()) {
    fail(errc::out_of_range, "value function position out of range");
  }
  const auto* v = std::get_if<Variable>(&q.head_slots[tau.position - 1]);
  if (!v) {
    fail(errc::out_of_range,
         "value function position refers to a constant head slot");
  }
  for (std::size_t i = 0; i < q.body.size(); ++i) {
    for (const auto& arg : q.body[i].args) {
      if (const auto* w = std::get_if<Variable>(&arg); w && *w == *v) return i;
    }
  }
  fail(errc::unknown_variable, "head variable " + v->name + " not in body");
}

std::size_t designated_column(const ConjunctiveQuery& q,
                              const ValueFunction& tau) {
  const Atom& atom = q.body[designated_atom_index(q, tau)];
  const auto& var = std::get<Variable>(q.head_slots[tau.position - 1]);
  for (std::size_t p = 0; p < atom.args.size(); ++p) {
    if (const auto* w = std::get_if<Variable>(&atom.args[p]); w && *w == var) {
      return p;
    }
  }
  fail(errc::unknown_variable, "designated atom misses " + var.name);
}

void validate_schema(const ConjunctiveQuery& q, const Database& db) {
  for (const auto& atom : q.body) {
    auto it = db.schema.find(atom.relation);
    if (it == db.schema.end()) {
      fail(errc::schema_mismatch,
           "relation " + atom.relation + " not in database schema");
    }
    if (it->second != atom.args.size()) {
      fail(errc::schema_mismatch,
           "atom " + atom.relation + "/" + std::to_string(atom.args.size()) +
               " disagrees with schema arity " + std::to_string(it->second));
    }
  }
}

namespace {

using Binding = std::map<Variable, Constant>;

// Tries to extend `binding` so that `atom` maps onto `tuple`. On success the
// newly bound variables are appended to `undo`; on failure the binding is
// left as found.
bool match_atom(const Atom& atom, const std::vector<Constant>& tuple,
                Binding& binding, std::vector<Variable>& undo) {
  const std::size_t undo_mark = undo.size();
  for (std::size_t p = 0; p < atom.args.size(); ++p) {
    bool ok = true;
    if (const auto* c = std::get_if<Constant>(&atom.args[p])) {
      ok = (tuple[p] == *c);
    } else {
      const auto& v = std::get<Variable>(atom.args[p]);
      auto [it, inserted] = binding.emplace(v, tuple[p]);
      if (inserted) {
        undo.push_back(v);
      } else {
        ok = (it->second == tuple[p]);
      }
    }
    if (!ok) {
      while (undo.size() > undo_mark) {
        binding.erase(undo.back());
        undo.pop_back();
      }
      return false;
    }
  }
  return true;
}

// Backtracking search over the atoms listed in `order`, extending `binding`
// with facts of db. Calls `emit` once per complete assignment (deduplication
// is the caller's concern); `emit` returning false stops the search early.
bool search(const ConjunctiveQuery& q, const Database& db,
            const std::vector<std::size_t>& order, std::size_t depth,
            Binding& binding, const std::function<bool(const Binding&)>& emit) {
  if (depth == order.size()) return emit(binding);
  const Atom& atom = q.body[order[depth]];
  Fact low{atom.relation, {}};
  for (auto it = db.facts.lower_bound(low);
       it != db.facts.end() && it->first.relation == atom.relation; ++it) {
    std::vector<Variable> undo;
    if (match_atom(atom, it->first.tuple, binding, undo)) {
      if (!search(q, db, order, depth + 1, binding, emit)) return false;
      for (const auto& v : undo) binding.erase(v);
    }
  }
  return true;
}

}  // namespace

std::vector<std::vector<Constant>> answers(const ConjunctiveQuery& q,
                                           const Database& db) {
  validate_schema(q, db);
  std::vector<std::size_t> order(q.body.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::set<std::vector<Constant>> out;
  Binding binding;
  search(q, db, order, 0, binding, [&](const Binding& b) {
    std::vector<Constant> t;
    t.reserve(q.head_slots.size());
    for (const auto& slot : q.head_slots) {
      if (const auto* v = std::get_if<Variable>(&slot)) {
        t.push_back(b.at(*v));
      } else {
        t.push_back(std::get<Constant>(slot));
      }
    }
    out.insert(std::move(t));
    return true;
  });
  return {out.begin(), out.end()};
}

bool exists_hom_with_fact(const ConjunctiveQuery& q, const Database& db,
                          const Fact& f) {
  validate_schema(q, db);
  if (!db.contains(f)) return false;
  for (std::size_t j = 0; j < q.body.size(); ++j) {
    const Atom& atom = q.body[j];
    if (atom.relation != f.relation || atom.args.size() != f.tuple.size()) {
      continue;
    }
    Binding binding;
    std::vector<Variable> undo;
    if (!match_atom(atom, f.tuple, binding, undo)) continue;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < q.body.size(); ++i) {
      if (i != j) order.push_back(i);
    }
    bool found = !search(q, db, order, 0, binding,
                         [](const Binding&) { return false; });
    if (found) return true;
  }
  return false;
}

ValueBag value_bag(const ConjunctiveQuery& q, const Database& db,
                   const ValueFunction& tau) {
  ValueBag bag;
  for (const auto& t : answers(q, db)) bag[eval_tuple(tau, t)] += 1;
  return bag;
}

Rational evaluate(const AggregateQuery& aq, const Database& db) {
  return aggregate(aq.alpha, value_bag(aq.q, db, aq.tau));
}

ValueFunction tau_on_substituted(const ValueFunction& tau,
                                 const ConjunctiveQuery& qsub) {
  if (is_constant_vf(tau)) return tau;
  if (tau.position == 0 || tau.position > qsub.head_slots.size()) {
    fail(errc::out_of_range, "value function position out of range");
  }
  const Term& slot = qsub.head_slots[tau.position - 1];
  if (const auto* c = std::get_if<Constant>(&slot)) {
    return constant_vf(eval_scalar(tau, *c));
  }
  return tau;
}

ValueFunction tau_project(const ConjunctiveQuery& parent,
                          const ConjunctiveQuery& component,
                          const ValueFunction& tau) {
  if (is_constant_vf(tau)) return tau;
  if (tau.position == 0 || tau.position > parent.head_slots.size()) {
    fail(errc::out_of_range, "value function position out of range");
  }
  const auto* v = std::get_if<Variable>(&parent.head_slots[tau.position - 1]);
  if (!v) {
    fail(errc::precondition_violated,
         "cannot project a value function reading a pinned head slot");
  }
  const auto comp_vars = variables(component);
  if (!comp_vars.count(*v)) {
    fail(errc::precondition_violated,
         "component does not contain head variable " + v->name);
  }
  std::size_t preceding = 0;
  for (std::size_t i = 0; i + 1 < tau.position; ++i) {
    if (const auto* w = std::get_if<Variable>(&parent.head_slots[i])) {
      if (comp_vars.count(*w)) ++preceding;
    }
  }
  ValueFunction out = tau;
  out.position = preceding + 1;
  return out;
}

HierarchyClass required_class(const AggregateFunction& alpha) {
  using Kind = AggregateFunction::Kind;
  switch (alpha.kind) {
    case Kind::Sum:
    case Kind::Count:
      return HierarchyClass::ExistsHierarchical;
    case Kind::CountDistinct:
    case Kind::Min:
    case Kind::Max:
      return HierarchyClass::AllHierarchical;
    case Kind::Avg:
    case Kind::Quantile:
      return HierarchyClass::QHierarchical;
    case Kind::Dup:
      return HierarchyClass::SQHierarchical;
  }
  return HierarchyClass::SQHierarchical;
}

}  // namespace shapq
