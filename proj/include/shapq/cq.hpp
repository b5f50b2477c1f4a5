#ifndef SHAPQ_CQ_HPP
#define SHAPQ_CQ_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "shapq/model.hpp"

namespace shapq {

struct Variable {
  std::string name;

  bool operator==(const Variable& other) const { return name == other.name; }
  bool operator<(const Variable& other) const { return name < other.name; }
};

// A term is a variable or a constant.
using Term = std::variant<Variable, Constant>;

bool term_is_variable(const Term& t);
std::string to_string(const Term& t);

struct Atom {
  std::string relation;
  std::vector<Term> args;
};

// Conjunctive query. head_slots keeps the full head arity at all times:
// a slot holds a Variable while live and is overwritten in place with the
// substituted Constant once that variable is grounded. This is how the
// "removed head position" record is kept — positional value functions keep
// indexing the same slot throughout the recursion, and answer tuples always
// come back at full arity with pinned constants re-inserted.
struct ConjunctiveQuery {
  std::string name;
  std::vector<Term> head_slots;
  std::vector<Atom> body;
};

// --- structural queries ------------------------------------------------

// All variables occurring in the body, in deterministic (sorted) order.
std::set<Variable> variables(const ConjunctiveQuery& q);

// Head variables (free) / non-head variables (existential).
std::set<Variable> free_variables(const ConjunctiveQuery& q);
std::set<Variable> existential_variables(const ConjunctiveQuery& q);

// True when no head slot is a variable. Such a query has at most one answer.
bool is_boolean(const ConjunctiveQuery& q);

// Body atom indices containing x.
std::set<std::size_t> atom_indices_of(const ConjunctiveQuery& q,
                                      const Variable& x);

// Distinct relation names of the body.
std::set<std::string> body_relations(const ConjunctiveQuery& q);

// False iff some relation name repeats in the body.
bool self_join_free(const ConjunctiveQuery& q);

enum class HierarchyClass {
  NotExistsHierarchical,
  ExistsHierarchical,
  AllHierarchical,
  QHierarchical,
  SQHierarchical,
};

const char* to_string(HierarchyClass c);

// Chain comparison: SQ > Q > All > Exists > NotExists.
inline bool at_least(HierarchyClass actual, HierarchyClass required) {
  return static_cast<int>(actual) >= static_cast<int>(required);
}

// True iff for all x, y in V the atom sets of x and y are nested or disjoint.
// V must be a subset of the body variables.
bool hierarchical_wrt(const ConjunctiveQuery& q, const std::set<Variable>& V);

// The most specific class along the chain.
HierarchyClass classify(const ConjunctiveQuery& q);

// For diagnostics: a human-readable witness of why q fails `failed` (empty
// string when it does not fail it).
std::string class_failure_witness(const ConjunctiveQuery& q,
                                  HierarchyClass failed);

// Variables occurring in every body atom.
std::set<Variable> root_variables(const ConjunctiveQuery& q);

// Partition of the body atoms into variable-connected components. Each
// component keeps the head variable slots it contains (order preserved;
// constant slots are dropped). Variable-free atoms form singleton components.
std::vector<ConjunctiveQuery> connected_components(const ConjunctiveQuery& q);

// Replaces x by a in the body and pins x's head slots to a.
ConjunctiveQuery substitute(const ConjunctiveQuery& q, const Variable& x,
                            const Constant& a);

// Intersection over all (atom, position) pairs where x occurs of the set of
// constants found in that column of the corresponding relation in db.
std::set<Constant> values_variable_can_take(const ConjunctiveQuery& q,
                                            const Database& db,
                                            const Variable& x);

// Facts of db matching some atom of q under x -> a (other variables free,
// constants matched exactly, repeated variables within an atom matched
// consistently). Only relations appearing in q are retained.
Database consistent_subset(const Database& db, const ConjunctiveQuery& q,
                           const Variable& x, const Constant& a);

// --- parsing / printing ------------------------------------------------

// Grammar: `Name(t1,…,tk) :- A1, …, Am .` — atom arguments are variables
// (identifiers), integer literals, quoted symbols, or `_` (a fresh
// existential variable per occurrence). Head slots admit variables and
// constants; every head variable must occur in the body.
ConjunctiveQuery parse_cq(const std::string& text);

std::string to_string(const ConjunctiveQuery& q);

}  // namespace shapq

#endif  // SHAPQ_CQ_HPP
