#ifndef SHAPQ_MODEL_HPP
#define SHAPQ_MODEL_HPP

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "shapq/errors.hpp"
#include "shapq/rational.hpp"

namespace shapq {

// A constant is an arbitrary-precision integer or an interned symbol.
// Symbols only ever participate in equality tests at the semantic level;
// the ordering below (integers first, then symbols lexicographically) exists
// solely to make container iteration deterministic.
using Constant = std::variant<Integer, std::string>;

bool constant_is_integer(const Constant& c);
std::string to_string(const Constant& c);

// Identity of a fact is structural: relation name plus tuple. Whether the
// fact is endogenous is a property stored alongside it in the database.
struct Fact {
  std::string relation;
  std::vector<Constant> tuple;

  bool operator==(const Fact& other) const {
    return relation == other.relation && tuple == other.tuple;
  }
  bool operator<(const Fact& other) const {
    if (relation != other.relation) return relation < other.relation;
    return tuple < other.tuple;
  }
};

std::string to_string(const Fact& fact);

// Renders like to_string, e.g. "R(1,2)" or "S(\"a\",3)"; inverse of
// parse_fact below (used for CLI fact selectors).
Fact parse_fact(const std::string& text);

// Schema (relation name -> arity) plus facts tagged endogenous (true) or
// exogenous (false). No two facts share (relation, tuple).
struct Database {
  std::map<std::string, std::size_t> schema;
  std::map<Fact, bool> facts;

  bool contains(const Fact& fact) const { return facts.count(fact) != 0; }
  bool is_endogenous(const Fact& fact) const {
    auto it = facts.find(fact);
    return it != facts.end() && it->second;
  }
};

// Declares a relation; re-declaring with a different arity is an error.
void add_relation(Database& db, const std::string& name, std::size_t arity);

// Inserts a fact, checking the schema. Duplicate (relation, tuple) pairs are
// an ingestion error regardless of provenance agreement: the player set must
// be unambiguous.
void insert_fact(Database& db, Fact fact, bool endogenous);

// The endogenous facts in sorted order (the game's player list).
std::vector<Fact> endogenous_facts(const Database& db);

std::size_t count_endogenous(const Database& db);

// Returns a copy of db with `fact` flipped to exogenous.
Database make_fact_exogenous(const Database& db, const Fact& fact);

// Returns a copy of db without `fact`.
Database remove_fact(const Database& db, const Fact& fact);

// Keeps exactly the facts whose relation is in `names` (schema retained in
// full). Every name must exist in the schema.
Database restrict_to_relations(const Database& db,
                               const std::set<std::string>& names);

}  // namespace shapq

#endif  // SHAPQ_MODEL_HPP
