#include "shapq/model.hpp"

#include <sstream>

namespace shapq {

bool constant_is_integer(const Constant& c) {
  return std::holds_alternative<Integer>(c);
}

std::string to_string(const Constant& c) {
  if (const auto* i = std::get_if<Integer>(&c)) return i->str();
  return "\"" + std::get<std::string>(c) + "\"";
}

std::string to_string(const Fact& fact) {
  std::ostringstream out;
  out << fact.relation << '(';
  for (std::size_t i = 0; i < fact.tuple.size(); ++i) {
    if (i) out << ',';
    out << to_string(fact.tuple[i]);
  }
  out << ')';
  return out.str();
}

namespace {

void skip_spaces(const std::string& s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
    ++pos;
  }
}

Constant parse_constant_at(const std::string& s, std::size_t& pos) {
  skip_spaces(s, pos);
  if (pos >= s.size()) fail(errc::syntax_error, "expected constant");
  if (s[pos] == '"') {
    std::size_t end = s.find('"', pos + 1);
    if (end == std::string::npos) {
      fail(errc::syntax_error, "unterminated symbol at position " +
                                   std::to_string(pos));
    }
    std::string sym = s.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    return Constant(sym);
  }
  std::size_t start = pos;
  if (s[pos] == '-' || s[pos] == '+') ++pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    ++pos;
  }
  if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(s[start])))) {
    fail(errc::syntax_error,
         "expected constant at position " + std::to_string(start));
  }
  return Constant(Integer(s.substr(start, pos - start)));
}

}  // namespace

Fact parse_fact(const std::string& text) {
  std::size_t pos = 0;
  skip_spaces(text, pos);
  std::size_t start = pos;
  while (pos < text.size() &&
         (std::isalnum(static_cast<unsigned char>(text[pos])) ||
          text[pos] == '_')) {
    ++pos;
  }
  if (pos == start) fail(errc::syntax_error, "expected relation name");
  Fact fact;
  fact.relation = text.substr(start, pos - start);
  skip_spaces(text, pos);
  if (pos >= text.size() || text[pos] != '(') {
    fail(errc::syntax_error, "expected '(' in fact literal");
  }
  ++pos;
  skip_spaces(text, pos);
  if (pos < text.size() && text[pos] == ')') {
    ++pos;
  } else {
    while (true) {
      fact.tuple.push_back(parse_constant_at(text, pos));
      skip_spaces(text, pos);
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < text.size() && text[pos] == ')') {
        ++pos;
        break;
      }
      fail(errc::syntax_error, "expected ',' or ')' in fact literal");
    }
  }
  skip_spaces(text, pos);
  if (pos != text.size()) {
    fail(errc::syntax_error, "trailing characters after fact literal");
  }
  return fact;
}

void add_relation(Database& db, const std::string& name, std::size_t arity) {
  auto [it, inserted] = db.schema.emplace(name, arity);
  if (!inserted && it->second != arity) {
    fail(errc::schema_mismatch, "relation " + name + " re-declared with arity " +
                                    std::to_string(arity) + " (was " +
                                    std::to_string(it->second) + ")");
  }
}

void insert_fact(Database& db, Fact fact, bool endogenous) {
  auto schema_it = db.schema.find(fact.relation);
  if (schema_it == db.schema.end()) {
    fail(errc::unknown_relation, "relation " + fact.relation + " not declared");
  }
  if (schema_it->second != fact.tuple.size()) {
    fail(errc::schema_mismatch,
         "fact " + to_string(fact) + " has arity " +
             std::to_string(fact.tuple.size()) + ", relation expects " +
             std::to_string(schema_it->second));
  }
  auto [it, inserted] = db.facts.emplace(std::move(fact), endogenous);
  if (!inserted) {
    fail(errc::schema_mismatch, "duplicate fact " + to_string(it->first));
  }
}

std::vector<Fact> endogenous_facts(const Database& db) {
  std::vector<Fact> result;
  for (const auto& [fact, endo] : db.facts) {
    if (endo) result.push_back(fact);
  }
  return result;
}

std::size_t count_endogenous(const Database& db) {
  std::size_t n = 0;
  for (const auto& [fact, endo] : db.facts) n += endo ? 1 : 0;
  return n;
}

Database make_fact_exogenous(const Database& db, const Fact& fact) {
  auto it = db.facts.find(fact);
  if (it == db.facts.end() || !it->second) {
    fail(errc::fact_not_endogenous,
         to_string(fact) + " is not an endogenous fact of the database");
  }
  Database result = db;
  result.facts[fact] = false;
  return result;
}

Database remove_fact(const Database& db, const Fact& fact) {
  auto it = db.facts.find(fact);
  if (it == db.facts.end()) {
    fail(errc::fact_absent, to_string(fact) + " is not in the database");
  }
  Database result = db;
  result.facts.erase(fact);
  return result;
}

Database restrict_to_relations(const Database& db,
                               const std::set<std::string>& names) {
  for (const auto& name : names) {
    if (!db.schema.count(name)) {
      fail(errc::unknown_relation, "relation " + name + " not declared");
    }
  }
  Database result;
  result.schema = db.schema;
  for (const auto& [fact, endo] : db.facts) {
    if (names.count(fact.relation)) result.facts.emplace(fact, endo);
  }
  return result;
}

}  // namespace shapq
