#include "shapq/cq.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "shapq/errors.hpp"

namespace shapq {

bool term_is_variable(const Term& t) {
  return std::holds_alternative<Variable>(t);
}

std::string to_string(const Term& t) {
  if (const auto* v = std::get_if<Variable>(&t)) return v->name;
  return to_string(std::get<Constant>(t));
}

std::set<Variable> variables(const ConjunctiveQuery& q) {
  std::set<Variable> result;
  for (const auto& atom : q.body) {
    for (const auto& arg : atom.args) {
      if (const auto* v = std::get_if<Variable>(&arg)) result.insert(*v);
    }
  }
  return result;
}

std::set<Variable> free_variables(const ConjunctiveQuery& q) {
  std::set<Variable> result;
  for (const auto& slot : q.head_slots) {
    if (const auto* v = std::get_if<Variable>(&slot)) result.insert(*v);
  }
  return result;
}

std::set<Variable> existential_variables(const ConjunctiveQuery& q) {
  std::set<Variable> result = variables(q);
  for (const auto& v : free_variables(q)) result.erase(v);
  return result;
}

bool is_boolean(const ConjunctiveQuery& q) {
  return free_variables(q).empty();
}

std::set<std::size_t> atom_indices_of(const ConjunctiveQuery& q,
                                      const Variable& x) {
  std::set<std::size_t> result;
  for (std::size_t i = 0; i < q.body.size(); ++i) {
    for (const auto& arg : q.body[i].args) {
      if (const auto* v = std::get_if<Variable>(&arg); v && *v == x) {
        result.insert(i);
        break;
      }
    }
  }
  return result;
}

std::set<std::string> body_relations(const ConjunctiveQuery& q) {
  std::set<std::string> result;
  for (const auto& atom : q.body) result.insert(atom.relation);
  return result;
}

bool self_join_free(const ConjunctiveQuery& q) {
  return body_relations(q).size() == q.body.size();
}

const char* to_string(HierarchyClass c) {
  switch (c) {
    case HierarchyClass::NotExistsHierarchical: return "not-exists-hierarchical";
    case HierarchyClass::ExistsHierarchical: return "exists-hierarchical";
    case HierarchyClass::AllHierarchical: return "all-hierarchical";
    case HierarchyClass::QHierarchical: return "q-hierarchical";
    case HierarchyClass::SQHierarchical: return "sq-hierarchical";
  }
  return "?";
}

namespace {

using AtomSets = std::map<Variable, std::set<std::size_t>>;

AtomSets atom_sets(const ConjunctiveQuery& q) {
  AtomSets sets;
  for (const auto& v : variables(q)) sets.emplace(v, atom_indices_of(q, v));
  return sets;
}

bool nested_or_disjoint(const std::set<std::size_t>& a,
                        const std::set<std::size_t>& b) {
  bool a_in_b = std::includes(b.begin(), b.end(), a.begin(), a.end());
  bool b_in_a = std::includes(a.begin(), a.end(), b.begin(), b.end());
  if (a_in_b || b_in_a) return true;
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(common));
  return common.empty();
}

bool strictly_contained(const std::set<std::size_t>& a,
                        const std::set<std::size_t>& b) {
  return a.size() < b.size() &&
         std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Finds a violating pair among V, or nothing.
std::optional<std::pair<Variable, Variable>> hierarchy_violation(
    const AtomSets& sets, const std::set<Variable>& V) {
  for (auto it = V.begin(); it != V.end(); ++it) {
    for (auto jt = std::next(it); jt != V.end(); ++jt) {
      if (!nested_or_disjoint(sets.at(*it), sets.at(*jt))) {
        return std::make_pair(*it, *jt);
      }
    }
  }
  return std::nullopt;
}

// The q-hierarchy condition's witness: free y and existential x with
// atoms(y) strictly inside atoms(x).
std::optional<std::pair<Variable, Variable>> q_violation(
    const ConjunctiveQuery& q, const AtomSets& sets) {
  auto frees = free_variables(q);
  auto exists = existential_variables(q);
  for (const auto& y : frees) {
    for (const auto& x : exists) {
      if (strictly_contained(sets.at(y), sets.at(x))) {
        return std::make_pair(y, x);
      }
    }
  }
  return std::nullopt;
}

// The sq-hierarchy condition's witness: a free variable whose atom set is
// strictly contained in some other variable's atom set.
std::optional<Variable> sq_violation(const ConjunctiveQuery& q,
                                     const AtomSets& sets) {
  auto frees = free_variables(q);
  for (const auto& [v, av] : sets) {
    if (!frees.count(v)) continue;
    for (const auto& [w, aw] : sets) {
      if (strictly_contained(av, aw)) return v;
    }
  }
  return std::nullopt;
}

}  // namespace

bool hierarchical_wrt(const ConjunctiveQuery& q, const std::set<Variable>& V) {
  auto sets = atom_sets(q);
  for (const auto& v : V) {
    if (!sets.count(v)) {
      fail(errc::unknown_variable, "variable " + v.name + " not in query");
    }
  }
  return !hierarchy_violation(sets, V).has_value();
}

HierarchyClass classify(const ConjunctiveQuery& q) {
  auto sets = atom_sets(q);
  if (hierarchy_violation(sets, existential_variables(q))) {
    return HierarchyClass::NotExistsHierarchical;
  }
  if (hierarchy_violation(sets, variables(q))) {
    return HierarchyClass::ExistsHierarchical;
  }
  bool is_q = !q_violation(q, sets).has_value();
  bool is_sq = !sq_violation(q, sets).has_value();
  if (is_sq) return HierarchyClass::SQHierarchical;
  if (is_q) return HierarchyClass::QHierarchical;
  return HierarchyClass::AllHierarchical;
}

std::string class_failure_witness(const ConjunctiveQuery& q,
                                  HierarchyClass failed) {
  auto sets = atom_sets(q);
  switch (failed) {
    case HierarchyClass::ExistsHierarchical: {
      auto pair = hierarchy_violation(sets, existential_variables(q));
      if (!pair) return "";
      return "existential " + pair->first.name + ", " + pair->second.name +
             " overlap without containment";
    }
    case HierarchyClass::AllHierarchical: {
      auto pair = hierarchy_violation(sets, variables(q));
      if (!pair) return "";
      return "variables " + pair->first.name + ", " + pair->second.name +
             " overlap without containment";
    }
    case HierarchyClass::QHierarchical: {
      if (hierarchy_violation(sets, variables(q))) {
        return class_failure_witness(q, HierarchyClass::AllHierarchical);
      }
      auto pair = q_violation(q, sets);
      if (!pair) return "";
      return "free " + pair->first.name + ", existential " + pair->second.name +
             ", atoms(" + pair->first.name + ") ⊊ atoms(" +
             pair->second.name + ")";
    }
    case HierarchyClass::SQHierarchical: {
      if (hierarchy_violation(sets, variables(q))) {
        return class_failure_witness(q, HierarchyClass::AllHierarchical);
      }
      auto v = sq_violation(q, sets);
      if (!v) return "";
      return "free " + v->name + " strictly dominated";
    }
    case HierarchyClass::NotExistsHierarchical:
      return "";
  }
  return "";
}

std::set<Variable> root_variables(const ConjunctiveQuery& q) {
  std::set<Variable> result;
  for (const auto& v : variables(q)) {
    if (atom_indices_of(q, v).size() == q.body.size()) result.insert(v);
  }
  return result;
}

std::vector<ConjunctiveQuery> connected_components(const ConjunctiveQuery& q) {
  const std::size_t m = q.body.size();
  // Union-find over atom indices, merged through shared variables.
  std::vector<std::size_t> parent(m);
  for (std::size_t i = 0; i < m; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  auto unite = [&](std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (const auto& v : variables(q)) {
    const auto indices = atom_indices_of(q, v);
    auto it = indices.begin();
    for (auto jt = std::next(it); jt != indices.end(); ++jt) unite(*it, *jt);
  }
  // Group atoms by representative, ordered by first atom index.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < m; ++i) groups[find(i)].push_back(i);

  std::vector<ConjunctiveQuery> result;
  for (const auto& [rep, indices] : groups) {
    ConjunctiveQuery comp;
    comp.name = q.name;
    for (std::size_t i : indices) comp.body.push_back(q.body[i]);
    const auto comp_vars = variables(comp);
    for (const auto& slot : q.head_slots) {
      if (const auto* v = std::get_if<Variable>(&slot)) {
        if (comp_vars.count(*v)) comp.head_slots.push_back(slot);
      }
    }
    result.push_back(std::move(comp));
  }
  return result;
}

ConjunctiveQuery substitute(const ConjunctiveQuery& q, const Variable& x,
                            const Constant& a) {
  if (!variables(q).count(x)) {
    fail(errc::unknown_variable, "variable " + x.name + " not in query");
  }
  ConjunctiveQuery result = q;
  for (auto& slot : result.head_slots) {
    if (const auto* v = std::get_if<Variable>(&slot); v && *v == x) {
      slot = Term(a);
    }
  }
  for (auto& atom : result.body) {
    for (auto& arg : atom.args) {
      if (const auto* v = std::get_if<Variable>(&arg); v && *v == x) {
        arg = Term(a);
      }
    }
  }
  return result;
}

std::set<Constant> values_variable_can_take(const ConjunctiveQuery& q,
                                            const Database& db,
                                            const Variable& x) {
  if (!variables(q).count(x)) {
    fail(errc::unknown_variable, "variable " + x.name + " not in query");
  }
  std::set<Constant> result;
  bool first = true;
  for (const auto& atom : q.body) {
    for (std::size_t p = 0; p < atom.args.size(); ++p) {
      if (const auto* v = std::get_if<Variable>(&atom.args[p]); !v || !(*v == x)) {
        continue;
      }
      std::set<Constant> column;
      Fact low{atom.relation, {}};
      for (auto it = db.facts.lower_bound(low);
           it != db.facts.end() && it->first.relation == atom.relation; ++it) {
        if (p < it->first.tuple.size()) column.insert(it->first.tuple[p]);
      }
      if (first) {
        result = std::move(column);
        first = false;
      } else {
        std::set<Constant> merged;
        std::set_intersection(result.begin(), result.end(), column.begin(),
                              column.end(),
                              std::inserter(merged, merged.begin()));
        result = std::move(merged);
      }
      if (result.empty()) return result;
    }
  }
  return result;
}

namespace {

// Does `fact` match `atom` with x bound to a, other variables free but
// consistent within the atom, and constants matched exactly?
bool fact_matches_atom(const Fact& fact, const Atom& atom, const Variable& x,
                       const Constant& a) {
  if (fact.relation != atom.relation || fact.tuple.size() != atom.args.size()) {
    return false;
  }
  std::map<Variable, Constant> local;
  for (std::size_t p = 0; p < atom.args.size(); ++p) {
    if (const auto* c = std::get_if<Constant>(&atom.args[p])) {
      if (!(fact.tuple[p] == *c)) return false;
    } else {
      const auto& v = std::get<Variable>(atom.args[p]);
      if (v == x) {
        if (!(fact.tuple[p] == a)) return false;
      } else {
        auto [it, inserted] = local.emplace(v, fact.tuple[p]);
        if (!inserted && !(it->second == fact.tuple[p])) return false;
      }
    }
  }
  return true;
}

}  // namespace

Database consistent_subset(const Database& db, const ConjunctiveQuery& q,
                           const Variable& x, const Constant& a) {
  if (!variables(q).count(x)) {
    fail(errc::unknown_variable, "variable " + x.name + " not in query");
  }
  Database result;
  result.schema = db.schema;
  for (const auto& [fact, endo] : db.facts) {
    for (const auto& atom : q.body) {
      if (fact_matches_atom(fact, atom, x, a)) {
        result.facts.emplace(fact, endo);
        break;
      }
    }
  }
  return result;
}

// --- parsing / printing ------------------------------------------------

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int anon_counter = 0;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void error(const std::string& message) const {
    fail(errc::syntax_error,
         message + " at position " + std::to_string(pos));
  }

  void skip() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
  }

  bool eat(char c) {
    skip();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) error(std::string("expected '") + c + "'");
  }

  bool peek_is(char c) {
    skip();
    return pos < text.size() && text[pos] == c;
  }

  std::string identifier() {
    skip();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_' || text[pos] == '\'')) {
      ++pos;
    }
    if (pos == start ||
        std::isdigit(static_cast<unsigned char>(text[start]))) {
      error("expected identifier");
    }
    return text.substr(start, pos - start);
  }

  Term term() {
    skip();
    if (pos >= text.size()) error("expected term");
    char c = text[pos];
    if (c == '"') {
      std::size_t end = text.find('"', pos + 1);
      if (end == std::string::npos) error("unterminated symbol");
      std::string sym = text.substr(pos + 1, end - pos - 1);
      pos = end + 1;
      return Term(Constant(sym));
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      if (c == '-') ++pos;
      if (pos >= text.size() ||
          !std::isdigit(static_cast<unsigned char>(text[pos]))) {
        error("expected integer literal");
      }
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos]))) {
        ++pos;
      }
      return Term(Constant(Integer(text.substr(start, pos - start))));
    }
    std::string id = identifier();
    if (id == "_") {
      return Term(Variable{"_" + std::to_string(++anon_counter)});
    }
    if (std::isupper(static_cast<unsigned char>(id[0]))) {
      error("variable names start lowercase (got '" + id + "')");
    }
    return Term(Variable{id});
  }

  std::vector<Term> term_list() {
    std::vector<Term> terms;
    expect('(');
    if (eat(')')) return terms;
    while (true) {
      terms.push_back(term());
      if (eat(',')) continue;
      expect(')');
      break;
    }
    return terms;
  }
};

}  // namespace

ConjunctiveQuery parse_cq(const std::string& text) {
  Parser p(text);
  ConjunctiveQuery q;
  p.skip();
  std::size_t name_start = p.pos;
  while (p.pos < text.size() &&
         (std::isalnum(static_cast<unsigned char>(text[p.pos])) ||
          text[p.pos] == '_')) {
    ++p.pos;
  }
  if (p.pos == name_start) p.error("expected query name");
  q.name = text.substr(name_start, p.pos - name_start);
  q.head_slots = p.term_list();
  p.skip();
  if (!(p.eat(':') && p.eat('-'))) p.error("expected ':-'");
  while (true) {
    Atom atom;
    atom.relation = p.identifier();
    atom.args = p.term_list();
    q.body.push_back(std::move(atom));
    if (p.eat(',')) continue;
    p.expect('.');
    break;
  }
  p.skip();
  if (p.pos != text.size()) p.error("trailing characters");

  const auto body_vars = variables(q);
  for (const auto& slot : q.head_slots) {
    if (const auto* v = std::get_if<Variable>(&slot)) {
      if (!body_vars.count(*v)) {
        fail(errc::unsafe_head,
             "head variable " + v->name + " does not occur in the body");
      }
    }
  }
  return q;
}

std::string to_string(const ConjunctiveQuery& q) {
  std::ostringstream out;
  out << q.name << '(';
  for (std::size_t i = 0; i < q.head_slots.size(); ++i) {
    if (i) out << ',';
    out << to_string(q.head_slots[i]);
  }
  out << ") :- ";
  for (std::size_t i = 0; i < q.body.size(); ++i) {
    if (i) out << ", ";
    out << q.body[i].relation << '(';
    for (std::size_t j = 0; j < q.body[i].args.size(); ++j) {
      if (j) out << ',';
      out << to_string(q.body[i].args[j]);
    }
    out << ')';
  }
  out << '.';
  return out.str();
}

}  // namespace shapq
