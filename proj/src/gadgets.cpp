#include "shapq/gadgets.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>

#include "shapq/errors.hpp"
#include "shapq/linalg.hpp"

namespace shapq {

namespace {

// Enumeration limit for the 2^m loops below.
constexpr std::size_t kMaxEnumeratedSets = 20;

Fact int_fact(const std::string& relation, std::initializer_list<Integer> t) {
  Fact f{relation, {}};
  for (const Integer& v : t) f.tuple.push_back(Constant(v));
  return f;
}

// Bitmask of a set's elements over the universe {1..n}.
std::uint32_t element_mask(const std::set<Integer>& set) {
  std::uint32_t mask = 0;
  for (const Integer& e : set) {
    mask |= std::uint32_t{1} << static_cast<std::size_t>(e - 1);
  }
  return mask;
}

std::vector<std::uint32_t> set_masks(const SetCoverInstance& inst) {
  if (inst.m() > kMaxEnumeratedSets || inst.n > kMaxEnumeratedSets) {
    fail(errc::instance_too_large,
         "set-cover enumeration is limited to " +
             std::to_string(kMaxEnumeratedSets) + " sets and elements");
  }
  std::vector<std::uint32_t> masks;
  for (const auto& set : inst.sets) masks.push_back(element_mask(set));
  return masks;
}

ConjunctiveQuery gadget_query(bool full_head) {
  return parse_cq(full_head ? "Q(x,y) :- R(x,y), S(y)."
                            : "Q(x) :- R(x,y), S(y).");
}

void add_gadget_schema(Database& d) {
  add_relation(d, "R", 2);
  add_relation(d, "S", 1);
}

}  // namespace

// --- #Set-Cover instances ----------------------------------------------

void validate_instance(const SetCoverInstance& inst) {
  if (inst.m() == 0) {
    fail(errc::out_of_range, "instance needs at least one set");
  }
  for (std::size_t j = 0; j < inst.m(); ++j) {
    const auto& set = inst.sets[j];
    if (set.empty()) {
      fail(errc::out_of_range, "set Y_" + std::to_string(j + 1) + " is empty");
    }
    for (const Integer& e : set) {
      if (e < 1 || e > Integer(inst.n)) {
        fail(errc::out_of_range, "set Y_" + std::to_string(j + 1) +
                                     " contains " + e.str() +
                                     " outside the universe 1.." +
                                     std::to_string(inst.n));
      }
    }
  }
}

std::vector<std::vector<Integer>> cover_counts_direct(
    const SetCoverInstance& inst) {
  validate_instance(inst);
  const auto masks = set_masks(inst);
  const std::size_t m = inst.m();
  std::vector<std::vector<Integer>> z(inst.n + 1,
                                      std::vector<Integer>(m + 1, 0));
  for (std::uint32_t sub = 0; sub < (std::uint32_t{1} << m); ++sub) {
    std::uint32_t covered = 0;
    std::size_t members = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (sub >> j & 1) {
        covered |= masks[j];
        ++members;
      }
    }
    z[std::popcount(covered)][members] += 1;
  }
  return z;
}

Integer count_set_covers_direct(const SetCoverInstance& inst) {
  const auto z = cover_counts_direct(inst);
  Integer covers = 0;
  for (const Integer& count : z[inst.n]) covers += count;
  return covers;
}

Rational setcover_game_shapley(const SetCoverInstance& inst, std::size_t i) {
  validate_instance(inst);
  if (i == 0 || i > inst.m()) {
    fail(errc::out_of_range, "player " + std::to_string(i) +
                                 " outside 1.." + std::to_string(inst.m()));
  }
  const auto masks = set_masks(inst);
  const std::size_t m = inst.m();
  const std::uint32_t full = inst.n == 0
                                 ? 0
                                 : (std::uint32_t{1} << inst.n) - 1;
  Rational value = 0;
  for (std::uint32_t sub = 0; sub < (std::uint32_t{1} << m); ++sub) {
    if (sub >> (i - 1) & 1) continue;
    std::uint32_t covered = 0;
    std::size_t members = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (sub >> j & 1) {
        covered |= masks[j];
        ++members;
      }
    }
    const bool before = covered == full;
    const bool after = (covered | masks[i - 1]) == full;
    if (after && !before) {
      value += Rational(factorial(members) * factorial(m - members - 1),
                        factorial(m));
    }
  }
  return value;
}

// --- average pipeline ----------------------------------------------------

GadgetInput build_avg_setcover_db(const SetCoverInstance& inst, std::size_t q,
                                  std::size_t r) {
  validate_instance(inst);
  const std::size_t n = inst.n;
  const std::size_t m = inst.m();
  if (q > n) fail(errc::out_of_range, "padding q exceeds the universe size");
  if (r > m) fail(errc::out_of_range, "padding r exceeds the set count");
  GadgetInput out{{gadget_query(false), parse_agg("avg"), relu_vf(1)}, {}, {}};
  Database& d = out.d;
  add_gadget_schema(d);
  for (std::size_t j = 1; j <= m; ++j) {
    for (const Integer& i : inst.sets[j - 1]) {
      insert_fact(d, int_fact("R", {-i, Integer(j)}), false);
    }
  }
  for (std::size_t i = 1; i <= q + 1; ++i) {
    insert_fact(d, int_fact("R", {-Integer(n + i), Integer(m + 1)}), false);
  }
  for (std::size_t j = 1; j <= r; ++j) {
    insert_fact(d, int_fact("R", {1, Integer(m + 1 + j)}), false);
  }
  insert_fact(d, int_fact("R", {1, 0}), false);
  for (std::size_t j = 1; j <= m; ++j) {
    insert_fact(d, int_fact("S", {Integer(j)}), true);
  }
  for (std::size_t j = 1; j <= r; ++j) {
    insert_fact(d, int_fact("S", {Integer(m + 1 + j)}), true);
  }
  insert_fact(d, int_fact("S", {Integer(m + 1)}), false);
  out.f = int_fact("S", {0});
  insert_fact(d, out.f, true);
  return out;
}

std::vector<std::vector<Rational>> recover_cover_counts_avg(
    const SetCoverInstance& inst, const ShapleyFn& shapley) {
  validate_instance(inst);
  const std::size_t n = inst.n;
  const std::size_t m = inst.m();
  // Coalition-size weights: a coalition of j sets plus none of the r decoys
  // carries weight j!(m+r-j)!/(m+r+1)! in the (m+r+1)-player game.
  Matrix size_weights(m + 1, m + 1);
  for (std::size_t r = 0; r <= m; ++r) {
    for (std::size_t j = 0; j <= m; ++j) {
      size_weights.at(r, j) =
          Rational(factorial(j) * factorial(m + r - j), factorial(m + r + 1));
    }
  }
  // Covered-count weights: i covered elements, q+1 blockers and the single
  // positive answer average to 1/(i+q+2).
  Matrix cover_weights(n + 1, n + 1);
  for (std::size_t q = 0; q <= n; ++q) {
    for (std::size_t i = 0; i <= n; ++i) {
      cover_weights.at(q, i) = Rational(1, q + i + 2);
    }
  }
  const Matrix l = kronecker(size_weights, cover_weights);
  std::vector<Rational> a((m + 1) * (n + 1));
  for (std::size_t r = 0; r <= m; ++r) {
    for (std::size_t q = 0; q <= n; ++q) {
      const GadgetInput in = build_avg_setcover_db(inst, q, r);
      a[r * (n + 1) + q] = shapley(in.aq, in.d, in.f);
    }
  }
  const std::vector<Rational> flat = exact_solve(l, a);
  std::vector<std::vector<Rational>> z(n + 1, std::vector<Rational>(m + 1));
  for (std::size_t j = 0; j <= m; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      z[i][j] = flat[j * (n + 1) + i];
    }
  }
  return z;
}

// --- quantile gadget -----------------------------------------------------

GadgetInput build_qnt_setcover_db(const SetCoverInstance& inst,
                                  const Rational& q) {
  validate_instance(inst);
  if (q <= 0 || q >= 1) {
    fail(errc::out_of_range, "quantile fraction must lie in (0,1)");
  }
  const Integer a = numerator(q);
  const Integer b = denominator(q);
  const Integer block = b * (b - a);  // answers contributed per element
  const std::size_t n = inst.n;
  const std::size_t m = inst.m();
  GadgetInput out{
      {gadget_query(false), {AggregateFunction::Kind::Quantile, q},
       greater_than_vf(0, 1)},
      {},
      {}};
  Database& d = out.d;
  add_gadget_schema(d);
  // Selecting S(i) yields, for each element j it covers, the block of
  // positive answers (j-1)*b(b-a)+1 .. j*b(b-a); blocks of distinct
  // elements are disjoint, so coverage is counted without duplicates.
  for (std::size_t i = 1; i <= m; ++i) {
    for (const Integer& j : inst.sets[i - 1]) {
      for (Integer l = 0; l < block; ++l) {
        insert_fact(d, int_fact("R", {j * block - l, Integer(i)}), false);
      }
    }
  }
  // The always-present column: b*a*n zeros keep the quantile below the
  // positive block until all n elements are covered, and one positive
  // answer marks full coverage.
  for (Integer l = 1; l <= b * a * Integer(n); ++l) {
    insert_fact(d, int_fact("R", {-l, 0}), false);
  }
  insert_fact(d, int_fact("R", {Integer(n) * block + 1, 0}), false);
  insert_fact(d, int_fact("S", {0}), false);
  for (std::size_t i = 1; i <= m; ++i) {
    insert_fact(d, int_fact("S", {Integer(i)}), true);
  }
  out.f = int_fact("S", {1});
  return out;
}

// --- permanent pipeline --------------------------------------------------

namespace {

// The 1-entries of the matrix as pairs {i, N+j} over {1..2N}, row-major.
std::vector<std::pair<Integer, Integer>> pairs_of(const Matrix01& m01) {
  const std::size_t n = m01.size();
  for (const auto& row : m01) {
    if (row.size() != n) {
      fail(errc::out_of_range, "matrix is not square");
    }
    for (int entry : row) {
      if (entry != 0 && entry != 1) {
        fail(errc::out_of_range, "matrix entries must be 0 or 1");
      }
    }
  }
  std::vector<std::pair<Integer, Integer>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (m01[i][j] == 1) {
        pairs.emplace_back(Integer(i + 1), Integer(n + j + 1));
      }
    }
  }
  return pairs;
}

}  // namespace

std::size_t pair_count(const Matrix01& m01) { return pairs_of(m01).size(); }

GadgetInput build_dup_permanent_db(const Matrix01& m01, std::size_t r,
                                   DupGadget variant) {
  const auto pairs = pairs_of(m01);
  const std::size_t m = pairs.size();
  if (r > m) fail(errc::out_of_range, "padding r exceeds the pair count");
  const bool relu = variant == DupGadget::ReLU;
  GadgetInput out{{gadget_query(true), parse_agg("dup"),
                   relu ? relu_vf(1) : identity_vf(1)},
                  {},
                  {}};
  Database& d = out.d;
  add_gadget_schema(d);
  // Two answers share a value exactly when two selected pairs share an
  // element, or a second zero-valued answer joins the always-present one.
  for (std::size_t l = 1; l <= m; ++l) {
    insert_fact(d, int_fact("R", {pairs[l - 1].first, Integer(l)}), false);
    insert_fact(d, int_fact("R", {pairs[l - 1].second, Integer(l)}), false);
  }
  insert_fact(d, int_fact("R", {0, 0}), false);
  insert_fact(d, int_fact("R", {relu ? Integer(-1) : Integer(0), -1}), false);
  for (std::size_t rp = 1; rp <= r; ++rp) {
    insert_fact(
        d, int_fact("R", {relu ? Integer(-2) : Integer(0), Integer(m + rp)}),
        false);
  }
  insert_fact(d, int_fact("S", {-1}), false);
  for (std::size_t l = 1; l <= m; ++l) {
    insert_fact(d, int_fact("S", {Integer(l)}), true);
  }
  for (std::size_t rp = 1; rp <= r; ++rp) {
    insert_fact(d, int_fact("S", {Integer(m + rp)}), true);
  }
  out.f = int_fact("S", {0});
  insert_fact(d, out.f, true);
  return out;
}

std::vector<Rational> recover_matching_counts_dup(const Matrix01& m01,
                                                  DupGadget variant,
                                                  const ShapleyFn& shapley) {
  const std::size_t m = pair_count(m01);
  // Z_j enters the Shapley value of S(0) at padding r with coefficient
  // j!(m+r-j)!/(m+r+1)!; scaling by (m+r+1)! and substituting j -> m-j
  // leaves the factorial Hankel system sum_j (r+j)! U_j = b_r.
  std::vector<Rational> b(m + 1);
  for (std::size_t r = 0; r <= m; ++r) {
    const GadgetInput in = build_dup_permanent_db(m01, r, variant);
    b[r] = shapley(in.aq, in.d, in.f) * Rational(factorial(m + r + 1));
  }
  Matrix hankel(m + 1, m + 1);
  for (std::size_t r = 0; r <= m; ++r) {
    for (std::size_t j = 0; j <= m; ++j) {
      hankel.at(r, j) = Rational(factorial(r + j));
    }
  }
  const std::vector<Rational> u = exact_solve(hankel, b);
  std::vector<Rational> z(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    z[j] = u[m - j] / Rational(factorial(j));
  }
  return z;
}

Rational permanent_via_dup(const Matrix01& m01, DupGadget variant,
                           const ShapleyFn& shapley) {
  const std::size_t n = m01.size();
  const std::size_t m = pair_count(m01);
  if (n > m) return 0;  // fewer pairs than rows: no perfect matching
  return recover_matching_counts_dup(m01, variant, shapley)[n];
}

namespace {

Integer permanent_rec(const Matrix01& m01, std::size_t row,
                      std::uint32_t used) {
  if (row == m01.size()) return 1;
  Integer total = 0;
  for (std::size_t col = 0; col < m01.size(); ++col) {
    if (m01[row][col] == 1 && !(used >> col & 1)) {
      total += permanent_rec(m01, row + 1, used | std::uint32_t{1} << col);
    }
  }
  return total;
}

}  // namespace

Integer permanent_direct(const Matrix01& m01) {
  pairs_of(m01);  // shape validation
  if (m01.size() > 16) {
    fail(errc::instance_too_large, "permanent expansion is limited to 16x16");
  }
  return permanent_rec(m01, 0, 0);
}

// --- embedding into a general non-q-hierarchical query -------------------

namespace {

// The fact of `atom` under x0 -> a, y0 -> b, every other variable ->
// filler; constants in the atom stay put.
Fact atom_fact(const Atom& atom, const Variable& x0, const Variable& y0,
               const Constant& a, const Constant& b, const Constant& filler) {
  Fact f{atom.relation, {}};
  for (const Term& t : atom.args) {
    if (!term_is_variable(t)) {
      f.tuple.push_back(std::get<Constant>(t));
    } else if (std::get<Variable>(t) == x0) {
      f.tuple.push_back(a);
    } else if (std::get<Variable>(t) == y0) {
      f.tuple.push_back(b);
    } else {
      f.tuple.push_back(filler);
    }
  }
  return f;
}

}  // namespace

EmbedResult embed_qxyy(const ConjunctiveQuery& q0, const Database& d) {
  if (!self_join_free(q0)) {
    fail(errc::precondition_violated,
         "embedding target must be self-join-free");
  }
  const HierarchyClass cls = classify(q0);
  if (!at_least(cls, HierarchyClass::AllHierarchical)) {
    fail(errc::precondition_violated,
         "embedding target must be all-hierarchical: " +
             class_failure_witness(q0, HierarchyClass::AllHierarchical));
  }
  if (at_least(cls, HierarchyClass::QHierarchical)) {
    fail(errc::precondition_violated,
         "embedding target must not be q-hierarchical");
  }
  validate_schema(gadget_query(false), d);

  // The first (in head order, then variable order) pair of a head variable
  // x0 strictly dominated by an existential y0; existence is guaranteed by
  // the class checks above.
  std::optional<Variable> x0, y0;
  const std::set<Variable> exvars = existential_variables(q0);
  for (const Term& slot : q0.head_slots) {
    if (!term_is_variable(slot)) continue;
    const Variable v = std::get<Variable>(slot);
    const std::set<std::size_t> av = atom_indices_of(q0, v);
    for (const Variable& w : exvars) {
      const std::set<std::size_t> aw = atom_indices_of(q0, w);
      if (av.size() < aw.size() &&
          std::includes(aw.begin(), aw.end(), av.begin(), av.end())) {
        x0 = v;
        y0 = w;
        break;
      }
    }
    if (x0.has_value()) break;
  }
  if (!x0.has_value()) {
    fail(errc::precondition_violated, "no dominated head variable found");
  }

  // x0's atoms all contain y0, so the first atom of x0 mirrors the R-facts;
  // the strictness of the domination provides a y0-only atom for the
  // S-facts.
  std::size_t r_atom = q0.body.size(), s_atom = q0.body.size();
  for (std::size_t t = 0; t < q0.body.size(); ++t) {
    const bool has_x = atom_indices_of(q0, *x0).count(t) != 0;
    const bool has_y = atom_indices_of(q0, *y0).count(t) != 0;
    if (has_x && r_atom == q0.body.size()) r_atom = t;
    if (has_y && !has_x && s_atom == q0.body.size()) s_atom = t;
  }

  EmbedResult out;
  out.q0 = q0;
  Integer max_int = 0;
  for (const auto& [fact, endo] : d.facts) {
    for (const Constant& c : fact.tuple) {
      if (constant_is_integer(c)) max_int = std::max(max_int, std::get<Integer>(c));
    }
  }
  out.filler = Constant(max_int + 1);

  for (const Atom& atom : q0.body) {
    add_relation(out.d0, atom.relation, atom.args.size());
  }
  for (const auto& [fact, endo] : d.facts) {
    if (fact.relation == "R") {
      const Fact mirrored = atom_fact(q0.body[r_atom], *x0, *y0,
                                      fact.tuple[0], fact.tuple[1], out.filler);
      insert_fact(out.d0, mirrored, endo);
      if (endo) out.fact_map.emplace(fact, mirrored);
    } else {
      const Fact mirrored = atom_fact(q0.body[s_atom], *x0, *y0, out.filler,
                                      fact.tuple[0], out.filler);
      insert_fact(out.d0, mirrored, endo);
      if (endo) out.fact_map.emplace(fact, mirrored);
    }
  }
  // Saturate every other atom for each joining (a, b) pair, so those atoms
  // never constrain which answers survive in a coalition.
  for (const auto& [fact, endo] : d.facts) {
    if (fact.relation != "R") continue;
    if (!d.contains(Fact{"S", {fact.tuple[1]}})) continue;
    for (std::size_t t = 0; t < q0.body.size(); ++t) {
      if (t == r_atom || t == s_atom) continue;
      const Fact filler_fact = atom_fact(q0.body[t], *x0, *y0, fact.tuple[0],
                                         fact.tuple[1], out.filler);
      if (!out.d0.contains(filler_fact)) {
        insert_fact(out.d0, filler_fact, false);
      }
    }
  }
  for (std::size_t pos = 0; pos < q0.head_slots.size(); ++pos) {
    const Term& slot = q0.head_slots[pos];
    if (term_is_variable(slot) && std::get<Variable>(slot) == *x0) {
      out.head_position = pos + 1;
      break;
    }
  }
  return out;
}

ValueFunction embed_vf(const ValueFunction& tau, std::size_t head_position) {
  if (is_constant_vf(tau)) return tau;
  if (tau.position != 1) {
    fail(errc::precondition_violated,
         "the source value function reads an arity-one head");
  }
  ValueFunction out = tau;
  out.position = head_position;
  return out;
}

// --- monotone transform --------------------------------------------------

namespace {

struct PushPlan {
  Variable x;
  // Relation -> argument positions (0-based) holding x.
  std::map<std::string, std::set<std::size_t>> positions;
};

PushPlan push_plan(const ConjunctiveQuery& q, std::size_t i) {
  if (i == 0 || i > q.head_slots.size() ||
      !term_is_variable(q.head_slots[i - 1])) {
    fail(errc::out_of_range,
         "head position " + std::to_string(i) + " is not a variable slot");
  }
  if (!self_join_free(q)) {
    fail(errc::self_join,
         "the transform needs one atom per relation to locate positions");
  }
  PushPlan plan{std::get<Variable>(q.head_slots[i - 1]), {}};
  for (const Atom& atom : q.body) {
    for (std::size_t p = 0; p < atom.args.size(); ++p) {
      if (term_is_variable(atom.args[p]) &&
          std::get<Variable>(atom.args[p]) == plan.x) {
        plan.positions[atom.relation].insert(p);
      }
    }
  }
  return plan;
}

Fact push_fact(const Fact& f, const PushPlan& plan,
               const std::map<Integer, Integer>& gamma) {
  auto it = plan.positions.find(f.relation);
  if (it == plan.positions.end()) return f;
  Fact out = f;
  for (std::size_t p : it->second) {
    const Constant& c = f.tuple[p];
    if (!constant_is_integer(c)) {
      fail(errc::non_numeric_constant,
           "symbol " + to_string(c) + " at a transformed position");
    }
    auto entry = gamma.find(std::get<Integer>(c));
    if (entry == gamma.end()) {
      fail(errc::precondition_violated,
           "value " + to_string(c) + " missing from the table");
    }
    out.tuple[p] = Constant(entry->second);
  }
  return out;
}

}  // namespace

Database monotone_push(const Database& d, const ConjunctiveQuery& q,
                       std::size_t i,
                       const std::map<Integer, Integer>& gamma) {
  const PushPlan plan = push_plan(q, i);
  validate_schema(q, d);
  // The table must cover the occurring values and stay injective on them.
  std::set<Integer> occurring;
  for (const auto& [fact, endo] : d.facts) {
    auto it = plan.positions.find(fact.relation);
    if (it == plan.positions.end()) continue;
    for (std::size_t p : it->second) {
      const Constant& c = fact.tuple[p];
      if (!constant_is_integer(c)) {
        fail(errc::non_numeric_constant,
             "symbol " + to_string(c) + " at a transformed position");
      }
      occurring.insert(std::get<Integer>(c));
    }
  }
  std::set<Integer> image;
  for (const Integer& v : occurring) {
    auto entry = gamma.find(v);
    if (entry == gamma.end()) {
      fail(errc::precondition_violated,
           "value " + v.str() + " missing from the table");
    }
    if (!image.insert(entry->second).second) {
      fail(errc::non_injective_on_domain,
           "two occurring values map to " + entry->second.str());
    }
  }
  Database out;
  out.schema = d.schema;
  for (const auto& [fact, endo] : d.facts) {
    insert_fact(out, push_fact(fact, plan, gamma), endo);
  }
  return out;
}

Fact monotone_push_fact(const Fact& f, const ConjunctiveQuery& q,
                        std::size_t i,
                        const std::map<Integer, Integer>& gamma) {
  return push_fact(f, push_plan(q, i), gamma);
}

}  // namespace shapq
