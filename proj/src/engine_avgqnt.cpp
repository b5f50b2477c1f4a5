#include "shapq/engine_avgqnt.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "shapq/engine_boolean.hpp"
#include "shapq/errors.hpp"
#include "shapq/generic_dp.hpp"

namespace shapq {

namespace {

using Variant = QuintupleTable::Variant;
using ValueKey = QuintupleTable::ValueKey;
using CountMap = std::map<std::pair<std::size_t, Integer>, Integer>;
using ValueMap = std::map<ValueKey, Integer>;

bool body_contains(const ConjunctiveQuery& q, const std::string& relation) {
  for (const auto& atom : q.body) {
    if (atom.relation == relation) return true;
  }
  return false;
}

bool head_has_live_variable(const ConjunctiveQuery& q) {
  for (const auto& slot : q.head_slots) {
    if (std::holds_alternative<Variable>(slot)) return true;
  }
  return false;
}

// Spreads `extra` facts that cannot influence the subquery into the size
// coordinate of every cell.
void pad_table(QuintupleTable& t, std::size_t extra) {
  const std::size_t old_n = t.n;
  t.n += extra;
  switch (t.variant) {
    case Variant::Values:
      for (auto& row : t.rows) {
        ValueMap padded;
        for (const auto& [key, cnt] : row) {
          const auto& [k, lt, eq, gt] = key;
          for (std::size_t j = 0; j <= extra; ++j) {
            padded[{k + j, lt, eq, gt}] += cnt * binomial(extra, j);
          }
        }
        row = std::move(padded);
      }
      break;
    case Variant::Counts: {
      CountMap padded;
      for (const auto& [key, cnt] : t.counts) {
        for (std::size_t j = 0; j <= extra; ++j) {
          padded[{key.first + j, key.second}] += cnt * binomial(extra, j);
        }
      }
      t.counts = std::move(padded);
      break;
    }
    case Variant::Existence:
      t.p0 = pad_binomial(t.p0, extra);
      t.p0.resize(t.n + 1, Integer(0));
      break;
  }
  (void)old_n;
}

// Existence tables have at most one potential answer, so their counts are
// recoverable exactly.
CountMap to_counts(const QuintupleTable& t) {
  if (t.variant == Variant::Counts) return t.counts;
  if (t.variant != Variant::Existence) {
    fail(errc::variant_mismatch, "cannot view a value table as counts");
  }
  CountMap out;
  for (std::size_t k = 0; k <= t.n; ++k) {
    if (t.p0[k] != 0) out[{k, Integer(0)}] = t.p0[k];
    const Integer present = binomial(t.n, k) - t.p0[k];
    if (present != 0) out[{k, Integer(1)}] = present;
  }
  return out;
}

// Answer counts multiply across a cross product.
CountMap cross_counts(const CountMap& a, const CountMap& b) {
  CountMap out;
  for (const auto& [ka, ca] : a) {
    for (const auto& [kb, cb] : b) {
      out[{ka.first + kb.first, ka.second * kb.second}] += ca * cb;
    }
  }
  return out;
}

// Answer counts add across a union split on a free root (the children's
// answer sets are disjoint).
CountMap union_counts(const CountMap& a, const CountMap& b) {
  CountMap out;
  for (const auto& [ka, ca] : a) {
    for (const auto& [kb, cb] : b) {
      out[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
    }
  }
  return out;
}

struct QuintuplePlugin {
  using Table = QuintupleTable;

  std::string designated;
  std::vector<Integer> values;  // global candidate set, ascending

  Variant variant_of(const ConjunctiveQuery& q) const {
    if (body_contains(q, designated)) return Variant::Values;
    return head_has_live_variable(q) ? Variant::Counts : Variant::Existence;
  }

  // The split pattern of a single answer of value c against candidate a.
  static std::tuple<Integer, Integer, Integer> pattern(const Integer& c,
                                                       const Integer& a) {
    if (c < a) return {1, 0, 0};
    if (c == a) return {0, 1, 0};
    return {0, 0, 1};
  }

  Table base_case(const ConjunctiveQuery& q, const ValueFunction& tau,
                  const Database& d) const {
    const std::size_t n = count_endogenous(d);
    const GroundBase base = ground_base(q, d);
    QuintupleTable t;
    t.variant = variant_of(q);
    t.n = n;
    if (t.variant == Variant::Existence) {
      t.p0 = binomial_row(n);
      if (base.possible) {
        for (std::size_t k = base.required_endo; k <= n; ++k) {
          t.p0[k] -= binomial(n - base.required_endo, k - base.required_endo);
        }
      }
      return t;
    }
    // Fully ground, so the designated relation is in the body and the value
    // function has collapsed to the single answer's value.
    if (!is_constant_vf(tau)) {
      fail(errc::variant_mismatch,
           "positional value function survived grounding");
    }
    t.values = values;
    t.rows.assign(values.size(), {});
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto [lt, eq, gt] = pattern(tau.constant, values[i]);
      for (std::size_t k = 0; k <= n; ++k) {
        Integer present = 0;
        if (base.possible && k >= base.required_endo) {
          present = binomial(n - base.required_endo, k - base.required_endo);
        }
        const Integer absent = binomial(n, k) - present;
        if (present != 0) t.rows[i][{k, lt, eq, gt}] += present;
        if (absent != 0) t.rows[i][{k, Integer(0), Integer(0), Integer(0)}] +=
            absent;
      }
    }
    return t;
  }

  Table combine_union(std::vector<Table> parts, std::size_t leftover,
                      bool free_root, const ConjunctiveQuery& q,
                      const ValueFunction& tau, const Database&) const {
    QuintupleTable acc;
    acc.variant = variant_of(q);
    acc.n = 0;
    switch (acc.variant) {
      case Variant::Values: {
        if (free_root) {
          // Disjoint answer sets: the split against each candidate adds up,
          // sizes convolve.
          acc.values = values;
          acc.rows.assign(values.size(),
                          {{{0, Integer(0), Integer(0), Integer(0)}, 1}});
          for (const auto& part : parts) {
            if (part.variant != Variant::Values) {
              fail(errc::variant_mismatch, "union mixes table variants");
            }
            for (std::size_t i = 0; i < values.size(); ++i) {
              ValueMap next;
              for (const auto& [ka, ca] : acc.rows[i]) {
                for (const auto& [kb, cb] : part.rows[i]) {
                  next[{std::get<0>(ka) + std::get<0>(kb),
                        std::get<1>(ka) + std::get<1>(kb),
                        std::get<2>(ka) + std::get<2>(kb),
                        std::get<3>(ka) + std::get<3>(kb)}] += ca * cb;
                }
              }
              acc.rows[i] = std::move(next);
            }
            acc.n += part.n;
          }
          break;
        }
        // Existential root: the head must be fully pinned, so the node has
        // at most one potential answer whose value the collapsed value
        // function names; only existence needs combining.
        if (!is_constant_vf(tau) || head_has_live_variable(q)) {
          fail(errc::not_q_hierarchical,
               "existential root below an unpinned head: " + to_string(q));
        }
        std::vector<Integer> empty{Integer(1)};
        for (const auto& part : parts) {
          if (part.variant != Variant::Values) {
            fail(errc::variant_mismatch, "union mixes table variants");
          }
          std::vector<Integer> e(part.n + 1, Integer(0));
          if (values.empty()) {
            e = binomial_row(part.n);
          } else {
            for (std::size_t k = 0; k <= part.n; ++k) {
              const auto it = part.rows[0].find(
                  {k, Integer(0), Integer(0), Integer(0)});
              if (it != part.rows[0].end()) e[k] = it->second;
            }
          }
          empty = convolve(empty, e);
          acc.n += part.n;
        }
        acc.values = values;
        acc.rows.assign(values.size(), {});
        for (std::size_t i = 0; i < values.size(); ++i) {
          const auto [lt, eq, gt] = pattern(tau.constant, values[i]);
          for (std::size_t k = 0; k <= acc.n; ++k) {
            const Integer present = binomial(acc.n, k) - empty[k];
            if (present != 0) acc.rows[i][{k, lt, eq, gt}] += present;
            if (empty[k] != 0) {
              acc.rows[i][{k, Integer(0), Integer(0), Integer(0)}] += empty[k];
            }
          }
        }
        break;
      }
      case Variant::Counts: {
        if (!free_root) {
          fail(errc::not_q_hierarchical,
               "existential root below an unpinned head: " + to_string(q));
        }
        acc.counts = {{{0, Integer(0)}, 1}};
        for (const auto& part : parts) {
          acc.counts = union_counts(acc.counts, to_counts(part));
          acc.n += part.n;
        }
        break;
      }
      case Variant::Existence: {
        // Only emptiness matters, and the value splits partition the facts,
        // so the no-answer counts convolve for either root kind.
        acc.p0 = {Integer(1)};
        for (const auto& part : parts) {
          if (part.variant != Variant::Existence) {
            fail(errc::variant_mismatch, "union mixes table variants");
          }
          acc.p0 = convolve(acc.p0, part.p0);
          acc.n += part.n;
        }
        break;
      }
    }
    pad_table(acc, leftover);
    return acc;
  }

  Table combine_cross(std::vector<Table> parts, std::size_t leftover,
                      const ConjunctiveQuery& q, const ValueFunction&,
                      const Database&) const {
    const Variant target = variant_of(q);
    QuintupleTable acc;
    if (target == Variant::Values) {
      // Exactly one component carries the designated relation; the others
      // multiply every answer of that side by their own answer count.
      std::size_t value_part = parts.size();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].variant == Variant::Values) {
          if (value_part != parts.size()) {
            fail(errc::variant_mismatch,
                 "two components carry the designated relation");
          }
          value_part = i;
        }
      }
      if (value_part == parts.size()) {
        fail(errc::variant_mismatch,
             "no component carries the designated relation");
      }
      acc = std::move(parts[value_part]);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i == value_part) continue;
        const CountMap other = to_counts(parts[i]);
        for (std::size_t r = 0; r < acc.rows.size(); ++r) {
          ValueMap next;
          for (const auto& [key, ca] : acc.rows[r]) {
            const auto& [k, lt, eq, gt] = key;
            const bool rho_empty = lt == 0 && eq == 0 && gt == 0;
            for (const auto& [kb, cb] : other) {
              const Integer& m = kb.second;
              if (rho_empty || m == 0) {
                next[{k + kb.first, Integer(0), Integer(0), Integer(0)}] +=
                    ca * cb;
              } else {
                next[{k + kb.first, lt * m, eq * m, gt * m}] += ca * cb;
              }
            }
          }
          acc.rows[r] = std::move(next);
        }
        acc.n += parts[i].n;
      }
    } else {
      acc.variant = Variant::Counts;
      acc.n = parts.front().n;
      acc.counts = to_counts(parts.front());
      for (std::size_t i = 1; i < parts.size(); ++i) {
        acc.counts = cross_counts(acc.counts, to_counts(parts[i]));
        acc.n += parts[i].n;
      }
      if (target == Variant::Existence) {
        QuintupleTable ex;
        ex.variant = Variant::Existence;
        ex.n = acc.n;
        ex.p0.assign(acc.n + 1, Integer(0));
        for (const auto& [key, cnt] : acc.counts) {
          if (key.second == 0) ex.p0[key.first] = cnt;
        }
        acc = std::move(ex);
      }
    }
    pad_table(acc, leftover);
    return acc;
  }

  ValueFunction tau_for_component(const ConjunctiveQuery& q,
                                  const ConjunctiveQuery& comp,
                                  const ValueFunction& tau) const {
    if (body_contains(comp, designated)) return tau_project(q, comp, tau);
    return constant_vf(0);
  }
};

// --- lean table for Avg --------------------------------------------------

// Avg needs no per-candidate rank splits: per subset size and answer count
// it suffices to track how many subsets produce that count (cnt) and the
// total value of the produced answers summed over those subsets (wsum);
// sum_k is then the sum of wsum/count. The cell space is O(n * answers)
// where the quintuple table pays an extra factor per candidate value and
// rank pattern, so this table stays small on databases with hundreds of
// endogenous facts.
struct AvgTable {
  // (subset size, number of answers) -> (#subsets, summed value total).
  using Cells = std::map<std::pair<std::size_t, Integer>,
                         std::pair<Integer, Integer>>;

  Variant variant = Variant::Values;
  std::size_t n = 0;
  Cells cells;              // Values
  CountMap counts;          // Counts
  std::vector<Integer> p0;  // Existence
};

CountMap to_counts(const AvgTable& t) {
  if (t.variant == Variant::Counts) return t.counts;
  if (t.variant != Variant::Existence) {
    fail(errc::variant_mismatch, "cannot view a value table as counts");
  }
  CountMap out;
  for (std::size_t k = 0; k <= t.n; ++k) {
    if (t.p0[k] != 0) out[{k, Integer(0)}] = t.p0[k];
    const Integer present = binomial(t.n, k) - t.p0[k];
    if (present != 0) out[{k, Integer(1)}] = present;
  }
  return out;
}

void pad_table(AvgTable& t, std::size_t extra) {
  t.n += extra;
  switch (t.variant) {
    case Variant::Values: {
      AvgTable::Cells padded;
      for (const auto& [key, cell] : t.cells) {
        for (std::size_t j = 0; j <= extra; ++j) {
          auto& out = padded[{key.first + j, key.second}];
          const Integer ways = binomial(extra, j);
          out.first += cell.first * ways;
          out.second += cell.second * ways;
        }
      }
      t.cells = std::move(padded);
      break;
    }
    case Variant::Counts: {
      CountMap padded;
      for (const auto& [key, cnt] : t.counts) {
        for (std::size_t j = 0; j <= extra; ++j) {
          padded[{key.first + j, key.second}] += cnt * binomial(extra, j);
        }
      }
      t.counts = std::move(padded);
      break;
    }
    case Variant::Existence:
      t.p0 = pad_binomial(t.p0, extra);
      t.p0.resize(t.n + 1, Integer(0));
      break;
  }
}

struct AvgPlugin {
  using Table = AvgTable;

  std::string designated;

  Variant variant_of(const ConjunctiveQuery& q) const {
    if (body_contains(q, designated)) return Variant::Values;
    return head_has_live_variable(q) ? Variant::Counts : Variant::Existence;
  }

  Table base_case(const ConjunctiveQuery& q, const ValueFunction& tau,
                  const Database& d) const {
    const std::size_t n = count_endogenous(d);
    const GroundBase base = ground_base(q, d);
    AvgTable t;
    t.variant = variant_of(q);
    t.n = n;
    if (t.variant == Variant::Existence) {
      t.p0 = binomial_row(n);
      if (base.possible) {
        for (std::size_t k = base.required_endo; k <= n; ++k) {
          t.p0[k] -= binomial(n - base.required_endo, k - base.required_endo);
        }
      }
      return t;
    }
    if (!is_constant_vf(tau)) {
      fail(errc::variant_mismatch,
           "positional value function survived grounding");
    }
    for (std::size_t k = 0; k <= n; ++k) {
      Integer present = 0;
      if (base.possible && k >= base.required_endo) {
        present = binomial(n - base.required_endo, k - base.required_endo);
      }
      const Integer absent = binomial(n, k) - present;
      if (present != 0) {
        auto& cell = t.cells[{k, Integer(1)}];
        cell.first += present;
        cell.second += tau.constant * present;
      }
      if (absent != 0) t.cells[{k, Integer(0)}].first += absent;
    }
    return t;
  }

  Table combine_union(std::vector<Table> parts, std::size_t leftover,
                      bool free_root, const ConjunctiveQuery& q,
                      const ValueFunction& tau, const Database&) const {
    AvgTable acc;
    acc.variant = variant_of(q);
    acc.n = 0;
    switch (acc.variant) {
      case Variant::Values: {
        if (free_root) {
          // Disjoint answer sets: counts convolve, value totals add.
          acc.cells = {{{0, Integer(0)}, {Integer(1), Integer(0)}}};
          for (const auto& part : parts) {
            if (part.variant != Variant::Values) {
              fail(errc::variant_mismatch, "union mixes table variants");
            }
            AvgTable::Cells next;
            for (const auto& [ka, cellA] : acc.cells) {
              for (const auto& [kb, cellB] : part.cells) {
                auto& out = next[{ka.first + kb.first, ka.second + kb.second}];
                out.first += cellA.first * cellB.first;
                out.second += cellA.first * cellB.second +
                              cellB.first * cellA.second;
              }
            }
            acc.cells = std::move(next);
            acc.n += part.n;
          }
          break;
        }
        // Existential root below a fully pinned head: one potential answer
        // whose value the collapsed value function names.
        if (!is_constant_vf(tau) || head_has_live_variable(q)) {
          fail(errc::not_q_hierarchical,
               "existential root below an unpinned head: " + to_string(q));
        }
        std::vector<Integer> empty{Integer(1)};
        for (const auto& part : parts) {
          if (part.variant != Variant::Values) {
            fail(errc::variant_mismatch, "union mixes table variants");
          }
          std::vector<Integer> e(part.n + 1, Integer(0));
          for (std::size_t k = 0; k <= part.n; ++k) {
            const auto it = part.cells.find({k, Integer(0)});
            if (it != part.cells.end()) e[k] = it->second.first;
          }
          empty = convolve(empty, e);
          acc.n += part.n;
        }
        for (std::size_t k = 0; k <= acc.n; ++k) {
          const Integer present = binomial(acc.n, k) - empty[k];
          if (present != 0) {
            auto& cell = acc.cells[{k, Integer(1)}];
            cell.first += present;
            cell.second += tau.constant * present;
          }
          if (empty[k] != 0) acc.cells[{k, Integer(0)}].first += empty[k];
        }
        break;
      }
      case Variant::Counts: {
        if (!free_root) {
          fail(errc::not_q_hierarchical,
               "existential root below an unpinned head: " + to_string(q));
        }
        acc.counts = {{{0, Integer(0)}, 1}};
        for (const auto& part : parts) {
          acc.counts = union_counts(acc.counts, to_counts(part));
          acc.n += part.n;
        }
        break;
      }
      case Variant::Existence: {
        acc.p0 = {Integer(1)};
        for (const auto& part : parts) {
          if (part.variant != Variant::Existence) {
            fail(errc::variant_mismatch, "union mixes table variants");
          }
          acc.p0 = convolve(acc.p0, part.p0);
          acc.n += part.n;
        }
        break;
      }
    }
    pad_table(acc, leftover);
    return acc;
  }

  Table combine_cross(std::vector<Table> parts, std::size_t leftover,
                      const ConjunctiveQuery& q, const ValueFunction&,
                      const Database&) const {
    const Variant target = variant_of(q);
    AvgTable acc;
    if (target == Variant::Values) {
      // The other components multiply every answer of the designated side,
      // scaling both the answer count and the value total.
      std::size_t value_part = parts.size();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].variant == Variant::Values) {
          if (value_part != parts.size()) {
            fail(errc::variant_mismatch,
                 "two components carry the designated relation");
          }
          value_part = i;
        }
      }
      if (value_part == parts.size()) {
        fail(errc::variant_mismatch,
             "no component carries the designated relation");
      }
      acc = std::move(parts[value_part]);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i == value_part) continue;
        const CountMap other = to_counts(parts[i]);
        AvgTable::Cells next;
        for (const auto& [key, cell] : acc.cells) {
          for (const auto& [kb, cb] : other) {
            const Integer& m = kb.second;
            auto& out = next[{key.first + kb.first, key.second * m}];
            out.first += cell.first * cb;
            out.second += cell.second * m * cb;
          }
        }
        acc.cells = std::move(next);
        acc.n += parts[i].n;
      }
    } else {
      acc.variant = Variant::Counts;
      acc.n = parts.front().n;
      acc.counts = to_counts(parts.front());
      for (std::size_t i = 1; i < parts.size(); ++i) {
        acc.counts = cross_counts(acc.counts, to_counts(parts[i]));
        acc.n += parts[i].n;
      }
      if (target == Variant::Existence) {
        AvgTable ex;
        ex.variant = Variant::Existence;
        ex.n = acc.n;
        ex.p0.assign(acc.n + 1, Integer(0));
        for (const auto& [key, cnt] : acc.counts) {
          if (key.second == 0) ex.p0[key.first] = cnt;
        }
        acc = std::move(ex);
      }
    }
    pad_table(acc, leftover);
    return acc;
  }

  ValueFunction tau_for_component(const ConjunctiveQuery& q,
                                  const ConjunctiveQuery& comp,
                                  const ValueFunction& tau) const {
    if (body_contains(comp, designated)) return tau_project(q, comp, tau);
    return constant_vf(0);
  }
};

std::vector<Rational> sumk_avg_lean(const AggregateQuery& aq,
                                    const Database& d) {
  if (!self_join_free(aq.q)) {
    fail(errc::self_join, "query " + aq.q.name + " has a self-join");
  }
  validate_schema(aq.q, d);
  Database core = restrict_to_relations(d, body_relations(aq.q));
  const std::size_t extra = count_endogenous(d) - count_endogenous(core);

  AvgPlugin plugin;
  plugin.designated = aq.q.body[designated_atom_index(aq.q, aq.tau)].relation;
  AvgTable t = run_dp(plugin, aq.q, aq.tau, core);
  if (t.variant != Variant::Values) {
    fail(errc::variant_mismatch, "top-level table lost its value cells");
  }
  pad_table(t, extra);

  std::vector<Rational> sums(t.n + 1);
  for (const auto& [key, cell] : t.cells) {
    if (key.second == 0) continue;
    sums[key.first] += Rational(cell.second) / Rational(key.second);
  }
  return sums;
}

QuintupleTable build_quintuple_table(const ConjunctiveQuery& q,
                                     const Database& d,
                                     const ValueFunction& tau) {
  if (!self_join_free(q)) {
    fail(errc::self_join, "query " + q.name + " has a self-join");
  }
  validate_schema(q, d);
  Database core = restrict_to_relations(d, body_relations(q));
  const std::size_t extra = count_endogenous(d) - count_endogenous(core);

  QuintuplePlugin plugin;
  plugin.designated = q.body[designated_atom_index(q, tau)].relation;
  if (is_constant_vf(tau)) {
    plugin.values = {tau.constant};
  } else {
    const std::size_t column = designated_column(q, tau);
    std::set<Integer> seen;
    for (const auto& [fact, endo] : core.facts) {
      if (fact.relation != plugin.designated) continue;
      seen.insert(eval_scalar(tau, fact.tuple[column]));
    }
    plugin.values.assign(seen.begin(), seen.end());
  }

  QuintupleTable t = run_dp(plugin, q, tau, core);
  if (t.variant != Variant::Values) {
    fail(errc::variant_mismatch, "top-level table lost its value rows");
  }
  pad_table(t, extra);
  return t;
}

// Per-cell weight of candidate a in the aggregate of a bag splitting as
// (lt, eq, gt) around a.
Rational cell_weight(const AggregateFunction& alpha, const Integer& lt,
                     const Integer& eq, const Integer& gt) {
  const Integer s = lt + eq + gt;
  if (s == 0 || eq == 0) return 0;
  if (alpha.kind == AggregateFunction::Kind::Avg) {
    return Rational(eq) / Rational(s);
  }
  // Quantile: a is picked when its occurrence range covers the selected
  // order statistics (same two indices the direct evaluator averages).
  const Rational qs = alpha.quantile * Rational(s);
  const Integer num = numerator(qs);
  const Integer den = denominator(qs);
  const Integer lo = (num + den - 1) / den;  // ceil(q*s)
  const Integer hi = num / den + 1;          // floor(q*s + 1)
  Rational weight = 0;
  if (lt < lo && lo <= lt + eq) weight += Rational(1, 2);
  if (lt < hi && hi <= lt + eq) weight += Rational(1, 2);
  return weight;
}

}  // namespace

QuintupleTable quintuple_table(const ConjunctiveQuery& q, const Database& d,
                               const ValueFunction& tau) {
  return build_quintuple_table(q, d, tau);
}

std::vector<Rational> sumk_avgqnt(const AggregateQuery& aq, const Database& d) {
  if (aq.alpha.kind != AggregateFunction::Kind::Avg &&
      aq.alpha.kind != AggregateFunction::Kind::Quantile) {
    fail(errc::precondition_violated, "engine handles avg and quantile only");
  }
  if (is_constant_vf(aq.tau)) {
    // All answers share one value, so the aggregate is that value times
    // query existence.
    ConjunctiveQuery existence = aq.q;
    existence.head_slots.clear();
    const PTable t = p0_table(existence, d);
    std::vector<Rational> sums(t.n + 1);
    for (std::size_t k = 0; k <= t.n; ++k) {
      sums[k] = Rational(aq.tau.constant) * (binomial(t.n, k) - t.p0[k]);
    }
    return sums;
  }
  if (aq.alpha.kind == AggregateFunction::Kind::Avg) {
    // Avg is linear in the answer values, so the lean table suffices;
    // quantile keeps the per-candidate rank splits.
    return sumk_avg_lean(aq, d);
  }
  const QuintupleTable t = build_quintuple_table(aq.q, d, aq.tau);
  std::vector<Rational> sums(t.n + 1);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    for (const auto& [key, cnt] : t.rows[i]) {
      const auto& [k, lt, eq, gt] = key;
      const Rational w = cell_weight(aq.alpha, lt, eq, gt);
      if (w != 0) sums[k] += Rational(t.values[i]) * w * cnt;
    }
  }
  return sums;
}

Rational avgqnt_shapley(const AggregateQuery& aq, const Database& d,
                        const Fact& f, ValueKind kind) {
  if (aq.alpha.kind != AggregateFunction::Kind::Avg &&
      aq.alpha.kind != AggregateFunction::Kind::Quantile) {
    fail(errc::precondition_violated, "engine handles avg and quantile only");
  }
  if (!self_join_free(aq.q)) {
    fail(errc::self_join, "query " + aq.q.name + " has a self-join");
  }
  if (!is_boolean(aq.q) &&
      !at_least(classify(aq.q), HierarchyClass::QHierarchical)) {
    fail(errc::not_q_hierarchical,
         "avg/quantile engine needs a q-hierarchical query: " +
             class_failure_witness(aq.q, HierarchyClass::QHierarchical));
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  const std::size_t n = count_endogenous(d);
  return value_from_sumk(kind, n, sumk_avgqnt(aq, make_fact_exogenous(d, f)),
                         sumk_avgqnt(aq, remove_fact(d, f)));
}

Rational avg_single_relation_closed(const AggregateQuery& aq,
                                    const Database& d, const Fact& f) {
  if (aq.alpha.kind != AggregateFunction::Kind::Avg) {
    fail(errc::precondition_violated, "closed form covers avg only");
  }
  if (aq.q.body.size() != 1) {
    fail(errc::precondition_violated, "closed form needs a single atom");
  }
  const Atom& atom = aq.q.body[0];
  std::set<Variable> seen;
  for (const auto& arg : atom.args) {
    const auto* v = std::get_if<Variable>(&arg);
    if (!v || !seen.insert(*v).second) {
      fail(errc::precondition_violated,
           "closed form needs pairwise-distinct variable arguments");
    }
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  const std::size_t column =
      is_constant_vf(aq.tau) ? 0 : designated_column(aq.q, aq.tau);
  auto value_of = [&](const Fact& fact) {
    return is_constant_vf(aq.tau) ? aq.tau.constant
                                  : eval_scalar(aq.tau, fact.tuple[column]);
  };
  Integer w = value_of(f);
  Integer rest = 0;
  std::size_t n = 0;
  for (const auto& [fact, endo] : d.facts) {
    if (!endo) {
      fail(errc::precondition_violated, "closed form needs all facts endogenous");
    }
    ++n;
    if (!(fact == f)) rest += value_of(fact);
  }
  if (n == 1) return Rational(w);
  Rational harmonic = 0;
  for (std::size_t i = 1; i <= n; ++i) harmonic += Rational(1, Integer(i));
  // f contributes its own value through the coalitions it joins and dilutes
  // the others' values by growing the denominator.
  return harmonic / Integer(n) * w -
         (harmonic - 1) / (Integer(n) * Integer(n - 1)) * rest;
}

}  // namespace shapq
