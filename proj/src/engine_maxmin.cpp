#include "shapq/engine_maxmin.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "shapq/engine_boolean.hpp"
#include "shapq/errors.hpp"
#include "shapq/generic_dp.hpp"

namespace shapq {

namespace {

std::vector<Integer> add_vectors(const std::vector<Integer>& a,
                                 const std::vector<Integer>& b) {
  std::vector<Integer> out(std::max(a.size(), b.size()), Integer(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

bool body_contains(const ConjunctiveQuery& q, const std::string& relation) {
  for (const auto& atom : q.body) {
    if (atom.relation == relation) return true;
  }
  return false;
}

// Pads `extra` facts that cannot influence the subquery into every count.
void pad_table(MaxTable& t, std::size_t extra) {
  t.n += extra;
  if (t.variant_a) {
    for (auto& row : t.rows) {
      row = pad_binomial(row, extra);
      row.resize(t.n + 1, Integer(0));
    }
  } else {
    t.ne = pad_binomial(t.ne, extra);
    t.ne.resize(t.n + 1, Integer(0));
  }
}

std::size_t row_of(const std::vector<Integer>& values, const Integer& v) {
  const auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it == values.end() || *it != v) {
    fail(errc::variant_mismatch, "answer value missing from candidate set");
  }
  return static_cast<std::size_t>(it - values.begin()) + 1;
}

// Tables with a value row per candidate (variant A) follow the designated
// relation through the recursion; subqueries without it only gate whether
// the cross product is empty (variant B). `negate` runs the same maximum
// recursion on negated values, which is how Min is computed.
struct MaxPlugin {
  using Table = MaxTable;

  std::string designated;
  std::vector<Integer> values;  // global candidate set, ascending
  bool negate = false;

  Integer signed_value(const Integer& v) const { return negate ? -v : v; }

  MaxTable identity_union(bool variant_a) const {
    MaxTable t;
    t.variant_a = variant_a;
    t.n = 0;
    if (variant_a) {
      t.values = values;
      t.rows.assign(values.size() + 1, {Integer(0)});
      t.rows[0] = {Integer(1)};
    } else {
      t.ne = {Integer(0)};
    }
    return t;
  }

  Table base_case(const ConjunctiveQuery& q, const ValueFunction& tau,
                  const Database& d) const {
    const std::size_t n = count_endogenous(d);
    MaxTable t;
    t.variant_a = body_contains(q, designated);
    t.n = n;
    if (t.variant_a) {
      t.values = values;
      t.rows.assign(values.size() + 1,
                    std::vector<Integer>(n + 1, Integer(0)));
    } else {
      t.ne.assign(n + 1, Integer(0));
    }

    // Fully ground: the single potential answer is present exactly when
    // every required endogenous fact is chosen.
    const GroundBase base = ground_base(q, d);
    if (!base.possible) {
      if (t.variant_a) t.rows[0] = binomial_row(n);
      return t;
    }
    const std::size_t e = n - base.required_endo;
    if (t.variant_a) {
      if (!is_constant_vf(tau)) {
        fail(errc::variant_mismatch,
             "positional value function survived grounding");
      }
      const std::size_t row = row_of(t.values, signed_value(tau.constant));
      t.rows[0] = binomial_row(n);
      for (std::size_t k = base.required_endo; k <= n; ++k) {
        const Integer present = binomial(e, k - base.required_endo);
        t.rows[0][k] -= present;
        t.rows[row][k] = present;
      }
    } else {
      for (std::size_t k = base.required_endo; k <= n; ++k) {
        t.ne[k] = binomial(e, k - base.required_endo);
      }
    }
    return t;
  }

  Table combine_union(std::vector<Table> parts, std::size_t leftover,
                      bool /*free_root*/, const ConjunctiveQuery& q,
                      const ValueFunction&, const Database&) const {
    // The children's answer sets union to the parent's, so the maximum is
    // the maximum over the children; the size distribution convolves since
    // the value splits partition the relevant facts.
    MaxTable acc = identity_union(body_contains(q, designated));
    for (auto& part : parts) {
      if (part.variant_a != acc.variant_a) {
        fail(errc::variant_mismatch, "union mixes table variants");
      }
      if (!acc.variant_a) {
        // Nonempty iff either side is; fold the empty side.
        std::vector<Integer> empty_acc(acc.n + 1), empty_part(part.n + 1);
        for (std::size_t k = 0; k <= acc.n; ++k) {
          empty_acc[k] = binomial(acc.n, k) - acc.ne[k];
        }
        for (std::size_t k = 0; k <= part.n; ++k) {
          empty_part[k] = binomial(part.n, k) - part.ne[k];
        }
        const auto empty = convolve(empty_acc, empty_part);
        acc.n += part.n;
        acc.ne.resize(acc.n + 1);
        for (std::size_t k = 0; k <= acc.n; ++k) {
          acc.ne[k] = binomial(acc.n, k) - empty[k];
        }
        continue;
      }
      // Maximum = a iff one side reaches a and the other stays at or below
      // (counting "no answer" as below everything); "exactly a on both
      // sides" lands in the first term only.
      const std::size_t m = values.size();
      std::vector<std::vector<Integer>> cum_acc(m + 1), cum_part(m + 1);
      cum_acc[0] = acc.rows[0];
      cum_part[0] = part.rows[0];
      for (std::size_t i = 1; i <= m; ++i) {
        cum_acc[i] = add_vectors(cum_acc[i - 1], acc.rows[i]);
        cum_part[i] = add_vectors(cum_part[i - 1], part.rows[i]);
      }
      std::vector<std::vector<Integer>> out(m + 1);
      out[0] = convolve(acc.rows[0], part.rows[0]);
      for (std::size_t i = 1; i <= m; ++i) {
        out[i] = add_vectors(convolve(acc.rows[i], cum_part[i]),
                             convolve(cum_acc[i - 1], part.rows[i]));
      }
      acc.rows = std::move(out);
      acc.n += part.n;
    }
    pad_table(acc, leftover);
    return acc;
  }

  Table combine_cross(std::vector<Table> parts, std::size_t leftover,
                      const ConjunctiveQuery&, const ValueFunction&,
                      const Database&) const {
    MaxTable acc = std::move(parts.front());
    for (std::size_t p = 1; p < parts.size(); ++p) {
      MaxTable& part = parts[p];
      if (acc.variant_a && part.variant_a) {
        fail(errc::variant_mismatch,
             "two components carry the designated relation");
      }
      if (!acc.variant_a && !part.variant_a) {
        auto ne = convolve(acc.ne, part.ne);
        acc.n += part.n;
        acc.ne = std::move(ne);
        continue;
      }
      // One side carries the values: a combined answer exists with maximum
      // a iff that side reaches a and the other side is nonempty.
      const MaxTable& va = acc.variant_a ? acc : part;
      const MaxTable& vb = acc.variant_a ? part : acc;
      MaxTable out;
      out.variant_a = true;
      out.n = acc.n + part.n;
      out.values = va.values;
      out.rows.assign(va.rows.size(),
                      std::vector<Integer>(out.n + 1, Integer(0)));
      out.rows[0] = binomial_row(out.n);
      for (std::size_t i = 1; i < va.rows.size(); ++i) {
        out.rows[i] = convolve(va.rows[i], vb.ne);
        out.rows[i].resize(out.n + 1, Integer(0));
        for (std::size_t k = 0; k <= out.n; ++k) {
          out.rows[0][k] -= out.rows[i][k];
        }
      }
      acc = std::move(out);
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

MaxTable build_max_table(const ConjunctiveQuery& q, const Database& d,
                         const ValueFunction& tau, bool negate,
                         const std::string& designated_override) {
  if (!self_join_free(q)) {
    fail(errc::self_join, "query " + q.name + " has a self-join");
  }
  validate_schema(q, d);
  Database core = restrict_to_relations(d, body_relations(q));
  const std::size_t extra = count_endogenous(d) - count_endogenous(core);

  MaxPlugin plugin;
  plugin.negate = negate;
  plugin.designated =
      designated_override.empty()
          ? q.body[designated_atom_index(q, tau)].relation
          : designated_override;
  if (is_constant_vf(tau)) {
    plugin.values = {plugin.negate ? Integer(-tau.constant)
                                   : Integer(tau.constant)};
  } else {
    // Candidate values: whatever the designated relation's facts can put
    // into the slot the value function reads.
    const Atom& atom = q.body[designated_atom_index(q, tau)];
    const std::size_t column = designated_column(q, tau);
    std::set<Integer> seen;
    for (const auto& [fact, endo] : core.facts) {
      if (fact.relation != atom.relation) continue;
      seen.insert(plugin.signed_value(eval_scalar(tau, fact.tuple[column])));
    }
    plugin.values.assign(seen.begin(), seen.end());
  }

  MaxTable t = run_dp(plugin, q, tau, core);
  pad_table(t, extra);
  return t;
}

}  // namespace

MaxTable max_table(const ConjunctiveQuery& q, const Database& d,
                   const ValueFunction& tau,
                   const std::string& designated_override) {
  return build_max_table(q, d, tau, false, designated_override);
}

std::vector<Rational> sumk_maxmin(const AggregateQuery& aq, const Database& d) {
  const bool is_min = aq.alpha.kind == AggregateFunction::Kind::Min;
  if (!is_min && aq.alpha.kind != AggregateFunction::Kind::Max) {
    fail(errc::precondition_violated, "engine handles min and max only");
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
  const MaxTable t = build_max_table(aq.q, d, aq.tau, is_min, "");
  std::vector<Rational> sums(t.n + 1);
  for (std::size_t k = 0; k <= t.n; ++k) {
    Rational s = 0;
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      s += Rational(t.values[i]) * t.rows[i + 1][k];
    }
    sums[k] = is_min ? -s : s;
  }
  return sums;
}

Rational maxmin_shapley(const AggregateQuery& aq, const Database& d,
                        const Fact& f, ValueKind kind) {
  if (aq.alpha.kind != AggregateFunction::Kind::Min &&
      aq.alpha.kind != AggregateFunction::Kind::Max) {
    fail(errc::precondition_violated, "engine handles min and max only");
  }
  if (!self_join_free(aq.q)) {
    fail(errc::self_join, "query " + aq.q.name + " has a self-join");
  }
  if (!at_least(classify(aq.q), HierarchyClass::AllHierarchical)) {
    fail(errc::not_all_hierarchical,
         "min/max engine needs an all-hierarchical query: " +
             class_failure_witness(aq.q, HierarchyClass::AllHierarchical));
  }
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  const std::size_t n = count_endogenous(d);
  return value_from_sumk(kind, n, sumk_maxmin(aq, make_fact_exogenous(d, f)),
                         sumk_maxmin(aq, remove_fact(d, f)));
}

Rational max_single_relation_closed(const AggregateQuery& aq,
                                    const Database& d, const Fact& f,
                                    ValueKind kind) {
  if (aq.alpha.kind != AggregateFunction::Kind::Max) {
    fail(errc::precondition_violated, "closed form covers max only");
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
  std::size_t column = 0;  // which tuple position the value function reads
  if (!is_constant_vf(aq.tau)) {
    const auto& var = std::get<Variable>(aq.q.head_slots[aq.tau.position - 1]);
    while (column < atom.args.size() &&
           !(std::get<Variable>(atom.args[column]) == var)) {
      ++column;
    }
  }
  auto value_of = [&](const Fact& fact) {
    return is_constant_vf(aq.tau) ? aq.tau.constant
                                  : eval_scalar(aq.tau, fact.tuple[column]);
  };
  const Integer w = value_of(f);
  std::vector<Integer> others;
  for (const auto& [fact, endo] : d.facts) {
    if (!endo) {
      fail(errc::precondition_violated, "closed form needs all facts endogenous");
    }
    others.push_back(value_of(fact));
  }
  const std::size_t n = others.size();

  // f's marginal contribution is w against the empty coalition and
  // (w - a)^+ against a coalition whose maximum value is a.
  std::set<Integer> realized(others.begin(), others.end());
  Rational total = kind == ValueKind::Shapley
                       ? Rational(w) / Integer(n)
                       : Rational(w);
  for (const auto& a : realized) {
    if (a >= w) continue;
    std::size_t m_le = 0, m_lt = 0;
    for (const auto& v : others) {
      if (v <= a) ++m_le;
      if (v < a) ++m_lt;
    }
    if (kind == ValueKind::Shapley) {
      Rational weight = 0;
      for (std::size_t k = 1; k < n; ++k) {
        weight += shapley_coefficient(k, n) *
                  (binomial(m_le, k) - binomial(m_lt, k));
      }
      total += Rational(w - a) * weight;
    } else {
      total += Rational(w - a) * ((Integer(1) << m_le) - (Integer(1) << m_lt));
    }
  }
  if (kind == ValueKind::Banzhaf) {
    total /= Integer(1) << (n - 1);
  }
  return total;
}

}  // namespace shapq
