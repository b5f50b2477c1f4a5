#include "shapq/shapley.hpp"

#include <bit>

#include "shapq/errors.hpp"

namespace shapq {

const char* to_string(ValueKind kind) {
  return kind == ValueKind::Shapley ? "shapley" : "banzhaf";
}

ValueKind parse_value_kind(const std::string& text) {
  if (text == "shapley") return ValueKind::Shapley;
  if (text == "banzhaf") return ValueKind::Banzhaf;
  fail(errc::syntax_error, "unknown value kind '" + text + "'");
}

Rational shapley_coefficient(std::size_t k, std::size_t n) {
  if (n == 0 || k >= n) {
    fail(errc::out_of_range, "coalition size " + std::to_string(k) +
                                 " out of range for " + std::to_string(n) +
                                 " players");
  }
  return Rational(factorial(k) * factorial(n - 1 - k), factorial(n));
}

namespace {

Database with_coalition(const Database& d, const std::set<Fact>& coalition) {
  Database out;
  out.schema = d.schema;
  for (const auto& [fact, endo] : d.facts) {
    if (!endo) {
      out.facts.emplace(fact, false);
    } else if (coalition.count(fact)) {
      out.facts.emplace(fact, true);
    }
  }
  return out;
}

}  // namespace

Rational coalition_value(const AggregateQuery& aq, const Database& d,
                         const std::set<Fact>& coalition) {
  for (const auto& f : coalition) {
    if (!d.is_endogenous(f)) {
      fail(errc::fact_not_endogenous,
           "coalition member " + to_string(f) + " is not endogenous");
    }
  }
  return evaluate(aq, with_coalition(d, coalition)) -
         evaluate(aq, with_coalition(d, {}));
}

std::vector<Rational> sumk_bruteforce(const AggregateQuery& aq,
                                      const Database& d) {
  const auto endo = endogenous_facts(d);
  const std::size_t n = endo.size();
  std::vector<Rational> sums(n + 1, Rational(0));

  // Walk the subsets in Gray-code order so each step toggles one fact.
  Database work = with_coalition(d, {});
  std::vector<bool> in_subset(n, false);
  sums[0] += evaluate(aq, work);
  std::size_t size = 0;
  for (std::uint64_t i = 1; i < (std::uint64_t(1) << n); ++i) {
    const unsigned bit = std::countr_zero(i);
    if (in_subset[bit]) {
      work.facts.erase(endo[bit]);
      in_subset[bit] = false;
      --size;
    } else {
      work.facts.emplace(endo[bit], true);
      in_subset[bit] = true;
      ++size;
    }
    sums[size] += evaluate(aq, work);
  }
  return sums;
}

Rational value_from_sumk(ValueKind kind, std::size_t n_original,
                         const std::vector<Rational>& sum_with,
                         const std::vector<Rational>& sum_without) {
  const std::size_t n = n_original;
  if (n == 0 || sum_with.size() < n || sum_without.size() < n) {
    fail(errc::dimension_mismatch, "per-size sums shorter than player count");
  }
  Rational result = 0;
  if (kind == ValueKind::Shapley) {
    for (std::size_t k = 0; k < n; ++k) {
      result += shapley_coefficient(k, n) * (sum_with[k] - sum_without[k]);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      result += sum_with[k] - sum_without[k];
    }
    Integer denom = Integer(1) << (n - 1);
    result /= Rational(denom);
  }
  return result;
}

Rational shapley_via_sumk(const AggregateQuery& aq, const Database& d,
                          const Fact& f, ValueKind kind, const SumkFn& sumk) {
  const std::size_t n = count_endogenous(d);
  const Database with = make_fact_exogenous(d, f);
  const Database without = remove_fact(d, f);
  return value_from_sumk(kind, n, sumk(aq, with), sumk(aq, without));
}

namespace {

void check_cap(const Database& d, std::size_t cap) {
  const std::size_t n = count_endogenous(d);
  if (cap != 0 && n > cap) {
    fail(errc::instance_too_large,
         std::to_string(n) + " endogenous facts exceed the brute-force cap " +
             std::to_string(cap));
  }
}

}  // namespace

Rational bruteforce_shapley(const AggregateQuery& aq, const Database& d,
                            const Fact& f, ValueKind kind, std::size_t cap) {
  if (!d.is_endogenous(f)) {
    fail(errc::fact_not_endogenous, to_string(f) + " is not endogenous");
  }
  check_cap(d, cap);
  return shapley_via_sumk(aq, d, f, kind, [](const AggregateQuery& a,
                                             const Database& db) {
    return sumk_bruteforce(a, db);
  });
}

std::map<Fact, Rational> bruteforce_shapley_all(const AggregateQuery& aq,
                                                const Database& d,
                                                ValueKind kind,
                                                std::size_t cap) {
  check_cap(d, cap);
  const auto endo = endogenous_facts(d);
  const std::size_t n = endo.size();
  std::map<Fact, Rational> out;
  if (n == 0) return out;

  // One table of all 2^n coalition evaluations, filled in Gray-code order.
  std::vector<Rational> eval(std::size_t(1) << n);
  Database work = with_coalition(d, {});
  eval[0] = evaluate(aq, work);
  std::uint64_t gray = 0;
  for (std::uint64_t i = 1; i < (std::uint64_t(1) << n); ++i) {
    const std::uint64_t next = i ^ (i >> 1);
    const std::uint64_t bit_mask = gray ^ next;
    const unsigned bit = std::countr_zero(bit_mask);
    if (next & bit_mask) {
      work.facts.emplace(endo[bit], true);
    } else {
      work.facts.erase(endo[bit]);
    }
    gray = next;
    eval[gray] = evaluate(aq, work);
  }

  std::vector<Rational> coeff(n);
  for (std::size_t k = 0; k < n; ++k) {
    coeff[k] = kind == ValueKind::Shapley
                   ? shapley_coefficient(k, n)
                   : Rational(1, Integer(1) << (n - 1));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t fbit = std::uint64_t(1) << i;
    Rational value = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
      if (mask & fbit) continue;
      const std::size_t k = std::popcount(mask);
      value += coeff[k] * (eval[mask | fbit] - eval[mask]);
    }
    out.emplace(endo[i], value);
  }
  return out;
}

// --- axioms ------------------------------------------------------------

namespace {

// Builds the constant involution swapping f and g position-wise, or nothing
// when the positions force an inconsistent map.
std::optional<std::map<Constant, Constant>> swap_map(const Fact& f,
                                                     const Fact& g) {
  std::map<Constant, Constant> sigma;
  auto add = [&](const Constant& a, const Constant& b) {
    auto [it, inserted] = sigma.emplace(a, b);
    return inserted ? true : it->second == b;
  };
  for (std::size_t i = 0; i < f.tuple.size(); ++i) {
    if (!add(f.tuple[i], g.tuple[i]) || !add(g.tuple[i], f.tuple[i])) {
      return std::nullopt;
    }
  }
  return sigma;
}

Constant apply_sigma(const std::map<Constant, Constant>& sigma,
                     const Constant& c) {
  auto it = sigma.find(c);
  return it == sigma.end() ? c : it->second;
}

// True iff sigma provably exchanges f and g without disturbing anything the
// game can observe: the database (with endogenous flags), the query's
// constants, and the value of every answer.
bool is_symmetry(const AggregateQuery& aq, const Database& d,
                 const std::map<Constant, Constant>& sigma,
                 const std::vector<std::vector<Constant>>& all_answers) {
  for (const auto& [fact, endo] : d.facts) {
    Fact image{fact.relation, {}};
    image.tuple.reserve(fact.tuple.size());
    for (const auto& c : fact.tuple) image.tuple.push_back(apply_sigma(sigma, c));
    auto it = d.facts.find(image);
    if (it == d.facts.end() || it->second != endo) return false;
  }
  for (const auto& atom : aq.q.body) {
    for (const auto& arg : atom.args) {
      if (const auto* c = std::get_if<Constant>(&arg)) {
        if (!(apply_sigma(sigma, *c) == *c)) return false;
      }
    }
  }
  for (const auto& slot : aq.q.head_slots) {
    if (const auto* c = std::get_if<Constant>(&slot)) {
      if (!(apply_sigma(sigma, *c) == *c)) return false;
    }
  }
  for (const auto& t : all_answers) {
    std::vector<Constant> image;
    image.reserve(t.size());
    for (const auto& c : t) image.push_back(apply_sigma(sigma, c));
    if (eval_tuple(aq.tau, image) != eval_tuple(aq.tau, t)) return false;
  }
  return true;
}

}  // namespace

AxiomReport check_axioms(const AggregateQuery& aq, const Database& d,
                         const std::map<Fact, Rational>& values,
                         ValueKind kind) {
  const auto endo = endogenous_facts(d);
  if (values.size() != endo.size()) {
    fail(errc::precondition_violated,
         "axiom check needs a value for every endogenous fact");
  }
  for (const auto& f : endo) {
    if (!values.count(f)) {
      fail(errc::precondition_violated,
           "axiom check missing value for " + to_string(f));
    }
  }

  AxiomReport report;
  if (kind == ValueKind::Shapley) {
    report.efficiency_checked = true;
    for (const auto& [fact, value] : values) report.total += value;
    report.expected_total =
        evaluate(aq, d) - evaluate(aq, with_coalition(d, {}));
    report.efficiency_ok = report.total == report.expected_total;
  }

  for (const auto& f : endo) {
    if (!exists_hom_with_fact(aq.q, d, f) && values.at(f) != 0) {
      report.null_player_failures.push_back(f);
    }
  }

  const auto all_answers = answers(aq.q, d);
  for (std::size_t i = 0; i < endo.size(); ++i) {
    for (std::size_t j = i + 1; j < endo.size(); ++j) {
      if (endo[i].relation != endo[j].relation) continue;
      auto sigma = swap_map(endo[i], endo[j]);
      if (!sigma || !is_symmetry(aq, d, *sigma, all_answers)) continue;
      ++report.symmetric_pairs_checked;
      if (values.at(endo[i]) != values.at(endo[j])) {
        report.symmetry_failures.emplace_back(endo[i], endo[j]);
      }
    }
  }
  return report;
}

}  // namespace shapq
