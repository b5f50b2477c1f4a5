#include "shapq/engine_avgqnt.hpp"

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "shapq/cq.hpp"
#include "shapq/errors.hpp"

namespace shapq {
namespace {

Database db_of(std::initializer_list<const char*> endo,
               std::initializer_list<const char*> exo,
               std::initializer_list<std::pair<const char*, int>> schema) {
  Database d;
  for (const auto& [name, arity] : schema) {
    add_relation(d, name, static_cast<std::size_t>(arity));
  }
  for (const char* text : endo) insert_fact(d, parse_fact(text), true);
  for (const char* text : exo) insert_fact(d, parse_fact(text), false);
  return d;
}

TEST(QuintupleTable, FrozenTwoFacts) {
  const auto t = quintuple_table(parse_cq("Q(x) :- R(x)."),
                                 db_of({"R(1)", "R(2)"}, {}, {{"R", 1}}),
                                 identity_vf(1));
  ASSERT_EQ(t.variant, QuintupleTable::Variant::Values);
  EXPECT_EQ(t.n, 2u);
  ASSERT_EQ(t.values, (std::vector<Integer>{1, 2}));
  using Key = QuintupleTable::ValueKey;
  const std::map<Key, Integer> row1{{{0, 0, 0, 0}, 1},
                                    {{1, 0, 1, 0}, 1},
                                    {{1, 0, 0, 1}, 1},
                                    {{2, 0, 1, 1}, 1}};
  const std::map<Key, Integer> row2{{{0, 0, 0, 0}, 1},
                                    {{1, 1, 0, 0}, 1},
                                    {{1, 0, 1, 0}, 1},
                                    {{2, 1, 1, 0}, 1}};
  EXPECT_EQ(t.rows[0], row1);
  EXPECT_EQ(t.rows[1], row2);
}

TEST(QuintupleTable, MatchesCountingOracle) {
  std::mt19937_64 rng(31337);
  const auto family = oracle::engine_families()[4];
  ASSERT_EQ(family.name, "avgqnt");
  for (int i = 0; i < 30; ++i) {
    auto inst = oracle::random_instance(family, rng, 7, 12);
    const auto t = quintuple_table(inst.aq.q, inst.d, inst.aq.tau);
    std::map<std::tuple<Integer, std::size_t, oracle::LtEqGt>, Integer> got;
    for (std::size_t v = 0; v < t.values.size(); ++v) {
      for (const auto& [key, cnt] : t.rows[v]) {
        const auto& [k, lt, eq, gt] = key;
        got[{t.values[v], k, oracle::LtEqGt{lt, eq, gt}}] = cnt;
      }
    }
    EXPECT_EQ(got, oracle::count_quintuple(inst.aq.q, inst.d, inst.aq.tau,
                                           t.values))
        << to_string(inst.aq.q) << " " << to_string(inst.aq.tau) << " #" << i;
  }
}

TEST(AvgQntEngine, FrozenSumk) {
  AggregateQuery aq{parse_cq("Q(x) :- R(x)."), parse_agg("avg"),
                    identity_vf(1)};
  const auto sums = sumk_avgqnt(aq, db_of({"R(0)", "R(1)"}, {}, {{"R", 1}}));
  ASSERT_EQ(sums.size(), 3u);
  EXPECT_EQ(sums[0], Rational(0));
  EXPECT_EQ(sums[1], Rational(1));        // avg{0} + avg{1}
  EXPECT_EQ(sums[2], Rational(1, 2));     // avg{0, 1}
}

TEST(AvgQntEngine, FrozenTwoFactValues) {
  const auto d = db_of({"R(1)", "R(2)"}, {}, {{"R", 1}});
  AggregateQuery avg{parse_cq("Q(x) :- R(x)."), parse_agg("avg"),
                     identity_vf(1)};
  AggregateQuery med{parse_cq("Q(x) :- R(x)."), parse_agg("median"),
                     identity_vf(1)};
  const Fact r1 = parse_fact("R(1)");
  const Fact r2 = parse_fact("R(2)");
  // Both aggregates agree on bags of size one and two.
  for (const auto& aq : {avg, med}) {
    EXPECT_EQ(avgqnt_shapley(aq, d, r1, ValueKind::Shapley), Rational(1, 4));
    EXPECT_EQ(avgqnt_shapley(aq, d, r2, ValueKind::Shapley), Rational(5, 4));
  }
}

TEST(AvgQntEngine, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(271828);
  const auto family = oracle::engine_families()[4];
  for (int i = 0; i < 50; ++i) {
    auto inst = oracle::random_instance(family, rng, 7, 12);
    for (const auto& f : endogenous_facts(inst.d)) {
      for (ValueKind kind : {ValueKind::Shapley, ValueKind::Banzhaf}) {
        EXPECT_EQ(avgqnt_shapley(inst.aq, inst.d, f, kind),
                  oracle::value(inst.aq, inst.d, f, kind))
            << to_string(inst.aq.q) << " " << to_string(inst.aq.alpha) << " "
            << to_string(inst.aq.tau) << " " << to_string(f);
      }
    }
  }
}

TEST(AvgQntEngine, BooleanQueryWithConstantValue) {
  std::mt19937_64 rng(99);
  const auto q = parse_cq("Q() :- R(x,y), S(y).");
  for (int i = 0; i < 10; ++i) {
    const Database d = oracle::random_database(q, rng, 6, 10);
    AggregateQuery aq{q, parse_agg("median"), constant_vf(-3)};
    for (const auto& f : endogenous_facts(d)) {
      EXPECT_EQ(avgqnt_shapley(aq, d, f, ValueKind::Shapley),
                oracle::value(aq, d, f, ValueKind::Shapley));
    }
  }
}

TEST(AvgQntEngine, ClosedFormMatchesEngine) {
  std::mt19937_64 rng(1123);
  const auto q = parse_cq("Q(x,y) :- R(x,y).");
  const std::vector<ValueFunction> taus{identity_vf(1), greater_than_vf(1, 2),
                                        relu_vf(2), constant_vf(4)};
  for (int i = 0; i < 30; ++i) {
    Database d;
    add_relation(d, "R", 2);
    const std::size_t n = 1 + rng() % 8;
    while (count_endogenous(d) < n) {
      Fact fact{"R", {Integer(rng() % 5), Integer(int(rng() % 7) - 3)}};
      if (!d.contains(fact)) insert_fact(d, fact, true);
    }
    AggregateQuery aq{q, parse_agg("avg"), taus[i % taus.size()]};
    for (const auto& f : endogenous_facts(d)) {
      EXPECT_EQ(avg_single_relation_closed(aq, d, f),
                avgqnt_shapley(aq, d, f, ValueKind::Shapley))
          << to_string(aq.tau) << " " << to_string(f);
    }
  }
}

TEST(AvgQntEngine, Preconditions) {
  const auto d = db_of({"R(1)", "S(1)"}, {}, {{"R", 1}, {"S", 1}});
  const Fact r1 = parse_fact("R(1)");
  try {
    AggregateQuery aq{parse_cq("Q(x) :- R(x)."), parse_agg("count"),
                      identity_vf(1)};
    avgqnt_shapley(aq, d, r1, ValueKind::Shapley);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::precondition_violated);
  }
  try {
    AggregateQuery aq{parse_cq("Q(x) :- R(x,y), S(y)."), parse_agg("avg"),
                      identity_vf(1)};
    avgqnt_shapley(aq, db_of({"R(1,1)"}, {}, {{"R", 2}, {"S", 1}}),
                   parse_fact("R(1,1)"), ValueKind::Shapley);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::not_q_hierarchical);
  }
  try {
    AggregateQuery aq{parse_cq("Q(x) :- R(x), S(x), R(y)."), parse_agg("avg"),
                      identity_vf(1)};
    avgqnt_shapley(aq, d, r1, ValueKind::Shapley);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::self_join);
  }
  try {
    AggregateQuery aq{parse_cq("Q(x) :- R(x)."), parse_agg("avg"),
                      identity_vf(1)};
    avgqnt_shapley(aq, d, parse_fact("R(9)"), ValueKind::Shapley);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::fact_not_endogenous);
  }
}

}  // namespace
}  // namespace shapq
