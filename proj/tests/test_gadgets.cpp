#include "shapq/gadgets.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "oracle.hpp"
#include "shapq/aggregates.hpp"
#include "shapq/cq.hpp"
#include "shapq/errors.hpp"
#include "shapq/linalg.hpp"
#include "shapq/shapley.hpp"

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

// The database holding the exogenous facts plus the coalition.
Database coalition_db(const Database& d, const std::set<Fact>& keep) {
  Database out;
  out.schema = d.schema;
  for (const auto& [fact, endo] : d.facts) {
    if (!endo || keep.count(fact) != 0) insert_fact(out, fact, false);
  }
  return out;
}

Rational eval_agg(const AggregateQuery& aq, const Database& db) {
  return aggregate(aq.alpha, value_bag(aq.q, db, aq.tau));
}

Rational eval_coalition(const GadgetInput& in, const std::set<Fact>& keep) {
  return eval_agg(in.aq, coalition_db(in.d, keep));
}

ShapleyFn bruteforce() {
  return [](const AggregateQuery& aq, const Database& d, const Fact& f) {
    return bruteforce_shapley(aq, d, f, ValueKind::Shapley);
  };
}

std::vector<std::vector<Rational>> as_rationals(
    const std::vector<std::vector<Integer>>& z) {
  std::vector<std::vector<Rational>> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i].assign(z[i].begin(), z[i].end());
  }
  return out;
}

TEST(Linalg, SolveRecoversAHandComputedSystem) {
  Matrix hilbert(2, 2);
  hilbert.at(0, 0) = 1;
  hilbert.at(0, 1) = Rational(1, 2);
  hilbert.at(1, 0) = Rational(1, 2);
  hilbert.at(1, 1) = Rational(1, 3);
  const auto x = exact_solve(hilbert, {1, 0});
  EXPECT_EQ(x, (std::vector<Rational>{4, -6}));
  EXPECT_EQ(multiply(hilbert, x), (std::vector<Rational>{1, 0}));
}

TEST(Linalg, KroneckerAndMultiplyCompose) {
  Matrix a(2, 2), b(2, 2);
  a.at(0, 0) = 1;
  a.at(0, 1) = 2;
  a.at(1, 0) = 3;
  a.at(1, 1) = 4;
  b.at(0, 1) = 1;
  b.at(1, 0) = 1;
  b.at(1, 1) = 1;
  const Matrix k = kronecker(a, b);
  ASSERT_EQ(k.rows, 4u);
  ASSERT_EQ(k.cols, 4u);
  // (a (x) b)(x (x) y) = (a x) (x) (b y).
  EXPECT_EQ(multiply(k, {2, 3, -2, -3}),
            (std::vector<Rational>{-3, -5, -3, -5}));
  EXPECT_EQ(multiply(identity_matrix(3), {5, -7, 0}),
            (std::vector<Rational>{5, -7, 0}));
}

TEST(Linalg, SingularAndShapeErrors) {
  Matrix singular(2, 2);
  singular.at(0, 0) = 1;
  singular.at(0, 1) = 2;
  singular.at(1, 0) = 2;
  singular.at(1, 1) = 4;
  try {
    exact_solve(singular, {1, 1});
    FAIL() << "expected SingularMatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::singular_matrix);
  }
  try {
    exact_solve(Matrix(2, 3), {1, 1});
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::dimension_mismatch);
  }
  try {
    multiply(identity_matrix(2), {1, 2, 3});
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::dimension_mismatch);
  }
}

// The running example: a universe of four elements and the three sets
// {1,2}, {2,3}, {3,4}. Exactly two subcollections cover the universe.
SetCoverInstance running_example() {
  return {4, {{1, 2}, {2, 3}, {3, 4}}};
}

TEST(CoverCounts, DirectCountsMatchHandEnumeration) {
  const auto tiny = cover_counts_direct({1, {{1}}});
  EXPECT_EQ(tiny[0][0], 1);
  EXPECT_EQ(tiny[1][1], 1);
  EXPECT_EQ(tiny[1][0], 0);
  EXPECT_EQ(count_set_covers_direct({1, {{1}}}), 1);

  const auto z = cover_counts_direct(running_example());
  EXPECT_EQ(z[0][0], 1);  // the empty subcollection
  EXPECT_EQ(z[2][1], 3);  // each single set covers two elements
  EXPECT_EQ(z[3][2], 2);  // {Y1,Y2} and {Y2,Y3}
  EXPECT_EQ(z[4][2], 1);  // {Y1,Y3}
  EXPECT_EQ(z[4][3], 1);  // the full collection
  Integer total = 0;
  for (const auto& row : z) {
    for (const Integer& c : row) total += c;
  }
  EXPECT_EQ(total, 8);  // 2^3 subcollections
  EXPECT_EQ(count_set_covers_direct(running_example()), 2);
}

TEST(CoverCounts, InstanceValidation) {
  try {
    cover_counts_direct({3, {}});
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
  try {
    cover_counts_direct({3, {{1}, {}}});
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
  try {
    cover_counts_direct({3, {{1, 4}}});
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
  try {
    setcover_game_shapley(running_example(), 4);
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
}

TEST(CoverCounts, GameShapleyMatchesTheOracleDefinition) {
  const std::vector<SetCoverInstance> instances = {
      running_example(),
      {2, {{1}, {2}, {1, 2}}},
      {3, {{1, 2}, {3}}},
      {2, {{1}, {1}}},  // never covers: element 2 is missing
  };
  for (const auto& inst : instances) {
    std::vector<Fact> players;
    for (std::size_t i = 1; i <= inst.m(); ++i) {
      players.push_back(Fact{"P", {Constant(Integer(i))}});
    }
    const oracle::Game nu = [&](const std::set<Fact>& c) -> Rational {
      std::set<Integer> covered;
      for (std::size_t i = 1; i <= inst.m(); ++i) {
        if (c.count(players[i - 1]) != 0) {
          covered.insert(inst.sets[i - 1].begin(), inst.sets[i - 1].end());
        }
      }
      return covered.size() == inst.n ? 1 : 0;
    };
    Rational total = 0;
    for (std::size_t i = 1; i <= inst.m(); ++i) {
      const Rational got = setcover_game_shapley(inst, i);
      EXPECT_EQ(got, oracle::subset_shapley(players, nu, players[i - 1]))
          << "player " << i;
      total += got;
    }
    std::set<Integer> all;
    for (const auto& set : inst.sets) all.insert(set.begin(), set.end());
    EXPECT_EQ(total, all.size() == inst.n ? 1 : 0);  // efficiency
  }
}

TEST(AvgGadget, FrozenRunningExampleEvaluations) {
  const GadgetInput in = build_avg_setcover_db(running_example(), 2, 2);
  std::size_t r_facts = 0, s_facts = 0;
  for (const auto& [fact, endo] : in.d.facts) {
    (fact.relation == "R" ? r_facts : s_facts) += 1;
  }
  EXPECT_EQ(r_facts, 12u);  // 6 set rows, 3 blockers, 2 decoy columns, R(1,0)
  EXPECT_EQ(s_facts, 7u);
  EXPECT_EQ(count_endogenous(in.d), 6u);
  EXPECT_EQ(in.f, parse_fact("S(0)"));
  EXPECT_TRUE(in.d.is_endogenous(in.f));

  // Selecting the two outer sets and one decoy: all four elements covered,
  // so the eight answers average relu to 1/8. Dropping the decoy leaves
  // only negative answers.
  const std::set<Fact> covering = {parse_fact("S(1)"), parse_fact("S(3)"),
                                   parse_fact("S(6)")};
  EXPECT_EQ(eval_coalition(in, covering), Rational(1, 8));
  const std::set<Fact> no_decoy = {parse_fact("S(1)"), parse_fact("S(3)")};
  EXPECT_EQ(eval_coalition(in, no_decoy), 0);
}

TEST(AvgGadget, SingleElementMarginal) {
  const GadgetInput in = build_avg_setcover_db({1, {{1}}}, 0, 0);
  EXPECT_EQ(bruteforce_shapley(in.aq, in.d, in.f, ValueKind::Shapley),
            Rational(5, 12));
}

TEST(AvgGadget, RecoveryRoundTrip) {
  const std::vector<SetCoverInstance> instances = {
      {1, {{1}}},
      {2, {{1}, {2}}},
      {2, {{1, 2}, {2}}},
      {3, {{1, 2}, {2, 3}}},
  };
  for (const auto& inst : instances) {
    EXPECT_EQ(recover_cover_counts_avg(inst, bruteforce()),
              as_rationals(cover_counts_direct(inst)))
        << inst.n << " elements, " << inst.m() << " sets";
  }
}

TEST(AvgGadget, RunningExampleRecovery) {
  const SetCoverInstance inst = running_example();
  const auto z = recover_cover_counts_avg(inst, bruteforce());
  EXPECT_EQ(z, as_rationals(cover_counts_direct(inst)));
  Rational covers = 0;
  for (const Rational& c : z[inst.n]) covers += c;
  EXPECT_EQ(covers, 2);
}

TEST(AvgGadget, PaddingBounds) {
  try {
    build_avg_setcover_db({1, {{1}}}, 2, 0);
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
  try {
    build_avg_setcover_db({1, {{1}}}, 0, 2);
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
}

TEST(QntGadget, AggregateEncodesCoverage) {
  const std::vector<SetCoverInstance> instances = {
      {2, {{1}, {1, 2}}},
      {3, {{1, 2}, {2, 3}, {3}}},
  };
  const std::vector<Rational> fractions = {Rational(1, 3), Rational(1, 2),
                                           Rational(2, 3)};
  for (const auto& inst : instances) {
    for (const Rational& q : fractions) {
      const GadgetInput in = build_qnt_setcover_db(inst, q);
      for (std::uint32_t sub = 0; sub < (1u << inst.m()); ++sub) {
        std::set<Fact> keep;
        std::set<Integer> covered;
        for (std::size_t i = 1; i <= inst.m(); ++i) {
          if (sub >> (i - 1) & 1) {
            keep.insert(Fact{"S", {Constant(Integer(i))}});
            covered.insert(inst.sets[i - 1].begin(), inst.sets[i - 1].end());
          }
        }
        EXPECT_EQ(eval_coalition(in, keep),
                  covered.size() == inst.n ? 1 : 0)
            << "fraction " << to_decimal_string(q, 3) << ", mask " << sub;
      }
    }
  }
}

TEST(QntGadget, ShapleyMatchesTheCoverGame) {
  const std::vector<SetCoverInstance> instances = {
      {2, {{1}, {1, 2}}},
      {3, {{1, 2}, {2, 3}, {3}}},
      {2, {{1}, {1}}},
  };
  const std::vector<Rational> fractions = {Rational(1, 3), Rational(1, 2),
                                           Rational(2, 3)};
  for (const auto& inst : instances) {
    for (const Rational& q : fractions) {
      const GadgetInput in = build_qnt_setcover_db(inst, q);
      EXPECT_EQ(in.f, parse_fact("S(1)"));
      for (std::size_t i = 1; i <= inst.m(); ++i) {
        const Fact f{"S", {Constant(Integer(i))}};
        EXPECT_EQ(bruteforce_shapley(in.aq, in.d, f, ValueKind::Shapley),
                  setcover_game_shapley(inst, i))
            << "player " << i << " at " << to_decimal_string(q, 3);
      }
    }
  }
}

TEST(QntGadget, FractionBounds) {
  for (const Rational& bad : {Rational(0), Rational(1), Rational(3, 2)}) {
    try {
      build_qnt_setcover_db({1, {{1}}}, bad);
      FAIL() << "expected OutOfRange";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), errc::out_of_range);
    }
  }
}

TEST(DupGadget, ShapeValidation) {
  EXPECT_EQ(pair_count({{1, 0}, {0, 1}}), 2u);
  EXPECT_EQ(pair_count({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}), 6u);
  EXPECT_EQ(pair_count({}), 0u);
  try {
    pair_count({{1, 0}});
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
  try {
    pair_count({{2}});
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
  try {
    build_dup_permanent_db({{1}}, 2, DupGadget::ReLU);
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::out_of_range);
  }
}

TEST(DupGadget, GameDetectsIntersectingPairs) {
  // Pairs of the all-ones 2x2 matrix: (1,3), (1,4), (2,3), (2,4).
  for (DupGadget variant : {DupGadget::ReLU, DupGadget::TauId}) {
    const GadgetInput in = build_dup_permanent_db({{1, 1}, {1, 1}}, 1,
                                                  variant);
    EXPECT_EQ(eval_coalition(in, {}), 0);
    EXPECT_EQ(eval_coalition(in, {parse_fact("S(0)")}), 1);
    EXPECT_EQ(eval_coalition(in, {parse_fact("S(5)")}), 1);  // decoy
    // S(1) and S(2) select (1,3) and (1,4): a shared row element.
    EXPECT_EQ(eval_coalition(in, {parse_fact("S(1)"), parse_fact("S(2)")}),
              1);
    // S(1) and S(4) select (1,3) and (2,4): a partial matching.
    EXPECT_EQ(eval_coalition(in, {parse_fact("S(1)"), parse_fact("S(4)")}),
              0);
    EXPECT_EQ(eval_coalition(in, {parse_fact("S(2)"), parse_fact("S(3)")}),
              0);
  }
}

TEST(DupGadget, FrozenOneByOne) {
  for (DupGadget variant : {DupGadget::ReLU, DupGadget::TauId}) {
    const GadgetInput r0 = build_dup_permanent_db({{1}}, 0, variant);
    EXPECT_EQ(bruteforce_shapley(r0.aq, r0.d, r0.f, ValueKind::Shapley), 1);
    const GadgetInput r1 = build_dup_permanent_db({{1}}, 1, variant);
    EXPECT_EQ(bruteforce_shapley(r1.aq, r1.d, r1.f, ValueKind::Shapley),
              Rational(1, 2));
    EXPECT_EQ(recover_matching_counts_dup({{1}}, variant, bruteforce()),
              (std::vector<Rational>{1, 1}));
    EXPECT_EQ(permanent_via_dup({{1}}, variant, bruteforce()), 1);
  }
}

TEST(DupGadget, MatchingCountsAndPermanents) {
  for (DupGadget variant : {DupGadget::ReLU, DupGadget::TauId}) {
    EXPECT_EQ(recover_matching_counts_dup({{1, 1}, {1, 1}}, variant,
                                          bruteforce()),
              (std::vector<Rational>{1, 4, 2, 0, 0}));
    EXPECT_EQ(
        recover_matching_counts_dup({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
                                    variant, bruteforce()),
        (std::vector<Rational>{1, 3, 3, 1}));
  }
  const std::vector<Matrix01> cases = {
      {{1, 1}, {1, 1}},
      {{1, 0}, {0, 1}},
      {{1, 1}, {0, 1}},
      {{0, 0}, {0, 0}},
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{1, 1, 0}, {1, 1, 0}, {0, 0, 1}},
  };
  for (const Matrix01& m01 : cases) {
    for (DupGadget variant : {DupGadget::ReLU, DupGadget::TauId}) {
      EXPECT_EQ(permanent_via_dup(m01, variant, bruteforce()),
                Rational(permanent_direct(m01)));
    }
  }
}

TEST(DupGadget, EmptyMatrix) {
  EXPECT_EQ(permanent_direct({}), 1);  // the empty product
  for (DupGadget variant : {DupGadget::ReLU, DupGadget::TauId}) {
    EXPECT_EQ(permanent_via_dup({}, variant, bruteforce()), 1);
  }
}

TEST(DupGadget, DirectPermanent) {
  EXPECT_EQ(permanent_direct({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), 6);
  EXPECT_EQ(permanent_direct(
                {{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}}),
            24);
  EXPECT_EQ(permanent_direct({{0, 1}, {1, 1}}), 1);
  try {
    permanent_direct(Matrix01(17, std::vector<int>(17, 0)));
    FAIL() << "expected InstanceTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::instance_too_large);
  }
}

TEST(Embedding, StructureOfTheEmbeddedDatabase) {
  const ConjunctiveQuery q0 = parse_cq("Q0(x) :- R0(x,y), S0(y), T0(y).");
  const Database d = db_of({"R(1,2)", "S(2)", "S(4)"}, {"R(3,2)"},
                           {{"R", 2}, {"S", 1}});
  const EmbedResult er = embed_qxyy(q0, d);
  EXPECT_EQ(er.head_position, 1u);
  EXPECT_EQ(er.filler, Constant(Integer(5)));
  const Database want = db_of({"R0(1,2)", "S0(2)", "S0(4)"},
                              {"R0(3,2)", "T0(2)"},
                              {{"R0", 2}, {"S0", 1}, {"T0", 1}});
  EXPECT_EQ(er.d0.facts, want.facts);
  EXPECT_EQ(er.fact_map.at(parse_fact("R(1,2)")), parse_fact("R0(1,2)"));
  EXPECT_EQ(er.fact_map.at(parse_fact("S(2)")), parse_fact("S0(2)"));
  EXPECT_EQ(er.fact_map.at(parse_fact("S(4)")), parse_fact("S0(4)"));
  EXPECT_EQ(er.fact_map.size(), 3u);
}

TEST(Embedding, PreservesShapleyValues) {
  const std::vector<const char*> targets = {
      "Q0(x) :- R0(x,y), S0(y), T0(y).",
      "Q0(x,z) :- R0(x,y,z), S0(y,z).",
      "Q0(u) :- A0(u,v), B0(v,w), C0(v).",
      "Q0(z,x) :- R0(x,y,z), S0(y,z).",  // dominated slot second
      "Q0(x) :- R0(x,y), S0(y), T0(z).",  // disconnected existential
  };
  const ConjunctiveQuery source = parse_cq("Q(x) :- R(x,y), S(y).");
  std::mt19937_64 rng(4242);
  for (const char* text : targets) {
    const ConjunctiveQuery q0 = parse_cq(text);
    for (int trial = 0; trial < 4; ++trial) {
      const Database d = oracle::random_database(source, rng, 6, 10);
      const EmbedResult er = embed_qxyy(q0, d);
      EXPECT_EQ(count_endogenous(er.d0), count_endogenous(d));
      const ValueFunction tau0 = embed_vf(relu_vf(1), er.head_position);
      for (const char* agg : {"avg", "dup"}) {
        const AggregateQuery src{source, parse_agg(agg), relu_vf(1)};
        const AggregateQuery emb{q0, parse_agg(agg), tau0};
        for (const Fact& f : endogenous_facts(d)) {
          EXPECT_EQ(
              bruteforce_shapley(src, d, f, ValueKind::Shapley),
              bruteforce_shapley(emb, er.d0, er.fact_map.at(f),
                                 ValueKind::Shapley))
              << text << " " << agg << " " << to_string(f);
        }
      }
      const Fact f = endogenous_facts(d).front();
      const AggregateQuery src{source, parse_agg("avg"), relu_vf(1)};
      const AggregateQuery emb{q0, parse_agg("avg"), tau0};
      EXPECT_EQ(bruteforce_shapley(src, d, f, ValueKind::Banzhaf),
                bruteforce_shapley(emb, er.d0, er.fact_map.at(f),
                                   ValueKind::Banzhaf));
    }
  }
}

TEST(Embedding, PerCoalitionBagEquality) {
  const ConjunctiveQuery q0 = parse_cq("Q0(x) :- R0(x,y), S0(y), T0(y).");
  const ConjunctiveQuery source = parse_cq("Q(x) :- R(x,y), S(y).");
  const Database d =
      db_of({"R(1,2)", "R(2,2)", "S(2)", "S(3)", "R(-1,3)"}, {"R(0,3)"},
            {{"R", 2}, {"S", 1}});
  const EmbedResult er = embed_qxyy(q0, d);
  const ValueFunction tau0 = embed_vf(relu_vf(1), er.head_position);
  const std::vector<Fact> players = endogenous_facts(d);
  for (std::uint32_t sub = 0; sub < (1u << players.size()); ++sub) {
    std::set<Fact> keep, keep0;
    for (std::size_t i = 0; i < players.size(); ++i) {
      if (sub >> i & 1) {
        keep.insert(players[i]);
        keep0.insert(er.fact_map.at(players[i]));
      }
    }
    EXPECT_EQ(value_bag(source, coalition_db(d, keep), relu_vf(1)),
              value_bag(q0, coalition_db(er.d0, keep0), tau0))
        << "mask " << sub;
  }
}

TEST(Embedding, RejectsWrongTargets) {
  const Database d = db_of({"R(1,2)", "S(2)"}, {}, {{"R", 2}, {"S", 1}});
  try {
    embed_qxyy(parse_cq("Q(x) :- R(x,y), S(x)."), d);  // q-hierarchical
    FAIL() << "expected PreconditionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::precondition_violated);
  }
  try {
    embed_qxyy(parse_cq("Q() :- R(x,y), S(y), T(x)."), d);
    FAIL() << "expected PreconditionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::precondition_violated);
  }
  try {
    embed_qxyy(parse_cq("Q(x) :- R(x,y), R(y,x)."), d);
    FAIL() << "expected PreconditionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::precondition_violated);
  }
  try {
    embed_qxyy(parse_cq("Q0(x) :- R0(x,y), S0(y), T0(y)."),
               db_of({"R(1)"}, {}, {{"R", 1}, {"S", 1}}));
    FAIL() << "expected SchemaMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::schema_mismatch);
  }
}

TEST(Embedding, ValueFunctionReanchoring) {
  EXPECT_EQ(embed_vf(relu_vf(1), 3), relu_vf(3));
  EXPECT_EQ(embed_vf(greater_than_vf(7, 1), 2), greater_than_vf(7, 2));
  EXPECT_EQ(embed_vf(constant_vf(-4), 2), constant_vf(-4));
  try {
    embed_vf(identity_vf(2), 1);
    FAIL() << "expected PreconditionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::precondition_violated);
  }
}

TEST(Monotone, RewritesExactlyTheHeadVariablePositions) {
  const ConjunctiveQuery q = parse_cq("Q(x) :- R(x,y), S(x).");
  const Database d =
      db_of({"R(1,7)", "S(1)", "S(2)"}, {"R(2,1)"}, {{"R", 2}, {"S", 1}});
  const std::map<Integer, Integer> gamma = {{1, 10}, {2, 20}};
  const Database out = monotone_push(d, q, 1, gamma);
  const Database want =
      db_of({"R(10,7)", "S(10)", "S(20)"}, {"R(20,1)"},
            {{"R", 2}, {"S", 1}});
  EXPECT_EQ(out.facts, want.facts);

  EXPECT_EQ(monotone_push_fact(parse_fact("R(1,7)"), q, 1, gamma),
            parse_fact("R(10,7)"));
  EXPECT_EQ(monotone_push_fact(parse_fact("S(2)"), q, 1, gamma),
            parse_fact("S(20)"));
  // The variable is absent from S here, so S-facts pass through.
  const ConjunctiveQuery qy = parse_cq("Q(x) :- R(x,y), S(y).");
  EXPECT_EQ(monotone_push_fact(parse_fact("S(2)"), qy, 1, gamma),
            parse_fact("S(2)"));
}

TEST(Monotone, IdentityMapLeavesTheDatabase) {
  const ConjunctiveQuery q = parse_cq("Q(x) :- R(x,y), S(y).");
  std::mt19937_64 rng(99);
  const Database d = oracle::random_database(q, rng, 5, 9);
  std::map<Integer, Integer> identity;
  for (Integer v = 0; v < 4; ++v) identity[v] = v;
  EXPECT_EQ(monotone_push(d, q, 1, identity).facts, d.facts);
}

TEST(Monotone, ValidationErrors) {
  const ConjunctiveQuery q = parse_cq("Q(x) :- R(x,y), S(x).");
  const Database d =
      db_of({"R(1,7)", "S(1)", "S(2)"}, {}, {{"R", 2}, {"S", 1}});
  const std::map<Integer, Integer> gamma = {{1, 10}, {2, 20}};
  for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
    try {
      monotone_push(d, q, i, gamma);
      FAIL() << "expected OutOfRange";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), errc::out_of_range);
    }
  }
  try {
    monotone_push(d, parse_cq("Q(x) :- R(x,y), R(y,x)."), 1, gamma);
    FAIL() << "expected SelfJoin";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::self_join);
  }
  try {
    monotone_push(d, q, 1, {{1, 10}});  // S(2) has no image
    FAIL() << "expected PreconditionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::precondition_violated);
  }
  try {
    monotone_push(d, q, 1, {{1, 5}, {2, 5}});
    FAIL() << "expected NonInjectiveOnDomain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::non_injective_on_domain);
  }
  // Collisions outside the occurring values are fine.
  const Database only_one =
      db_of({"R(1,7)", "S(1)"}, {}, {{"R", 2}, {"S", 1}});
  EXPECT_EQ(count_endogenous(monotone_push(only_one, q, 1, {{1, 5}, {2, 5}})),
            2u);
  try {
    monotone_push(db_of({"R(\"a\",1)", "S(1)"}, {}, {{"R", 2}, {"S", 1}}),
                  parse_cq("Q(x) :- R(x,y), S(y)."), 1, gamma);
    FAIL() << "expected NonNumericConstant";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::non_numeric_constant);
  }
}

// A non-decreasing map applied to the aggregated column splits into the
// pushed database minus the original one. The left side is not expressible
// as a value function, so it runs as a hand-built game over mapped bags.
TEST(Monotone, TransformIdentityOnRandomInstances) {
  const std::vector<std::pair<const char*, std::size_t>> sources = {
      {"Q(x) :- R(x,y), S(y).", 1},
      {"Q(x,y) :- R(x,y), S(y).", 2},
  };
  std::mt19937_64 rng(20240817);
  for (const auto& [text, i] : sources) {
    const ConjunctiveQuery q = parse_cq(text);
    for (int trial = 0; trial < 8; ++trial) {
      const Database d = oracle::random_database(q, rng, 6, 10);
      // A random non-decreasing (not necessarily injective) map on the
      // constants of the database.
      std::set<Integer> values;
      for (const auto& [fact, endo] : d.facts) {
        for (const Constant& c : fact.tuple) {
          values.insert(std::get<Integer>(c));
        }
      }
      std::map<Integer, Integer> gamma;
      Integer level = Integer(rng() % 7) - 3;
      for (const Integer& v : values) {
        level += Integer(rng() % 3);
        gamma[v] = level;
      }
      std::map<Integer, Integer> gamma_plus;  // strictly increasing
      for (const auto& [v, g] : gamma) gamma_plus[v] = g + v;

      const Database pushed = monotone_push(d, q, i, gamma_plus);
      const std::vector<Fact> players = endogenous_facts(d);
      for (const char* agg : {"min", "max", "avg", "median"}) {
        const AggregateQuery aq{q, parse_agg(agg), identity_vf(i)};
        const auto mapped_value = [&](const std::set<Fact>& c) {
          ValueBag mapped;
          for (const auto& [v, cnt] :
               value_bag(q, coalition_db(d, c), aq.tau)) {
            mapped[gamma.at(v)] += cnt;
          }
          return aggregate(aq.alpha, mapped);
        };
        const Rational base = mapped_value({});
        const oracle::Game nu = [&](const std::set<Fact>& c) {
          return mapped_value(c) - base;
        };
        for (const Fact& f : players) {
          const Rational lhs = oracle::subset_shapley(players, nu, f);
          const Rational rhs =
              bruteforce_shapley(aq, pushed,
                                 monotone_push_fact(f, q, i, gamma_plus),
                                 ValueKind::Shapley) -
              bruteforce_shapley(aq, d, f, ValueKind::Shapley);
          EXPECT_EQ(lhs, rhs) << text << " " << agg << " " << to_string(f)
                              << " trial " << trial;
        }
      }
    }
  }
}

}  // namespace
}  // namespace shapq
