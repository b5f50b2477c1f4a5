#include "shapq/corpus.hpp"

#include "shapq/cq.hpp"

namespace shapq {

std::vector<Family> engine_families() {
  return {
      {"boolean",
       {
           "Q() :- R(x).",
           "Q() :- R(x,y), S(y).",
           "Q() :- R(x), S(x).",
           "Q() :- R(x,5), S(x).",
       },
       {"sum", "count", "cdist", "min", "max", "avg", "median", "dup"}},
      {"sumcount",
       {
           "Q(x,y) :- R(x), S(x,y), T(y).",
           "Q(x,y) :- R(x,z), S(x,y), T(y).",
           "Q(x) :- R(x,y), S(y).",
           "Q(x) :- R(x,y), S(x).",
           "Q(x,y) :- R(x,y).",
           "Q(x,y,x) :- R(x,y), S(x).",
       },
       {"sum", "count"}},
      {"maxmin",
       {
           "Q(x) :- R(x,y), S(y).",
           "Q(x) :- R(y,x), S(y), T(y,x).",
           "Q(x) :- R(x,y), S(y), T(x,y).",
           "Q(x,y) :- R(x,y), S(x).",
           "Q(x) :- R(x).",
           "Q(x,z) :- R(x,y), S(x), T(z).",
       },
       {"min", "max"}},
      {"cdist",
       {
           "Q(x) :- R(x,y), S(y).",
           "Q(x) :- R(y,x), S(y), T(y,x).",
           "Q(x,y) :- R(x,y), S(x).",
           "Q(x) :- R(x).",
           "Q(x,z) :- R(x,y), S(x), T(z).",
       },
       {"cdist"}},
      {"avgqnt",
       {
           "Q(x,y) :- R(x,y), S(x).",
           "Q(x) :- R(x,y), S(x).",
           "Q(x,y) :- R(x,y), S(x), T(x,y).",
           "Q(x,y) :- R(x,z), S(x), T(y).",
           "Q(x,x) :- R(x), S(x).",
       },
       {"avg", "median", "qnt:1/3", "qnt:2/3", "qnt:1/4"}},
      {"dup",
       {
           "Q(x) :- R(x,y), S(x).",
           "Q(x) :- R(x).",
           "Q(x,y) :- R(x,y).",
           "Q(x,z) :- R(x,y), S(x), T(z).",
           "Q(x) :- R(x,y), S(x,3).",
           "Q(x,x) :- R(x), S(x).",
       },
       {"dup"}},
  };
}

Database random_database(const ConjunctiveQuery& q, std::mt19937_64& rng,
                         std::size_t max_endo, std::size_t max_total) {
  Database d;
  for (const auto& atom : q.body) add_relation(d, atom.relation, atom.args.size());

  const std::size_t attempts = 2 + rng() % max_total;
  std::size_t endo_count = 0;
  for (std::size_t i = 0; i < attempts && d.facts.size() < max_total; ++i) {
    const Atom& atom = q.body[rng() % q.body.size()];
    Fact fact{atom.relation, {}};
    for (std::size_t p = 0; p < atom.args.size(); ++p) {
      fact.tuple.push_back(Constant(Integer(rng() % 4)));  // small pool
    }
    if (d.contains(fact)) continue;
    const bool endo = endo_count < max_endo && rng() % 100 < 65;
    if (endo) ++endo_count;
    insert_fact(d, fact, endo);
  }
  if (endo_count == 0) {
    if (d.facts.empty()) {
      Fact fact{q.body[0].relation, {}};
      for (std::size_t p = 0; p < q.body[0].args.size(); ++p) {
        fact.tuple.push_back(Constant(Integer(0)));
      }
      insert_fact(d, fact, true);
    } else {
      d.facts.begin()->second = true;
    }
  }
  return d;
}

RandomInstance random_instance(const Family& family, std::mt19937_64& rng,
                               std::size_t max_endo, std::size_t max_total) {
  RandomInstance inst;
  inst.aq.q = parse_cq(family.queries[rng() % family.queries.size()]);
  inst.aq.alpha = parse_agg(family.aggs[rng() % family.aggs.size()]);

  std::vector<std::size_t> var_positions;
  for (std::size_t i = 0; i < inst.aq.q.head_slots.size(); ++i) {
    if (term_is_variable(inst.aq.q.head_slots[i])) var_positions.push_back(i);
  }
  if (var_positions.empty() || rng() % 5 == 0) {
    inst.aq.tau = constant_vf(Integer(rng() % 5) - 1);
  } else {
    const std::size_t pos = var_positions[rng() % var_positions.size()] + 1;
    switch (rng() % 3) {
      case 0: inst.aq.tau = identity_vf(pos); break;
      case 1: inst.aq.tau = greater_than_vf(Integer(rng() % 3) - 1, pos); break;
      default: inst.aq.tau = relu_vf(pos); break;
    }
  }
  validate_query(inst.aq);
  inst.d = random_database(inst.aq.q, rng, max_endo, max_total);
  return inst;
}

}  // namespace shapq
