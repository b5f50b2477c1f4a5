#ifndef SHAPQ_CORPUS_HPP
#define SHAPQ_CORPUS_HPP

#include <random>
#include <string>
#include <vector>

#include "shapq/aggregates.hpp"
#include "shapq/model.hpp"

// Random instance generation, grouped by the exact engine the instances
// route to. The tests stress every engine against the brute-force oracle
// with these, and the CLI exposes them for fixture generation.

namespace shapq {

struct Family {
  std::string name;                  // engine tag the instances route to
  std::vector<std::string> queries;  // parseable query pool
  std::vector<std::string> aggs;     // parseable aggregate pool
};

// One family per exact engine; every query in a family is handled exactly
// by that family's engine for every aggregate in the pool.
std::vector<Family> engine_families();

struct RandomInstance {
  AggregateQuery aq;
  Database d;
};

// Draws a query and aggregate from the family and fills a random database
// over the query's schema: small constant pool (to force joins), at least
// one endogenous fact, at most max_endo endogenous and max_total facts.
RandomInstance random_instance(const Family& family, std::mt19937_64& rng,
                               std::size_t max_endo, std::size_t max_total);

// Random database for a fixed query, same conventions.
Database random_database(const ConjunctiveQuery& q, std::mt19937_64& rng,
                         std::size_t max_endo, std::size_t max_total);

}  // namespace shapq

#endif  // SHAPQ_CORPUS_HPP
