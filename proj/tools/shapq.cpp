// Command-line surface for the Shapley engine: classification, value
// computation, axiom checking, the counting gadget pipelines, and random
// corpus generation.
//
// Exit codes: 0 success, 1 failed verdict (axioms, gadget or embedding
// mismatch), 2 parse or input error, 3 intractable without an override,
// 4 size cap exceeded, 5 internal assertion (including oracle mismatches).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shapq/aggregates.hpp"
#include "shapq/corpus.hpp"
#include "shapq/cq.hpp"
#include "shapq/dispatch.hpp"
#include "shapq/errors.hpp"
#include "shapq/gadgets.hpp"
#include "shapq/json_io.hpp"
#include "shapq/model.hpp"
#include "shapq/rational.hpp"
#include "shapq/shapley.hpp"

namespace shapq {
namespace {

using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kVerdictFailure = 1;
constexpr int kParseError = 2;
constexpr int kIntractable = 3;
constexpr int kTooLarge = 4;
constexpr int kInternal = 5;

int exit_code_for(errc code) {
  switch (code) {
    case errc::self_join:
    case errc::intractable_class:
    case errc::not_all_hierarchical:
    case errc::not_q_hierarchical:
    case errc::not_exists_hierarchical:
    case errc::not_connected_sq:
    case errc::not_sq_hierarchical:
      return kIntractable;
    case errc::instance_too_large:
      return kTooLarge;
    case errc::variant_mismatch:
    case errc::singular_matrix:
    case errc::dimension_mismatch:
    case errc::precondition_violated:
    case errc::non_injective_on_domain:
      return kInternal;
    default:
      return kParseError;
  }
}

// --- shared options -----------------------------------------------------

struct CommonOptions {
  std::string db_path;
  std::string query;
  std::string agg = "sum";
  std::string tau;
  std::string format = "table";
  std::string value_kind = "shapley";
  std::size_t cap = kDefaultBruteforceCap;
  unsigned digits = 6;
  bool timings = false;
  bool check_oracle = false;

  bool json() const { return format == "json"; }
  ValueKind kind() const {
    return value_kind == "banzhaf" ? ValueKind::Banzhaf : ValueKind::Shapley;
  }
  AggregateQuery parse() const {
    return {parse_cq(query), parse_agg(agg), parse_tau(tau)};
  }
};

void add_format_option(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--format", opt.format, "Output format")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
}

void add_query_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--query", opt.query, "Conjunctive query, e.g. "
                  "\"Q(x) :- R(x,y), S(y).\"")
      ->required();
  cmd->add_option("--agg", opt.agg,
                  "Aggregate: sum|count|cdist|min|max|avg|median|qnt:p/q|dup")
      ->required();
  cmd->add_option("--tau", opt.tau,
                  "Value function: id:<i>|gt:<b>:<i>|relu:<i>|const:<c>")
      ->required();
}

void add_cap_option(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--cap", opt.cap,
                  "Endogenous-fact cap for subset enumeration (0 = none)")
      ->envname("SHAPQ_CAP")
      ->capture_default_str();
}

long long elapsed_us(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

void print_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c >= width.size()) width.push_back(0);
      width[c] = std::max(width[c], row[c].size());
    }
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += row[c];
      if (c + 1 < row.size()) {
        line.append(width[c] - row[c].size(), ' ');
      }
    }
    std::cout << line << "\n";
  }
}

// --- classify -----------------------------------------------------------

struct ClassifyOptions {
  std::string query;
  std::string format = "table";
};

int run_classify(const ClassifyOptions& opt) {
  const ConjunctiveQuery q = parse_cq(opt.query);
  const HierarchyClass actual = classify(q);
  const std::vector<HierarchyClass> ladder = {
      HierarchyClass::ExistsHierarchical, HierarchyClass::AllHierarchical,
      HierarchyClass::QHierarchical, HierarchyClass::SQHierarchical};
  if (opt.format == "json") {
    ordered_json out;
    out["query"] = to_string(q);
    out["class"] = to_string(actual);
    out["self_join_free"] = self_join_free(q);
    out["predicates"] = ordered_json::array();
    for (HierarchyClass cls : ladder) {
      ordered_json entry;
      entry["name"] = to_string(cls);
      entry["pass"] = at_least(actual, cls);
      if (!at_least(actual, cls)) {
        entry["witness"] = class_failure_witness(q, cls);
      }
      out["predicates"].push_back(std::move(entry));
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
  }
  std::cout << "query: " << to_string(q) << "\n";
  std::cout << "class: " << to_string(actual) << "\n";
  std::cout << "self-join-free: " << (self_join_free(q) ? "yes" : "no")
            << "\n";
  for (HierarchyClass cls : ladder) {
    std::cout << to_string(cls) << ": ";
    if (at_least(actual, cls)) {
      std::cout << "pass\n";
    } else {
      std::cout << "fail (" << class_failure_witness(q, cls) << ")\n";
    }
  }
  return kOk;
}

// --- shapley ------------------------------------------------------------

struct ShapleyOptions {
  CommonOptions common;
  std::string fact;
  std::string engine = "auto";
  bool all = false;
  bool force_bruteforce = false;
};

DispatchOptions dispatch_options(const ShapleyOptions& opt) {
  DispatchOptions dopts;
  dopts.cap = opt.common.cap;
  dopts.kind = opt.common.kind();
  dopts.force_bruteforce =
      opt.force_bruteforce || opt.engine == "bruteforce";
  return dopts;
}

struct OutputRecord {
  Fact fact;
  Rational value;
  std::string engine;
  long long micros = -1;  // negative: not measured
};

void emit_records(const CommonOptions& opt, const AggregateQuery& aq,
                  const std::vector<OutputRecord>& records,
                  long long total_us) {
  if (opt.json()) {
    ordered_json out;
    out["query"] = to_string(aq.q);
    out["aggregate"] = to_string(aq.alpha);
    out["tau"] = to_string(aq.tau);
    out["value_kind"] =
        opt.kind() == ValueKind::Banzhaf ? "banzhaf" : "shapley";
    out["results"] = ordered_json::array();
    for (const OutputRecord& rec : records) {
      ordered_json entry;
      entry["fact"] = to_string(rec.fact);
      entry["value"] = to_fraction_string(rec.value);
      entry["decimal"] = to_decimal_string(rec.value, opt.digits);
      entry["engine"] = rec.engine;
      if (opt.timings && rec.micros >= 0) {
        entry["microseconds"] = rec.micros;
      }
      out["results"].push_back(std::move(entry));
    }
    if (opt.timings) out["total_microseconds"] = total_us;
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"fact", "value", "decimal", "engine"});
  if (opt.timings) rows.front().push_back("time");
  for (const OutputRecord& rec : records) {
    std::vector<std::string> row = {
        to_string(rec.fact), to_fraction_string(rec.value),
        to_decimal_string(rec.value, opt.digits), rec.engine};
    if (opt.timings) {
      row.push_back(rec.micros >= 0 ? std::to_string(rec.micros) + "us"
                                    : "-");
    }
    rows.push_back(std::move(row));
  }
  print_table(rows);
  if (opt.timings) {
    std::cout << "total: " << total_us << "us\n";
  }
}

void check_forced_engine(const AggregateQuery& aq, const Database& d,
                         const std::string& engine) {
  validate_query(aq);
  validate_schema(aq.q, d);
  if (!self_join_free(aq.q)) {
    fail(errc::self_join,
         "engine " + engine + " needs a self-join-free query");
  }
  const std::string fits = engine_for(aq);
  if (fits != engine) {
    fail(errc::intractable_class,
         "engine " + engine + " does not handle this query (" +
             (fits.empty() ? "no engine applies" : "routes to " + fits) +
             ")");
  }
}

void check_against_oracle(const AggregateQuery& aq, const Database& d,
                          const std::vector<OutputRecord>& records,
                          const CommonOptions& opt) {
  for (const OutputRecord& rec : records) {
    const Rational oracle =
        bruteforce_shapley(aq, d, rec.fact, opt.kind(), opt.cap);
    if (oracle != rec.value) {
      fail(errc::variant_mismatch,
           "oracle mismatch for " + to_string(rec.fact) + ": engine " +
               rec.engine + " says " + to_fraction_string(rec.value) +
               ", subset enumeration says " + to_fraction_string(oracle));
    }
  }
}

int run_shapley(const ShapleyOptions& opt) {
  const AggregateQuery aq = opt.common.parse();
  const Database d = load_database(opt.common.db_path);
  DispatchOptions dopts = dispatch_options(opt);
  if (opt.engine != "auto" && opt.engine != "bruteforce") {
    check_forced_engine(aq, d, opt.engine);
    dopts.allow_bruteforce = false;
  }

  std::vector<OutputRecord> records;
  const auto start = std::chrono::steady_clock::now();
  if (opt.all) {
    for (const auto& [fact, res] : dispatch_shapley_all(aq, d, dopts)) {
      records.push_back({fact, res.value, res.engine, -1});
    }
  } else {
    const Fact f = parse_fact(opt.fact);
    if (d.facts.find(f) == d.facts.end()) {
      fail(errc::fact_absent, to_string(f) + " is not in the database");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const DispatchResult res = dispatch_shapley(aq, d, f, dopts);
    records.push_back({f, res.value, res.engine, elapsed_us(t0)});
  }
  const long long total_us = elapsed_us(start);

  if (opt.common.check_oracle) {
    check_against_oracle(aq, d, records, opt.common);
  }
  emit_records(opt.common, aq, records, total_us);
  return kOk;
}

// --- axioms -------------------------------------------------------------

int run_axioms(const CommonOptions& opt) {
  const AggregateQuery aq = opt.parse();
  const Database d = load_database(opt.db_path);
  DispatchOptions dopts;
  dopts.cap = opt.cap;
  dopts.kind = opt.kind();
  const auto results = dispatch_shapley_all(aq, d, dopts);
  std::map<Fact, Rational> values;
  std::vector<OutputRecord> records;
  for (const auto& [fact, res] : results) {
    values.emplace(fact, res.value);
    records.push_back({fact, res.value, res.engine, -1});
  }
  if (opt.check_oracle) check_against_oracle(aq, d, records, opt);
  const AxiomReport report = check_axioms(aq, d, values, opt.kind());

  if (opt.json()) {
    ordered_json out;
    out["query"] = to_string(aq.q);
    out["aggregate"] = to_string(aq.alpha);
    out["tau"] = to_string(aq.tau);
    out["endogenous_facts"] = values.size();
    if (report.efficiency_checked) {
      out["efficiency"] = ordered_json{
          {"pass", report.efficiency_ok},
          {"total", to_fraction_string(report.total)},
          {"expected", to_fraction_string(report.expected_total)}};
    } else {
      out["efficiency"] = "skipped";
    }
    out["null_player_failures"] = ordered_json::array();
    for (const Fact& f : report.null_player_failures) {
      out["null_player_failures"].push_back(to_string(f));
    }
    out["symmetric_pairs_checked"] = report.symmetric_pairs_checked;
    out["symmetry_failures"] = ordered_json::array();
    for (const auto& [f, g] : report.symmetry_failures) {
      out["symmetry_failures"].push_back(to_string(f) + " vs " +
                                         to_string(g));
    }
    out["verdict"] = report.all_pass() ? "PASS" : "FAIL";
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "query: " << to_string(aq.q) << "\n";
    std::cout << "endogenous facts: " << values.size() << "\n";
    if (report.efficiency_checked) {
      std::cout << "efficiency: "
                << (report.efficiency_ok ? "pass" : "FAIL") << " (total "
                << to_fraction_string(report.total) << ", expected "
                << to_fraction_string(report.expected_total) << ")\n";
    } else {
      std::cout << "efficiency: skipped\n";
    }
    std::cout << "null-player: "
              << (report.null_player_failures.empty() ? "pass" : "FAIL");
    for (const Fact& f : report.null_player_failures) {
      std::cout << " " << to_string(f);
    }
    std::cout << "\n";
    std::cout << "symmetry: "
              << (report.symmetry_failures.empty() ? "pass" : "FAIL")
              << " (" << report.symmetric_pairs_checked
              << " symmetric pairs)";
    for (const auto& [f, g] : report.symmetry_failures) {
      std::cout << " " << to_string(f) << " vs " << to_string(g);
    }
    std::cout << "\n";
    std::cout << "verdict: " << (report.all_pass() ? "PASS" : "FAIL")
              << "\n";
  }
  return report.all_pass() ? kOk : kVerdictFailure;
}

// --- gadget pipelines ---------------------------------------------------

struct GadgetOptions {
  std::string instance_path;
  std::string db_path;
  std::string query;
  std::string agg = "avg";
  std::string tau = "relu:1";
  std::string fraction = "1/2";
  std::string variant = "relu";
  std::string format = "table";
  std::size_t cap = kDefaultBruteforceCap;

  bool json() const { return format == "json"; }
};

ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::syntax_error, "cannot open " + path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::syntax_error, e.what());
  }
}

SetCoverInstance load_setcover(const std::string& path) {
  const ordered_json j = load_json_file(path);
  if (!j.is_object() || !j.contains("n") ||
      !j["n"].is_number_unsigned() || !j.contains("sets") ||
      !j["sets"].is_array()) {
    fail(errc::syntax_error,
         "set-cover instances look like {\"n\": 4, \"sets\": [[1,2],[3]]}");
  }
  SetCoverInstance inst;
  inst.n = j["n"].get<std::size_t>();
  for (const ordered_json& set : j["sets"]) {
    if (!set.is_array()) {
      fail(errc::syntax_error, "each set is an array of elements");
    }
    std::set<Integer> elements;
    for (const ordered_json& e : set) {
      if (!e.is_number_integer()) {
        fail(errc::syntax_error, "set elements are integers");
      }
      elements.insert(Integer(e.get<long long>()));
    }
    inst.sets.push_back(std::move(elements));
  }
  validate_instance(inst);
  return inst;
}

Matrix01 load_matrix(const std::string& path) {
  const ordered_json j = load_json_file(path);
  if (!j.is_object() || !j.contains("matrix") || !j["matrix"].is_array()) {
    fail(errc::syntax_error,
         "permanent instances look like {\"matrix\": [[1,0],[0,1]]}");
  }
  Matrix01 m01;
  for (const ordered_json& row : j["matrix"]) {
    if (!row.is_array()) fail(errc::syntax_error, "matrix rows are arrays");
    std::vector<int> cells;
    for (const ordered_json& cell : row) {
      if (!cell.is_number_integer()) {
        fail(errc::syntax_error, "matrix entries are integers");
      }
      cells.push_back(cell.get<int>());
    }
    m01.push_back(std::move(cells));
  }
  return m01;
}

ShapleyFn gadget_shapley(std::size_t cap) {
  return [cap](const AggregateQuery& aq, const Database& d, const Fact& f) {
    DispatchOptions dopts;
    dopts.cap = cap;
    return dispatch_shapley(aq, d, f, dopts).value;
  };
}

int emit_count_verdict(const GadgetOptions& opt, const std::string& label,
                       const Rational& recovered, const Integer& direct,
                       ordered_json extra) {
  const bool ok = recovered == Rational(direct);
  if (opt.json()) {
    ordered_json out = std::move(extra);
    out[label + "_recovered"] = to_fraction_string(recovered);
    out[label + "_direct"] = direct.str();
    out["verdict"] = ok ? "verified" : "MISMATCH";
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& [key, value] : extra.items()) {
      std::cout << key << ": "
                << (value.is_string() ? value.get<std::string>()
                                      : value.dump())
                << "\n";
    }
    std::cout << label << " (recovered): " << to_fraction_string(recovered)
              << "\n";
    std::cout << label << " (direct): " << direct.str() << "\n";
    std::cout << "verdict: " << (ok ? "verified" : "MISMATCH") << "\n";
  }
  return ok ? kOk : kVerdictFailure;
}

int run_setcover_avg(const GadgetOptions& opt) {
  const SetCoverInstance inst = load_setcover(opt.instance_path);
  const auto z = recover_cover_counts_avg(inst, gadget_shapley(opt.cap));
  Rational covers = 0;
  for (const Rational& c : z[inst.n]) covers += c;
  ordered_json extra;
  extra["universe"] = inst.n;
  extra["sets"] = inst.m();
  return emit_count_verdict(opt, "covers", covers,
                            count_set_covers_direct(inst), std::move(extra));
}

int run_setcover_qnt(const GadgetOptions& opt) {
  const SetCoverInstance inst = load_setcover(opt.instance_path);
  const Rational q = parse_rational(opt.fraction);
  const GadgetInput in = build_qnt_setcover_db(inst, q);
  const ShapleyFn shapley = gadget_shapley(opt.cap);
  bool ok = true;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"player", "gadget", "cover-game"});
  ordered_json players = ordered_json::array();
  for (std::size_t i = 1; i <= inst.m(); ++i) {
    const Fact f{"S", {Constant(Integer(i))}};
    const Rational got = shapley(in.aq, in.d, f);
    const Rational want = setcover_game_shapley(inst, i);
    ok = ok && got == want;
    rows.push_back({"S(" + std::to_string(i) + ")", to_fraction_string(got),
                    to_fraction_string(want)});
    ordered_json entry;
    entry["player"] = i;
    entry["gadget"] = to_fraction_string(got);
    entry["cover_game"] = to_fraction_string(want);
    players.push_back(std::move(entry));
  }
  if (opt.json()) {
    ordered_json out;
    out["universe"] = inst.n;
    out["sets"] = inst.m();
    out["fraction"] = to_fraction_string(q);
    out["players"] = std::move(players);
    out["verdict"] = ok ? "verified" : "MISMATCH";
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "universe: " << inst.n << ", sets: " << inst.m()
              << ", fraction: " << to_fraction_string(q) << "\n";
    print_table(rows);
    std::cout << "verdict: " << (ok ? "verified" : "MISMATCH") << "\n";
  }
  return ok ? kOk : kVerdictFailure;
}

int run_permanent_dup(const GadgetOptions& opt) {
  const Matrix01 m01 = load_matrix(opt.instance_path);
  const DupGadget variant =
      opt.variant == "id" ? DupGadget::TauId : DupGadget::ReLU;
  const Rational recovered =
      permanent_via_dup(m01, variant, gadget_shapley(opt.cap));
  ordered_json extra;
  extra["dimension"] = m01.size();
  extra["pairs"] = pair_count(m01);
  extra["variant"] = opt.variant == "id" ? "id" : "relu";
  return emit_count_verdict(opt, "permanent", recovered,
                            permanent_direct(m01), std::move(extra));
}

int run_embed(const GadgetOptions& opt) {
  const ConjunctiveQuery q0 = parse_cq(opt.query);
  const Database d = load_database(opt.db_path);
  const EmbedResult er = embed_qxyy(q0, d);
  const AggregateQuery src{parse_cq("Q(x) :- R(x,y), S(y)."),
                           parse_agg(opt.agg), parse_tau(opt.tau)};
  const AggregateQuery emb{q0, src.alpha, embed_vf(src.tau,
                                                   er.head_position)};
  bool ok = true;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"fact", "image", "source", "embedded"});
  ordered_json facts = ordered_json::array();
  for (const Fact& f : endogenous_facts(d)) {
    const Rational source =
        bruteforce_shapley(src, d, f, ValueKind::Shapley, opt.cap);
    const Rational embedded = bruteforce_shapley(
        emb, er.d0, er.fact_map.at(f), ValueKind::Shapley, opt.cap);
    ok = ok && source == embedded;
    rows.push_back({to_string(f), to_string(er.fact_map.at(f)),
                    to_fraction_string(source),
                    to_fraction_string(embedded)});
    ordered_json entry;
    entry["fact"] = to_string(f);
    entry["image"] = to_string(er.fact_map.at(f));
    entry["source"] = to_fraction_string(source);
    entry["embedded"] = to_fraction_string(embedded);
    facts.push_back(std::move(entry));
  }
  if (opt.json()) {
    ordered_json out;
    out["target_query"] = to_string(q0);
    out["head_position"] = er.head_position;
    out["embedded_tau"] = to_string(emb.tau);
    out["embedded_db"] = ordered_json::parse(manifest_to_string(er.d0));
    out["facts"] = std::move(facts);
    out["verdict"] = ok ? "preserved" : "MISMATCH";
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "target query: " << to_string(q0) << "\n";
    std::cout << "head position: " << er.head_position
              << ", embedded tau: " << to_string(emb.tau) << "\n";
    print_table(rows);
    std::cout << "verdict: " << (ok ? "preserved" : "MISMATCH") << "\n";
  }
  return ok ? kOk : kVerdictFailure;
}

// --- corpus -------------------------------------------------------------

struct CorpusOptions {
  std::string family = "all";
  std::size_t count = 5;
  std::uint64_t seed = 1;
  std::size_t max_endo = 8;
  std::size_t max_total = 16;
  std::string out_dir;
  std::string format = "table";
};

int run_corpus(const CorpusOptions& opt) {
  std::vector<Family> families;
  for (const Family& family : engine_families()) {
    if (opt.family == "all" || opt.family == family.name) {
      families.push_back(family);
    }
  }
  if (families.empty()) {
    fail(errc::out_of_range, "unknown family " + opt.family);
  }
  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
  }
  std::mt19937_64 rng(opt.seed);
  bool all_match = true;
  std::size_t checked = 0;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"instance", "query", "agg", "tau", "facts", "verdict"});
  for (const Family& family : families) {
    for (std::size_t k = 0; k < opt.count; ++k) {
      const RandomInstance inst =
          random_instance(family, rng, opt.max_endo, opt.max_total);
      DispatchOptions dopts;
      const auto results = dispatch_shapley_all(inst.aq, inst.d, dopts);
      bool match = true;
      for (const auto& [fact, res] : results) {
        ++checked;
        if (bruteforce_shapley(inst.aq, inst.d, fact, ValueKind::Shapley) !=
            res.value) {
          match = false;
        }
      }
      all_match = all_match && match;
      const std::string name = family.name + "-" + std::to_string(k);
      if (!opt.out_dir.empty()) {
        save_manifest(inst.d,
                      (std::filesystem::path(opt.out_dir) / (name + ".json"))
                          .string());
      }
      rows.push_back({name, to_string(inst.aq.q), to_string(inst.aq.alpha),
                      to_string(inst.aq.tau),
                      std::to_string(inst.d.facts.size()) + "/" +
                          std::to_string(count_endogenous(inst.d)),
                      match ? "ok" : "MISMATCH"});
    }
  }
  if (opt.format == "json") {
    ordered_json out;
    out["instances"] = ordered_json::array();
    for (std::size_t r = 1; r < rows.size(); ++r) {
      ordered_json entry;
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        entry[rows.front()[c]] = rows[r][c];
      }
      out["instances"].push_back(std::move(entry));
    }
    out["values_checked"] = checked;
    out["verdict"] = all_match ? "ok" : "MISMATCH";
    std::cout << out.dump(2) << "\n";
  } else {
    print_table(rows);
    std::cout << "checked " << checked
              << " values against subset enumeration: "
              << (all_match ? "all match" : "MISMATCH") << "\n";
  }
  if (!all_match) {
    fail(errc::variant_mismatch, "engine and oracle disagree");
  }
  return kOk;
}

}  // namespace
}  // namespace shapq

int main(int argc, char** argv) {
  using namespace shapq;

  CLI::App app{"Shapley and Banzhaf values of database facts under "
               "aggregate conjunctive queries"};
  app.require_subcommand(1);

  ClassifyOptions classify_opt;
  CLI::App* classify_cmd =
      app.add_subcommand("classify", "Hierarchy class of a query");
  classify_cmd->add_option("--query", classify_opt.query)->required();
  classify_cmd->add_option("--format", classify_opt.format)
      ->check(CLI::IsMember({"table", "json"}));

  ShapleyOptions shapley_opt;
  CLI::App* shapley_cmd =
      app.add_subcommand("shapley", "Value of one fact or of all facts");
  shapley_cmd->add_option("--db", shapley_opt.common.db_path)->required();
  add_query_options(shapley_cmd, shapley_opt.common);
  CLI::Option* fact_opt =
      shapley_cmd->add_option("--fact", shapley_opt.fact,
                              "Endogenous fact, e.g. \"R(1,2)\"");
  shapley_cmd->add_flag("--all", shapley_opt.all,
                        "Every endogenous fact");
  fact_opt->excludes("--all");
  shapley_cmd
      ->add_option("--engine", shapley_opt.engine,
                   "auto|bruteforce|boolean|sumcount|cdist|maxmin|avgqnt|dup")
      ->check(CLI::IsMember({"auto", "bruteforce", "boolean", "sumcount",
                             "cdist", "maxmin", "avgqnt", "dup"}))
      ->capture_default_str();
  shapley_cmd->add_flag("--force-bruteforce", shapley_opt.force_bruteforce,
                        "Skip the engines");
  shapley_cmd->add_flag("--check-oracle", shapley_opt.common.check_oracle,
                        "Recompute by subset enumeration and compare");
  shapley_cmd
      ->add_option("--value", shapley_opt.common.value_kind)
      ->check(CLI::IsMember({"shapley", "banzhaf"}))
      ->capture_default_str();
  shapley_cmd->add_option("--digits", shapley_opt.common.digits,
                          "Decimal display digits")
      ->capture_default_str();
  shapley_cmd->add_flag("--timings", shapley_opt.common.timings,
                        "Report runtimes (output no longer deterministic)");
  add_cap_option(shapley_cmd, shapley_opt.common);
  add_format_option(shapley_cmd, shapley_opt.common);

  CommonOptions axioms_opt;
  CLI::App* axioms_cmd = app.add_subcommand(
      "axioms", "Efficiency, null-player and symmetry checks");
  axioms_cmd->add_option("--db", axioms_opt.db_path)->required();
  add_query_options(axioms_cmd, axioms_opt);
  axioms_cmd->add_flag("--check-oracle", axioms_opt.check_oracle);
  axioms_cmd->add_option("--value", axioms_opt.value_kind)
      ->check(CLI::IsMember({"shapley", "banzhaf"}))
      ->capture_default_str();
  add_cap_option(axioms_cmd, axioms_opt);
  add_format_option(axioms_cmd, axioms_opt);

  GadgetOptions gadget_opt;
  CLI::App* gadget_cmd = app.add_subcommand(
      "gadget", "Counting pipelines built on Shapley computations");
  gadget_cmd->require_subcommand(1);
  CLI::App* sc_avg = gadget_cmd->add_subcommand(
      "setcover-avg", "Count set covers through average-value queries");
  sc_avg->add_option("--instance", gadget_opt.instance_path)->required();
  CLI::App* sc_qnt = gadget_cmd->add_subcommand(
      "setcover-qnt", "The cover game through quantile queries");
  sc_qnt->add_option("--instance", gadget_opt.instance_path)->required();
  sc_qnt->add_option("--fraction", gadget_opt.fraction)
      ->capture_default_str();
  CLI::App* perm = gadget_cmd->add_subcommand(
      "permanent-dup", "Permanent of a 0/1 matrix through duplicate queries");
  perm->add_option("--instance", gadget_opt.instance_path)->required();
  perm->add_option("--variant", gadget_opt.variant)
      ->check(CLI::IsMember({"relu", "id"}))
      ->capture_default_str();
  CLI::App* embed = gadget_cmd->add_subcommand(
      "embed", "Re-express an instance over a harder target query");
  embed->add_option("--query", gadget_opt.query)->required();
  embed->add_option("--db", gadget_opt.db_path)->required();
  embed->add_option("--agg", gadget_opt.agg)->capture_default_str();
  embed->add_option("--tau", gadget_opt.tau)->capture_default_str();
  for (CLI::App* sub : {sc_avg, sc_qnt, perm, embed}) {
    sub->add_option("--cap", gadget_opt.cap)
        ->envname("SHAPQ_CAP")
        ->capture_default_str();
    sub->add_option("--format", gadget_opt.format)
        ->check(CLI::IsMember({"table", "json"}));
  }

  CorpusOptions corpus_opt;
  CLI::App* corpus_cmd = app.add_subcommand(
      "corpus", "Generate random instances and check engines against "
                "subset enumeration");
  corpus_cmd->add_option("--family", corpus_opt.family,
                         "Engine family or 'all'")
      ->capture_default_str();
  corpus_cmd->add_option("--count", corpus_opt.count)->capture_default_str();
  corpus_cmd->add_option("--seed", corpus_opt.seed)->capture_default_str();
  corpus_cmd->add_option("--max-endo", corpus_opt.max_endo)
      ->capture_default_str();
  corpus_cmd->add_option("--max-total", corpus_opt.max_total)
      ->capture_default_str();
  corpus_cmd->add_option("--out", corpus_opt.out_dir,
                         "Write manifests under this directory");
  corpus_cmd->add_option("--format", corpus_opt.format)
      ->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParseError;
  }

  try {
    if (classify_cmd->parsed()) return run_classify(classify_opt);
    if (shapley_cmd->parsed()) {
      if (!shapley_opt.all && shapley_opt.fact.empty()) {
        fail(errc::syntax_error, "pass --fact or --all");
      }
      return run_shapley(shapley_opt);
    }
    if (axioms_cmd->parsed()) return run_axioms(axioms_opt);
    if (gadget_cmd->parsed()) {
      if (sc_avg->parsed()) return run_setcover_avg(gadget_opt);
      if (sc_qnt->parsed()) return run_setcover_qnt(gadget_opt);
      if (perm->parsed()) return run_permanent_dup(gadget_opt);
      return run_embed(gadget_opt);
    }
    return run_corpus(corpus_opt);
  } catch (const shapq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
