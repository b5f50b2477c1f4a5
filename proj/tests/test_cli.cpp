// End-to-end tests of the command-line binary: every subcommand is driven
// through a real subprocess and judged on stdout bytes and exit codes.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "shapq/json_io.hpp"
#include "shapq/model.hpp"

namespace shapq {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cmd(const std::string& cmd) {
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr) << cmd;
  RunResult res;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) {
    res.out.append(buffer, got);
  }
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

// Runs the CLI with the given arguments, capturing stdout only.
RunResult run(const std::string& args) {
  return run_cmd(std::string(SHAPQ_CLI_PATH) + " " + args + " 2>/dev/null");
}

std::filesystem::path scratch_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "shapq-cli-tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto path = scratch_dir() / name;
  std::ofstream out(path);
  out << content;
  out.close();
  return path.string();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Two endogenous unary facts R(0), R(1); under avg with the identity value
// function, fact R(1) is worth 3/4 and R(0) is worth -1/4.
std::string tiny_db() {
  static const std::string path = write_file("tiny.json", R"({
  "relations": [
    {"name": "R", "arity": 1,
     "facts": [{"tuple": [0], "endogenous": true},
               {"tuple": [1], "endogenous": true}]}
  ]
})");
  return path;
}

TEST(CliClassify, ReportsTheClassLadderWithWitnesses) {
  const RunResult res =
      run("classify --query \"Q(x) :- R(x,y), S(y).\"");
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "class: all-hierarchical"));
  EXPECT_TRUE(contains(res.out, "self-join-free: yes"));
  EXPECT_TRUE(contains(res.out, "exists-hierarchical: pass"));
  EXPECT_TRUE(contains(res.out,
                       "q-hierarchical: fail (free x, existential y"));
  EXPECT_TRUE(contains(res.out, "sq-hierarchical: fail"));

  const RunResult boolean =
      run("classify --query \"Q() :- R(x,y), S(y).\"");
  EXPECT_EQ(boolean.code, 0);
  EXPECT_TRUE(contains(boolean.out, "class: sq-hierarchical"));
  EXPECT_TRUE(contains(boolean.out, "sq-hierarchical: pass"));
}

TEST(CliClassify, JsonShapeAndParseErrors) {
  // Free x is strictly dominated by free y, so the query is exactly
  // q-hierarchical.
  const RunResult res =
      run("classify --query \"Q(x,y) :- R(x,y), S(y).\" --format json");
  EXPECT_EQ(res.code, 0);
  const auto j = nlohmann::json::parse(res.out);
  EXPECT_EQ(j["class"], "q-hierarchical");
  EXPECT_EQ(j["predicates"].size(), 4u);
  EXPECT_TRUE(j["predicates"][2]["pass"].get<bool>());
  EXPECT_FALSE(j["predicates"][3]["pass"].get<bool>());

  EXPECT_EQ(run("classify --query \"Q(x :- R(x).\"").code, 2);
  EXPECT_EQ(run("classify").code, 2);  // missing required option
  EXPECT_EQ(run("--help").code, 0);
}

TEST(CliShapley, SingleFactTableOutput) {
  const RunResult res = run("shapley --db " + tiny_db() +
                            " --query \"Q(x) :- R(x).\" --agg avg"
                            " --tau id:1 --fact \"R(1)\"");
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "R(1)")) << res.out;
  EXPECT_TRUE(contains(res.out, "3/4"));
  EXPECT_TRUE(contains(res.out, "0.750000"));
  EXPECT_TRUE(contains(res.out, "avgqnt"));
}

TEST(CliShapley, AllFactsJsonAndOracleAgreement) {
  const RunResult res = run("shapley --db " + tiny_db() +
                            " --query \"Q(x) :- R(x).\" --agg avg"
                            " --tau id:1 --all --check-oracle"
                            " --format json");
  EXPECT_EQ(res.code, 0);
  const auto j = nlohmann::json::parse(res.out);
  EXPECT_EQ(j["value_kind"], "shapley");
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"][0]["fact"], "R(0)");
  EXPECT_EQ(j["results"][0]["value"], "-1/4");
  EXPECT_EQ(j["results"][1]["fact"], "R(1)");
  EXPECT_EQ(j["results"][1]["value"], "3/4");
  EXPECT_EQ(j["results"][1]["engine"], "avgqnt");
}

TEST(CliShapley, BanzhafAndForcedEngines) {
  const std::string base = "shapley --db " + tiny_db() +
                           " --query \"Q(x) :- R(x).\" --agg avg"
                           " --tau id:1 --fact \"R(1)\"";
  const RunResult banzhaf = run(base + " --value banzhaf --format json");
  EXPECT_EQ(banzhaf.code, 0);
  EXPECT_EQ(nlohmann::json::parse(banzhaf.out)["value_kind"], "banzhaf");

  const RunResult forced = run(base + " --engine avgqnt");
  EXPECT_EQ(forced.code, 0);
  EXPECT_TRUE(contains(forced.out, "avgqnt"));

  const RunResult brute = run(base + " --force-bruteforce");
  EXPECT_EQ(brute.code, 0);
  EXPECT_TRUE(contains(brute.out, "bruteforce"));
  EXPECT_TRUE(contains(brute.out, "3/4"));

  // A mismatched engine request is refused, not silently rerouted.
  EXPECT_EQ(run(base + " --engine maxmin").code, 3);
}

TEST(CliShapley, ErrorExitCodes) {
  const std::string head = "shapley --db " + tiny_db();
  // Absent and exogenous facts are input errors.
  EXPECT_EQ(run(head + " --query \"Q(x) :- R(x).\" --agg avg --tau id:1"
                       " --fact \"R(7)\"")
                .code,
            2);
  // The cap turns subset enumeration into a refusal.
  EXPECT_EQ(run(head + " --query \"Q(x) :- R(x).\" --agg avg --tau id:1"
                       " --fact \"R(1)\" --force-bruteforce --cap 1")
                .code,
            4);
  // Schema mismatch between query and database.
  EXPECT_EQ(run(head + " --query \"Q(x) :- R(x,y).\" --agg sum --tau id:1"
                       " --fact \"R(1)\"")
                .code,
            2);
  // Missing both --fact and --all.
  EXPECT_EQ(run(head + " --query \"Q(x) :- R(x).\" --agg avg --tau id:1")
                .code,
            2);
}

TEST(CliShapley, EnvironmentCapAndDeterminism) {
  const std::string base = "shapley --db " + tiny_db() +
                           " --query \"Q(x) :- R(x).\" --agg avg"
                           " --tau id:1 --all";
  // SHAPQ_CAP applies when --cap is absent and a flag overrides it.
  const RunResult env_capped = run_cmd(
      "SHAPQ_CAP=1 " + std::string(SHAPQ_CLI_PATH) + " " + base +
      " --force-bruteforce 2>/dev/null");
  EXPECT_EQ(env_capped.code, 4);
  const RunResult overridden = run_cmd(
      "SHAPQ_CAP=1 " + std::string(SHAPQ_CLI_PATH) + " " + base +
      " --force-bruteforce --cap 0 2>/dev/null");
  EXPECT_EQ(overridden.code, 0);

  const RunResult first = run(base);
  const RunResult second = run(base);
  EXPECT_EQ(first.code, 0);
  EXPECT_EQ(first.out, second.out);
}

TEST(CliAxioms, PassVerdictOnAnEngineInstance) {
  const RunResult res = run("axioms --db " + tiny_db() +
                            " --query \"Q(x) :- R(x).\" --agg avg"
                            " --tau id:1 --check-oracle");
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "efficiency: pass"));
  EXPECT_TRUE(contains(res.out, "null-player: pass"));
  EXPECT_TRUE(contains(res.out, "symmetry: pass"));
  EXPECT_TRUE(contains(res.out, "verdict: PASS"));
}

TEST(CliAxioms, SymmetricPairsAreFoundAndJsonReports) {
  // Two interchangeable S-facts joining the same R-fact.
  const std::string db = write_file("sym.json", R"({
  "relations": [
    {"name": "R", "arity": 2,
     "facts": [{"tuple": [1, 2], "endogenous": false},
               {"tuple": [1, 3], "endogenous": false}]},
    {"name": "S", "arity": 1,
     "facts": [{"tuple": [2], "endogenous": true},
               {"tuple": [3], "endogenous": true}]}
  ]
})");
  const RunResult res = run("axioms --db " + db +
                            " --query \"Q(x) :- R(x,y), S(y).\""
                            " --agg count --tau gt:0:1 --format json");
  EXPECT_EQ(res.code, 0);
  const auto j = nlohmann::json::parse(res.out);
  EXPECT_EQ(j["verdict"], "PASS");
  EXPECT_EQ(j["efficiency"]["pass"], true);
  EXPECT_GE(j["symmetric_pairs_checked"].get<int>(), 1);
}

TEST(CliGadget, SetCoverAvgRecoversTheCoverCount) {
  const std::string inst = write_file("cover.json",
                                      R"({"n": 4, "sets": [[1,2],[2,3],[3,4]]})");
  const RunResult res = run("gadget setcover-avg --instance " + inst);
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "covers (recovered): 2"));
  EXPECT_TRUE(contains(res.out, "covers (direct): 2"));
  EXPECT_TRUE(contains(res.out, "verdict: verified"));

  const std::string bad = write_file("badcover.json",
                                     R"({"n": 2, "sets": [[1,5]]})");
  EXPECT_EQ(run("gadget setcover-avg --instance " + bad).code, 2);
}

TEST(CliGadget, SetCoverQntMatchesTheCoverGame) {
  const std::string inst = write_file("cover2.json",
                                      R"({"n": 2, "sets": [[1],[2],[1,2]]})");
  for (const std::string fraction : {"1/3", "1/2", "2/3"}) {
    const RunResult res = run("gadget setcover-qnt --instance " + inst +
                              " --fraction " + fraction);
    EXPECT_EQ(res.code, 0) << fraction;
    EXPECT_TRUE(contains(res.out, "verdict: verified")) << res.out;
  }
}

TEST(CliGadget, PermanentDupOnBothVariants) {
  const std::string ones = write_file("ones.json",
                                      R"({"matrix": [[1,1],[1,1]]})");
  const RunResult res = run("gadget permanent-dup --instance " + ones);
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "permanent (recovered): 2"));
  EXPECT_TRUE(contains(res.out, "verdict: verified"));

  const std::string id3 = write_file("id3.json",
                                     R"({"matrix": [[1,0,0],[0,1,0],[0,0,1]]})");
  const RunResult id_res =
      run("gadget permanent-dup --instance " + id3 + " --variant id");
  EXPECT_EQ(id_res.code, 0);
  EXPECT_TRUE(contains(id_res.out, "permanent (recovered): 1"));

  const std::string ragged = write_file("ragged.json",
                                        R"({"matrix": [[1,0],[1]]})");
  EXPECT_EQ(run("gadget permanent-dup --instance " + ragged).code, 2);
}

TEST(CliGadget, EmbedPreservesValuesOnAHarderQuery) {
  const std::string db = write_file("embed.json", R"({
  "relations": [
    {"name": "R", "arity": 2,
     "facts": [{"tuple": [1, 2], "endogenous": true},
               {"tuple": [3, 2], "endogenous": false}]},
    {"name": "S", "arity": 1,
     "facts": [{"tuple": [2], "endogenous": true},
               {"tuple": [4], "endogenous": true}]}
  ]
})");
  const RunResult res =
      run("gadget embed --query \"Q0(x) :- R0(x,y), S0(y), T0(y).\""
          " --db " + db + " --agg avg --tau relu:1");
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "verdict: preserved")) << res.out;
  EXPECT_TRUE(contains(res.out, "R0(1,2)"));

  // A q-hierarchical target is not a valid embedding target.
  EXPECT_EQ(run("gadget embed --query \"Q0(x) :- R0(x,y).\" --db " + db)
                .code,
            5);
}

TEST(CliCorpus, GeneratesAndVerifiesManifests) {
  const auto out_dir = scratch_dir() / "corpus-out";
  std::filesystem::remove_all(out_dir);
  const RunResult res =
      run("corpus --family maxmin --count 2 --seed 11 --max-endo 5"
          " --max-total 9 --out " + out_dir.string());
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "all match")) << res.out;
  EXPECT_TRUE(std::filesystem::exists(out_dir / "maxmin-0.json"));
  EXPECT_TRUE(std::filesystem::exists(out_dir / "maxmin-1.json"));

  // The written manifests load back as valid databases.
  const Database d = load_database((out_dir / "maxmin-0.json").string());
  EXPECT_GE(count_endogenous(d), 1u);

  EXPECT_EQ(run("corpus --family nosuch").code, 2);
}

TEST(CliCorpus, SameSeedSameOutput) {
  const std::string args = "corpus --family cdist --count 2 --seed 5"
                           " --max-endo 4 --max-total 8";
  const RunResult first = run(args);
  const RunResult second = run(args);
  EXPECT_EQ(first.code, 0);
  EXPECT_EQ(first.out, second.out);
}

TEST(CliIo, ManifestRoundTripIsByteStable) {
  const std::string path = tiny_db();
  const Database d = load_database(path);
  const std::string once = manifest_to_string(d);
  const Database again = manifest_from_string(once);
  EXPECT_EQ(d.facts, again.facts);
  EXPECT_EQ(manifest_to_string(again), once);
}

TEST(CliIo, CsvDirectoryMode) {
  const auto dir = scratch_dir() / "csvdb";
  std::filesystem::create_directories(dir);
  {
    std::ofstream r(dir / "R.csv");
    r << "# endogenous = true\n1,2\n3,2,exo\n";
    std::ofstream s(dir / "S.csv");
    s << "2\n4\n";
  }
  const RunResult res = run("shapley --db " + dir.string() +
                            " --query \"Q(x) :- R(x,y), S(y).\""
                            " --agg count --tau gt:0:1 --all");
  EXPECT_EQ(res.code, 0);
  EXPECT_TRUE(contains(res.out, "R(1,2)"));
  EXPECT_TRUE(contains(res.out, "S(2)"));
  EXPECT_FALSE(contains(res.out, "R(3,2)"));  // exogenous: no row
}

}  // namespace
}  // namespace shapq
