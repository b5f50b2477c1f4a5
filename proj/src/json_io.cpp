#include "shapq/json_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "shapq/errors.hpp"

namespace shapq {

namespace {

using nlohmann::ordered_json;

Constant constant_from_json(const ordered_json& j) {
  if (j.is_string()) return Constant(j.get<std::string>());
  if (j.is_number_integer()) return Constant(Integer(j.get<long long>()));
  fail(errc::syntax_error,
       "tuple entries are integers or strings, got " + j.dump());
}

ordered_json constant_to_json(const Constant& c) {
  if (constant_is_integer(c)) {
    const Integer& v = std::get<Integer>(c);
    // Arbitrary-precision values outside the JSON integer range would not
    // round-trip; the desk-scale instances here never reach them.
    return ordered_json(v.convert_to<long long>());
  }
  return ordered_json(std::get<std::string>(c));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::syntax_error, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// --- CSV-per-relation mode ---------------------------------------------

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, s.find_last_not_of(" \t\r") - begin + 1);
}

struct CsvCell {
  Constant value;
  bool quoted = false;
};

std::vector<CsvCell> split_csv_row(const std::string& line,
                                   const std::string& where) {
  std::vector<CsvCell> cells;
  std::string current;
  bool quoted = false, in_quotes = false, any_quote = false;
  const auto flush = [&] {
    const std::string text = quoted ? current : trim(current);
    if (quoted) {
      cells.push_back({Constant(text), true});
    } else if (!text.empty() &&
               text.find_first_not_of("-0123456789") == std::string::npos &&
               text != "-") {
      cells.push_back({Constant(Integer(text)), false});
    } else if (!text.empty()) {
      cells.push_back({Constant(text), false});
    } else {
      fail(errc::syntax_error, "empty cell in " + where);
    }
    current.clear();
    quoted = false;
  };
  for (char ch : line) {
    if (in_quotes) {
      if (ch == '"') {
        in_quotes = false;
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
      quoted = true;
      any_quote = true;
    } else if (ch == ',') {
      flush();
    } else {
      current += ch;
    }
  }
  if (in_quotes) fail(errc::syntax_error, "unterminated quote in " + where);
  (void)any_quote;
  flush();
  return cells;
}

void load_csv_relation(Database& db, const std::filesystem::path& file) {
  const std::string relation = file.stem().string();
  std::ifstream in(file);
  if (!in) fail(errc::syntax_error, "cannot open " + file.string());
  bool default_endo = true;
  bool declared = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where =
        file.filename().string() + ":" + std::to_string(lineno);
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text[0] == '#') {
      const auto eq = text.find('=');
      if (eq == std::string::npos) continue;  // plain comment
      const std::string key = trim(text.substr(1, eq - 1));
      const std::string value = trim(text.substr(eq + 1));
      if (key == "endogenous") {
        if (value == "true") {
          default_endo = true;
        } else if (value == "false") {
          default_endo = false;
        } else {
          fail(errc::syntax_error,
               "endogenous must be true or false in " + where);
        }
      } else {
        fail(errc::syntax_error, "unknown header key '" + key + "' in " +
                                     where);
      }
      continue;
    }
    std::vector<CsvCell> cells = split_csv_row(text, where);
    bool endo = default_endo;
    if (!cells.empty() && !cells.back().quoted &&
        !constant_is_integer(cells.back().value)) {
      const std::string& marker = std::get<std::string>(cells.back().value);
      if (marker == "endo" || marker == "exo") {
        endo = marker == "endo";
        cells.pop_back();
      }
    }
    if (cells.empty()) {
      fail(errc::syntax_error, "row with no tuple in " + where);
    }
    Fact fact{relation, {}};
    for (const CsvCell& cell : cells) fact.tuple.push_back(cell.value);
    if (!declared) {
      add_relation(db, relation, fact.tuple.size());
      declared = true;
    }
    insert_fact(db, std::move(fact), endo);
  }
  if (!declared) {
    fail(errc::syntax_error, "no facts in " + file.string());
  }
}

Database load_csv_dir(const std::string& path) {
  Database db;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  if (files.empty()) {
    fail(errc::syntax_error, "no .csv files under " + path);
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) load_csv_relation(db, file);
  return db;
}

}  // namespace

Database manifest_from_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::syntax_error, e.what());
  }
  if (!j.is_object() || !j.contains("relations") ||
      !j["relations"].is_array()) {
    fail(errc::syntax_error, "manifest needs a top-level 'relations' array");
  }
  Database db;
  for (const ordered_json& rel : j["relations"]) {
    if (!rel.is_object() || !rel.contains("name") ||
        !rel["name"].is_string()) {
      fail(errc::syntax_error, "relation entries need a string 'name'");
    }
    const std::string name = rel["name"].get<std::string>();
    if (!rel.contains("arity") || !rel["arity"].is_number_unsigned()) {
      fail(errc::syntax_error,
           "relation " + name + " needs a non-negative 'arity'");
    }
    add_relation(db, name, rel["arity"].get<std::size_t>());
    if (!rel.contains("facts")) continue;
    if (!rel["facts"].is_array()) {
      fail(errc::syntax_error, "relation " + name + ": 'facts' is an array");
    }
    for (const ordered_json& entry : rel["facts"]) {
      if (!entry.is_object() || !entry.contains("tuple") ||
          !entry["tuple"].is_array()) {
        fail(errc::syntax_error,
             "facts of " + name + " need a 'tuple' array");
      }
      Fact fact{name, {}};
      for (const ordered_json& cell : entry["tuple"]) {
        fact.tuple.push_back(constant_from_json(cell));
      }
      bool endo = true;
      if (entry.contains("endogenous")) {
        if (!entry["endogenous"].is_boolean()) {
          fail(errc::syntax_error, "'endogenous' is a boolean");
        }
        endo = entry["endogenous"].get<bool>();
      }
      insert_fact(db, std::move(fact), endo);
    }
  }
  return db;
}

std::string manifest_to_string(const Database& db) {
  ordered_json relations = ordered_json::array();
  for (const auto& [name, arity] : db.schema) {
    ordered_json rel;
    rel["name"] = name;
    rel["arity"] = arity;
    ordered_json facts = ordered_json::array();
    for (const auto& [fact, endo] : db.facts) {  // map order: sorted
      if (fact.relation != name) continue;
      ordered_json entry;
      entry["tuple"] = ordered_json::array();
      for (const Constant& c : fact.tuple) {
        entry["tuple"].push_back(constant_to_json(c));
      }
      entry["endogenous"] = endo;
      facts.push_back(std::move(entry));
    }
    rel["facts"] = std::move(facts);
    relations.push_back(std::move(rel));
  }
  ordered_json manifest;
  manifest["relations"] = std::move(relations);
  return manifest.dump(2) + "\n";
}

Database load_database(const std::string& path) {
  if (std::filesystem::is_directory(path)) return load_csv_dir(path);
  return manifest_from_string(read_file(path));
}

void save_manifest(const Database& db, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::syntax_error, "cannot open " + path + " for writing");
  out << manifest_to_string(db);
}

}  // namespace shapq
