#ifndef SHAPQ_JSON_IO_HPP
#define SHAPQ_JSON_IO_HPP

#include <string>

#include "shapq/model.hpp"

// Database ingestion and serialization.
//
// The primary format is a single JSON manifest:
//
//   {"relations": [{"name": "R", "arity": 2,
//                   "facts": [{"tuple": [1, "a"], "endogenous": true}]}]}
//
// Tuple entries are integers or strings. `endogenous` defaults to true.
// Serialization is canonical (sorted facts, fixed key order), so a manifest
// round-trips byte-identically through save/load.
//
// The alternative format is a directory of <relation>.csv files. Lines
// starting with '#' form a small key = value header; the only recognized
// key is `endogenous`, the per-file default provenance. Each data row is
// one tuple; a final unquoted cell `endo` or `exo` overrides the default
// for that row. Unquoted numeric cells are integers, quoted or symbolic
// cells are strings.

namespace shapq {

// Parses a manifest from JSON text. SyntaxError on malformed JSON or an
// unexpected shape; arity and duplicate violations surface as
// SchemaMismatch from fact insertion.
Database manifest_from_string(const std::string& text);

// Canonical manifest text for a database, ending in a newline.
std::string manifest_to_string(const Database& db);

// Loads a database from a path: a directory is read in CSV-per-relation
// mode, anything else as a JSON manifest.
Database load_database(const std::string& path);

void save_manifest(const Database& db, const std::string& path);

}  // namespace shapq

#endif  // SHAPQ_JSON_IO_HPP
