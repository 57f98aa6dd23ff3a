#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rst/corpus.hpp"
#include "rst/http_oracle.hpp"
#include "rst/parse.hpp"
#include "rst/prompt.hpp"

// Subcommand implementations behind tools/rstparse. Each returns an exit
// code from the taxonomy below and reports problems on `err`.
namespace rst::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,   // bad flags, missing endpoint, unreadable config files
  kIoError = 3,       // missing corpus files, unwritable outputs
  kOracleError = 4,   // completion transport failed after retries
  kDataError = 5,     // malformed treebank data, missing predictions
};

struct CorpusConfig {
  std::filesystem::path directory;
  /// When empty, every .dis file in the directory is used.
  std::filesystem::path manifest;
  std::string split = "test";
  /// "rstdt", "gum", "instrdt" or an inventory file.
  std::string inventory = "rstdt";
  /// Optional fine-to-coarse map; identity over the inventory otherwise.
  std::filesystem::path relation_map;
  std::string encoding = "utf-8";
};

struct OracleConfig {
  /// replay | garbage | chaotic | http
  std::string kind = "replay";
  std::uint64_t seed = 0;
  HttpOracleConfig http;
  /// Response cache directory; empty disables caching.
  std::filesystem::path cache_dir;
};

struct RunConfig {
  CorpusConfig corpus;
  Strategy strategy = Strategy::BottomUp;
  OracleConfig oracle;
  bool skip_forced = true;
  std::size_t span_char_budget = 0;
  std::filesystem::path out_dir;
  int jobs = 1;
};

struct EvalConfig {
  CorpusConfig corpus;
  /// Directory with <id>.tree files, or a parse output directory containing
  /// trees/.
  std::filesystem::path predictions;
  bool include_root = true;
  std::filesystem::path report_csv;
  std::filesystem::path relations_csv;
};

struct ExportConfig {
  CorpusConfig corpus;
  Strategy strategy = Strategy::BottomUp;
  bool skip_forced = true;
  std::size_t span_char_budget = 0;
  std::filesystem::path out_dir;
};

struct DeriveConfig {
  CorpusConfig corpus;
  Strategy strategy = Strategy::BottomUp;
  std::filesystem::path out_dir;
};

LabelInventory inventory_for(const CorpusConfig& config);
CorpusOptions corpus_options(const CorpusConfig& config);
/// Documents of the configured split (or the whole directory).
std::vector<Document> load_corpus(const CorpusConfig& config);

/// JSON of the resolved configuration and its SHA-256.
std::string config_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

/// Writes trees/<id>.tree, traces/<id>.jsonl, run_manifest.json and
/// errors.log under out_dir.
int cmd_parse(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalConfig& config, std::ostream& out, std::ostream& err);
int cmd_report_relations(const EvalConfig& config, std::ostream& out,
                         std::ostream& err);
int cmd_export_training(const ExportConfig& config, std::ostream& out,
                        std::ostream& err);
/// One <id>.<strategy>.jsonl of gold decisions per document.
int cmd_derive_actions(const DeriveConfig& config, std::ostream& out,
                       std::ostream& err);

/// Gold decision records as written by derive-actions.
std::string gold_decisions_jsonl(Strategy strategy, const Document& document);
/// Inverse of gold_decisions_jsonl for replay: bottom-up actions or
/// top-down splits.
std::vector<Action> read_gold_actions(std::string_view jsonl);
std::vector<GoldSplit> read_gold_splits(std::string_view jsonl);

/// Maps an exception thrown by the library to an exit code.
int exit_code_for(const std::exception& e);

}  // namespace rst::cli
