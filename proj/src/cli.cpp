#include "rst/cli.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rst/cache.hpp"
#include "rst/error.hpp"
#include "rst/eval.hpp"
#include "rst/hash.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace rst::cli {

namespace {

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw fs::filesystem_error("cannot write", tmp,
                                 std::make_error_code(std::errc::io_error));
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw fs::filesystem_error("short write", tmp,
                                 std::make_error_code(std::errc::io_error));
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingPrediction("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string span_label(Span s) {
  return s.first == s.last
             ? std::to_string(s.first)
             : std::to_string(s.first) + "-" + std::to_string(s.last);
}

std::uint64_t seed_for(std::uint64_t seed, const std::string& id) {
  // Per-document stream so results do not depend on scheduling.
  const std::string h = sha256_hex(id);
  return seed ^ std::stoull(h.substr(0, 16), nullptr, 16);
}

struct DocOutcome {
  std::string id;
  int edus = 0;
  bool ok = false;
  int code = kOk;
  std::string error;
  std::map<PromptKind, std::array<std::size_t, 3>> counts;  // total, queried, corrected
};

json counts_json(const std::map<PromptKind, std::array<std::size_t, 3>>& c) {
  json out = json::object();
  for (PromptKind k : kAllPromptKinds) {
    auto it = c.find(k);
    if (it == c.end()) continue;
    out[std::string(to_string(k))] = {{"decisions", it->second[0]},
                                      {"queried", it->second[1]},
                                      {"corrected", it->second[2]}};
  }
  return out;
}

int worst(int a, int b) {
  // Oracle transport failures dominate, then I/O, then data.
  auto rank = [](int c) {
    switch (c) {
      case kOracleError: return 4;
      case kIoError: return 3;
      case kConfigError: return 2;
      case kDataError: return 1;
      default: return 0;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const OracleFailure*>(&e)) return kOracleError;
  if (dynamic_cast<const MissingDocument*>(&e)) return kIoError;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIoError;
  return kDataError;
}

LabelInventory inventory_for(const CorpusConfig& config) {
  return LabelInventory::resolve(config.inventory);
}

CorpusOptions corpus_options(const CorpusConfig& config) {
  CorpusOptions o;
  o.directory = config.directory;
  o.inventory = inventory_for(config);
  o.encoding = parse_encoding(config.encoding);
  if (!config.relation_map.empty()) {
    o.relation_map = RelationMap::load(config.relation_map, o.inventory);
  }
  return o;
}

std::vector<Document> load_corpus(const CorpusConfig& config) {
  const CorpusOptions options = corpus_options(config);
  if (!config.manifest.empty()) {
    CorpusSplits splits = load_split(config.manifest, options);
    return std::move(splits[config.split]);
  }
  std::vector<Document> docs;
  for (const auto& id : list_documents(config.directory)) {
    docs.push_back(load_document(options, id));
  }
  return docs;
}

namespace {

json corpus_json(const CorpusConfig& c) {
  return {{"directory", c.directory.string()},
          {"manifest", c.manifest.string()},
          {"split", c.manifest.empty() ? "" : c.split},
          {"inventory", c.inventory},
          {"relation_map", c.relation_map.string()},
          {"encoding", c.encoding}};
}

json hashed_config(const RunConfig& c) {
  json oracle = {{"kind", c.oracle.kind}};
  if (c.oracle.kind == "garbage" || c.oracle.kind == "chaotic") {
    oracle["seed"] = c.oracle.seed;
  }
  if (c.oracle.kind == "http") {
    oracle["endpoint"] = c.oracle.http.endpoint;
    oracle["fingerprint"] = c.oracle.http.fingerprint();
  }
  return {{"corpus", corpus_json(c.corpus)},
          {"strategy", std::string(to_string(c.strategy))},
          {"oracle", oracle},
          {"skip_forced", c.skip_forced},
          {"span_char_budget", c.span_char_budget}};
}

}  // namespace

std::string config_json(const RunConfig& config) {
  json j = hashed_config(config);
  j["cache_dir"] = config.oracle.cache_dir.string();
  j["out_dir"] = config.out_dir.string();
  j["jobs"] = config.jobs;
  return j.dump(2);
}

std::string config_hash(const RunConfig& config) {
  return sha256_hex(hashed_config(config).dump());
}

int cmd_parse(const RunConfig& config, std::ostream& out, std::ostream& err) {
  static const char* kKinds[] = {"replay", "garbage", "chaotic", "http"};
  if (std::find(std::begin(kKinds), std::end(kKinds), config.oracle.kind) ==
      std::end(kKinds)) {
    err << "error: unknown oracle kind '" << config.oracle.kind << "'\n";
    return kConfigError;
  }
  if (config.out_dir.empty()) {
    err << "error: no output directory\n";
    return kConfigError;
  }
  if (config.jobs < 1) {
    err << "error: jobs must be positive\n";
    return kConfigError;
  }

  std::unique_ptr<HttpCompletionOracle> http;
  std::unique_ptr<CachedOracle> cached;
  std::vector<Document> docs;
  LabelInventory inventory = LabelInventory::rstdt();
  try {
    if (config.oracle.kind == "http") {
      http = std::make_unique<HttpCompletionOracle>(config.oracle.http);
      if (!config.oracle.cache_dir.empty()) {
        cached = std::make_unique<CachedOracle>(*http, config.oracle.cache_dir);
      }
    }
    inventory = inventory_for(config.corpus);
    docs = load_corpus(config.corpus);
    fs::create_directories(config.out_dir / "trees");
    fs::create_directories(config.out_dir / "traces");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }

  ParsePolicy policy;
  policy.skip_forced = config.skip_forced;
  policy.prompt.span_char_budget = config.span_char_budget;

  std::vector<DocOutcome> outcomes(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic) num_threads(config.jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Document& doc = docs[static_cast<std::size_t>(i)];
    DocOutcome& o = outcomes[static_cast<std::size_t>(i)];
    o.id = doc.id;
    o.edus = doc.num_edus();
    try {
      std::unique_ptr<Oracle> local;
      Oracle* oracle = nullptr;
      if (config.oracle.kind == "replay") {
        local = std::make_unique<ReplayOracle>(
            gold_replay_oracle(config.strategy, doc, config.skip_forced));
      } else if (config.oracle.kind == "garbage" ||
                 config.oracle.kind == "chaotic") {
        local = std::make_unique<RandomOracle>(
            seed_for(config.oracle.seed, doc.id),
            config.oracle.kind == "garbage" ? RandomOracle::Mode::Garbage
                                            : RandomOracle::Mode::Chaotic);
      }
      oracle = local ? local.get()
                     : (cached ? static_cast<Oracle*>(cached.get()) : http.get());
      ParseResult r =
          parse_document(config.strategy, doc, *oracle, inventory, policy);
      for (PromptKind k : kAllPromptKinds) {
        if (r.trace.count(k) == 0) continue;
        o.counts[k] = {r.trace.count(k), r.trace.queried(k),
                       r.trace.corrected(k)};
      }
      write_file_atomic(config.out_dir / "trees" / (doc.id + ".tree"),
                        write_tree_record(doc.id, r.tree) + "\n");
      write_file_atomic(config.out_dir / "traces" / (doc.id + ".jsonl"),
                        to_jsonl(r.trace));
      o.ok = true;
    } catch (const std::exception& e) {
      o.code = exit_code_for(e);
      o.error = e.what();
    }
  }

  int code = kOk;
  std::string errors;
  json documents = json::array();
  std::map<PromptKind, std::array<std::size_t, 3>> totals;
  std::size_t parsed = 0;
  for (const auto& o : outcomes) {
    json d = {{"id", o.id}, {"edus", o.edus}, {"status", o.ok ? "ok" : "failed"}};
    if (o.ok) {
      ++parsed;
      d["decisions"] = counts_json(o.counts);
      for (const auto& [k, c] : o.counts) {
        for (int j = 0; j < 3; ++j) totals[k][j] += c[j];
      }
    } else {
      d["error"] = o.error;
      errors += o.id + "\t" + o.error + "\n";
      code = worst(code, o.code);
    }
    documents.push_back(std::move(d));
  }

  json manifest = {
      {"config_hash", config_hash(config)},
      {"config", hashed_config(config)},
      {"documents_total", outcomes.size()},
      {"documents_parsed", parsed},
      {"decisions", counts_json(totals)},
  };
  if (cached) {
    manifest["cache"] = {{"hits", cached->hits()}, {"misses", cached->misses()}};
  }
  manifest["documents"] = std::move(documents);

  try {
    write_file_atomic(config.out_dir / "run_manifest.json",
                      manifest.dump(2) + "\n");
    write_file_atomic(config.out_dir / "errors.log", errors);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  out << "parsed " << parsed << "/" << outcomes.size() << " documents into "
      << config.out_dir.string() << '\n';
  if (!errors.empty()) err << errors;
  return code;
}

namespace {

fs::path prediction_path(const fs::path& root, const std::string& id) {
  const fs::path nested = root / "trees" / (id + ".tree");
  if (fs::exists(nested)) return nested;
  return root / (id + ".tree");
}

std::vector<eval::TreePair> load_pairs(const EvalConfig& config) {
  std::vector<eval::TreePair> pairs;
  for (const Document& doc : load_corpus(config.corpus)) {
    if (!doc.gold) throw MissingGoldTree("document '" + doc.id + "' has no gold tree");
    const fs::path path = prediction_path(config.predictions, doc.id);
    if (!fs::exists(path)) {
      throw MissingPrediction("no prediction for document '" + doc.id +
                              "' (expected " + path.string() + ")");
    }
    std::string text = read_file(path);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
      text.pop_back();
    }
    auto [id, tree] = read_tree_record(text, doc.edus);
    if (id != doc.id) {
      throw MissingPrediction(path.string() + " holds document '" + id +
                              "', expected '" + doc.id + "'");
    }
    pairs.push_back({std::move(tree), *doc.gold});
  }
  if (pairs.empty()) throw EmptyCorpus("no documents to evaluate");
  return pairs;
}

}  // namespace

int cmd_eval(const EvalConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto pairs = load_pairs(config);
    eval::EvalOptions options{config.include_root};
    const auto counts = eval::score_corpus(pairs, options);
    out << eval::format_report(counts);
    if (!config.report_csv.empty()) {
      write_file_atomic(config.report_csv, eval::format_report_csv(counts));
    }
    if (!config.relations_csv.empty()) {
      const auto rows =
          eval::per_relation_f1(pairs, inventory_for(config.corpus), options);
      write_file_atomic(config.relations_csv, eval::format_relation_csv(rows));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}

int cmd_report_relations(const EvalConfig& config, std::ostream& out,
                         std::ostream& err) {
  try {
    const auto pairs = load_pairs(config);
    const auto rows = eval::per_relation_f1(
        pairs, inventory_for(config.corpus), {config.include_root});
    out << eval::format_relation_table(rows);
    if (!config.relations_csv.empty()) {
      write_file_atomic(config.relations_csv, eval::format_relation_csv(rows));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}

int cmd_export_training(const ExportConfig& config, std::ostream& out,
                        std::ostream& err) {
  try {
    if (config.out_dir.empty()) throw ConfigError("no output directory");
    const LabelInventory inventory = inventory_for(config.corpus);
    const auto docs = load_corpus(config.corpus);
    ExportOptions options;
    options.strategy = config.strategy;
    options.skip_forced = config.skip_forced;
    options.prompt.span_char_budget = config.span_char_budget;
    const TrainingSet set = export_training_pairs(docs, inventory, options);
    const auto files =
        write_training_files(config.out_dir, set, inventory, options);

    json skipped = json::array();
    for (const auto& d : docs) {
      if (d.num_edus() < 2) skipped.push_back(d.id);
    }
    json counts = json::object();
    for (const auto& [kind, examples] : set) {
      counts[std::string(to_string(kind))] = examples.size();
    }
    json manifest = {{"strategy", std::string(to_string(config.strategy))},
                     {"documents", docs.size()},
                     {"examples", counts},
                     {"skipped_single_edu", skipped}};
    write_file_atomic(config.out_dir / (std::string(to_string(config.strategy)) +
                                        ".manifest.json"),
                      manifest.dump(2) + "\n");
    for (const auto& f : files) out << f.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}

std::string gold_decisions_jsonl(Strategy strategy, const Document& document) {
  if (!document.gold) {
    throw MissingGoldTree("document '" + document.id + "' has no gold tree");
  }
  std::string out;
  if (document.num_edus() < 2) return out;
  int step = 0;
  if (strategy == Strategy::BottomUp) {
    ParserState state = initial_state(document);
    for (const Action& a : derive_shift_reduce_sequence(*document.gold)) {
      json j = {{"step", step++},
                {"state", state.summary()},
                {"kind", "action"},
                {"resolved", a.is_shift() ? "shift" : "reduce"}};
      if (a.is_reduce()) {
        j["nuclearity"] = std::string(to_string(a.nuclearity));
        j["relation"] = a.relation;
      }
      out += j.dump() + "\n";
      state = apply(state, a);
    }
  } else {
    for (const GoldSplit& s : derive_split_sequence(*document.gold)) {
      json j = {{"step", step++},
                {"state", "span=" + span_label(s.span)},
                {"kind", "split"},
                {"resolved", std::to_string(s.k)},
                {"nuclearity", std::string(to_string(s.nuclearity))},
                {"relation", s.relation}};
      out += j.dump() + "\n";
    }
  }
  return out;
}

namespace {

template <typename F>
void for_each_record(std::string_view jsonl, F&& f) {
  std::size_t pos = 0;
  int lineno = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.empty()) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw SyntaxError("decision record " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
}

Span parse_span_label(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    const int v = std::stoi(text);
    return {v, v};
  }
  return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
}

}  // namespace

std::vector<Action> read_gold_actions(std::string_view jsonl) {
  std::vector<Action> out;
  for_each_record(jsonl, [&](const json& j) {
    const std::string kind = j.at("resolved").get<std::string>();
    if (kind == "shift") {
      out.push_back(Action::shift());
    } else if (kind == "reduce") {
      out.push_back(Action::reduce(
          parse_nuclearity(j.at("nuclearity").get<std::string>()),
          j.at("relation").get<std::string>()));
    } else {
      throw SyntaxError("unknown action '" + kind + "'");
    }
  });
  return out;
}

std::vector<GoldSplit> read_gold_splits(std::string_view jsonl) {
  std::vector<GoldSplit> out;
  for_each_record(jsonl, [&](const json& j) {
    const std::string state = j.at("state").get<std::string>();
    if (state.rfind("span=", 0) != 0) {
      throw SyntaxError("split record without span state");
    }
    GoldSplit s;
    s.span = parse_span_label(state.substr(5));
    s.k = std::stoi(j.at("resolved").get<std::string>());
    s.nuclearity = parse_nuclearity(j.at("nuclearity").get<std::string>());
    s.relation = j.at("relation").get<std::string>();
    out.push_back(std::move(s));
  });
  return out;
}

int cmd_derive_actions(const DeriveConfig& config, std::ostream& out,
                       std::ostream& err) {
  try {
    if (config.out_dir.empty()) throw ConfigError("no output directory");
    const auto docs = load_corpus(config.corpus);
    const std::string suffix =
        "." + std::string(to_string(config.strategy)) + ".jsonl";
    for (const Document& doc : docs) {
      write_file_atomic(config.out_dir / (doc.id + suffix),
                        gold_decisions_jsonl(config.strategy, doc));
    }
    out << "wrote " << docs.size() << " decision files to "
        << config.out_dir.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}

}  // namespace rst::cli
