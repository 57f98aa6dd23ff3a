#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rst/cli.hpp"
#include "rst/error.hpp"

namespace {

void add_corpus_options(CLI::App& app, rst::cli::CorpusConfig& c) {
  app.add_option("--corpus", c.directory, "Directory of .dis files")
      ->required();
  app.add_option("--manifest", c.manifest, "Split manifest");
  app.add_option("--split", c.split, "Split to read from the manifest")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  app.add_option("--inventory", c.inventory,
                 "rstdt, gum, instrdt, or an inventory file");
  app.add_option("--relation-map", c.relation_map,
                 "Fine-to-coarse relation map");
  app.add_option("--encoding", c.encoding, "utf-8 or latin-1");
}

CLI::Option* add_strategy(CLI::App& app, rst::Strategy& s) {
  return app
      .add_option_function<std::string>(
          "--strategy",
          [&s](const std::string& v) { s = rst::parse_strategy(v); },
          "bottom-up or top-down")
      ->check(CLI::IsMember({"bottom-up", "top-down"}));
}

// Resolved options as an INI section that --config reads back.
class IniWriter {
 public:
  explicit IniWriter(const std::string& section) { out_ << '[' << section << "]\n"; }
  template <typename T>
  IniWriter& set(const std::string& key, const T& value) {
    std::ostringstream v;
    v << value;
    out_ << key << '=' << quoted(v.str()) << '\n';
    return *this;
  }
  IniWriter& flag(const std::string& key, bool on) {
    out_ << key << '=' << (on ? "true" : "false") << '\n';
    return *this;
  }
  IniWriter& corpus(const rst::cli::CorpusConfig& c) {
    set("corpus", c.directory.string());
    if (!c.manifest.empty()) set("manifest", c.manifest.string()).set("split", c.split);
    set("inventory", c.inventory);
    if (!c.relation_map.empty()) set("relation-map", c.relation_map.string());
    return set("encoding", c.encoding);
  }
  void write(const std::filesystem::path& path) const {
    std::ofstream(path) << out_.str();
  }

 private:
  static std::string quoted(const std::string& v) {
    std::string q = "\"";
    for (char c : v) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    return q + '"';
  }
  std::ostringstream out_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-prompted RST discourse parsing"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file with option values");
  app.set_version_flag("--version", "rstparse 0.1.0");

  rst::cli::RunConfig run;
  long long backoff_ms = run.oracle.http.initial_backoff.count();
  long long timeout_ms = run.oracle.http.timeout.count();
  auto* parse = app.add_subcommand("parse", "Parse documents with an oracle");
  add_corpus_options(*parse, run.corpus);
  add_strategy(*parse, run.strategy);
  parse->add_option("--oracle", run.oracle.kind,
                    "replay, garbage, chaotic or http")
      ->check(CLI::IsMember({"replay", "garbage", "chaotic", "http"}));
  parse->add_option("--seed", run.oracle.seed, "Seed for random oracles");
  parse->add_option("--endpoint", run.oracle.http.endpoint,
                    "Completion URL for the http oracle");
  parse->add_option("--model", run.oracle.http.model, "Model id");
  parse->add_option("--max-tokens", run.oracle.http.max_tokens, "Completion length limit");
  parse->add_option("--temperature", run.oracle.http.temperature, "0 for greedy decoding");
  parse->add_option("--retries", run.oracle.http.max_retries, "Extra attempts after a failed request");
  parse->add_option("--backoff-ms", backoff_ms, "Initial retry delay, doubled per attempt");
  parse->add_option("--timeout-ms", timeout_ms, "Per-request timeout");
  parse->add_option("--cache", run.oracle.cache_dir, "Response cache directory");
  parse->add_flag("!--query-forced", run.skip_forced,
                  "Ask the oracle even when only one move is legal");
  parse->add_option("--span-budget", run.span_char_budget,
                    "Max bytes per span text in prompts (0 = unlimited)");
  parse->add_option("--jobs,-j", run.jobs, "Documents parsed in parallel");
  parse->add_option("--out,-o", run.out_dir, "Output directory")->required();

  rst::cli::EvalConfig ev;
  auto* eval = app.add_subcommand("eval", "Parseval scores against gold");
  add_corpus_options(*eval, ev.corpus);
  eval->add_option("--pred", ev.predictions, "Prediction directory")
      ->required();
  eval->add_flag("!--exclude-root", ev.include_root,
                 "Do not count the root span");
  eval->add_option("--csv", ev.report_csv, "Write level scores as CSV");
  eval->add_option("--relations-csv", ev.relations_csv,
                   "Write per-relation scores as CSV");

  rst::cli::EvalConfig rel;
  auto* report = app.add_subcommand("report-relations",
                                    "Per-relation F1 table");
  add_corpus_options(*report, rel.corpus);
  report->add_option("--pred", rel.predictions, "Prediction directory")
      ->required();
  report->add_flag("!--exclude-root", rel.include_root, "Do not count the root span");
  report->add_option("--csv", rel.relations_csv, "Write the table as CSV");

  rst::cli::ExportConfig ex;
  auto* exp = app.add_subcommand("export-training",
                                 "Write prompt/completion training pairs");
  add_corpus_options(*exp, ex.corpus);
  add_strategy(*exp, ex.strategy);
  exp->add_flag("!--include-forced", ex.skip_forced,
                "Also export forced moves");
  exp->add_option("--span-budget", ex.span_char_budget, "Max bytes per span text in prompts (0 = unlimited)");
  exp->add_option("--out,-o", ex.out_dir, "Output directory")->required();

  rst::cli::DeriveConfig dv;
  auto* derive = app.add_subcommand("derive-actions",
                                    "Write gold decision sequences");
  add_corpus_options(*derive, dv.corpus);
  add_strategy(*derive, dv.strategy);
  derive->add_option("--out,-o", dv.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Error& e) {
    const int code = app.exit(e);
    return code == 0 ? rst::cli::kOk : rst::cli::kUsage;
  }

  try {
    if (*parse) {
      run.oracle.http.initial_backoff = std::chrono::milliseconds(backoff_ms);
      run.oracle.http.timeout = std::chrono::milliseconds(timeout_ms);
      std::filesystem::create_directories(run.out_dir);
      IniWriter ini("parse");
      ini.corpus(run.corpus)
          .set("strategy", rst::to_string(run.strategy))
          .set("oracle", run.oracle.kind)
          .set("seed", run.oracle.seed);
      if (run.oracle.kind == "http") {
        const auto& h = run.oracle.http;
        ini.set("endpoint", h.endpoint)
            .set("model", h.model)
            .set("max-tokens", h.max_tokens)
            .set("temperature", h.temperature)
            .set("retries", h.max_retries)
            .set("backoff-ms", backoff_ms)
            .set("timeout-ms", timeout_ms);
        if (!run.oracle.cache_dir.empty()) ini.set("cache", run.oracle.cache_dir.string());
      }
      ini.flag("query-forced", !run.skip_forced)
          .set("span-budget", run.span_char_budget)
          .set("jobs", run.jobs)
          .set("out", run.out_dir.string())
          .write(run.out_dir / "config.ini");
      return rst::cli::cmd_parse(run, std::cout, std::cerr);
    }
    if (*eval) return rst::cli::cmd_eval(ev, std::cout, std::cerr);
    if (*report) return rst::cli::cmd_report_relations(rel, std::cout, std::cerr);
    if (*exp) {
      std::filesystem::create_directories(ex.out_dir);
      IniWriter("export-training")
          .corpus(ex.corpus)
          .set("strategy", rst::to_string(ex.strategy))
          .flag("include-forced", !ex.skip_forced)
          .set("span-budget", ex.span_char_budget)
          .set("out", ex.out_dir.string())
          .write(ex.out_dir / "config.ini");
      return rst::cli::cmd_export_training(ex, std::cout, std::cerr);
    }
    if (*derive) return rst::cli::cmd_derive_actions(dv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rst::cli::exit_code_for(e);
  }
  return rst::cli::kUsage;
}
