#include "rst/prompt.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "rst/error.hpp"
#include "rst/parse.hpp"

namespace rst {

namespace {

bool is_continuation(char c) {
  return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
}

std::string slot(const RstTree* tree, const PromptOptions& options) {
  if (tree == nullptr) return std::string(kEmptySlot);
  return elide_middle(join_edu_texts(tree->edus()), options.span_char_budget);
}

std::string join_options(const std::vector<std::string>& options) {
  std::string out;
  for (const auto& o : options) {
    if (!out.empty()) out += ", ";
    out += o;
  }
  return out;
}

}  // namespace

std::string elide_middle(std::string_view text, std::size_t budget) {
  if (budget == 0 || text.size() <= budget) return std::string(text);
  if (budget < kElisionMarker.size() + 2) {
    std::size_t cut = budget;
    while (cut > 0 && is_continuation(text[cut])) --cut;
    return std::string(text.substr(0, cut));
  }
  const std::size_t room = budget - kElisionMarker.size();
  std::size_t head = (room + 1) / 2;
  std::size_t tail_start = text.size() - (room - head);
  while (head > 0 && is_continuation(text[head])) --head;
  while (tail_start < text.size() && is_continuation(text[tail_start])) {
    ++tail_start;
  }
  std::string out(text.substr(0, head));
  out += kElisionMarker;
  out += text.substr(tail_start);
  return out;
}

std::string render_action_prompt(const ParserState& state,
                                 const PromptOptions& options) {
  const Edu* q0 = state.queue_front();
  std::string out;
  out += "Stack2: " + slot(state.stack_at(1), options) + "\n";
  out += "Stack1: " + slot(state.stack_at(0), options) + "\n";
  out += "Queue1: " +
         (q0 ? elide_middle(q0->text, options.span_char_budget)
             : std::string(kEmptySlot)) +
         "\n";
  out += "Action (shift or reduce):";
  return out;
}

std::string render_nuclearity_prompt(std::string_view span2_text,
                                     std::string_view span1_text,
                                     const PromptOptions& options) {
  std::string out;
  out += "Span2: " + elide_middle(span2_text, options.span_char_budget) + "\n";
  out += "Span1: " + elide_middle(span1_text, options.span_char_budget) + "\n";
  out += "Nucleus label (" + join_options(nuclearity_labels()) + "):";
  return out;
}

std::string render_relation_prompt(std::string_view span2_text,
                                   std::string_view span1_text,
                                   Nuclearity predicted,
                                   const LabelInventory& inventory,
                                   const PromptOptions& options) {
  std::string out;
  out += "Span2: " + elide_middle(span2_text, options.span_char_budget) + "\n";
  out += "Span1: " + elide_middle(span1_text, options.span_char_budget) + "\n";
  out += "Nucleus label: " + std::string(to_string(predicted)) + "\n";
  out += "Relation label (" + join_options(inventory.relations()) + "):";
  return out;
}

std::string render_split_prompt(std::span<const Edu> edus,
                                const PromptOptions& options) {
  if (edus.size() < 2) {
    throw DegenerateSpan("split prompt needs at least two EDUs");
  }
  std::string out = "Input:\n";
  for (std::size_t i = 0; i < edus.size(); ++i) {
    out += std::to_string(i) + ": " +
           elide_middle(edus[i].text, options.span_char_budget) + "\n";
  }
  out += "Split point (0 - " + std::to_string(edus.size() - 2) + "):";
  return out;
}

std::string_view to_string(Strategy s) {
  return s == Strategy::BottomUp ? "bottom-up" : "top-down";
}

Strategy parse_strategy(std::string_view text) {
  const std::string t = ascii_lower(text);
  if (t == "bottom-up" || t == "bottomup" || t == "bu") return Strategy::BottomUp;
  if (t == "top-down" || t == "topdown" || t == "td") return Strategy::TopDown;
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Training export

TrainingSet export_training_pairs(std::span<const Document> corpus,
                                  const LabelInventory& inventory,
                                  const ExportOptions& options) {
  TrainingSet out;
  const ParsePolicy policy{options.skip_forced, options.prompt};
  for (const Document& doc : corpus) {
    if (!doc.gold) {
      throw MissingGoldTree("document '" + doc.id + "' has no gold tree");
    }
    if (doc.num_edus() < 2) continue;
    ReplayOracle replay =
        gold_replay_oracle(options.strategy, doc, options.skip_forced);
    const ParseResult result =
        parse_document(options.strategy, doc, replay, inventory, policy);
    for (const TraceEntry& e : result.trace.entries) {
      if (e.forced()) continue;
      out[e.kind].push_back({e.kind, e.prompt, e.resolved, doc.id, e.step});
    }
  }
  return out;
}

std::string to_json_line(const TrainingExample& example) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(example.kind));
  j["prompt"] = example.prompt;
  j["completion"] = example.completion;
  j["document_id"] = example.document_id;
  j["step"] = example.step;
  return j.dump();
}

std::string training_metadata_json(const LabelInventory& inventory,
                                   const ExportOptions& options) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(to_string(options.strategy));
  j["inventory"] = {{"id", inventory.id()},
                    {"relations", inventory.relations()},
                    {"default_relation", inventory.default_relation()},
                    {"default_nuclearity",
                     std::string(to_string(inventory.default_nuclearity()))}};
  j["policy"] = {{"skip_forced", options.skip_forced},
                 {"span_char_budget", options.prompt.span_char_budget}};
  // Adapter fine-tuning setup the exported pairs were designed for; this
  // tool does not train.
  j["fine_tuning"] = {
      {"adapter_per_subtask", true},
      {"epochs", 5},
      {"batch_size", 16},
      {"optimizer", "Adam"},
      {"learning_rate", 2e-4},
      {"lr_scheduler", "linear warm-up and cosine annealing"},
      {"warmup_ratio", 0.03},
      {"gradient_clipping", 1.0},
      {"lora_r", 64},
      {"lora_alpha", 16},
      {"lora_dropout", 0.1},
      {"lora_target_modules", "all linear layers in transformer blocks"},
      {"quantization", "4-bit NormalFloat with double quantization"}};
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_training_files(
    const std::filesystem::path& directory, const TrainingSet& set,
    const LabelInventory& inventory, const ExportOptions& options) {
  std::filesystem::create_directories(directory);
  const std::string prefix(to_string(options.strategy));
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path,
                   const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    written.push_back(path);
  };
  const std::vector<PromptKind> kinds =
      options.strategy == Strategy::BottomUp
          ? std::vector{PromptKind::Action, PromptKind::Nuclearity,
                        PromptKind::Relation}
          : std::vector{PromptKind::Split, PromptKind::Nuclearity,
                        PromptKind::Relation};
  for (PromptKind kind : kinds) {
    std::string content;
    if (auto it = set.find(kind); it != set.end()) {
      for (const auto& ex : it->second) content += to_json_line(ex) + "\n";
    }
    write(directory / (prefix + "." + std::string(to_string(kind)) + ".jsonl"),
          content);
  }
  write(directory / (prefix + ".metadata.json"),
        training_metadata_json(inventory, options));
  return written;
}

}  // namespace rst
