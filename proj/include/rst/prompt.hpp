#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rst/core.hpp"
#include "rst/corpus.hpp"
#include "rst/oracle.hpp"
#include "rst/state.hpp"

namespace rst {

/// Marker rendered for an empty stack or queue position.
inline constexpr std::string_view kEmptySlot = "None";
/// Inserted where an over-long span text was cut.
inline constexpr std::string_view kElisionMarker = " [...] ";

struct PromptOptions {
  /// Maximum bytes per span text; 0 disables truncation.
  std::size_t span_char_budget = 0;
};

/// Keeps the head and tail of text so the result fits in budget bytes,
/// cutting only at UTF-8 character boundaries.
std::string elide_middle(std::string_view text, std::size_t budget);

std::string render_action_prompt(const ParserState& state,
                                 const PromptOptions& options = {});

std::string render_nuclearity_prompt(std::string_view span2_text,
                                     std::string_view span1_text,
                                     const PromptOptions& options = {});

std::string render_relation_prompt(std::string_view span2_text,
                                   std::string_view span1_text,
                                   Nuclearity predicted,
                                   const LabelInventory& inventory,
                                   const PromptOptions& options = {});

/// EDUs are renumbered from 0. Throws DegenerateSpan for fewer than two.
std::string render_split_prompt(std::span<const Edu> edus,
                                const PromptOptions& options = {});

enum class Strategy { BottomUp, TopDown };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct TrainingExample {
  PromptKind kind = PromptKind::Action;
  std::string prompt;
  std::string completion;
  std::string document_id;
  int step = 0;

  friend bool operator==(const TrainingExample&,
                         const TrainingExample&) = default;
};

struct ExportOptions {
  Strategy strategy = Strategy::BottomUp;
  /// Forced moves are excluded unless this is false.
  bool skip_forced = true;
  PromptOptions prompt;
};

using TrainingSet = std::map<PromptKind, std::vector<TrainingExample>>;

/// Replays each gold derivation and records every oracle-visible decision.
/// Throws MissingGoldTree.
TrainingSet export_training_pairs(std::span<const Document> corpus,
                                  const LabelInventory& inventory,
                                  const ExportOptions& options);

std::string to_json_line(const TrainingExample& example);

/// Writes "<strategy>.<kind>.jsonl" per subtask plus
/// "<strategy>.metadata.json"; returns the files written.
std::vector<std::filesystem::path> write_training_files(
    const std::filesystem::path& directory, const TrainingSet& set,
    const LabelInventory& inventory, const ExportOptions& options);

/// Sidecar describing the export and the adapter fine-tuning setup.
std::string training_metadata_json(const LabelInventory& inventory,
                                   const ExportOptions& options);

}  // namespace rst
