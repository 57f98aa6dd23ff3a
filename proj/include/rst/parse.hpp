#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rst/core.hpp"
#include "rst/corpus.hpp"
#include "rst/oracle.hpp"
#include "rst/prompt.hpp"

namespace rst {

/// How a decision was reached.
enum class Resolution {
  Oracle,        // valid oracle answer
  Forced,        // single legal move, oracle not consulted
  Unparseable,   // answer outside the option set, default applied
  OutOfRange,    // integer answer outside the split range, default applied
  Illegal,       // valid label naming an illegal move, sole legal move taken
};

std::string_view to_string(Resolution r);
Resolution parse_resolution(std::string_view text);

struct TraceEntry {
  int step = 0;
  std::string state;
  PromptKind kind = PromptKind::Action;
  std::string prompt;  // empty for forced moves
  std::string raw;
  std::string resolved;
  Resolution resolution = Resolution::Oracle;

  bool corrected() const {
    return resolution == Resolution::Unparseable ||
           resolution == Resolution::OutOfRange ||
           resolution == Resolution::Illegal;
  }
  bool forced() const { return resolution == Resolution::Forced; }
  /// "<kind>:<first 16 hex digits of sha256(prompt)>", or "<kind>:forced".
  std::string prompt_id() const;
};

struct ParseTrace {
  std::vector<TraceEntry> entries;

  std::size_t count(PromptKind kind) const;
  std::size_t queried(PromptKind kind) const;  // excludes forced
  std::size_t corrected(PromptKind kind) const;
  std::size_t corrected() const;
};

/// One JSON object per line with fields step, state, kind, prompt_id, raw,
/// resolved, resolution, corrected.
std::string to_jsonl(const ParseTrace& trace);
ParseTrace parse_jsonl_trace(std::string_view text);

struct ParsePolicy {
  /// Take forced moves (bottom-up) and length-2 splits (top-down) without
  /// asking the oracle.
  bool skip_forced = true;
  PromptOptions prompt;
};

struct ParseResult {
  RstTree tree;
  ParseTrace trace;
};

/// Shift-reduce parsing driven by the oracle. Always returns a valid tree;
/// only OracleFailure (or another oracle exception) aborts.
ParseResult parse_bottom_up(const Document& document, Oracle& oracle,
                            const LabelInventory& inventory,
                            const ParsePolicy& policy = {});

/// Inclusive bounds of the relative split index for a span: (0, j-i-1).
/// Throws DegenerateSpan for single-EDU spans.
std::pair<int, int> relative_index_bounds(Span span);

/// Depth-first span splitting, left subtree before right; uses an explicit
/// work stack so document length does not bound recursion depth.
ParseResult parse_top_down(const Document& document, Oracle& oracle,
                           const LabelInventory& inventory,
                           const ParsePolicy& policy = {});

ParseResult parse_document(Strategy strategy, const Document& document,
                           Oracle& oracle, const LabelInventory& inventory,
                           const ParsePolicy& policy = {});

/// Replay oracle reproducing the gold tree under the given strategy.
/// Throws MissingGoldTree.
ReplayOracle gold_replay_oracle(Strategy strategy, const Document& document,
                                bool skip_forced = true);

}  // namespace rst
