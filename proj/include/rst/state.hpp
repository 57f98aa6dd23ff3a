#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rst/core.hpp"
#include "rst/corpus.hpp"

namespace rst {

/// Shift-reduce configuration. stack.back() is Stack1 (s0), the element
/// below it Stack2 (s1); queue() starts at Queue1 (q0).
struct ParserState {
  std::vector<RstTree> stack;
  std::shared_ptr<const std::vector<Edu>> edus;
  std::size_t next = 0;
  int step_count = 0;

  std::span<const Edu> queue() const {
    return std::span<const Edu>(*edus).subspan(next);
  }
  /// depth 0 = Stack1, 1 = Stack2.
  const RstTree* stack_at(std::size_t depth) const {
    return depth < stack.size() ? &stack[stack.size() - 1 - depth] : nullptr;
  }
  const Edu* queue_front() const {
    return next < edus->size() ? &(*edus)[next] : nullptr;
  }
  bool terminal() const { return next == edus->size() && stack.size() == 1; }
  int num_edus() const { return static_cast<int>(edus->size()); }

  /// e.g. "stack=[1-2,3] queue=4-6"
  std::string summary() const;
};

struct LegalActions {
  bool shift = false;
  bool reduce = false;

  bool forced() const { return shift != reduce; }
  Action::Kind sole() const {
    return shift ? Action::Kind::Shift : Action::Kind::Reduce;
  }
};

/// Throws EmptyDocument.
ParserState initial_state(const Document& document);
ParserState initial_state(std::shared_ptr<const std::vector<Edu>> edus);

/// Throws TerminalState.
LegalActions legal_actions(const ParserState& state);

/// Throws IllegalAction.
ParserState apply(const ParserState& state, const Action& action);

}  // namespace rst
