#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rst/core.hpp"

namespace rst {

enum class PromptKind { Action, Nuclearity, Relation, Split };

inline constexpr PromptKind kAllPromptKinds[] = {
    PromptKind::Action, PromptKind::Nuclearity, PromptKind::Relation,
    PromptKind::Split};

std::string_view to_string(PromptKind kind);
PromptKind parse_prompt_kind(std::string_view text);

struct OracleQuery {
  PromptKind kind = PromptKind::Action;
  std::string prompt;
  std::vector<std::string> valid_labels;
};

/// Answers parsing queries with raw completion text. Implementations shared
/// between threads must be safe for concurrent calls.
class Oracle {
 public:
  virtual ~Oracle() = default;

  /// Throws OracleFailure on transport problems.
  virtual std::string complete(const OracleQuery& query) = 0;

  /// Identifies the model and decoding setup; part of cache keys.
  virtual std::string fingerprint() const { return "anonymous"; }
};

/// First line of raw, trimmed and case-folded, matched against the folded
/// option set. Integer option sets also accept leading zeros. Returns the
/// option's canonical spelling.
std::optional<std::string> resolve_label(std::string_view raw,
                                         std::span<const std::string> valid);

std::vector<std::string> action_labels();
std::vector<std::string> nuclearity_labels();
/// "0".."max_k"
std::vector<std::string> split_labels(int max_k);

/// Serves a fixed answer sequence; each answer is checked against the kind
/// the engine asks for. Scoped to one parse, not shareable.
class ReplayOracle final : public Oracle {
 public:
  struct Answer {
    PromptKind kind;
    std::string label;
  };

  explicit ReplayOracle(std::vector<Answer> answers)
      : answers_(std::move(answers)) {}

  /// Answers the bottom-up engine would request when replaying the steps.
  static ReplayOracle for_shift_reduce(std::span<const Action> steps,
                                       int num_edus, bool skip_forced = true);
  static ReplayOracle for_splits(std::span<const GoldSplit> splits,
                                 bool skip_forced = true);

  /// Throws ReplayExhausted or KindMismatch.
  std::string complete(const OracleQuery& query) override;
  std::string fingerprint() const override { return "replay"; }

  std::size_t remaining() const { return answers_.size() - next_; }
  const std::vector<Answer>& answers() const { return answers_; }

 private:
  std::vector<Answer> answers_;
  std::size_t next_ = 0;
};

/// Delegates to a callback; the callback owns its own thread safety.
class ScriptedOracle final : public Oracle {
 public:
  using Script = std::function<std::string(const OracleQuery&)>;
  explicit ScriptedOracle(Script script, std::string name = "scripted")
      : script_(std::move(script)), name_(std::move(name)) {}

  std::string complete(const OracleQuery& query) override {
    return script_(query);
  }
  std::string fingerprint() const override { return name_; }

 private:
  Script script_;
  std::string name_;
};

/// Seeded adversarial oracle.
///  - Garbage: never a valid label (random junk, out-of-range integers,
///    labels of the wrong subtask).
///  - Chaotic: the same junk mixed with uniformly drawn valid labels.
class RandomOracle final : public Oracle {
 public:
  enum class Mode { Garbage, Chaotic };

  explicit RandomOracle(std::uint64_t seed, Mode mode = Mode::Garbage)
      : rng_(seed), mode_(mode) {}

  std::string complete(const OracleQuery& query) override;
  std::string fingerprint() const override;

 private:
  std::string junk(const OracleQuery& query);

  std::mutex mu_;
  std::mt19937_64 rng_;
  Mode mode_;
};

}  // namespace rst
