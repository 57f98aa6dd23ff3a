#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rst/core.hpp"

namespace rst::eval {

enum class Level { Span, Nuclearity, Relation, Full };
inline constexpr Level kAllLevels[] = {Level::Span, Level::Nuclearity,
                                       Level::Relation, Level::Full};
/// "Span", "Nuc", "Rel", "Full"
std::string_view to_string(Level level);

struct SpanTuple {
  Span span;
  Nuclearity nuclearity = Nuclearity::NucleusSatellite;
  std::string relation;

  friend bool operator==(const SpanTuple&, const SpanTuple&) = default;
};

struct EvalOptions {
  /// Count the root node (Standard-Parseval convention used here).
  bool include_root = true;
};

/// One tuple per internal node, pre-order.
std::vector<SpanTuple> extract_tuples(const RstTree& tree,
                                      const EvalOptions& options = {});

struct LevelCounts {
  std::int64_t matched = 0;
  std::int64_t predicted = 0;
  std::int64_t gold = 0;

  double precision() const;
  double recall() const;
  /// 0 when nothing matched.
  double f1() const;

  LevelCounts& operator+=(const LevelCounts& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  friend bool operator==(const LevelCounts&, const LevelCounts&) = default;
};

struct ParsevalCounts {
  std::array<LevelCounts, 4> levels{};

  LevelCounts& operator[](Level l) { return levels[static_cast<int>(l)]; }
  const LevelCounts& operator[](Level l) const {
    return levels[static_cast<int>(l)];
  }
  ParsevalCounts& operator+=(const ParsevalCounts& o) {
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] += o.levels[i];
    return *this;
  }
  friend bool operator==(const ParsevalCounts&,
                         const ParsevalCounts&) = default;
};

/// Throws SegmentationMismatch unless both trees cover the same EDUs.
ParsevalCounts score_document(const RstTree& predicted, const RstTree& gold,
                              const EvalOptions& options = {});

struct TreePair {
  RstTree predicted;
  RstTree gold;
};

/// Sum of per-document counts; documents are scored in parallel.
ParsevalCounts score_corpus(std::span<const TreePair> pairs,
                            const EvalOptions& options = {});
/// Single-threaded reference.
ParsevalCounts score_corpus_serial(std::span<const TreePair> pairs,
                                   const EvalOptions& options = {});

/// Percentages per level, unrounded. Throws EmptyCorpus when there are no
/// predicted and no gold tuples.
std::array<double, 4> micro_f1(const ParsevalCounts& counts);

/// Half away from zero, one decimal.
double round_one_decimal(double value);

struct RelationRow {
  std::string relation;
  std::int64_t matched = 0;
  std::int64_t predicted = 0;
  std::int64_t gold = 0;

  /// Percentage; 0 when undefined.
  double f1() const;
  friend bool operator==(const RelationRow&, const RelationRow&) = default;
};

/// One row per inventory relation, in inventory order. A tuple matches when
/// span and relation agree.
std::vector<RelationRow> per_relation_f1(std::span<const TreePair> pairs,
                                         const LabelInventory& inventory,
                                         const EvalOptions& options = {});

/// Aligned text table: Span/Nuc/Rel/Full with one decimal.
std::string format_report(const ParsevalCounts& counts);
/// "level,matched,predicted,gold,precision,recall,f1" records.
std::string format_report_csv(const ParsevalCounts& counts);
/// Aligned per-relation table, rows ordered by gold frequency (descending).
std::string format_relation_table(std::span<const RelationRow> rows);
/// "relation,gold_frequency,matched,predicted,f1" records.
std::string format_relation_csv(std::span<const RelationRow> rows);

}  // namespace rst::eval
