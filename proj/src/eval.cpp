#include "rst/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "rst/error.hpp"

namespace rst::eval {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Span:
      return "Span";
    case Level::Nuclearity:
      return "Nuc";
    case Level::Relation:
      return "Rel";
    case Level::Full:
      return "Full";
  }
  return "";
}

std::vector<SpanTuple> extract_tuples(const RstTree& tree,
                                      const EvalOptions& options) {
  std::vector<SpanTuple> out;
  for (const RstTree& node : tree.internal_nodes()) {
    if (!options.include_root && node.span() == tree.span()) continue;
    out.push_back({node.span(), node.nuclearity(), node.relation()});
  }
  return out;
}

double LevelCounts::precision() const {
  return predicted ? static_cast<double>(matched) / predicted : 0.0;
}

double LevelCounts::recall() const {
  return gold ? static_cast<double>(matched) / gold : 0.0;
}

double LevelCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

ParsevalCounts score_document(const RstTree& predicted, const RstTree& gold,
                              const EvalOptions& options) {
  if (predicted.span() != gold.span()) {
    throw SegmentationMismatch(
        "prediction covers EDUs " + std::to_string(predicted.span().first) +
        "-" + std::to_string(predicted.span().last) + ", gold covers " +
        std::to_string(gold.span().first) + "-" +
        std::to_string(gold.span().last));
  }
  const auto pred = extract_tuples(predicted, options);
  const auto ref = extract_tuples(gold, options);
  std::map<Span, const SpanTuple*> by_span;
  for (const auto& t : ref) by_span.emplace(t.span, &t);

  ParsevalCounts c;
  for (Level l : kAllLevels) {
    c[l].predicted = static_cast<std::int64_t>(pred.size());
    c[l].gold = static_cast<std::int64_t>(ref.size());
  }
  for (const auto& p : pred) {
    auto it = by_span.find(p.span);
    if (it == by_span.end()) continue;
    const SpanTuple& g = *it->second;
    const bool nuc = p.nuclearity == g.nuclearity;
    const bool rel = p.relation == g.relation;
    c[Level::Span].matched += 1;
    c[Level::Nuclearity].matched += nuc;
    c[Level::Relation].matched += rel;
    c[Level::Full].matched += nuc && rel;
  }
  return c;
}

ParsevalCounts score_corpus_serial(std::span<const TreePair> pairs,
                                   const EvalOptions& options) {
  ParsevalCounts total;
  for (const auto& p : pairs) total += score_document(p.predicted, p.gold, options);
  return total;
}

ParsevalCounts score_corpus(std::span<const TreePair> pairs,
                            const EvalOptions& options) {
  std::vector<ParsevalCounts> per_doc(pairs.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      per_doc[u] = score_document(pairs[u].predicted, pairs[u].gold, options);
    } catch (...) {
#pragma omp critical(rst_score_corpus_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  ParsevalCounts total;
  for (const auto& c : per_doc) total += c;
  return total;
}

std::array<double, 4> micro_f1(const ParsevalCounts& counts) {
  const auto& span = counts[Level::Span];
  if (span.predicted == 0 && span.gold == 0) {
    throw EmptyCorpus("no span tuples to evaluate");
  }
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 100.0 * counts.levels[i].f1();
  }
  return out;
}

double round_one_decimal(double value) { return std::round(value * 10.0) / 10.0; }

double RelationRow::f1() const {
  return 100.0 * LevelCounts{matched, predicted, gold}.f1();
}

std::vector<RelationRow> per_relation_f1(std::span<const TreePair> pairs,
                                         const LabelInventory& inventory,
                                         const EvalOptions& options) {
  std::map<std::string, RelationRow> rows;
  for (const auto& r : inventory.relations()) rows[r].relation = r;
  auto row = [&](const std::string& rel) -> RelationRow& {
    auto& r = rows[rel];
    r.relation = rel;
    return r;
  };
  for (const auto& p : pairs) {
    if (p.predicted.span() != p.gold.span()) {
      throw SegmentationMismatch("prediction and gold cover different EDUs");
    }
    const auto pred = extract_tuples(p.predicted, options);
    const auto gold = extract_tuples(p.gold, options);
    std::map<Span, std::string> gold_rel;
    for (const auto& g : gold) {
      gold_rel.emplace(g.span, g.relation);
      ++row(g.relation).gold;
    }
    for (const auto& t : pred) {
      ++row(t.relation).predicted;
      auto it = gold_rel.find(t.span);
      if (it != gold_rel.end() && it->second == t.relation) {
        ++row(t.relation).matched;
      }
    }
  }
  std::vector<RelationRow> out;
  for (const auto& r : inventory.relations()) out.push_back(rows.at(r));
  // Relations outside the inventory (should not occur after mapping) go last.
  for (const auto& [name, r] : rows) {
    if (!inventory.contains(name)) out.push_back(r);
  }
  return out;
}

namespace {

std::string fixed1(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << round_one_decimal(v);
  return s.str();
}

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

std::string format_report(const ParsevalCounts& counts) {
  const auto f1 = micro_f1(counts);
  std::ostringstream out;
  for (Level l : kAllLevels) out << std::setw(8) << to_string(l);
  out << '\n';
  for (std::size_t i = 0; i < f1.size(); ++i) {
    out << std::setw(8) << fixed1(f1[i]);
  }
  out << '\n';
  return out.str();
}

std::string format_report_csv(const ParsevalCounts& counts) {
  std::ostringstream out;
  out << "level,matched,predicted,gold,precision,recall,f1\n";
  for (Level l : kAllLevels) {
    const auto& c = counts[l];
    out << to_string(l) << ',' << c.matched << ',' << c.predicted << ','
        << c.gold << ',' << fixed4(100.0 * c.precision()) << ','
        << fixed4(100.0 * c.recall()) << ',' << fixed4(100.0 * c.f1()) << '\n';
  }
  return out.str();
}

namespace {

std::vector<RelationRow> by_frequency(std::span<const RelationRow> rows) {
  std::vector<RelationRow> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RelationRow& a, const RelationRow& b) {
                     return a.gold > b.gold;
                   });
  return sorted;
}

}  // namespace

std::string format_relation_table(std::span<const RelationRow> rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.relation.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Relation"
      << std::right << std::setw(8) << "Gold" << std::setw(8) << "Pred"
      << std::setw(8) << "Match" << std::setw(8) << "F1" << '\n';
  for (const auto& r : by_frequency(rows)) {
    out << std::left << std::setw(static_cast<int>(width)) << r.relation
        << std::right << std::setw(8) << r.gold << std::setw(8) << r.predicted
        << std::setw(8) << r.matched << std::setw(8) << fixed1(r.f1()) << '\n';
  }
  return out.str();
}

std::string format_relation_csv(std::span<const RelationRow> rows) {
  std::ostringstream out;
  out << "relation,gold_frequency,matched,predicted,f1\n";
  for (const auto& r : by_frequency(rows)) {
    out << r.relation << ',' << r.gold << ',' << r.matched << ','
        << r.predicted << ',' << fixed4(r.f1()) << '\n';
  }
  return out.str();
}

}  // namespace rst::eval
