#include <doctest.h>

#include <random>
#include <set>
#include <tuple>

#include "rst/corpus.hpp"
#include "rst/error.hpp"
#include "rst/eval.hpp"
#include "testing.hpp"

using namespace rst;
using namespace rst::eval;
namespace t = rst::testing;

namespace {

// Independent scorer: compare every predicted node with every gold node.
struct RefCounts {
  long matched[4] = {0, 0, 0, 0};
  long predicted = 0;
  long gold = 0;
};

void ref_collect(const RstTree& n, bool is_root, bool include_root,
                 std::vector<std::tuple<int, int, std::string, std::string>>& out) {
  if (n.is_leaf()) return;
  if (include_root || !is_root) {
    out.emplace_back(n.span().first, n.span().last,
                     std::string(to_string(n.nuclearity())), n.relation());
  }
  ref_collect(n.left(), false, include_root, out);
  ref_collect(n.right(), false, include_root, out);
}

RefCounts ref_score(const RstTree& pred, const RstTree& gold, bool include_root = true) {
  std::vector<std::tuple<int, int, std::string, std::string>> p, g;
  ref_collect(pred, true, include_root, p);
  ref_collect(gold, true, include_root, g);
  RefCounts c;
  c.predicted = static_cast<long>(p.size());
  c.gold = static_cast<long>(g.size());
  for (const auto& a : p) {
    for (const auto& b : g) {
      if (std::get<0>(a) != std::get<0>(b) || std::get<1>(a) != std::get<1>(b)) continue;
      const bool nuc = std::get<2>(a) == std::get<2>(b);
      const bool rel = std::get<3>(a) == std::get<3>(b);
      c.matched[0] += 1;
      c.matched[1] += nuc;
      c.matched[2] += rel;
      c.matched[3] += nuc && rel;
    }
  }
  return c;
}

double ref_f1(long matched, long predicted, long gold) {
  if (matched == 0) return 0.0;
  const double p = static_cast<double>(matched) / predicted;
  const double r = static_cast<double>(matched) / gold;
  return 100.0 * 2 * p * r / (p + r);
}

RstTree tree(const std::string& text, int n) { return read_tree(text, t::make_edus(n)); }

const char* kGold5 =
    "(NS Elaboration (NN Joint (leaf 1) (leaf 2))"
    " (SN Attribution (leaf 3) (NS Elaboration (leaf 4) (leaf 5))))";
// Shares spans (1-5) and (1-2) with the gold tree, with the same relations;
// the root nuclearity differs.
const char* kPred5 =
    "(NN Elaboration (NS Background (NS Cause (NN Joint (leaf 1) (leaf 2)) (leaf 3)) (leaf 4))"
    " (leaf 5))";

}  // namespace

TEST_CASE("hand fixture at half agreement") {
  const RstTree gold = tree(kGold5, 5);
  const RstTree pred = tree(kPred5, 5);
  const ParsevalCounts c = score_document(pred, gold);
  const auto f1 = micro_f1(c);
  CHECK(round_one_decimal(f1[0]) == 50.0);
  CHECK(round_one_decimal(f1[1]) == 25.0);
  CHECK(round_one_decimal(f1[2]) == 50.0);
  CHECK(round_one_decimal(f1[3]) == 25.0);
  CHECK(format_report(c) ==
        "    Span     Nuc     Rel    Full\n"
        "    50.0    25.0    50.0    25.0\n");
  CHECK(format_report_csv(c) ==
        "level,matched,predicted,gold,precision,recall,f1\n"
        "Span,2,4,4,50.0000,50.0000,50.0000\n"
        "Nuc,1,4,4,25.0000,25.0000,25.0000\n"
        "Rel,2,4,4,50.0000,50.0000,50.0000\n"
        "Full,1,4,4,25.0000,25.0000,25.0000\n");
}

TEST_CASE("three-EDU fixtures") {
  const RstTree gold = tree("(NS Elaboration (NS Attribution (leaf 1) (leaf 2)) (leaf 3))", 3);
  SUBCASE("shape mismatch") {
    const RstTree pred = tree("(NS Elaboration (leaf 1) (NS Attribution (leaf 2) (leaf 3)))", 3);
    const auto f1 = micro_f1(score_document(pred, gold));
    CHECK(round_one_decimal(f1[0]) == 50.0);
  }
  SUBCASE("single relation flip") {
    const RstTree pred = tree("(NS Elaboration (NS Cause (leaf 1) (leaf 2)) (leaf 3))", 3);
    const auto f1 = micro_f1(score_document(pred, gold));
    CHECK(f1[0] == 100.0);
    CHECK(f1[1] == 100.0);
    CHECK(round_one_decimal(f1[2]) == 50.0);
    CHECK(round_one_decimal(f1[3]) == 50.0);
  }
}

TEST_CASE("root exclusion") {
  const RstTree gold = tree(kGold5, 5);
  const RstTree pred = tree(kPred5, 5);
  const ParsevalCounts c = score_document(pred, gold, {.include_root = false});
  CHECK(c[Level::Span] == LevelCounts{1, 3, 3});
  CHECK(c[Level::Nuclearity].matched == 1);
  CHECK(extract_tuples(gold, {.include_root = false}).size() == 3);
  CHECK(extract_tuples(gold).front().span == Span{1, 5});
}

TEST_CASE("micro average differs from the per-document mean") {
  // Document A: 2 EDUs, perfect. Document B: 6 EDUs, mostly wrong.
  const RstTree a = tree("(NS Elaboration (leaf 1) (leaf 2))", 2);
  const RstTree b_gold = tree(
      "(NS Elaboration (NS Elaboration (NS Elaboration (NS Elaboration (NS Elaboration"
      " (leaf 1) (leaf 2)) (leaf 3)) (leaf 4)) (leaf 5)) (leaf 6))", 6);
  const RstTree b_pred = tree(
      "(NS Elaboration (leaf 1) (NS Elaboration (leaf 2) (NS Elaboration (leaf 3)"
      " (NS Elaboration (leaf 4) (NS Elaboration (leaf 5) (leaf 6))))))", 6);
  const std::vector<TreePair> pairs{{a, a}, {b_pred, b_gold}};
  const auto micro = micro_f1(score_corpus(pairs));

  double macro = 0;
  for (const auto& p : pairs) {
    const RefCounts r = ref_score(p.predicted, p.gold);
    macro += ref_f1(r.matched[0], r.predicted, r.gold) / 2;
  }
  // A: 1/1. B: only the root of 5 matches.
  CHECK(macro == doctest::Approx((100.0 + 20.0) / 2));
  CHECK(micro[0] == doctest::Approx(100.0 * 2 / 6));
  CHECK(round_one_decimal(micro[0]) == 33.3);
  CHECK(std::abs(micro[0] - macro) > 1.0);
}

TEST_CASE("scores agree with the pairwise reference") {
  std::mt19937_64 rng(2024);
  std::vector<TreePair> pairs;
  RefCounts total;
  for (int i = 0; i < 500; ++i) {
    const int n = std::uniform_int_distribution<int>(2, 30)(rng);
    const auto edus = t::make_edus(n);
    const RstTree gold = t::random_tree(rng, edus);
    const RstTree pred = t::random_tree(rng, edus);
    const bool root = i % 2 == 0;
    const ParsevalCounts c = score_document(pred, gold, {.include_root = root});
    const RefCounts r = ref_score(pred, gold, root);
    for (int l = 0; l < 4; ++l) {
      CHECK(c.levels[l].matched == r.matched[l]);
      CHECK(c.levels[l].predicted == r.predicted);
      CHECK(c.levels[l].gold == r.gold);
    }
    // Same EDUs on both sides, so precision equals recall.
    for (const auto& lc : c.levels) CHECK(lc.precision() == lc.recall());
    CHECK(c[Level::Span].matched >= c[Level::Nuclearity].matched);
    CHECK(c[Level::Span].matched >= c[Level::Relation].matched);
    CHECK(c[Level::Nuclearity].matched >= c[Level::Full].matched);
    CHECK(c[Level::Relation].matched >= c[Level::Full].matched);
    // Span agreement is symmetric.
    CHECK(score_document(gold, pred, {.include_root = root})[Level::Span] ==
          LevelCounts{c[Level::Span].matched, r.gold, r.predicted});
    if (root) {
      const auto self = micro_f1(score_document(gold, gold));
      for (double v : self) CHECK(v == 100.0);
      pairs.push_back({pred, gold});
      for (int l = 0; l < 4; ++l) total.matched[l] += r.matched[l];
      total.predicted += r.predicted;
      total.gold += r.gold;
    }
  }
  const ParsevalCounts corpus = score_corpus(pairs);
  CHECK(corpus == score_corpus_serial(pairs));
  const auto f1 = micro_f1(corpus);
  for (int l = 0; l < 4; ++l) {
    CHECK(std::abs(f1[l] - ref_f1(total.matched[l], total.predicted, total.gold)) < 1e-9);
  }
}

TEST_CASE("error cases") {
  const RstTree four = tree("(NN Joint (leaf 1) (NN Joint (leaf 2) (NN Joint (leaf 3) (leaf 4))))", 4);
  const RstTree three = tree("(NN Joint (leaf 1) (NN Joint (leaf 2) (leaf 3)))", 3);
  CHECK_THROWS_AS(score_document(four, three), SegmentationMismatch);
  const std::vector<TreePair> bad{{four, three}};
  CHECK_THROWS_AS(score_corpus(bad), SegmentationMismatch);
  CHECK_THROWS_AS(micro_f1(ParsevalCounts{}), EmptyCorpus);
  // Two-EDU documents have no tuples once the root is excluded.
  const RstTree two = tree("(NN Joint (leaf 1) (leaf 2))", 2);
  CHECK_THROWS_AS(micro_f1(score_document(two, two, {.include_root = false})), EmptyCorpus);
}

TEST_CASE("rounding") {
  CHECK(round_one_decimal(66.66666) == 66.7);
  CHECK(round_one_decimal(33.35) == doctest::Approx(33.4));
  CHECK(round_one_decimal(0.04) == 0.0);
  CHECK(round_one_decimal(100.0) == 100.0);
}

TEST_CASE("per-relation table") {
  const auto& inv = LabelInventory::rstdt();
  const std::vector<TreePair> pairs{{tree(kPred5, 5), tree(kGold5, 5)}};
  const auto rows = per_relation_f1(pairs, inv);
  REQUIRE(rows.size() == inv.size());
  CHECK(rows.front().relation == inv.relations().front());
  auto find = [&](const std::string& name) {
    for (const auto& r : rows) {
      if (r.relation == name) return r;
    }
    FAIL("missing row " << name);
    return RelationRow{};
  };
  CHECK(find("Elaboration") == RelationRow{"Elaboration", 1, 1, 2});
  CHECK(find("Joint") == RelationRow{"Joint", 1, 1, 1});
  CHECK(find("Attribution") == RelationRow{"Attribution", 0, 0, 1});
  CHECK(find("Cause") == RelationRow{"Cause", 0, 1, 0});
  CHECK(find("Elaboration").f1() == doctest::Approx(100.0 * 2 / 3));
  CHECK(find("Contrast").f1() == 0.0);

  const std::string csv = format_relation_csv(rows);
  CHECK(csv.starts_with("relation,gold_frequency,matched,predicted,f1\n"
                        "Elaboration,2,1,1,66.6667\n"));
  const std::string table = format_relation_table(rows);
  CHECK(table.starts_with("Relation"));
  CHECK(table.find("Elaboration") < table.find("Attribution"));
  CHECK(std::count(table.begin(), table.end(), '\n') == static_cast<long>(inv.size()) + 1);
}
