#include <doctest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "rst/error.hpp"
#include "rst/parse.hpp"
#include "rst/prompt.hpp"
#include "rst/state.hpp"
#include "testing.hpp"

using namespace rst;
namespace t = rst::testing;

namespace {

std::string golden(const std::string& name) {
  return t::slurp(t::golden_dir() / name);
}

Document wsj_1100() {
  CorpusOptions o;
  o.directory = t::data_dir();
  o.relation_map = RelationMap::load(t::coarse_map(), o.inventory);
  return load_document(o, "wsj_1100");
}

// (e1,e2) reduced, e3 shifted, e4 next in the queue.
ParserState mid_state(const Document& d) {
  ParserState s = initial_state(d);
  s = apply(s, Action::shift());
  s = apply(s, Action::shift());
  s = apply(s, Action::reduce(Nuclearity::SatelliteNucleus, "Attribution"));
  return apply(s, Action::shift());
}

std::size_t count_options(const std::string& prompt) {
  const auto open = prompt.rfind('(');
  const auto close = prompt.rfind(')');
  const std::string list = prompt.substr(open + 1, close - open - 1);
  return static_cast<std::size_t>(std::count(list.begin(), list.end(), ',')) + 1;
}

}  // namespace

TEST_CASE("action prompt golden files") {
  const Document d = wsj_1100();
  ParserState s = initial_state(d);
  CHECK(render_action_prompt(s) == golden("action_initial.txt"));

  const ParserState mid = mid_state(d);
  CHECK(render_action_prompt(mid) == golden("action_mid.txt"));
  CHECK(render_action_prompt(mid) == render_action_prompt(mid));
  CHECK(render_action_prompt(mid).find("Stack1: Terms weren't disclosed.\n") !=
        std::string::npos);

  ParserState end = initial_state(d);
  for (int i = 0; i < 6; ++i) end = apply(end, Action::shift());
  CHECK(render_action_prompt(end) == golden("action_queue_empty.txt"));

  PromptOptions budget;
  budget.span_char_budget = 27;
  CHECK(render_action_prompt(mid, budget) == golden("action_budget27.txt"));
}

TEST_CASE("nuclearity prompt golden files") {
  const Document d = wsj_1100();
  const std::string s2 = join_edu_texts(std::span(d.edus).subspan(0, 2));
  const std::string s1 = d.edus[2].text;
  CHECK(render_nuclearity_prompt(s2, s1) == golden("nuclearity_mid.txt"));
  CHECK(render_nuclearity_prompt(d.edus[0].text, d.edus[1].text) ==
        golden("nuclearity_single.txt"));
}

TEST_CASE("relation prompt golden files and option counts") {
  const Document d = wsj_1100();
  const std::string s2 = join_edu_texts(std::span(d.edus).subspan(0, 2));
  const std::string p = render_relation_prompt(s2, d.edus[2].text,
                                               Nuclearity::NucleusSatellite,
                                               LabelInventory::rstdt());
  CHECK(p == golden("relation_rstdt.txt"));
  CHECK(count_options(p) == 18);
  CHECK(p.find("\nNucleus label: nucleus-satellite\n") != std::string::npos);

  const std::string q = render_relation_prompt(
      "Remove the cover", "to reach the filter.", Nuclearity::NucleusNucleus,
      LabelInventory::instrdt());
  CHECK(q == golden("relation_instrdt.txt"));
  CHECK(count_options(q) == 39);
}

TEST_CASE("split prompt golden files and renumbering") {
  const Document d = wsj_1100();
  const std::span<const Edu> all(d.edus);
  CHECK(render_split_prompt(all.subspan(3, 3)) == golden("split_tail.txt"));
  CHECK(render_split_prompt(all.subspan(0, 2)) == golden("split_two.txt"));
  CHECK_THROWS_AS(render_split_prompt(all.subspan(0, 1)), DegenerateSpan);

  std::vector<Edu> low, high;
  for (int i = 0; i < 3; ++i) {
    low.push_back(Edu::make(1 + i, d.edus[3 + i].text));
    high.push_back(Edu::make(4 + i, d.edus[3 + i].text));
  }
  CHECK(render_split_prompt(low) == render_split_prompt(high));
}

TEST_CASE("prompts never end with a newline") {
  const Document d = wsj_1100();
  for (const std::string p :
       {render_action_prompt(initial_state(d)),
        render_nuclearity_prompt("a", "b"),
        render_relation_prompt("a", "b", Nuclearity::NucleusNucleus,
                               LabelInventory::rstdt()),
        render_split_prompt(std::span(d.edus))}) {
    CHECK(p.back() == ':');
  }
}

TEST_CASE("center elision") {
  CHECK(elide_middle("abcdef", 0) == "abcdef");
  CHECK(elide_middle("abcdef", 6) == "abcdef");
  const std::string long_text(100, 'x');
  const std::string e = elide_middle(long_text, 40);
  CHECK(e.size() <= 40);
  CHECK(e.find(" [...] ") != std::string::npos);
  // Multi-byte characters are never split.
  std::string accents;
  for (int i = 0; i < 30; ++i) accents += "\xc3\xa9";
  const std::string cut = elide_middle(accents, 20);
  CHECK(cut.size() <= 20);
  const auto marker = cut.find(" [...] ");
  REQUIRE(marker != std::string::npos);
  CHECK(marker % 2 == 0);
  CHECK((cut.size() - marker - 7) % 2 == 0);
}

TEST_CASE("training export") {
  std::mt19937_64 rng(12);
  std::vector<Document> corpus;
  for (int i = 0; i < 12; ++i) {
    corpus.push_back(t::random_document(rng, 1 + i * 3, "doc" + std::to_string(i)));
  }
  const auto& inv = LabelInventory::rstdt();

  SUBCASE("bottom-up counts and completions") {
    ExportOptions opt;
    const TrainingSet set = export_training_pairs(corpus, inv, opt);
    std::size_t n_minus_1 = 0, two_n_minus_1 = 0;
    for (const auto& d : corpus) {
      if (d.num_edus() < 2) continue;
      n_minus_1 += d.num_edus() - 1;
      two_n_minus_1 += 2 * d.num_edus() - 1;
    }
    CHECK(set.at(PromptKind::Action).size() <= two_n_minus_1);
    CHECK(set.at(PromptKind::Nuclearity).size() == n_minus_1);
    CHECK(set.at(PromptKind::Relation).size() == n_minus_1);
    CHECK_FALSE(set.count(PromptKind::Split));
    for (const auto& [kind, examples] : set) {
      for (const auto& ex : examples) {
        CHECK(ex.document_id != "doc0");  // single EDU
        std::vector<std::string> valid =
            kind == PromptKind::Action       ? action_labels()
            : kind == PromptKind::Nuclearity ? nuclearity_labels()
                                             : inv.relations();
        CHECK(resolve_label(ex.completion, valid) == ex.completion);
      }
    }

    ExportOptions all = opt;
    all.skip_forced = false;
    const TrainingSet full = export_training_pairs(corpus, inv, all);
    CHECK(full.at(PromptKind::Action).size() == two_n_minus_1);
  }

  SUBCASE("top-down completions are valid indices") {
    ExportOptions opt;
    opt.strategy = Strategy::TopDown;
    const TrainingSet set = export_training_pairs(corpus, inv, opt);
    for (const auto& ex : set.at(PromptKind::Split)) {
      const auto n_lines = std::count(ex.prompt.begin(), ex.prompt.end(), '\n');
      const int edus = static_cast<int>(n_lines) - 1;
      CHECK(resolve_label(ex.completion, split_labels(edus - 2)) == ex.completion);
    }
  }

  SUBCASE("export twice is byte-identical") {
    ExportOptions opt;
    opt.strategy = Strategy::TopDown;
    auto a = t::scratch_dir("export_a");
    auto b = t::scratch_dir("export_b");
    auto fa = write_training_files(a, export_training_pairs(corpus, inv, opt), inv, opt);
    auto fb = write_training_files(b, export_training_pairs(corpus, inv, opt), inv, opt);
    REQUIRE(fa.size() == fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) {
      CHECK(fa[i].filename() == fb[i].filename());
      CHECK(t::slurp(fa[i]) == t::slurp(fb[i]));
    }
    auto meta = nlohmann::json::parse(t::slurp(a / "top-down.metadata.json"));
    CHECK(meta["fine_tuning"]["lora_r"] == 64);
    CHECK(meta["fine_tuning"]["lora_alpha"] == 16);
    CHECK(meta["fine_tuning"]["epochs"] == 5);
    CHECK(meta["inventory"]["relations"].size() == 18);
    const std::string split_file = t::slurp(a / "top-down.split.jsonl");
    auto line = nlohmann::json::parse(split_file.substr(0, split_file.find('\n')));
    for (const char* key : {"kind", "prompt", "completion", "document_id", "step"}) {
      CHECK(line.contains(key));
    }
  }

  SUBCASE("missing gold tree") {
    std::vector<Document> bad{Document{"x", t::make_edus(3), std::nullopt}};
    CHECK_THROWS_AS(export_training_pairs(bad, inv, {}), MissingGoldTree);
  }
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy("bottom-up") == Strategy::BottomUp);
  CHECK(parse_strategy("top-down") == Strategy::TopDown);
  CHECK(to_string(Strategy::TopDown) == "top-down");
  CHECK_THROWS(parse_strategy("sideways"));
}
