#include "rst/core.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "rst/error.hpp"

namespace rst {

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Edu Edu::make(int index, std::string_view text) {
  if (index < 1) {
    throw MalformedTree("EDU index must be >= 1, got " + std::to_string(index));
  }
  Edu e{index, normalize_whitespace(text)};
  if (e.text.empty()) {
    throw MalformedTree("EDU " + std::to_string(index) + " has empty text");
  }
  return e;
}

// ---------------------------------------------------------------------------
// Nuclearity

std::string_view to_string(Nuclearity n) {
  switch (n) {
    case Nuclearity::NucleusNucleus:
      return "nucleus-nucleus";
    case Nuclearity::NucleusSatellite:
      return "nucleus-satellite";
    case Nuclearity::SatelliteNucleus:
      return "satellite-nucleus";
  }
  return "";
}

std::string_view to_short_string(Nuclearity n) {
  switch (n) {
    case Nuclearity::NucleusNucleus:
      return "NN";
    case Nuclearity::NucleusSatellite:
      return "NS";
    case Nuclearity::SatelliteNucleus:
      return "SN";
  }
  return "";
}

std::optional<Nuclearity> try_parse_nuclearity(std::string_view text) {
  const std::string folded = ascii_lower(text);
  for (Nuclearity n : kAllNuclearities) {
    if (folded == to_string(n) || folded == ascii_lower(to_short_string(n))) {
      return n;
    }
  }
  return std::nullopt;
}

Nuclearity parse_nuclearity(std::string_view text) {
  if (auto n = try_parse_nuclearity(text)) return *n;
  throw SyntaxError("unknown nuclearity pattern '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// LabelInventory

LabelInventory::LabelInventory(std::string id,
                               std::vector<std::string> relations,
                               std::string default_relation,
                               Nuclearity default_nuclearity)
    : id_(std::move(id)),
      relations_(std::move(relations)),
      default_nuclearity_(default_nuclearity) {
  if (relations_.empty()) {
    throw ConfigError("inventory '" + id_ + "' has no relations");
  }
  std::unordered_set<std::string> seen;
  for (const auto& r : relations_) {
    if (r.empty() || std::any_of(r.begin(), r.end(), [](char c) {
          return std::isspace(static_cast<unsigned char>(c)) || c == '(' ||
                 c == ')' || c == ',';
        })) {
      throw ConfigError("inventory '" + id_ + "': bad relation name '" + r +
                        "'");
    }
    folded_.push_back(ascii_lower(r));
    if (!seen.insert(folded_.back()).second) {
      throw ConfigError("inventory '" + id_ + "': duplicate relation '" + r +
                        "'");
    }
  }
  auto def = canonical(default_relation);
  if (!def) {
    throw ConfigError("inventory '" + id_ + "': default relation '" +
                      default_relation + "' is not a member");
  }
  default_relation_ = *def;
}

std::optional<std::string> LabelInventory::canonical(
    std::string_view name) const {
  const std::string folded = ascii_lower(name);
  for (std::size_t i = 0; i < folded_.size(); ++i) {
    if (folded_[i] == folded) return relations_[i];
  }
  return std::nullopt;
}

const LabelInventory& LabelInventory::rstdt() {
  static const LabelInventory inv(
      "rstdt",
      {"Attribution", "Background", "Cause", "Comparison", "Condition",
       "Contrast", "Elaboration", "Enablement", "Evaluation", "Explanation",
       "Joint", "Manner-Means", "Same-Unit", "Summary", "Temporal",
       "Textual-Organization", "Topic-Change", "Topic-Comment"},
      "Elaboration");
  return inv;
}

const LabelInventory& LabelInventory::instrdt() {
  // Relation set of the instructional corpus as distributed for discourse
  // parsing experiments (lowercase, colon-joined asymmetric pairs).
  static const LabelInventory inv(
      "instrdt",
      {"act:constraint", "act:criterion", "act:goal", "act:preparation",
       "act:reason", "act:side-effect", "after:before", "attribution",
       "before:after", "cause:effect", "circumstance", "comparison",
       "concession", "condition", "consequence", "contrast", "criterion:act",
       "disjunction", "effect:cause", "elaboration", "general:specific",
       "goal:act", "indeterminate", "joint", "manner", "means",
       "object:attribute", "preparation:act", "prescribe-act:wrong-act",
       "reason:act", "restatement", "same-unit", "sequence", "set:member",
       "side-effect:act", "specific:general", "step1:step2",
       "textualorganization", "wrong-act:prescribe-act"},
      "elaboration");
  return inv;
}

LabelInventory LabelInventory::resolve(const std::string& id_or_path) {
  const std::string id = ascii_lower(id_or_path);
  if (id == "rstdt" || id == "rst-dt" || id == "gum") return rstdt();
  if (id == "instrdt" || id == "instr-dt") return instrdt();
  return load(id_or_path);
}

LabelInventory LabelInventory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open inventory file '" + path + "'");
  std::string id = path;
  std::string def_rel;
  Nuclearity def_nuc = Nuclearity::NucleusSatellite;
  std::vector<std::string> rels;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = normalize_whitespace(line);
    if (line.empty()) continue;
    if (line.starts_with("@id ")) {
      id = line.substr(4);
    } else if (line.starts_with("@default ")) {
      std::istringstream fields(line.substr(9));
      std::string nuc;
      fields >> def_rel >> nuc;
      if (!nuc.empty()) def_nuc = parse_nuclearity(nuc);
    } else {
      rels.push_back(line);
    }
  }
  if (def_rel.empty()) {
    throw ConfigError("inventory file '" + path + "' lacks an @default line");
  }
  return LabelInventory(id, std::move(rels), def_rel, def_nuc);
}

// ---------------------------------------------------------------------------
// RstTree

struct RstTree::Impl {
  Span span;
  std::optional<Edu> edu;
  std::vector<RstTree> children;  // empty or exactly two
  Nuclearity nuclearity = Nuclearity::NucleusSatellite;
  std::string relation;
};

RstTree RstTree::leaf(Edu edu) {
  if (edu.index < 1 || edu.text.empty()) {
    throw MalformedTree("leaf needs index >= 1 and non-empty text");
  }
  auto impl = std::make_shared<Impl>();
  impl->span = {edu.index, edu.index};
  impl->edu = std::move(edu);
  return RstTree(std::move(impl));
}

RstTree RstTree::node(RstTree left, RstTree right, Nuclearity nuclearity,
                      std::string relation) {
  if (left.span().last + 1 != right.span().first) {
    throw MalformedTree("children spans are not adjacent");
  }
  if (relation.empty()) throw MalformedTree("internal node without relation");
  auto impl = std::make_shared<Impl>();
  impl->span = {left.span().first, right.span().last};
  impl->children = {std::move(left), std::move(right)};
  impl->nuclearity = nuclearity;
  impl->relation = std::move(relation);
  return RstTree(std::move(impl));
}

bool RstTree::is_leaf() const { return impl_->edu.has_value(); }

const Edu& RstTree::edu() const {
  if (!is_leaf()) throw std::logic_error("edu() on internal node");
  return *impl_->edu;
}

const RstTree& RstTree::left() const {
  if (is_leaf()) throw std::logic_error("left() on leaf");
  return impl_->children[0];
}

const RstTree& RstTree::right() const {
  if (is_leaf()) throw std::logic_error("right() on leaf");
  return impl_->children[1];
}

Nuclearity RstTree::nuclearity() const { return impl_->nuclearity; }
const std::string& RstTree::relation() const { return impl_->relation; }
Span RstTree::span() const { return impl_->span; }

std::vector<Edu> RstTree::edus() const {
  std::vector<Edu> out;
  out.reserve(static_cast<std::size_t>(num_edus()));
  std::vector<const RstTree*> todo{this};
  while (!todo.empty()) {
    const RstTree* t = todo.back();
    todo.pop_back();
    if (t->is_leaf()) {
      out.push_back(t->edu());
    } else {
      todo.push_back(&t->right());
      todo.push_back(&t->left());
    }
  }
  return out;
}

std::vector<RstTree> RstTree::internal_nodes() const {
  std::vector<RstTree> out;
  std::vector<const RstTree*> todo{this};
  while (!todo.empty()) {
    const RstTree* t = todo.back();
    todo.pop_back();
    if (t->is_leaf()) continue;
    out.push_back(*t);
    todo.push_back(&t->right());
    todo.push_back(&t->left());
  }
  return out;
}

bool operator==(const RstTree& a, const RstTree& b) {
  std::vector<std::pair<const RstTree*, const RstTree*>> todo{{&a, &b}};
  while (!todo.empty()) {
    auto [x, y] = todo.back();
    todo.pop_back();
    if (x->impl_ == y->impl_) continue;
    if (x->is_leaf() != y->is_leaf() || x->span() != y->span()) return false;
    if (x->is_leaf()) {
      if (x->edu() != y->edu()) return false;
      continue;
    }
    if (x->nuclearity() != y->nuclearity() || x->relation() != y->relation()) {
      return false;
    }
    todo.emplace_back(&x->left(), &y->left());
    todo.emplace_back(&x->right(), &y->right());
  }
  return true;
}

// ---------------------------------------------------------------------------
// NaryTree and binarization

std::vector<Edu> NaryTree::edus() const {
  std::vector<Edu> out;
  std::vector<const NaryTree*> todo{this};
  while (!todo.empty()) {
    const NaryTree* t = todo.back();
    todo.pop_back();
    if (t->is_leaf()) {
      out.push_back(*t->edu);
      continue;
    }
    for (auto it = t->children.rbegin(); it != t->children.rend(); ++it) {
      todo.push_back(&it->tree);
    }
  }
  return out;
}

namespace {

struct Side {
  RstTree tree;
  Role role;
  std::string relation;
};

std::string relation_for(const Side& left, const Side& right, Role left_role,
                         Role right_role, Span span) {
  auto usable = [](const std::string& r) {
    return !r.empty() && ascii_lower(r) != kSpanRelation;
  };
  if (left_role == Role::Nucleus && right_role == Role::Nucleus) {
    if (usable(left.relation)) return left.relation;
    if (usable(right.relation)) return right.relation;
  } else if (left_role == Role::Satellite && right_role == Role::Nucleus) {
    if (usable(left.relation)) return left.relation;
  } else if (usable(right.relation)) {
    return right.relation;
  }
  throw MalformedTree("no relation for node over " +
                      std::to_string(span.first) + "-" +
                      std::to_string(span.last));
}

RstTree binarize_node(const NaryTree& tree, const LabelInventory& inventory) {
  if (tree.is_leaf()) return RstTree::leaf(*tree.edu);
  const auto& kids = tree.children;
  if (kids.size() < 2) {
    throw MalformedTree("internal node over " +
                        std::to_string(tree.span.first) + "-" +
                        std::to_string(tree.span.last) +
                        " has fewer than two children");
  }
  if (std::none_of(kids.begin(), kids.end(),
                   [](const NaryChild& c) { return c.role == Role::Nucleus; })) {
    throw MalformedTree("node over " + std::to_string(tree.span.first) + "-" +
                        std::to_string(tree.span.last) + " has no nucleus");
  }

  // Fold from the right: acc holds the binarized suffix c_i..c_k.
  Side acc{binarize_node(kids.back().tree, inventory), kids.back().role,
           kids.back().rel2par};
  bool acc_is_chain = false;
  for (std::size_t i = kids.size() - 1; i-- > 0;) {
    Side left{binarize_node(kids[i].tree, inventory), kids[i].role,
              kids[i].rel2par};
    const Role left_role = left.role;
    const Role right_role = acc_is_chain ? Role::Nucleus : acc.role;
    Nuclearity pattern;
    if (left_role == Role::Nucleus && right_role == Role::Nucleus) {
      pattern = Nuclearity::NucleusNucleus;
    } else if (left_role == Role::Satellite && right_role == Role::Nucleus) {
      pattern = Nuclearity::SatelliteNucleus;
    } else {
      // N+S, and the S+S tail of a satellite-only suffix, which is headed by
      // its left element.
      pattern = Nuclearity::NucleusSatellite;
    }
    const Span span{left.tree.span().first, acc.tree.span().last};
    const std::string raw =
        relation_for(left, acc, left_role, right_role, span);
    auto relation = inventory.canonical(raw);
    if (!relation) {
      throw UnmappableRelation("relation '" + raw + "' is not in inventory '" +
                               inventory.id() + "'");
    }
    acc = Side{RstTree::node(std::move(left.tree), std::move(acc.tree), pattern,
                             *relation),
               Role::Nucleus, *relation};
    acc_is_chain = true;
  }
  return acc.tree;
}

}  // namespace

RstTree binarize_right_heavy(const NaryTree& tree,
                             const LabelInventory& inventory) {
  return binarize_node(tree, inventory);
}

// ---------------------------------------------------------------------------
// Derivations

std::string to_string(const Action& a) {
  if (a.is_shift()) return "shift";
  return "reduce(" + std::string(to_short_string(a.nuclearity)) + "," +
         a.relation + ")";
}

std::vector<Action> derive_shift_reduce_sequence(const RstTree& tree) {
  std::vector<Action> out;
  out.reserve(static_cast<std::size_t>(2 * tree.num_edus() - 1));
  // Explicit post-order: (node, children_done).
  std::vector<std::pair<const RstTree*, bool>> todo{{&tree, false}};
  while (!todo.empty()) {
    auto [t, expanded] = todo.back();
    todo.pop_back();
    if (t->is_leaf()) {
      out.push_back(Action::shift());
    } else if (expanded) {
      out.push_back(Action::reduce(t->nuclearity(), t->relation()));
    } else {
      todo.emplace_back(t, true);
      todo.emplace_back(&t->right(), false);
      todo.emplace_back(&t->left(), false);
    }
  }
  return out;
}

std::vector<GoldSplit> derive_split_sequence(const RstTree& tree) {
  std::vector<GoldSplit> out;
  for (const RstTree& node : tree.internal_nodes()) {
    const Span s = node.span();
    out.push_back({s, node.left().span().last - s.first, node.nuclearity(),
                   node.relation()});
  }
  return out;
}

std::string join_edu_texts(std::span<const Edu> edus) {
  std::string out;
  for (const Edu& e : edus) {
    if (!out.empty()) out.push_back(' ');
    out += e.text;
  }
  return out;
}

std::string span_text(const RstTree& tree, Span span) {
  if (span.first > span.last || !tree.span().contains(span)) {
    throw SpanOutOfRange("span " + std::to_string(span.first) + "-" +
                         std::to_string(span.last) + " outside tree span " +
                         std::to_string(tree.span().first) + "-" +
                         std::to_string(tree.span().last));
  }
  const auto all = tree.edus();
  const auto offset = static_cast<std::size_t>(span.first - tree.span().first);
  return join_edu_texts(std::span<const Edu>(all).subspan(
      offset, static_cast<std::size_t>(span.length())));
}

RstTree build_from_splits(std::span<const Edu> edus,
                          std::span<const GoldSplit> splits) {
  if (edus.empty()) throw EmptyDocument("no EDUs");
  const int first = edus.front().index;
  auto leaf_at = [&](int index) {
    return RstTree::leaf(edus[static_cast<std::size_t>(index - first)]);
  };
  std::map<Span, RstTree> built;
  auto take = [&](Span s) -> RstTree {
    if (s.length() == 1) return leaf_at(s.first);
    auto it = built.find(s);
    if (it == built.end()) {
      throw MalformedTree("missing split for span " + std::to_string(s.first) +
                          "-" + std::to_string(s.last));
    }
    RstTree t = it->second;
    built.erase(it);
    return t;
  };
  // Reverse pre-order visits every child before its parent.
  for (auto it = splits.rbegin(); it != splits.rend(); ++it) {
    const GoldSplit& g = *it;
    if (g.k < 0 || g.k > g.span.length() - 2) {
      throw MalformedTree("split index out of range");
    }
    const int mid = g.span.first + g.k;
    RstTree left = take({g.span.first, mid});
    RstTree right = take({mid + 1, g.span.last});
    built.insert_or_assign(
        g.span, RstTree::node(std::move(left), std::move(right), g.nuclearity,
                              g.relation));
  }
  const Span whole{first, edus.back().index};
  RstTree root = take(whole);
  if (!built.empty()) throw MalformedTree("unused splits");
  return root;
}

}  // namespace rst
