#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rst {

/// Collapses runs of whitespace (including newlines) to one space and trims
/// both ends.
std::string normalize_whitespace(std::string_view text);

/// Lowercases ASCII letters; other bytes pass through unchanged.
std::string ascii_lower(std::string_view text);

/// Elementary discourse unit. Indices are 1-based within a document.
struct Edu {
  int index = 0;
  std::string text;

  /// Normalizes the text and checks the invariants (index >= 1, non-empty).
  static Edu make(int index, std::string_view text);

  friend bool operator==(const Edu&, const Edu&) = default;
};

/// Inclusive range of EDU indices.
struct Span {
  int first = 0;
  int last = 0;

  int length() const { return last - first + 1; }
  bool contains(const Span& other) const {
    return first <= other.first && other.last <= last;
  }

  friend auto operator<=>(const Span&, const Span&) = default;
};

enum class Nuclearity { NucleusNucleus, NucleusSatellite, SatelliteNucleus };

/// "nucleus-nucleus", "nucleus-satellite", "satellite-nucleus".
std::string_view to_string(Nuclearity n);
/// Short form used in the bracket format: NN, NS, SN.
std::string_view to_short_string(Nuclearity n);
/// Accepts either the long or the short form, case-insensitively.
std::optional<Nuclearity> try_parse_nuclearity(std::string_view text);
/// Throws SyntaxError on anything but the three patterns.
Nuclearity parse_nuclearity(std::string_view text);

inline constexpr Nuclearity kAllNuclearities[] = {
    Nuclearity::NucleusNucleus, Nuclearity::NucleusSatellite,
    Nuclearity::SatelliteNucleus};

/// Closed relation set of one corpus plus the labels used when a generated
/// answer has to be replaced.
class LabelInventory {
 public:
  LabelInventory(std::string id, std::vector<std::string> relations,
                 std::string default_relation,
                 Nuclearity default_nuclearity = Nuclearity::NucleusSatellite);

  /// 18 coarse RST-DT classes (also the target of the GUM mapping).
  static const LabelInventory& rstdt();
  /// 39 Instr-DT relations.
  static const LabelInventory& instrdt();
  /// "rstdt", "gum" (alias of rstdt) or "instrdt"; otherwise reads a file.
  static LabelInventory resolve(const std::string& id_or_path);
  /// Text format: "@id <id>", "@default <relation> [<nuclearity>]", then one
  /// relation per line; '#' starts a comment.
  static LabelInventory load(const std::string& path);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::string& default_relation() const { return default_relation_; }
  Nuclearity default_nuclearity() const { return default_nuclearity_; }
  std::size_t size() const { return relations_.size(); }

  /// Case-insensitive lookup returning the canonical spelling.
  std::optional<std::string> canonical(std::string_view name) const;
  bool contains(std::string_view name) const {
    return canonical(name).has_value();
  }

 private:
  std::string id_;
  std::vector<std::string> relations_;
  std::vector<std::string> folded_;
  std::string default_relation_;
  Nuclearity default_nuclearity_;
};

/// Immutable binary RST tree. Copies share structure.
class RstTree {
 public:
  static RstTree leaf(Edu edu);
  /// Throws MalformedTree unless right starts where left ends.
  static RstTree node(RstTree left, RstTree right, Nuclearity nuclearity,
                      std::string relation);

  bool is_leaf() const;
  const Edu& edu() const;  // leaf only
  const RstTree& left() const;
  const RstTree& right() const;
  Nuclearity nuclearity() const;
  const std::string& relation() const;
  Span span() const;
  int num_edus() const { return span().length(); }

  /// Leaves in left-to-right order.
  std::vector<Edu> edus() const;
  /// Internal nodes in pre-order.
  std::vector<RstTree> internal_nodes() const;

  friend bool operator==(const RstTree& a, const RstTree& b);

 private:
  struct Impl;
  explicit RstTree(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

enum class Role { Nucleus, Satellite };

struct NaryChild;

/// Treebank tree before binarization. Leaves carry an EDU; internal nodes
/// carry >= 2 children each with a role and relation-to-parent.
struct NaryTree {
  std::optional<Edu> edu;
  std::vector<NaryChild> children;
  Span span;

  bool is_leaf() const { return edu.has_value(); }
  std::vector<Edu> edus() const;
};

struct NaryChild {
  NaryTree tree;
  Role role = Role::Nucleus;
  std::string rel2par;  // "span" marks the nucleus of a mono-nuclear relation
};

inline constexpr std::string_view kSpanRelation = "span";

/// Right-branching binarization: children c1..ck become
/// (c1 (c2 (... (c_{k-1} c_k)))). An introduced chain counts as a nucleus.
/// Relation names must already be inventory members (see apply_relation_map).
RstTree binarize_right_heavy(const NaryTree& tree,
                             const LabelInventory& inventory);

/// One step of a shift-reduce derivation.
struct Action {
  enum class Kind { Shift, Reduce };
  Kind kind = Kind::Shift;
  Nuclearity nuclearity = Nuclearity::NucleusSatellite;
  std::string relation;

  static Action shift() { return {}; }
  static Action reduce(Nuclearity n, std::string relation) {
    return {Kind::Reduce, n, std::move(relation)};
  }
  bool is_shift() const { return kind == Kind::Shift; }
  bool is_reduce() const { return kind == Kind::Reduce; }

  friend bool operator==(const Action& a, const Action& b) {
    if (a.kind != b.kind) return false;
    return a.is_shift() ||
           (a.nuclearity == b.nuclearity && a.relation == b.relation);
  }
};

std::string to_string(const Action& a);

/// Gold split of one span; k is relative to the span's first EDU.
struct GoldSplit {
  Span span;
  int k = 0;
  Nuclearity nuclearity = Nuclearity::NucleusSatellite;
  std::string relation;

  friend bool operator==(const GoldSplit&, const GoldSplit&) = default;
};

/// Post-order action image of the tree: 2n-1 steps for n EDUs.
std::vector<Action> derive_shift_reduce_sequence(const RstTree& tree);

/// Pre-order splits, one per internal node.
std::vector<GoldSplit> derive_split_sequence(const RstTree& tree);

/// EDU texts in [first, last] joined by single spaces.
std::string join_edu_texts(std::span<const Edu> edus);
/// Text of a sub-span of the tree; throws SpanOutOfRange.
std::string span_text(const RstTree& tree, Span span);

/// Rebuilds a tree from its split decisions over the given EDUs.
RstTree build_from_splits(std::span<const Edu> edus,
                          std::span<const GoldSplit> splits);

}  // namespace rst
