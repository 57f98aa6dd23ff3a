#include "rst/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "rst/error.hpp"

namespace fs = std::filesystem;

namespace rst {

Encoding parse_encoding(std::string_view name) {
  const std::string n = ascii_lower(name);
  if (n == "utf-8" || n == "utf8") return Encoding::Utf8;
  if (n == "latin-1" || n == "latin1" || n == "iso-8859-1") {
    return Encoding::Latin1;
  }
  throw ConfigError("unsupported encoding '" + std::string(name) + "'");
}

std::string decode(std::string_view bytes, Encoding encoding) {
  if (encoding == Encoding::Utf8) return std::string(bytes);
  std::string out;
  out.reserve(bytes.size());
  for (unsigned char c : bytes) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingDocument("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shared cursor for the two bracket formats.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string atom() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    if (start == pos_) fail("expected a token");
    return std::string(text_.substr(start, pos_ - start));
  }
  int integer() {
    const std::size_t at = pos_;
    const std::string tok = atom();
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      pos_ = at;
      fail("expected an integer, got '" + tok + "'");
    }
    return value;
  }
  // Treebank text field: _!...._! (the delimiters may enclose parentheses).
  std::string delimited_text() {
    skip_space();
    if (text_.substr(pos_, 2) != "_!") {
      // Some distributions omit the markers; read up to the closing paren.
      const std::size_t close = text_.find(')', pos_);
      if (close == std::string_view::npos) fail("unterminated text field");
      std::string out(text_.substr(pos_, close - pos_));
      pos_ = close;
      return out;
    }
    pos_ += 2;
    const std::size_t end = text_.find("_!", pos_);
    if (end == std::string_view::npos) fail("unterminated text field");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 2;
    return out;
  }
  void skip_balanced() {
    expect('(');
    int depth = 1;
    while (depth > 0) {
      if (pos_ >= text_.size()) fail("unbalanced parentheses");
      if (text_.substr(pos_, 2) == "_!") {
        const std::size_t end = text_.find("_!", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated text field");
        pos_ = end + 2;
        continue;
      }
      const char c = text_[pos_++];
      if (c == '(') ++depth;
      if (c == ')') --depth;
    }
  }
  // Peeks the head symbol of the next parenthesized group without consuming.
  std::string peek_head() {
    const std::size_t save = pos_;
    expect('(');
    std::string head = peek() == '(' || peek() == ')' ? "" : atom();
    pos_ = save;
    return head;
  }
  std::size_t position() const { return pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') ++line;
    }
    throw SyntaxError(what + " at offset " + std::to_string(pos_) + " (line " +
                      std::to_string(line) + ")");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string span_str(Span s) {
  return std::to_string(s.first) + "-" + std::to_string(s.last);
}

struct DisParser {
  Cursor cur;
  std::vector<Edu> edus;

  // Returns the node plus its role/rel2par as written (role empty for Root).
  NaryChild node(bool is_root) {
    cur.expect('(');
    const std::string label = cur.atom();
    Role role = Role::Nucleus;
    if (is_root) {
      if (label != "Root") cur.fail("expected Root, got '" + label + "'");
    } else if (label == "Nucleus") {
      role = Role::Nucleus;
    } else if (label == "Satellite") {
      role = Role::Satellite;
    } else {
      cur.fail("expected Nucleus or Satellite, got '" + label + "'");
    }

    NaryChild out;
    out.role = role;
    std::optional<Span> declared;
    bool is_leaf = false;
    std::optional<std::string> rel2par;
    std::optional<std::string> text;

    while (cur.peek() == '(') {
      const std::string head = cur.peek_head();
      if (head == "span" || head == "leaf") {
        cur.expect('(');
        cur.atom();
        const int a = cur.integer();
        const int b = head == "span" ? cur.integer() : a;
        cur.expect(')');
        declared = Span{a, b};
        is_leaf = head == "leaf";
      } else if (head == "rel2par") {
        cur.expect('(');
        cur.atom();
        rel2par = cur.atom();
        cur.expect(')');
      } else if (head == "text") {
        cur.expect('(');
        cur.atom();
        text = cur.delimited_text();
        cur.expect(')');
      } else if (head == "Nucleus" || head == "Satellite") {
        if (is_leaf) cur.fail("leaf with children");
        out.tree.children.push_back(node(false));
      } else {
        cur.skip_balanced();  // unknown annotation
      }
    }
    cur.expect(')');

    if (!declared) cur.fail(label + " without span or leaf field");
    if (!is_root && !rel2par) cur.fail(label + " without rel2par field");
    out.rel2par = rel2par.value_or("");
    out.tree.span = *declared;

    if (is_leaf) {
      if (!text) cur.fail("leaf " + std::to_string(declared->first) +
                          " without text field");
      const int expected = static_cast<int>(edus.size()) + 1;
      if (declared->first != expected) {
        throw InconsistentSpan("leaf " + std::to_string(declared->first) +
                               " found where leaf " +
                               std::to_string(expected) + " was expected");
      }
      Edu e = Edu::make(declared->first, *text);
      edus.push_back(e);
      out.tree.edu = std::move(e);
      return out;
    }

    const auto& kids = out.tree.children;
    if (kids.empty()) cur.fail("span " + span_str(*declared) + " has no children");
    Span covered{kids.front().tree.span.first, kids.front().tree.span.first - 1};
    for (const auto& k : kids) {
      if (k.tree.span.first != covered.last + 1) {
        throw InconsistentSpan("children of span " + span_str(*declared) +
                               " are not contiguous");
      }
      covered.last = k.tree.span.last;
    }
    if (covered != *declared) {
      throw InconsistentSpan("span " + span_str(*declared) +
                             " disagrees with its children (" +
                             span_str(covered) + ")");
    }
    return out;
  }
};

}  // namespace

DisRecord read_dis(std::string_view text) {
  DisParser p{Cursor(text), {}};
  NaryChild root = p.node(true);
  if (!p.cur.at_end()) p.cur.fail("trailing content after Root");
  return {std::move(root.tree), std::move(p.edus)};
}

DisRecord read_dis_file(const fs::path& path, Encoding encoding) {
  try {
    return read_dis(decode(read_file(path), encoding));
  } catch (const SyntaxError& e) {
    throw SyntaxError(path.string() + ": " + e.what());
  } catch (const InconsistentSpan& e) {
    throw InconsistentSpan(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Relation maps

std::string normalize_relation_name(std::string_view name) {
  std::string n = ascii_lower(normalize_whitespace(name));
  if (n.size() > 2 && n.ends_with("-e")) n.resize(n.size() - 2);
  return n;
}

void RelationMap::add(std::string_view source, std::string target) {
  entries_[normalize_relation_name(source)] = std::move(target);
}

std::optional<std::string> RelationMap::lookup(std::string_view name) const {
  auto it = entries_.find(normalize_relation_name(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> RelationMap::targets() const {
  std::set<std::string> uniq;
  for (const auto& [_, t] : entries_) uniq.insert(t);
  return {uniq.begin(), uniq.end()};
}

RelationMap RelationMap::load(const fs::path& path,
                              const LabelInventory& inventory) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open relation map '" + path.string() + "'");
  RelationMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (normalize_whitespace(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'source<TAB>target'");
    }
    const std::string target = normalize_whitespace(line.substr(tab + 1));
    auto canonical = inventory.canonical(target);
    if (!canonical) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": target '" + target + "' is not in inventory '" +
                        inventory.id() + "'");
    }
    map.add(line.substr(0, tab), *canonical);
  }
  return map;
}

RelationMap RelationMap::identity(const LabelInventory& inventory) {
  RelationMap map;
  for (const auto& r : inventory.relations()) map.add(r, r);
  return map;
}

NaryTree apply_relation_map(const NaryTree& tree, const RelationMap& map,
                            std::string_view document_id) {
  NaryTree out;
  out.edu = tree.edu;
  out.span = tree.span;
  out.children.reserve(tree.children.size());
  for (const auto& child : tree.children) {
    NaryChild c{apply_relation_map(child.tree, map, document_id), child.role,
                child.rel2par};
    if (ascii_lower(c.rel2par) != kSpanRelation) {
      auto target = map.lookup(c.rel2par);
      if (!target) {
        throw UnmappableRelation(
            "unmapped relation '" + c.rel2par + "'" +
            (document_id.empty() ? "" : " in " + std::string(document_id)));
      }
      c.rel2par = *target;
    }
    out.children.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical bracket format

std::string write_tree(const RstTree& tree) {
  std::string out;
  // Entries: node to open, or nullptr meaning "emit ')'".
  std::vector<const RstTree*> todo{&tree};
  while (!todo.empty()) {
    const RstTree* t = todo.back();
    todo.pop_back();
    if (t == nullptr) {
      out.push_back(')');
      continue;
    }
    if (!out.empty() && out.back() != '(') out.push_back(' ');
    if (t->is_leaf()) {
      out += "(leaf " + std::to_string(t->edu().index) + ")";
      continue;
    }
    out += "(";
    out += to_short_string(t->nuclearity());
    out += " " + t->relation();
    todo.push_back(nullptr);
    todo.push_back(&t->right());
    todo.push_back(&t->left());
  }
  return out;
}

RstTree read_tree(std::string_view text, std::span<const Edu> edus) {
  Cursor cur(text);
  auto edu_at = [&](int index) -> const Edu& {
    if (edus.empty() || index < edus.front().index ||
        index > edus.back().index) {
      cur.fail("leaf " + std::to_string(index) + " outside the document");
    }
    return edus[static_cast<std::size_t>(index - edus.front().index)];
  };

  struct Frame {
    Nuclearity nuclearity;
    std::string relation;
    std::vector<RstTree> children;
  };
  std::vector<Frame> stack;
  std::optional<RstTree> result;

  auto finish = [&](RstTree t) {
    if (stack.empty()) {
      if (result) cur.fail("more than one tree in record");
      result = std::move(t);
    } else {
      if (stack.back().children.size() == 2) cur.fail("node with >2 children");
      stack.back().children.push_back(std::move(t));
    }
  };

  do {
    if (cur.at_end()) cur.fail("truncated tree");
    if (cur.peek() == ')') {
      cur.expect(')');
      if (stack.empty()) cur.fail("unbalanced ')'");
      Frame f = std::move(stack.back());
      stack.pop_back();
      if (f.children.size() != 2) cur.fail("internal node needs two children");
      try {
        finish(RstTree::node(std::move(f.children[0]),
                             std::move(f.children[1]), f.nuclearity,
                             std::move(f.relation)));
      } catch (const MalformedTree& e) {
        cur.fail(e.what());
      }
      continue;
    }
    cur.expect('(');
    const std::string head = cur.atom();
    if (head == "leaf") {
      const int index = cur.integer();
      cur.expect(')');
      finish(RstTree::leaf(edu_at(index)));
      continue;
    }
    auto nuc = try_parse_nuclearity(head);
    if (!nuc || head.size() != 2) cur.fail("unknown node head '" + head + "'");
    stack.push_back({*nuc, cur.atom(), {}});
  } while (!stack.empty());

  if (!cur.at_end()) cur.fail("trailing content after tree");
  return *result;
}

std::string write_tree_record(std::string_view document_id,
                              const RstTree& tree) {
  return std::string(document_id) + "\t" + write_tree(tree);
}

std::pair<std::string, RstTree> read_tree_record(std::string_view line,
                                                 std::span<const Edu> edus) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) {
    throw SyntaxError("tree record without document id");
  }
  return {std::string(line.substr(0, tab)),
          read_tree(line.substr(tab + 1), edus)};
}

// ---------------------------------------------------------------------------
// Corpora

std::string document_id_from_path(const fs::path& path) {
  std::string name = path.filename().string();
  for (std::string_view suffix : {".dis", ".out"}) {
    if (name.ends_with(suffix)) name.resize(name.size() - suffix.size());
  }
  return name;
}

fs::path document_path(const fs::path& directory, std::string_view id) {
  for (const char* suffix : {".dis", ".out.dis"}) {
    fs::path p = directory / (std::string(id) + suffix);
    if (fs::exists(p)) return p;
  }
  throw MissingDocument("document '" + std::string(id) + "' not found in " +
                        directory.string());
}

std::vector<std::string> list_documents(const fs::path& directory) {
  if (!fs::is_directory(directory)) {
    throw MissingDocument("corpus directory '" + directory.string() +
                          "' does not exist");
  }
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".dis") {
      ids.push_back(document_id_from_path(entry.path()));
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Document load_document(const CorpusOptions& options, std::string_view id) {
  DisRecord rec =
      read_dis_file(document_path(options.directory, id), options.encoding);
  const RelationMap map = options.relation_map
                              ? *options.relation_map
                              : RelationMap::identity(options.inventory);
  NaryTree mapped = apply_relation_map(rec.tree, map, id);
  Document doc{std::string(id), std::move(rec.edus), std::nullopt};
  doc.gold = binarize_right_heavy(mapped, options.inventory);
  return doc;
}

SplitManifest parse_manifest(std::string_view text) {
  SplitManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (parts.empty()) continue;
    if (parts[0] == "@size" && parts.size() == 3) {
      m.declared_sizes[parts[1]] = std::stoul(parts[2]);
      m.splits[parts[1]];
    } else if (parts.size() == 2 && parts[0] != "@size") {
      m.splits[parts[0]].push_back(parts[1]);
    } else {
      throw SyntaxError("manifest line " + std::to_string(lineno) +
                        ": expected '<split>\\t<doc id>'");
    }
  }
  return m;
}

SplitManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingDocument("cannot open manifest '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

void validate_manifest(const SplitManifest& manifest) {
  std::map<std::string, std::string> owner;
  for (const auto& [split, ids] : manifest.splits) {
    if (split != "train" && split != "dev" && split != "test") {
      throw DataError("unknown split '" + split + "'");
    }
    for (const auto& id : ids) {
      auto [it, fresh] = owner.emplace(id, split);
      if (!fresh) {
        throw OverlappingSplits("document '" + id + "' is listed in both '" +
                                it->second + "' and '" + split + "'");
      }
    }
  }
  for (const auto& [split, expected] : manifest.declared_sizes) {
    auto it = manifest.splits.find(split);
    const std::size_t actual = it == manifest.splits.end() ? 0 : it->second.size();
    if (actual != expected) {
      throw DataError("split '" + split + "' has " + std::to_string(actual) +
                      " documents, manifest declares " +
                      std::to_string(expected));
    }
  }
}

std::vector<Document>& CorpusSplits::operator[](std::string_view name) {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  throw DataError("unknown split '" + std::string(name) + "'");
}

CorpusSplits load_split(const fs::path& manifest_path,
                        const CorpusOptions& options) {
  const SplitManifest manifest = read_manifest(manifest_path);
  validate_manifest(manifest);
  CorpusSplits out;
  for (const auto& [split, ids] : manifest.splits) {
    auto& docs = out[split];
    for (const auto& id : ids) docs.push_back(load_document(options, id));
  }
  return out;
}

}  // namespace rst
