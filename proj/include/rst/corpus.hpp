#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rst/core.hpp"

namespace rst {

struct Document {
  std::string id;
  std::vector<Edu> edus;
  std::optional<RstTree> gold;

  int num_edus() const { return static_cast<int>(edus.size()); }
};

enum class Encoding { Utf8, Latin1 };

Encoding parse_encoding(std::string_view name);
/// Returns UTF-8.
std::string decode(std::string_view bytes, Encoding encoding);

struct DisRecord {
  NaryTree tree;
  std::vector<Edu> edus;
};

/// Parses a treebank ".dis" record:
///   ( Root (span 1 3)
///     ( Nucleus (leaf 1) (rel2par span) (text _!...!_) ) ... )
DisRecord read_dis(std::string_view text);
DisRecord read_dis_file(const std::filesystem::path& path,
                        Encoding encoding = Encoding::Utf8);

/// Normalized relation name: lowercased, "-e" (embedded unit) suffix removed.
std::string normalize_relation_name(std::string_view name);

/// Fine-grained relation name -> canonical inventory relation.
class RelationMap {
 public:
  RelationMap() = default;

  /// "source<TAB>target" per line, '#' comments. Every target must belong
  /// to the inventory.
  static RelationMap load(const std::filesystem::path& path,
                          const LabelInventory& inventory);
  /// Maps every inventory member to itself.
  static RelationMap identity(const LabelInventory& inventory);

  void add(std::string_view source, std::string target);
  std::optional<std::string> lookup(std::string_view name) const;
  /// Distinct targets.
  std::vector<std::string> targets() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::string> entries_;
};

/// Replaces every rel2par (except "span") by its mapped target. Throws
/// UnmappableRelation naming the relation and document.
NaryTree apply_relation_map(const NaryTree& tree, const RelationMap& map,
                            std::string_view document_id = {});

/// Canonical bracket text: "(leaf 3)" or "(NS Elaboration <left> <right>)".
std::string write_tree(const RstTree& tree);
/// Inverse of write_tree; leaf texts come from the document's EDUs.
RstTree read_tree(std::string_view text, std::span<const Edu> edus);

/// One record per line: "<doc id>\t<tree>".
std::string write_tree_record(std::string_view document_id,
                              const RstTree& tree);
std::pair<std::string, RstTree> read_tree_record(std::string_view line,
                                                 std::span<const Edu> edus);

struct CorpusOptions {
  std::filesystem::path directory;
  std::optional<RelationMap> relation_map;  // identity when absent
  LabelInventory inventory = LabelInventory::rstdt();
  Encoding encoding = Encoding::Utf8;
};

/// Finds "<id>.dis" or "<id>.out.dis" under the corpus directory.
std::filesystem::path document_path(const std::filesystem::path& directory,
                                    std::string_view id);
/// "wsj_0600.out.dis" -> "wsj_0600".
std::string document_id_from_path(const std::filesystem::path& path);

/// Reads, maps and binarizes one document.
Document load_document(const CorpusOptions& options, std::string_view id);
/// All .dis files in the directory, sorted by id.
std::vector<std::string> list_documents(const std::filesystem::path& directory);

struct SplitManifest {
  std::map<std::string, std::vector<std::string>> splits;
  std::map<std::string, std::size_t> declared_sizes;
};

/// Line format: "<split>\t<doc id>"; "@size\t<split>\t<n>" declares an
/// expected count; '#' comments.
SplitManifest parse_manifest(std::string_view text);
SplitManifest read_manifest(const std::filesystem::path& path);

struct CorpusSplits {
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;

  std::vector<Document>& operator[](std::string_view name);
};

/// Throws OverlappingSplits, MissingDocument, or DataError on a size that
/// differs from its declaration.
CorpusSplits load_split(const std::filesystem::path& manifest_path,
                        const CorpusOptions& options);
void validate_manifest(const SplitManifest& manifest);

}  // namespace rst
