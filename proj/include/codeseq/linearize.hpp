#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "codeseq/language.hpp"
#include "codeseq/syntax_tree.hpp"

namespace codeseq {

enum class AstVariant { kSbt, kXsbt };

std::string_view to_string(AstVariant variant);

struct LinearizedAst {
  std::vector<std::string> tokens;
  AstVariant variant = AstVariant::kXsbt;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const LinearizedAst&) const = default;
};

// Node kinds that survive expression-level pruning.
class ExprKinds {
 public:
  ExprKinds() = default;
  explicit ExprKinds(std::set<std::string> kinds) : kinds_(std::move(kinds)) {}

  // Checked-in list compiled into the library.
  static const ExprKinds& builtin(Language language);
  // One kind per line; blank lines and '#' comments ignored. Throws IoError.
  static ExprKinds load(const std::filesystem::path& path);
  static ExprKinds parse(std::string_view text);

  bool contains(std::string_view kind) const { return kinds_.count(std::string(kind)) > 0; }
  const std::set<std::string>& kinds() const { return kinds_; }

 private:
  std::set<std::string> kinds_;
};

// "(" kind ")" kind per node; terminals are spelled kind_text.
LinearizedAst sbt(const Node& root);

// <kind> ... </kind> for internal nodes and a bare kind for leaves.
// Without expr_kinds the full tree is traversed.
LinearizedAst xsbt(const Node& root);
LinearizedAst xsbt(const Node& root, const ExprKinds& expr_kinds);

// Keeps nodes whose kind is listed or that have a kept descendant. The root
// always survives (alone, when nothing else does).
Node prune_to_expression_level(const Node& root, const ExprKinds& expr_kinds);

// Pushdown check over <kind>/</kind> markers.
bool is_well_balanced(const std::vector<std::string>& tokens);

}  // namespace codeseq
