#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "codeseq/language.hpp"

namespace codeseq {

// Concrete syntax tree node with named children only (punctuation and
// keywords are folded into their parent's kind). A node without children is
// a terminal and carries its lexeme in `text`; internal nodes never do.
struct Node {
  std::string kind;
  std::string text;
  std::string field;  // role within the parent ("name", "body", ...) or empty
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<Node> children;
  bool error = false;  // produced by error recovery

  bool is_leaf() const { return children.empty(); }
  const Node* child(std::string_view field_name) const;
  const Node* first_of_kind(std::string_view node_kind) const;  // pre-order, self included
};

struct SyntaxTree {
  Node root;
  Language language = Language::kOther;
  bool has_error = false;

  std::size_t node_count() const;
};

std::size_t count_nodes(const Node& node);
std::size_t count_leaves(const Node& node);

void visit_preorder(const Node& node, const std::function<void(const Node&)>& fn);

// S-expression rendering for debugging and tests.
std::string to_sexp(const Node& node);

}  // namespace codeseq
