#include "codeseq/syntax_tree.hpp"

namespace codeseq {

const Node* Node::child(std::string_view field_name) const {
  for (const Node& c : children) {
    if (c.field == field_name) return &c;
  }
  return nullptr;
}

const Node* Node::first_of_kind(std::string_view node_kind) const {
  if (kind == node_kind) return this;
  for (const Node& c : children) {
    if (const Node* found = c.first_of_kind(node_kind)) return found;
  }
  return nullptr;
}

std::size_t count_nodes(const Node& node) {
  std::size_t n = 1;
  for (const Node& c : node.children) n += count_nodes(c);
  return n;
}

std::size_t count_leaves(const Node& node) {
  if (node.is_leaf()) return 1;
  std::size_t n = 0;
  for (const Node& c : node.children) n += count_leaves(c);
  return n;
}

std::size_t SyntaxTree::node_count() const { return count_nodes(root); }

void visit_preorder(const Node& node, const std::function<void(const Node&)>& fn) {
  fn(node);
  for (const Node& c : node.children) visit_preorder(c, fn);
}

std::string to_sexp(const Node& node) {
  std::string out = "(";
  if (!node.field.empty()) out += node.field + ":";
  out += node.kind;
  if (node.is_leaf()) {
    out += " \"" + node.text + "\"";
  }
  for (const Node& c : node.children) out += " " + to_sexp(c);
  out += ")";
  return out;
}

}  // namespace codeseq
