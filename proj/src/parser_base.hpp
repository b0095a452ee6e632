#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codeseq/error.hpp"
#include "codeseq/lexer.hpp"
#include "codeseq/syntax_tree.hpp"

namespace codeseq::detail {

// Token cursor and node bookkeeping shared by the language parsers.
class ParserBase {
 public:
  ParserBase(std::vector<Token> tokens, std::string_view source)
      : tokens_(std::move(tokens)), source_(source) {}

  bool had_error() const { return had_error_; }

 protected:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& tok(std::size_t i) const { return i < tokens_.size() ? tokens_[i] : tokens_.back(); }

  static bool is_text(const Token& t, std::string_view text) {
    return (t.kind == TokenKind::kOperator || t.kind == TokenKind::kKeyword) && t.text == text;
  }
  bool at(std::string_view text, std::size_t ahead = 0) const { return is_text(peek(ahead), text); }
  bool at_kind(TokenKind kind, std::size_t ahead = 0) const { return peek(ahead).kind == kind; }
  bool at_identifier(std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::kIdentifier;
  }
  bool at_end() const { return peek().kind == TokenKind::kEnd; }

  const Token& take() {
    const Token& t = tokens_[pos_];
    if (!is_layout(t.kind)) last_end_ = t.end;
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  bool accept(std::string_view text) {
    if (!at(text)) return false;
    take();
    return true;
  }

  void expect(std::string_view text) {
    if (!at(text)) fail("expected '" + std::string(text) + "'");
    take();
  }

  const Token& expect_identifier() {
    if (!at_identifier()) fail("expected identifier");
    return take();
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::kEnd ? std::string("end of input") : "'" + t.text + "'";
    if (t.kind == TokenKind::kNewline) found = "newline";
    if (t.kind == TokenKind::kIndent) found = "indent";
    if (t.kind == TokenKind::kDedent) found = "dedent";
    throw ParseError(message + ", found " + found, t.begin, t.line, t.column);
  }

  // Starts a node at the current token.
  struct Open {
    std::size_t token;
    std::size_t begin;
  };
  Open open() const { return {pos_, peek().begin}; }

  Node finish(Node node, const Open& o) const {
    node.begin = o.begin;
    node.end = std::max(o.begin, last_end_);
    if (node.children.empty() && node.text.empty()) node.text = joined_text(o.token, pos_);
    return node;
  }

  Node make(std::string kind, const Open& o) const {
    Node n;
    n.kind = std::move(kind);
    return finish(std::move(n), o);
  }

  Node leaf(std::string kind, const Token& t) const {
    Node n;
    n.kind = std::move(kind);
    n.text = t.text;
    n.begin = t.begin;
    n.end = t.end;
    return n;
  }

  Node take_leaf(std::string kind) { return leaf(std::move(kind), take()); }

  static void add(Node& parent, Node child, std::string field = {}) {
    if (!field.empty()) child.field = std::move(field);
    parent.children.push_back(std::move(child));
  }

  std::string joined_text(std::size_t from, std::size_t to) const {
    std::string text;
    for (std::size_t i = from; i < to && i < tokens_.size(); ++i) {
      if (is_layout(tokens_[i].kind)) continue;
      if (!text.empty()) text += ' ';
      text += tokens_[i].text;
    }
    return text;
  }

  // Error node spanning tokens [from, pos_).
  Node error_node(std::size_t from) {
    had_error_ = true;
    Node n;
    n.kind = "ERROR";
    n.error = true;
    n.text = joined_text(from, pos_);
    n.begin = tok(from).begin;
    n.end = std::max(n.begin, last_end_);
    if (n.text.empty()) n.text = "?";
    return n;
  }

  void rewind(std::size_t to) {
    pos_ = to;
    last_end_ = to > 0 ? last_content_end_before(to) : 0;
  }

  std::size_t last_content_end_before(std::size_t index) const {
    for (std::size_t i = index; i-- > 0;) {
      if (!is_layout(tokens_[i].kind)) return tokens_[i].end;
    }
    return 0;
  }

  std::vector<Token> tokens_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
  bool had_error_ = false;
};

}  // namespace codeseq::detail
