#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "parser_base.hpp"
#include "parsers.hpp"

namespace codeseq::detail {
namespace {

const std::unordered_set<std::string>& primitive_types() {
  static const std::unordered_set<std::string> s = {"int",   "long",   "short",   "byte", "char",
                                                    "float", "double", "boolean", "void"};
  return s;
}

const std::unordered_set<std::string>& modifier_keywords() {
  static const std::unordered_set<std::string> s = {
      "public", "private",      "protected", "static",    "final",    "abstract",
      "native", "synchronized", "transient", "volatile",  "strictfp", "default"};
  return s;
}

const std::unordered_set<std::string>& assignment_operators() {
  static const std::unordered_set<std::string> s = {"=",  "+=", "-=",  "*=",  "/=",  "%=",
                                                    "&=", "|=", "^=", "<<=", ">>=", ">>>="};
  return s;
}

std::string primitive_kind(const std::string& word) {
  if (word == "float" || word == "double") return "floating_point_type";
  if (word == "boolean") return "boolean_type";
  if (word == "void") return "void_type";
  return "integral_type";
}

std::string number_kind(const std::string& text) {
  const bool hex = text.size() > 1 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
  const bool bin = text.size() > 1 && text[0] == '0' && (text[1] == 'b' || text[1] == 'B');
  if (hex) {
    return text.find_first_of("pP") != std::string::npos ? "hex_floating_point_literal"
                                                         : "hex_integer_literal";
  }
  if (bin) return "binary_integer_literal";
  const char last = text.back();
  if (text.find_first_of(".eE") != std::string::npos || last == 'f' || last == 'F' ||
      last == 'd' || last == 'D') {
    return "decimal_floating_point_literal";
  }
  if (text.size() > 1 && text[0] == '0' && text.find_first_not_of("0_lL") != std::string::npos) {
    return "octal_integer_literal";
  }
  return "decimal_integer_literal";
}

// Splits ">>" and ">>>" so that nested type argument lists close cleanly; the
// expression parser re-joins adjacent '>' tokens into shift operators.
std::vector<Token> split_angle_brackets(std::vector<Token> tokens) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (Token& t : tokens) {
    if (t.kind == TokenKind::kOperator && (t.text == ">>" || t.text == ">>>")) {
      for (std::size_t i = 0; i < t.text.size(); ++i) {
        Token piece = t;
        piece.text = ">";
        piece.begin = t.begin + i;
        piece.end = piece.begin + 1;
        piece.column = t.column + static_cast<int>(i);
        out.push_back(piece);
      }
    } else {
      out.push_back(std::move(t));
    }
  }
  return out;
}

class JavaParser : public ParserBase {
 public:
  JavaParser(std::string_view source, std::vector<Token> tokens)
      : ParserBase(split_angle_brackets(std::move(tokens)), source) {}

  Node compilation_unit() {
    const Open o = open();
    Node unit;
    unit.kind = "program";
    while (!at_end()) {
      if (accept(";")) continue;
      const std::size_t start = pos_;
      try {
        if (at("package")) {
          add(unit, package_declaration());
        } else if (at("import")) {
          add(unit, import_declaration());
        } else {
          add(unit, member());
        }
      } catch (const ParseError&) {
        rewind(start);
        add(unit, recover_member(start));
      }
    }
    return finish(std::move(unit), o);
  }

  Node standalone_member() {
    Node n = member();
    if (!at_end()) fail("unexpected trailing input after declaration");
    if (n.kind != "method_declaration" && n.kind != "constructor_declaration") {
      throw ParseError("expected a method or constructor declaration", n.begin, 1, 1);
    }
    return n;
  }

 private:
  // ---------------------------------------------------------------- recovery

  // Skips a malformed statement or member: through the next ';' or balanced
  // brace block at nesting depth zero, stopping before an unmatched '}'.
  void skip_construct() {
    int depth = 0;
    const std::size_t start = pos_;
    while (!at_end()) {
      if (at("(") || at("[")) {
        ++depth;
      } else if ((at(")") || at("]")) && depth > 0) {
        --depth;
      } else if (at("{")) {
        skip_braces();
        if (depth == 0) return;
        continue;
      } else if (at("}")) {
        if (pos_ == start) take();
        return;
      } else if (at(";") && depth == 0) {
        take();
        return;
      }
      take();
    }
  }

  void skip_braces() {
    int depth = 0;
    while (!at_end()) {
      if (at("{")) ++depth;
      if (at("}")) {
        --depth;
        if (depth == 0) {
          take();
          return;
        }
      }
      take();
    }
  }

  Node recover_member(std::size_t start) {
    skip_construct();
    if (pos_ == start) take();
    return error_node(start);
  }

  // ------------------------------------------------------------- lookahead

  std::size_t skip_annotation_at(std::size_t i) const {
    if (!is_text(tok(i), "@") || tok(i + 1).kind != TokenKind::kIdentifier) return npos;
    i += 2;
    while (is_text(tok(i), ".") && tok(i + 1).kind == TokenKind::kIdentifier) i += 2;
    if (is_text(tok(i), "(")) {
      int depth = 0;
      for (; tok(i).kind != TokenKind::kEnd; ++i) {
        if (is_text(tok(i), "(")) ++depth;
        if (is_text(tok(i), ")") && --depth == 0) return i + 1;
      }
      return npos;
    }
    return i;
  }

  std::size_t skip_type_arguments_at(std::size_t i) const {
    if (!is_text(tok(i), "<")) return npos;
    int depth = 0;
    for (; tok(i).kind != TokenKind::kEnd; ++i) {
      const Token& t = tok(i);
      if (is_text(t, "<")) {
        ++depth;
      } else if (is_text(t, ">")) {
        if (--depth == 0) return i + 1;
      } else if (t.kind == TokenKind::kIdentifier ||
                 (t.kind == TokenKind::kKeyword &&
                  (primitive_types().count(t.text) || t.text == "extends" || t.text == "super")) ||
                 is_text(t, "?") || is_text(t, ",") || is_text(t, ".") || is_text(t, "[") ||
                 is_text(t, "]") || is_text(t, "&") || is_text(t, "@")) {
        continue;
      } else {
        return npos;
      }
    }
    return npos;
  }

  // Returns the index just past a type starting at i, or npos.
  std::size_t skip_type_at(std::size_t i) const {
    while (is_text(tok(i), "@")) {
      i = skip_annotation_at(i);
      if (i == npos) return npos;
    }
    const Token& t = tok(i);
    if (t.kind == TokenKind::kKeyword && primitive_types().count(t.text)) {
      ++i;
    } else if (t.kind == TokenKind::kIdentifier) {
      ++i;
      if (is_text(tok(i), "<")) {
        i = skip_type_arguments_at(i);
        if (i == npos) return npos;
      }
      while (is_text(tok(i), ".") && tok(i + 1).kind == TokenKind::kIdentifier) {
        i += 2;
        if (is_text(tok(i), "<")) {
          i = skip_type_arguments_at(i);
          if (i == npos) return npos;
        }
      }
    } else {
      return npos;
    }
    while (is_text(tok(i), "[") && is_text(tok(i + 1), "]")) i += 2;
    return i;
  }

  std::size_t skip_modifiers_at(std::size_t i) const {
    while (true) {
      const Token& t = tok(i);
      if (t.kind == TokenKind::kKeyword && modifier_keywords().count(t.text)) {
        ++i;
      } else if (is_text(t, "@") && !is_text(tok(i + 1), "interface")) {
        i = skip_annotation_at(i);
        if (i == npos) return npos;
      } else {
        return i;
      }
    }
  }

  // `Type name` followed by a declarator continuation.
  bool looks_like_local_declaration() const {
    std::size_t i = skip_modifiers_at(pos_);
    if (i == npos) return false;
    const bool had_modifiers = i != pos_;
    i = skip_type_at(i);
    if (i == npos) return false;
    if (tok(i).kind != TokenKind::kIdentifier) return false;
    const Token& next = tok(i + 1);
    return had_modifiers || is_text(next, "=") || is_text(next, ";") || is_text(next, ",") ||
           is_text(next, "[") || is_text(next, ":");
  }

  std::size_t matching_paren(std::size_t i) const {
    int depth = 0;
    for (; tok(i).kind != TokenKind::kEnd; ++i) {
      if (is_text(tok(i), "(")) ++depth;
      if (is_text(tok(i), ")") && --depth == 0) return i;
    }
    return npos;
  }

  bool looks_like_lambda() const {
    if (at_identifier() && at("->", 1)) return true;
    if (!at("(")) return false;
    const std::size_t close = matching_paren(pos_);
    return close != npos && is_text(tok(close + 1), "->");
  }

  bool looks_like_cast() const {
    if (!at("(")) return false;
    const std::size_t end = skip_type_at(pos_ + 1);
    if (end == npos || !is_text(tok(end), ")")) return false;
    const Token& first = tok(pos_ + 1);
    if (first.kind == TokenKind::kKeyword && primitive_types().count(first.text)) return true;
    const Token& next = tok(end + 1);
    switch (next.kind) {
      case TokenKind::kIdentifier:
      case TokenKind::kNumber:
      case TokenKind::kString:
      case TokenKind::kCharacter:
        return true;
      case TokenKind::kKeyword:
        return next.text == "this" || next.text == "super" || next.text == "new" ||
               next.text == "true" || next.text == "false" || next.text == "null" ||
               next.text == "switch";
      case TokenKind::kOperator:
        return next.text == "(" || next.text == "!" || next.text == "~";
      default:
        return false;
    }
  }

  bool at_contextual(std::string_view word, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::kIdentifier && peek(ahead).text == word;
  }

  bool at_type_declaration_start() const {
    if (at("class") || at("interface") || at("enum")) return true;
    if (at("@") && at("interface", 1)) return true;
    return at_contextual("record") && at_identifier(1) && (at("(", 2) || at("<", 2));
  }

  // ---------------------------------------------------------- declarations

  Node scoped_name() {
    const Open o = open();
    Node first = leaf("identifier", expect_identifier());
    if (!at(".") || !(at_identifier(1) || at("*", 1))) return first;
    Node scoped;
    scoped.kind = "scoped_identifier";
    add(scoped, std::move(first));
    while (at(".") && (at_identifier(1) || at("*", 1))) {
      take();
      if (at("*")) {
        add(scoped, take_leaf("asterisk"));
      } else {
        add(scoped, take_leaf("identifier"));
      }
    }
    return finish(std::move(scoped), o);
  }

  Node package_declaration() {
    const Open o = open();
    expect("package");
    Node n;
    n.kind = "package_declaration";
    add(n, scoped_name());
    expect(";");
    return finish(std::move(n), o);
  }

  Node import_declaration() {
    const Open o = open();
    expect("import");
    Node n;
    n.kind = "import_declaration";
    accept("static");
    add(n, scoped_name());
    expect(";");
    return finish(std::move(n), o);
  }

  Node annotation() {
    const Open o = open();
    expect("@");
    Node name = scoped_name();
    if (!at("(")) {
      Node n;
      n.kind = "marker_annotation";
      add(n, std::move(name), "name");
      return finish(std::move(n), o);
    }
    Node n;
    n.kind = "annotation";
    add(n, std::move(name), "name");
    const Open args_open = open();
    Node args;
    args.kind = "annotation_argument_list";
    expect("(");
    while (!at(")")) {
      if (at_identifier() && at("=", 1)) {
        const Open pair_open = open();
        Node pair;
        pair.kind = "element_value_pair";
        add(pair, take_leaf("identifier"), "key");
        expect("=");
        add(pair, element_value(), "value");
        add(args, finish(std::move(pair), pair_open));
      } else {
        add(args, element_value());
      }
      if (!accept(",")) break;
    }
    expect(")");
    add(n, finish(std::move(args), args_open), "arguments");
    return finish(std::move(n), o);
  }

  Node element_value() {
    if (at("@")) return annotation();
    if (at("{")) {
      const Open o = open();
      Node n;
      n.kind = "element_value_array_initializer";
      expect("{");
      while (!at("}")) {
        add(n, element_value());
        if (!accept(",")) break;
      }
      expect("}");
      return finish(std::move(n), o);
    }
    return ternary();
  }

  bool at_modifier() const {
    if (peek().kind == TokenKind::kKeyword && modifier_keywords().count(peek().text)) {
      // `default:` inside a switch is not a modifier; members never start that way.
      return !(at("default") && (at(":", 1) || at("->", 1)));
    }
    if (at_contextual("sealed") || (at_contextual("non") && at("-", 1))) return false;
    return at("@") && !at("interface", 1);
  }

  bool modifiers(Node& out) {
    if (!at_modifier()) return false;
    const Open o = open();
    Node n;
    n.kind = "modifiers";
    while (at_modifier()) {
      if (at("@")) {
        add(n, annotation());
      } else {
        take();
      }
    }
    out = finish(std::move(n), o);
    return true;
  }

  Node member() {
    const Open o = open();
    Node mods;
    const bool has_mods = modifiers(mods);
    if (at("{")) {
      Node body = block();
      Node n;
      n.kind = has_mods ? "static_initializer" : "block";
      if (!has_mods) return body;
      add(n, std::move(body));
      return finish(std::move(n), o);
    }
    if (at_type_declaration_start()) return type_declaration(has_mods ? &mods : nullptr, o);

    Node type_params;
    const bool has_type_params = at("<");
    if (has_type_params) type_params = type_parameters();

    if (at_identifier() && at("(", 1)) {
      Node n;
      n.kind = "constructor_declaration";
      if (has_mods) add(n, std::move(mods));
      if (has_type_params) add(n, std::move(type_params), "type_parameters");
      add(n, take_leaf("identifier"), "name");
      add(n, formal_parameters(), "parameters");
      if (at("throws")) add(n, throws_clause());
      Node body = block();
      body.kind = "constructor_body";
      add(n, std::move(body), "body");
      return finish(std::move(n), o);
    }
    if (at_identifier() && at("{", 1)) {
      Node n;
      n.kind = "compact_constructor_declaration";
      if (has_mods) add(n, std::move(mods));
      add(n, take_leaf("identifier"), "name");
      add(n, block(), "body");
      return finish(std::move(n), o);
    }

    Node type_node = type();
    if (at_identifier() && at("(", 1)) {
      Node n;
      n.kind = "method_declaration";
      if (has_mods) add(n, std::move(mods));
      if (has_type_params) add(n, std::move(type_params), "type_parameters");
      add(n, std::move(type_node), "type");
      add(n, take_leaf("identifier"), "name");
      add(n, formal_parameters(), "parameters");
      if (at("[")) add(n, dimensions());
      if (at("throws")) add(n, throws_clause());
      if (accept("default")) add(n, element_value(), "default_value");
      if (at("{")) {
        add(n, block(), "body");
      } else {
        expect(";");
      }
      return finish(std::move(n), o);
    }

    Node n;
    n.kind = "field_declaration";
    if (has_mods) add(n, std::move(mods));
    add(n, std::move(type_node), "type");
    add(n, variable_declarator(), "declarator");
    while (accept(",")) add(n, variable_declarator(), "declarator");
    expect(";");
    return finish(std::move(n), o);
  }

  Node type_declaration(Node* mods, const Open& o) {
    Node n;
    if (mods) add(n, std::move(*mods));
    if (accept("class")) {
      n.kind = "class_declaration";
      add(n, leaf("identifier", expect_identifier()), "name");
      if (at("<")) add(n, type_parameters(), "type_parameters");
      if (at("extends")) {
        const Open so = open();
        take();
        Node sup;
        sup.kind = "superclass";
        add(sup, type());
        add(n, finish(std::move(sup), so));
      }
      if (at("implements")) add(n, type_list_clause("super_interfaces", "implements"));
      if (at_contextual("permits")) add(n, type_list_clause("permits", "permits"));
      add(n, class_body("class_body"), "body");
    } else if (accept("interface")) {
      n.kind = "interface_declaration";
      add(n, leaf("identifier", expect_identifier()), "name");
      if (at("<")) add(n, type_parameters(), "type_parameters");
      if (at("extends")) add(n, type_list_clause("extends_interfaces", "extends"));
      if (at_contextual("permits")) add(n, type_list_clause("permits", "permits"));
      add(n, class_body("interface_body"), "body");
    } else if (accept("enum")) {
      n.kind = "enum_declaration";
      add(n, leaf("identifier", expect_identifier()), "name");
      if (at("implements")) add(n, type_list_clause("super_interfaces", "implements"));
      add(n, enum_body(), "body");
    } else if (at("@")) {
      take();
      expect("interface");
      n.kind = "annotation_type_declaration";
      add(n, leaf("identifier", expect_identifier()), "name");
      add(n, class_body("annotation_type_body"), "body");
    } else {
      take();  // record
      n.kind = "record_declaration";
      add(n, leaf("identifier", expect_identifier()), "name");
      if (at("<")) add(n, type_parameters(), "type_parameters");
      add(n, formal_parameters(), "parameters");
      if (at("implements")) add(n, type_list_clause("super_interfaces", "implements"));
      add(n, class_body("class_body"), "body");
    }
    return finish(std::move(n), o);
  }

  Node type_list_clause(const char* kind, std::string_view keyword) {
    const Open o = open();
    if (at_contextual(keyword)) {
      take();
    } else {
      expect(keyword);
    }
    Node n;
    n.kind = kind;
    const Open lo = open();
    Node list;
    list.kind = "type_list";
    add(list, type());
    while (accept(",")) add(list, type());
    add(n, finish(std::move(list), lo));
    return finish(std::move(n), o);
  }

  Node class_body(const char* kind) {
    const Open o = open();
    Node n;
    n.kind = kind;
    expect("{");
    members_until_brace(n);
    expect("}");
    return finish(std::move(n), o);
  }

  void members_until_brace(Node& parent) {
    while (!at("}") && !at_end()) {
      if (accept(";")) continue;
      const std::size_t start = pos_;
      try {
        add(parent, member());
      } catch (const ParseError&) {
        rewind(start);
        add(parent, recover_member(start));
      }
    }
  }

  Node enum_body() {
    const Open o = open();
    Node n;
    n.kind = "enum_body";
    expect("{");
    while (!at("}") && !at(";")) {
      const Open co = open();
      Node constant;
      constant.kind = "enum_constant";
      Node mods;
      if (modifiers(mods)) add(constant, std::move(mods));
      add(constant, leaf("identifier", expect_identifier()), "name");
      if (at("(")) add(constant, argument_list(), "arguments");
      if (at("{")) add(constant, class_body("class_body"), "body");
      add(n, finish(std::move(constant), co));
      if (!accept(",")) break;
    }
    if (accept(";")) {
      const Open bo = open();
      Node decls;
      decls.kind = "enum_body_declarations";
      members_until_brace(decls);
      add(n, finish(std::move(decls), bo));
    }
    expect("}");
    return finish(std::move(n), o);
  }

  Node type_parameters() {
    const Open o = open();
    Node n;
    n.kind = "type_parameters";
    expect("<");
    do {
      const Open po = open();
      Node p;
      p.kind = "type_parameter";
      while (at("@")) add(p, annotation());
      add(p, leaf("type_identifier", expect_identifier()));
      if (at("extends")) {
        const Open bo = open();
        take();
        Node bound;
        bound.kind = "type_bound";
        add(bound, type());
        while (accept("&")) add(bound, type());
        add(p, finish(std::move(bound), bo));
      }
      add(n, finish(std::move(p), po));
    } while (accept(","));
    expect(">");
    return finish(std::move(n), o);
  }

  Node throws_clause() {
    const Open o = open();
    expect("throws");
    Node n;
    n.kind = "throws";
    add(n, type());
    while (accept(",")) add(n, type());
    return finish(std::move(n), o);
  }

  Node formal_parameters() {
    const Open o = open();
    Node n;
    n.kind = "formal_parameters";
    expect("(");
    if (!at(")")) {
      do {
        add(n, formal_parameter());
      } while (accept(","));
    }
    expect(")");
    return finish(std::move(n), o);
  }

  Node formal_parameter() {
    const Open o = open();
    Node n;
    n.kind = "formal_parameter";
    Node mods;
    if (modifiers(mods)) add(n, std::move(mods));
    add(n, type(), "type");
    if (accept("...")) n.kind = "spread_parameter";
    if (at("this")) {
      n.kind = "receiver_parameter";
      add(n, take_leaf("this"));
      return finish(std::move(n), o);
    }
    add(n, leaf("identifier", expect_identifier()), "name");
    if (at("[")) add(n, dimensions());
    return finish(std::move(n), o);
  }

  // ------------------------------------------------------------------ types

  Node dimensions() {
    const Open o = open();
    while (at("[") && at("]", 1)) {
      take();
      take();
    }
    return make("dimensions", o);
  }

  Node type_arguments() {
    const Open o = open();
    Node n;
    n.kind = "type_arguments";
    expect("<");
    if (!at(">")) {
      do {
        if (at("?")) {
          const Open wo = open();
          Node w;
          w.kind = "wildcard";
          take();
          if (accept("extends") || accept("super")) add(w, type());
          add(n, finish(std::move(w), wo));
        } else {
          add(n, type());
        }
      } while (accept(","));
    }
    expect(">");
    return finish(std::move(n), o);
  }

  Node class_type() {
    const Open o = open();
    Node current = leaf("type_identifier", expect_identifier());
    if (at("<")) {
      Node g;
      g.kind = "generic_type";
      add(g, std::move(current));
      add(g, type_arguments());
      current = finish(std::move(g), o);
    }
    while (at(".") && at_identifier(1)) {
      take();
      Node scoped;
      scoped.kind = "scoped_type_identifier";
      add(scoped, std::move(current));
      add(scoped, take_leaf("type_identifier"));
      current = finish(std::move(scoped), o);
      if (at("<")) {
        Node g;
        g.kind = "generic_type";
        add(g, std::move(current));
        add(g, type_arguments());
        current = finish(std::move(g), o);
      }
    }
    return current;
  }

  Node unannotated_type() {
    if (peek().kind == TokenKind::kKeyword && primitive_types().count(peek().text)) {
      return take_leaf(primitive_kind(peek().text));
    }
    return class_type();
  }

  Node type() {
    const Open o = open();
    Node annotations;
    bool annotated = false;
    if (at("@")) {
      annotated = true;
      annotations.kind = "annotated_type";
      while (at("@")) add(annotations, annotation());
    }
    Node base = unannotated_type();
    if (at("[") && at("]", 1)) {
      Node arr;
      arr.kind = "array_type";
      add(arr, std::move(base), "element");
      add(arr, dimensions(), "dimensions");
      base = finish(std::move(arr), o);
    }
    if (!annotated) return base;
    add(annotations, std::move(base));
    return finish(std::move(annotations), o);
  }

  // ------------------------------------------------------------- statements

  Node block() {
    const Open o = open();
    Node n;
    n.kind = "block";
    expect("{");
    while (!at("}") && !at_end()) {
      if (accept(";")) continue;
      const std::size_t start = pos_;
      try {
        add(n, statement());
      } catch (const ParseError&) {
        rewind(start);
        skip_construct();
        if (pos_ == start) take();
        add(n, error_node(start));
      }
    }
    expect("}");
    return finish(std::move(n), o);
  }

  Node parenthesized() {
    const Open o = open();
    Node n;
    n.kind = "parenthesized_expression";
    expect("(");
    add(n, expression());
    expect(")");
    return finish(std::move(n), o);
  }

  Node statement() {
    const Open o = open();
    if (at("{")) return block();
    if (at(";")) {
      take();
      return make("empty_statement", o);
    }
    if (at("if")) {
      take();
      Node n;
      n.kind = "if_statement";
      add(n, parenthesized(), "condition");
      add(n, statement(), "consequence");
      if (accept("else")) add(n, statement(), "alternative");
      return finish(std::move(n), o);
    }
    if (at("while")) {
      take();
      Node n;
      n.kind = "while_statement";
      add(n, parenthesized(), "condition");
      add(n, statement(), "body");
      return finish(std::move(n), o);
    }
    if (at("do")) {
      take();
      Node n;
      n.kind = "do_statement";
      add(n, statement(), "body");
      expect("while");
      add(n, parenthesized(), "condition");
      expect(";");
      return finish(std::move(n), o);
    }
    if (at("for")) return for_statement();
    if (at("return")) {
      take();
      Node n;
      n.kind = "return_statement";
      if (!at(";")) add(n, expression());
      expect(";");
      return finish(std::move(n), o);
    }
    if (at("break") || at("continue")) {
      const bool is_break = at("break");
      take();
      Node n;
      n.kind = is_break ? "break_statement" : "continue_statement";
      if (at_identifier()) add(n, take_leaf("identifier"));
      expect(";");
      return finish(std::move(n), o);
    }
    if (at("throw")) {
      take();
      Node n;
      n.kind = "throw_statement";
      add(n, expression());
      expect(";");
      return finish(std::move(n), o);
    }
    if (at("try")) return try_statement();
    if (at("switch")) {
      Node n = switch_construct();
      accept(";");
      return n;
    }
    if (at("synchronized") && at("(", 1)) {
      take();
      Node n;
      n.kind = "synchronized_statement";
      add(n, parenthesized());
      add(n, block(), "body");
      return finish(std::move(n), o);
    }
    if (at("assert")) {
      take();
      Node n;
      n.kind = "assert_statement";
      add(n, expression());
      if (accept(":")) add(n, expression());
      expect(";");
      return finish(std::move(n), o);
    }
    if (at_contextual("yield") && !at("=", 1) && !at(".", 1) && !at("[", 1) && !at("(", 1) &&
        !at("++", 1) && !at("--", 1) && !assignment_operators().count(peek(1).text)) {
      take();
      Node n;
      n.kind = "yield_statement";
      add(n, expression());
      expect(";");
      return finish(std::move(n), o);
    }
    if (at_identifier() && at(":", 1)) {
      Node n;
      n.kind = "labeled_statement";
      add(n, take_leaf("identifier"));
      take();
      add(n, statement());
      return finish(std::move(n), o);
    }
    if ((at("this") || at("super")) && at("(", 1)) {
      Node n;
      n.kind = "explicit_constructor_invocation";
      add(n, take_leaf(peek().text), "constructor");
      add(n, argument_list(), "arguments");
      expect(";");
      return finish(std::move(n), o);
    }
    {
      // Local classes, possibly behind modifiers.
      const std::size_t after_mods = skip_modifiers_at(pos_);
      if (after_mods != npos) {
        const Token& t = tok(after_mods);
        if (is_text(t, "class") || is_text(t, "interface") || is_text(t, "enum") ||
            (t.kind == TokenKind::kIdentifier && t.text == "record" &&
             tok(after_mods + 1).kind == TokenKind::kIdentifier && is_text(tok(after_mods + 2), "("))) {
          return member();
        }
      }
    }
    if (looks_like_local_declaration()) {
      Node n = local_variable_declaration();
      expect(";");
      n.end = last_end_;
      return n;
    }
    Node n;
    n.kind = "expression_statement";
    add(n, expression());
    expect(";");
    return finish(std::move(n), o);
  }

  Node local_variable_declaration() {
    const Open o = open();
    Node n;
    n.kind = "local_variable_declaration";
    Node mods;
    if (modifiers(mods)) add(n, std::move(mods));
    add(n, type(), "type");
    add(n, variable_declarator(), "declarator");
    while (accept(",")) add(n, variable_declarator(), "declarator");
    return finish(std::move(n), o);
  }

  Node variable_declarator() {
    const Open o = open();
    Node n;
    n.kind = "variable_declarator";
    add(n, leaf("identifier", expect_identifier()), "name");
    if (at("[")) add(n, dimensions());
    if (accept("=")) add(n, at("{") ? array_initializer() : expression(), "value");
    return finish(std::move(n), o);
  }

  Node array_initializer() {
    const Open o = open();
    Node n;
    n.kind = "array_initializer";
    expect("{");
    while (!at("}")) {
      add(n, at("{") ? array_initializer() : expression());
      if (!accept(",")) break;
    }
    expect("}");
    return finish(std::move(n), o);
  }

  Node for_statement() {
    const Open o = open();
    expect("for");
    expect("(");
    // Enhanced for: [modifiers] Type name ':'
    {
      std::size_t i = skip_modifiers_at(pos_);
      if (i != npos) i = skip_type_at(i);
      if (i != npos && tok(i).kind == TokenKind::kIdentifier && is_text(tok(i + 1), ":")) {
        Node n;
        n.kind = "enhanced_for_statement";
        Node mods;
        if (modifiers(mods)) add(n, std::move(mods));
        add(n, type(), "type");
        add(n, take_leaf("identifier"), "name");
        expect(":");
        add(n, expression(), "value");
        expect(")");
        add(n, statement(), "body");
        return finish(std::move(n), o);
      }
    }
    Node n;
    n.kind = "for_statement";
    if (!at(";")) {
      if (looks_like_local_declaration()) {
        add(n, local_variable_declaration(), "init");
      } else {
        add(n, expression(), "init");
        while (accept(",")) add(n, expression(), "init");
      }
    }
    expect(";");
    if (!at(";")) add(n, expression(), "condition");
    expect(";");
    if (!at(")")) {
      add(n, expression(), "update");
      while (accept(",")) add(n, expression(), "update");
    }
    expect(")");
    add(n, statement(), "body");
    return finish(std::move(n), o);
  }

  Node try_statement() {
    const Open o = open();
    expect("try");
    Node n;
    n.kind = "try_statement";
    if (at("(")) {
      n.kind = "try_with_resources_statement";
      const Open ro = open();
      Node spec;
      spec.kind = "resource_specification";
      take();
      while (!at(")")) {
        const Open r = open();
        Node res;
        res.kind = "resource";
        if (looks_like_local_declaration()) {
          Node mods;
          if (modifiers(mods)) add(res, std::move(mods));
          add(res, type(), "type");
          add(res, take_leaf("identifier"), "name");
          expect("=");
          add(res, expression(), "value");
        } else {
          add(res, expression());
        }
        add(spec, finish(std::move(res), r));
        if (!accept(";")) break;
      }
      expect(")");
      add(n, finish(std::move(spec), ro), "resources");
    }
    add(n, block(), "body");
    while (at("catch")) {
      const Open co = open();
      take();
      Node clause;
      clause.kind = "catch_clause";
      expect("(");
      const Open po = open();
      Node param;
      param.kind = "catch_formal_parameter";
      Node mods;
      if (modifiers(mods)) add(param, std::move(mods));
      const Open to = open();
      Node types;
      types.kind = "catch_type";
      add(types, type());
      while (accept("|")) add(types, type());
      add(param, finish(std::move(types), to));
      add(param, leaf("identifier", expect_identifier()), "name");
      add(clause, finish(std::move(param), po));
      expect(")");
      add(clause, block(), "body");
      add(n, finish(std::move(clause), co));
    }
    if (at("finally")) {
      const Open fo = open();
      take();
      Node fin;
      fin.kind = "finally_clause";
      add(fin, block());
      add(n, finish(std::move(fin), fo));
    }
    if (n.kind == "try_statement" && n.children.size() == 1) fail("try without catch or finally");
    return finish(std::move(n), o);
  }

  Node switch_construct() {
    const Open o = open();
    expect("switch");
    Node n;
    n.kind = "switch_expression";
    add(n, parenthesized(), "condition");
    const Open bo = open();
    Node body;
    body.kind = "switch_block";
    expect("{");
    while (!at("}") && !at_end()) {
      const Open go = open();
      Node label = switch_label();
      if (accept("->")) {
        Node rule;
        rule.kind = "switch_rule";
        add(rule, std::move(label));
        if (at("{")) {
          add(rule, block());
        } else if (at("throw")) {
          add(rule, statement());
        } else {
          const Open eo = open();
          Node es;
          es.kind = "expression_statement";
          add(es, expression());
          expect(";");
          add(rule, finish(std::move(es), eo));
        }
        add(body, finish(std::move(rule), go));
        continue;
      }
      expect(":");
      Node group;
      group.kind = "switch_block_statement_group";
      add(group, std::move(label));
      while ((at("case") || at("default")) && !at("->", 1)) {
        const std::size_t save = pos_;
        Node extra = switch_label();
        if (!accept(":")) {
          rewind(save);
          break;
        }
        add(group, std::move(extra));
      }
      while (!at("case") && !(at("default") && (at(":", 1) || at("->", 1))) && !at("}") &&
             !at_end()) {
        if (accept(";")) continue;
        const std::size_t start = pos_;
        try {
          add(group, statement());
        } catch (const ParseError&) {
          rewind(start);
          skip_construct();
          if (pos_ == start) take();
          add(group, error_node(start));
        }
      }
      add(body, finish(std::move(group), go));
    }
    expect("}");
    add(n, finish(std::move(body), bo), "body");
    return finish(std::move(n), o);
  }

  Node switch_label() {
    const Open o = open();
    Node n;
    n.kind = "switch_label";
    if (accept("default")) return finish(std::move(n), o);
    expect("case");
    add(n, ternary());
    while (accept(",")) add(n, ternary());
    return finish(std::move(n), o);
  }

  // ------------------------------------------------------------ expressions

  Node expression() {
    if (looks_like_lambda()) return lambda();
    const Open o = open();
    Node lhs = ternary();
    if (peek().kind == TokenKind::kOperator && assignment_operators().count(peek().text)) {
      take();
      Node n;
      n.kind = "assignment_expression";
      add(n, std::move(lhs), "left");
      add(n, expression(), "right");
      return finish(std::move(n), o);
    }
    return lhs;
  }

  Node lambda() {
    const Open o = open();
    Node n;
    n.kind = "lambda_expression";
    if (at_identifier()) {
      add(n, take_leaf("identifier"), "parameters");
    } else {
      // Either all identifiers (inferred) or full formal parameters.
      bool inferred = true;
      const std::size_t close = matching_paren(pos_);
      for (std::size_t i = pos_ + 1; i < close; ++i) {
        const Token& t = tok(i);
        if (!(t.kind == TokenKind::kIdentifier || is_text(t, ","))) {
          inferred = false;
          break;
        }
      }
      if (inferred) {
        const Open po = open();
        Node params;
        params.kind = "inferred_parameters";
        take();
        while (!at(")")) {
          add(params, take_leaf("identifier"));
          if (!accept(",")) break;
        }
        expect(")");
        add(n, finish(std::move(params), po), "parameters");
      } else {
        add(n, formal_parameters(), "parameters");
      }
    }
    expect("->");
    add(n, at("{") ? block() : expression(), "body");
    return finish(std::move(n), o);
  }

  Node ternary() {
    const Open o = open();
    Node cond = binary(1);
    if (!at("?")) return cond;
    take();
    Node n;
    n.kind = "ternary_expression";
    add(n, std::move(cond), "condition");
    add(n, looks_like_lambda() ? lambda() : expression(), "consequence");
    expect(":");
    add(n, looks_like_lambda() ? lambda() : ternary(), "alternative");
    return finish(std::move(n), o);
  }

  // Returns the binary operator at the cursor (re-joining split '>' runs)
  // with its precedence, or precedence 0.
  std::pair<std::string, int> peek_binary_operator() const {
    const Token& t = peek();
    if (t.kind == TokenKind::kKeyword && t.text == "instanceof") return {"instanceof", 7};
    if (t.kind != TokenKind::kOperator) return {"", 0};
    const std::string& s = t.text;
    if (s == ">") {
      std::size_t run = 1;
      while (run < 3 && is_text(peek(run), ">") && peek(run).begin == peek(run - 1).end) ++run;
      if (run == 2) return {">>", 8};
      if (run == 3) return {">>>", 8};
      return {">", 7};
    }
    if (s == "||") return {s, 1};
    if (s == "&&") return {s, 2};
    if (s == "|") return {s, 3};
    if (s == "^") return {s, 4};
    if (s == "&") return {s, 5};
    if (s == "==" || s == "!=") return {s, 6};
    if (s == "<" || s == "<=" || s == ">=") return {s, 7};
    if (s == "<<") return {s, 8};
    if (s == "+" || s == "-") return {s, 9};
    if (s == "*" || s == "/" || s == "%") return {s, 10};
    return {"", 0};
  }

  Node binary(int min_precedence) {
    const Open o = open();
    Node lhs = unary();
    while (true) {
      auto [op, prec] = peek_binary_operator();
      if (prec == 0 || prec < min_precedence) break;
      if (op == "instanceof") {
        take();
        Node n;
        n.kind = "instanceof_expression";
        add(n, std::move(lhs), "left");
        accept("final");
        add(n, type(), "right");
        if (at_identifier()) add(n, take_leaf("identifier"), "name");
        lhs = finish(std::move(n), o);
        continue;
      }
      const std::size_t width = op == ">>" ? 2 : op == ">>>" ? 3 : 1;
      for (std::size_t i = 0; i < width; ++i) take();
      Node n;
      n.kind = "binary_expression";
      add(n, std::move(lhs), "left");
      add(n, binary(prec + 1), "right");
      lhs = finish(std::move(n), o);
    }
    return lhs;
  }

  Node unary() {
    const Open o = open();
    if (at("+") || at("-") || at("!") || at("~")) {
      take();
      Node n;
      n.kind = "unary_expression";
      add(n, unary(), "operand");
      return finish(std::move(n), o);
    }
    if (at("++") || at("--")) {
      take();
      Node n;
      n.kind = "update_expression";
      add(n, unary());
      return finish(std::move(n), o);
    }
    if (looks_like_cast()) {
      take();
      Node n;
      n.kind = "cast_expression";
      add(n, type(), "type");
      expect(")");
      add(n, looks_like_lambda() ? lambda() : unary(), "value");
      return finish(std::move(n), o);
    }
    Node operand = postfix(primary(), o);
    while (at("++") || at("--")) {
      take();
      Node n;
      n.kind = "update_expression";
      add(n, std::move(operand));
      operand = finish(std::move(n), o);
    }
    return operand;
  }

  Node argument_list() {
    const Open o = open();
    Node n;
    n.kind = "argument_list";
    expect("(");
    while (!at(")")) {
      add(n, expression());
      if (!accept(",")) break;
    }
    expect(")");
    return finish(std::move(n), o);
  }

  Node postfix(Node current, const Open& o) {
    while (true) {
      if (at(".")) {
        take();
        if (at("<")) {
          Node targs = type_arguments();
          Node n;
          n.kind = "method_invocation";
          add(n, std::move(current), "object");
          add(n, std::move(targs), "type_arguments");
          add(n, leaf("identifier", expect_identifier()), "name");
          add(n, argument_list(), "arguments");
          current = finish(std::move(n), o);
        } else if (at_identifier()) {
          Node name = take_leaf("identifier");
          Node n;
          if (at("(")) {
            n.kind = "method_invocation";
            add(n, std::move(current), "object");
            add(n, std::move(name), "name");
            add(n, argument_list(), "arguments");
          } else {
            n.kind = "field_access";
            add(n, std::move(current), "object");
            add(n, std::move(name), "field");
          }
          current = finish(std::move(n), o);
        } else if (at("class")) {
          take();
          Node n;
          n.kind = "class_literal";
          add(n, std::move(current));
          current = finish(std::move(n), o);
        } else if (at("this") || at("super")) {
          Node kw = take_leaf(peek().text);
          Node n;
          if (at("(")) {
            n.kind = "explicit_constructor_invocation";
            add(n, std::move(current), "object");
            add(n, std::move(kw), "constructor");
            add(n, argument_list(), "arguments");
          } else {
            n.kind = "field_access";
            add(n, std::move(current), "object");
            add(n, std::move(kw), "field");
          }
          current = finish(std::move(n), o);
        } else if (at("new")) {
          Node creation = creation_expression();
          Node n;
          n.kind = creation.kind;
          add(n, std::move(current), "outer");
          for (Node& c : creation.children) add(n, std::move(c));
          current = finish(std::move(n), o);
        } else {
          fail("expected member name after '.'");
        }
      } else if (at("[")) {
        take();
        Node n;
        n.kind = "array_access";
        add(n, std::move(current), "array");
        add(n, expression(), "index");
        expect("]");
        current = finish(std::move(n), o);
      } else if (at("::")) {
        take();
        Node n;
        n.kind = "method_reference";
        add(n, std::move(current));
        if (at("new")) {
          take();
        } else {
          add(n, leaf("identifier", expect_identifier()));
        }
        current = finish(std::move(n), o);
      } else {
        return current;
      }
    }
  }

  Node creation_expression() {
    const Open o = open();
    expect("new");
    Node targs;
    const bool has_targs = at("<");
    if (has_targs) targs = type_arguments();
    Node base;
    {
      Node annotated;
      bool has_annotations = false;
      annotated.kind = "annotated_type";
      while (at("@")) {
        has_annotations = true;
        add(annotated, annotation());
      }
      base = unannotated_type();
      if (has_annotations) {
        add(annotated, std::move(base));
        base = finish(std::move(annotated), o);
      }
    }
    if (at("[")) {
      Node n;
      n.kind = "array_creation_expression";
      add(n, std::move(base), "type");
      while (at("[") && !at("]", 1)) {
        const Open d = open();
        take();
        Node dim;
        dim.kind = "dimensions_expr";
        add(dim, expression());
        expect("]");
        add(n, finish(std::move(dim), d));
      }
      if (at("[")) add(n, dimensions(), "dimensions");
      if (at("{")) add(n, array_initializer(), "value");
      return finish(std::move(n), o);
    }
    Node n;
    n.kind = "object_creation_expression";
    if (has_targs) add(n, std::move(targs), "type_arguments");
    add(n, std::move(base), "type");
    add(n, argument_list(), "arguments");
    if (at("{")) add(n, class_body("class_body"));
    return finish(std::move(n), o);
  }

  Node primary() {
    const Open o = open();
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kNumber:
        return take_leaf(number_kind(t.text));
      case TokenKind::kString:
        return take_leaf(t.text.starts_with("\"\"\"") ? "text_block" : "string_literal");
      case TokenKind::kCharacter:
        return take_leaf("character_literal");
      case TokenKind::kIdentifier: {
        Node name = take_leaf("identifier");
        if (!at("(")) return name;
        Node n;
        n.kind = "method_invocation";
        add(n, std::move(name), "name");
        add(n, argument_list(), "arguments");
        return finish(std::move(n), o);
      }
      case TokenKind::kKeyword:
        if (t.text == "true" || t.text == "false") return take_leaf(t.text);
        if (t.text == "null") return take_leaf("null_literal");
        if (t.text == "this" || t.text == "super") return take_leaf(t.text);
        if (t.text == "new") return creation_expression();
        if (t.text == "switch") return switch_construct();
        if (primitive_types().count(t.text)) {
          // int.class, int[].class, int[]::new
          Node ty = type();
          if (at("::")) return ty;
          expect(".");
          expect("class");
          Node n;
          n.kind = "class_literal";
          add(n, std::move(ty));
          return finish(std::move(n), o);
        }
        break;
      case TokenKind::kOperator:
        if (t.text == "(") return parenthesized();
        break;
      default:
        break;
    }
    fail("expected expression");
  }
};

}  // namespace

SyntaxTree parse_java_file(std::string_view source, std::vector<Token> tokens) {
  JavaParser parser(source, std::move(tokens));
  SyntaxTree tree;
  tree.language = Language::kJava;
  tree.root = parser.compilation_unit();
  tree.has_error = parser.had_error();
  return tree;
}

SyntaxTree parse_java_member(std::string_view source, std::vector<Token> tokens) {
  JavaParser parser(source, std::move(tokens));
  SyntaxTree tree;
  tree.language = Language::kJava;
  tree.root = parser.standalone_member();
  tree.has_error = parser.had_error();
  return tree;
}

}  // namespace codeseq::detail
