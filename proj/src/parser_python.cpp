#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "parser_base.hpp"
#include "parsers.hpp"

namespace codeseq::detail {
namespace {

std::string number_kind(const std::string& text) {
  const bool hex = text.size() > 1 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
  if (text.back() == 'j' || text.back() == 'J') return "float";
  if (text.find('.') != std::string::npos) return "float";
  if (!hex && text.find_first_of("eE") != std::string::npos) return "float";
  return "integer";
}

class PythonParser : public ParserBase {
 public:
  PythonParser(std::string_view source, std::vector<Token> tokens)
      : ParserBase(std::move(tokens), source) {}

  Node module() {
    const Open o = open();
    Node n;
    n.kind = "module";
    while (!at_end()) {
      if (at_kind(TokenKind::kNewline) || at_kind(TokenKind::kIndent) ||
          at_kind(TokenKind::kDedent)) {
        // Stray layout at top level only appears after recovery.
        take();
        continue;
      }
      statements_into(n);
    }
    return finish(std::move(n), o);
  }

  Node single_function() {
    Node m = module();
    std::vector<Node*> defs;
    for (Node& c : m.children) defs.push_back(&c);
    if (defs.size() != 1 || !(defs[0]->kind == "function_definition" ||
                              (defs[0]->kind == "decorated_definition" &&
                               defs[0]->first_of_kind("function_definition") != nullptr &&
                               defs[0]->children.back().kind == "function_definition"))) {
      throw ParseError("expected exactly one function definition", m.begin, 1, 1);
    }
    return std::move(*defs[0]);
  }

 private:
  bool at_newline() const { return at_kind(TokenKind::kNewline) || at_end(); }

  // Parses one statement (or one line of simple statements) into parent,
  // recovering from errors at line granularity.
  void statements_into(Node& parent) {
    const std::size_t start = pos_;
    try {
      if (at_compound_start()) {
        add(parent, compound_statement());
      } else {
        simple_statements(parent);
      }
    } catch (const ParseError&) {
      // Drop partial output of the failed line.
      while (!parent.children.empty() && parent.children.back().begin >= tok(start).begin &&
             !parent.children.back().error) {
        parent.children.pop_back();
      }
      rewind(start);
      skip_logical_line();
      if (pos_ == start) take();
      add(parent, error_node(start));
    }
  }

  void skip_logical_line() {
    while (!at_end() && !at_kind(TokenKind::kNewline)) {
      if (at_kind(TokenKind::kDedent)) return;
      take();
    }
    if (at_kind(TokenKind::kNewline)) take();
    if (at_kind(TokenKind::kIndent)) {
      int depth = 0;
      while (!at_end()) {
        if (at_kind(TokenKind::kIndent)) ++depth;
        if (at_kind(TokenKind::kDedent) && --depth == 0) {
          take();
          return;
        }
        take();
      }
    }
  }

  bool at_compound_start() const {
    if (at("def") || at("class") || at("if") || at("while") || at("for") || at("try") ||
        at("with") || at("@")) {
      return true;
    }
    return at("async") && (at("def", 1) || at("for", 1) || at("with", 1));
  }

  Node block() {
    const Open o = open();
    Node n;
    n.kind = "block";
    if (at_kind(TokenKind::kNewline)) {
      take();
      if (!at_kind(TokenKind::kIndent)) fail("expected an indented block");
      take();
      while (!at_kind(TokenKind::kDedent) && !at_end()) statements_into(n);
      if (at_kind(TokenKind::kDedent)) take();
    } else {
      simple_statements(n);
    }
    if (n.children.empty()) fail("empty block");
    return finish(std::move(n), o);
  }

  // ------------------------------------------------------ simple statements

  void simple_statements(Node& parent) {
    add(parent, small_statement());
    while (accept(";")) {
      if (at_newline()) break;
      add(parent, small_statement());
    }
    if (!at_newline()) fail("expected end of statement");
    if (at_kind(TokenKind::kNewline)) take();
  }

  Node small_statement() {
    const Open o = open();
    if (at("pass")) {
      take();
      return make("pass_statement", o);
    }
    if (at("break")) {
      take();
      return make("break_statement", o);
    }
    if (at("continue")) {
      take();
      return make("continue_statement", o);
    }
    if (at("return")) {
      take();
      Node n;
      n.kind = "return_statement";
      if (!at_newline() && !at(";")) add(n, star_expressions());
      return finish(std::move(n), o);
    }
    if (at("raise")) {
      take();
      Node n;
      n.kind = "raise_statement";
      if (!at_newline() && !at(";")) {
        add(n, expression());
        if (accept("from")) add(n, expression(), "cause");
      }
      return finish(std::move(n), o);
    }
    if (at("global") || at("nonlocal")) {
      Node n;
      n.kind = at("global") ? "global_statement" : "nonlocal_statement";
      take();
      add(n, leaf("identifier", expect_identifier()));
      while (accept(",")) add(n, leaf("identifier", expect_identifier()));
      return finish(std::move(n), o);
    }
    if (at("del")) {
      take();
      Node n;
      n.kind = "delete_statement";
      add(n, star_expressions());
      return finish(std::move(n), o);
    }
    if (at("assert")) {
      take();
      Node n;
      n.kind = "assert_statement";
      add(n, expression());
      if (accept(",")) add(n, expression());
      return finish(std::move(n), o);
    }
    if (at("import")) {
      take();
      Node n;
      n.kind = "import_statement";
      do {
        add(n, import_name(true));
      } while (accept(","));
      return finish(std::move(n), o);
    }
    if (at("from")) return import_from();
    return expression_statement();
  }

  Node dotted_name() {
    const Open o = open();
    Node n;
    n.kind = "dotted_name";
    add(n, leaf("identifier", expect_identifier()));
    while (at(".") && at_identifier(1)) {
      take();
      add(n, take_leaf("identifier"));
    }
    return finish(std::move(n), o);
  }

  Node import_name(bool dotted) {
    const Open o = open();
    Node name = dotted ? dotted_name() : leaf("identifier", expect_identifier());
    if (!accept("as")) return name;
    Node n;
    n.kind = "aliased_import";
    add(n, std::move(name), "name");
    add(n, leaf("identifier", expect_identifier()), "alias");
    return finish(std::move(n), o);
  }

  Node import_from() {
    const Open o = open();
    expect("from");
    Node n;
    n.kind = "import_from_statement";
    const Open mo = open();
    bool relative = false;
    while (at(".") || at("...")) {
      take();
      relative = true;
    }
    if (relative) {
      Node rel;
      rel.kind = "relative_import";
      if (at_identifier()) add(rel, dotted_name());
      add(n, finish(std::move(rel), mo), "module_name");
    } else {
      add(n, dotted_name(), "module_name");
    }
    expect("import");
    if (at("*")) {
      add(n, take_leaf("wildcard_import"));
    } else {
      const bool paren = accept("(");
      do {
        if (paren && at(")")) break;
        add(n, import_name(false));
      } while (accept(","));
      if (paren) expect(")");
    }
    return finish(std::move(n), o);
  }

  bool at_augmented_assignment() const {
    static const char* ops[] = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                ">>=", "<<=", "&=", "^=", "|=", "@="};
    for (const char* op : ops) {
      if (at(op)) return true;
    }
    return false;
  }

  Node assignment_value() {
    if (at("yield")) return yield_expression();
    return star_expressions();
  }

  Node expression_statement() {
    const Open o = open();
    Node first = at("yield") ? yield_expression() : star_expressions();
    Node n;
    n.kind = "expression_statement";
    if (at(":")) {
      take();
      Node a;
      a.kind = "assignment";
      add(a, std::move(first), "left");
      add(a, type_node(), "type");
      if (accept("=")) add(a, assignment_value(), "right");
      add(n, finish(std::move(a), o));
    } else if (at_augmented_assignment()) {
      take();
      Node a;
      a.kind = "augmented_assignment";
      add(a, std::move(first), "left");
      add(a, assignment_value(), "right");
      add(n, finish(std::move(a), o));
    } else if (at("=")) {
      add(n, assignment_chain(std::move(first), o));
    } else {
      add(n, std::move(first));
    }
    return finish(std::move(n), o);
  }

  Node assignment_chain(Node left, const Open& o) {
    expect("=");
    const Open ro = open();
    Node right = assignment_value();
    Node a;
    a.kind = "assignment";
    add(a, std::move(left), "left");
    if (at("=")) {
      add(a, assignment_chain(std::move(right), ro), "right");
    } else {
      add(a, std::move(right), "right");
    }
    return finish(std::move(a), o);
  }

  Node type_node() {
    const Open o = open();
    Node t;
    t.kind = "type";
    add(t, expression());
    return finish(std::move(t), o);
  }

  // ---------------------------------------------------- compound statements

  Node compound_statement() {
    if (at("@")) return decorated();
    if (at("def")) return function_definition();
    if (at("class")) return class_definition();
    if (at("if")) return if_statement();
    if (at("while")) return while_statement();
    if (at("for")) return for_statement();
    if (at("try")) return try_statement();
    if (at("with")) return with_statement();
    if (at("async")) {
      const Open o = open();
      take();
      Node n = at("def") ? function_definition() : at("for") ? for_statement() : with_statement();
      n.begin = o.begin;
      return n;
    }
    fail("expected compound statement");
  }

  Node decorated() {
    const Open o = open();
    Node n;
    n.kind = "decorated_definition";
    while (at("@")) {
      const Open d = open();
      take();
      Node dec;
      dec.kind = "decorator";
      add(dec, named_expression());
      if (!at_kind(TokenKind::kNewline)) fail("expected newline after decorator");
      add(n, finish(std::move(dec), d));
      take();
    }
    if (at("class")) {
      add(n, class_definition(), "definition");
    } else {
      const Open fo = open();
      const bool is_async = accept("async");
      Node def = function_definition();
      if (is_async) def.begin = fo.begin;
      add(n, std::move(def), "definition");
    }
    return finish(std::move(n), o);
  }

  Node function_definition() {
    const Open o = open();
    expect("def");
    Node n;
    n.kind = "function_definition";
    add(n, leaf("identifier", expect_identifier()), "name");
    add(n, parameters(), "parameters");
    if (accept("->")) add(n, type_node(), "return_type");
    expect(":");
    add(n, block(), "body");
    return finish(std::move(n), o);
  }

  Node parameters() {
    const Open o = open();
    Node n;
    n.kind = "parameters";
    expect("(");
    while (!at(")")) {
      add(n, parameter(true));
      if (!accept(",")) break;
    }
    expect(")");
    return finish(std::move(n), o);
  }

  Node parameter(bool annotations) {
    const Open o = open();
    if (at("/")) {
      take();
      return make("positional_separator", o);
    }
    if (at("*") && (at(",", 1) || at(")", 1) || at(":", 1))) {
      take();
      return make("keyword_separator", o);
    }
    if (at("*") || at("**")) {
      const bool dict = at("**");
      take();
      Node splat;
      splat.kind = dict ? "dictionary_splat_pattern" : "list_splat_pattern";
      add(splat, leaf("identifier", expect_identifier()));
      splat = finish(std::move(splat), o);
      if (annotations && accept(":")) {
        Node typed;
        typed.kind = "typed_parameter";
        add(typed, std::move(splat));
        add(typed, type_node(), "type");
        return finish(std::move(typed), o);
      }
      return splat;
    }
    Node name = leaf("identifier", expect_identifier());
    Node type;
    const bool typed = annotations && accept(":");
    if (typed) type = type_node();
    if (accept("=")) {
      Node n;
      n.kind = typed ? "typed_default_parameter" : "default_parameter";
      add(n, std::move(name), "name");
      if (typed) add(n, std::move(type), "type");
      add(n, expression(), "value");
      return finish(std::move(n), o);
    }
    if (typed) {
      Node n;
      n.kind = "typed_parameter";
      add(n, std::move(name));
      add(n, std::move(type), "type");
      return finish(std::move(n), o);
    }
    return name;
  }

  Node class_definition() {
    const Open o = open();
    expect("class");
    Node n;
    n.kind = "class_definition";
    add(n, leaf("identifier", expect_identifier()), "name");
    if (at("(")) add(n, argument_list(), "superclasses");
    expect(":");
    add(n, block(), "body");
    return finish(std::move(n), o);
  }

  Node else_clause() {
    const Open o = open();
    expect("else");
    expect(":");
    Node n;
    n.kind = "else_clause";
    add(n, block(), "body");
    return finish(std::move(n), o);
  }

  Node if_statement() {
    const Open o = open();
    expect("if");
    Node n;
    n.kind = "if_statement";
    add(n, named_expression(), "condition");
    expect(":");
    add(n, block(), "consequence");
    while (at("elif")) {
      const Open eo = open();
      take();
      Node e;
      e.kind = "elif_clause";
      add(e, named_expression(), "condition");
      expect(":");
      add(e, block(), "consequence");
      add(n, finish(std::move(e), eo), "alternative");
    }
    if (at("else")) add(n, else_clause(), "alternative");
    return finish(std::move(n), o);
  }

  Node while_statement() {
    const Open o = open();
    expect("while");
    Node n;
    n.kind = "while_statement";
    add(n, named_expression(), "condition");
    expect(":");
    add(n, block(), "body");
    if (at("else")) add(n, else_clause(), "alternative");
    return finish(std::move(n), o);
  }

  Node for_statement() {
    const Open o = open();
    expect("for");
    Node n;
    n.kind = "for_statement";
    add(n, target_list(), "left");
    expect("in");
    add(n, star_expressions(), "right");
    expect(":");
    add(n, block(), "body");
    if (at("else")) add(n, else_clause(), "alternative");
    return finish(std::move(n), o);
  }

  Node try_statement() {
    const Open o = open();
    expect("try");
    expect(":");
    Node n;
    n.kind = "try_statement";
    add(n, block(), "body");
    bool handlers = false;
    while (at("except")) {
      handlers = true;
      const Open eo = open();
      take();
      accept("*");
      Node e;
      e.kind = "except_clause";
      if (!at(":")) {
        add(e, expression());
        if (accept("as") || accept(",")) add(e, leaf("identifier", expect_identifier()));
      }
      expect(":");
      add(e, block());
      add(n, finish(std::move(e), eo));
    }
    if (at("else")) add(n, else_clause());
    if (at("finally")) {
      handlers = true;
      const Open fo = open();
      take();
      expect(":");
      Node f;
      f.kind = "finally_clause";
      add(f, block());
      add(n, finish(std::move(f), fo));
    }
    if (!handlers) fail("try without except or finally");
    return finish(std::move(n), o);
  }

  Node with_item() {
    const Open o = open();
    Node n;
    n.kind = "with_item";
    add(n, expression(), "value");
    if (accept("as")) add(n, bit_or(), "alias");
    return finish(std::move(n), o);
  }

  Node with_statement() {
    const Open o = open();
    expect("with");
    Node n;
    n.kind = "with_statement";
    const Open co = open();
    Node clause;
    clause.kind = "with_clause";
    bool parsed = false;
    if (at("(")) {
      const std::size_t save = pos_;
      try {
        take();
        do {
          if (at(")")) break;
          add(clause, with_item());
        } while (accept(","));
        expect(")");
        if (!at(":")) fail("expected ':'");
        parsed = true;
      } catch (const ParseError&) {
        rewind(save);
        clause.children.clear();
      }
    }
    if (!parsed) {
      do {
        add(clause, with_item());
      } while (accept(","));
    }
    add(n, finish(std::move(clause), co));
    expect(":");
    add(n, block(), "body");
    return finish(std::move(n), o);
  }

  // ------------------------------------------------------------ expressions

  Node star_expressions() {
    const Open o = open();
    Node first = star_expression();
    if (!at(",")) return first;
    Node n;
    n.kind = "expression_list";
    add(n, std::move(first));
    while (accept(",")) {
      if (!starts_expression()) break;
      add(n, star_expression());
    }
    return finish(std::move(n), o);
  }

  bool starts_expression() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kIdentifier:
      case TokenKind::kNumber:
      case TokenKind::kString:
        return true;
      case TokenKind::kKeyword:
        return t.text == "not" || t.text == "lambda" || t.text == "await" || t.text == "None" ||
               t.text == "True" || t.text == "False" || t.text == "yield";
      case TokenKind::kOperator:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "*" || t.text == "**" ||
               t.text == "...";
      default:
        return false;
    }
  }

  Node star_expression() {
    const Open o = open();
    if (at("*")) {
      take();
      Node n;
      n.kind = "list_splat";
      add(n, bit_or());
      return finish(std::move(n), o);
    }
    return named_expression();
  }

  Node named_expression() {
    const Open o = open();
    if (at_identifier() && at(":=", 1)) {
      Node n;
      n.kind = "named_expression";
      add(n, take_leaf("identifier"), "name");
      take();
      add(n, expression(), "value");
      return finish(std::move(n), o);
    }
    return expression();
  }

  Node yield_expression() {
    const Open o = open();
    expect("yield");
    Node n;
    n.kind = "yield";
    if (accept("from")) {
      add(n, expression());
    } else if (starts_expression()) {
      add(n, star_expressions());
    }
    return finish(std::move(n), o);
  }

  Node expression() {
    if (at("lambda")) return lambda();
    const Open o = open();
    Node body = disjunction();
    if (!at("if")) return body;
    take();
    Node n;
    n.kind = "conditional_expression";
    add(n, std::move(body));
    add(n, disjunction());
    expect("else");
    add(n, expression());
    return finish(std::move(n), o);
  }

  Node lambda() {
    const Open o = open();
    expect("lambda");
    Node n;
    n.kind = "lambda";
    if (!at(":")) {
      const Open po = open();
      Node params;
      params.kind = "lambda_parameters";
      while (!at(":")) {
        add(params, parameter(false));
        if (!accept(",")) break;
      }
      add(n, finish(std::move(params), po), "parameters");
    }
    expect(":");
    add(n, expression(), "body");
    return finish(std::move(n), o);
  }

  Node disjunction() {
    const Open o = open();
    Node lhs = conjunction();
    while (at("or")) {
      take();
      Node n;
      n.kind = "boolean_operator";
      add(n, std::move(lhs), "left");
      add(n, conjunction(), "right");
      lhs = finish(std::move(n), o);
    }
    return lhs;
  }

  Node conjunction() {
    const Open o = open();
    Node lhs = inversion();
    while (at("and")) {
      take();
      Node n;
      n.kind = "boolean_operator";
      add(n, std::move(lhs), "left");
      add(n, inversion(), "right");
      lhs = finish(std::move(n), o);
    }
    return lhs;
  }

  Node inversion() {
    const Open o = open();
    if (at("not")) {
      take();
      Node n;
      n.kind = "not_operator";
      add(n, inversion(), "argument");
      return finish(std::move(n), o);
    }
    return comparison();
  }

  bool accept_comparison_operator() {
    if (at("<") || at(">") || at("==") || at(">=") || at("<=") || at("!=") || at("in")) {
      take();
      return true;
    }
    if (at("not") && at("in", 1)) {
      take();
      take();
      return true;
    }
    if (at("is")) {
      take();
      accept("not");
      return true;
    }
    return false;
  }

  Node comparison() {
    const Open o = open();
    Node first = bit_or();
    if (!accept_comparison_operator()) return first;
    Node n;
    n.kind = "comparison_operator";
    add(n, std::move(first));
    add(n, bit_or());
    while (accept_comparison_operator()) add(n, bit_or());
    return finish(std::move(n), o);
  }

  template <typename Next>
  Node binary_level(std::initializer_list<std::string_view> ops, Next next) {
    const Open o = open();
    Node lhs = (this->*next)();
    while (true) {
      bool matched = false;
      for (std::string_view op : ops) {
        if (at(op)) {
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
      take();
      Node n;
      n.kind = "binary_operator";
      add(n, std::move(lhs), "left");
      add(n, (this->*next)(), "right");
      lhs = finish(std::move(n), o);
    }
  }

  Node bit_or() { return binary_level({"|"}, &PythonParser::bit_xor); }
  Node bit_xor() { return binary_level({"^"}, &PythonParser::bit_and); }
  Node bit_and() { return binary_level({"&"}, &PythonParser::shift); }
  Node shift() { return binary_level({"<<", ">>"}, &PythonParser::arith); }
  Node arith() { return binary_level({"+", "-"}, &PythonParser::term); }
  Node term() { return binary_level({"*", "/", "//", "%", "@"}, &PythonParser::factor); }

  Node factor() {
    const Open o = open();
    if (at("+") || at("-") || at("~")) {
      take();
      Node n;
      n.kind = "unary_operator";
      add(n, factor(), "argument");
      return finish(std::move(n), o);
    }
    return power();
  }

  Node power() {
    const Open o = open();
    Node base = await_primary();
    if (!at("**")) return base;
    take();
    Node n;
    n.kind = "binary_operator";
    add(n, std::move(base), "left");
    add(n, factor(), "right");
    return finish(std::move(n), o);
  }

  Node await_primary() {
    const Open o = open();
    if (at("await")) {
      take();
      Node n;
      n.kind = "await";
      add(n, primary());
      return finish(std::move(n), o);
    }
    return primary();
  }

  Node primary() {
    const Open o = open();
    Node current = atom();
    while (true) {
      if (at(".")) {
        take();
        Node n;
        n.kind = "attribute";
        add(n, std::move(current), "object");
        add(n, leaf("identifier", expect_identifier()), "attribute");
        current = finish(std::move(n), o);
      } else if (at("(")) {
        Node n;
        n.kind = "call";
        add(n, std::move(current), "function");
        add(n, call_arguments(), "arguments");
        current = finish(std::move(n), o);
      } else if (at("[")) {
        take();
        Node n;
        n.kind = "subscript";
        add(n, std::move(current), "value");
        do {
          if (at("]")) break;
          add(n, slice_item(), "subscript");
        } while (accept(","));
        expect("]");
        current = finish(std::move(n), o);
      } else {
        return current;
      }
    }
  }

  Node slice_item() {
    const Open o = open();
    Node lower;
    bool has_lower = false;
    if (!at(":")) {
      lower = star_expression();
      has_lower = true;
      if (!at(":")) return lower;
    }
    Node n;
    n.kind = "slice";
    if (has_lower) add(n, std::move(lower));
    expect(":");
    if (!at(":") && !at("]") && !at(",")) add(n, expression());
    if (accept(":")) {
      if (!at("]") && !at(",")) add(n, expression());
    }
    return finish(std::move(n), o);
  }

  Node argument() {
    const Open o = open();
    if (at("*") || at("**")) {
      const bool dict = at("**");
      take();
      Node n;
      n.kind = dict ? "dictionary_splat" : "list_splat";
      add(n, expression());
      return finish(std::move(n), o);
    }
    if (at_identifier() && at("=", 1)) {
      Node n;
      n.kind = "keyword_argument";
      add(n, take_leaf("identifier"), "name");
      take();
      add(n, expression(), "value");
      return finish(std::move(n), o);
    }
    return named_expression();
  }

  Node argument_list() {
    const Open o = open();
    Node n;
    n.kind = "argument_list";
    expect("(");
    while (!at(")")) {
      add(n, argument());
      if (!accept(",")) break;
    }
    expect(")");
    return finish(std::move(n), o);
  }

  Node call_arguments() {
    const Open o = open();
    expect("(");
    Node n;
    n.kind = "argument_list";
    while (!at(")")) {
      Node arg = argument();
      if (n.children.empty() && (at("for") || (at("async") && at("for", 1)))) {
        Node gen;
        gen.kind = "generator_expression";
        add(gen, std::move(arg), "body");
        comprehension_clauses(gen);
        expect(")");
        return finish(std::move(gen), o);
      }
      add(n, std::move(arg));
      if (!accept(",")) break;
    }
    expect(")");
    return finish(std::move(n), o);
  }

  void comprehension_clauses(Node& parent) {
    while (at("for") || (at("async") && at("for", 1)) || at("if")) {
      const Open o = open();
      if (at("if")) {
        take();
        Node n;
        n.kind = "if_clause";
        add(n, disjunction());
        add(parent, finish(std::move(n), o));
        continue;
      }
      accept("async");
      expect("for");
      Node n;
      n.kind = "for_in_clause";
      add(n, target_list(), "left");
      expect("in");
      add(n, disjunction(), "right");
      add(parent, finish(std::move(n), o));
    }
  }

  Node target() {
    const Open o = open();
    if (at("*")) {
      take();
      Node n;
      n.kind = "list_splat_pattern";
      add(n, bit_or());
      return finish(std::move(n), o);
    }
    return bit_or();
  }

  Node target_list() {
    const Open o = open();
    Node first = target();
    if (!at(",")) return first;
    Node n;
    n.kind = "pattern_list";
    add(n, std::move(first));
    while (accept(",")) {
      if (at("in") || at("=") || at(":") || at_newline()) break;
      add(n, target());
    }
    return finish(std::move(n), o);
  }

  Node strings() {
    const Open o = open();
    Node first = take_leaf("string");
    if (!at_kind(TokenKind::kString)) return first;
    Node n;
    n.kind = "concatenated_string";
    add(n, std::move(first));
    while (at_kind(TokenKind::kString)) add(n, take_leaf("string"));
    return finish(std::move(n), o);
  }

  Node atom() {
    const Open o = open();
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kIdentifier:
        return take_leaf("identifier");
      case TokenKind::kNumber:
        return take_leaf(number_kind(t.text));
      case TokenKind::kString:
        return strings();
      case TokenKind::kKeyword:
        if (t.text == "True") return take_leaf("true");
        if (t.text == "False") return take_leaf("false");
        if (t.text == "None") return take_leaf("none");
        break;
      case TokenKind::kOperator:
        if (t.text == "...") return take_leaf("ellipsis");
        if (t.text == "(") return parenthesized();
        if (t.text == "[") return list_display();
        if (t.text == "{") return brace_display();
        break;
      default:
        break;
    }
    (void)o;
    fail("expected expression");
  }

  Node parenthesized() {
    const Open o = open();
    expect("(");
    if (at(")")) {
      take();
      return make("tuple", o);
    }
    if (at("yield")) {
      Node n;
      n.kind = "parenthesized_expression";
      add(n, yield_expression());
      expect(")");
      return finish(std::move(n), o);
    }
    Node first = star_expression();
    if (at("for") || (at("async") && at("for", 1))) {
      Node n;
      n.kind = "generator_expression";
      add(n, std::move(first), "body");
      comprehension_clauses(n);
      expect(")");
      return finish(std::move(n), o);
    }
    if (at(",")) {
      Node n;
      n.kind = "tuple";
      add(n, std::move(first));
      while (accept(",")) {
        if (at(")")) break;
        add(n, star_expression());
      }
      expect(")");
      return finish(std::move(n), o);
    }
    expect(")");
    Node n;
    n.kind = "parenthesized_expression";
    add(n, std::move(first));
    return finish(std::move(n), o);
  }

  Node list_display() {
    const Open o = open();
    expect("[");
    Node n;
    n.kind = "list";
    if (at("]")) {
      take();
      return make("list", o);
    }
    Node first = star_expression();
    if (at("for") || (at("async") && at("for", 1))) {
      n.kind = "list_comprehension";
      add(n, std::move(first), "body");
      comprehension_clauses(n);
      expect("]");
      return finish(std::move(n), o);
    }
    add(n, std::move(first));
    while (accept(",")) {
      if (at("]")) break;
      add(n, star_expression());
    }
    expect("]");
    return finish(std::move(n), o);
  }

  Node dict_item() {
    const Open o = open();
    if (at("**")) {
      take();
      Node n;
      n.kind = "dictionary_splat";
      add(n, bit_or());
      return finish(std::move(n), o);
    }
    Node key = expression();
    expect(":");
    Node n;
    n.kind = "pair";
    add(n, std::move(key), "key");
    add(n, expression(), "value");
    return finish(std::move(n), o);
  }

  Node brace_display() {
    const Open o = open();
    expect("{");
    if (at("}")) {
      take();
      return make("dictionary", o);
    }
    Node n;
    const bool is_dict = at("**") || [&] {
      // Lookahead for "key:" at bracket depth zero.
      int depth = 0;
      for (std::size_t i = pos_; tok(i).kind != TokenKind::kEnd; ++i) {
        const Token& t = tok(i);
        if (is_text(t, "(") || is_text(t, "[") || is_text(t, "{")) ++depth;
        if (is_text(t, ")") || is_text(t, "]") || is_text(t, "}")) {
          if (depth == 0) return false;
          --depth;
        }
        if (depth == 0 && (is_text(t, ",") || is_text(t, "for"))) return false;
        if (depth == 0 && is_text(t, "lambda")) return false;
        if (depth == 0 && is_text(t, ":")) return true;
      }
      return false;
    }();
    if (is_dict) {
      Node first = dict_item();
      if (at("for") || (at("async") && at("for", 1))) {
        n.kind = "dictionary_comprehension";
        add(n, std::move(first), "body");
        comprehension_clauses(n);
        expect("}");
        return finish(std::move(n), o);
      }
      n.kind = "dictionary";
      add(n, std::move(first));
      while (accept(",")) {
        if (at("}")) break;
        add(n, dict_item());
      }
      expect("}");
      return finish(std::move(n), o);
    }
    Node first = star_expression();
    if (at("for") || (at("async") && at("for", 1))) {
      n.kind = "set_comprehension";
      add(n, std::move(first), "body");
      comprehension_clauses(n);
      expect("}");
      return finish(std::move(n), o);
    }
    n.kind = "set";
    add(n, std::move(first));
    while (accept(",")) {
      if (at("}")) break;
      add(n, star_expression());
    }
    expect("}");
    return finish(std::move(n), o);
  }
};

}  // namespace

SyntaxTree parse_python_file(std::string_view source, std::vector<Token> tokens) {
  PythonParser parser(source, std::move(tokens));
  SyntaxTree tree;
  tree.language = Language::kPython;
  tree.root = parser.module();
  tree.has_error = parser.had_error();
  return tree;
}

SyntaxTree parse_python_function(std::string_view source, std::vector<Token> tokens) {
  PythonParser parser(source, std::move(tokens));
  SyntaxTree tree;
  tree.language = Language::kPython;
  tree.root = parser.single_function();
  tree.has_error = parser.had_error();
  return tree;
}

}  // namespace codeseq::detail
