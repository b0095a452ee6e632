#include "codeseq/lexer.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "codeseq/error.hpp"

namespace codeseq {
namespace {

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_hex_digit(unsigned char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

const std::unordered_set<std::string>& java_keywords() {
  static const std::unordered_set<std::string> words = {
      "abstract", "assert",     "boolean",   "break",     "byte",     "case",
      "catch",    "char",       "class",     "const",     "continue", "default",
      "do",       "double",     "else",      "enum",      "extends",  "final",
      "finally",  "float",      "for",       "goto",      "if",       "implements",
      "import",   "instanceof", "int",       "interface", "long",     "native",
      "new",      "package",    "private",   "protected", "public",   "return",
      "short",    "static",     "strictfp",  "super",     "switch",   "synchronized",
      "this",     "throw",      "throws",    "transient", "try",      "void",
      "volatile", "while",      "true",      "false",     "null"};
  return words;
}

const std::unordered_set<std::string>& python_keywords() {
  static const std::unordered_set<std::string> words = {
      "False", "None",   "True",    "and",      "as",       "assert", "async",
      "await", "break",  "class",   "continue", "def",      "del",    "elif",
      "else",  "except", "finally", "for",      "from",     "global", "if",
      "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
      "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};
  return words;
}

// Operators sorted so that longer spellings are tried first.
constexpr std::string_view kJavaOperators[] = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=",
    "<=",   ">=",  "+=",  "-=",  "*=",  "/=", "&=", "|=", "^=", "%=", "<<", ">>", "(",
    ")",    "{",   "}",   "[",   "]",   ";",  ",",  ".",  "@",  "=",  ">",  "<",  "!",
    "~",    "?",   ":",   "+",   "-",   "*",  "/",  "&",  "|",  "^",  "%"};

constexpr std::string_view kPythonOperators[] = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ".",  ";",  "@",  "=",
    "+",   "-",   "*",   "/",   "%",   "&",  "|",  "^",  "~",  "<",  ">"};

class Scanner {
 public:
  explicit Scanner(std::string_view source) : src_(source) {}

  bool done() const { return pos_ >= src_.size(); }
  unsigned char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? static_cast<unsigned char>(src_[pos_ + ahead]) : 0;
  }
  bool starts_with(std::string_view s) const { return src_.substr(pos_).starts_with(s); }
  std::size_t pos() const { return pos_; }
  int line() const { return line_; }
  int column() const { return column_; }
  std::string_view slice(std::size_t from) const { return src_.substr(from, pos_ - from); }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw LexError(message, pos_, line_, column_);
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

struct Mark {
  std::size_t begin;
  int line;
  int column;
};

Mark mark(const Scanner& s) { return {s.pos(), s.line(), s.column()}; }

Token make_token(const Scanner& s, const Mark& m, TokenKind kind) {
  Token t;
  t.kind = kind;
  t.text = std::string(s.slice(m.begin));
  t.begin = m.begin;
  t.end = s.pos();
  t.line = m.line;
  t.column = m.column;
  return t;
}

void scan_digits(Scanner& s, bool hex) {
  while (!s.done() && ((hex ? is_hex_digit(s.peek()) : is_digit(s.peek())) || s.peek() == '_')) {
    s.advance();
  }
}

// Shared numeric literal scanner. Java accepts l/f/d suffixes, Python j.
void scan_number(Scanner& s, Language language) {
  if (s.peek() == '0' && (s.peek(1) == 'x' || s.peek(1) == 'X')) {
    s.advance(2);
    scan_digits(s, true);
    if (language == Language::kJava) {
      if (s.peek() == '.') {
        s.advance();
        scan_digits(s, true);
      }
      if (s.peek() == 'p' || s.peek() == 'P') {
        s.advance();
        if (s.peek() == '+' || s.peek() == '-') s.advance();
        scan_digits(s, false);
      }
    }
  } else if (s.peek() == '0' && (s.peek(1) == 'b' || s.peek(1) == 'B')) {
    s.advance(2);
    scan_digits(s, false);
  } else if (language == Language::kPython && s.peek() == '0' &&
             (s.peek(1) == 'o' || s.peek(1) == 'O')) {
    s.advance(2);
    scan_digits(s, false);
  } else {
    scan_digits(s, false);
    if (s.peek() == '.' && !(s.peek(1) == '.' && s.peek(2) == '.')) {
      const unsigned char after = s.peek(1);
      // "1.e5" and "1.5" continue the literal; "1.foo" is member access.
      if (is_digit(after) || !is_ident_start(after) || after == 'e' || after == 'E' ||
          (language == Language::kJava && (after == 'f' || after == 'F' || after == 'd' ||
                                           after == 'D')) ||
          (language == Language::kPython && (after == 'j' || after == 'J'))) {
        s.advance();
        scan_digits(s, false);
      }
    }
    if ((s.peek() == 'e' || s.peek() == 'E') &&
        (is_digit(s.peek(1)) ||
         ((s.peek(1) == '+' || s.peek(1) == '-') && is_digit(s.peek(2))))) {
      s.advance(2);
      scan_digits(s, false);
    }
  }
  if (language == Language::kJava) {
    const unsigned char c = s.peek();
    if (c == 'l' || c == 'L' || c == 'f' || c == 'F' || c == 'd' || c == 'D') s.advance();
  } else if (s.peek() == 'j' || s.peek() == 'J') {
    s.advance();
  }
  if (is_ident_char(s.peek())) s.fail("malformed numeric literal");
}

// Scans a quoted literal starting at the opening quote. Single-line literals
// may not contain a raw newline.
void scan_quoted(Scanner& s, unsigned char quote, bool triple) {
  s.advance(triple ? 3 : 1);
  while (true) {
    if (s.done()) s.fail(triple ? "unterminated triple-quoted string" : "unterminated literal");
    const unsigned char c = s.peek();
    if (c == '\\') {
      s.advance(2);
      continue;
    }
    if (triple) {
      if (c == quote && s.peek(1) == quote && s.peek(2) == quote) {
        s.advance(3);
        return;
      }
    } else {
      if (c == quote) {
        s.advance();
        return;
      }
      if (c == '\n') s.fail("unterminated literal");
    }
    s.advance();
  }
}

bool scan_operator(Scanner& s, std::string_view op) {
  if (!s.starts_with(op)) return false;
  s.advance(op.size());
  return true;
}

LexResult lex_java(std::string_view source) {
  LexResult out;
  Scanner s(source);
  while (true) {
    while (!s.done() && (s.peek() == ' ' || s.peek() == '\t' || s.peek() == '\n' ||
                         s.peek() == '\r' || s.peek() == '\f')) {
      s.advance();
    }
    if (s.done()) break;
    const Mark m = mark(s);
    const unsigned char c = s.peek();
    if (c == '/' && s.peek(1) == '/') {
      while (!s.done() && s.peek() != '\n') s.advance();
      out.comments.push_back({std::string(s.slice(m.begin)), m.begin, s.pos()});
      continue;
    }
    if (c == '/' && s.peek(1) == '*') {
      s.advance(2);
      while (!s.done() && !(s.peek() == '*' && s.peek(1) == '/')) s.advance();
      if (s.done()) throw LexError("unterminated block comment", m.begin, m.line, m.column);
      s.advance(2);
      out.comments.push_back({std::string(s.slice(m.begin)), m.begin, s.pos()});
      continue;
    }
    if (is_ident_start(c)) {
      while (!s.done() && (is_ident_char(s.peek()) || s.peek() == '$')) s.advance();
      Token t = make_token(s, m, TokenKind::kIdentifier);
      if (java_keywords().count(t.text)) t.kind = TokenKind::kKeyword;
      out.tokens.push_back(std::move(t));
      continue;
    }
    if (c == '$') {
      while (!s.done() && (is_ident_char(s.peek()) || s.peek() == '$')) s.advance();
      out.tokens.push_back(make_token(s, m, TokenKind::kIdentifier));
      continue;
    }
    if (is_digit(c) || (c == '.' && is_digit(s.peek(1)))) {
      scan_number(s, Language::kJava);
      out.tokens.push_back(make_token(s, m, TokenKind::kNumber));
      continue;
    }
    if (c == '"') {
      scan_quoted(s, '"', s.peek(1) == '"' && s.peek(2) == '"');
      out.tokens.push_back(make_token(s, m, TokenKind::kString));
      continue;
    }
    if (c == '\'') {
      scan_quoted(s, '\'', false);
      out.tokens.push_back(make_token(s, m, TokenKind::kCharacter));
      continue;
    }
    bool matched = false;
    for (std::string_view op : kJavaOperators) {
      if (scan_operator(s, op)) {
        matched = true;
        break;
      }
    }
    if (!matched) s.fail("unexpected character '" + std::string(1, static_cast<char>(c)) + "'");
    out.tokens.push_back(make_token(s, m, TokenKind::kOperator));
  }
  Token end;
  end.kind = TokenKind::kEnd;
  end.begin = end.end = source.size();
  end.line = s.line();
  end.column = s.column();
  out.tokens.push_back(end);
  return out;
}

bool is_string_prefix(std::string_view word) {
  if (word.size() > 2) return false;
  std::string lower;
  for (char ch : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

LexResult lex_python(std::string_view source) {
  LexResult out;
  Scanner s(source);
  std::vector<int> indents{0};
  int depth = 0;
  bool at_line_start = true;

  auto emit_layout = [&](TokenKind kind) {
    Token t;
    t.kind = kind;
    t.begin = t.end = s.pos();
    t.line = s.line();
    t.column = s.column();
    out.tokens.push_back(t);
  };
  auto last_is_content = [&]() {
    return !out.tokens.empty() && out.tokens.back().kind != TokenKind::kNewline &&
           out.tokens.back().kind != TokenKind::kIndent &&
           out.tokens.back().kind != TokenKind::kDedent;
  };

  while (true) {
    if (at_line_start && depth == 0) {
      int column = 0;
      while (!s.done()) {
        const unsigned char c = s.peek();
        if (c == ' ') {
          ++column;
        } else if (c == '\t') {
          column = (column / 8 + 1) * 8;
        } else if (c == '\f') {
          column = 0;
        } else {
          break;
        }
        s.advance();
      }
      if (s.done()) break;
      const unsigned char c = s.peek();
      if (c == '\n' || c == '\r' || c == '#' || (c == '\\' && s.peek(1) == '\n')) {
        // Blank and comment-only lines carry no indentation.
        if (c == '#') {
          const Mark m = mark(s);
          while (!s.done() && s.peek() != '\n') s.advance();
          out.comments.push_back({std::string(s.slice(m.begin)), m.begin, s.pos()});
        } else if (c == '\\') {
          s.advance();
        }
        if (!s.done()) s.advance();
        continue;
      }
      if (column > indents.back()) {
        indents.push_back(column);
        emit_layout(TokenKind::kIndent);
      } else {
        while (column < indents.back()) {
          indents.pop_back();
          emit_layout(TokenKind::kDedent);
        }
        if (column != indents.back()) s.fail("inconsistent dedent");
      }
      at_line_start = false;
    }

    while (!s.done() && (s.peek() == ' ' || s.peek() == '\t' || s.peek() == '\f' ||
                         (s.peek() == '\r' && s.peek(1) != '\n'))) {
      s.advance();
    }
    if (s.done()) break;
    const Mark m = mark(s);
    const unsigned char c = s.peek();

    if (c == '#') {
      while (!s.done() && s.peek() != '\n') s.advance();
      out.comments.push_back({std::string(s.slice(m.begin)), m.begin, s.pos()});
      continue;
    }
    if (c == '\\' && (s.peek(1) == '\n' || (s.peek(1) == '\r' && s.peek(2) == '\n'))) {
      s.advance(s.peek(1) == '\r' ? 3 : 2);
      continue;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r') s.advance();
      if (depth == 0) {
        if (last_is_content()) emit_layout(TokenKind::kNewline);
        at_line_start = true;
      }
      s.advance();
      continue;
    }
    if (is_ident_start(c)) {
      while (!s.done() && is_ident_char(s.peek())) s.advance();
      const std::string_view word = s.slice(m.begin);
      if ((s.peek() == '"' || s.peek() == '\'') && is_string_prefix(word)) {
        const unsigned char q = s.peek();
        scan_quoted(s, q, s.peek(1) == q && s.peek(2) == q);
        out.tokens.push_back(make_token(s, m, TokenKind::kString));
        continue;
      }
      Token t = make_token(s, m, TokenKind::kIdentifier);
      if (python_keywords().count(t.text)) t.kind = TokenKind::kKeyword;
      out.tokens.push_back(std::move(t));
      continue;
    }
    if (is_digit(c) || (c == '.' && is_digit(s.peek(1)))) {
      scan_number(s, Language::kPython);
      out.tokens.push_back(make_token(s, m, TokenKind::kNumber));
      continue;
    }
    if (c == '"' || c == '\'') {
      scan_quoted(s, c, s.peek(1) == c && s.peek(2) == c);
      out.tokens.push_back(make_token(s, m, TokenKind::kString));
      continue;
    }
    bool matched = false;
    for (std::string_view op : kPythonOperators) {
      if (scan_operator(s, op)) {
        matched = true;
        break;
      }
    }
    if (!matched) s.fail("unexpected character '" + std::string(1, static_cast<char>(c)) + "'");
    Token t = make_token(s, m, TokenKind::kOperator);
    if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
    if (t.text == ")" || t.text == "]" || t.text == "}") depth = std::max(0, depth - 1);
    out.tokens.push_back(std::move(t));
  }
  if (last_is_content()) emit_layout(TokenKind::kNewline);
  while (indents.size() > 1) {
    indents.pop_back();
    emit_layout(TokenKind::kDedent);
  }
  emit_layout(TokenKind::kEnd);
  return out;
}

}  // namespace

bool is_layout(TokenKind kind) {
  return kind == TokenKind::kNewline || kind == TokenKind::kIndent ||
         kind == TokenKind::kDedent || kind == TokenKind::kEnd;
}

LexResult lex(std::string_view source, Language language) {
  switch (language) {
    case Language::kJava:
      return lex_java(source);
    case Language::kPython:
      return lex_python(source);
    case Language::kOther:
      break;
  }
  throw LexError("no lexer for language '" + std::string(to_string(language)) + "'", 0, 1, 1);
}

std::vector<std::string> lex_tokens(std::string_view source, Language language) {
  std::vector<std::string> tokens;
  for (Token& t : lex(source, language).tokens) {
    if (!is_layout(t.kind)) tokens.push_back(std::move(t.text));
  }
  return tokens;
}

}  // namespace codeseq
