#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "codeseq/language.hpp"

namespace codeseq {

enum class TokenKind {
  kIdentifier,
  kKeyword,
  kNumber,
  kString,
  kCharacter,
  kOperator,
  // Python layout tokens; never part of a CodeTokenSeq.
  kNewline,
  kIndent,
  kDedent,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;
  std::size_t begin = 0;  // byte offsets into the lexed source
  std::size_t end = 0;
  int line = 1;
  int column = 1;
};

struct Comment {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct LexResult {
  std::vector<Token> tokens;  // always terminated by a kEnd token
  std::vector<Comment> comments;
};

// Full token stream including Python layout tokens. Throws LexError.
LexResult lex(std::string_view source, Language language);

bool is_layout(TokenKind kind);

// First input segment: lexical tokens of one method with comments and
// whitespace dropped, plus the index of the declared method name.
struct CodeTokenSeq {
  std::vector<std::string> tokens;
  std::size_t name_index = 0;

  std::size_t size() const { return tokens.size(); }
  const std::string& name() const { return tokens.at(name_index); }
};

// Lexes and parses a method; the parse supplies name_index. Throws LexError
// for unlexable (or empty) input and ParseError when no declaration is found.
CodeTokenSeq tokenize_code(std::string_view source, Language language);

// Lexical tokens only, without locating the method name.
std::vector<std::string> lex_tokens(std::string_view source, Language language);

}  // namespace codeseq
