#pragma once

#include <string_view>

#include "codeseq/language.hpp"
#include "codeseq/lexer.hpp"
#include "codeseq/syntax_tree.hpp"

namespace codeseq {

// Parses one method or function. The root is the declaration node
// (method_declaration / constructor_declaration for Java,
// function_definition / decorated_definition for Python). Statement-level
// syntax errors become ERROR nodes; a broken declaration throws ParseError.
SyntaxTree parse(std::string_view source, Language language);

// Parses a whole file (program / module root). When `lexed` is given it
// receives the token stream and comments.
SyntaxTree parse_file(std::string_view source, Language language, LexResult* lexed = nullptr);

// The function/method declaration node under a method-level root.
const Node& declaration_node(const Node& root);

// Identifier node carrying the declared name. Throws StructureError.
const Node& declared_name(const Node& root);

}  // namespace codeseq
