#include "codeseq/parser.hpp"

#include <string>

#include "codeseq/error.hpp"
#include "parsers.hpp"

namespace codeseq {
namespace {

void require_supported(Language language) {
  if (language != Language::kJava && language != Language::kPython) {
    throw ArgumentError("no grammar for language '" + std::string(to_string(language)) + "'");
  }
}

}  // namespace

SyntaxTree parse(std::string_view source, Language language) {
  require_supported(language);
  LexResult lexed = lex(source, language);
  if (lexed.tokens.size() <= 1) throw ParseError("empty source", 0, 1, 1);
  if (language == Language::kJava) return detail::parse_java_member(source, std::move(lexed.tokens));
  return detail::parse_python_function(source, std::move(lexed.tokens));
}

SyntaxTree parse_file(std::string_view source, Language language, LexResult* lexed) {
  require_supported(language);
  LexResult result = lex(source, language);
  std::vector<Token> tokens = result.tokens;
  if (lexed != nullptr) *lexed = std::move(result);
  if (language == Language::kJava) return detail::parse_java_file(source, std::move(tokens));
  return detail::parse_python_file(source, std::move(tokens));
}

const Node& declaration_node(const Node& root) {
  if (root.kind == "decorated_definition") {
    if (const Node* def = root.child("definition")) return *def;
    throw StructureError("decorated definition without a definition");
  }
  return root;
}

const Node& declared_name(const Node& root) {
  const Node& decl = declaration_node(root);
  if (decl.kind != "method_declaration" && decl.kind != "constructor_declaration" &&
      decl.kind != "function_definition") {
    throw StructureError("no method declaration at tree root (found '" + decl.kind + "')");
  }
  const Node* name = decl.child("name");
  if (name == nullptr || name->text.empty()) throw StructureError("declaration has no name");
  return *name;
}

}  // namespace codeseq
