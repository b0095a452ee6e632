#include <string>

#include "codeseq/error.hpp"
#include "codeseq/lexer.hpp"
#include "codeseq/parser.hpp"
#include "parsers.hpp"

namespace codeseq {

CodeTokenSeq tokenize_code(std::string_view source, Language language) {
  LexResult lexed = lex(source, language);
  CodeTokenSeq seq;
  std::vector<std::size_t> offsets;
  for (const Token& t : lexed.tokens) {
    if (is_layout(t.kind)) continue;
    seq.tokens.push_back(t.text);
    offsets.push_back(t.begin);
  }
  if (seq.tokens.empty()) throw LexError("source contains no tokens", 0, 1, 1);

  SyntaxTree tree = language == Language::kJava
                        ? detail::parse_java_member(source, std::move(lexed.tokens))
                        : detail::parse_python_function(source, std::move(lexed.tokens));
  const Node& name = declared_name(tree.root);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (offsets[i] == name.begin) {
      seq.name_index = i;
      return seq;
    }
  }
  throw StructureError("declared name not found among tokens");
}

}  // namespace codeseq
