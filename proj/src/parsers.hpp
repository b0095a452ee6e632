#pragma once

#include <string_view>
#include <vector>

#include "codeseq/lexer.hpp"
#include "codeseq/syntax_tree.hpp"

namespace codeseq::detail {

SyntaxTree parse_java_file(std::string_view source, std::vector<Token> tokens);
SyntaxTree parse_java_member(std::string_view source, std::vector<Token> tokens);
SyntaxTree parse_python_file(std::string_view source, std::vector<Token> tokens);
SyntaxTree parse_python_function(std::string_view source, std::vector<Token> tokens);

}  // namespace codeseq::detail
