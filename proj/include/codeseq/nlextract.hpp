#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "codeseq/syntax_tree.hpp"

namespace codeseq {

// Splits camelCase, PascalCase and snake_case into lowercase subtokens.
// Uppercase runs stay together except for a capital that starts the next
// word ("HTTPServer" -> http, server); digits stay with the preceding run.
std::vector<std::string> split_identifier(std::string_view identifier);

struct MethodNames {
  std::string method_name;
  std::vector<std::string> calls;  // callee names, pre-order, duplicates kept
};

// Throws StructureError when the root is not a method declaration.
MethodNames extract_names(const Node& root);

// Third input segment: split method name followed by split call names.
struct NlSeq {
  std::vector<std::string> tokens;
  std::size_t s = 0;  // leading subtokens that come from the method name

  std::size_t size() const { return tokens.size(); }
  bool operator==(const NlSeq&) const = default;
};

NlSeq build_nl(const Node& root);
NlSeq build_nl(const MethodNames& names);

}  // namespace codeseq
