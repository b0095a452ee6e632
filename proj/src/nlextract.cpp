#include "codeseq/nlextract.hpp"

#include "codeseq/error.hpp"
#include "codeseq/parser.hpp"

namespace codeseq {
namespace {

enum class CharClass { kUpper, kLower, kOther };

CharClass classify(char c) {
  if (c >= 'A' && c <= 'Z') return CharClass::kUpper;
  if (c >= 'a' && c <= 'z') return CharClass::kLower;
  return CharClass::kOther;
}

char lower(char c) { return classify(c) == CharClass::kUpper ? static_cast<char>(c - 'A' + 'a') : c; }

void split_part(std::string_view part, std::vector<std::string>& out) {
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < part.size(); ++i) {
    const CharClass cls = classify(part[i]);
    if (cls == CharClass::kUpper && i > 0) {
      const CharClass prev = classify(part[i - 1]);
      const bool next_lower = i + 1 < part.size() && classify(part[i + 1]) == CharClass::kLower;
      if (prev != CharClass::kUpper || next_lower) flush();
    }
    current += lower(part[i]);
  }
  flush();
}

std::string callee_name(const Node& call) {
  if (call.kind == "method_invocation") {
    const Node* name = call.child("name");
    return name != nullptr ? name->text : std::string();
  }
  const Node* fn = call.child("function");
  if (fn == nullptr) return {};
  if (fn->kind == "identifier") return fn->text;
  if (fn->kind == "attribute") {
    const Node* attr = fn->child("attribute");
    return attr != nullptr ? attr->text : std::string();
  }
  return {};
}

void collect_calls(const Node& node, std::vector<std::string>& calls) {
  if (node.kind == "method_invocation" || node.kind == "call") {
    std::string name = callee_name(node);
    if (!name.empty()) calls.push_back(std::move(name));
  }
  for (const Node& c : node.children) collect_calls(c, calls);
}

}  // namespace

std::vector<std::string> split_identifier(std::string_view identifier) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= identifier.size()) {
    const std::size_t underscore = identifier.find('_', start);
    const std::size_t stop = underscore == std::string_view::npos ? identifier.size() : underscore;
    split_part(identifier.substr(start, stop - start), out);
    if (underscore == std::string_view::npos) break;
    start = underscore + 1;
  }
  return out;
}

MethodNames extract_names(const Node& root) {
  MethodNames names;
  names.method_name = declared_name(root).text;
  collect_calls(declaration_node(root), names.calls);
  return names;
}

NlSeq build_nl(const MethodNames& names) {
  NlSeq nl;
  nl.tokens = split_identifier(names.method_name);
  nl.s = nl.tokens.size();
  if (nl.s == 0) {
    throw StructureError("method name '" + names.method_name + "' has no subtokens");
  }
  for (const std::string& call : names.calls) {
    for (std::string& t : split_identifier(call)) nl.tokens.push_back(std::move(t));
  }
  return nl;
}

NlSeq build_nl(const Node& root) { return build_nl(extract_names(root)); }

}  // namespace codeseq
