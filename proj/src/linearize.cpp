#include "codeseq/linearize.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include "codeseq/error.hpp"

namespace codeseq {

namespace detail {
extern const char* const kJavaExprKinds;
extern const char* const kPythonExprKinds;
}  // namespace detail

std::string_view to_string(AstVariant variant) {
  return variant == AstVariant::kSbt ? "sbt" : "xsbt";
}

ExprKinds ExprKinds::parse(std::string_view text) {
  std::set<std::string> kinds;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    kinds.insert(line.substr(first, last - first + 1));
  }
  return ExprKinds(std::move(kinds));
}

ExprKinds ExprKinds::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read expression kinds file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const ExprKinds& ExprKinds::builtin(Language language) {
  static const ExprKinds java = parse(detail::kJavaExprKinds);
  static const ExprKinds python = parse(detail::kPythonExprKinds);
  static const ExprKinds empty;
  switch (language) {
    case Language::kJava:
      return java;
    case Language::kPython:
      return python;
    case Language::kOther:
      break;
  }
  return empty;
}

namespace {

void sbt_into(const Node& node, std::vector<std::string>& out) {
  const std::string name = node.is_leaf() ? node.kind + "_" + node.text : node.kind;
  out.emplace_back("(");
  out.push_back(name);
  for (const Node& c : node.children) sbt_into(c, out);
  out.emplace_back(")");
  out.push_back(name);
}

void xsbt_into(const Node& node, std::vector<std::string>& out) {
  if (node.is_leaf()) {
    out.push_back(node.kind);
    return;
  }
  out.push_back("<" + node.kind + ">");
  for (const Node& c : node.children) xsbt_into(c, out);
  out.push_back("</" + node.kind + ">");
}

std::optional<Node> prune(const Node& node, const ExprKinds& kinds) {
  Node kept;
  for (const Node& c : node.children) {
    if (auto p = prune(c, kinds)) kept.children.push_back(std::move(*p));
  }
  if (kept.children.empty() && !kinds.contains(node.kind)) return std::nullopt;
  kept.kind = node.kind;
  kept.field = node.field;
  kept.begin = node.begin;
  kept.end = node.end;
  kept.error = node.error;
  if (kept.children.empty()) kept.text = node.text;
  return kept;
}

}  // namespace

LinearizedAst sbt(const Node& root) {
  LinearizedAst out{{}, AstVariant::kSbt};
  sbt_into(root, out.tokens);
  return out;
}

LinearizedAst xsbt(const Node& root) {
  LinearizedAst out{{}, AstVariant::kXsbt};
  xsbt_into(root, out.tokens);
  return out;
}

LinearizedAst xsbt(const Node& root, const ExprKinds& expr_kinds) {
  return xsbt(prune_to_expression_level(root, expr_kinds));
}

Node prune_to_expression_level(const Node& root, const ExprKinds& expr_kinds) {
  if (auto kept = prune(root, expr_kinds)) return std::move(*kept);
  Node lone;
  lone.kind = root.kind;
  lone.field = root.field;
  lone.begin = root.begin;
  lone.end = root.end;
  lone.error = root.error;
  lone.text = root.text.empty() ? root.kind : root.text;
  return lone;
}

bool is_well_balanced(const std::vector<std::string>& tokens) {
  std::vector<std::string_view> stack;
  for (const std::string& t : tokens) {
    if (t.size() > 3 && t.front() == '<' && t.back() == '>' && t[1] == '/') {
      const std::string_view kind(t.data() + 2, t.size() - 3);
      if (stack.empty() || stack.back() != kind) return false;
      stack.pop_back();
    } else if (t.size() > 2 && t.front() == '<' && t.back() == '>') {
      stack.emplace_back(t.data() + 1, t.size() - 2);
    }
  }
  return stack.empty();
}

}  // namespace codeseq
