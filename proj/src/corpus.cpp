#include "codeseq/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codeseq/error.hpp"
#include "codeseq/lexer.hpp"
#include "codeseq/parser.hpp"
#include "codeseq/random.hpp"

namespace codeseq {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  ok = static_cast<bool>(in);
  if (!ok) return {};
  std::stringstream buffer;
  buffer << in.rdbuf();
  ok = !in.bad();
  return buffer.str();
}

std::size_t line_start(std::string_view text, std::size_t offset) {
  while (offset > 0 && text[offset - 1] != '\n') --offset;
  return offset;
}

std::size_t line_end(std::string_view text, std::size_t offset) {
  while (offset < text.size() && text[offset] != '\n') ++offset;
  return offset;
}

int line_number(std::string_view text, std::size_t offset) {
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      return lines;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
}

// ------------------------------------------------------------------ Java

std::optional<std::string> clean_javadoc(std::string_view comment) {
  if (comment.size() < 5 || comment.substr(0, 3) != "/**") return std::nullopt;
  comment = comment.substr(3, comment.size() - 5);
  std::vector<std::string> kept;
  for (std::string line : split_lines(comment)) {
    std::string t = trim(line);
    if (!t.empty() && t.front() == '*') t = trim(std::string_view(t).substr(1));
    if (!t.empty() && t.front() == '@') break;
    kept.push_back(std::move(t));
  }
  while (!kept.empty() && kept.back().empty()) kept.pop_back();
  while (!kept.empty() && kept.front().empty()) kept.erase(kept.begin());
  if (kept.empty()) return std::nullopt;
  std::string out;
  for (const std::string& k : kept) {
    if (!out.empty()) out += '\n';
    out += k;
  }
  return out;
}

std::optional<std::string> java_docstring(std::string_view text, const std::vector<Comment>& comments,
                                          std::size_t method_begin) {
  const Comment* last = nullptr;
  for (const Comment& c : comments) {
    if (c.end <= method_begin) last = &c;
  }
  if (last == nullptr || text.substr(last->end, method_begin - last->end)
                                .find_first_not_of(" \t\r\n") != std::string_view::npos) {
    return std::nullopt;
  }
  return clean_javadoc(last->text);
}

// ---------------------------------------------------------------- Python

std::string unquote_python(std::string_view literal) {
  std::size_t i = 0;
  bool raw = false;
  while (i < literal.size() && literal[i] != '\'' && literal[i] != '"') {
    if (literal[i] == 'r' || literal[i] == 'R') raw = true;
    ++i;
  }
  std::string_view body = literal.substr(i);
  const std::size_t q = body.size() >= 6 && (body.substr(0, 3) == "\"\"\"" || body.substr(0, 3) == "'''") ? 3 : 1;
  if (body.size() < 2 * q) return {};
  body = body.substr(q, body.size() - 2 * q);
  if (raw) return std::string(body);
  std::string out;
  for (std::size_t k = 0; k < body.size(); ++k) {
    if (body[k] != '\\' || k + 1 == body.size()) {
      out += body[k];
      continue;
    }
    const char e = body[++k];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '\\': out += '\\'; break;
      case '\'': out += '\''; break;
      case '"': out += '"'; break;
      case '\n': break;
      default:
        out += '\\';
        out += e;
    }
  }
  return out;
}

// Mirrors inspect.cleandoc.
std::string clean_docstring(const std::string& doc) {
  std::vector<std::string> lines = split_lines(doc);
  for (std::string& l : lines) {
    std::string expanded;
    for (char c : l) {
      if (c == '\t') {
        expanded.append(8 - expanded.size() % 8, ' ');
      } else {
        expanded += c;
      }
    }
    l = std::move(expanded);
  }
  std::size_t margin = std::string::npos;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t content = lines[i].find_first_not_of(' ');
    if (content != std::string::npos) margin = std::min(margin, content);
  }
  if (!lines.empty()) {
    const auto first = lines[0].find_first_not_of(' ');
    lines[0] = first == std::string::npos ? std::string() : lines[0].substr(first);
  }
  if (margin != std::string::npos) {
    for (std::size_t i = 1; i < lines.size(); ++i) {
      lines[i] = lines[i].size() >= margin ? lines[i].substr(margin) : std::string();
    }
  }
  for (std::string& l : lines) {
    const auto last = l.find_last_not_of(" \r");
    l = last == std::string::npos ? std::string() : l.substr(0, last + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

// The docstring statement of a function body, if any.
const Node* python_docstring_node(const Node& function) {
  const Node* body = function.child("body");
  if (body == nullptr || body->children.empty()) return nullptr;
  const Node& first = body->children.front();
  if (first.kind != "expression_statement" || first.children.size() != 1) return nullptr;
  const Node& value = first.children.front();
  if (value.kind != "string" && value.kind != "concatenated_string") return nullptr;
  return &first;
}

std::string docstring_value(const Node& statement) {
  const Node& value = statement.children.front();
  std::string raw;
  if (value.kind == "string") {
    raw = unquote_python(value.text);
  } else {
    for (const Node& part : value.children) raw += unquote_python(part.text);
  }
  return clean_docstring(raw);
}

// Removes the docstring statement [b, e) from the method text starting at
// `base` in the file; a lone docstring is replaced by `pass`.
std::string strip_docstring(std::string_view file, std::size_t base, std::size_t end,
                            const Node& statement, bool sole) {
  const std::size_t b = statement.begin;
  const std::size_t e = statement.end;
  const std::size_t ls = line_start(file, b);
  const std::size_t le = line_end(file, e);
  std::string out(file.substr(base, end - base));
  const bool own_lines = ls >= base && blank(file.substr(ls, b - ls)) && blank(file.substr(e, le - e));
  if (own_lines) {
    const std::string indent(file.substr(ls, b - ls));
    const std::size_t stop = std::min(le + 1, end);
    std::string replacement = sole ? indent + "pass" + (stop > le ? "\n" : "") : std::string();
    out.replace(ls - base, stop - ls, replacement);
  } else {
    out.replace(b - base, e - b, sole ? "pass" : "");
  }
  return out;
}

std::string dedent(const std::string& text, std::size_t width) {
  if (width == 0) return text;
  std::string out;
  std::size_t start = 0;
  bool first = true;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::size_t stop = nl == std::string::npos ? text.size() : nl;
    std::string_view line(text.data() + start, stop - start);
    if (!first) {
      std::size_t k = 0;
      while (k < width && k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
      if (k == width || blank(line)) line.remove_prefix(k);
    }
    out.append(line);
    if (nl == std::string::npos) break;
    out += '\n';
    start = nl + 1;
    first = false;
  }
  return out;
}

bool parses_as_method(const std::string& source, Language language) {
  try {
    (void)parse(source, language);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void collect_java(const Node& node, std::string_view text, const std::vector<Comment>& comments,
                  std::string_view path, std::vector<MethodRecord>& out) {
  if (node.kind == "method_declaration" || node.kind == "constructor_declaration") {
    const Node* name = node.child("name");
    MethodRecord r;
    r.language = Language::kJava;
    r.path = std::string(path);
    const std::size_t base = line_start(text, node.begin);
    r.source = std::string(text.substr(node.begin, node.end - node.begin));
    if (blank(text.substr(base, node.begin - base))) r.source = dedent(r.source, node.begin - base);
    r.docstring = java_docstring(text, comments, node.begin);
    r.id = r.path + ":" + std::to_string(line_number(text, node.begin)) + ":" +
           (name != nullptr ? name->text : std::string("?"));
    if (name != nullptr && parses_as_method(r.source, Language::kJava)) out.push_back(std::move(r));
  }
  for (const Node& c : node.children) collect_java(c, text, comments, path, out);
}

void collect_python(const Node& node, const Node* decorated, std::string_view text,
                    std::string_view path, std::vector<MethodRecord>& out) {
  if (node.kind == "function_definition") {
    const Node& outer = decorated != nullptr ? *decorated : node;
    const std::size_t base = line_start(text, outer.begin);
    const std::size_t width = outer.begin - base;
    const Node* name = node.child("name");
    MethodRecord r;
    r.language = Language::kPython;
    r.path = std::string(path);
    std::string source;
    if (const Node* doc = python_docstring_node(node)) {
      r.docstring = docstring_value(*doc);
      if (r.docstring->empty()) r.docstring.reset();
      const bool sole = node.child("body")->children.size() == 1;
      source = strip_docstring(text, outer.begin, outer.end, *doc, sole);
    } else {
      source = std::string(text.substr(outer.begin, outer.end - outer.begin));
    }
    if (!blank(text.substr(base, width))) {
      // Definition shares its line with other code; keep it as is.
      r.source = std::move(source);
    } else {
      r.source = dedent(source, width);
    }
    r.id = r.path + ":" + std::to_string(line_number(text, outer.begin)) + ":" +
           (name != nullptr ? name->text : std::string("?"));
    if (name != nullptr && parses_as_method(r.source, Language::kPython)) out.push_back(std::move(r));
  }
  for (const Node& c : node.children) {
    collect_python(c, node.kind == "decorated_definition" && c.field == "definition" ? &node : nullptr,
                   text, path, out);
  }
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::vector<SourceFile> scan_corpus(const fs::path& root, const std::set<Language>& languages,
                                    ScanStats* stats) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("cannot read directory '" + root.string() + "'");
  std::vector<std::pair<std::string, Language>> found;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw IoError("cannot read directory '" + root.string() + "': " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) throw IoError("cannot read directory under '" + root.string() + "': " + ec.message());
    if (!it->is_regular_file(ec)) continue;
    const auto lang = language_for_extension(it->path().extension().string());
    if (!lang || languages.count(*lang) == 0) continue;
    found.emplace_back(fs::relative(it->path(), root).generic_string(), *lang);
  }
  std::sort(found.begin(), found.end());

  ScanStats local;
  std::vector<SourceFile> files;
  for (auto& [rel, lang] : found) {
    bool ok = false;
    std::string text = read_file(root / rel, ok);
    if (!ok || !is_valid_utf8(text)) {
      ++local.skipped;
      continue;
    }
    ++local.files;
    files.push_back({rel, lang, std::move(text)});
  }
  if (stats != nullptr) *stats = local;
  return files;
}

std::vector<MethodRecord> extract_methods(std::string_view file_text, Language language,
                                          std::string_view path) {
  std::vector<MethodRecord> out;
  LexResult lexed;
  SyntaxTree tree;
  try {
    tree = parse_file(file_text, language, &lexed);
  } catch (const LexError&) {
    return out;
  }
  if (language == Language::kJava) {
    collect_java(tree.root, file_text, lexed.comments, path, out);
  } else {
    collect_python(tree.root, nullptr, file_text, path, out);
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<MethodRecord>& records,
                           const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (records.empty()) throw ArgumentError("cannot split an empty corpus");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ArgumentError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("split ratios must sum to 1");

  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const MethodRecord& r : records) ids.push_back(r.id);
  Rng rng(seed);
  rng.shuffle(ids);

  const double n = static_cast<double>(ids.size());
  const auto n_dev = static_cast<std::size_t>(std::floor(n * ratios[1] + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios[2] + 1e-9));
  const std::size_t n_train = ids.size() - n_dev - n_test;

  DatasetSplit split;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
  split.dev.assign(ids.begin() + static_cast<long>(n_train),
                   ids.begin() + static_cast<long>(n_train + n_dev));
  split.test.assign(ids.begin() + static_cast<long>(n_train + n_dev), ids.end());
  return split;
}

std::string record_to_json(const MethodRecord& record) {
  nlohmann::ordered_json j;
  j["id"] = record.id;
  j["language"] = std::string(to_string(record.language));
  j["source"] = record.source;
  j["path"] = record.path;
  j["docstring"] = record.docstring ? nlohmann::ordered_json(*record.docstring) : nlohmann::ordered_json();
  return j.dump();
}

MethodRecord record_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    MethodRecord r;
    r.id = j.at("id").get<std::string>();
    const auto lang = parse_language(j.at("language").get<std::string>());
    if (!lang) throw IoError("unknown language '" + j.at("language").get<std::string>() + "'");
    r.language = *lang;
    r.source = j.at("source").get<std::string>();
    r.path = j.at("path").get<std::string>();
    if (j.contains("docstring") && !j.at("docstring").is_null()) {
      r.docstring = j.at("docstring").get<std::string>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed record: ") + e.what());
  }
}

void write_records(std::ostream& out, const std::vector<MethodRecord>& records) {
  for (const MethodRecord& r : records) out << record_to_json(r) << '\n';
}

void write_records(const fs::path& path, const std::vector<MethodRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_records(out, records);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<MethodRecord> read_records(std::istream& in) {
  std::vector<MethodRecord> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      records.push_back(record_from_json(line));
    } catch (const IoError& e) {
      throw IoError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return records;
}

std::vector<MethodRecord> read_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  try {
    return read_records(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string split_to_json(const DatasetSplit& split) {
  nlohmann::ordered_json j;
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["dev"] = split.dev;
  j["test"] = split.test;
  return j.dump();
}

DatasetSplit split_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DatasetSplit s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.dev = j.at("dev").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed split file: ") + e.what());
  }
}

std::vector<MethodRecord> select_part(const std::vector<MethodRecord>& records,
                                      const DatasetSplit& split, std::string_view part) {
  const std::vector<std::string>* ids = nullptr;
  if (part == "train") ids = &split.train;
  if (part == "dev") ids = &split.dev;
  if (part == "test") ids = &split.test;
  if (ids == nullptr) throw ArgumentError("unknown split part '" + std::string(part) + "'");
  const std::set<std::string> wanted(ids->begin(), ids->end());
  std::vector<MethodRecord> out;
  for (const MethodRecord& r : records) {
    if (wanted.count(r.id) > 0) out.push_back(r);
  }
  return out;
}

}  // namespace codeseq
