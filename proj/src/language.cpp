#include "codeseq/language.hpp"

#include <algorithm>
#include <cctype>

namespace codeseq {

std::string_view to_string(Language language) {
  switch (language) {
    case Language::kJava:
      return "java";
    case Language::kPython:
      return "python";
    case Language::kOther:
      return "other";
  }
  return "other";
}

std::optional<Language> parse_language(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "java") return Language::kJava;
  if (lower == "python") return Language::kPython;
  if (lower == "other") return Language::kOther;
  return std::nullopt;
}

std::optional<Language> language_for_extension(std::string_view extension) {
  if (!extension.empty() && extension.front() == '.') extension.remove_prefix(1);
  if (extension == "java") return Language::kJava;
  if (extension == "py") return Language::kPython;
  return std::nullopt;
}

}  // namespace codeseq
