#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace codeseq {

enum class Language { kJava, kPython, kOther };

std::string_view to_string(Language language);

// Accepts "java" / "python" / "other" (case-insensitive).
std::optional<Language> parse_language(std::string_view name);

// Maps a file extension (with or without the dot) to a language.
std::optional<Language> language_for_extension(std::string_view extension);

}  // namespace codeseq
