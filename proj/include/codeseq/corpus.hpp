#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "codeseq/language.hpp"

namespace codeseq {

struct MethodRecord {
  std::string id;  // "path:line:name"
  Language language = Language::kOther;
  std::string source;
  std::string path;
  std::optional<std::string> docstring;  // fine-tuning label only

  bool operator==(const MethodRecord&) const = default;
};

struct SourceFile {
  std::string path;  // relative to the scanned root, '/' separated
  Language language = Language::kOther;
  std::string text;
};

struct ScanStats {
  std::size_t files = 0;
  std::size_t skipped = 0;  // unreadable or not UTF-8
};

// Files under root whose extension maps to one of `languages`, sorted by
// path. Throws IoError when root cannot be read.
std::vector<SourceFile> scan_corpus(const std::filesystem::path& root,
                                    const std::set<Language>& languages,
                                    ScanStats* stats = nullptr);

bool is_valid_utf8(std::string_view text);

// One record per method or function (nested ones included) in source order.
std::vector<MethodRecord> extract_methods(std::string_view file_text, Language language,
                                          std::string_view path = "");

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSplit&) const = default;
};

// Shuffles with `seed`, then takes floor(n * dev) and floor(n * test) items;
// train gets the remainder. Throws ArgumentError on bad ratios or no records.
DatasetSplit split_dataset(const std::vector<MethodRecord>& records,
                           const std::array<double, 3>& ratios, std::uint64_t seed);

std::string record_to_json(const MethodRecord& record);
MethodRecord record_from_json(std::string_view line);

void write_records(std::ostream& out, const std::vector<MethodRecord>& records);
void write_records(const std::filesystem::path& path, const std::vector<MethodRecord>& records);
std::vector<MethodRecord> read_records(std::istream& in);
std::vector<MethodRecord> read_records(const std::filesystem::path& path);

std::string split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(std::string_view text);

// Records of one part ("train" / "dev" / "test"), in corpus order.
std::vector<MethodRecord> select_part(const std::vector<MethodRecord>& records,
                                      const DatasetSplit& split, std::string_view part);

}  // namespace codeseq
