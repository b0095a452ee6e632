#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "codeseq/pipeline.hpp"

namespace fixtures {

inline std::filesystem::path corpus_root() { return CODESEQ_FIXTURES "/corpus"; }

// Every fixture method, ingested once per test binary.
inline const std::vector<codeseq::MethodRecord>& records() {
  static const std::vector<codeseq::MethodRecord> all =
      codeseq::ingest_corpus(corpus_root(), {codeseq::Language::kJava, codeseq::Language::kPython});
  return all;
}

inline const std::vector<codeseq::MethodFeatures>& features() {
  static const std::vector<codeseq::MethodFeatures> all =
      codeseq::featurize_all(records(), codeseq::builtin_expr_kinds());
  return all;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("codeseq_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
