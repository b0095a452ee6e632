#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "codeseq/corpus.hpp"
#include "codeseq/linearize.hpp"
#include "codeseq/pretrain.hpp"
#include "codeseq/vocab.hpp"

namespace codeseq {

struct IngestStats {
  std::size_t files = 0;
  std::size_t skipped_files = 0;
  std::size_t methods = 0;
};

// scan_corpus + extract_methods over every file, in path order.
std::vector<MethodRecord> ingest_corpus(const std::filesystem::path& root,
                                        const std::set<Language>& languages,
                                        IngestStats* stats = nullptr);

using ExprKindsTable = std::map<Language, ExprKinds>;
// Built-in expression kinds for Java and Python.
ExprKindsTable builtin_expr_kinds();

// Featurizes every record; records that fail to lex, parse or yield a
// name are skipped and counted in `rejected`.
std::vector<MethodFeatures> featurize_all(const std::vector<MethodRecord>& records,
                                          const ExprKindsTable& expr_kinds,
                                          std::size_t* rejected = nullptr);

// BPE over code and NL tokens plus the X-SBT word list.
Vocabulary build_vocabulary(const std::vector<MethodFeatures>& features, std::size_t vocab_size);

// Applies fit_code_budget to every method.
void fit_code_budgets(std::vector<MethodFeatures>& features, const Vocabulary& vocab,
                      const Budgets& budgets);

}  // namespace codeseq
