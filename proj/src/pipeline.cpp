#include "codeseq/pipeline.hpp"

#include "codeseq/error.hpp"

namespace codeseq {

std::vector<MethodRecord> ingest_corpus(const std::filesystem::path& root,
                                        const std::set<Language>& languages, IngestStats* stats) {
  ScanStats scan;
  const std::vector<SourceFile> files = scan_corpus(root, languages, &scan);
  std::vector<MethodRecord> records;
  for (const SourceFile& file : files) {
    std::vector<MethodRecord> found = extract_methods(file.text, file.language, file.path);
    records.insert(records.end(), std::make_move_iterator(found.begin()),
                   std::make_move_iterator(found.end()));
  }
  if (stats != nullptr) {
    stats->files = scan.files;
    stats->skipped_files = scan.skipped;
    stats->methods = records.size();
  }
  return records;
}

ExprKindsTable builtin_expr_kinds() {
  return {{Language::kJava, ExprKinds::builtin(Language::kJava)},
          {Language::kPython, ExprKinds::builtin(Language::kPython)}};
}

std::vector<MethodFeatures> featurize_all(const std::vector<MethodRecord>& records,
                                          const ExprKindsTable& expr_kinds, std::size_t* rejected) {
  std::vector<MethodFeatures> out;
  std::size_t bad = 0;
  for (const MethodRecord& r : records) {
    const auto kinds = expr_kinds.find(r.language);
    if (kinds == expr_kinds.end()) throw ArgumentError("no expression kinds for " + std::string(to_string(r.language)));
    try {
      out.push_back(featurize(r, kinds->second));
    } catch (const LexError&) {
      ++bad;
    } catch (const ParseError&) {
      ++bad;
    } catch (const StructureError&) {
      ++bad;
    }
  }
  if (rejected != nullptr) *rejected = bad;
  return out;
}

Vocabulary build_vocabulary(const std::vector<MethodFeatures>& features, std::size_t vocab_size) {
  return Vocabulary::train(bpe_training_streams(features), xsbt_vocabulary(features), vocab_size);
}

void fit_code_budgets(std::vector<MethodFeatures>& features, const Vocabulary& vocab,
                      const Budgets& budgets) {
  for (MethodFeatures& f : features) fit_code_budget(f, vocab, budgets.code);
}

}  // namespace codeseq
