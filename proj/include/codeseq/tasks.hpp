#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "codeseq/corpus.hpp"
#include "codeseq/metrics.hpp"
#include "codeseq/model.hpp"
#include "codeseq/pipeline.hpp"
#include "codeseq/pretrain.hpp"
#include "codeseq/train.hpp"
#include "codeseq/vocab.hpp"

namespace codeseq {

enum class FinetuneTask { kSummarize, kComplete, kFix, kTranslate, kSearch };

std::string_view to_string(FinetuneTask task);
FinetuneTask parse_finetune_task(std::string_view name);  // throws ArgumentError

// One line of a generation dataset: {"source": str | [tokens], "target": str}
// with optional "id" and "language".
struct GenerationRecord {
  std::string id;
  std::variant<std::string, Tokens> source;
  std::string target;
  std::optional<Language> language;

  bool operator==(const GenerationRecord&) const = default;
};

std::string generation_record_to_json(const GenerationRecord& record);
GenerationRecord generation_record_from_json(std::string_view line);
void write_generation_records(const std::filesystem::path& path, const std::vector<GenerationRecord>& records);
std::vector<GenerationRecord> read_generation_records(const std::filesystem::path& path);

// Code search pairs: {"code_id": str, "query": str}.
struct SearchRecord {
  std::string code_id;
  std::string query;

  bool operator==(const SearchRecord&) const = default;
};

std::string search_record_to_json(const SearchRecord& record);
SearchRecord search_record_from_json(std::string_view line);
void write_search_records(const std::filesystem::path& path, const std::vector<SearchRecord>& records);
std::vector<SearchRecord> read_search_records(const std::filesystem::path& path);

// First sentence of a docstring, or nullopt when it has no words.
std::optional<std::string> first_sentence(std::string_view docstring);
// Lowercased word and punctuation tokens.
Tokens text_tokens(std::string_view text);
// Target tokens: text tokens for summaries and queries, whitespace split otherwise.
Tokens target_tokens(FinetuneTask task, std::string_view target);

// Summarization pairs (method source -> first docstring sentence) for
// records that have one.
std::vector<GenerationRecord> summarization_records(const std::vector<MethodRecord>& records);
// Search pairs (method id, first docstring sentence).
std::vector<SearchRecord> search_records(const std::vector<MethodRecord>& records);

struct GenerationExample {
  std::string id;
  std::vector<int> encoder_ids;
  Tokens target;
  PretrainInstance instance;  // teacher-forcing form
};

// Source strings with a language are featurized into the three-segment
// input (falling back to lexed tokens when the method does not parse);
// token sources and language-less strings fill the code segment only.
GenerationExample encode_generation(const GenerationRecord& record, FinetuneTask task,
                                    const Vocabulary& vocab, const Budgets& budgets,
                                    const ExprKindsTable& expr_kinds);
std::vector<GenerationExample> encode_generation(const std::vector<GenerationRecord>& records,
                                                 FinetuneTask task, const Vocabulary& vocab,
                                                 const Budgets& budgets, const ExprKindsTable& expr_kinds);

// Targets: BPE(target) cut to budget - 1, then EOS; decoder input is SOS
// followed by the target without its last id.
PretrainInstance teacher_forcing(const std::vector<int>& encoder_ids, std::vector<int> target_ids,
                                 std::size_t target_budget);

struct SearchExample {
  std::string code_id;
  std::vector<int> code_ids;
  Tokens query;
  std::vector<int> query_ids;
  Tokens negative;
  std::vector<int> negative_ids;
};

// Pairs each query with its method's full input and a mined negative
// query from the same dataset. Records whose method is missing or does not
// featurize are dropped. Throws MiningError.
std::vector<SearchExample> build_search_examples(const std::vector<SearchRecord>& pairs,
                                                 const std::vector<MethodRecord>& methods,
                                                 const Vocabulary& vocab, const Budgets& budgets,
                                                 const ExprKindsTable& expr_kinds, std::uint64_t seed);

struct FinetuneConfig {
  std::size_t steps = 1000;
  std::size_t batch_size = 32;
  OptimizerConfig optimizer;
  std::size_t eval_every = 0;               // dev loss cadence; 0 disables
  std::optional<double> target_dev_loss;    // record the first step at or below
  bool stop_at_target = false;
  std::uint64_t seed = 0;
};

struct FinetuneResult {
  std::vector<double> train_losses;
  std::vector<std::pair<std::size_t, double>> dev_losses;
  std::optional<std::size_t> reached_target;  // step count
};

// Cross-entropy fine-tuning over reshuffled epochs of `train`.
FinetuneResult finetune_generation(Seq2SeqModel& model, const std::vector<PretrainInstance>& train,
                                   const std::vector<PretrainInstance>& dev, const FinetuneConfig& config);
// Margin-loss fine-tuning with a fresh negative query per visit; dev loss is
// the mean hinge over the stored negatives.
FinetuneResult finetune_search(Seq2SeqModel& model, const std::vector<SearchExample>& train,
                               const std::vector<SearchExample>& dev, const FinetuneConfig& config);

struct EvalReport {
  std::string task;
  std::string split;
  std::map<std::string, double> metrics;

  std::string to_json() const;
  static EvalReport from_json(std::string_view text);
  bool operator==(const EvalReport&) const = default;
};

struct GenerationEvalOptions {
  std::size_t beam = 5;
  std::size_t max_len = 64;
  bool sentence_bleu = false;  // also report the mean sentence-level BLEU
  std::size_t jobs = 1;
};

// Summaries: corpus BLEU-4 and ROUGE-L F1. Other tasks: Acc@1, Acc@5 and BLEU.
EvalReport evaluate_generation(Seq2SeqModel& model, const Vocabulary& vocab,
                               const std::vector<GenerationExample>& examples, FinetuneTask task,
                               std::string_view split, const GenerationEvalOptions& options = {});
// Token strings of the generated ids up to EOS.
Tokens decode_hypothesis(const Vocabulary& vocab, const std::vector<int>& ids);

// Ranks every query against the vectors of all distinct code ids; MRR.
EvalReport evaluate_search(Seq2SeqModel& model, const std::vector<SearchExample>& examples,
                           std::string_view split, std::size_t jobs = 1);

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace codeseq
