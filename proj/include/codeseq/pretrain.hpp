#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codeseq/corpus.hpp"
#include "codeseq/lexer.hpp"
#include "codeseq/linearize.hpp"
#include "codeseq/nlextract.hpp"
#include "codeseq/random.hpp"
#include "codeseq/vocab.hpp"

namespace codeseq {

// Encoded-length budgets for the three input segments and the target.
struct Budgets {
  std::size_t code = 256;
  std::size_t ast = 192;
  std::size_t nl = 64;
  std::size_t target = 256;

  std::size_t max_source_len() const { return code + ast + nl + 2; }
};

// The three views of one method before encoding.
struct MethodFeatures {
  std::string id;
  Language language = Language::kOther;
  CodeTokenSeq code;
  LinearizedAst ast;  // expression-level X-SBT
  NlSeq nl;
};

// Parses the record once and derives code tokens, pruned X-SBT and NL.
// Throws LexError / ParseError / StructureError for unusable methods.
MethodFeatures featurize(const MethodRecord& record, const ExprKinds& expr_kinds);

// Drops trailing code tokens until their BPE encoding fits `budget` (the
// method name is always kept).
void fit_code_budget(MethodFeatures& features, const Vocabulary& vocab, std::size_t budget);

// Token streams for BPE training: code tokens and NL tokens of each method.
std::vector<std::vector<std::string>> bpe_training_streams(const std::vector<MethodFeatures>& features);
// Distinct X-SBT tokens in first-seen order.
std::vector<std::string> xsbt_vocabulary(const std::vector<MethodFeatures>& features);

struct ModelInput {
  std::vector<int> ids;
  std::array<std::size_t, 3> segment_lengths{};  // encoded code, AST, NL
};

// code ++ SEP ++ ast ++ SEP ++ nl. When the total exceeds the budgets, the
// AST is cut to its budget first, then NL, then the code tail.
ModelInput assemble_input(std::vector<int> code_ids, std::vector<int> ast_ids,
                          std::vector<int> nl_ids, const Budgets& budgets);

ModelInput build_input(const std::vector<std::string>& code, const LinearizedAst& ast,
                       const std::vector<std::string>& nl, const Vocabulary& vocab,
                       const Budgets& budgets);

enum class Task { kCap, kMass, kMng };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);  // throws ArgumentError

inline constexpr int kIsAst = 1;
inline constexpr int kNotAst = 0;

struct PretrainInstance {
  Task task = Task::kMass;
  std::vector<int> encoder_ids;
  std::vector<int> decoder_input_ids;
  std::optional<std::vector<int>> target_ids;  // MASS / MNG
  std::optional<int> label;                    // CAP

  bool operator==(const PretrainInstance&) const = default;
};

// Lexical-level view of one MASS draw.
struct MassSpan {
  std::size_t u = 0;  // 0-based first masked position
  std::size_t k = 0;  // masked length
  std::vector<std::string> masked_code;  // C with the span collapsed to "[MASK]"
  std::vector<std::string> span;         // C[u, u + k)
};

// k = max(1, round(ratio * l)); u uniform in [1, l - k]. Inputs too short
// for an interior span mask from position 0 instead.
MassSpan mass_span(const std::vector<std::string>& code, Rng& rng, double mask_ratio = 0.5);

PretrainInstance make_mass(const MethodFeatures& method, const Vocabulary& vocab,
                           const Budgets& budgets, Rng& rng, double mask_ratio = 0.5);

PretrainInstance make_mng(const MethodFeatures& method, const Vocabulary& vocab,
                          const Budgets& budgets);

// Positive with probability 1/2; negatives take the X-SBT of another pool
// entry whose linearization differs. Throws CapError when none exists.
PretrainInstance make_cap(const MethodFeatures& method, const std::vector<MethodFeatures>& pool,
                          const Vocabulary& vocab, const Budgets& budgets, Rng& rng);

// Seed of the per-instance stream for (method, task, epoch).
std::uint64_t instance_seed(std::uint64_t seed, std::string_view method_id, Task task,
                            std::uint64_t epoch);

// One instance per method, each drawn from its own derived stream.
std::vector<PretrainInstance> make_instances(Task task, const std::vector<MethodFeatures>& methods,
                                             const Vocabulary& vocab, const Budgets& budgets,
                                             std::uint64_t seed, std::uint64_t epoch = 0,
                                             double mask_ratio = 0.5);

std::string instance_to_json(const PretrainInstance& instance);
PretrainInstance instance_from_json(std::string_view line);
void write_instances(const std::filesystem::path& path, const std::vector<PretrainInstance>& instances);
std::vector<PretrainInstance> read_instances(const std::filesystem::path& path);

}  // namespace codeseq
