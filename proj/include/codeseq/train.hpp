#pragma once

#include <cstdint>
#include <vector>

#include "codeseq/model.hpp"
#include "codeseq/pretrain.hpp"
#include "codeseq/random.hpp"

namespace codeseq {

struct OptimizerConfig {
  double lr = 5e-5;
  std::uint64_t warmup = 2000;
  std::uint64_t total_steps = 0;  // linear decay to 0 after warmup; 0 keeps lr flat
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 1.0;  // 0 disables clipping

  double learning_rate(std::uint64_t step) const;  // step is 1-based
};

// Decoupled weight decay Adam.
class AdamW {
 public:
  explicit AdamW(OptimizerConfig config = {}) : config_(config) {}

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps() const { return step_; }
  // Applies one update from the accumulated gradients; returns the lr used.
  double step(const std::vector<nn::Parameter*>& params);

 private:
  OptimizerConfig config_;
  std::uint64_t step_ = 0;
  std::vector<nn::Mat> m_, v_;
};

// One (code, query, negative query) triple of encoded ids.
struct SearchTriple {
  std::vector<int> code_ids;
  std::vector<int> query_ids;
  std::vector<int> negative_ids;
};

inline constexpr double kSearchMargin = 0.05;

// Mean loss of a batch; with accumulate set, adds d(loss * scale)/d(theta)
// to the parameter gradients. Instances with target_ids use token-level
// cross-entropy averaged over the batch's target tokens (PAD excluded);
// instances with a label use binary cross-entropy averaged over instances.
double batch_loss(Seq2SeqModel& model, const std::vector<PretrainInstance>& batch, Rng* dropout_rng,
                  bool accumulate, double scale = 1.0);
double search_batch_loss(Seq2SeqModel& model, const std::vector<SearchTriple>& batch,
                         Rng* dropout_rng, bool accumulate, double margin = kSearchMargin,
                         double scale = 1.0);

class Trainer {
 public:
  Trainer(Seq2SeqModel& model, OptimizerConfig config, std::uint64_t seed);

  // Pre-update loss. Throws TrainError on a non-finite loss or gradient.
  double train_step(const std::vector<PretrainInstance>& batch);
  double train_step(const std::vector<SearchTriple>& batch);

  double eval_loss(const std::vector<PretrainInstance>& data, std::size_t batch_size = 32);

  AdamW& optimizer() { return optimizer_; }
  std::uint64_t steps() const { return optimizer_.steps(); }

 private:
  double finish(double loss);

  Seq2SeqModel& model_;
  AdamW optimizer_;
  Rng rng_;
};

// Central finite differences (step h) against analytic gradients of
// batch_loss for a fresh model with dropout 0; `per_tensor` entries are
// sampled from every parameter tensor. Returns the max relative error
// |a - n| / max(|a|, |n|, 1e-6).
double check_gradients(const ModelConfig& config, const std::vector<PretrainInstance>& batch,
                       std::size_t per_tensor = 4, double h = 1e-3, std::uint64_t seed = 0);

// Tiny configuration used by gradient checks.
ModelConfig tiny_config(int vocab_size = 20);

// Fraction of labelled instances whose argmax class equals the label.
double classification_accuracy(Seq2SeqModel& model, const std::vector<PretrainInstance>& data);

}  // namespace codeseq
