#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "codeseq/model.hpp"
#include "codeseq/pretrain.hpp"
#include "codeseq/schedule.hpp"
#include "codeseq/tasks.hpp"

namespace codeseq {

// Flat `key = value` text with optional [section] headers (keys become
// "section.key"), '#' comments, quoted strings, numbers and booleans.
// Throws ConfigError with the line number on malformed input.
std::map<std::string, std::string> parse_key_values(std::string_view text);

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string languages = "java,python";
  std::string preset = "desk";
  // Overrides on top of the preset.
  std::optional<int> layers, d_model, d_ff, heads;
  std::optional<double> dropout;
  Budgets budgets;
  std::size_t vocab_size = 8000;
  double split_train = 0.8, split_dev = 0.1, split_test = 0.1;
  std::string schedule = "cap:10,mass:30,mng:30";
  std::size_t pretrain_batch_size = 32;
  double pretrain_lr = 5e-5;
  std::size_t pretrain_warmup = 2000;
  double mask_ratio = 0.5;
  double weight_decay = 0.01;
  std::size_t finetune_steps = 1000;
  std::size_t finetune_batch_size = 32;
  double finetune_lr = 5e-5;
  std::size_t finetune_warmup = 2000;
  std::size_t eval_every = 0;
  std::size_t beam = 5;
  std::size_t max_len = 64;
  bool sentence_bleu = false;

  // Applies parsed keys; unknown keys or bad values throw ConfigError.
  void apply(const std::map<std::string, std::string>& values);
  static RunConfig load(const std::filesystem::path& path);

  std::set<Language> language_set() const;
  ModelConfig model_config(int vocab_size) const;
  PretrainConfig pretrain_config() const;
  FinetuneConfig finetune_config() const;
  GenerationEvalOptions eval_options() const;
};

}  // namespace codeseq
