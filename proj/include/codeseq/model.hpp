#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codeseq/autograd.hpp"
#include "codeseq/random.hpp"

namespace codeseq {

struct ModelConfig {
  int layers = 2;
  int d_model = 128;
  int d_ff = 512;
  int heads = 4;
  double dropout = 0.1;
  int vocab_size = 8000;
  int max_source_len = 514;
  int max_target_len = 256;
  std::uint64_t seed = 0;
  double init_std = 0.02;  // weights ~ N(0, init_std^2)

  // Throws ConfigError.
  void validate() const;
  int positions() const { return std::max(max_source_len + 2, max_target_len); }

  static ModelConfig desk();
  static ModelConfig paper();
  // Named preset ("desk" | "paper"); throws ConfigError.
  static ModelConfig preset(std::string_view name);

  std::string to_json() const;
  static ModelConfig from_json(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

// Encoder-decoder transformer (pre-LN blocks, learned positions shared by
// encoder and decoder, embedding tied to the output projection) with a
// classification head read at the decoder's EOS position.
class Seq2SeqModel {
 public:
  explicit Seq2SeqModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  // Dropout is active only in training mode.
  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }

  // Logits [len(decoder_input_ids) x vocab]. Throws LengthError.
  nn::Mat forward_generation(const std::vector<int>& encoder_ids,
                             const std::vector<int>& decoder_input_ids);
  // Class logits [1 x 2] from decoder input [SOS] ++ encoder_ids ++ [EOS].
  nn::Mat forward_classification(const std::vector<int>& encoder_ids);
  // Final decoder state at the EOS position of the classification wiring.
  Eigen::VectorXd encode_representation(const std::vector<int>& ids);

  // Graph builders used by training; `rng` drives dropout.
  nn::Var generation_logits(nn::Tape& t, const std::vector<int>& encoder_ids,
                            const std::vector<int>& decoder_input_ids, Rng* rng);
  nn::Var classification_logits(nn::Tape& t, const std::vector<int>& encoder_ids, Rng* rng);
  nn::Var representation(nn::Tape& t, const std::vector<int>& ids, Rng* rng);

  struct Hypothesis {
    std::vector<int> ids;  // generated ids, ending in EOS unless max_len was hit
    double score = 0.0;    // length-normalized log-probability
  };
  // Best-first, at most beam_size entries. Throws ArgumentError for beam < 1.
  std::vector<Hypothesis> generate(const std::vector<int>& encoder_ids, int beam_size, int max_len);
  std::vector<int> greedy(const std::vector<int>& encoder_ids, int max_len);

  // Binary checkpoint: magic, JSON header (config, vocab hash, step,
  // parameter shapes), raw little-endian doubles.
  void save(const std::filesystem::path& path, std::uint64_t vocab_hash, std::uint64_t step) const;
  // Throws CompatError when expected_vocab_hash is given and differs.
  static Seq2SeqModel load(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_vocab_hash = std::nullopt,
                           std::uint64_t* step = nullptr);

 private:
  struct Block {
    nn::Parameter ln1_g, ln1_b;
    nn::Parameter q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
    nn::Parameter ln2_g, ln2_b;
    // cross-attention (decoder only)
    nn::Parameter cq_w, cq_b, ck_w, ck_b, cv_w, cv_b, co_w, co_b;
    nn::Parameter ln3_g, ln3_b;
    nn::Parameter ff1_w, ff1_b, ff2_w, ff2_b;
  };

  void init_block(Block& b, const std::string& prefix, bool decoder, Rng& rng);
  std::vector<nn::Parameter*> block_parameters(Block& b, bool decoder);
  nn::Var self_attention(nn::Tape& t, Block& b, nn::Var x, const std::vector<char>& valid,
                         bool causal, Rng* rng);
  nn::Var cross_attention(nn::Tape& t, Block& b, nn::Var x, nn::Var memory,
                          const std::vector<char>& memory_valid, Rng* rng);
  nn::Var feed_forward(nn::Tape& t, Block& b, nn::Var x, Rng* rng);
  nn::Var encode(nn::Tape& t, const std::vector<int>& ids, Rng* rng);
  nn::Var decode(nn::Tape& t, const std::vector<int>& ids, nn::Var memory,
                 const std::vector<char>& memory_valid, Rng* rng);

  ModelConfig config_;
  bool training_ = false;
  nn::Parameter embedding_, positions_, out_bias_;
  std::vector<Block> encoder_, decoder_;
  nn::Parameter enc_ln_g_, enc_ln_b_, dec_ln_g_, dec_ln_b_;
  nn::Parameter cls_w1_, cls_b1_, cls_w2_, cls_b2_;
};

}  // namespace codeseq
