#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace codeseq {

inline constexpr int kPadId = 0;
inline constexpr int kSosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;
inline constexpr int kUnkId = 5;
inline constexpr int kNumSpecials = 6;

inline constexpr std::string_view kSpecialNames[kNumSpecials] = {"[PAD]", "[SOS]", "[EOS]",
                                                                 "[SEP]", "[MASK]", "[UNK]"};

// Marks the last symbol of a word. A private-use code point, so it never
// collides with characters taken from the corpus.
inline constexpr std::string_view kEndOfWord = "\xee\x80\x80";

enum class EncodeMode { kBpe, kXsbtWord };

// Shared id space: specials, then X-SBT words, then BPE symbols.
class Vocabulary {
 public:
  Vocabulary();

  // Learns BPE merges over the words of `token_streams` (code and NL tokens)
  // and registers `xsbt_words`. The whole table stays within vocab_size.
  // Throws TrainError on empty input or a budget below the alphabet size.
  static Vocabulary train(const std::vector<std::vector<std::string>>& token_streams,
                          const std::vector<std::string>& xsbt_words, std::size_t vocab_size);

  std::vector<int> encode(const std::vector<std::string>& tokens, EncodeMode mode) const;
  std::vector<int> encode_bpe(const std::vector<std::string>& tokens) const;
  std::vector<int> encode_words(const std::vector<std::string>& tokens) const;
  // BPE ids of a single word.
  std::vector<int> encode_word_bpe(std::string_view word) const;

  // Ids back to whole tokens. Specials render as their names. Throws
  // DecodeError on out-of-range ids.
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  std::size_t size() const { return pieces_.size(); }
  std::size_t xsbt_word_count() const { return xsbt_count_; }
  const std::string& piece(int id) const;
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  bool is_xsbt_word(int id) const { return id >= kNumSpecials && id < kNumSpecials + static_cast<int>(xsbt_count_); }

  std::string to_json() const;
  static Vocabulary from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  // FNV-1a 64 of the serialized form; checkpoints record it.
  std::uint64_t hash() const;

  bool operator==(const Vocabulary& other) const {
    return pieces_ == other.pieces_ && merges_ == other.merges_ && xsbt_count_ == other.xsbt_count_;
  }

 private:
  int add_piece(const std::string& piece);
  void add_word(const std::string& word);
  void rebuild_ranks();

  std::vector<std::string> pieces_;
  // X-SBT words and BPE symbols live in separate namespaces: "block" can be
  // both a tree kind and a word-internal symbol.
  std::unordered_map<std::string, int> word_ids_;
  std::unordered_map<std::string, int> piece_ids_;
  std::size_t xsbt_count_ = 0;
  std::vector<std::string> alphabet_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, int> merge_ranks_;  // left + '\0' + right
};

// Code points of a UTF-8 string; invalid bytes become single-byte units.
std::vector<std::string> utf8_units(std::string_view text);

}  // namespace codeseq
