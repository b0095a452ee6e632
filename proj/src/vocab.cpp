#include "codeseq/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codeseq/error.hpp"
#include "codeseq/random.hpp"

namespace codeseq {
namespace {

std::string merge_key(const std::string& left, const std::string& right) {
  std::string key = left;
  key += '\0';
  key += right;
  return key;
}

bool ends_word(const std::string& piece) {
  return piece.size() >= kEndOfWord.size() &&
         std::string_view(piece).substr(piece.size() - kEndOfWord.size()) == kEndOfWord;
}

// Initial symbols of a word, with the end marker attached to the last one.
std::vector<std::string> word_symbols(std::string_view word) {
  std::vector<std::string> symbols = utf8_units(word);
  if (!symbols.empty()) symbols.back() += kEndOfWord;
  return symbols;
}

}  // namespace

std::vector<std::string> utf8_units(std::string_view text) {
  std::vector<std::string> units;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = lead < 0xF0 ? 3 : 1;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    units.emplace_back(text.substr(i, len));
    i += len;
  }
  return units;
}

Vocabulary::Vocabulary() {
  for (std::string_view name : kSpecialNames) {
    word_ids_.emplace(name, static_cast<int>(pieces_.size()));
    pieces_.emplace_back(name);
  }
}

void Vocabulary::add_word(const std::string& word) {
  if (word_ids_.emplace(word, static_cast<int>(pieces_.size())).second) {
    pieces_.push_back(word);
    ++xsbt_count_;
  }
}

int Vocabulary::add_piece(const std::string& piece) {
  const auto [it, inserted] = piece_ids_.emplace(piece, static_cast<int>(pieces_.size()));
  if (inserted) pieces_.push_back(piece);
  return it->second;
}

void Vocabulary::rebuild_ranks() {
  merge_ranks_.clear();
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    merge_ranks_.emplace(merge_key(merges_[r].first, merges_[r].second), static_cast<int>(r));
  }
}

const std::string& Vocabulary::piece(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= pieces_.size()) {
    throw DecodeError("id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(pieces_.size()));
  }
  return pieces_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::train(const std::vector<std::vector<std::string>>& token_streams,
                             const std::vector<std::string>& xsbt_words, std::size_t vocab_size) {
  Vocabulary v;
  for (const std::string& w : xsbt_words) v.add_word(w);

  // Distinct words in first-seen order with their frequencies.
  std::vector<std::vector<std::string>> words;
  std::vector<long> freqs;
  std::unordered_map<std::string, std::size_t> word_index;
  std::vector<std::string> alphabet;
  std::unordered_map<std::string, bool> in_alphabet;
  for (const auto& stream : token_streams) {
    for (const std::string& token : stream) {
      if (token.empty()) continue;
      const auto [it, inserted] = word_index.emplace(token, words.size());
      if (!inserted) {
        ++freqs[it->second];
        continue;
      }
      words.push_back(word_symbols(token));
      freqs.push_back(1);
      for (const std::string& s : words.back()) {
        if (in_alphabet.emplace(s, true).second) alphabet.push_back(s);
      }
    }
  }
  if (words.empty()) throw TrainError("cannot train a vocabulary on an empty token stream");
  if (v.pieces_.size() + alphabet.size() >= vocab_size) {
    throw TrainError("vocab size " + std::to_string(vocab_size) + " does not exceed specials, " +
                     std::to_string(v.xsbt_count_) + " X-SBT words and an alphabet of " +
                     std::to_string(alphabet.size()) + " symbols");
  }
  for (const std::string& s : alphabet) v.add_piece(s);
  v.alphabet_ = alphabet;

  // Symbols are interned so pair counting can key on integers.
  std::unordered_map<std::string, std::uint32_t> sym_ids;
  std::vector<std::string> syms;
  auto intern = [&](const std::string& s) {
    const auto [it, inserted] = sym_ids.emplace(s, static_cast<std::uint32_t>(syms.size()));
    if (inserted) syms.push_back(s);
    return it->second;
  };
  std::vector<std::vector<std::uint32_t>> seqs;
  seqs.reserve(words.size());
  for (const auto& w : words) {
    std::vector<std::uint32_t> seq;
    for (const std::string& s : w) seq.push_back(intern(s));
    seqs.push_back(std::move(seq));
  }

  std::unordered_map<std::uint64_t, std::pair<long, std::size_t>> counts;  // count, first seen
  while (v.pieces_.size() < vocab_size) {
    counts.clear();
    std::size_t order = 0;
    for (std::size_t w = 0; w < seqs.size(); ++w) {
      const auto& seq = seqs[w];
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const std::uint64_t key = (static_cast<std::uint64_t>(seq[i]) << 32) | seq[i + 1];
        auto [it, inserted] = counts.try_emplace(key, 0, order);
        if (inserted) ++order;
        it->second.first += freqs[w];
      }
    }
    std::uint64_t best = 0;
    long best_count = 0;
    std::size_t best_order = 0;
    for (const auto& [key, value] : counts) {
      if (value.first > best_count || (value.first == best_count && value.second < best_order)) {
        best = key;
        best_count = value.first;
        best_order = value.second;
      }
    }
    if (best_count < 2) break;

    const auto left = static_cast<std::uint32_t>(best >> 32);
    const auto right = static_cast<std::uint32_t>(best & 0xffffffffu);
    const std::string merged = syms[left] + syms[right];
    v.merges_.emplace_back(syms[left], syms[right]);
    v.add_piece(merged);
    const std::uint32_t merged_id = intern(merged);
    for (auto& seq : seqs) {
      if (seq.size() < 2) continue;
      std::vector<std::uint32_t> out;
      out.reserve(seq.size());
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
          out.push_back(merged_id);
          ++i;
        } else {
          out.push_back(seq[i]);
        }
      }
      seq = std::move(out);
    }
  }
  v.rebuild_ranks();
  return v;
}

std::vector<int> Vocabulary::encode_word_bpe(std::string_view word) const {
  std::vector<int> ids;
  if (word.empty()) return ids;
  for (int s = 0; s < kNumSpecials; ++s) {
    if (word == kSpecialNames[s]) return {s};
  }
  std::vector<std::string> symbols = word_symbols(word);
  while (symbols.size() > 1) {
    int best_rank = -1;
    std::size_t best_pos = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const auto it = merge_ranks_.find(merge_key(symbols[i], symbols[i + 1]));
      if (it != merge_ranks_.end() && (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank < 0) break;
    const auto& [left, right] = merges_[static_cast<std::size_t>(best_rank)];
    std::vector<std::string> out;
    out.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i >= best_pos && i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        out.push_back(left + right);
        ++i;
      } else {
        out.push_back(std::move(symbols[i]));
      }
    }
    symbols = std::move(out);
  }
  ids.reserve(symbols.size());
  for (const std::string& s : symbols) {
    const auto it = piece_ids_.find(s);
    ids.push_back(it != piece_ids_.end() ? it->second : kUnkId);
  }
  return ids;
}

std::vector<int> Vocabulary::encode_bpe(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  for (const std::string& t : tokens) {
    const std::vector<int> w = encode_word_bpe(t);
    ids.insert(ids.end(), w.begin(), w.end());
  }
  return ids;
}

std::vector<int> Vocabulary::encode_words(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) {
    const auto it = word_ids_.find(t);
    ids.push_back(it != word_ids_.end() ? it->second : kUnkId);
  }
  return ids;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens, EncodeMode mode) const {
  return mode == EncodeMode::kBpe ? encode_bpe(tokens) : encode_words(tokens);
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  std::string pending;
  auto flush = [&] {
    if (!pending.empty()) out.push_back(std::move(pending));
    pending.clear();
  };
  for (int id : ids) {
    const std::string& p = piece(id);
    if (id < kNumSpecials || is_xsbt_word(id)) {
      flush();
      out.push_back(p);
    } else if (ends_word(p)) {
      pending.append(p, 0, p.size() - kEndOfWord.size());
      flush();
    } else {
      pending += p;
    }
  }
  flush();
  return out;
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "codeseq-vocab";
  j["version"] = 1;
  nlohmann::ordered_json specials = nlohmann::ordered_json::object();
  for (int s = 0; s < kNumSpecials; ++s) specials[std::string(kSpecialNames[s])] = s;
  j["specials"] = specials;
  j["xsbt_words"] = std::vector<std::string>(pieces_.begin() + kNumSpecials,
                                             pieces_.begin() + kNumSpecials + static_cast<long>(xsbt_count_));
  j["end_of_word"] = std::string(kEndOfWord);
  j["alphabet"] = alphabet_;
  nlohmann::ordered_json merges = nlohmann::ordered_json::array();
  for (const auto& [l, r] : merges_) merges.push_back({l, r});
  j["merges"] = merges;
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

Vocabulary Vocabulary::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed vocabulary file: ") + e.what());
  }
  try {
    if (j.at("format") != "codeseq-vocab") throw IoError("not a vocabulary file");
    const auto& specials = j.at("specials");
    for (int s = 0; s < kNumSpecials; ++s) {
      if (specials.at(std::string(kSpecialNames[s])).get<int>() != s) {
        throw IoError("special token ids differ from the fixed layout");
      }
    }
    if (j.at("end_of_word").get<std::string>() != kEndOfWord) {
      throw IoError("unsupported end-of-word marker");
    }
    Vocabulary v;
    for (const auto& w : j.at("xsbt_words")) v.add_word(w.get<std::string>());
    for (const auto& a : j.at("alphabet")) {
      v.alphabet_.push_back(a.get<std::string>());
      v.add_piece(v.alphabet_.back());
    }
    for (const auto& m : j.at("merges")) {
      auto l = m.at(0).get<std::string>();
      auto r = m.at(1).get<std::string>();
      v.add_piece(l + r);
      v.merges_.emplace_back(std::move(l), std::move(r));
    }
    v.rebuild_ranks();
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed vocabulary file: ") + e.what());
  }
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary '" + path.string() + "'");
  out << to_json() << '\n';
  if (!out) throw IoError("failed writing vocabulary '" + path.string() + "'");
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::uint64_t Vocabulary::hash() const { return fnv1a64(to_json()); }

}  // namespace codeseq
