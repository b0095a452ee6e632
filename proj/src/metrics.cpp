#include "codeseq/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "codeseq/error.hpp"

namespace codeseq {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw MathError("cosine of vectors with different dimensions");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw MathError("cosine similarity of a zero vector");
  return a.dot(b) / (na * nb);
}

double search_loss(const Eigen::VectorXd& c, const Eigen::VectorXd& q, const Eigen::VectorXd& q_neg,
                   double margin) {
  return std::max(0.0, margin - cosine(c, q) + cosine(c, q_neg));
}

namespace {

struct BleuCounts {
  std::array<std::size_t, 8> matches{};
  std::array<std::size_t, 8> totals{};
  std::size_t candidate_len = 0;
  std::size_t reference_len = 0;
};

void add_counts(BleuCounts& counts, const Tokens& cand, const Tokens& ref, int max_n) {
  counts.candidate_len += cand.size();
  counts.reference_len += ref.size();
  for (int n = 1; n <= max_n; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_grams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= ref.size(); ++i) {
      ++ref_grams[Tokens(ref.begin() + static_cast<long>(i), ref.begin() + static_cast<long>(i) + n)];
    }
    std::map<std::vector<std::string>, std::size_t> cand_grams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cand.size(); ++i) {
      ++cand_grams[Tokens(cand.begin() + static_cast<long>(i), cand.begin() + static_cast<long>(i) + n)];
    }
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand_grams) {
      total += count;
      const auto it = ref_grams.find(gram);
      if (it != ref_grams.end()) matched += std::min(count, it->second);
    }
    counts.matches[static_cast<std::size_t>(n - 1)] += matched;
    counts.totals[static_cast<std::size_t>(n - 1)] += total;
  }
}

double bleu_from(const BleuCounts& counts, int max_n) {
  if (counts.candidate_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto m = static_cast<double>(counts.matches[static_cast<std::size_t>(n - 1)]);
    const auto t = static_cast<double>(counts.totals[static_cast<std::size_t>(n - 1)]);
    double p;
    if (n == 1) {
      if (m == 0.0) return 0.0;
      p = m / t;
    } else {
      p = (m + 1.0) / (t + 1.0);  // add-one
    }
    log_sum += std::log(p);
  }
  const auto c = static_cast<double>(counts.candidate_len);
  const auto r = static_cast<double>(counts.reference_len);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / max_n);
}

void check_order(int max_n) {
  if (max_n < 1 || max_n > 8) throw ArgumentError("BLEU order must lie in [1, 8]");
}

}  // namespace

double bleu(const Tokens& candidate, const Tokens& reference, int max_n) {
  check_order(max_n);
  if (reference.empty()) throw MetricError("empty BLEU reference");
  BleuCounts counts;
  add_counts(counts, candidate, reference, max_n);
  return bleu_from(counts, max_n);
}

double corpus_bleu(const std::vector<std::pair<Tokens, Tokens>>& pairs, int max_n) {
  check_order(max_n);
  if (pairs.empty()) throw MetricError("corpus BLEU over no pairs");
  BleuCounts counts;
  for (const auto& [cand, ref] : pairs) {
    if (ref.empty()) throw MetricError("empty BLEU reference");
    add_counts(counts, cand, ref, max_n);
  }
  return bleu_from(counts, max_n);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (reference.empty()) throw MetricError("empty ROUGE-L reference");
  const std::size_t lcs = lcs_length(candidate, reference);
  if (lcs == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(candidate.size());
  const double r = static_cast<double>(lcs) / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

double mrr(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) throw MetricError("MRR over no queries");
  double sum = 0.0;
  for (const std::size_t r : ranks) {
    if (r == 0) throw MetricError("ranks start at 1");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

std::vector<std::string> rank_codebase(const Eigen::VectorXd& query,
                                       const std::vector<std::pair<std::string, Eigen::VectorXd>>& codebase) {
  if (codebase.empty()) throw MetricError("empty codebase");
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(codebase.size());
  for (const auto& [id, vec] : codebase) {
    if (vec.size() != query.size()) throw MetricError("codebase vector dimension differs from the query");
    scored.emplace_back(cosine(query, vec), &id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> ids;
  ids.reserve(scored.size());
  for (const auto& s : scored) ids.push_back(*s.second);
  return ids;
}

std::string normalize_for_match(std::string_view text) {
  std::string out;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

int exact_match_at_k(const std::vector<std::string>& candidates, std::string_view reference, std::size_t k) {
  const std::string ref = normalize_for_match(reference);
  for (std::size_t i = 0; i < std::min(k, candidates.size()); ++i) {
    if (normalize_for_match(candidates[i]) == ref) return 1;
  }
  return 0;
}

Tokens mine_negative(const Tokens& query, const std::vector<Tokens>& pool, Rng& rng, double max_bleu) {
  if (pool.size() < 2) throw MiningError("negative mining needs at least two pool entries");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  for (const std::size_t i : order) {
    const Tokens& candidate = pool[i];
    if (candidate.empty() || candidate == query) continue;
    if (query.empty() || bleu(candidate, query) < max_bleu) return candidate;
  }
  throw MiningError("no pool entry has BLEU below " + std::to_string(max_bleu) + " against the query");
}

}  // namespace codeseq
