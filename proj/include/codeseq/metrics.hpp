#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "codeseq/random.hpp"

namespace codeseq {

using Tokens = std::vector<std::string>;

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);  // MathError on a zero vector

// max(0, margin - cos(c, q) + cos(c, q_neg)).
double search_loss(const Eigen::VectorXd& c, const Eigen::VectorXd& q, const Eigen::VectorXd& q_neg,
                   double margin = 0.05);

// Sentence BLEU with brevity penalty and add-one smoothing on every n >= 2
// precision, (matches + 1) / (total + 1); p1 = 0 gives 0.
double bleu(const Tokens& candidate, const Tokens& reference, int max_n = 4);
// Corpus BLEU: n-gram counts and lengths pooled before the same formula.
double corpus_bleu(const std::vector<std::pair<Tokens, Tokens>>& pairs, int max_n = 4);

std::size_t lcs_length(const Tokens& a, const Tokens& b);
double rouge_l(const Tokens& candidate, const Tokens& reference);  // F1

double mrr(const std::vector<std::size_t>& ranks);  // MetricError on empty input or rank 0

// Ids ordered by descending cosine with the query; ties by ascending id.
std::vector<std::string> rank_codebase(const Eigen::VectorXd& query,
                                       const std::vector<std::pair<std::string, Eigen::VectorXd>>& codebase);

// Lowercased with all whitespace removed.
std::string normalize_for_match(std::string_view text);
// 1 iff one of the first k candidates matches the reference after normalization.
int exact_match_at_k(const std::vector<std::string>& candidates, std::string_view reference,
                     std::size_t k);

// Random pool entry with BLEU(candidate, query) < 0.3, scanning the pool in a
// seeded random order. Throws MiningError when none qualifies.
Tokens mine_negative(const Tokens& query, const std::vector<Tokens>& pool, Rng& rng,
                     double max_bleu = 0.3);

}  // namespace codeseq
