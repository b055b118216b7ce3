#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "oto/core/eigen.hpp"

namespace oto::metrics {

struct SummaryPair {
  std::string id;
  std::string hypothesis;
  std::string reference;
};

struct PRFScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Clipped n-gram matches and hypothesis n-gram totals, index n-1.
struct NgramCounts {
  std::vector<long> matches;
  std::vector<long> totals;
  long hypothesis_length = 0;
  long reference_length = 0;
};

NgramCounts ngram_counts(std::span<const std::string> hypothesis, std::span<const std::string> reference, int max_n);

/// Corpus BLEU over shared-tokenizer tokens: p1 = m1/t1, pn = (mn+1)/(tn+1)
/// for n >= 2, geometric mean, brevity penalty exp(1 - r/c) when c < r.
/// Throws EmptyCorpus.
double bleu(std::span<const SummaryPair> pairs, int max_n = 4);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS precision / recall and F_beta = (1+b^2)PR / (R + b^2 P). An empty
/// hypothesis scores (0, 0, 0); an empty reference throws ValidationError.
PRFScore rouge_l(const SummaryPair& pair, double beta = 1.0);

/// Mean per-pair ROUGE-L F. Throws EmptyCorpus.
double rouge_l_corpus(std::span<const SummaryPair> pairs, double beta = 1.0);

using TokenEmbedder = std::function<Eigen::VectorXd(const std::string&)>;

/// Greedy cosine matching: P averages each hypothesis token's best match in
/// the reference, R the reverse, F their harmonic mean.
PRFScore embed_f1(const SummaryPair& pair, const TokenEmbedder& embedder);

/// Mean per-pair F. Throws EmptyCorpus.
double embed_f1_corpus(std::span<const SummaryPair> pairs, const TokenEmbedder& embedder);

/// Orthogonal unit vectors, one per distinct token of `texts`; tokens outside
/// that set map to the zero vector.
TokenEmbedder one_hot_embedder(const std::vector<std::string>& texts);

}  // namespace oto::metrics
