#include "oto/metrics/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <unordered_map>

#include "oto/core/error.hpp"
#include "oto/core/text.hpp"

namespace oto::metrics {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, long> count_ngrams(std::span<const std::string> tokens, int n) {
  std::map<Ngram, long> out;
  if (static_cast<int>(tokens.size()) < n) return out;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    ++out[Ngram(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i) + n)];
  }
  return out;
}

PRFScore harmonic(double p, double r) { return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0}; }

}  // namespace

NgramCounts ngram_counts(std::span<const std::string> hypothesis, std::span<const std::string> reference, int max_n) {
  NgramCounts c;
  c.hypothesis_length = static_cast<long>(hypothesis.size());
  c.reference_length = static_cast<long>(reference.size());
  for (int n = 1; n <= max_n; ++n) {
    const auto h = count_ngrams(hypothesis, n);
    const auto r = count_ngrams(reference, n);
    long matches = 0, total = 0;
    for (const auto& [gram, count] : h) {
      total += count;
      auto it = r.find(gram);
      if (it != r.end()) matches += std::min(count, it->second);
    }
    c.matches.push_back(matches);
    c.totals.push_back(total);
  }
  return c;
}

double bleu(std::span<const SummaryPair> pairs, int max_n) {
  if (pairs.empty()) throw EmptyCorpus("BLEU needs at least one pair");
  if (max_n < 1) throw InvalidArgument("max_n must be at least 1");
  std::vector<long> matches(max_n, 0), totals(max_n, 0);
  long c = 0, r = 0;
  for (const auto& p : pairs) {
    const auto hyp = text::tokenize(p.hypothesis);
    const auto ref = text::tokenize(p.reference);
    const auto counts = ngram_counts(hyp, ref, max_n);
    for (int n = 0; n < max_n; ++n) {
      matches[n] += counts.matches[n];
      totals[n] += std::max(1L, counts.totals[n]);  // per-segment floor of 1
    }
    c += counts.hypothesis_length;
    r += counts.reference_length;
  }
  if (matches[0] == 0 || totals[0] == 0) return 0.0;
  double log_sum = std::log(static_cast<double>(matches[0]) / static_cast<double>(totals[0]));
  for (int n = 1; n < max_n; ++n) {
    log_sum += std::log((static_cast<double>(matches[n]) + 1.0) / (static_cast<double>(totals[n]) + 1.0));
  }
  const double bp = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  return bp * std::exp(log_sum / max_n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRFScore rouge_l(const SummaryPair& pair, double beta) {
  const auto ref = text::tokenize(pair.reference);
  if (ref.empty()) throw ValidationError("pair '" + pair.id + "' has an empty reference");
  const auto hyp = text::tokenize(pair.hypothesis);
  if (hyp.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  PRFScore s;
  s.precision = lcs / static_cast<double>(hyp.size());
  s.recall = lcs / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  const double denom = s.recall + b2 * s.precision;
  s.f = denom > 0.0 ? (1.0 + b2) * s.precision * s.recall / denom : 0.0;
  return s;
}

double rouge_l_corpus(std::span<const SummaryPair> pairs, double beta) {
  if (pairs.empty()) throw EmptyCorpus("ROUGE-L needs at least one pair");
  double s = 0.0;
  for (const auto& p : pairs) s += rouge_l(p, beta).f;
  return s / static_cast<double>(pairs.size());
}

PRFScore embed_f1(const SummaryPair& pair, const TokenEmbedder& embedder) {
  const auto hyp = text::tokenize(pair.hypothesis);
  const auto ref = text::tokenize(pair.reference);
  if (hyp.empty() || ref.empty()) return {};
  auto unit = [&](const std::vector<std::string>& toks) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& t : toks) {
      Eigen::VectorXd v = embedder(t);
      const double norm = v.norm();
      if (norm > 0.0) v /= norm;
      out.push_back(std::move(v));
    }
    return out;
  };
  const auto h = unit(hyp);
  const auto r = unit(ref);
  Eigen::MatrixXd sim(h.size(), r.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (h[i].size() != r[j].size()) throw ShapeError("token embedder returned vectors of different sizes");
      sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[i].dot(r[j]);
    }
  }
  const double p = sim.rowwise().maxCoeff().mean();
  const double rc = sim.colwise().maxCoeff().mean();
  return harmonic(p, rc);
}

double embed_f1_corpus(std::span<const SummaryPair> pairs, const TokenEmbedder& embedder) {
  if (pairs.empty()) throw EmptyCorpus("embedding F1 needs at least one pair");
  double s = 0.0;
  for (const auto& p : pairs) s += embed_f1(p, embedder).f;
  return s / static_cast<double>(pairs.size());
}

TokenEmbedder one_hot_embedder(const std::vector<std::string>& texts) {
  auto index = std::make_shared<std::map<std::string, Eigen::Index>>();
  for (const auto& t : texts) {
    for (const auto& w : text::tokenize(t)) index->emplace(w, 0);
  }
  Eigen::Index next = 0;
  for (auto& [w, i] : *index) i = next++;
  return [index, dim = next](const std::string& token) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(std::max<Eigen::Index>(dim, 1));
    auto it = index->find(token);
    if (it != index->end()) v(it->second) = 1.0;
    return v;
  };
}

}  // namespace oto::metrics
