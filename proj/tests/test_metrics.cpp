#include <gtest/gtest.h>

#include "oto/core/text.hpp"
#include "oto/metrics/classification.hpp"
#include "oto/metrics/human.hpp"
#include "oto/metrics/io.hpp"
#include "oto/metrics/report.hpp"
#include "oto/metrics/significance.hpp"
#include "oto/metrics/text.hpp"
#include "support.hpp"

using namespace oto;
using namespace oto::metrics;
using nlohmann::json;

namespace {

std::vector<SummaryPair> pairs_from(const json& arr) {
  std::vector<SummaryPair> out;
  int i = 0;
  for (const auto& p : arr) out.push_back({"p" + std::to_string(i++), p[0].get<std::string>(), p[1].get<std::string>()});
  return out;
}

std::vector<std::string> random_tokens(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  std::vector<std::string> out(rng.uniform_index(max_len + 1));
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + rng.uniform_index(alphabet)));
  return out;
}

bool is_subsequence(const std::vector<std::string>& sub, std::span<const std::string> seq) {
  std::size_t j = 0;
  for (const auto& t : seq) {
    if (j < sub.size() && sub[j] == t) ++j;
  }
  return j == sub.size();
}

// Longest common subsequence by enumerating every subsequence of `a`.
std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (1u << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

// Clipped matches by consuming reference n-grams one at a time.
long brute_clipped(const std::vector<std::string>& h, const std::vector<std::string>& r, std::size_t n) {
  std::vector<std::vector<std::string>> pool;
  for (std::size_t i = 0; i + n <= r.size(); ++i) pool.emplace_back(r.begin() + static_cast<long>(i), r.begin() + static_cast<long>(i + n));
  long matches = 0;
  for (std::size_t i = 0; i + n <= h.size(); ++i) {
    const std::vector<std::string> gram(h.begin() + static_cast<long>(i), h.begin() + static_cast<long>(i + n));
    auto it = std::find(pool.begin(), pool.end(), gram);
    if (it != pool.end()) {
      pool.erase(it);
      ++matches;
    }
  }
  return matches;
}

}  // namespace

TEST(Confusion, Examples) {
  const std::vector<int> labels{0, 0, 1}, preds{0, 1, 1};
  const auto c = confusion(preds, labels, 2);
  EXPECT_EQ(c.true_positives, (std::vector<long>{1, 1}));
  EXPECT_EQ(c.false_positives, (std::vector<long>{0, 1}));
  EXPECT_EQ(c.false_negatives, (std::vector<long>{1, 0}));
  EXPECT_EQ(c.total, 3);
  const auto prf = precision_recall_f1(c);
  EXPECT_NEAR(prf.per_class[0].f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(prf.per_class[1].f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(prf.macro.precision, 0.75, 1e-12);
  EXPECT_NEAR(prf.macro.recall, 0.75, 1e-12);
  EXPECT_NEAR(prf.macro.f1, 2.0 / 3.0, 1e-3);

  const auto empty = confusion({}, {}, 5);
  EXPECT_EQ(empty.total, 0);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(empty.true_positives[k] + empty.false_positives[k] + empty.false_negatives[k], 0);
  EXPECT_THROW(confusion(preds, std::vector<int>{0}, 2), LengthMismatch);
}

TEST(Confusion, PerfectPredictions) {
  const std::vector<int> labels{0, 1, 2, 3, 4, 4};
  const auto prf = precision_recall_f1(confusion(labels, labels));
  for (const auto& s : prf.per_class) {
    EXPECT_EQ(s.precision, 1.0);
    EXPECT_EQ(s.recall, 1.0);
    EXPECT_EQ(s.f1, 1.0);
  }
  EXPECT_EQ(macro_f1(labels, labels), 1.0);
}

TEST(ConfusionProperty, CountsConsistent) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = rng.uniform_index(40);
    std::vector<int> p(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.uniform_index(5));
      l[i] = static_cast<int>(rng.uniform_index(5));
    }
    const auto c = confusion(p, l);
    long tp = 0, fn = 0, fp = 0;
    for (int k = 0; k < 5; ++k) {
      tp += c.true_positives[k];
      fn += c.false_negatives[k];
      fp += c.false_positives[k];
    }
    ASSERT_EQ(tp + fn, c.total);
    ASSERT_EQ(tp + fp, c.total);
    const auto prf = precision_recall_f1(c);
    for (const auto& s : prf.per_class) {
      ASSERT_GE(s.f1, 0.0);
      ASSERT_LE(s.f1, 1.0);
      ASSERT_NEAR(s.f1, f1_from(s.precision, s.recall), 1e-12);
    }
  }
}

TEST(PRF, HarmonicMean) {
  EXPECT_NEAR(f1_from(0.983, 0.980), 0.981, 5e-4);
  EXPECT_EQ(f1_from(0.0, 0.0), 0.0);
}

TEST(Bleu, OracleCorpora) {
  const auto o = test::fixture_json("text_oracles.json")["bleu"];
  for (const auto& name : {"toy3", "long_hyp", "partial"}) {
    const auto pairs = pairs_from(o[name]["pairs"]);
    EXPECT_NEAR(bleu(pairs), o[name]["bleu"].get<double>(), 1e-9) << name;
  }
}

TEST(Bleu, Extremes) {
  const std::vector<SummaryPair> same{{"a", "the eardrum is red and bulging", "the eardrum is red and bulging"}};
  EXPECT_NEAR(bleu(same), 1.0, 1e-12);
  const std::vector<SummaryPair> none{{"a", "x y z", "the eardrum is red"}};
  EXPECT_EQ(bleu(none), 0.0);
  EXPECT_THROW(bleu(std::vector<SummaryPair>{}), EmptyCorpus);
}

TEST(BleuProperty, ClippedCountsMatchBruteForce) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto h = random_tokens(rng, 14, 4), r = random_tokens(rng, 14, 4);
    const auto c = ngram_counts(h, r, 4);
    for (std::size_t n = 1; n <= 4; ++n) {
      ASSERT_EQ(c.matches[n - 1], brute_clipped(h, r, n));
      ASSERT_EQ(c.totals[n - 1], static_cast<long>(h.size() >= n ? h.size() - n + 1 : 0));
    }
  }
}

TEST(RougeL, OraclePairs) {
  for (const auto& p : test::fixture_json("text_oracles.json")["rouge_l"]) {
    const auto s = rouge_l({"x", p["hypothesis"], p["reference"]});
    EXPECT_NEAR(s.precision, p["precision"].get<double>(), 1e-12);
    EXPECT_NEAR(s.recall, p["recall"].get<double>(), 1e-12);
    EXPECT_NEAR(s.f, p["f"].get<double>(), 1e-12);
  }
}

TEST(RougeL, Extremes) {
  const auto same = rouge_l({"a", "the ear", "the ear"});
  EXPECT_EQ(same.f, 1.0);
  const auto disjoint = rouge_l({"a", "x y", "the ear"});
  EXPECT_EQ(disjoint.f, 0.0);
  const auto empty = rouge_l({"a", "", "the ear"});
  EXPECT_EQ(empty.precision, 0.0);
  EXPECT_EQ(empty.f, 0.0);
  EXPECT_THROW(rouge_l({"a", "x", ""}), ValidationError);
}

TEST(RougeLProperty, LcsMatchesBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_tokens(rng, 12, 4), b = random_tokens(rng, 12, 4);
    ASSERT_EQ(lcs_length(a, b), brute_lcs(a, b));
  }
}

TEST(EmbedF1, OraclePairsOneHot) {
  const auto cases = test::fixture_json("text_oracles.json")["embed_f1_one_hot"];
  for (const auto& p : cases) {
    const std::string h = p["hypothesis"], r = p["reference"];
    const auto emb = one_hot_embedder({h, r});
    const auto s = embed_f1({"x", h, r}, emb);
    EXPECT_NEAR(s.precision, p["precision"].get<double>(), 1e-12);
    EXPECT_NEAR(s.recall, p["recall"].get<double>(), 1e-12);
    EXPECT_NEAR(s.f, p["f"].get<double>(), 1e-12);
  }
}

TEST(EmbedF1Property, SymmetryAndIdentity) {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    auto join = [](const std::vector<std::string>& t) {
      std::string s;
      for (const auto& w : t) s += w + " ";
      return s;
    };
    auto ht = random_tokens(rng, 8, 6), rt = random_tokens(rng, 8, 6);
    if (ht.empty() || rt.empty()) continue;
    const auto h = join(ht), r = join(rt);
    const auto emb = one_hot_embedder({h, r});
    const auto a = embed_f1({"x", h, r}, emb), b = embed_f1({"x", r, h}, emb);
    ASSERT_NEAR(a.precision, b.recall, 1e-12);
    ASSERT_NEAR(a.recall, b.precision, 1e-12);
    ASSERT_NEAR(a.f, b.f, 1e-12);
    ASSERT_NEAR(embed_f1({"x", h, h}, emb).f, 1.0, 1e-12);
  }
}

TEST(Significance, KnownProportions) {
  for (const auto& c : test::fixture_json("significance.json")["cases"]) {
    const auto r = two_proportion_z(c["p1"], c["p2"], c["n1"], c["n2"]);
    EXPECT_NEAR(r.z, c["z"].get<double>(), 1e-9);
    const double p = c["p_two_tailed"];
    EXPECT_NEAR(r.p_two_tailed, p, 1e-12 * std::max(p, 1e-300) + 1e-300);
    EXPECT_NEAR(r.p_two_tailed / p, 1.0, 1e-10);
  }
  const auto t2 = two_proportion_z(0.983, 0.953, 1000, 1000);
  EXPECT_NEAR(t2.z, 3.81, 5e-3);
  EXPECT_NEAR(t2.p_two_tailed, 0.00014, 5e-6);
  EXPECT_LT(two_proportion_z(0.349, 0.185, 1000, 1000).p_two_tailed, 2.22e-16);
}

TEST(Significance, EqualAndDegenerate) {
  const auto r = two_proportion_z(0.4, 0.4, 50, 70);
  EXPECT_EQ(r.z, 0.0);
  EXPECT_EQ(r.p_two_tailed, 1.0);
  EXPECT_THROW(two_proportion_z(0.0, 0.0, 10, 10), DegenerateProportion);
  EXPECT_THROW(two_proportion_z(1.0, 1.0, 10, 10), DegenerateProportion);
  EXPECT_THROW(two_proportion_z(1.2, 0.5, 10, 10), InvalidArgument);
  EXPECT_THROW(two_proportion_z(0.2, 0.5, 0, 10), InvalidArgument);
}

TEST(SignificanceProperty, SymmetryAndMonotonicity) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p1 = rng.uniform(0.01, 0.99), p2 = rng.uniform(0.01, 0.99);
    const long n1 = 1 + static_cast<long>(rng.uniform_index(2000)), n2 = 1 + static_cast<long>(rng.uniform_index(2000));
    const auto a = two_proportion_z(p1, p2, n1, n2), b = two_proportion_z(p2, p1, n2, n1);
    ASSERT_NEAR(a.z, -b.z, 1e-12);
    ASSERT_NEAR(a.p_two_tailed, b.p_two_tailed, 1e-15);
    ASSERT_GE(a.p_two_tailed, 0.0);
    ASSERT_LE(a.p_two_tailed, 1.0);
  }
  double prev = 1.0;
  for (double z = 0.0; z <= 10.0; z += 0.25) {
    const double p = normal_two_tailed_p(z);
    ASSERT_LE(p, prev);
    ASSERT_EQ(p, normal_two_tailed_p(-z));
    prev = p;
  }
}

TEST(Human, AggregateFixture) {
  HumanRatings h;
  h.ratings = read_ratings_csv(test::fixture("ratings.csv"));
  h.faithfulness = read_faithfulness_csv(test::fixture("faithfulness.csv"));
  const auto s = aggregate_human_ratings(h);
  const auto ref = test::fixture_json("human.json");
  EXPECT_NEAR(s.mean_rating, ref["mean_rating"].get<double>(), 1e-12);
  EXPECT_EQ(s.rating_count, ref["count"].get<long>());
  ASSERT_TRUE(s.faithfulness_percent.has_value());
  EXPECT_NEAR(*s.faithfulness_percent, 92.0, 1e-12);
}

TEST(Human, SmallCases) {
  HumanRatings all3;
  all3.ratings = {{"s1", "a", 3}, {"s2", "a", 3}};
  all3.faithfulness = {{"s1", true}, {"s2", true}};
  const auto a = aggregate_human_ratings(all3);
  EXPECT_EQ(a.mean_rating, 3.0);
  EXPECT_EQ(*a.faithfulness_percent, 100.0);

  HumanRatings one;
  one.ratings = {{"s1", "a", 1}, {"s1", "b", 2}, {"s1", "c", 3}};
  const auto b = aggregate_human_ratings(one);
  EXPECT_EQ(b.mean_rating, 2.0);
  EXPECT_EQ(b.sample_count, 1);
  EXPECT_FALSE(b.faithfulness_percent.has_value());

  EXPECT_THROW(aggregate_human_ratings({}), EmptyRatings);
  HumanRatings bad;
  bad.ratings = {{"s1", "a", 4}};
  EXPECT_THROW(aggregate_human_ratings(bad), ValidationError);
}

TEST(Io, TextRecordsAndPairing) {
  const auto recs = parse_text_records("a\thello world\nb\tsecond line\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].text, "second line");
  EXPECT_THROW(parse_text_records("no tab here\n"), ParseError);
  EXPECT_THROW(parse_text_records("a\tx\na\ty\n"), ParseError);

  const auto hyps = read_text_records(test::fixture("hyps.tsv"));
  const auto refs = read_text_records(test::fixture("refs.tsv"));
  EXPECT_EQ(pair_records(hyps, refs).size(), hyps.size());
  try {
    pair_records(refs, hyps);
    FAIL();
  } catch (const MissingReference& e) {
    EXPECT_NE(std::string(e.what()).find("s5"), std::string::npos);
  }

  test::TempDir dir;
  write_text_records(dir / "out.tsv", {{"x", "tab\tinside"}});
  EXPECT_EQ(read_text_records(dir / "out.tsv")[0].text, "tab inside");
}

TEST(Io, CsvErrors) {
  EXPECT_THROW(parse_ratings_csv("wrong,header,here\n"), ParseError);
  EXPECT_THROW(parse_ratings_csv("sample_id,annotator_id,rating\ns1,a,x\n"), ParseError);
  EXPECT_THROW(parse_faithfulness_csv("sample_id,error_free\ns1,2\n"), ParseError);
  EXPECT_EQ(parse_faithfulness_csv("sample_id,error_free\ns1,1\ns2,0\n").size(), 2u);
}

TEST(Report, JsonShape) {
  MetricsReport r;
  const std::vector<int> all{0, 1, 2, 3, 4};
  r.classification = precision_recall_f1(confusion(all, all));
  r.summarization = SummarizationScores{0.5, 0.6, 0.7, 3};
  r.significance.push_back({"f1", two_proportion_z(0.983, 0.953, 1000, 1000)});
  const auto j = to_json(r);
  EXPECT_TRUE(j["classification"].contains("per_class"));
  EXPECT_TRUE(j["classification"]["per_class"].contains("AcuteOtitisMedia"));
  EXPECT_EQ(j["classification"]["macro"]["f1"], 1.0);
  EXPECT_EQ(j["summarization"]["bleu"], 0.5);
  EXPECT_EQ(j["significance"][0]["name"], "f1");
  EXPECT_EQ(render_report(r), render_report(r));
}

TEST(Purity, IdenticalInputsIdenticalOutputs) {
  const auto pairs = pairs_from(test::fixture_json("text_oracles.json")["bleu"]["toy3"]["pairs"]);
  EXPECT_EQ(bleu(pairs), bleu(pairs));
  EXPECT_EQ(rouge_l_corpus(pairs), rouge_l_corpus(pairs));
}
