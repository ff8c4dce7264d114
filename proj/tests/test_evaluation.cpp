#include "doctest.h"

#include <cmath>

#include "ortho/error.hpp"
#include "ortho/evaluation.hpp"
#include "ortho/rng.hpp"

using namespace ortho;

namespace {

Token tok(const char* s) { return Token::normalize(s); }

NeuralEditModel tiny_model(std::uint64_t seed = 1) {
  Alphabet a = Alphabet::from_symbols({U'a', U'b', U'c', U'd', U'o', U'g', U't', U'x'});
  return NeuralEditModel::init(a, {.d_emb = 8, .layers = 1}, seed);
}

} // namespace

TEST_CASE("classification counts and scores") {
  NeuralEditModel m = tiny_model();

  // tau 0: everything predicted positive; all-positive labels give F1 1
  m.set_threshold(0.0);
  std::vector<LabeledPair> all_pos{{tok("ab"), tok("ab"), true}, {tok("cat"), tok("cot"), true}};
  EvalReport r = classify_pairs(m, all_pos);
  REQUIRE(r.classification.has_value());
  CHECK(r.classification->f1 == doctest::Approx(1.0));
  CHECK(r.classification->recall == doctest::Approx(1.0));
  CHECK(r.classification->counts.tp == 2);

  // inverted labels: every prediction wrong -> F1 0
  std::vector<LabeledPair> inverted{{tok("ab"), tok("ab"), false}, {tok("cat"), tok("cot"), false}};
  r = classify_pairs(m, inverted);
  CHECK(r.classification->f1 == 0.0);
  CHECK(r.classification->counts.fp == 2);

  // recall 1.0 at tau 0 regardless of labels
  std::vector<LabeledPair> mixed{{tok("ab"), tok("ab"), true}, {tok("ab"), tok("dog"), false}};
  r = classify_pairs(m, mixed);
  CHECK(r.classification->recall == doctest::Approx(1.0));

  CHECK_THROWS_AS(classify_pairs(m, {}), DataError);
}

TEST_CASE("f1 recomputes from counts") {
  NeuralEditModel m = tiny_model();
  m.set_threshold(0.4);
  std::vector<LabeledPair> rows{{tok("ab"), tok("ab"), true},   {tok("cat"), tok("cot"), true},
                                {tok("ab"), tok("dog"), false}, {tok("tag"), tok("tag"), true},
                                {tok("go"), tok("ox"), false},  {tok("dog"), tok("dog"), false}};
  EvalReport r = classify_pairs(m, rows);
  const ClassificationReport& c = *r.classification;
  double p = static_cast<double>(c.counts.tp) / std::max<std::uint64_t>(1, c.counts.tp + c.counts.fp);
  double rec = static_cast<double>(c.counts.tp) / std::max<std::uint64_t>(1, c.counts.tp + c.counts.fn);
  double f1 = (p + rec) > 0 ? 2 * p * rec / (p + rec) : 0.0;
  CHECK(std::abs(c.f1 - f1) < 1e-12);
  CHECK(c.counts.tp + c.counts.fp + c.counts.fn + c.counts.tn == rows.size());
}

TEST_CASE("mrr definition on hand-built ranks") {
  // ranks [1, 2, 4] -> MRR = (1 + 1/2 + 1/4)/3
  RankingReport rep;
  rep.per_query = {{tok("a"), tok("b"), 1, 1.0}, {tok("c"), tok("d"), 2, 0.5},
                   {tok("e"), tok("f"), 4, 0.25}};
  double mrr = 0;
  for (const RankEntry& e : rep.per_query) mrr += e.reciprocal_rank;
  mrr /= static_cast<double>(rep.per_query.size());
  CHECK(mrr == doctest::Approx(0.5833333333));
}

TEST_CASE("ranking against a lexicon") {
  NeuralEditModel m = tiny_model(3);
  std::vector<Token> lex_words{tok("cat"), tok("dog"), tok("tax")};
  Lexicon lexicon = Lexicon::from_tokens(lex_words, "small");

  SUBCASE("hand-built model scoring the true standard highest gives MRR 1") {
    // force constant logits with the target-char emission biased hard toward
    // the true standard's characters; every other candidate then pays a large
    // emission penalty somewhere
    NeuralEditModel biased = tiny_model(3);
    biased.head_w1.fill(0.0);
    biased.head_b1.fill(0.0);
    biased.head_w2.fill(0.0);
    biased.emit_src_w.fill(0.0);
    biased.emit_tgt_w.fill(0.0);
    biased.emit_tgt_b.fill(-4.0);
    for (char32_t c : std::u32string(U"cat"))
      biased.emit_tgt_b(biased.alphabet().index_of(c)) = 4.0;
    std::vector<TokenPair> queries{{tok("kat"), tok("cat"), std::nullopt, std::nullopt}};
    EvalReport r = rank_against_lexicon(biased, queries, lexicon);
    REQUIRE(r.ranking.has_value());
    CHECK(r.ranking->lexicon_coverage == doctest::Approx(1.0));
    CHECK(r.ranking->per_query[0].rank == 1);
    CHECK(r.ranking->mrr == doctest::Approx(1.0));
  }

  SUBCASE("true standard absent contributes zero and shows in coverage") {
    std::vector<TokenPair> queries{{tok("cxt"), tok("coat"), std::nullopt, std::nullopt},
                                   {tok("dxg"), tok("dog"), std::nullopt, std::nullopt}};
    EvalReport r = rank_against_lexicon(m, queries, lexicon);
    CHECK(r.ranking->lexicon_coverage == doctest::Approx(0.5));
    CHECK(r.ranking->per_query[0].rank == 0);
    CHECK(r.ranking->per_query[0].reciprocal_rank == 0.0);
    CHECK(r.ranking->per_query[1].rank >= 1);
    // MRR averages over all queries including the miss
    CHECK(r.ranking->mrr == doctest::Approx(r.ranking->per_query[1].reciprocal_rank / 2.0));
  }

  SUBCASE("empty lexicon raises") {
    std::vector<TokenPair> queries{{tok("a"), tok("b"), std::nullopt, std::nullopt}};
    CHECK_THROWS_AS(rank_against_lexicon(m, queries, Lexicon::from_tokens({}, "empty")), DataError);
  }
}

TEST_CASE("mrr is invariant under monotone score transforms") {
  // rank-based metrics only see the ordering; compare a model against itself
  // with gain scaled (a strictly monotone transform of norm_ll keeps order)
  NeuralEditModel m1 = tiny_model(9);
  NeuralEditModel m2 = m1;
  m2.match_gain(0) = m1.match_gain(0) * 3.0; // sigmoid(3gx + c) is monotone in x

  std::vector<Token> lex_words{tok("cat"), tok("dog"), tok("tax"), tok("bat"), tok("got")};
  Lexicon lexicon = Lexicon::from_tokens(lex_words, "small");
  std::vector<TokenPair> queries{{tok("cxt"), tok("cat"), std::nullopt, std::nullopt},
                                 {tok("dxg"), tok("dog"), std::nullopt, std::nullopt},
                                 {tok("bxt"), tok("bat"), std::nullopt, std::nullopt}};
  EvalReport r1 = rank_against_lexicon(m1, queries, lexicon);
  EvalReport r2 = rank_against_lexicon(m2, queries, lexicon);
  CHECK(r1.ranking->mrr == doctest::Approx(r2.ranking->mrr));
  for (std::size_t k = 0; k < queries.size(); ++k)
    CHECK(r1.ranking->per_query[k].rank == r2.ranking->per_query[k].rank);
}

TEST_CASE("pessimistic tie handling") {
  // a constant-scoring model ties every candidate: rank = lexicon size
  NeuralEditModel m = tiny_model(4);
  m.match_gain(0) = 0.0; // p_match = sigmoid(c) for every pair
  std::vector<Token> lex_words{tok("cat"), tok("dog"), tok("tax"), tok("bat")};
  Lexicon lexicon = Lexicon::from_tokens(lex_words, "small");
  std::vector<TokenPair> queries{{tok("cxt"), tok("cat"), std::nullopt, std::nullopt}};
  EvalReport r = rank_against_lexicon(m, queries, lexicon);
  CHECK(r.ranking->per_query[0].rank == 4);
  CHECK(r.ranking->mrr == doctest::Approx(0.25));
}

TEST_CASE("adding a candidate scored below everything never changes MRR") {
  NeuralEditModel m = tiny_model(5);
  std::vector<TokenPair> queries{{tok("cxt"), tok("cat"), std::nullopt, std::nullopt}};

  // score a pool of strings against the query and use the strict argmin as
  // the provably-lowest extra candidate; the rest form the lexicon
  Rng rng(404);
  std::vector<Token> pool{tok("cat"), tok("dog"), tok("tax")};
  for (int k = 0; k < 30; ++k) {
    std::u32string s;
    std::size_t len = 2 + rng.below(7);
    const std::u32string letters = U"abcdogtx";
    for (std::size_t i = 0; i < len; ++i) s.push_back(letters[rng.below(letters.size())]);
    pool.push_back(Token::from_chars(s));
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::size_t lowest = 0;
  double lowest_score = 2.0, second = 2.0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    double s = m.pair_score(queries[0].variant, pool[k]).p_match;
    if (s < lowest_score) {
      second = lowest_score;
      lowest_score = s;
      lowest = k;
    } else if (s < second) {
      second = s;
    }
  }
  REQUIRE(lowest_score < second); // strict argmin
  Token low = pool[lowest];
  REQUIRE_FALSE(low == queries[0].standard);
  std::vector<Token> lex_words;
  for (std::size_t k = 0; k < pool.size(); ++k)
    if (k != lowest) lex_words.push_back(pool[k]);

  EvalReport base = rank_against_lexicon(m, queries, Lexicon::from_tokens(lex_words, "small"));
  lex_words.push_back(low);
  EvalReport extended = rank_against_lexicon(m, queries, Lexicon::from_tokens(lex_words, "bigger"));
  CHECK(extended.ranking->mrr == doctest::Approx(base.ranking->mrr));
  CHECK(extended.ranking->per_query[0].rank == base.ranking->per_query[0].rank);
}

TEST_CASE("sweep csv shape") {
  std::vector<SweepCell> cells{{"random", 10, 0.94, 0.70}, {"mixed", 50, 0.62, 0.62}};
  std::string csv = sweep_report_csv(cells);
  CHECK(csv == "strategy,n,f1,mrr\nrandom,10,0.940000,0.700000\nmixed,50,0.620000,0.620000\n");
  CHECK(sweep_report_csv({}) == "strategy,n,f1,mrr\n");
}

TEST_CASE("summary csv carries both sections") {
  NeuralEditModel m = tiny_model(6);
  m.set_threshold(0.5);
  std::vector<LabeledPair> rows{{tok("ab"), tok("ab"), true}, {tok("ab"), tok("dog"), false}};
  EvalReport r = classify_pairs(m, rows);
  std::string csv = eval_summary_csv(r);
  CHECK(csv.find("precision,") != std::string::npos);
  CHECK(csv.find("tp,") != std::string::npos);
  CHECK(csv.find("mrr,") == std::string::npos); // no ranking section
}
