#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ortho/error.hpp"
#include "ortho/memoryless.hpp"
#include "support/oracles.hpp"

using namespace ortho;

namespace {

TokenPair mk(const char* v, const char* s) {
  return {Token::normalize(v), Token::normalize(s), std::nullopt, std::nullopt};
}

std::vector<TokenPair> random_pairs(std::size_t count, Rng& rng) {
  std::vector<TokenPair> pairs;
  while (pairs.size() < count) {
    std::u32string a, b;
    std::size_t la = 1 + rng.below(5), lb = 1 + rng.below(5);
    for (std::size_t k = 0; k < la; ++k) a.push_back(U'a' + static_cast<char32_t>(rng.below(4)));
    for (std::size_t k = 0; k < lb; ++k) b.push_back(U'a' + static_cast<char32_t>(rng.below(4)));
    pairs.push_back({Token::from_chars(a), Token::from_chars(b), std::nullopt, std::nullopt});
  }
  return pairs;
}

} // namespace

TEST_CASE("uniform model is a single joint distribution") {
  Alphabet a = alphabet_from_pairs({mk("ab", "ba")});
  MemorylessEditModel m = MemorylessEditModel::uniform(a);
  CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("one EM step on a single identity pair concentrates on sub(a,a)") {
  std::vector<TokenPair> pairs{{Token::from_chars(U"a"), Token::from_chars(U"a"), std::nullopt,
                                std::nullopt}};
  Alphabet alphabet = alphabet_from_pairs(pairs);
  REQUIRE(alphabet.size() == 3); // pad, unk, a

  // hand EM step over the 3-path lattice with uniform p = 1/15:
  //   sub path mass 1/15, the two del+ins paths 1/225 each
  //   posteriors: sub 15/17, del 2/17, ins 2/17
  //   M-step (floor 0): p(sub(a,a)) = 15/19
  MemorylessEditModel m = em_fit_memoryless(pairs, alphabet, 1, 0.0);
  std::size_t ai = alphabet.index_of(U'a');
  double p_sub_aa = std::exp(m.sub_logp(ai, ai));
  CHECK(p_sub_aa == doctest::Approx(15.0 / 19.0).epsilon(1e-12));
  double best = -1.0;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    for (std::size_t j = 0; j < alphabet.size(); ++j) best = std::max(best, std::exp(m.sub_logp(i, j)));
    best = std::max({best, std::exp(m.del_logp(i)), std::exp(m.ins_logp(i))});
  }
  CHECK(p_sub_aa == doctest::Approx(best));
  CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.trained());
}

TEST_CASE("EM log-likelihood history is non-decreasing") {
  Rng rng(99);
  std::vector<TokenPair> pairs = random_pairs(50, rng);
  Alphabet alphabet = alphabet_from_pairs(pairs);
  MemorylessEditModel m = em_fit_memoryless(pairs, alphabet, 10, 1e-6);
  REQUIRE(m.loglik_history().size() == 10);
  for (std::size_t k = 1; k < m.loglik_history().size(); ++k) {
    CHECK(m.loglik_history()[k] >= m.loglik_history()[k - 1] - 1e-10);
  }
  // and it actually learned something
  CHECK(m.loglik_history().back() > m.loglik_history().front());
}

TEST_CASE("floor 0 zeroes parameters of unseen characters") {
  std::vector<TokenPair> pairs{mk("ab", "ba"), mk("aa", "ab")};
  std::vector<char32_t> symbols{U'a', U'b', U'z'};
  Alphabet alphabet = Alphabet::from_symbols(symbols);
  MemorylessEditModel m = em_fit_memoryless(pairs, alphabet, 2, 0.0);
  std::size_t zi = alphabet.index_of(U'z');
  CHECK(std::exp(m.del_logp(zi)) == 0.0);
  CHECK(std::exp(m.ins_logp(zi)) == 0.0);
  for (std::size_t k = 0; k < alphabet.size(); ++k) {
    CHECK(std::exp(m.sub_logp(zi, k)) == 0.0);
    CHECK(std::exp(m.sub_logp(k, zi)) == 0.0);
  }
}

TEST_CASE("memoryless grid is position-independent and UNK-mapped") {
  std::vector<TokenPair> pairs{mk("aba", "aab")};
  Alphabet alphabet = alphabet_from_pairs(pairs);
  MemorylessEditModel m = em_fit_memoryless(pairs, alphabet, 2, 1e-6);
  Token s = Token::from_chars(U"aba"), t = Token::from_chars(U"aab");
  CostGrid g = m.cost_grid(s, t);
  // source char 'a' at rows 1 and 3: identical del entries
  CHECK(g.del(1, 0) == g.del(3, 0));
  CHECK(g.del(1, 2) == g.del(3, 2));
  // sub of (a, a) wherever it occurs
  CHECK(g.sub(1, 1) == g.sub(3, 2));

  // characters outside the alphabet use UNK parameters
  Token rare = Token::from_chars(U"axa");
  CostGrid g2 = m.cost_grid(rare, t);
  CHECK(g2.del(2, 0) == m.del_logp(Alphabet::kUnkIndex));
}

TEST_CASE("per-cell renormalized grid is probability mode") {
  Rng rng(5);
  std::vector<TokenPair> pairs = random_pairs(10, rng);
  Alphabet alphabet = alphabet_from_pairs(pairs);
  MemorylessEditModel m = em_fit_memoryless(pairs, alphabet, 3, 1e-6);
  Token a = pairs[0].variant, b = pairs[0].standard;
  CHECK_FALSE(m.cost_grid(a, b, MemorylessEditModel::GridMode::Joint).is_probability_mode());
  CHECK(m.cost_grid(a, b, MemorylessEditModel::GridMode::PerCell).is_probability_mode(1e-9));
}

TEST_CASE("em errors") {
  Alphabet alphabet = Alphabet::from_symbols({U'a'});
  CHECK_THROWS_AS(em_fit_memoryless({}, alphabet, 1, 0.0), DataError);
  std::vector<TokenPair> pairs{mk("a", "b")};
  CHECK_THROWS_AS(em_fit_memoryless(pairs, alphabet, 0, 0.0), UsageError);
}

TEST_CASE("text serialization round-trips") {
  Rng rng(17);
  std::vector<TokenPair> pairs = random_pairs(20, rng);
  Alphabet alphabet = alphabet_from_pairs(pairs);
  MemorylessEditModel m = em_fit_memoryless(pairs, alphabet, 3, 1e-6);

  std::filesystem::path path = std::filesystem::temp_directory_path() / "ortho_memoryless_test.tsv";
  m.save(path);
  MemorylessEditModel loaded = MemorylessEditModel::load(path);
  CHECK(loaded.alphabet() == m.alphabet());
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    CHECK(loaded.del_logp(i) == m.del_logp(i));
    CHECK(loaded.ins_logp(i) == m.ins_logp(i));
    for (std::size_t j = 0; j < alphabet.size(); ++j) CHECK(loaded.sub_logp(i, j) == m.sub_logp(i, j));
  }
  std::filesystem::remove(path);
}

TEST_CASE("loading a file with a bad header fails") {
  std::filesystem::path path = std::filesystem::temp_directory_path() / "ortho_memoryless_bad.tsv";
  std::ofstream(path) << "not a model\n";
  CHECK_THROWS_AS(MemorylessEditModel::load(path), DataError);
  std::filesystem::remove(path);
}
