#ifndef ORTHO_NEGATIVES_HPP
#define ORTHO_NEGATIVES_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ortho/corpus.hpp"
#include "ortho/token.hpp"

namespace ortho {

enum class StrategyKind { Random, Ld, Mixed };

StrategyKind parse_strategy(const std::string& name); // "random" | "ld" | "mixed"
std::string strategy_name(StrategyKind k);

struct NegativeStrategy {
  StrategyKind kind = StrategyKind::Random;
  std::size_t n = 10; // candidates per variant
  std::uint64_t seed = 0;
};

struct NegativeRow {
  Token variant;
  Token candidate; // label is always non-match
};

struct NegativeSet {
  std::vector<NegativeRow> rows;
  StrategyKind kind = StrategyKind::Random;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double avg_ld = 0.0; // mean LD from variant to its negatives

  void write_tsv(const std::filesystem::path& path) const;
  static NegativeSet load_tsv(const std::filesystem::path& path);
};

// Known-false pairings of each variant with lexicon tokens. The variant's
// true standard form(s) and the variant itself are always excluded.
//   random: uniform without replacement, seeded per variant
//   ld: the n candidates with smallest LD, ties (LD, lexicographic) ascending
//   mixed: floor(n/2) LD-nearest plus ceil(n/2) random from the remainder
// Throws DataError when the lexicon is too small after exclusions.
NegativeSet generate_negatives(std::span<const TokenPair> pairs, const Lexicon& lexicon,
                               const NegativeStrategy& strategy);

struct NegativeLdRow {
  std::string strategy;
  std::size_t n;
  double avg_ld;
};

// CSV rows for the average-LD-of-negatives report (one per set).
std::string negative_ld_report_csv(std::span<const NegativeLdRow> rows);

} // namespace ortho

#endif
