#ifndef ORTHO_EVALUATION_HPP
#define ORTHO_EVALUATION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ortho/corpus.hpp"
#include "ortho/neural.hpp"
#include "ortho/token.hpp"

namespace ortho {

struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

double precision_of(const Counts& c);
double recall_of(const Counts& c);
double f1_of(const Counts& c);

struct ClassificationReport {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  double threshold = 0.0;
  Counts counts;
};

struct RankEntry {
  Token variant;
  Token standard;
  std::size_t rank;       // 0 = true standard absent from the lexicon
  double reciprocal_rank; // 1/rank, or 0 on a miss
};

struct RankingReport {
  double mrr = 0.0;
  double lexicon_coverage = 0.0; // fraction of true standards present
  std::vector<RankEntry> per_query;
};

struct EvalReport {
  std::optional<ClassificationReport> classification;
  std::optional<RankingReport> ranking;
};

// Pair classification at the model's calibrated threshold (match iff
// p_match >= tau). Throws DataError on an empty test set.
EvalReport classify_pairs(const NeuralEditModel& model, std::span<const LabeledPair> rows);

// Scores every (variant, lexicon candidate) pairing and ranks by p_match
// descending. The true standard's rank uses pessimistic tie handling:
// strictly-greater count plus tied count including itself.
EvalReport rank_against_lexicon(const NeuralEditModel& model, std::span<const TokenPair> queries,
                                const Lexicon& lexicon);

std::string eval_summary_csv(const EvalReport& report);
void write_ranks_tsv(const std::filesystem::path& path, const RankingReport& ranking);

struct SweepCell {
  std::string strategy;
  std::size_t n = 0;
  double f1 = 0.0;
  double mrr = 0.0;
};

// Table-2-shaped CSV: one row per (strategy, n). An empty cell list yields
// header only.
std::string sweep_report_csv(std::span<const SweepCell> cells);

} // namespace ortho

#endif
