#include "ortho/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ortho/error.hpp"

namespace ortho {

double precision_of(const Counts& c) {
  std::uint64_t denom = c.tp + c.fp;
  return denom ? static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
}

double recall_of(const Counts& c) {
  std::uint64_t denom = c.tp + c.fn;
  return denom ? static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
}

double f1_of(const Counts& c) {
  double p = precision_of(c), r = recall_of(c);
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

EvalReport classify_pairs(const NeuralEditModel& model, std::span<const LabeledPair> rows) {
  if (rows.empty()) throw DataError("classify_pairs: empty test set");
  ClassificationReport rep;
  rep.threshold = model.threshold();
  for (const LabeledPair& row : rows) {
    double p = model.pair_score(row.a, row.b).p_match;
    bool predicted = p >= rep.threshold;
    if (predicted && row.is_match) ++rep.counts.tp;
    else if (predicted && !row.is_match) ++rep.counts.fp;
    else if (!predicted && row.is_match) ++rep.counts.fn;
    else ++rep.counts.tn;
  }
  rep.precision = precision_of(rep.counts);
  rep.recall = recall_of(rep.counts);
  rep.f1 = f1_of(rep.counts);
  EvalReport out;
  out.classification = std::move(rep);
  return out;
}

EvalReport rank_against_lexicon(const NeuralEditModel& model, std::span<const TokenPair> queries,
                                const Lexicon& lexicon) {
  if (lexicon.size() == 0) throw DataError("rank_against_lexicon: empty lexicon");
  RankingReport rep;
  // candidate encodings are query-independent; encode the lexicon once
  std::vector<EncodedToken> candidate_enc;
  candidate_enc.reserve(lexicon.size());
  for (const Token& c : lexicon.tokens()) candidate_enc.push_back(model.encode_token(c));

  std::size_t covered = 0;
  double rr_sum = 0.0;
  for (const TokenPair& q : queries) {
    EncodedToken variant_enc = model.encode_token(q.variant);
    double true_score = 0.0;
    bool found = false;
    std::vector<double> scores(lexicon.size());
    for (std::size_t k = 0; k < lexicon.size(); ++k) {
      scores[k] =
          pair_score_from_encodings(model, variant_enc, candidate_enc[k]).p_match;
      if (lexicon.tokens()[k] == q.standard) {
        true_score = scores[k];
        found = true;
      }
    }
    RankEntry entry{q.variant, q.standard, 0, 0.0};
    if (found) {
      ++covered;
      std::size_t greater = 0, tied = 0;
      for (double s : scores) {
        if (s > true_score) ++greater;
        else if (s == true_score) ++tied;
      }
      entry.rank = greater + tied; // pessimistic: ties count against us
      entry.reciprocal_rank = 1.0 / static_cast<double>(entry.rank);
      rr_sum += entry.reciprocal_rank;
    }
    rep.per_query.push_back(std::move(entry));
  }
  rep.mrr = queries.empty() ? 0.0 : rr_sum / static_cast<double>(queries.size());
  rep.lexicon_coverage =
      queries.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(queries.size());
  EvalReport out;
  out.ranking = std::move(rep);
  return out;
}

std::string eval_summary_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "metric,value\n";
  char buf[96];
  if (report.classification) {
    const ClassificationReport& c = *report.classification;
    std::snprintf(buf, sizeof(buf), "precision,%.6f\n", c.precision);
    out << buf;
    std::snprintf(buf, sizeof(buf), "recall,%.6f\n", c.recall);
    out << buf;
    std::snprintf(buf, sizeof(buf), "f1,%.6f\n", c.f1);
    out << buf;
    std::snprintf(buf, sizeof(buf), "threshold,%.6f\n", c.threshold);
    out << buf;
    out << "tp," << c.counts.tp << "\nfp," << c.counts.fp << "\nfn," << c.counts.fn << "\ntn,"
        << c.counts.tn << "\n";
  }
  if (report.ranking) {
    const RankingReport& r = *report.ranking;
    std::snprintf(buf, sizeof(buf), "mrr,%.6f\n", r.mrr);
    out << buf;
    std::snprintf(buf, sizeof(buf), "lexicon_coverage,%.6f\n", r.lexicon_coverage);
    out << buf;
    out << "queries," << r.per_query.size() << "\n";
  }
  return out.str();
}

void write_ranks_tsv(const std::filesystem::path& path, const RankingReport& ranking) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "variant\tstandard\trank\treciprocal_rank\n";
  char buf[64];
  for (const RankEntry& e : ranking.per_query) {
    std::snprintf(buf, sizeof(buf), "%.6f", e.reciprocal_rank);
    if (e.rank == 0) {
      out << e.variant.str() << "\t" << e.standard.str() << "\tmiss\t0.000000\n";
    } else {
      out << e.variant.str() << "\t" << e.standard.str() << "\t" << e.rank << "\t" << buf << "\n";
    }
  }
}

std::string sweep_report_csv(std::span<const SweepCell> cells) {
  std::ostringstream out;
  out << "strategy,n,f1,mrr\n";
  char buf[128];
  for (const SweepCell& c : cells) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f\n", c.strategy.c_str(), c.n, c.f1, c.mrr);
    out << buf;
  }
  return out.str();
}

} // namespace ortho
