#include "ortho/negatives.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ortho/error.hpp"
#include "ortho/levenshtein.hpp"
#include "ortho/rng.hpp"

namespace ortho {

StrategyKind parse_strategy(const std::string& name) {
  if (name == "random") return StrategyKind::Random;
  if (name == "ld") return StrategyKind::Ld;
  if (name == "mixed") return StrategyKind::Mixed;
  throw UsageError("unknown negative strategy: " + name + " (expected random, ld or mixed)");
}

std::string strategy_name(StrategyKind k) {
  switch (k) {
  case StrategyKind::Random:
    return "random";
  case StrategyKind::Ld:
    return "ld";
  case StrategyKind::Mixed:
    return "mixed";
  }
  return "?";
}

namespace {

std::vector<Token> ld_nearest(const Token& variant, const std::vector<Token>& pool, std::size_t n) {
  std::vector<std::pair<unsigned, const Token*>> scored;
  scored.reserve(pool.size());
  for (const Token& c : pool) scored.emplace_back(levenshtein(variant, c), &c);
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return *x.second < *y.second;
  });
  std::vector<Token> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n && k < scored.size(); ++k) out.push_back(*scored[k].second);
  return out;
}

std::vector<Token> random_draw(const std::vector<Token>& pool, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // partial Fisher-Yates: first n entries are a uniform sample w/o replacement
  for (std::size_t i = 0; i < n && i < idx.size(); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<Token> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n && i < idx.size(); ++i) out.push_back(pool[idx[i]]);
  return out;
}

} // namespace

NegativeSet generate_negatives(std::span<const TokenPair> pairs, const Lexicon& lexicon,
                               const NegativeStrategy& strategy) {
  if (strategy.n < 1) throw UsageError("negative strategy requires n >= 1");
  if (lexicon.size() <= strategy.n + 1)
    throw DataError("lexicon too small: need more than n + 1 = " +
                    std::to_string(strategy.n + 1) + " tokens, have " +
                    std::to_string(lexicon.size()));

  // group true standards by variant so every exclusion applies at once
  std::map<Token, std::set<Token>> standards_by_variant;
  std::vector<Token> variant_order;
  for (const TokenPair& p : pairs) {
    auto [it, inserted] = standards_by_variant.try_emplace(p.variant);
    if (inserted) variant_order.push_back(p.variant);
    it->second.insert(p.standard);
  }

  NegativeSet set;
  set.kind = strategy.kind;
  set.n = strategy.n;
  set.seed = strategy.seed;

  double ld_sum = 0.0;
  std::size_t ld_count = 0;

  for (const Token& variant : variant_order) {
    const std::set<Token>& excluded_standards = standards_by_variant[variant];
    std::vector<Token> pool;
    pool.reserve(lexicon.size());
    for (const Token& c : lexicon.tokens()) {
      if (c == variant || excluded_standards.count(c)) continue;
      pool.push_back(c);
    }
    if (pool.size() < strategy.n)
      throw DataError("lexicon too small after exclusions for variant \"" + variant.str() + "\"");

    Rng rng(derive_seed(strategy.seed, "negatives", fnv1a(variant.str())));
    std::vector<Token> chosen;
    switch (strategy.kind) {
    case StrategyKind::Random:
      chosen = random_draw(pool, strategy.n, rng);
      break;
    case StrategyKind::Ld:
      chosen = ld_nearest(variant, pool, strategy.n);
      break;
    case StrategyKind::Mixed: {
      std::size_t ld_half = strategy.n / 2;
      std::size_t rand_half = strategy.n - ld_half;
      chosen = ld_nearest(variant, pool, ld_half);
      std::set<Token> taken(chosen.begin(), chosen.end());
      std::vector<Token> rest;
      rest.reserve(pool.size());
      for (const Token& c : pool)
        if (!taken.count(c)) rest.push_back(c);
      if (rest.size() < rand_half)
        throw DataError("lexicon too small after exclusions for variant \"" + variant.str() + "\"");
      std::vector<Token> rnd = random_draw(rest, rand_half, rng);
      chosen.insert(chosen.end(), rnd.begin(), rnd.end());
      break;
    }
    }
    for (Token& c : chosen) {
      ld_sum += levenshtein(variant, c);
      ++ld_count;
      set.rows.push_back({variant, std::move(c)});
    }
  }
  set.avg_ld = ld_count ? ld_sum / static_cast<double>(ld_count) : 0.0;
  return set;
}

void NegativeSet::write_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "variant\tcandidate\tlabel\tstrategy\tseed\n";
  for (const NegativeRow& r : rows) {
    out << r.variant.str() << "\t" << r.candidate.str() << "\tnon-match\t" << strategy_name(kind)
        << "\t" << seed << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

NegativeSet NegativeSet::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open negatives file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty negatives file: " + path.string());
  NegativeSet set;
  std::size_t line_no = 1;
  double ld_sum = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string variant, candidate, label, strat, seed_str;
    if (!std::getline(ss, variant, '\t') || !std::getline(ss, candidate, '\t') ||
        !std::getline(ss, label, '\t'))
      throw DataError("negatives file: malformed row at line " + std::to_string(line_no));
    std::getline(ss, strat, '\t');
    std::getline(ss, seed_str, '\t');
    NegativeRow row{Token::normalize(variant), Token::normalize(candidate)};
    ld_sum += levenshtein(row.variant, row.candidate);
    set.rows.push_back(std::move(row));
    if (!strat.empty()) set.kind = parse_strategy(strat);
    if (!seed_str.empty()) set.seed = std::stoull(seed_str);
  }
  set.avg_ld = set.rows.empty() ? 0.0 : ld_sum / static_cast<double>(set.rows.size());
  return set;
}

std::string negative_ld_report_csv(std::span<const NegativeLdRow> rows) {
  std::ostringstream out;
  out << "strategy,n,avg_ld\n";
  char buf[64];
  for (const NegativeLdRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f\n", r.strategy.c_str(), r.n, r.avg_ld);
    out << buf;
  }
  return out.str();
}

} // namespace ortho
