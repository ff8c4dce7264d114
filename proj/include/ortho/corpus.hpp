#ifndef ORTHO_CORPUS_HPP
#define ORTHO_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ortho/token.hpp"

namespace ortho {

enum class PairFormat { GbTsv, FceTsv };

PairFormat parse_pair_format(const std::string& name); // "gb-tsv" | "fce-tsv"
std::string pair_format_name(PairFormat f);

struct RejectedRow {
  std::size_t line; // 1-based line number in the source file
  std::string reason;
  std::string raw;
};

struct LoadedPairs {
  std::vector<TokenPair> pairs;
  std::vector<RejectedRow> rejects;
};

// Header-mapped TSV ingestion. gb-tsv requires columns
// variant/standard/context/source_id; fce-tsv requires variant/standard.
// Invariant-violating rows (variant == standard after normalization, empty
// tokens) land in the rejects channel with line numbers.
LoadedPairs load_pairs(const std::filesystem::path& path, PairFormat format,
                       NormalizePolicy policy = {});

void write_pairs(const std::filesystem::path& path, std::span<const TokenPair> pairs);
void write_rejects(const std::filesystem::path& path, std::span<const RejectedRow> rejects);

// Ordered, deduplicated candidate wordlist.
class Lexicon {
public:
  static Lexicon load(const std::filesystem::path& path, std::string name = "",
                      NormalizePolicy policy = {});
  static Lexicon from_tokens(std::vector<Token> tokens, std::string name = "");

  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(const Token& t) const;
  const std::string& name() const { return name_; }

private:
  std::vector<Token> tokens_; // sorted, unique
  std::string name_;
};

struct Candidate {
  std::string token;    // surface form, normalized
  std::string sentence; // sentence-level context
};

// The candidate-extraction heuristics: a token is a possible orthovariant iff
// it has no digits, is not capitalized (sentence-initial tokens allowed when
// the lowercased form is out of lexicon), and its normalized form is absent
// from the reference lexicon.
std::vector<Candidate> extract_candidates(std::string_view text, const Lexicon& lexicon);

struct SplitSpec {
  double train = 0.8, val = 0.1, test = 0.1;
  std::uint64_t seed = 0;
  enum class Group { Pair, VariantType };
  Group group = Group::VariantType;
};

struct SplitResult {
  std::vector<TokenPair> train, val, test;
};

// Disjoint, exhaustive, seeded partition; with VariantType grouping all pairs
// sharing a variant land in one split. Sizes follow largest-remainder
// rounding. Throws UsageError when fractions do not sum to 1 +- 1e-9.
SplitResult split_pairs(std::span<const TokenPair> pairs, const SplitSpec& spec);

} // namespace ortho

#endif
