#ifndef ORTHO_LEVENSHTEIN_HPP
#define ORTHO_LEVENSHTEIN_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ortho/token.hpp"

namespace ortho {

// Unit-cost Levenshtein distance over scalar values.
unsigned levenshtein(std::u32string_view a, std::u32string_view b);
inline unsigned levenshtein(const Token& a, const Token& b) {
  return levenshtein(a.chars(), b.chars());
}

enum class EditOpKind { Match, Substitute, Delete, Insert };

struct EditOp {
  EditOpKind kind;
  std::size_t src_pos; // position in a (for insert: position before which b's char lands)
  std::size_t tgt_pos; // position in b
  char32_t from;       // source character (match/substitute/delete)
  char32_t to;         // target character (match/substitute/insert)
};

// One optimal edit script, deterministic: ties broken by
// match > substitute > delete > insert, scanning from the string start.
std::vector<EditOp> levenshtein_alignment(const Token& a, const Token& b);

// Applies an edit script; used by tests to check scripts are valid.
Token apply_edits(const Token& a, const std::vector<EditOp>& ops);

std::string edit_op_to_string(const EditOp& op);

// Table-1 style LD distribution. LD-0 pairs are excluded from bucketing and
// counted in the side channel.
struct LdHistogram {
  std::array<std::uint64_t, 4> counts{}; // buckets LD=1, 2, 3, >=4
  std::uint64_t total = 0;               // bucketed pairs
  std::uint64_t ld_zero = 0;             // excluded identical-after-normalization pairs
  std::array<double, 4> percentages{};   // one decimal

  static constexpr const char* kBucketNames[4] = {"1LD", "2LD", "3LD", "4+LD"};
};

// Throws DataError on an empty pair sequence.
LdHistogram ld_histogram(std::span<const TokenPair> pairs);

} // namespace ortho

#endif
