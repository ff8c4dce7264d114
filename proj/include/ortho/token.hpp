#ifndef ORTHO_TOKEN_HPP
#define ORTHO_TOKEN_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ortho {

struct NormalizePolicy {
  bool lowercase = true;
};

// A normalized word form: non-empty, whitespace-free sequence of scalar
// values. Normalization strips surrounding punctuation but keeps apostrophes;
// a balanced quote pair ('word') is stripped, a one-sided apostrophe
// ('fraid, mars') survives.
class Token {
public:
  // Throws DataError when nothing is left after normalization.
  static Token normalize(std::string_view raw, NormalizePolicy policy = {});
  // Reject-channel variant: nullopt instead of throwing.
  static std::optional<Token> try_normalize(std::string_view raw, NormalizePolicy policy = {});
  // For already-normalized scalar sequences (tests, generated tokens).
  static Token from_chars(std::u32string chars);

  const std::u32string& chars() const { return chars_; }
  const std::string& str() const { return utf8_; }
  std::size_t length() const { return chars_.size(); }

  bool operator==(const Token& o) const { return chars_ == o.chars_; }
  auto operator<=>(const Token& o) const { return chars_ <=> o.chars_; }

private:
  explicit Token(std::u32string chars);
  std::u32string chars_;
  std::string utf8_;
};

// One supervised example: a variant form and its standard form.
struct TokenPair {
  Token variant;
  Token standard;
  std::optional<std::string> context;
  std::optional<std::string> source_id;
};

// Character vocabulary with reserved PAD/BOUNDARY and UNK slots at fixed
// indices, then observed symbols sorted by scalar value.
class Alphabet {
public:
  static constexpr std::size_t kPadIndex = 0;
  static constexpr std::size_t kUnkIndex = 1;
  static constexpr std::size_t kReserved = 2;

  static Alphabet from_symbols(std::vector<char32_t> symbols);
  static Alphabet from_tokens(const std::vector<Token>& tokens);

  std::size_t size() const { return symbols_.size() + kReserved; }
  // UNK fallback for characters outside the vocabulary.
  std::size_t index_of(char32_t c) const;
  bool has_symbol(char32_t c) const;
  // Display / serialization name: "<pad>", "<unk>", or the UTF-8 character.
  std::string symbol_name(std::size_t index) const;

  std::vector<std::size_t> encode(const Token& t) const;

  const std::vector<char32_t>& symbols() const { return symbols_; }
  bool operator==(const Alphabet& o) const { return symbols_ == o.symbols_; }

private:
  std::vector<char32_t> symbols_; // sorted, unique, index = position + kReserved
};

Alphabet alphabet_from_pairs(const std::vector<TokenPair>& pairs);

} // namespace ortho

#endif
