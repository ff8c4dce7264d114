#include "ortho/token.hpp"

#include <algorithm>
#include <unordered_map>

#include "ortho/error.hpp"
#include "ortho/utf8.hpp"

namespace ortho {

namespace {

std::u32string normalize_chars(std::string_view raw, NormalizePolicy policy) {
  std::u32string cs = utf8::decode(raw, "token");
  std::size_t b = 0, e = cs.size();
  while (b < e && (utf8::is_strippable_punct(cs[b]) || utf8::is_whitespace(cs[b]))) ++b;
  while (e > b && (utf8::is_strippable_punct(cs[e - 1]) || utf8::is_whitespace(cs[e - 1]))) --e;
  std::u32string out = cs.substr(b, e - b);
  // balanced quote pair around the word
  while (out.size() > 1 && utf8::is_apostrophe(out.front()) && utf8::is_apostrophe(out.back())) {
    out = out.substr(1, out.size() - 2);
    std::size_t b2 = 0, e2 = out.size();
    while (b2 < e2 && utf8::is_strippable_punct(out[b2])) ++b2;
    while (e2 > b2 && utf8::is_strippable_punct(out[e2 - 1])) --e2;
    out = out.substr(b2, e2 - b2);
  }
  if (policy.lowercase) {
    for (char32_t& c : out) c = utf8::to_lower(c);
  }
  for (char32_t c : out) {
    if (utf8::is_whitespace(c)) return {};
  }
  return out;
}

} // namespace

Token::Token(std::u32string chars) : chars_(std::move(chars)), utf8_(utf8::encode(chars_)) {}

Token Token::normalize(std::string_view raw, NormalizePolicy policy) {
  std::u32string cs = normalize_chars(raw, policy);
  if (cs.empty()) throw DataError("token empty after normalization: \"" + std::string(raw) + "\"");
  return Token(std::move(cs));
}

std::optional<Token> Token::try_normalize(std::string_view raw, NormalizePolicy policy) {
  std::u32string cs;
  try {
    cs = normalize_chars(raw, policy);
  } catch (const DataError&) {
    return std::nullopt;
  }
  if (cs.empty()) return std::nullopt;
  return Token(std::move(cs));
}

Token Token::from_chars(std::u32string chars) {
  if (chars.empty()) throw DataError("token must be non-empty");
  for (char32_t c : chars) {
    if (utf8::is_whitespace(c)) throw DataError("token must not contain whitespace");
  }
  return Token(std::move(chars));
}

Alphabet Alphabet::from_symbols(std::vector<char32_t> symbols) {
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
  Alphabet a;
  a.symbols_ = std::move(symbols);
  return a;
}

Alphabet Alphabet::from_tokens(const std::vector<Token>& tokens) {
  std::vector<char32_t> symbols;
  for (const Token& t : tokens)
    for (char32_t c : t.chars()) symbols.push_back(c);
  return from_symbols(std::move(symbols));
}

std::size_t Alphabet::index_of(char32_t c) const {
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), c);
  if (it != symbols_.end() && *it == c)
    return kReserved + static_cast<std::size_t>(it - symbols_.begin());
  return kUnkIndex;
}

bool Alphabet::has_symbol(char32_t c) const {
  return std::binary_search(symbols_.begin(), symbols_.end(), c);
}

std::string Alphabet::symbol_name(std::size_t index) const {
  if (index == kPadIndex) return "<pad>";
  if (index == kUnkIndex) return "<unk>";
  return utf8::encode_char(symbols_.at(index - kReserved));
}

std::vector<std::size_t> Alphabet::encode(const Token& t) const {
  std::vector<std::size_t> ids;
  ids.reserve(t.length());
  for (char32_t c : t.chars()) ids.push_back(index_of(c));
  return ids;
}

Alphabet alphabet_from_pairs(const std::vector<TokenPair>& pairs) {
  std::vector<char32_t> symbols;
  for (const TokenPair& p : pairs) {
    for (char32_t c : p.variant.chars()) symbols.push_back(c);
    for (char32_t c : p.standard.chars()) symbols.push_back(c);
  }
  return Alphabet::from_symbols(std::move(symbols));
}

} // namespace ortho
