#ifndef ORTHO_UTF8_HPP
#define ORTHO_UTF8_HPP

#include <string>
#include <string_view>

namespace ortho::utf8 {

// Decodes UTF-8 to scalar values. Throws DataError on malformed input;
// `where` is prepended to the message for line context.
std::u32string decode(std::string_view bytes, std::string_view where = {});

std::string encode(std::u32string_view chars);
std::string encode_char(char32_t c);

bool is_whitespace(char32_t c);
bool is_ascii_digit(char32_t c);

// ASCII + Latin-1 case handling; other scripts pass through unchanged.
char32_t to_lower(char32_t c);
bool is_upper(char32_t c);

// Apostrophe family (U+0027, U+2019) is never treated as strippable
// punctuation; variant forms carry meaningful apostrophes.
bool is_apostrophe(char32_t c);
bool is_strippable_punct(char32_t c);

} // namespace ortho::utf8

#endif
