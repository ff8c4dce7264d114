#include "ortho/utf8.hpp"

#include "ortho/error.hpp"

namespace ortho::utf8 {

namespace {

[[noreturn]] void bad(std::string_view where, std::size_t pos) {
  std::string msg = "invalid UTF-8";
  if (!where.empty()) {
    msg += " in ";
    msg += where;
  }
  msg += " at byte offset " + std::to_string(pos);
  throw DataError(msg);
}

} // namespace

std::u32string decode(std::string_view bytes, std::string_view where) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xe0) == 0xc0) {
      cp = b0 & 0x1f;
      len = 2;
    } else if ((b0 & 0xf0) == 0xe0) {
      cp = b0 & 0x0f;
      len = 3;
    } else if ((b0 & 0xf8) == 0xf0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      bad(where, i);
    }
    if (i + len > bytes.size()) bad(where, i);
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xc0) != 0x80) bad(where, i + k);
      cp = (cp << 6) | (bk & 0x3f);
    }
    // reject overlong encodings and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xd800 && cp <= 0xdfff) || cp > 0x10ffff) {
      bad(where, i);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_char(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
  }
  return out;
}

std::string encode(std::u32string_view chars) {
  std::string out;
  out.reserve(chars.size());
  for (char32_t c : chars) out += encode_char(c);
  return out;
}

bool is_whitespace(char32_t c) {
  switch (c) {
  case U' ':
  case U'\t':
  case U'\n':
  case U'\r':
  case U'\f':
  case U'\v':
  case 0x00a0:  // no-break space
  case 0x2028:
  case 0x2029:
    return true;
  default:
    return c >= 0x2000 && c <= 0x200a;
  }
}

bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  // Latin-1 uppercase block, except U+00D7 (multiplication sign)
  if (c >= 0xc0 && c <= 0xde && c != 0xd7) return c + 32;
  return c;
}

bool is_upper(char32_t c) {
  if (c >= U'A' && c <= U'Z') return true;
  return c >= 0xc0 && c <= 0xde && c != 0xd7;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

bool is_strippable_punct(char32_t c) {
  if (is_apostrophe(c)) return false;
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) ||
           (c >= 0x5b && c <= 0x60) || (c >= 0x7b && c <= 0x7e);
  }
  switch (c) {
  case 0x2018: // left single quote
  case 0x201c:
  case 0x201d: // double quotes
  case 0x2013:
  case 0x2014: // dashes
  case 0x00ab:
  case 0x00bb: // guillemets
  case 0x2026: // ellipsis
  case 0x00a1:
  case 0x00bf: // inverted ! ?
    return true;
  default:
    return false;
  }
}

} // namespace ortho::utf8
