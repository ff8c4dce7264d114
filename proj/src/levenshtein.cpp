#include "ortho/levenshtein.hpp"

#include <algorithm>
#include <cmath>

#include "ortho/error.hpp"
#include "ortho/utf8.hpp"

namespace ortho {

unsigned levenshtein(std::u32string_view a, std::u32string_view b) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0) return static_cast<unsigned>(n);
  if (n == 0) return static_cast<unsigned>(m);
  std::vector<unsigned> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<unsigned>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<unsigned>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      unsigned sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u);
      cur[j] = std::min({prev[j] + 1u, cur[j - 1] + 1u, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

std::vector<EditOp> levenshtein_alignment(const Token& ta, const Token& tb) {
  const std::u32string& a = ta.chars();
  const std::u32string& b = tb.chars();
  const std::size_t m = a.size(), n = b.size();
  // d[i][j] = LD of suffixes a[i:], b[j:], so ops can be chosen front to back.
  std::vector<std::vector<unsigned>> d(m + 1, std::vector<unsigned>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) d[i][n] = static_cast<unsigned>(m - i);
  for (std::size_t j = 0; j <= n; ++j) d[m][j] = static_cast<unsigned>(n - j);
  for (std::size_t i = m; i-- > 0;) {
    for (std::size_t j = n; j-- > 0;) {
      unsigned sub = d[i + 1][j + 1] + (a[i] == b[j] ? 0u : 1u);
      d[i][j] = std::min({sub, d[i + 1][j] + 1u, d[i][j + 1] + 1u});
    }
  }
  std::vector<EditOp> ops;
  std::size_t i = 0, j = 0;
  while (i < m || j < n) {
    if (i < m && j < n && a[i] == b[j] && d[i + 1][j + 1] == d[i][j]) {
      ops.push_back({EditOpKind::Match, i, j, a[i], b[j]});
      ++i, ++j;
    } else if (i < m && j < n && d[i + 1][j + 1] + 1 == d[i][j]) {
      ops.push_back({EditOpKind::Substitute, i, j, a[i], b[j]});
      ++i, ++j;
    } else if (i < m && d[i + 1][j] + 1 == d[i][j]) {
      ops.push_back({EditOpKind::Delete, i, j, a[i], 0});
      ++i;
    } else {
      ops.push_back({EditOpKind::Insert, i, j, 0, b[j]});
      ++j;
    }
  }
  return ops;
}

Token apply_edits(const Token& a, const std::vector<EditOp>& ops) {
  const std::u32string& src = a.chars();
  std::u32string out;
  std::size_t i = 0;
  for (const EditOp& op : ops) {
    switch (op.kind) {
    case EditOpKind::Match:
      if (i >= src.size() || src[i] != op.from || op.from != op.to)
        throw DataError("apply_edits: match op inconsistent with source");
      out.push_back(op.to);
      ++i;
      break;
    case EditOpKind::Substitute:
      if (i >= src.size() || src[i] != op.from)
        throw DataError("apply_edits: substitute op inconsistent with source");
      out.push_back(op.to);
      ++i;
      break;
    case EditOpKind::Delete:
      if (i >= src.size() || src[i] != op.from)
        throw DataError("apply_edits: delete op inconsistent with source");
      ++i;
      break;
    case EditOpKind::Insert:
      out.push_back(op.to);
      break;
    }
  }
  if (i != src.size()) throw DataError("apply_edits: ops do not consume the whole source");
  return Token::from_chars(std::move(out));
}

std::string edit_op_to_string(const EditOp& op) {
  switch (op.kind) {
  case EditOpKind::Match:
    return "match(" + utf8::encode_char(op.from) + ")";
  case EditOpKind::Substitute:
    return "sub(" + utf8::encode_char(op.from) + "->" + utf8::encode_char(op.to) + ")";
  case EditOpKind::Delete:
    return "del(" + utf8::encode_char(op.from) + ")";
  case EditOpKind::Insert:
    return "ins(" + utf8::encode_char(op.to) + ")";
  }
  return "?";
}

LdHistogram ld_histogram(std::span<const TokenPair> pairs) {
  if (pairs.empty()) throw DataError("ld_histogram: empty corpus");
  LdHistogram h;
  for (const TokenPair& p : pairs) {
    unsigned ld = levenshtein(p.variant, p.standard);
    if (ld == 0) {
      ++h.ld_zero;
      continue;
    }
    std::size_t bucket = ld >= 4 ? 3 : static_cast<std::size_t>(ld - 1);
    ++h.counts[bucket];
    ++h.total;
  }
  if (h.total > 0) {
    for (std::size_t k = 0; k < 4; ++k) {
      double pct = 100.0 * static_cast<double>(h.counts[k]) / static_cast<double>(h.total);
      h.percentages[k] = std::round(pct * 10.0) / 10.0;
    }
  }
  return h;
}

} // namespace ortho
