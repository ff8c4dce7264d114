#include "ortho/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ortho/error.hpp"
#include "ortho/rng.hpp"
#include "ortho/utf8.hpp"

namespace ortho {

PairFormat parse_pair_format(const std::string& name) {
  if (name == "gb-tsv") return PairFormat::GbTsv;
  if (name == "fce-tsv") return PairFormat::FceTsv;
  throw UsageError("unknown pair format: " + name + " (expected gb-tsv or fce-tsv)");
}

std::string pair_format_name(PairFormat f) {
  return f == PairFormat::GbTsv ? "gb-tsv" : "fce-tsv";
}

namespace {

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string f;
  std::stringstream ss(line);
  while (std::getline(ss, f, '\t')) fields.push_back(f);
  if (!line.empty() && line.back() == '\t') fields.push_back("");
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

} // namespace

LoadedPairs load_pairs(const std::filesystem::path& path, PairFormat format,
                       NormalizePolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty corpus file: " + path.string());
  line = strip_cr(line);
  utf8::decode(line, path.string() + ":1");

  std::vector<std::string> header = split_tsv(line);
  auto col = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  std::ptrdiff_t c_variant = col("variant");
  std::ptrdiff_t c_standard = col("standard");
  std::ptrdiff_t c_context = col("context");
  std::ptrdiff_t c_source = col("source_id");
  std::vector<std::string> missing;
  if (c_variant < 0) missing.push_back("variant");
  if (c_standard < 0) missing.push_back("standard");
  if (format == PairFormat::GbTsv) {
    if (c_context < 0) missing.push_back("context");
    if (c_source < 0) missing.push_back("source_id");
  }
  if (!missing.empty()) {
    std::string msg = "missing column(s) in " + path.string() + " header:";
    for (const std::string& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  LoadedPairs out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    utf8::decode(line, path.string() + ":" + std::to_string(line_no));
    std::vector<std::string> fields = split_tsv(line);
    std::size_t needed = static_cast<std::size_t>(std::max(c_variant, c_standard)) + 1;
    if (fields.size() < needed) {
      out.rejects.push_back({line_no, "too few columns", line});
      continue;
    }
    std::optional<Token> variant = Token::try_normalize(fields[c_variant], policy);
    std::optional<Token> standard = Token::try_normalize(fields[c_standard], policy);
    if (!variant || !standard) {
      out.rejects.push_back({line_no, "empty token after normalization", line});
      continue;
    }
    if (*variant == *standard) {
      out.rejects.push_back({line_no, "variant equals standard after normalization", line});
      continue;
    }
    TokenPair p{std::move(*variant), std::move(*standard), std::nullopt, std::nullopt};
    if (c_context >= 0 && static_cast<std::size_t>(c_context) < fields.size() &&
        !fields[c_context].empty())
      p.context = fields[c_context];
    if (c_source >= 0 && static_cast<std::size_t>(c_source) < fields.size() &&
        !fields[c_source].empty())
      p.source_id = fields[c_source];
    out.pairs.push_back(std::move(p));
  }
  return out;
}

void write_pairs(const std::filesystem::path& path, std::span<const TokenPair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "variant\tstandard\tcontext\tsource_id\n";
  for (const TokenPair& p : pairs) {
    out << p.variant.str() << "\t" << p.standard.str() << "\t" << p.context.value_or("") << "\t"
        << p.source_id.value_or("") << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void write_rejects(const std::filesystem::path& path, std::span<const RejectedRow> rejects) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "line\treason\traw\n";
  for (const RejectedRow& r : rejects) out << r.line << "\t" << r.reason << "\t" << r.raw << "\n";
}

Lexicon Lexicon::load(const std::filesystem::path& path, std::string name, NormalizePolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon file: " + path.string());
  std::vector<Token> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    utf8::decode(line, path.string() + ":" + std::to_string(line_no));
    if (std::optional<Token> t = Token::try_normalize(line, policy)) tokens.push_back(std::move(*t));
  }
  if (tokens.empty()) throw DataError("empty lexicon: " + path.string());
  return from_tokens(std::move(tokens), name.empty() ? path.stem().string() : std::move(name));
}

Lexicon Lexicon::from_tokens(std::vector<Token> tokens, std::string name) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  Lexicon l;
  l.tokens_ = std::move(tokens);
  l.name_ = std::move(name);
  return l;
}

bool Lexicon::contains(const Token& t) const {
  return std::binary_search(tokens_.begin(), tokens_.end(), t);
}

namespace {

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> abbr = {"mr",  "mrs", "dr",  "st",  "jr",  "sr", "prof",
                                             "col", "gen", "capt", "etc", "vs",  "no", "vol"};
  return abbr;
}

struct RawToken {
  std::u32string chars;
  bool sentence_initial;
};

// Whitespace-and-punctuation tokenizer keeping internal apostrophes and
// hyphens; sentence boundaries on [.!?] + whitespace + uppercase, with an
// abbreviation guard.
std::vector<std::vector<RawToken>> split_sentences(const std::u32string& text) {
  std::vector<std::vector<RawToken>> sentences;
  std::vector<RawToken> current;
  std::u32string word;
  bool at_sentence_start = true;

  auto flush_word = [&]() {
    if (!word.empty()) {
      current.push_back({word, at_sentence_start});
      at_sentence_start = false;
      word.clear();
    }
  };
  auto flush_sentence = [&]() {
    flush_word();
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
    at_sentence_start = true;
  };

  const std::size_t len = text.size();
  for (std::size_t i = 0; i < len; ++i) {
    char32_t c = text[i];
    if (utf8::is_whitespace(c)) {
      flush_word();
      continue;
    }
    if (c == U'.' || c == U'!' || c == U'?') {
      bool is_abbrev = false;
      if (c == U'.' && !word.empty()) {
        std::u32string low;
        for (char32_t wc : word) low.push_back(utf8::to_lower(wc));
        is_abbrev = abbreviations().count(utf8::encode(low)) > 0;
      }
      // boundary requires whitespace then an uppercase letter (or end of text)
      std::size_t k = i + 1;
      bool saw_ws = false;
      while (k < len && utf8::is_whitespace(text[k])) {
        saw_ws = true;
        ++k;
      }
      bool boundary = !is_abbrev && (k == len || (saw_ws && utf8::is_upper(text[k])));
      if (boundary) {
        flush_sentence();
      } else {
        flush_word();
      }
      continue;
    }
    bool internal = (utf8::is_apostrophe(c) || c == U'-') && !word.empty() && i + 1 < len &&
                    !utf8::is_whitespace(text[i + 1]) && !utf8::is_strippable_punct(text[i + 1]) &&
                    text[i + 1] != U'.' && text[i + 1] != U'!' && text[i + 1] != U'?';
    if (utf8::is_strippable_punct(c) && c != U'-') {
      flush_word();
      continue;
    }
    if (c == U'-' && !internal) {
      flush_word();
      continue;
    }
    if (utf8::is_apostrophe(c) && !internal && word.empty()) {
      // leading apostrophe: keep, it may be an elision ('fraid)
      word.push_back(c);
      continue;
    }
    word.push_back(c);
  }
  flush_sentence();
  return sentences;
}

std::string sentence_text(const std::vector<RawToken>& sentence) {
  std::string out;
  for (std::size_t k = 0; k < sentence.size(); ++k) {
    if (k) out += " ";
    out += utf8::encode(sentence[k].chars);
  }
  return out;
}

} // namespace

std::vector<Candidate> extract_candidates(std::string_view text, const Lexicon& lexicon) {
  std::u32string decoded = utf8::decode(text, "document");
  std::vector<Candidate> out;
  for (const std::vector<RawToken>& sentence : split_sentences(decoded)) {
    std::string context = sentence_text(sentence);
    for (const RawToken& rt : sentence) {
      bool has_digit = false;
      for (char32_t c : rt.chars)
        if (utf8::is_ascii_digit(c)) {
          has_digit = true;
          break;
        }
      if (has_digit) continue;
      bool capitalized = !rt.chars.empty() && utf8::is_upper(rt.chars.front());
      if (capitalized && !rt.sentence_initial) continue;
      std::optional<Token> norm = Token::try_normalize(utf8::encode(rt.chars));
      if (!norm) continue;
      bool any_letter = false;
      for (char32_t c : norm->chars())
        if (!utf8::is_apostrophe(c) && c != U'-') any_letter = true;
      if (!any_letter) continue; // stray quotes are not word candidates
      if (lexicon.contains(*norm)) continue;
      // sentence-initial capitalized tokens qualify only when the lowercased
      // form is unknown, which the lexicon check above already established
      out.push_back({norm->str(), context});
    }
  }
  return out;
}

SplitResult split_pairs(std::span<const TokenPair> pairs, const SplitSpec& spec) {
  double sum = spec.train + spec.val + spec.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw UsageError("split fractions must sum to 1 (got " + std::to_string(sum) + ")");
  const std::size_t n = pairs.size();

  // largest-remainder target sizes
  const double fracs[3] = {spec.train, spec.val, spec.test};
  std::size_t target[3];
  double rem[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    double exact = fracs[k] * static_cast<double>(n);
    target[k] = static_cast<std::size_t>(exact);
    rem[k] = exact - static_cast<double>(target[k]);
    assigned += target[k];
  }
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (rem[k] > rem[best]) best = k;
    ++target[best];
    rem[best] = -1.0;
    ++assigned;
  }
  // keep every split non-empty when there is enough data
  if (n >= 10) {
    for (int k = 0; k < 3; ++k) {
      if (fracs[k] > 0.0 && target[k] == 0) {
        int donor = 0;
        for (int d = 1; d < 3; ++d)
          if (target[d] > target[donor]) donor = d;
        --target[donor];
        ++target[k];
      }
    }
  }

  // group indices
  std::vector<std::vector<std::size_t>> groups;
  if (spec.group == SplitSpec::Group::Pair) {
    groups.reserve(n);
    for (std::size_t i = 0; i < n; ++i) groups.push_back({i});
  } else {
    std::map<Token, std::vector<std::size_t>> by_variant;
    for (std::size_t i = 0; i < n; ++i) by_variant[pairs[i].variant].push_back(i);
    groups.reserve(by_variant.size());
    for (auto& [tok, idxs] : by_variant) groups.push_back(std::move(idxs));
  }

  Rng rng(derive_seed(spec.seed, "split"));
  rng.shuffle(groups);

  SplitResult result;
  std::vector<TokenPair>* dest[3] = {&result.train, &result.val, &result.test};
  for (const std::vector<std::size_t>& g : groups) {
    // place where the remaining deficit is largest
    int best = 0;
    double best_deficit = -1e300;
    for (int k = 0; k < 3; ++k) {
      double deficit = static_cast<double>(target[k]) - static_cast<double>(dest[k]->size());
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = k;
      }
    }
    for (std::size_t idx : g) dest[best]->push_back(pairs[idx]);
  }
  return result;
}

} // namespace ortho
