#include "ortho/memoryless.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ortho/error.hpp"
#include "ortho/utf8.hpp"

namespace ortho {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr const char* kFormatHeader = "# orthopair memoryless edit model v1";

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }
} // namespace

MemorylessEditModel::MemorylessEditModel(const Alphabet& alphabet)
    : alphabet_(alphabet), sub_(alphabet.size(), alphabet.size()), del_(alphabet.size()),
      ins_(alphabet.size()) {}

MemorylessEditModel MemorylessEditModel::uniform(const Alphabet& alphabet) {
  MemorylessEditModel m(alphabet);
  const std::size_t a = alphabet.size();
  const double logp = -std::log(static_cast<double>(a * a + 2 * a));
  m.sub_.fill(logp);
  m.del_.fill(logp);
  m.ins_.fill(logp);
  return m;
}

double MemorylessEditModel::total_mass() const {
  double s = 0.0;
  for (double v : sub_.flat()) s += std::exp(v);
  for (double v : del_.flat()) s += std::exp(v);
  for (double v : ins_.flat()) s += std::exp(v);
  return s;
}

CostGrid MemorylessEditModel::cost_grid(const Token& a, const Token& b, GridMode mode) const {
  std::vector<std::size_t> ai = alphabet_.encode(a);
  std::vector<std::size_t> bi = alphabet_.encode(b);
  CostGrid g(ai.size(), bi.size());
  for (std::size_t i = 0; i <= g.m; ++i) {
    for (std::size_t j = 0; j <= g.n; ++j) {
      if (i >= 1) g.del(i, j) = del_(ai[i - 1]);
      if (j >= 1) g.ins(i, j) = ins_(bi[j - 1]);
      if (i >= 1 && j >= 1) g.sub(i, j) = sub_(ai[i - 1], bi[j - 1]);
    }
  }
  if (mode == GridMode::PerCell) {
    for (std::size_t i = 0; i <= g.m; ++i) {
      for (std::size_t j = 0; j <= g.n; ++j) {
        if (i == 0 && j == 0) continue;
        double z = kNegInf;
        if (i >= 1) z = log_sum_exp(z, g.del(i, j));
        if (j >= 1) z = log_sum_exp(z, g.ins(i, j));
        if (i >= 1 && j >= 1) z = log_sum_exp(z, g.sub(i, j));
        if (i >= 1) g.del(i, j) -= z;
        if (j >= 1) g.ins(i, j) -= z;
        if (i >= 1 && j >= 1) g.sub(i, j) -= z;
      }
    }
  }
  return g;
}

EditCounts em_expected_counts(const MemorylessEditModel& model, std::span<const TokenPair> pairs,
                              MemorylessEditModel::GridMode mode) {
  const std::size_t a = model.alphabet().size();
  EditCounts counts{Tensor(a, a), Tensor(a), Tensor(a), 0.0};
  for (const TokenPair& p : pairs) {
    std::vector<std::size_t> ai = model.alphabet().encode(p.variant);
    std::vector<std::size_t> bi = model.alphabet().encode(p.standard);
    CostGrid g = model.cost_grid(p.variant, p.standard, mode);
    LatticeResult lat = forward_backward(g);
    counts.loglik += lat.loglik;
    for (std::size_t i = 0; i <= g.m; ++i) {
      for (std::size_t j = 0; j <= g.n; ++j) {
        if (i >= 1) counts.del(ai[i - 1]) += lat.post_del(i, j);
        if (j >= 1) counts.ins(bi[j - 1]) += lat.post_ins(i, j);
        if (i >= 1 && j >= 1) counts.sub(ai[i - 1], bi[j - 1]) += lat.post_sub(i, j);
      }
    }
  }
  return counts;
}

MemorylessEditModel em_fit_memoryless(std::span<const TokenPair> pairs, const Alphabet& alphabet,
                                      unsigned iters, double floor) {
  if (pairs.empty()) throw DataError("em_fit_memoryless: empty training set");
  if (iters < 1) throw UsageError("em_fit_memoryless: iters must be >= 1");
  MemorylessEditModel model = MemorylessEditModel::uniform(alphabet);
  for (unsigned it = 0; it < iters; ++it) {
    EditCounts c = em_expected_counts(model, pairs, MemorylessEditModel::GridMode::Joint);
    model.loglik_history_.push_back(c.loglik);
    double z = 0.0;
    for (double v : c.sub.flat()) z += v + floor;
    for (double v : c.del.flat()) z += v + floor;
    for (double v : c.ins.flat()) z += v + floor;
    if (z <= 0.0) throw NumericError("em_fit_memoryless: zero total expected count");
    for (std::size_t i = 0; i < c.sub.rows(); ++i)
      for (std::size_t j = 0; j < c.sub.cols(); ++j)
        model.sub_(i, j) = safe_log((c.sub(i, j) + floor) / z);
    for (std::size_t i = 0; i < c.del.size(); ++i) model.del_(i) = safe_log((c.del(i) + floor) / z);
    for (std::size_t i = 0; i < c.ins.size(); ++i) model.ins_(i) = safe_log((c.ins(i) + floor) / z);
  }
  model.trained_ = true;
  return model;
}

namespace {

std::string format_logp(double v) {
  if (v == kNegInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_logp(const std::string& s, std::size_t line_no) {
  if (s == "-inf") return kNegInf;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataError("memoryless model: bad log-probability at line " + std::to_string(line_no));
  }
}

} // namespace

void MemorylessEditModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << kFormatHeader << "\n";
  out << "alphabet";
  for (std::size_t k = 0; k < alphabet_.size(); ++k) out << "\t" << alphabet_.symbol_name(k);
  out << "\n";
  const std::size_t a = alphabet_.size();
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < a; ++j)
      out << "sub\t" << alphabet_.symbol_name(i) << "," << alphabet_.symbol_name(j) << "\t"
          << format_logp(sub_(i, j)) << "\n";
  for (std::size_t i = 0; i < a; ++i)
    out << "del\t" << alphabet_.symbol_name(i) << "\t" << format_logp(del_(i)) << "\n";
  for (std::size_t j = 0; j < a; ++j)
    out << "ins\t" << alphabet_.symbol_name(j) << "\t" << format_logp(ins_(j)) << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

MemorylessEditModel MemorylessEditModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kFormatHeader)
    throw DataError("memoryless model: bad or missing format header in " + path.string());
  if (!std::getline(in, line))
    throw DataError("memoryless model: missing alphabet line in " + path.string());

  std::vector<std::string> fields;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
  }
  if (fields.size() < 3 || fields[0] != "alphabet" || fields[1] != "<pad>" || fields[2] != "<unk>")
    throw DataError("memoryless model: malformed alphabet line in " + path.string());
  std::vector<char32_t> symbols;
  for (std::size_t k = 3; k < fields.size(); ++k) {
    std::u32string cs = utf8::decode(fields[k], "alphabet line");
    if (cs.size() != 1) throw DataError("memoryless model: multi-character alphabet symbol");
    symbols.push_back(cs[0]);
  }
  Alphabet alphabet = Alphabet::from_symbols(symbols);
  if (alphabet.symbols() != symbols)
    throw DataError("memoryless model: alphabet symbols not sorted/unique in " + path.string());

  MemorylessEditModel m(alphabet);
  // name -> index, matching symbol_name()
  auto index_of_name = [&](const std::string& name, std::size_t line_no) -> std::size_t {
    if (name == "<pad>") return Alphabet::kPadIndex;
    if (name == "<unk>") return Alphabet::kUnkIndex;
    std::u32string cs = utf8::decode(name, "parameter row");
    if (cs.size() != 1)
      throw DataError("memoryless model: bad symbol at line " + std::to_string(line_no));
    std::size_t idx = alphabet.index_of(cs[0]);
    if (idx == Alphabet::kUnkIndex && !alphabet.has_symbol(cs[0]))
      throw DataError("memoryless model: symbol outside alphabet at line " + std::to_string(line_no));
    return idx;
  };

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string op, chars, logp;
    if (!std::getline(ss, op, '\t') || !std::getline(ss, chars, '\t') || !std::getline(ss, logp, '\t'))
      throw DataError("memoryless model: malformed row at line " + std::to_string(line_no));
    double v = parse_logp(logp, line_no);
    if (op == "sub") {
      auto comma = chars.find(',');
      if (comma == std::string::npos)
        throw DataError("memoryless model: sub row lacks char pair at line " + std::to_string(line_no));
      std::size_t i = index_of_name(chars.substr(0, comma), line_no);
      std::size_t j = index_of_name(chars.substr(comma + 1), line_no);
      m.sub_(i, j) = v;
    } else if (op == "del") {
      m.del_(index_of_name(chars, line_no)) = v;
    } else if (op == "ins") {
      m.ins_(index_of_name(chars, line_no)) = v;
    } else {
      throw DataError("memoryless model: unknown op '" + op + "' at line " + std::to_string(line_no));
    }
  }
  m.trained_ = true;
  return m;
}

} // namespace ortho
