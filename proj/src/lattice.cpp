#include "ortho/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ortho/error.hpp"

namespace ortho {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

CostGrid::CostGrid(std::size_t m_, std::size_t n_)
    : m(m_), n(n_), del(m_ + 1, n_ + 1), ins(m_ + 1, n_ + 1), sub(m_ + 1, n_ + 1) {
  del.fill(kNegInf);
  ins.fill(kNegInf);
  sub.fill(kNegInf);
}

bool CostGrid::is_probability_mode(double tol) const {
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      double s = 0.0;
      if (del_defined(i, j)) s += std::exp(del(i, j));
      if (ins_defined(i, j)) s += std::exp(ins(i, j));
      if (sub_defined(i, j)) s += std::exp(sub(i, j));
      if (std::abs(s - 1.0) > tol) return false;
    }
  }
  return true;
}

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

double log_sum_exp3(double a, double b, double c) {
  double hi = std::max({a, b, c});
  if (hi == kNegInf) return kNegInf;
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi) + std::exp(c - hi));
}

double LatticeResult::posterior(LatticeOp op, std::size_t i, std::size_t j) const {
  switch (op) {
  case LatticeOp::Delete:
    return post_del(i, j);
  case LatticeOp::Insert:
    return post_ins(i, j);
  case LatticeOp::Substitute:
    return post_sub(i, j);
  }
  return 0.0;
}

double LatticeResult::expected_path_length() const {
  double s = 0.0;
  for (double v : post_del.flat()) s += v;
  for (double v : post_ins.flat()) s += v;
  for (double v : post_sub.flat()) s += v;
  return s;
}

LatticeResult forward_backward(const CostGrid& g) {
  const std::size_t m = g.m, n = g.n;
  LatticeResult r;
  r.m = m;
  r.n = n;
  r.log_alpha = Tensor(m + 1, n + 1);
  r.log_beta = Tensor(m + 1, n + 1);
  r.post_del = Tensor(m + 1, n + 1);
  r.post_ins = Tensor(m + 1, n + 1);
  r.post_sub = Tensor(m + 1, n + 1);
  Tensor& la = r.log_alpha;
  Tensor& lb = r.log_beta;
  la.fill(kNegInf);
  lb.fill(kNegInf);

  la(0, 0) = 0.0;
  for (std::size_t i = 1; i <= m; ++i) la(i, 0) = la(i - 1, 0) + g.del(i, 0);
  for (std::size_t j = 1; j <= n; ++j) la(0, j) = la(0, j - 1) + g.ins(0, j);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      la(i, j) = log_sum_exp3(la(i - 1, j) + g.del(i, j), la(i, j - 1) + g.ins(i, j),
                              la(i - 1, j - 1) + g.sub(i, j));
    }
  }
  r.loglik = la(m, n);
  if (!std::isfinite(r.loglik)) {
    throw NumericError("degenerate lattice: no path carries mass (loglik = -inf)");
  }

  lb(m, n) = 0.0;
  for (std::size_t ii = m + 1; ii-- > 0;) {
    for (std::size_t jj = n + 1; jj-- > 0;) {
      if (ii == m && jj == n) continue;
      double acc = kNegInf;
      if (ii + 1 <= m) acc = log_sum_exp(acc, g.del(ii + 1, jj) + lb(ii + 1, jj));
      if (jj + 1 <= n) acc = log_sum_exp(acc, g.ins(ii, jj + 1) + lb(ii, jj + 1));
      if (ii + 1 <= m && jj + 1 <= n) acc = log_sum_exp(acc, g.sub(ii + 1, jj + 1) + lb(ii + 1, jj + 1));
      lb(ii, jj) = acc;
    }
  }

  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (i >= 1) {
        double lg = la(i - 1, j) + g.del(i, j) + lb(i, j) - r.loglik;
        r.post_del(i, j) = lg == kNegInf ? 0.0 : std::exp(lg);
      }
      if (j >= 1) {
        double lg = la(i, j - 1) + g.ins(i, j) + lb(i, j) - r.loglik;
        r.post_ins(i, j) = lg == kNegInf ? 0.0 : std::exp(lg);
      }
      if (i >= 1 && j >= 1) {
        double lg = la(i - 1, j - 1) + g.sub(i, j) + lb(i, j) - r.loglik;
        r.post_sub(i, j) = lg == kNegInf ? 0.0 : std::exp(lg);
      }
    }
  }
  return r;
}

ViterbiResult viterbi(const CostGrid& g) {
  const std::size_t m = g.m, n = g.n;
  Tensor best(m + 1, n + 1);
  best.fill(kNegInf);
  // 0 = none, 1 = sub, 2 = del, 3 = ins; tie preference sub > del > ins
  std::vector<std::vector<int>> from(m + 1, std::vector<int>(n + 1, 0));
  best(0, 0) = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      double b = kNegInf;
      int arg = 0;
      if (i >= 1 && j >= 1) {
        double v = best(i - 1, j - 1) + g.sub(i, j);
        if (v > b) b = v, arg = 1;
      }
      if (i >= 1) {
        double v = best(i - 1, j) + g.del(i, j);
        if (v > b) b = v, arg = 2;
      }
      if (j >= 1) {
        double v = best(i, j - 1) + g.ins(i, j);
        if (v > b) b = v, arg = 3;
      }
      best(i, j) = b;
      from[i][j] = arg;
    }
  }
  if (!std::isfinite(best(m, n))) {
    throw NumericError("degenerate lattice: no path carries mass (viterbi)");
  }
  ViterbiResult r;
  r.best_logp = best(m, n);
  std::size_t i = m, j = n;
  while (i != 0 || j != 0) {
    int arg = from[i][j];
    if (arg == 1) {
      r.path.push_back({i, j, LatticeOp::Substitute});
      --i, --j;
    } else if (arg == 2) {
      r.path.push_back({i, j, LatticeOp::Delete});
      --i;
    } else {
      r.path.push_back({i, j, LatticeOp::Insert});
      --j;
    }
  }
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

} // namespace ortho
