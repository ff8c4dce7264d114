#ifndef ORTHO_LATTICE_HPP
#define ORTHO_LATTICE_HPP

#include <cstddef>
#include <vector>

#include "ortho/tensor.hpp"

namespace ortho {

enum class LatticeOp { Delete, Insert, Substitute };

// Log-scores of the operation entering each cell of the (m+1)x(n+1) edit
// lattice. del(i,j) is the move (i-1,j)->(i,j) consuming source char i,
// ins(i,j) is (i,j-1)->(i,j) consuming target char j, sub(i,j) is
// (i-1,j-1)->(i,j) consuming both. Structurally impossible entries
// (row 0 / column 0) hold -inf and are ignored.
struct CostGrid {
  std::size_t m = 0, n = 0;
  Tensor del, ins, sub; // (m+1) x (n+1), log domain

  CostGrid() = default;
  CostGrid(std::size_t m_, std::size_t n_);

  bool del_defined(std::size_t i, std::size_t) const { return i >= 1; }
  bool ins_defined(std::size_t, std::size_t j) const { return j >= 1; }
  bool sub_defined(std::size_t i, std::size_t j) const { return i >= 1 && j >= 1; }

  // True when every cell's defined-move distribution sums to 1 in linear
  // space within tol; cell (0,0) has no incoming moves and is skipped.
  bool is_probability_mode(double tol = 1e-9) const;
};

// Forward/backward masses and per-cell operation posteriors.
struct LatticeResult {
  std::size_t m = 0, n = 0;
  Tensor log_alpha, log_beta;          // (m+1) x (n+1)
  double loglik = 0.0;                 // log alpha(m, n)
  Tensor post_del, post_ins, post_sub; // gamma per cell, linear domain

  double posterior(LatticeOp op, std::size_t i, std::size_t j) const;
  // Sum of all posteriors = expected number of edit operations on a path.
  double expected_path_length() const;
};

// Throws NumericError when the lattice carries no mass (loglik = -inf).
LatticeResult forward_backward(const CostGrid& grid);

struct ViterbiStep {
  std::size_t i, j; // cell entered
  LatticeOp op;
};

struct ViterbiResult {
  std::vector<ViterbiStep> path; // from (0,0) to (m,n)
  double best_logp;
};

// Best single path; ties prefer substitute > delete > insert.
ViterbiResult viterbi(const CostGrid& grid);

double log_sum_exp(double a, double b);
double log_sum_exp3(double a, double b, double c);

} // namespace ortho

#endif
