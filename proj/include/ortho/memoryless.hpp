#ifndef ORTHO_MEMORYLESS_HPP
#define ORTHO_MEMORYLESS_HPP

#include <filesystem>
#include <span>
#include <vector>

#include "ortho/lattice.hpp"
#include "ortho/tensor.hpp"
#include "ortho/token.hpp"

namespace ortho {

// Position-independent stochastic edit model: one joint distribution over
// all substitute/delete/insert operations, indexed by alphabet symbols.
class MemorylessEditModel {
public:
  enum class GridMode {
    Joint,   // raw joint probabilities as path weights (classic EM)
    PerCell, // renormalized over the moves defined at each cell
  };

  static MemorylessEditModel uniform(const Alphabet& alphabet);

  const Alphabet& alphabet() const { return alphabet_; }

  double sub_logp(std::size_t a_idx, std::size_t b_idx) const { return sub_(a_idx, b_idx); }
  double del_logp(std::size_t a_idx) const { return del_(a_idx); }
  double ins_logp(std::size_t b_idx) const { return ins_(b_idx); }

  Tensor& sub_table() { return sub_; }
  Tensor& del_table() { return del_; }
  Tensor& ins_table() { return ins_; }
  const Tensor& sub_table() const { return sub_; }
  const Tensor& del_table() const { return del_; }
  const Tensor& ins_table() const { return ins_; }

  // Linear-space sum of the full parameter vector (1 for a normalized model).
  double total_mass() const;

  CostGrid cost_grid(const Token& a, const Token& b, GridMode mode = GridMode::Joint) const;

  bool trained() const { return trained_; }
  const std::vector<double>& loglik_history() const { return loglik_history_; }

  // Text format: header with version and alphabet, one
  // "op<TAB>chars<TAB>logp" row per parameter.
  void save(const std::filesystem::path& path) const;
  static MemorylessEditModel load(const std::filesystem::path& path);

private:
  friend MemorylessEditModel em_fit_memoryless(std::span<const TokenPair>, const Alphabet&,
                                               unsigned, double);
  explicit MemorylessEditModel(const Alphabet& alphabet);

  Alphabet alphabet_;
  Tensor sub_; // |A| x |A| log-probs
  Tensor del_; // |A|
  Tensor ins_; // |A|
  bool trained_ = false;
  std::vector<double> loglik_history_;
};

// Accumulated expected operation counts over a pair set (one E-step), plus
// the total data log-likelihood under the current parameters.
struct EditCounts {
  Tensor sub, del, ins;
  double loglik = 0.0;
};

EditCounts em_expected_counts(const MemorylessEditModel& model, std::span<const TokenPair> pairs,
                              MemorylessEditModel::GridMode mode = MemorylessEditModel::GridMode::Joint);

// Classic EM for the memoryless model. `floor` is added to every expected
// count before joint renormalization. Throws DataError on an empty pair set.
MemorylessEditModel em_fit_memoryless(std::span<const TokenPair> pairs, const Alphabet& alphabet,
                                      unsigned iters, double floor = 1e-6);

} // namespace ortho

#endif
