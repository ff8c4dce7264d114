#ifndef ORTHO_NEURAL_HPP
#define ORTHO_NEURAL_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ortho/gru.hpp"
#include "ortho/lattice.hpp"
#include "ortho/tensor.hpp"
#include "ortho/token.hpp"

namespace ortho {

struct NeuralConfig {
  std::size_t d_emb = 256; // contextual vector size; per-direction hidden is d_emb/2
  std::size_t layers = 2;
};

struct PairScore {
  double loglik;  // log lattice likelihood
  double norm_ll; // loglik / (m + n)
  double p_match; // sigmoid(gain * norm_ll + bias)
};

struct LossBreakdown {
  double em_loss = 0.0;      // positives: -sum gamma_hat * log p, posteriors detached
  double bce_loss = 0.0;     // all pairs: binary cross-entropy of p_match vs label
  double nonmatch_nll = 0.0; // negatives: -log(1 - exp(norm_ll)), clamped
  double total = 0.0;        // equal-weight sum of the three
};

struct LabeledPair {
  Token a, b;
  bool is_match;
};

// Contextual vectors plus the alphabet ids they encode; ranking caches these
// per lexicon candidate.
struct EncodedToken {
  std::vector<Vec> vectors;
  std::vector<std::size_t> ids;
};

// Character-level neural edit distance. A shared bidirectional GRU encoder
// produces contextual vectors for both strings. Each lattice cell's
// (source vector, target vector, boundary flags) feed a feed-forward head
// with three operation logits; an operation's probability is its type
// softmax times character-emission softmaxes for the characters it consumes
// (sub consumes both). Emissions are cross-conditioned - the source
// character's predictor sees only the target-side vector and vice versa - so
// the per-cell mass over the observed moves is strictly sub-normalized and
// the lattice likelihood discriminates between candidate pairings. With a
// constant encoder the whole scorer collapses exactly to a memoryless joint
// edit distribution.
class NeuralEditModel {
public:
  static NeuralEditModel init(const Alphabet& alphabet, const NeuralConfig& config,
                              std::uint64_t seed);

  const Alphabet& alphabet() const { return alphabet_; }
  const NeuralConfig& config() const { return config_; }

  std::vector<Vec> encode(const Token& t) const;
  EncodedToken encode_token(const Token& t) const;
  CostGrid score_grid(const Token& a, const Token& b) const;
  // Throws NumericError when the lattice is degenerate.
  PairScore pair_score(const Token& a, const Token& b) const;

  double threshold() const { return threshold_; }
  void set_threshold(double tau);

  double gain() const { return match_gain(0); }
  double bias() const { return match_bias(0); }

  // Canonical parameter order shared by the optimizer, serializer and tests.
  std::vector<std::pair<std::string, Tensor*>> named_parameters();
  std::vector<std::pair<std::string, const Tensor*>> named_parameters() const;

  // Binary container, magic "NEDM", little-endian 64-bit floats. Version
  // mismatch, truncation and alphabet mismatch raise distinct errors.
  void save(const std::filesystem::path& path) const;
  static NeuralEditModel load(const std::filesystem::path& path);

  // Parameters. Public: training, tests and ablations poke at these directly.
  Tensor embedding;                         // |A| x d_emb
  std::vector<GruParams> gru_fwd, gru_bwd;  // one per layer
  Tensor boundary;                          // d_emb, stands in for the missing side
  Tensor head_w1, head_b1, head_w2, head_b2;
  Tensor emit_src_w, emit_src_b;            // source-char emission, target-conditioned
  Tensor emit_tgt_w, emit_tgt_b;            // target-char emission, source-conditioned
  Tensor match_gain, match_bias;            // 1-element tensors (g, c)

private:
  NeuralEditModel(Alphabet alphabet, NeuralConfig config);
  friend struct NeuralGradients;
  friend class PairBackward;

  Alphabet alphabet_;
  NeuralConfig config_;
  double threshold_ = 0.5;
};

// Gradient buffers in the same canonical order as named_parameters().
struct NeuralGradients {
  Tensor embedding;
  std::vector<GruParams> gru_fwd, gru_bwd;
  Tensor boundary, head_w1, head_b1, head_w2, head_b2;
  Tensor emit_src_w, emit_src_b, emit_tgt_w, emit_tgt_b;
  Tensor match_gain, match_bias;

  static NeuralGradients zeros_like(const NeuralEditModel& m);
  std::vector<Tensor*> tensors();
  double global_norm() const;
  void scale(double factor);
};

std::vector<Tensor*> parameter_tensors(NeuralEditModel& m);

// Component weights for gradient diagnostics; training always uses the
// equal-weight default.
struct LossWeights {
  double em = 1.0, bce = 1.0, nonmatch = 1.0;
};

// Mean loss over the batch: em over positives, bce over all pairs, nonmatch
// over negatives; absent groups contribute 0. Throws UsageError on an empty
// batch; degenerate lattices propagate as NumericError.
LossBreakdown loss(const NeuralEditModel& model, std::span<const LabeledPair> batch);

// Same forward pass, plus exact gradients of (weights . components)
// accumulated into `grads` (zeros_like the model, or prior accumulation).
LossBreakdown loss_and_gradients(const NeuralEditModel& model, std::span<const LabeledPair> batch,
                                 NeuralGradients& grads, const LossWeights& weights = {});

// pair_score on precomputed encodings; ranking encodes each lexicon
// candidate once and reuses it across queries.
PairScore pair_score_from_encodings(const NeuralEditModel& model, const EncodedToken& src,
                                    const EncodedToken& tgt);

// Lattice results (posteriors) for each batch row under the current
// parameters; the finite-difference harness freezes these.
std::vector<LatticeResult> batch_lattices(const NeuralEditModel& model,
                                          std::span<const LabeledPair> batch);

// Loss with the em component evaluated against externally supplied (frozen)
// posteriors: the function finite differences must probe, because training
// treats posteriors as constants.
LossBreakdown loss_with_posteriors(const NeuralEditModel& model, std::span<const LabeledPair> batch,
                                   std::span<const LatticeResult> frozen);

} // namespace ortho

#endif
