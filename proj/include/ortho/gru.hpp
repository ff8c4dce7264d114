#ifndef ORTHO_GRU_HPP
#define ORTHO_GRU_HPP

#include <span>
#include <vector>

#include "ortho/tensor.hpp"

namespace ortho {

// One GRU direction. Gate rows are packed [reset; update; candidate] so the
// pre-activations come out of two mat-vecs:
//   xpart = wx * x + b,  hpart = wh * h_prev
//   r = sigmoid(xpart_r + hpart_r)
//   z = sigmoid(xpart_z + hpart_z)
//   n = tanh(xpart_n + r .* hpart_n)
//   h = (1 - z) .* n + z .* h_prev
struct GruParams {
  Tensor wx; // 3h x in
  Tensor wh; // 3h x h
  Tensor b;  // 3h

  static GruParams make(std::size_t input, std::size_t hidden) {
    return {Tensor(3 * hidden, input), Tensor(3 * hidden, hidden), Tensor(3 * hidden)};
  }
  static GruParams zeros_like(const GruParams& p) {
    return {Tensor::zeros_like(p.wx), Tensor::zeros_like(p.wh), Tensor::zeros_like(p.b)};
  }
  std::size_t hidden() const { return wh.cols(); }
  std::size_t input() const { return wx.cols(); }
};

struct GruStepTrace {
  Vec h_prev, r, z, n, hh; // hh = candidate rows of wh * h_prev
};

struct GruTrace {
  std::vector<GruStepTrace> steps;
};

// Runs the cell over xs in order (initial hidden state zero); returns h_1..h_T.
std::vector<Vec> gru_run(const GruParams& p, std::span<const Vec> xs, GruTrace* trace = nullptr);

// Backpropagates through a traced run. d_hidden[t] is the gradient w.r.t. the
// t-th returned hidden state. Parameter gradients accumulate into gp; the
// return value is the gradient w.r.t. each input.
std::vector<Vec> gru_backward(const GruParams& p, std::span<const Vec> xs, const GruTrace& trace,
                              std::span<const Vec> d_hidden, GruParams& gp);

} // namespace ortho

#endif
