#ifndef ORTHO_TENSOR_HPP
#define ORTHO_TENSOR_HPP

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace ortho {

// Dense row-major tensor of doubles; rank 1 or 2 is all this project needs.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::size_t n) : rows_(n), cols_(1), data_(n, 0.0) {}
  Tensor(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.rows_, t.cols_); }

  double& operator()(std::size_t i) {
    assert(i < data_.size());
    return data_[i];
  }
  double operator()(std::size_t i) const {
    assert(i < data_.size());
    return data_[i];
  }
  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  std::span<double> row(std::size_t i) { return std::span<double>(data_).subspan(i * cols_, cols_); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  void fill(double v) {
    for (double& x : data_) x = v;
  }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

using Vec = std::vector<double>;

// out = W x (+ out's previous content untouched: overwrite)
inline void matvec(const Tensor& w, std::span<const double> x, std::span<double> out) {
  assert(w.cols() == x.size() && w.rows() == out.size());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double acc = 0.0;
    std::span<const double> r = w.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
}

// out += Wᵀ y
inline void matvec_transpose_add(const Tensor& w, std::span<const double> y, std::span<double> out) {
  assert(w.rows() == y.size() && w.cols() == out.size());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double yi = y[i];
    if (yi == 0.0) continue;
    std::span<const double> r = w.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += yi * r[j];
  }
}

// grad += y ⊗ x
inline void outer_add(Tensor& grad, std::span<const double> y, std::span<const double> x) {
  assert(grad.rows() == y.size() && grad.cols() == x.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double yi = y[i];
    if (yi == 0.0) continue;
    std::span<double> r = grad.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) r[j] += yi * x[j];
  }
}

inline void add_to(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

} // namespace ortho

#endif
