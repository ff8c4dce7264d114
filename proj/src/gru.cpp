#include "ortho/gru.hpp"

#include <cassert>
#include <cmath>

namespace ortho {

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
} // namespace

std::vector<Vec> gru_run(const GruParams& p, std::span<const Vec> xs, GruTrace* trace) {
  const std::size_t h = p.hidden();
  const std::size_t t_count = xs.size();
  std::vector<Vec> hs(t_count, Vec(h, 0.0));
  Vec h_prev(h, 0.0);
  Vec xpart(3 * h), hpart(3 * h);
  if (trace) trace->steps.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    assert(xs[t].size() == p.input());
    matvec(p.wx, xs[t], xpart);
    for (std::size_t k = 0; k < 3 * h; ++k) xpart[k] += p.b(k);
    matvec(p.wh, h_prev, hpart);
    Vec r(h), z(h), n(h), hh(h);
    for (std::size_t k = 0; k < h; ++k) {
      r[k] = sigmoid(xpart[k] + hpart[k]);
      z[k] = sigmoid(xpart[h + k] + hpart[h + k]);
      hh[k] = hpart[2 * h + k];
      n[k] = std::tanh(xpart[2 * h + k] + r[k] * hh[k]);
      hs[t][k] = (1.0 - z[k]) * n[k] + z[k] * h_prev[k];
    }
    if (trace) trace->steps[t] = {h_prev, r, z, n, hh};
    h_prev = hs[t];
  }
  return hs;
}

std::vector<Vec> gru_backward(const GruParams& p, std::span<const Vec> xs, const GruTrace& trace,
                              std::span<const Vec> d_hidden, GruParams& gp) {
  const std::size_t h = p.hidden();
  const std::size_t t_count = xs.size();
  assert(trace.steps.size() == t_count && d_hidden.size() == t_count);
  std::vector<Vec> d_xs(t_count, Vec(p.input(), 0.0));
  Vec d_carry(h, 0.0);
  Vec d_xpart(3 * h), d_hpart(3 * h);
  for (std::size_t t = t_count; t-- > 0;) {
    const GruStepTrace& s = trace.steps[t];
    Vec dh(h);
    for (std::size_t k = 0; k < h; ++k) dh[k] = d_hidden[t][k] + d_carry[k];
    for (std::size_t k = 0; k < h; ++k) {
      double dz = dh[k] * (s.h_prev[k] - s.n[k]);
      double dn = dh[k] * (1.0 - s.z[k]);
      double dn_pre = dn * (1.0 - s.n[k] * s.n[k]);
      double dz_pre = dz * s.z[k] * (1.0 - s.z[k]);
      double dr = dn_pre * s.hh[k];
      double dhh = dn_pre * s.r[k];
      double dr_pre = dr * s.r[k] * (1.0 - s.r[k]);
      d_xpart[k] = dr_pre;
      d_xpart[h + k] = dz_pre;
      d_xpart[2 * h + k] = dn_pre;
      d_hpart[k] = dr_pre;
      d_hpart[h + k] = dz_pre;
      d_hpart[2 * h + k] = dhh;
      d_carry[k] = dh[k] * s.z[k];
    }
    outer_add(gp.wx, d_xpart, xs[t]);
    outer_add(gp.wh, d_hpart, s.h_prev);
    add_to(gp.b.flat(), d_xpart);
    matvec_transpose_add(p.wx, d_xpart, d_xs[t]);
    matvec_transpose_add(p.wh, d_hpart, d_carry);
  }
  return d_xs;
}

} // namespace ortho
