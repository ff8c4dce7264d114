#include "ortho/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "ortho/error.hpp"
#include "ortho/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace ortho {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr char kMagic[4] = {'N', 'E', 'D', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(x)) without overflow
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

void init_uniform(Tensor& t, Rng& rng, double limit) {
  for (double& v : t.flat()) v = rng.uniform(-limit, limit);
}

} // namespace

NeuralEditModel::NeuralEditModel(Alphabet alphabet, NeuralConfig config)
    : alphabet_(std::move(alphabet)), config_(config) {}

NeuralEditModel NeuralEditModel::init(const Alphabet& alphabet, const NeuralConfig& config,
                                      std::uint64_t seed) {
  if (config.d_emb == 0 || config.d_emb % 2 != 0)
    throw UsageError("d_emb must be a positive even number");
  if (config.layers == 0) throw UsageError("layers must be >= 1");
  NeuralEditModel m(alphabet, config);
  const std::size_t d = config.d_emb;
  const std::size_t h = d / 2;
  Rng rng(derive_seed(seed, "neural-init"));

  m.embedding = Tensor(alphabet.size(), d);
  init_uniform(m.embedding, rng, 0.1);

  for (std::size_t layer = 0; layer < config.layers; ++layer) {
    // every layer consumes d-dimensional vectors (layer 0: embeddings,
    // deeper layers: the previous layer's bidirectional output)
    GruParams fwd = GruParams::make(d, h);
    GruParams bwd = GruParams::make(d, h);
    double wx_limit = 1.0 / std::sqrt(static_cast<double>(d));
    double wh_limit = 1.0 / std::sqrt(static_cast<double>(h));
    init_uniform(fwd.wx, rng, wx_limit);
    init_uniform(fwd.wh, rng, wh_limit);
    init_uniform(bwd.wx, rng, wx_limit);
    init_uniform(bwd.wh, rng, wh_limit);
    m.gru_fwd.push_back(std::move(fwd));
    m.gru_bwd.push_back(std::move(bwd));
  }

  m.boundary = Tensor(d);
  init_uniform(m.boundary, rng, 0.1);

  const std::size_t head_in = 2 * d + 2; // both sides plus two boundary flags
  m.head_w1 = Tensor(d, head_in);
  m.head_b1 = Tensor(d);
  m.head_w2 = Tensor(3, d); // del, ins, sub
  m.head_b2 = Tensor(3);
  init_uniform(m.head_w1, rng, 0.1);
  init_uniform(m.head_w2, rng, 0.1);

  // character-emission heads, each conditioned on the opposite side's vector
  m.emit_src_w = Tensor(alphabet.size(), d);
  m.emit_src_b = Tensor(alphabet.size());
  m.emit_tgt_w = Tensor(alphabet.size(), d);
  m.emit_tgt_b = Tensor(alphabet.size());
  init_uniform(m.emit_src_w, rng, 0.1);
  init_uniform(m.emit_tgt_w, rng, 0.1);

  m.match_gain = Tensor(1);
  m.match_bias = Tensor(1);
  m.match_gain(0) = 1.0;
  m.match_bias(0) = 0.0;
  return m;
}

void NeuralEditModel::set_threshold(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError("threshold must lie in [0, 1]");
  threshold_ = tau;
}

// ---------------------------------------------------------------------------
// encoder

namespace {

struct LayerTrace {
  std::vector<Vec> inputs;          // T x in, forward order
  GruTrace fwd, bwd;                // bwd consumed reversed inputs
  std::vector<Vec> out_fwd, out_bwd; // T x h, both in forward order
};

struct EncodeTrace {
  std::vector<std::size_t> ids;
  std::vector<LayerTrace> layers;
  std::vector<Vec> outputs; // T x d
};

EncodeTrace encode_with_trace(const NeuralEditModel& m, const Token& t, bool keep_trace) {
  EncodeTrace trace;
  trace.ids = m.alphabet().encode(t);
  const std::size_t d = m.config().d_emb;
  const std::size_t len = trace.ids.size();
  std::vector<Vec> xs(len, Vec(d));
  for (std::size_t k = 0; k < len; ++k) {
    std::span<const double> row = m.embedding.row(trace.ids[k]);
    std::copy(row.begin(), row.end(), xs[k].begin());
  }
  for (std::size_t layer = 0; layer < m.config().layers; ++layer) {
    LayerTrace lt;
    if (keep_trace) lt.inputs = xs;
    std::vector<Vec> hs_f = gru_run(m.gru_fwd[layer], xs, keep_trace ? &lt.fwd : nullptr);
    std::vector<Vec> xs_rev(xs.rbegin(), xs.rend());
    std::vector<Vec> hs_b_rev = gru_run(m.gru_bwd[layer], xs_rev, keep_trace ? &lt.bwd : nullptr);
    const std::size_t h = m.gru_fwd[layer].hidden();
    std::vector<Vec> out(len, Vec(2 * h));
    for (std::size_t k = 0; k < len; ++k) {
      std::copy(hs_f[k].begin(), hs_f[k].end(), out[k].begin());
      const Vec& hb = hs_b_rev[len - 1 - k];
      std::copy(hb.begin(), hb.end(), out[k].begin() + static_cast<std::ptrdiff_t>(h));
    }
    if (keep_trace) {
      lt.out_fwd = std::move(hs_f);
      lt.out_bwd.resize(len);
      for (std::size_t k = 0; k < len; ++k) lt.out_bwd[k] = hs_b_rev[len - 1 - k];
      trace.layers.push_back(std::move(lt));
    }
    xs = std::move(out);
  }
  trace.outputs = std::move(xs);
  return trace;
}

// Backward through the whole encoder; d_out is the gradient w.r.t. the final
// contextual vectors. Accumulates into grads.
void encoder_backward(const NeuralEditModel& m, const EncodeTrace& trace, std::vector<Vec> d_out,
                      NeuralGradients& grads) {
  const std::size_t len = trace.ids.size();
  for (std::size_t layer = m.config().layers; layer-- > 0;) {
    const LayerTrace& lt = trace.layers[layer];
    const std::size_t h = m.gru_fwd[layer].hidden();
    std::vector<Vec> d_fwd(len, Vec(h)), d_bwd_rev(len, Vec(h));
    for (std::size_t k = 0; k < len; ++k) {
      for (std::size_t c = 0; c < h; ++c) {
        d_fwd[k][c] = d_out[k][c];
        d_bwd_rev[len - 1 - k][c] = d_out[k][h + c];
      }
    }
    std::vector<Vec> xs_rev(lt.inputs.rbegin(), lt.inputs.rend());
    std::vector<Vec> d_in_f =
        gru_backward(m.gru_fwd[layer], lt.inputs, lt.fwd, d_fwd, grads.gru_fwd[layer]);
    std::vector<Vec> d_in_b_rev =
        gru_backward(m.gru_bwd[layer], xs_rev, lt.bwd, d_bwd_rev, grads.gru_bwd[layer]);
    std::vector<Vec> d_in(len, Vec(m.gru_fwd[layer].input(), 0.0));
    for (std::size_t k = 0; k < len; ++k) {
      for (std::size_t c = 0; c < d_in[k].size(); ++c)
        d_in[k][c] = d_in_f[k][c] + d_in_b_rev[len - 1 - k][c];
    }
    d_out = std::move(d_in);
  }
  for (std::size_t k = 0; k < len; ++k)
    add_to(grads.embedding.row(trace.ids[k]), d_out[k]);
}

// ---------------------------------------------------------------------------
// per-cell scoring head

struct CellCache {
  Vec h1;                    // head hidden activation
  std::array<double, 3> p{}; // type probs [del, ins, sub]
};

struct GridForward {
  CostGrid grid;
  std::vector<CellCache> cells; // index i * (n+1) + j
  // emission log-probs and probs: source-char head conditioned on the target
  // position (rows indexed by j), target-char head on the source position
  // (rows indexed by i)
  Tensor src_emit_logp, src_emit_p; // (n+1) x |A|
  Tensor tgt_emit_logp, tgt_emit_p; // (m+1) x |A|
  std::vector<std::size_t> src_ids, tgt_ids;
};

void build_head_input(const NeuralEditModel& m, const std::vector<Vec>& src,
                      const std::vector<Vec>& tgt, std::size_t i, std::size_t j, Vec& u) {
  const std::size_t d = m.config().d_emb;
  std::span<const double> sv =
      i >= 1 ? std::span<const double>(src[i - 1]) : m.boundary.flat();
  std::span<const double> tv =
      j >= 1 ? std::span<const double>(tgt[j - 1]) : m.boundary.flat();
  std::copy(sv.begin(), sv.end(), u.begin());
  std::copy(tv.begin(), tv.end(), u.begin() + static_cast<std::ptrdiff_t>(d));
  u[2 * d] = i == 0 ? 1.0 : 0.0;
  u[2 * d + 1] = j == 0 ? 1.0 : 0.0;
}

// Computes one row of emission log-probs: softmax(W * ctx + b) over the
// alphabet, where ctx is the OPPOSITE side's contextual vector (or the
// boundary vector). Cross-conditioning keeps a character's own encoding out
// of its predictor, so the likelihood stays honestly sub-normalized.
void emission_row(const Tensor& w, const Tensor& b, std::span<const double> ctx,
                  std::span<double> logp, std::span<double> p) {
  matvec(w, ctx, logp);
  double zmax = kNegInf;
  for (std::size_t c = 0; c < logp.size(); ++c) {
    logp[c] += b(c);
    zmax = std::max(zmax, logp[c]);
  }
  double denom = 0.0;
  for (double v : logp) denom += std::exp(v - zmax);
  double log_denom = zmax + std::log(denom);
  for (std::size_t c = 0; c < logp.size(); ++c) {
    logp[c] -= log_denom;
    p[c] = std::exp(logp[c]);
  }
}

// Each edit operation's probability factorizes into the 3-way type softmax
// (one distribution per cell) times character emissions for the consumed
// characters; sub consumes both. Impossible moves at row 0 / column 0 simply
// have no grid entry, so their type mass drains, as in a classic stochastic
// transducer with a single operation distribution.
GridForward score_grid_forward(const NeuralEditModel& m, const std::vector<Vec>& src,
                               const std::vector<Vec>& tgt, const std::vector<std::size_t>& src_ids,
                               const std::vector<std::size_t>& tgt_ids, bool keep_cells) {
  const std::size_t msz = src.size(), nsz = tgt.size();
  const std::size_t d = m.config().d_emb;
  const std::size_t asz = m.alphabet().size();
  GridForward gf;
  gf.grid = CostGrid(msz, nsz);
  gf.src_ids = src_ids;
  gf.tgt_ids = tgt_ids;
  if (keep_cells) gf.cells.resize((msz + 1) * (nsz + 1));

  gf.src_emit_logp = Tensor(nsz + 1, asz);
  gf.src_emit_p = Tensor(nsz + 1, asz);
  gf.tgt_emit_logp = Tensor(msz + 1, asz);
  gf.tgt_emit_p = Tensor(msz + 1, asz);
  for (std::size_t j = 0; j <= nsz; ++j) {
    std::span<const double> ctx = j >= 1 ? std::span<const double>(tgt[j - 1]) : m.boundary.flat();
    emission_row(m.emit_src_w, m.emit_src_b, ctx, gf.src_emit_logp.row(j), gf.src_emit_p.row(j));
  }
  for (std::size_t i = 0; i <= msz; ++i) {
    std::span<const double> ctx = i >= 1 ? std::span<const double>(src[i - 1]) : m.boundary.flat();
    emission_row(m.emit_tgt_w, m.emit_tgt_b, ctx, gf.tgt_emit_logp.row(i), gf.tgt_emit_p.row(i));
  }

  Vec u(2 * d + 2), a1(d), h1(d), z(3);
  for (std::size_t i = 0; i <= msz; ++i) {
    for (std::size_t j = 0; j <= nsz; ++j) {
      if (i == 0 && j == 0) continue;
      build_head_input(m, src, tgt, i, j, u);
      matvec(m.head_w1, u, a1);
      for (std::size_t k = 0; k < d; ++k) h1[k] = std::tanh(a1[k] + m.head_b1(k));
      matvec(m.head_w2, h1, z);
      double zmax = kNegInf;
      for (std::size_t k = 0; k < 3; ++k) {
        z[k] += m.head_b2(k);
        zmax = std::max(zmax, z[k]);
      }
      double denom = std::exp(z[0] - zmax) + std::exp(z[1] - zmax) + std::exp(z[2] - zmax);
      double log_denom = zmax + std::log(denom);
      CellCache cc;
      for (std::size_t k = 0; k < 3; ++k) cc.p[k] = std::exp(z[k] - log_denom);
      const double emit_src = i >= 1 ? gf.src_emit_logp(j, src_ids[i - 1]) : 0.0;
      const double emit_tgt = j >= 1 ? gf.tgt_emit_logp(i, tgt_ids[j - 1]) : 0.0;
      if (i >= 1) gf.grid.del(i, j) = (z[0] - log_denom) + emit_src;
      if (j >= 1) gf.grid.ins(i, j) = (z[1] - log_denom) + emit_tgt;
      if (i >= 1 && j >= 1) gf.grid.sub(i, j) = (z[2] - log_denom) + emit_src + emit_tgt;
      if (keep_cells) {
        cc.h1 = h1;
        gf.cells[i * (nsz + 1) + j] = std::move(cc);
      }
    }
  }
  return gf;
}

// Backward through the type head, emission heads and softmaxes for one pair.
// upstream(op, i, j) is d(total)/d(logp_op(i,j)). Produces d_src/d_tgt and
// accumulates head, emission and boundary gradients.
void grid_backward(const NeuralEditModel& m, const GridForward& gf, const std::vector<Vec>& src,
                   const std::vector<Vec>& tgt, const Tensor& up_del, const Tensor& up_ins,
                   const Tensor& up_sub, std::vector<Vec>& d_src, std::vector<Vec>& d_tgt,
                   NeuralGradients& grads) {
  const std::size_t msz = src.size(), nsz = tgt.size();
  const std::size_t d = m.config().d_emb;
  const std::size_t asz = m.alphabet().size();
  Vec u(2 * d + 2), dz(3), dh1(d), da1(d), du(2 * d + 2);

  // emission upstreams: a weighted delta at the consumed character per cell,
  // accumulated per conditioning position before the softmax backward
  Tensor d_src_emit(nsz + 1, asz), d_tgt_emit(msz + 1, asz); // deltas on logp
  Vec src_wsum(nsz + 1, 0.0), tgt_wsum(msz + 1, 0.0);

  for (std::size_t i = 0; i <= msz; ++i) {
    for (std::size_t j = 0; j <= nsz; ++j) {
      if (i == 0 && j == 0) continue;
      const bool has_del = i >= 1, has_ins = j >= 1, has_sub = i >= 1 && j >= 1;
      double g0 = has_del ? up_del(i, j) : 0.0;
      double g1 = has_ins ? up_ins(i, j) : 0.0;
      double g2 = has_sub ? up_sub(i, j) : 0.0;
      if (g0 == 0.0 && g1 == 0.0 && g2 == 0.0) continue;
      double gsum = g0 + g1 + g2;
      const CellCache& cc = gf.cells[i * (nsz + 1) + j];
      // type softmax is always 3-way; moves without a grid entry get no
      // upstream but still shed probability through the shared normalizer
      dz[0] = g0 - cc.p[0] * gsum;
      dz[1] = g1 - cc.p[1] * gsum;
      dz[2] = g2 - cc.p[2] * gsum;
      outer_add(grads.head_w2, dz, cc.h1);
      add_to(grads.head_b2.flat(), dz);
      std::fill(dh1.begin(), dh1.end(), 0.0);
      matvec_transpose_add(m.head_w2, dz, dh1);
      for (std::size_t k = 0; k < d; ++k) da1[k] = dh1[k] * (1.0 - cc.h1[k] * cc.h1[k]);
      build_head_input(m, src, tgt, i, j, u);
      outer_add(grads.head_w1, da1, u);
      add_to(grads.head_b1.flat(), da1);
      std::fill(du.begin(), du.end(), 0.0);
      matvec_transpose_add(m.head_w1, da1, du);
      std::span<const double> dsv(du.data(), d);
      std::span<const double> dtv(du.data() + d, d);
      if (i >= 1)
        add_to(d_src[i - 1], dsv);
      else
        add_to(grads.boundary.flat(), dsv);
      if (j >= 1)
        add_to(d_tgt[j - 1], dtv);
      else
        add_to(grads.boundary.flat(), dtv);
      // emissions: del and sub consume the source char, ins and sub the target
      if (has_del || has_sub) {
        double w = g0 + g2;
        if (w != 0.0) {
          d_src_emit(j, gf.src_ids[i - 1]) += w;
          src_wsum[j] += w;
        }
      }
      if (has_ins || has_sub) {
        double w = g1 + g2;
        if (w != 0.0) {
          d_tgt_emit(i, gf.tgt_ids[j - 1]) += w;
          tgt_wsum[i] += w;
        }
      }
    }
  }

  // emission softmax backward per conditioning position, then the linear head
  Vec dzrow(asz);
  for (std::size_t j = 0; j <= nsz; ++j) {
    if (src_wsum[j] == 0.0) {
      bool any = false;
      for (std::size_t c = 0; c < asz; ++c) any |= d_src_emit(j, c) != 0.0;
      if (!any) continue;
    }
    for (std::size_t c = 0; c < asz; ++c)
      dzrow[c] = d_src_emit(j, c) - gf.src_emit_p(j, c) * src_wsum[j];
    std::span<const double> ctx = j >= 1 ? std::span<const double>(tgt[j - 1]) : m.boundary.flat();
    outer_add(grads.emit_src_w, dzrow, ctx);
    add_to(grads.emit_src_b.flat(), dzrow);
    if (j >= 1)
      matvec_transpose_add(m.emit_src_w, dzrow, d_tgt[j - 1]);
    else
      matvec_transpose_add(m.emit_src_w, dzrow, grads.boundary.flat());
  }
  for (std::size_t i = 0; i <= msz; ++i) {
    if (tgt_wsum[i] == 0.0) {
      bool any = false;
      for (std::size_t c = 0; c < asz; ++c) any |= d_tgt_emit(i, c) != 0.0;
      if (!any) continue;
    }
    for (std::size_t c = 0; c < asz; ++c)
      dzrow[c] = d_tgt_emit(i, c) - gf.tgt_emit_p(i, c) * tgt_wsum[i];
    std::span<const double> ctx = i >= 1 ? std::span<const double>(src[i - 1]) : m.boundary.flat();
    outer_add(grads.emit_tgt_w, dzrow, ctx);
    add_to(grads.emit_tgt_b.flat(), dzrow);
    if (i >= 1)
      matvec_transpose_add(m.emit_tgt_w, dzrow, d_src[i - 1]);
    else
      matvec_transpose_add(m.emit_tgt_w, dzrow, grads.boundary.flat());
  }
}

} // namespace

std::vector<Vec> NeuralEditModel::encode(const Token& t) const {
  return encode_with_trace(*this, t, false).outputs;
}

EncodedToken NeuralEditModel::encode_token(const Token& t) const {
  EncodeTrace trace = encode_with_trace(*this, t, false);
  return {std::move(trace.outputs), std::move(trace.ids)};
}

CostGrid NeuralEditModel::score_grid(const Token& a, const Token& b) const {
  EncodedToken src = encode_token(a);
  EncodedToken tgt = encode_token(b);
  return score_grid_forward(*this, src.vectors, tgt.vectors, src.ids, tgt.ids, false).grid;
}

PairScore NeuralEditModel::pair_score(const Token& a, const Token& b) const {
  return pair_score_from_encodings(*this, encode_token(a), encode_token(b));
}

PairScore pair_score_from_encodings(const NeuralEditModel& model, const EncodedToken& src,
                                    const EncodedToken& tgt) {
  CostGrid grid =
      score_grid_forward(model, src.vectors, tgt.vectors, src.ids, tgt.ids, false).grid;
  LatticeResult lat = forward_backward(grid);
  PairScore s{};
  s.loglik = lat.loglik;
  s.norm_ll = lat.loglik / static_cast<double>(grid.m + grid.n);
  s.p_match = sigmoid(model.gain() * s.norm_ll + model.bias());
  return s;
}

// ---------------------------------------------------------------------------
// loss

namespace {

struct LossAccum {
  double em = 0.0, bce = 0.0, nonmatch = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
};

double em_term(const CostGrid& grid, const LatticeResult& post) {
  double acc = 0.0;
  for (std::size_t i = 0; i <= grid.m; ++i) {
    for (std::size_t j = 0; j <= grid.n; ++j) {
      if (i >= 1) acc -= post.post_del(i, j) * grid.del(i, j);
      if (j >= 1) acc -= post.post_ins(i, j) * grid.ins(i, j);
      if (i >= 1 && j >= 1) acc -= post.post_sub(i, j) * grid.sub(i, j);
    }
  }
  return acc;
}

LossBreakdown loss_impl(const NeuralEditModel& model, std::span<const LabeledPair> batch,
                        std::span<const LatticeResult> frozen, NeuralGradients* grads,
                        const LossWeights& w) {
  if (batch.empty()) throw UsageError("loss: empty batch");
  if (!frozen.empty() && frozen.size() != batch.size())
    throw UsageError("loss: frozen posteriors do not match batch size");

  const double gain = model.gain();
  std::size_t n_pos = 0, n_neg = 0;
  for (const LabeledPair& row : batch) (row.is_match ? n_pos : n_neg)++;
  const double b_count = static_cast<double>(batch.size());

  LossBreakdown out;
  double d_gain = 0.0, d_bias = 0.0;

  for (std::size_t k = 0; k < batch.size(); ++k) {
    const LabeledPair& row = batch[k];
    const bool keep = grads != nullptr;
    EncodeTrace enc_a = encode_with_trace(model, row.a, keep);
    EncodeTrace enc_b = encode_with_trace(model, row.b, keep);
    GridForward gf =
        score_grid_forward(model, enc_a.outputs, enc_b.outputs, enc_a.ids, enc_b.ids, keep);
    LatticeResult lat = forward_backward(gf.grid);
    const double mn = static_cast<double>(gf.grid.m + gf.grid.n);
    const double norm_ll = lat.loglik / mn;
    const double pre = gain * norm_ll + model.bias();
    const double y = row.is_match ? 1.0 : 0.0;

    // bce in the numerically safe softplus form
    out.bce_loss += (y > 0.5 ? softplus(-pre) : softplus(pre)) / b_count;

    const LatticeResult& posteriors = frozen.empty() ? lat : frozen[k];
    if (row.is_match) {
      out.em_loss += em_term(gf.grid, posteriors) / static_cast<double>(n_pos);
    }
    double q = std::exp(norm_ll);
    bool clamped = q > 1.0 - 1e-6;
    if (!row.is_match) {
      double qc = clamped ? 1.0 - 1e-6 : q;
      out.nonmatch_nll += -std::log(1.0 - qc) / static_cast<double>(n_neg);
    }

    if (grads) {
      const double p = sigmoid(pre);
      double d_pre = w.bce * (p - y) / b_count;
      d_gain += d_pre * norm_ll;
      d_bias += d_pre;
      double d_norm_ll = d_pre * gain;
      if (!row.is_match && !clamped)
        d_norm_ll += w.nonmatch * (q / (1.0 - q)) / static_cast<double>(n_neg);
      double d_loglik = d_norm_ll / mn;

      const std::size_t msz = gf.grid.m, nsz = gf.grid.n;
      Tensor up_del(msz + 1, nsz + 1), up_ins(msz + 1, nsz + 1), up_sub(msz + 1, nsz + 1);
      const double em_scale = row.is_match ? w.em / static_cast<double>(n_pos) : 0.0;
      for (std::size_t i = 0; i <= msz; ++i) {
        for (std::size_t j = 0; j <= nsz; ++j) {
          if (i >= 1)
            up_del(i, j) = d_loglik * lat.post_del(i, j) - em_scale * posteriors.post_del(i, j);
          if (j >= 1)
            up_ins(i, j) = d_loglik * lat.post_ins(i, j) - em_scale * posteriors.post_ins(i, j);
          if (i >= 1 && j >= 1)
            up_sub(i, j) = d_loglik * lat.post_sub(i, j) - em_scale * posteriors.post_sub(i, j);
        }
      }
      std::vector<Vec> d_src(msz, Vec(model.config().d_emb, 0.0));
      std::vector<Vec> d_tgt(nsz, Vec(model.config().d_emb, 0.0));
      grid_backward(model, gf, enc_a.outputs, enc_b.outputs, up_del, up_ins, up_sub, d_src, d_tgt,
                    *grads);
      encoder_backward(model, enc_a, std::move(d_src), *grads);
      encoder_backward(model, enc_b, std::move(d_tgt), *grads);
    }
  }
  if (grads) {
    grads->match_gain(0) += d_gain;
    grads->match_bias(0) += d_bias;
  }
  out.total = out.em_loss + out.bce_loss + out.nonmatch_nll;
  return out;
}

} // namespace

LossBreakdown loss(const NeuralEditModel& model, std::span<const LabeledPair> batch) {
  return loss_impl(model, batch, {}, nullptr, {});
}

LossBreakdown loss_and_gradients(const NeuralEditModel& model, std::span<const LabeledPair> batch,
                                 NeuralGradients& grads, const LossWeights& weights) {
  return loss_impl(model, batch, {}, &grads, weights);
}

std::vector<LatticeResult> batch_lattices(const NeuralEditModel& model,
                                          std::span<const LabeledPair> batch) {
  std::vector<LatticeResult> out;
  out.reserve(batch.size());
  for (const LabeledPair& row : batch)
    out.push_back(forward_backward(model.score_grid(row.a, row.b)));
  return out;
}

LossBreakdown loss_with_posteriors(const NeuralEditModel& model, std::span<const LabeledPair> batch,
                                   std::span<const LatticeResult> frozen) {
  return loss_impl(model, batch, frozen, nullptr, {});
}

// ---------------------------------------------------------------------------
// parameter plumbing

std::vector<std::pair<std::string, Tensor*>> NeuralEditModel::named_parameters() {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.emplace_back("embedding", &embedding);
  for (std::size_t layer = 0; layer < gru_fwd.size(); ++layer) {
    std::string base = "gru.l" + std::to_string(layer);
    out.emplace_back(base + ".fwd.wx", &gru_fwd[layer].wx);
    out.emplace_back(base + ".fwd.wh", &gru_fwd[layer].wh);
    out.emplace_back(base + ".fwd.b", &gru_fwd[layer].b);
    out.emplace_back(base + ".bwd.wx", &gru_bwd[layer].wx);
    out.emplace_back(base + ".bwd.wh", &gru_bwd[layer].wh);
    out.emplace_back(base + ".bwd.b", &gru_bwd[layer].b);
  }
  out.emplace_back("boundary", &boundary);
  out.emplace_back("head.w1", &head_w1);
  out.emplace_back("head.b1", &head_b1);
  out.emplace_back("head.w2", &head_w2);
  out.emplace_back("head.b2", &head_b2);
  out.emplace_back("emit.src.w", &emit_src_w);
  out.emplace_back("emit.src.b", &emit_src_b);
  out.emplace_back("emit.tgt.w", &emit_tgt_w);
  out.emplace_back("emit.tgt.b", &emit_tgt_b);
  out.emplace_back("match.gain", &match_gain);
  out.emplace_back("match.bias", &match_bias);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> NeuralEditModel::named_parameters() const {
  auto mut = const_cast<NeuralEditModel*>(this)->named_parameters();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mut.size());
  for (auto& [name, t] : mut) out.emplace_back(name, t);
  return out;
}

std::vector<Tensor*> parameter_tensors(NeuralEditModel& m) {
  std::vector<Tensor*> out;
  for (auto& [name, t] : m.named_parameters()) out.push_back(t);
  return out;
}

NeuralGradients NeuralGradients::zeros_like(const NeuralEditModel& m) {
  NeuralGradients g;
  g.embedding = Tensor::zeros_like(m.embedding);
  for (const GruParams& p : m.gru_fwd) g.gru_fwd.push_back(GruParams::zeros_like(p));
  for (const GruParams& p : m.gru_bwd) g.gru_bwd.push_back(GruParams::zeros_like(p));
  g.boundary = Tensor::zeros_like(m.boundary);
  g.head_w1 = Tensor::zeros_like(m.head_w1);
  g.head_b1 = Tensor::zeros_like(m.head_b1);
  g.head_w2 = Tensor::zeros_like(m.head_w2);
  g.head_b2 = Tensor::zeros_like(m.head_b2);
  g.emit_src_w = Tensor::zeros_like(m.emit_src_w);
  g.emit_src_b = Tensor::zeros_like(m.emit_src_b);
  g.emit_tgt_w = Tensor::zeros_like(m.emit_tgt_w);
  g.emit_tgt_b = Tensor::zeros_like(m.emit_tgt_b);
  g.match_gain = Tensor::zeros_like(m.match_gain);
  g.match_bias = Tensor::zeros_like(m.match_bias);
  return g;
}

std::vector<Tensor*> NeuralGradients::tensors() {
  std::vector<Tensor*> out;
  out.push_back(&embedding);
  for (std::size_t layer = 0; layer < gru_fwd.size(); ++layer) {
    out.push_back(&gru_fwd[layer].wx);
    out.push_back(&gru_fwd[layer].wh);
    out.push_back(&gru_fwd[layer].b);
    out.push_back(&gru_bwd[layer].wx);
    out.push_back(&gru_bwd[layer].wh);
    out.push_back(&gru_bwd[layer].b);
  }
  out.push_back(&boundary);
  out.push_back(&head_w1);
  out.push_back(&head_b1);
  out.push_back(&head_w2);
  out.push_back(&head_b2);
  out.push_back(&emit_src_w);
  out.push_back(&emit_src_b);
  out.push_back(&emit_tgt_w);
  out.push_back(&emit_tgt_b);
  out.push_back(&match_gain);
  out.push_back(&match_bias);
  return out;
}

double NeuralGradients::global_norm() const {
  double acc = 0.0;
  auto* self = const_cast<NeuralGradients*>(this);
  for (Tensor* t : self->tensors())
    for (double v : t->flat()) acc += v * v;
  return std::sqrt(acc);
}

void NeuralGradients::scale(double factor) {
  for (Tensor* t : tensors())
    for (double& v : t->flat()) v *= factor;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void write_u32(std::ofstream& out, std::uint32_t v) { write_bytes(out, &v, 4); }
void write_f64(std::ofstream& out, double v) { write_bytes(out, &v, 8); }

void read_bytes(std::ifstream& in, void* p, std::size_t n, const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw DataError("model file truncated: " + path);
}
std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v;
  read_bytes(in, &v, 4, path);
  return v;
}
double read_f64(std::ifstream& in, const std::string& path) {
  double v;
  read_bytes(in, &v, 8, path);
  return v;
}

} // namespace

void NeuralEditModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  write_bytes(out, kMagic, 4);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(config_.d_emb));
  write_u32(out, static_cast<std::uint32_t>(config_.layers));
  write_f64(out, threshold_);
  write_u32(out, static_cast<std::uint32_t>(alphabet_.symbols().size()));
  for (char32_t c : alphabet_.symbols()) write_u32(out, static_cast<std::uint32_t>(c));
  auto params = named_parameters();
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    write_bytes(out, name.data(), name.size());
    write_u32(out, static_cast<std::uint32_t>(t->rows()));
    write_u32(out, static_cast<std::uint32_t>(t->cols()));
    for (double v : t->flat()) write_f64(out, v);
  }
  if (!out) throw DataError("write failed: " + path.string());
}

NeuralEditModel NeuralEditModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());
  const std::string p = path.string();
  char magic[4];
  read_bytes(in, magic, 4, p);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a NEDM model file (bad magic): " + p);
  std::uint32_t version = read_u32(in, p);
  if (version != kFormatVersion)
    throw DataError("unsupported model format version " + std::to_string(version) + " in " + p);
  NeuralConfig config;
  config.d_emb = read_u32(in, p);
  config.layers = read_u32(in, p);
  double tau = read_f64(in, p);
  std::uint32_t n_symbols = read_u32(in, p);
  std::vector<char32_t> symbols;
  symbols.reserve(n_symbols);
  for (std::uint32_t k = 0; k < n_symbols; ++k)
    symbols.push_back(static_cast<char32_t>(read_u32(in, p)));
  Alphabet alphabet = Alphabet::from_symbols(symbols);
  if (alphabet.symbols() != symbols)
    throw DataError("alphabet mismatch: symbols not sorted/unique in " + p);

  NeuralEditModel m = init(alphabet, config, 0);
  m.threshold_ = tau;
  auto params = m.named_parameters();
  std::uint32_t n_tensors = read_u32(in, p);
  if (n_tensors != params.size())
    throw DataError("corrupt model file: unexpected tensor count in " + p);
  for (auto& [name, t] : params) {
    std::uint32_t name_len = read_u32(in, p);
    std::string file_name(name_len, '\0');
    read_bytes(in, file_name.data(), name_len, p);
    if (file_name != name)
      throw DataError("corrupt model file: expected tensor '" + name + "', found '" + file_name +
                      "' in " + p);
    std::uint32_t rows = read_u32(in, p);
    std::uint32_t cols = read_u32(in, p);
    if (name == "embedding" && rows != alphabet.size())
      throw DataError("alphabet mismatch: embedding rows " + std::to_string(rows) +
                      " != alphabet size " + std::to_string(alphabet.size()) + " in " + p);
    if (rows != t->rows() || cols != t->cols())
      throw DataError("corrupt model file: tensor '" + name + "' shape mismatch in " + p);
    for (double& v : t->flat()) v = read_f64(in, p);
  }
  // trailing garbage means the file is not what it claims to be
  char probe;
  in.read(&probe, 1);
  if (in.gcount() != 0) throw DataError("corrupt model file: trailing bytes in " + p);
  return m;
}

} // namespace ortho
