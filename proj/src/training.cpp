#include "ortho/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ortho/error.hpp"
#include "ortho/rng.hpp"

namespace ortho {

void TrainConfig::validate() const {
  if (batch_size < 1 || validation_frequency < 1 || patience < 1 || max_epochs < 1)
    throw UsageError("train config: all counts must be >= 1");
  if (d_emb == 0 || d_emb % 2 != 0) throw UsageError("train config: d_emb must be positive and even");
  if (layers < 1) throw UsageError("train config: layers must be >= 1");
  if (!(learning_rate >= 0.0)) throw UsageError("train config: learning rate must be >= 0");
}

namespace {

double f1_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  double denom = static_cast<double>(2 * tp + fp + fn);
  return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

} // namespace

double f1_at_threshold(std::span<const std::pair<double, bool>> scores, double tau) {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (const auto& [p, label] : scores) {
    bool predicted = p >= tau;
    if (predicted && label) ++tp;
    else if (predicted && !label) ++fp;
    else if (!predicted && label) ++fn;
  }
  return f1_from_counts(tp, fp, fn);
}

Calibration calibrate_threshold(std::span<const std::pair<double, bool>> scores) {
  std::uint64_t total_pos = 0;
  for (const auto& [p, label] : scores)
    if (label) ++total_pos;
  if (total_pos == 0) throw DataError("calibrate_threshold: no positive labels, F1 undefined");

  std::vector<std::pair<double, bool>> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> candidates;
  candidates.push_back(0.0);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].first > sorted[i - 1].first)
      candidates.push_back(0.5 * (sorted[i].first + sorted[i - 1].first));
  }
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());

  // suffix counts over the sorted scores let each candidate be scored in
  // O(log n)
  const std::size_t n = sorted.size();
  std::vector<std::uint64_t> suffix_pos(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) suffix_pos[i] = suffix_pos[i + 1] + (sorted[i].second ? 1 : 0);

  Calibration best{0.0, -1.0};
  for (double tau : candidates) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), tau,
                               [](const auto& row, double t) { return row.first < t; });
    std::size_t cut = static_cast<std::size_t>(it - sorted.begin());
    std::uint64_t tp = suffix_pos[cut];
    std::uint64_t fp = (n - cut) - tp;
    std::uint64_t fn = total_pos - tp;
    double f1 = f1_from_counts(tp, fp, fn);
    if (f1 > best.f1) best = {tau, f1};
  }
  return best;
}

std::vector<LabeledPair> make_labeled_rows(std::span<const TokenPair> positives,
                                           const NegativeSet* negatives) {
  std::vector<LabeledPair> rows;
  rows.reserve(positives.size() + (negatives ? negatives->rows.size() : 0));
  for (const TokenPair& p : positives) rows.push_back({p.variant, p.standard, true});
  if (negatives)
    for (const NegativeRow& r : negatives->rows) rows.push_back({r.variant, r.candidate, false});
  return rows;
}

// ---------------------------------------------------------------------------
// Adam

AdamOptimizer::AdamOptimizer(const NeuralEditModel& model, const TrainConfig& cfg)
    : lr_(cfg.learning_rate), beta1_(cfg.adam_beta1), beta2_(cfg.adam_beta2), eps_(cfg.adam_eps),
      clip_(cfg.grad_clip_norm) {
  auto params = model.named_parameters();
  for (const auto& [name, t] : params) {
    m_.push_back(Tensor::zeros_like(*t));
    v_.push_back(Tensor::zeros_like(*t));
  }
}

void AdamOptimizer::step(NeuralEditModel& model, NeuralGradients& grads) {
  double norm = grads.global_norm();
  if (clip_ > 0.0 && norm > clip_) grads.scale(clip_ / norm);
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::vector<Tensor*> params = parameter_tensors(model);
  std::vector<Tensor*> gs = grads.tensors();
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::span<double> p = params[k]->flat();
    std::span<double> g = gs[k]->flat();
    std::span<double> m = m_[k].flat();
    std::span<double> v = v_[k].flat();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void AdamOptimizer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  std::uint64_t t = t_;
  out.write(reinterpret_cast<const char*>(&t), 8);
  std::uint32_t count = static_cast<std::uint32_t>(m_.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  auto dump = [&](const std::vector<Tensor>& ts) {
    for (const Tensor& tns : ts) {
      std::uint32_t rows = static_cast<std::uint32_t>(tns.rows());
      std::uint32_t cols = static_cast<std::uint32_t>(tns.cols());
      out.write(reinterpret_cast<const char*>(&rows), 4);
      out.write(reinterpret_cast<const char*>(&cols), 4);
      std::span<const double> f = tns.flat();
      out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(8 * f.size()));
    }
  };
  dump(m_);
  dump(v_);
  if (!out) throw DataError("write failed: " + path.string());
}

void AdamOptimizer::load(const std::filesystem::path& path, const NeuralEditModel& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  auto fail = [&]() -> DataError { return DataError("optimizer state truncated: " + path.string()); };
  std::uint64_t t;
  if (!in.read(reinterpret_cast<char*>(&t), 8)) throw fail();
  t_ = t;
  std::uint32_t count;
  if (!in.read(reinterpret_cast<char*>(&count), 4)) throw fail();
  auto expected = model.named_parameters();
  if (count != expected.size()) throw DataError("optimizer state does not match model: " + path.string());
  auto slurp = [&](std::vector<Tensor>& ts) {
    ts.clear();
    for (std::size_t k = 0; k < count; ++k) {
      std::uint32_t rows, cols;
      if (!in.read(reinterpret_cast<char*>(&rows), 4) || !in.read(reinterpret_cast<char*>(&cols), 4))
        throw fail();
      Tensor tns(rows, cols);
      std::span<double> f = tns.flat();
      if (!in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(8 * f.size())))
        throw fail();
      if (rows != expected[k].second->rows() || cols != expected[k].second->cols())
        throw DataError("optimizer state shape mismatch: " + path.string());
      ts.push_back(std::move(tns));
    }
  };
  slurp(m_);
  slurp(v_);
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(NeuralEditModel model, std::vector<LabeledPair> train_rows,
                 std::vector<LabeledPair> val_rows, const TrainConfig& cfg)
    : cfg_(cfg), model_(std::move(model)), best_model_(model_), train_rows_(std::move(train_rows)),
      val_rows_(std::move(val_rows)), adam_(model_, cfg) {
  cfg_.validate();
  if (train_rows_.empty()) throw DataError("trainer: empty training set");
  if (val_rows_.empty()) throw DataError("trainer: empty validation set");
  reshuffle();
}

// Regenerates the batch order for the current epoch; the order is a pure
// function of (seed, epoch) so resumed runs replay the same schedule.
void Trainer::reshuffle() {
  order_.resize(train_rows_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  Rng rng(derive_seed(cfg_.seed, "shuffle", epoch_));
  rng.shuffle(order_);
}

void Trainer::validate_now() {
  std::vector<std::pair<double, bool>> scores;
  scores.reserve(val_rows_.size());
  for (const LabeledPair& row : val_rows_) {
    scores.emplace_back(model_.pair_score(row.a, row.b).p_match, row.is_match);
  }
  Calibration cal = calibrate_threshold(scores);
  LossBreakdown val_loss = loss(model_, val_rows_);
  report_.history.push_back({batches_seen_, cal.f1, val_loss, cal.threshold});
  if (cal.f1 > best_f1_) {
    best_f1_ = cal.f1;
    best_model_ = model_;
    best_model_.set_threshold(cal.threshold);
    report_.best_index = report_.history.size() - 1;
    validations_since_best_ = 0;
  } else {
    ++validations_since_best_;
    if (validations_since_best_ >= cfg_.patience) {
      report_.stop_reason = "patience";
      finished_ = true;
    }
  }
}

void Trainer::process_one_batch() {
  if (finished_) return;
  const std::size_t n = train_rows_.size();
  const std::size_t begin = batch_index_ * cfg_.batch_size;
  const std::size_t end = std::min(begin + cfg_.batch_size, n);
  std::vector<LabeledPair> batch;
  batch.reserve(end - begin);
  for (std::size_t k = begin; k < end; ++k) batch.push_back(train_rows_[order_[k]]);

  NeuralGradients grads = NeuralGradients::zeros_like(model_);
  LossBreakdown lb = loss_and_gradients(model_, batch, grads);
  if (!std::isfinite(lb.total)) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "training diverged at batch %zu (em=%g bce=%g nonmatch=%g); "
                  "diagnostic snapshot: epoch=%zu batch_index=%zu grad_norm=%g",
                  batches_seen_ + 1, lb.em_loss, lb.bce_loss, lb.nonmatch_nll, epoch_, batch_index_,
                  grads.global_norm());
    throw NumericError(buf);
  }
  adam_.step(model_, grads);
  ++batches_seen_;
  ++batch_index_;

  if (batches_seen_ % cfg_.validation_frequency == 0) {
    validate_now();
    if (finished_) return;
  }

  if (batch_index_ * cfg_.batch_size >= n) {
    ++epoch_;
    if (epoch_ >= cfg_.max_epochs) {
      report_.stop_reason = "max_epochs";
      finished_ = true;
      if (report_.history.empty()) validate_now(); // tiny runs still get a checkpoint
      return;
    }
    reshuffle();
    batch_index_ = 0;
  }
}

TrainResult Trainer::result() const {
  if (report_.history.empty())
    throw NumericError("trainer: no validation has run yet; nothing to return");
  TrainReport report = report_;
  if (report.stop_reason.empty()) report.stop_reason = "max_epochs";
  return {best_model_, std::move(report)};
}

TrainResult train(NeuralEditModel model, std::vector<LabeledPair> train_rows,
                  std::vector<LabeledPair> val_rows, const TrainConfig& cfg) {
  Trainer t(std::move(model), std::move(train_rows), std::move(val_rows), cfg);
  while (!t.finished()) t.process_one_batch();
  return t.result();
}

// ---------------------------------------------------------------------------
// checkpoint state

namespace {
constexpr const char* kStateFile = "trainer_state.txt";
constexpr const char* kModelFile = "model.nedm";
constexpr const char* kBestFile = "best.nedm";
constexpr const char* kAdamFile = "adam.bin";

std::string fmt_f64_bits(double v) {
  // exact round-trip via bit pattern
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  return std::to_string(bits);
}

double parse_f64_bits(const std::string& s) {
  std::uint64_t bits = std::stoull(s);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
} // namespace

void Trainer::save_state(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  model_.save(dir / kModelFile);
  best_model_.save(dir / kBestFile);
  adam_.save(dir / kAdamFile);
  std::ofstream out(dir / kStateFile, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + (dir / kStateFile).string());
  out << "batch_size " << cfg_.batch_size << "\n";
  out << "validation_frequency " << cfg_.validation_frequency << "\n";
  out << "patience " << cfg_.patience << "\n";
  out << "max_epochs " << cfg_.max_epochs << "\n";
  out << "seed " << cfg_.seed << "\n";
  out << "d_emb " << cfg_.d_emb << "\n";
  out << "layers " << cfg_.layers << "\n";
  out << "learning_rate " << fmt_f64_bits(cfg_.learning_rate) << "\n";
  out << "adam_beta1 " << fmt_f64_bits(cfg_.adam_beta1) << "\n";
  out << "adam_beta2 " << fmt_f64_bits(cfg_.adam_beta2) << "\n";
  out << "adam_eps " << fmt_f64_bits(cfg_.adam_eps) << "\n";
  out << "grad_clip_norm " << fmt_f64_bits(cfg_.grad_clip_norm) << "\n";
  out << "epoch " << epoch_ << "\n";
  out << "batch_index " << batch_index_ << "\n";
  out << "batches_seen " << batches_seen_ << "\n";
  out << "best_f1 " << fmt_f64_bits(best_f1_) << "\n";
  out << "validations_since_best " << validations_since_best_ << "\n";
  out << "best_index " << report_.best_index << "\n";
  out << "stop_reason " << (report_.stop_reason.empty() ? "-" : report_.stop_reason) << "\n";
  out << "finished " << (finished_ ? 1 : 0) << "\n";
  out << "history " << report_.history.size() << "\n";
  for (const ValidationRecord& r : report_.history) {
    out << r.step << " " << fmt_f64_bits(r.val_f1) << " " << fmt_f64_bits(r.val_loss.em_loss) << " "
        << fmt_f64_bits(r.val_loss.bce_loss) << " " << fmt_f64_bits(r.val_loss.nonmatch_nll) << " "
        << fmt_f64_bits(r.val_loss.total) << " " << fmt_f64_bits(r.threshold) << "\n";
  }
  if (!out) throw DataError("write failed: " + (dir / kStateFile).string());
}

Trainer Trainer::load_state(const std::filesystem::path& dir, std::vector<LabeledPair> train_rows,
                            std::vector<LabeledPair> val_rows) {
  std::ifstream in(dir / kStateFile, std::ios::binary);
  if (!in) throw DataError("cannot open trainer state: " + (dir / kStateFile).string());
  auto next = [&](const std::string& key) -> std::string {
    std::string k, v;
    if (!(in >> k >> v) || k != key)
      throw DataError("trainer state: expected key '" + key + "' in " + (dir / kStateFile).string());
    return v;
  };
  TrainConfig cfg;
  cfg.batch_size = std::stoull(next("batch_size"));
  cfg.validation_frequency = std::stoull(next("validation_frequency"));
  cfg.patience = std::stoull(next("patience"));
  cfg.max_epochs = std::stoull(next("max_epochs"));
  cfg.seed = std::stoull(next("seed"));
  cfg.d_emb = std::stoull(next("d_emb"));
  cfg.layers = std::stoull(next("layers"));
  cfg.learning_rate = parse_f64_bits(next("learning_rate"));
  cfg.adam_beta1 = parse_f64_bits(next("adam_beta1"));
  cfg.adam_beta2 = parse_f64_bits(next("adam_beta2"));
  cfg.adam_eps = parse_f64_bits(next("adam_eps"));
  cfg.grad_clip_norm = parse_f64_bits(next("grad_clip_norm"));

  NeuralEditModel model = NeuralEditModel::load(dir / kModelFile);
  Trainer t(std::move(model), std::move(train_rows), std::move(val_rows), cfg);
  t.best_model_ = NeuralEditModel::load(dir / kBestFile);
  t.adam_.load(dir / kAdamFile, t.model_);
  t.epoch_ = std::stoull(next("epoch"));
  t.batch_index_ = std::stoull(next("batch_index"));
  t.batches_seen_ = std::stoull(next("batches_seen"));
  t.best_f1_ = parse_f64_bits(next("best_f1"));
  t.validations_since_best_ = std::stoull(next("validations_since_best"));
  t.report_.best_index = std::stoull(next("best_index"));
  std::string stop = next("stop_reason");
  t.report_.stop_reason = stop == "-" ? "" : stop;
  t.finished_ = next("finished") == "1";
  std::size_t hist = std::stoull(next("history"));
  t.report_.history.clear();
  for (std::size_t k = 0; k < hist; ++k) {
    ValidationRecord r;
    std::string step, f1, em, bce, nm, total, tau;
    if (!(in >> step >> f1 >> em >> bce >> nm >> total >> tau))
      throw DataError("trainer state: truncated history in " + (dir / kStateFile).string());
    r.step = std::stoull(step);
    r.val_f1 = parse_f64_bits(f1);
    r.val_loss.em_loss = parse_f64_bits(em);
    r.val_loss.bce_loss = parse_f64_bits(bce);
    r.val_loss.nonmatch_nll = parse_f64_bits(nm);
    r.val_loss.total = parse_f64_bits(total);
    r.threshold = parse_f64_bits(tau);
    t.report_.history.push_back(r);
  }
  // the constructor shuffled for epoch 0; replay the stored epoch's order
  // (batch_index_ stays where the snapshot left it)
  t.reshuffle();
  return t;
}

void TrainReport::write_history_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "step,val_f1,em_loss,bce_loss,nonmatch_nll,total,threshold\n";
  char buf[256];
  for (const ValidationRecord& r : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.step, r.val_f1,
                  r.val_loss.em_loss, r.val_loss.bce_loss, r.val_loss.nonmatch_nll, r.val_loss.total,
                  r.threshold);
    out << buf;
  }
}

void TrainReport::write_summary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  const ValidationRecord& best = history.at(best_index);
  char buf[384];
  std::snprintf(buf, sizeof(buf),
                "{\n  \"best_step\": %zu,\n  \"best_val_f1\": %.6f,\n  \"threshold\": %.6f,\n"
                "  \"validations\": %zu,\n  \"stop_reason\": \"%s\"\n}\n",
                best.step, best.val_f1, best.threshold, history.size(), stop_reason.c_str());
  out << buf;
}

} // namespace ortho
