#ifndef ORTHO_TRAINING_HPP
#define ORTHO_TRAINING_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ortho/negatives.hpp"
#include "ortho/neural.hpp"
#include "ortho/token.hpp"

namespace ortho {

// Defaults follow the hyperparameter table: batch 512, validate every 50
// batches, patience 10, embedding 256, 2 layers.
struct TrainConfig {
  std::size_t batch_size = 512;
  std::size_t validation_frequency = 50; // batches between validations
  std::size_t patience = 10;             // validations without improvement
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;
  std::size_t d_emb = 256;
  std::size_t layers = 2;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 5.0;

  void validate() const; // throws UsageError
};

struct Calibration {
  double threshold = 0.0;
  double f1 = 0.0;
};

// F1-maximizing threshold over candidate cutoffs: 0, 1 and midpoints between
// adjacent distinct sorted scores; ties resolved toward the smallest
// threshold. Prediction rule is p >= tau. Throws DataError with no positives.
Calibration calibrate_threshold(std::span<const std::pair<double, bool>> scores);

// F1 of the p >= tau rule on a labeled score set (0 when nothing is
// predicted positive or nothing is hit).
double f1_at_threshold(std::span<const std::pair<double, bool>> scores, double tau);

struct ValidationRecord {
  std::size_t step; // batches seen when the validation ran
  double val_f1;
  LossBreakdown val_loss;
  double threshold;
};

struct TrainReport {
  std::vector<ValidationRecord> history;
  std::size_t best_index = 0; // into history
  std::string stop_reason;    // "patience" | "max_epochs"

  double best_val_f1() const { return history.at(best_index).val_f1; }
  void write_history_csv(const std::filesystem::path& path) const;
  void write_summary(const std::filesystem::path& path) const;
};

struct TrainResult {
  NeuralEditModel model; // best checkpoint, calibrated threshold applied
  TrainReport report;
};

std::vector<LabeledPair> make_labeled_rows(std::span<const TokenPair> positives,
                                           const NegativeSet* negatives);

class AdamOptimizer {
public:
  AdamOptimizer(const NeuralEditModel& model, const TrainConfig& cfg);

  void step(NeuralEditModel& model, NeuralGradients& grads);

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path, const NeuralEditModel& model);

private:
  std::vector<Tensor> m_, v_;
  std::uint64_t t_ = 0;
  double lr_, beta1_, beta2_, eps_, clip_;
};

// Incremental training loop with validation-based early stopping and
// checkpoint/resume. Shuffles are derived from (seed, epoch), so resuming
// from saved state replays the exact remaining schedule.
class Trainer {
public:
  Trainer(NeuralEditModel model, std::vector<LabeledPair> train_rows,
          std::vector<LabeledPair> val_rows, const TrainConfig& cfg);

  bool finished() const { return finished_; }
  std::size_t batches_seen() const { return batches_seen_; }

  // Processes one batch (gradient step), running validation when due.
  // Throws NumericError with a diagnostic snapshot if the loss diverges.
  void process_one_batch();

  TrainResult result() const;

  void save_state(const std::filesystem::path& dir) const;
  static Trainer load_state(const std::filesystem::path& dir, std::vector<LabeledPair> train_rows,
                            std::vector<LabeledPair> val_rows);

private:
  void validate_now();
  void reshuffle();

  TrainConfig cfg_;
  NeuralEditModel model_;
  NeuralEditModel best_model_;
  std::vector<LabeledPair> train_rows_, val_rows_;
  AdamOptimizer adam_;
  std::vector<std::size_t> order_;
  std::size_t epoch_ = 0;
  std::size_t batch_index_ = 0;
  std::size_t batches_seen_ = 0;
  double best_f1_ = -1.0;
  std::size_t validations_since_best_ = 0;
  TrainReport report_;
  bool finished_ = false;
};

// Convenience wrapper: run to completion.
TrainResult train(NeuralEditModel model, std::vector<LabeledPair> train_rows,
                  std::vector<LabeledPair> val_rows, const TrainConfig& cfg);

} // namespace ortho

#endif
