#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gzf/data_io.hpp"
#include "gzf/model.hpp"

namespace gzf {

/// Optimizer recipe. Defaults are the full-scale recipe: SGD with momentum 0.8, weight
/// decay 5e-5, base rate 1e-3 scaled by the cosine multiplier over T = 10
/// epochs down to 0.01, batch 32, dropout 0.1, patience 10.
struct TrainConfig {
  double base_lr = 0.001;
  double momentum = 0.8;
  double weight_decay = 5e-5;
  int batch_size = 32;
  int epochs = 10;  // T; epochs 0..T are run
  double eta_min = 0.01;
  double dropout = 0.1;
  int patience = 10;
  std::uint64_t seed = 0;
  int val_parts = 1;  // validation carved from train at (train_parts : val_parts)
  int train_parts = 9;
  bool freeze_encoders = false;
  int threads = 1;
  bool record_time = true;

  void validate() const;
};

/// Cosine multiplier [(1 + cos(x pi / T)) / 2] (1 - eta_min) + eta_min.
/// x outside [0, T] is clamped; `warning` receives a note when that happens.
double cosine_lr(double epoch, int total_epochs, double eta_min, std::string* warning = nullptr);

/// Classical SGD with coupled weight decay:
///   g <- grad + wd * param;  v <- mu * v + g;  param <- param - lr * v.
/// `buffers` is resized to zeros on first use.
void sgd_step(const ParamList& params, std::span<const Matrix> grads, double lr, double momentum,
              double weight_decay, std::vector<Matrix>& buffers);

struct MetricsRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double lr_multiplier = 1.0;
  double seconds = 0.0;
};

struct TrainState {
  GazeClassifier model;
  std::vector<Matrix> momentum;     // one per trainable parameter
  std::vector<Matrix> best_params;  // one per model parameter
  int next_epoch = 0;
  double best_val_acc = -1.0;
  int best_epoch = -1;
  int epochs_since_best = 0;
  bool stopped = false;
  std::string rng_state;
  std::vector<MetricsRecord> history;

  /// Copy of the model with the best-validation parameters loaded.
  GazeClassifier best_model() const;
};

struct DatasetSplits {
  std::vector<PreparedSample> train, val, test;
};

struct TrainResult {
  TrainState state;
  double test_acc = 0.0;   // best parameters on the test split
  double train_acc = 0.0;  // best parameters on the training split
  bool stopped_early = false;
};

struct TrainHooks {
  /// Called after every epoch with the state that would resume at the next one.
  std::function<void(const TrainState&, const MetricsRecord&)> on_epoch_end;
  /// Continue from a saved state instead of initializing.
  const TrainState* resume = nullptr;
  /// Stop after this epoch (inclusive) without marking the run finished.
  std::optional<int> stop_after_epoch;
};

/// The model config actually trained: every dropout site set to `rate`.
ModelConfig with_dropout(ModelConfig m, double rate);

/// Builds the split sets: manifest split tags ("train"/"test") when present,
/// otherwise a seeded 5:1 split; validation carved from train.
DatasetSplits make_splits(const DatasetManifest& m, const TrainConfig& cfg, std::size_t gaze_len);

TrainResult train(const ModelConfig& model_cfg, const DatasetSplits& data, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

/// Index of the largest probability; ties go to the lowest index.
Index argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& row);

struct EvalReport {
  double accuracy = 0.0;
  std::vector<double> per_class;  // accuracy per class (0 when a class has no samples)
  std::vector<int> per_class_count;
  std::size_t count = 0;
};

/// Fraction of samples whose argmax prediction equals the label (dropout off).
double evaluate(const GazeClassifier& model, std::span<const PreparedSample> samples, int threads = 1);
EvalReport evaluate_detailed(const GazeClassifier& model, std::span<const PreparedSample> samples, int threads = 1);

/// Worker count from GZF_THREADS (default 1).
int env_threads();

}  // namespace gzf
