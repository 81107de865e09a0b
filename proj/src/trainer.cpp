#include "gzf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#if defined(__SSE__) || defined(_M_X64)
#include <xmmintrin.h>
#define GZF_HAS_MXCSR 1
#endif

#include "gzf/synth.hpp"

namespace gzf {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& s) {
  Rng rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw FormatError("invalid RNG state");
  return rng;
}

std::vector<Matrix> snapshot(const ParamList& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor->matrix());
  return out;
}

void restore(const ParamList& params, const std::vector<Matrix>& values) {
  if (values.size() != params.size()) throw DimensionError("parameter snapshot does not match the model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].rows() != params[i].tensor->matrix().rows() || values[i].cols() != params[i].tensor->matrix().cols()) {
      throw DimensionError("parameter snapshot shape mismatch for " + params[i].name);
    }
    params[i].tensor->matrix() = values[i];
  }
}

// Splits [0, n) into `parts` contiguous chunks.
std::vector<std::pair<std::size_t, std::size_t>> chunks(std::size_t n, int parts) {
  const std::size_t k = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parts))));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(n * i / k, n * (i + 1) / k);
  return out;
}

// Sharp attention softmaxes push exp() tails and their gradients into the
// subnormal range, where x86 arithmetic runs orders of magnitude slower.
// Flushing them to zero is deterministic and far below any tolerance we use.
class FlushSubnormals {
 public:
  FlushSubnormals() {
#ifdef GZF_HAS_MXCSR
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040u);  // FTZ | DAZ
#endif
  }
  ~FlushSubnormals() {
#ifdef GZF_HAS_MXCSR
    _mm_setcsr(saved_);
#endif
  }
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;

 private:
  unsigned saved_ = 0;
};

template <typename Fn>
void run_parallel(std::size_t jobs, Fn&& fn) {
  if (jobs <= 1) {
    FlushSubnormals ftz;
    fn(0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&, j] {
      FlushSubnormals ftz;
      try {
        fn(j);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ModelConfig with_dropout(ModelConfig m, double rate) {
  m.dsge.dropout = rate;
  m.vit.dropout = rate;
  m.head_dropout = rate;
  return m;
}

void TrainConfig::validate() const {
  if (!(base_lr > 0.0)) throw ConfigError("train: base_lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be non-negative");
  if (batch_size < 1) throw ConfigError("train: batch_size must be positive");
  if (epochs < 1) throw ConfigError("train: epochs must be positive");
  if (!(eta_min > 0.0 && eta_min < 1.0)) throw ConfigError("train: eta_min must lie in (0, 1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train: dropout must lie in [0, 1)");
  if (patience < 1) throw ConfigError("train: patience must be positive");
  if (train_parts < 1 || val_parts < 0) throw ConfigError("train: validation ratio must be train >= 1, val >= 0");
  if (threads < 1) throw ConfigError("train: threads must be positive");
}

double cosine_lr(double epoch, int total_epochs, double eta_min, std::string* warning) {
  if (total_epochs < 1) throw ConfigError("cosine_lr: T must be positive");
  double x = epoch;
  if (x > total_epochs || x < 0.0) {
    if (warning) *warning = "cosine_lr: epoch " + std::to_string(epoch) + " clamped to [0, T]";
    x = std::clamp(x, 0.0, static_cast<double>(total_epochs));
  }
  return (1.0 + std::cos(x * kPi / total_epochs)) / 2.0 * (1.0 - eta_min) + eta_min;
}

void sgd_step(const ParamList& params, std::span<const Matrix> grads, double lr, double momentum,
              double weight_decay, std::vector<Matrix>& buffers) {
  if (grads.size() != params.size()) {
    throw DimensionError("sgd_step: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(params.size()) + " parameters");
  }
  if (buffers.empty()) {
    for (const auto& p : params) buffers.push_back(Matrix::Zero(p.tensor->matrix().rows(), p.tensor->matrix().cols()));
  }
  if (buffers.size() != params.size()) throw DimensionError("sgd_step: momentum buffer count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& w = params[i].tensor->matrix();
    if (grads[i].rows() != w.rows() || grads[i].cols() != w.cols() || buffers[i].rows() != w.rows() ||
        buffers[i].cols() != w.cols()) {
      throw DimensionError("sgd_step: shape mismatch for " + params[i].name);
    }
    buffers[i] = momentum * buffers[i] + (grads[i] + weight_decay * w);
    w -= lr * buffers[i];
  }
}

GazeClassifier TrainState::best_model() const {
  GazeClassifier m = model;
  if (!best_params.empty()) restore(m.parameters(), best_params);
  return m;
}

Index argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Index best = 0;
  for (Index i = 1; i < row.size(); ++i) {
    if (row(i) > row(best)) best = i;
  }
  return best;
}

int env_threads() {
  const char* v = std::getenv("GZF_THREADS");
  if (!v || !*v) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

EvalReport evaluate_detailed(const GazeClassifier& model, std::span<const PreparedSample> samples, int threads) {
  if (samples.empty()) throw DataError("evaluate: empty sample set");
  const Index classes = model.config().num_classes;
  std::vector<int> predicted(samples.size(), -1);
  const auto parts = chunks(samples.size(), threads);
  run_parallel(parts.size(), [&](std::size_t j) {
    for (std::size_t i = parts[j].first; i < parts[j].second; ++i) {
      const Matrix probs = model.predict(samples[i].image, samples[i].gaze);
      predicted[i] = static_cast<int>(argmax_lowest(probs.row(0)));
    }
  });

  EvalReport r;
  r.count = samples.size();
  r.per_class.assign(static_cast<std::size_t>(classes), 0.0);
  r.per_class_count.assign(static_cast<std::size_t>(classes), 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int label = samples[i].label;
    if (label < 0 || label >= classes) throw DataError("evaluate: label of sample " + std::to_string(i) + " out of range");
    r.per_class_count[static_cast<std::size_t>(label)] += 1;
    if (predicted[i] == label) {
      ++correct;
      r.per_class[static_cast<std::size_t>(label)] += 1.0;
    }
  }
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    if (r.per_class_count[c] > 0) r.per_class[c] /= r.per_class_count[c];
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return r;
}

double evaluate(const GazeClassifier& model, std::span<const PreparedSample> samples, int threads) {
  return evaluate_detailed(model, samples, threads).accuracy;
}

DatasetSplits make_splits(const DatasetManifest& m, const TrainConfig& cfg, std::size_t gaze_len) {
  DatasetManifest train_m = m.subset("train");
  DatasetManifest test_m = m.subset("test");
  if (train_m.samples.empty() && test_m.samples.empty()) {
    std::tie(train_m, test_m) = split_dataset(m, SplitRatio{5, 1}, cfg.seed);
  }
  DatasetManifest val_m = train_m;
  val_m.samples.clear();
  if (cfg.val_parts > 0) {
    auto [fit, val] = split_dataset(train_m, SplitRatio{cfg.train_parts, cfg.val_parts}, cfg.seed ^ 0x5bd1e995ULL);
    train_m = std::move(fit);
    val_m = std::move(val);
  }
  DatasetSplits s;
  s.train = load_prepared(train_m, gaze_len);
  s.val = load_prepared(val_m, gaze_len);
  s.test = load_prepared(test_m, gaze_len);
  return s;
}

TrainResult train(const ModelConfig& model_cfg, const DatasetSplits& data, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (data.train.empty()) throw DataError("train: empty training split");
  if (data.test.empty()) throw DataError("train: empty test split");

  TrainState state;
  Rng rng(cfg.seed);
  if (hooks.resume) {
    state = *hooks.resume;
    rng = rng_from_string(state.rng_state);
  } else {
    state.model = GazeClassifier(with_dropout(model_cfg, cfg.dropout), cfg.seed);
  }
  ParamList all = state.model.parameters();
  ParamList trainable = cfg.freeze_encoders ? state.model.head_parameters() : all;
  if (state.best_params.empty()) state.best_params = snapshot(all);

  const std::span<const PreparedSample> monitor = data.val.empty() ? std::span<const PreparedSample>(data.train)
                                                                   : std::span<const PreparedSample>(data.val);
  const int threads = std::max(1, cfg.threads);
  const auto clock_start = std::chrono::steady_clock::now();

  for (int epoch = state.next_epoch; epoch <= cfg.epochs && !state.stopped; ++epoch) {
    const double mult = cosine_lr(epoch, cfg.epochs, cfg.eta_min);
    const double lr = cfg.base_lr * mult;

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t step = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size), ++step) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t batch = end - begin;
      const auto parts = chunks(batch, threads);
      std::vector<std::vector<Matrix>> part_grads(parts.size());
      std::vector<double> part_loss(parts.size(), 0.0);

      run_parallel(parts.size(), [&](std::size_t j) {
        Graph g;
        std::vector<Var> rows;
        std::vector<int> labels;
        for (std::size_t k = parts[j].first; k < parts[j].second; ++k) {
          const PreparedSample& s = data.train[order[begin + k]];
          Rng drop_rng(sample_seed(cfg.seed ^ (static_cast<std::uint64_t>(epoch) << 32), begin + k));
          rows.push_back(state.model.logits(g, s.image, s.gaze, true, drop_rng));
          labels.push_back(s.label);
        }
        const double weight = static_cast<double>(labels.size()) / static_cast<double>(batch);
        Var loss = cross_entropy(concat_rows(rows), labels);
        if (parts.size() > 1) loss = scale(loss, weight);
        g.backward(loss);
        part_loss[j] = loss.value()(0, 0);
        for (const auto& p : trainable) part_grads[j].push_back(g.grad_or_zero(*p.tensor));
      });

      double batch_loss = 0.0;
      for (double l : part_loss) batch_loss += l;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("train: non-finite loss " + std::to_string(batch_loss) + " at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(step));
      }
      std::vector<Matrix>& grads = part_grads[0];
      for (std::size_t j = 1; j < parts.size(); ++j) {
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += part_grads[j][i];
      }
      sgd_step(trainable, grads, lr, cfg.momentum, cfg.weight_decay, state.momentum);
      loss_sum += batch_loss * static_cast<double>(batch);
    }

    MetricsRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_acc = evaluate(state.model, monitor, threads);
    rec.test_acc = evaluate(state.model, data.test, threads);
    rec.lr_multiplier = mult;
    rec.seconds = cfg.record_time
                      ? std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count()
                      : 0.0;

    if (rec.val_acc > state.best_val_acc) {
      state.best_val_acc = rec.val_acc;
      state.best_epoch = epoch;
      state.epochs_since_best = 0;
      state.best_params = snapshot(all);
    } else {
      ++state.epochs_since_best;
      if (state.epochs_since_best >= cfg.patience) state.stopped = true;
    }
    state.next_epoch = epoch + 1;
    state.rng_state = rng_to_string(rng);
    state.history.push_back(rec);
    if (hooks.on_epoch_end) hooks.on_epoch_end(state, rec);
    if (hooks.stop_after_epoch && epoch >= *hooks.stop_after_epoch) break;
  }
  state.rng_state = rng_to_string(rng);

  TrainResult result;
  const GazeClassifier best = state.best_model();
  result.test_acc = evaluate(best, data.test, threads);
  result.train_acc = evaluate(best, data.train, threads);
  result.stopped_early = state.stopped;
  result.state = std::move(state);
  return result;
}

}  // namespace gzf
