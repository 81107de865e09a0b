// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "gzf/cli.hpp"
#include "gzf/config.hpp"
#include "gzf/data_io.hpp"
#include "gzf/model.hpp"
#include "gzf/synth.hpp"
#include "gzf/trainer.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace gzf;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

bool row_stochastic(const std::vector<Matrix>& maps, double tol, std::size_t& count) {
  for (const auto& a : maps) {
    if ((a.array() < 0.0).any()) return false;
    if ((a.rowwise().sum().array() - 1.0).abs().maxCoeff() > tol) return false;
  }
  count += maps.size();
  return true;
}

Tensor random_gaze(Index len, Rng& rng) {
  Tensor t({len, 2});
  std::uniform_real_distribution<double> u(0.0, 224.0);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// 1. Finite-difference gradient check of every module through the CLI.
Outcome gradients() {
  const auto t0 = Clock::now();
  const CliRun r = cli({"gradcheck"});
  const double secs = seconds_since(t0);
  double worst = 0.0;
  for (const auto& l : lines(r.out)) {
    const auto at = l.find("max_rel_error=");
    if (at != std::string::npos) worst = std::max(worst, std::stod(l.substr(at + 14)));
  }
  const bool ok = r.code == 0 && worst < kGradCheckTolerance && secs < 60.0;
  return {ok, "exit " + std::to_string(r.code) + ", worst rel error " + num(worst) + ", " + num(secs, 3) + " s"};
}

// 2. Cosine multiplier at the start, middle and end of a 10-epoch schedule.
Outcome schedule() {
  const double a = cosine_lr(0, 10, 0.01);
  const double b = cosine_lr(5, 10, 0.01);
  const double c = cosine_lr(10, 10, 0.01);
  const double err = std::max({std::abs(a - 1.0), std::abs(b - 0.505), std::abs(c - 0.01)});
  return {err <= 1e-12, "values " + num(a, 17) + ", " + num(b, 17) + ", " + num(c, 17)};
}

// 3. Feature widths and distributions of the full-size model.
Outcome full_scale_shapes() {
  const auto t0 = Clock::now();
  Rng rng(11);
  ModelConfig cfg = full_scale_config().model;
  cfg.gaze = GazeEncoderKind::Dsge;
  std::vector<std::string> problems;
  std::size_t maps = 0;
  for (FusionMode mode : {FusionMode::Layer, FusionMode::CrossAttentionLayer}) {
    cfg.fusion = mode;
    const GazeClassifier model(cfg, 3);
    const Tensor image = testing::random_tensor({3, 224, 224}, rng);
    const Tensor gaze = random_gaze(176, rng);
    Graph g;
    Rng drop(0);
    ForwardTrace trace;
    const Matrix probs = softmax_rows(model.logits(g, image, gaze, false, drop, &trace)).value();
    const std::string tag = to_string(mode) + ": ";
    auto expect = [&](const Matrix& m, Index cols, const char* what) {
      if (m.rows() != 1 || m.cols() != cols) {
        problems.push_back(tag + what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
      }
    };
    expect(trace.gaze_feature, 768, "g");
    expect(trace.image_feature, 768, "image feature");
    expect(trace.concatenated, 1536, "f'");
    expect(trace.fused, 768, "f''");
    expect(probs, cfg.num_classes, "y");
    if (std::abs(probs.sum() - 1.0) > 1e-9) problems.push_back(tag + "probabilities sum to " + num(probs.sum(), 17));
    if (trace.gaze_attention.maps.empty() || trace.image_attention.maps.empty()) {
      problems.push_back(tag + "missing attention maps");
    }
    if (mode == FusionMode::CrossAttentionLayer && trace.cross_attention.maps.empty()) {
      problems.push_back(tag + "missing cross-attention map");
    }
    for (const auto* t : {&trace.gaze_attention, &trace.image_attention, &trace.cross_attention}) {
      if (!row_stochastic(t->maps, 1e-9, maps)) problems.push_back(tag + "attention map not row-stochastic");
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 30.0) problems.push_back("took " + num(secs, 3) + " s");
  std::string detail = std::to_string(maps) + " attention maps checked, " + num(secs, 3) + " s";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// 4. A zeroed fusion layer makes the gaze path invisible to the classifier.
Outcome skip_identity() {
  Rng rng(21);
  ModelConfig full_cfg = desk_scale_config().model;
  full_cfg.gaze = GazeEncoderKind::Dsge;
  full_cfg.fusion = FusionMode::Layer;
  ModelConfig plain_cfg = full_cfg;
  plain_cfg.gaze = GazeEncoderKind::None;
  plain_cfg.fusion = FusionMode::None;
  GazeClassifier full(full_cfg, 5);
  GazeClassifier plain(plain_cfg, 6);
  full.head().w_fuse->matrix().setZero();
  full.head().b_fuse->matrix().setZero();
  plain.vit() = full.vit();
  plain.head().w_cls = full.head().w_cls;
  plain.head().b_cls = full.head().b_cls;
  int identical = 0;
  const int trials = 5;
  for (int i = 0; i < trials; ++i) {
    const Tensor image = testing::random_tensor({3, 64, 64}, rng);
    const Tensor gaze = random_gaze(176, rng);
    if (full.predict(image, gaze) == plain.predict(image, gaze)) ++identical;
  }
  return {identical == trials, std::to_string(identical) + "/" + std::to_string(trials) + " predictions bit-identical"};
}

// 5. Gaze guidance overcomes a spurious marker that the image-only model latches onto.
Outcome shortcut() {
  const fs::path root = testing::scratch_dir("acceptance_shortcut");
  const RunConfig base = desk_scale_config();
  generate_dataset(base.synth, root / "data");
  const auto cells = ablation_cells("gaze", base);
  const int seeds = 3;
  std::map<std::string, double> test_sum, train_sum;
  double slowest = 0.0;
  std::ostringstream null_log;
  for (int s = 0; s < seeds; ++s) {
    const auto t0 = Clock::now();
    for (const auto& cell : cells) {
      RunConfig run = cell.run;
      run.train.seed = base.train.seed + static_cast<std::uint64_t>(s);
      run.train.record_time = false;
      TrainRunOptions opts;
      opts.manifest = root / "data" / "manifest.json";
      opts.out_dir = root / cell.name / ("seed_" + std::to_string(s));
      const TrainResult r = run_training(run, opts, null_log);
      test_sum[cell.name] += r.test_acc;
      train_sum[cell.name] += r.train_acc;
      std::cerr << "shortcut: seed " << s << " " << cell.name << " test " << r.test_acc << " train " << r.train_acc
                << "\n";
    }
    slowest = std::max(slowest, seconds_since(t0));
  }
  const double dsge = 100.0 * test_sum["dsge"] / seeds;
  const double mlp = 100.0 * test_sum["mlp"] / seeds;
  const double wo = 100.0 * test_sum["none"] / seeds;
  const double wo_gap = 100.0 * train_sum["none"] / seeds - wo;
  const bool ok = dsge >= wo + 10.0 && dsge >= mlp && mlp >= wo && wo_gap > 20.0 && slowest < 15 * 60.0;
  return {ok, "mean test acc DSGE " + num(dsge) + ", MLP " + num(mlp) + ", W/O " + num(wo) + " (W/O train-test gap " +
                  num(wo_gap) + "), slowest seed " + num(slowest, 4) + " s"};
}

// 6. Ablation grids have the documented layout and every cell replays exactly.
Outcome ablation() {
  const fs::path root = testing::scratch_dir("acceptance_ablation");
  RunConfig run = testing::tiny_run();
  run.train.epochs = 1;
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << to_json(run).dump(2);
  const std::string data = testing::tiny_dataset("acceptance_ablation_data", run).string();

  std::vector<std::string> problems;
  int replayed = 0;
  const std::map<std::string, std::vector<std::string>> expected = {
      {"table2", {"h64_l4", "h64_l6", "h64_l8", "h128_l4", "h128_l6", "h128_l8", "h256_l4", "h256_l6", "h256_l8"}},
      {"table3", {"wo", "dsge", "dsge_ca", "dsge_ca_fusion", "dsge_fusion"}}};
  for (const auto& [axis, names] : expected) {
    const fs::path out = root / axis;
    const CliRun r = cli({"ablate", "--axis", axis, "--config", cfg.string(), "--data", data, "--out", out.string(),
                          "--no-timing"});
    if (r.code != 0) {
      problems.push_back(axis + " exited " + std::to_string(r.code) + ": " + r.err);
      continue;
    }
    const auto rows = lines(testing::slurp(out / "summary.csv"));
    if (rows.size() != names.size() + 1) {
      problems.push_back(axis + " summary has " + std::to_string(rows.size() - 1) + " cells");
      continue;
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto fields = split_csv(rows[i + 1]);
      if (fields.size() < 2 || fields[1] != names[i]) {
        problems.push_back(axis + " row " + std::to_string(i) + " is '" + rows[i + 1] + "'");
        continue;
      }
      const fs::path cell = out / names[i] / "seed_0";
      const fs::path again = root / "replay" / axis / names[i];
      const CliRun t = cli({"train", "--config", (cell / "config.resolved.json").string(), "--data", data, "--out",
                            again.string(), "--no-timing"});
      if (t.code != 0 || testing::slurp(cell / "metrics.jsonl") != testing::slurp(again / "metrics.jsonl") ||
          testing::slurp(cell / "checkpoint.gzf") != testing::slurp(again / "checkpoint.gzf")) {
        problems.push_back(axis + "/" + names[i] + " does not replay");
      } else {
        ++replayed;
      }
    }
  }
  std::string detail = std::to_string(replayed) + "/14 cells replayed exactly";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// 7. Reproducible runs, exact resume, lossless codecs.
Outcome persistence() {
  const fs::path root = testing::scratch_dir("acceptance_persistence");
  const RunConfig run = testing::tiny_run();
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << to_json(run).dump(2);
  const std::string data = testing::tiny_dataset("acceptance_persistence_data", run).string();
  std::vector<std::string> problems;

  auto train = [&](const std::string& name, std::vector<std::string> extra) {
    std::vector<std::string> args = {"train", "--config", cfg.string(), "--data", data, "--out", (root / name).string(),
                                     "--no-timing"};
    args.insert(args.end(), extra.begin(), extra.end());
    const CliRun r = cli(args);
    if (r.code != 0) problems.push_back(name + " exited " + std::to_string(r.code) + ": " + r.err);
  };
  train("a", {});
  train("b", {});
  train("r", {"--stop-after-epoch", "1"});
  const CliRun rest = cli({"train", "--data", data, "--out", (root / "r").string(), "--resume",
                           (root / "r" / "checkpoint.gzf").string(), "--no-timing"});
  if (rest.code != 0) problems.push_back("resume exited " + std::to_string(rest.code));
  for (const char* f : {"metrics.jsonl", "metrics.csv", "checkpoint.gzf"}) {
    const std::string a = testing::slurp(root / "a" / f);
    if (a.empty() || a != testing::slurp(root / "b" / f)) problems.push_back(std::string("repeat differs in ") + f);
    if (a.empty() || a != testing::slurp(root / "r" / f)) problems.push_back(std::string("resume differs in ") + f);
  }

  std::mt19937_64 rng(5);
  ImageSample img{17, 9, {}};
  for (int i = 0; i < 17 * 9 * 3; ++i) img.pixels.push_back(static_cast<double>(rng() % 256) / 255.0);
  save_ppm(root / "img.ppm", img);
  const ImageSample back = load_ppm(root / "img.ppm");
  if (back.width != img.width || back.height != img.height || back.pixels != img.pixels) {
    problems.push_back("PPM round-trip changed pixels");
  }
  if (encode_ppm(back) != testing::slurp(root / "img.ppm")) problems.push_back("PPM re-encoding differs");

  GazeTrajectory t;
  std::uniform_real_distribution<double> u(0.0, 224.0);
  for (int i = 0; i < 500; ++i) t.points.emplace_back(u(rng), u(rng));
  save_gaze_csv(root / "gaze.csv", t);
  if (load_gaze_csv(root / "gaze.csv").points != t.points) problems.push_back("gaze CSV round-trip changed values");

  std::string detail = problems.empty() ? "repeat, resume and codecs exact" : "";
  for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
  return {problems.empty(), detail};
}

// 8. Gaze normalization, length fitting and the stratified split.
Outcome data_contracts() {
  std::vector<std::string> problems;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (int trial = 0; trial < 200; ++trial) {
    GazeTrajectory t;
    t.source_extent = {50.0 + 2000.0 * u(rng), 50.0 + 2000.0 * u(rng)};
    t.points.emplace_back(0.0, 0.0);
    t.points.push_back(t.source_extent);
    for (int i = 0; i < 30; ++i) t.points.emplace_back(t.source_extent.x() * u(rng), t.source_extent.y() * u(rng));
    const double dst = trial % 2 ? 224.0 : 1.0 + 500.0 * u(rng);
    const GazeTrajectory once = normalize_gaze(t, dst);
    const GazeTrajectory twice = normalize_gaze(once, dst);
    if (once.points[0] != Eigen::Vector2d(0.0, 0.0) || (once.points[1] - Eigen::Vector2d(dst, dst)).norm() > 1e-12) {
      problems.push_back("normalize_gaze endpoints");
      break;
    }
    double drift = 0.0;
    for (std::size_t i = 0; i < once.size(); ++i) {
      drift = std::max(drift, (once.points[i] - twice.points[i]).cwiseAbs().maxCoeff());
      if (once.points[i].minCoeff() < 0.0 || once.points[i].maxCoeff() > dst) drift = 1.0;
    }
    if (drift > 1e-12) {
      problems.push_back("normalize_gaze not idempotent within range");
      break;
    }
  }

  for (std::size_t n = 1; n <= 400 && problems.empty(); n += 3) {
    GazeTrajectory t;
    for (std::size_t i = 0; i < n; ++i) t.points.emplace_back(u(rng), u(rng));
    for (std::size_t len : {1u, 7u, 176u, 250u}) {
      const GazeTrajectory f = fit_length(t, len);
      const std::size_t kept = std::min(n, len);
      bool prefix = std::equal(f.points.begin(), f.points.begin() + static_cast<std::ptrdiff_t>(kept), t.points.begin());
      for (std::size_t i = kept; i < f.size(); ++i) prefix = prefix && f.points[i] == t.points.back();
      if (f.size() != len || !prefix) problems.push_back("fit_length at n=" + std::to_string(n));
    }
  }

  int splits = 0;
  for (int trial = 0; trial < 50; ++trial) {
    DatasetManifest m;
    const int classes = 2 + static_cast<int>(rng() % 9);
    std::vector<int> sizes;
    for (int c = 0; c < classes; ++c) {
      m.classes.push_back("c" + std::to_string(c));
      sizes.push_back(6 + static_cast<int>(rng() % 300));
      for (int i = 0; i < sizes.back(); ++i) m.samples.push_back({"i.ppm", "g.csv", c, ""});
    }
    const auto [train, test] = split_dataset(m, SplitRatio{5, 1}, rng());
    std::vector<int> tr(classes, 0), te(classes, 0);
    for (const auto& s : train.samples) ++tr[s.label];
    for (const auto& s : test.samples) ++te[s.label];
    for (int c = 0; c < classes; ++c) {
      if (std::abs(tr[c] - sizes[c] * 5.0 / 6.0) > 1.0 || tr[c] + te[c] != sizes[c]) {
        problems.push_back("split of class with " + std::to_string(sizes[c]) + " samples gave " +
                           std::to_string(tr[c]) + ":" + std::to_string(te[c]));
      }
    }
    ++splits;
  }

  std::string detail = std::to_string(splits) + " random stratified splits";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},    {"schedule exactness", schedule},
      {"full-scale shapes", full_scale_shapes}, {"skip-connection identity", skip_identity},
      {"shortcut-bias ordering", shortcut},   {"ablation harness", ablation},
      {"determinism and persistence", persistence}, {"data contracts", data_contracts}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << "  "
              << o.detail << std::endl;
  }
  return failed;
}
