#include "gzf/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gzf/checkpoint.hpp"
#include "gzf/synth.hpp"

namespace gzf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

json record_json(const MetricsRecord& r) {
  return {{"epoch", r.epoch},       {"train_loss", r.train_loss},       {"val_acc", r.val_acc},
          {"test_acc", r.test_acc}, {"lr_multiplier", r.lr_multiplier}, {"seconds", r.seconds}};
}

json summary_json(const TrainResult& r, const RunConfig& run) {
  return {{"summary", true},
          {"test_acc", r.test_acc},
          {"train_acc", r.train_acc},
          {"best_val_acc", r.state.best_val_acc},
          {"best_epoch", r.state.best_epoch},
          {"epochs_run", r.state.history.size()},
          {"stopped_early", r.stopped_early},
          {"gaze", to_string(run.model.gaze)},
          {"fusion", to_string(run.model.fusion)},
          {"seed", run.train.seed},
          {"config_hash", config_hash(to_json(run))}};
}

void write_metrics(const fs::path& dir, const std::vector<MetricsRecord>& history, const json* summary) {
  std::string jsonl;
  std::string csv = "epoch,train_loss,val_acc,test_acc,lr_multiplier,seconds\n";
  for (const auto& r : history) {
    jsonl += record_json(r).dump() + "\n";
    csv += std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.val_acc) + "," + fmt(r.test_acc) + "," +
           fmt(r.lr_multiplier) + "," + fmt(r.seconds) + "\n";
  }
  if (summary) jsonl += summary->dump() + "\n";
  write_text(dir / "metrics.jsonl", jsonl);
  write_text(dir / "metrics.csv", csv);
}

std::size_t gaze_length(const ModelConfig& m) {
  return static_cast<std::size_t>(m.gaze == GazeEncoderKind::Mlp ? m.mlp.seq_len : m.dsge.seq_len);
}

// Converts library exceptions into the exit-code taxonomy.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const GraphError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

RunConfig base_config(const std::string& config_path) {
  RunConfig base = desk_scale_config();
  return config_path.empty() ? base : load_run_config(config_path, base);
}

void apply_variant(RunConfig& run, const std::string& gaze, const std::string& fusion) {
  if (!gaze.empty()) {
    run.model.gaze = parse_gaze_encoder(gaze);
    if (fusion.empty()) {
      if (run.model.gaze == GazeEncoderKind::None) {
        run.model.fusion = FusionMode::None;
      } else if (run.model.fusion == FusionMode::None) {
        run.model.fusion = FusionMode::Layer;
      }
    }
  }
  if (!fusion.empty()) run.model.fusion = parse_fusion_mode(fusion);
}

// ---- gradcheck fixtures ---------------------------------------------------

constexpr Index kTinyDim = 16;
constexpr Index kTinyClasses = 3;

void jitter(const ParamList& params, double stddev, Rng& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  for (const auto& p : params) {
    for (double& v : p.tensor->values()) v += n(rng);
  }
}

Var tiny_loss(Var logits, int label) {
  const int labels[1] = {label};
  return cross_entropy(logits, labels);
}

GradCheckResult check_dsge(double eps, Rng& rng) {
  DsgeConfig cfg{8, 2, kTinyDim, 2, 2, 32, kTinyDim, 0.0, 0.3, 1.0};
  DsgeParams p = DsgeParams::init(cfg, rng);
  Tensor w = normal_tensor({kTinyClasses, kTinyDim}, 0.3, rng);
  Tensor b = normal_tensor({kTinyClasses}, 0.1, rng);
  // Spread-out points keep the attention away from uniform, so no gradient
  // sits at the finite-difference noise floor.
  Tensor gaze = normal_tensor({8, 2}, 2.0, rng);
  ParamList params;
  p.collect(params);
  jitter(params, 0.1, rng);
  params.push_back({"cls.w", &w});
  params.push_back({"cls.b", &b});
  return grad_check(
      [&](Graph& g) {
        Rng drop(0);
        Var f = dsge_forward(g.constant(gaze), p, cfg, false, drop);
        return tiny_loss(linear(f, g.param(w), g.param(b)), 1);
      },
      params, eps);
}

GradCheckResult check_vit(double eps, Rng& rng) {
  VitConfig cfg{16, 8, kTinyDim, 2, 2, 32, 0.0, 0.3};
  VitParams p = VitParams::init(cfg, rng);
  Tensor w = normal_tensor({kTinyClasses, kTinyDim}, 0.3, rng);
  Tensor b = normal_tensor({kTinyClasses}, 0.1, rng);
  Tensor image = normal_tensor({3, 16, 16}, 1.0, rng);
  ParamList params;
  p.collect(params);
  jitter(params, 0.1, rng);
  params.push_back({"cls.w", &w});
  params.push_back({"cls.b", &b});
  return grad_check(
      [&](Graph& g) {
        Rng drop(0);
        Var f = vit_forward(g, image, p, cfg, false, drop);
        return tiny_loss(linear(f, g.param(w), g.param(b)), 2);
      },
      params, eps);
}

GradCheckResult check_fusion(double eps, Rng& rng) {
  FusionParams p = FusionParams::init(kTinyDim, kTinyClasses, FusionMode::Layer, 0.3, rng);
  Tensor gaze_feature = normal_tensor({1, kTinyDim}, 1.0, rng);
  Tensor image_feature = normal_tensor({1, kTinyDim}, 1.0, rng);
  ParamList params;
  p.collect(params);
  jitter(params, 0.05, rng);
  params.push_back({"g", &gaze_feature});
  params.push_back({"i_hat", &image_feature});
  return grad_check(
      [&](Graph& g) {
        Var f = fuse(g.param(gaze_feature), g.param(image_feature), p);
        return tiny_loss(classify_logits(f, p), 0);
      },
      params, eps);
}

GradCheckResult check_cross_attention(double eps, Rng& rng) {
  FusionParams head = FusionParams::init(kTinyDim, kTinyClasses, FusionMode::CrossAttention, 0.3, rng);
  CrossAttentionParams& ca = *head.cross;
  Tensor w = normal_tensor({kTinyClasses, kTinyDim}, 0.3, rng);
  Tensor b = normal_tensor({kTinyClasses}, 0.1, rng);
  Tensor query = normal_tensor({1, kTinyDim}, 1.0, rng);
  Tensor tokens = normal_tensor({5, kTinyDim}, 1.0, rng);
  ParamList params{{"ca.w_q", &ca.w_q}, {"ca.w_k", &ca.w_k}, {"ca.w_v", &ca.w_v}, {"ca.w_o", &ca.w_o},
                   {"cls.w", &w},       {"cls.b", &b},       {"g", &query},       {"tokens", &tokens}};
  return grad_check(
      [&](Graph& g) {
        Var f = cross_attention_fuse(g.param(query), g.param(tokens), ca);
        return tiny_loss(linear(f, g.param(w), g.param(b)), 1);
      },
      params, eps);
}

// ---- subcommands ----------------------------------------------------------

struct CommonArgs {
  std::string config;
  std::string out;
  std::string data;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const CommonArgs& a, std::ostream& out) {
  RunConfig run = base_config(a.config);
  if (a.seed) run.synth.seed = *a.seed;
  run.synth.validate();
  if (a.out.empty()) throw ConfigError("synth: --out is required");
  const fs::path dir(a.out);
  generate_dataset(run.synth, dir);
  write_text(dir / "config.resolved.json", to_json(run).dump(2) + "\n");
  out << (dir / "manifest.json").string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string gaze, fusion, resume;
  int save_every = 0;
  std::optional<int> stop_after;
  bool no_timing = false;
  bool freeze = false;
};

int cmd_train(const CommonArgs& a, const TrainArgs& t, std::ostream& out, std::ostream& log) {
  if (a.data.empty()) throw ConfigError("train: --data is required");
  if (a.out.empty()) throw ConfigError("train: --out is required");
  RunConfig run;
  if (!t.resume.empty()) {
    if (!fs::exists(t.resume)) throw IoError("train: checkpoint " + t.resume + " not found");
    run = load_checkpoint(t.resume).run;
    if (!a.config.empty()) {
      const RunConfig given = load_run_config(a.config, desk_scale_config());
      if (config_hash(to_json(given)) != config_hash(to_json(run))) {
        throw ConfigError("train: --config differs from the configuration stored in " + t.resume);
      }
    }
  } else {
    run = base_config(a.config);
    if (a.seed) run.train.seed = *a.seed;
    apply_variant(run, t.gaze, t.fusion);
    if (t.no_timing) run.train.record_time = false;
    if (t.freeze) run.train.freeze_encoders = true;
  }
  TrainRunOptions opts;
  opts.manifest = a.data;
  opts.out_dir = a.out;
  if (!t.resume.empty()) opts.resume = t.resume;
  opts.save_every = t.save_every;
  opts.stop_after_epoch = t.stop_after;
  const TrainResult r = run_training(run, opts, log);
  out << summary_json(r, run).dump() << "\n";
  return kExitOk;
}

int cmd_eval(const CommonArgs& a, const std::string& checkpoint, const std::string& split, std::ostream& out) {
  if (checkpoint.empty()) throw ConfigError("eval: --checkpoint is required");
  if (a.data.empty()) throw ConfigError("eval: --data is required");
  if (!fs::exists(checkpoint)) throw IoError("eval: checkpoint " + checkpoint + " not found");
  const LoadedCheckpoint ck = load_checkpoint(checkpoint);
  const DatasetManifest m = load_manifest(a.data);
  const RunConfig run = resolve_run_config(ck.run, m);
  const DatasetSplits data = make_splits(m, run.train, gaze_length(run.model));
  std::vector<PreparedSample> samples;
  if (split == "train") {
    samples = data.train;
  } else if (split == "val") {
    samples = data.val;
  } else if (split == "test") {
    samples = data.test;
  } else if (split == "all") {
    samples = load_prepared(m, gaze_length(run.model));
  } else {
    throw ConfigError("eval: unknown split '" + split + "' (expected train|val|test|all)");
  }
  const EvalReport rep = evaluate_detailed(ck.state.best_model(), samples, env_threads());
  json j = {{"split", split},
            {"accuracy", rep.accuracy},
            {"count", rep.count},
            {"per_class", rep.per_class},
            {"per_class_count", rep.per_class_count}};
  const std::string text = j.dump();
  if (!a.out.empty()) write_text(fs::path(a.out) / ("eval_" + split + ".json"), text + "\n");
  out << text << "\n";
  return kExitOk;
}

int cmd_ablate(const CommonArgs& a, const std::string& axis, int seeds, bool no_timing, std::ostream& out,
               std::ostream& log) {
  if (a.data.empty()) throw ConfigError("ablate: --data is required");
  if (a.out.empty()) throw ConfigError("ablate: --out is required");
  if (seeds < 1) throw ConfigError("ablate: --seeds must be positive");
  RunConfig base = base_config(a.config);
  if (a.seed) base.train.seed = *a.seed;
  if (no_timing) base.train.record_time = false;
  const std::vector<AblationCell> cells = ablation_cells(axis, base);
  const fs::path root(a.out);

  std::string results = "axis,cell,gaze,fusion,hidden,dsge_hidden,layers,seed,test_acc,train_acc,best_val_acc\n";
  std::string summary = "axis,cell,gaze,fusion,hidden,dsge_hidden,layers,seeds,mean_test_acc,mean_train_acc\n";
  for (const auto& cell : cells) {
    double test_sum = 0.0;
    double train_sum = 0.0;
    const std::string prefix = axis + "," + cell.name + "," + to_string(cell.run.model.gaze) + "," +
                               to_string(cell.run.model.fusion) + "," + std::to_string(cell.nominal_hidden) + "," +
                               std::to_string(cell.run.model.dsge.hidden) + "," + std::to_string(cell.layers) + ",";
    for (int k = 0; k < seeds; ++k) {
      RunConfig run = cell.run;
      run.train.seed = base.train.seed + static_cast<std::uint64_t>(k);
      TrainRunOptions opts;
      opts.manifest = a.data;
      opts.out_dir = root / cell.name / ("seed_" + std::to_string(k));
      log << "ablate: " << cell.name << " seed " << run.train.seed << "\n";
      const TrainResult r = run_training(run, opts, log);
      test_sum += r.test_acc;
      train_sum += r.train_acc;
      results += prefix + std::to_string(run.train.seed) + "," + fmt(r.test_acc) + "," + fmt(r.train_acc) + "," +
                 fmt(r.state.best_val_acc) + "\n";
    }
    summary += prefix + std::to_string(seeds) + "," + fmt(test_sum / seeds) + "," + fmt(train_sum / seeds) + "\n";
  }
  write_text(root / "results.csv", results);
  write_text(root / "summary.csv", summary);
  write_text(root / "config.resolved.json", to_json(base).dump(2) + "\n");
  out << summary;
  return kExitOk;
}

int cmd_gradcheck(double eps, bool corrupt, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (eps < kGradCheckMinEps || eps > kGradCheckMaxEps) {
    const double clamped = std::clamp(eps, kGradCheckMinEps, kGradCheckMaxEps);
    err << "warning: --eps " << eps << " outside [" << kGradCheckMinEps << ", " << kGradCheckMaxEps
        << "]; using " << clamped << "\n";
    eps = clamped;
  }
  debug::set_backward_fault(corrupt);
  std::vector<ModuleGradCheck> checks;
  try {
    checks = gradcheck_modules(eps, seed);
  } catch (...) {
    debug::set_backward_fault(false);
    throw;
  }
  debug::set_backward_fault(false);

  const ModuleGradCheck* worst = nullptr;
  for (const auto& c : checks) {
    out << c.module << " max_rel_error=" << c.result.max_rel_error << " coordinates=" << c.result.coordinates << "\n";
    if (!worst || c.result.max_rel_error > worst->result.max_rel_error) worst = &c;
  }
  if (worst && worst->result.max_rel_error >= kGradCheckTolerance) {
    err << "gradcheck failed: " << worst->module << " " << worst->result.worst_param << "[" << worst->result.worst_index
        << "] analytic=" << worst->result.analytic << " numeric=" << worst->result.numeric
        << " rel_error=" << worst->result.max_rel_error << "\n";
    return kExitVerification;
  }
  out << "gradcheck passed (tolerance " << kGradCheckTolerance << ")\n";
  return kExitOk;
}

}  // namespace

RunConfig resolve_run_config(RunConfig run, const DatasetManifest& m) {
  if (m.num_classes() > 0) run.model.num_classes = static_cast<Index>(m.num_classes());
  run.model = with_dropout(run.model, run.train.dropout);
  return run;
}

TrainResult run_training(RunConfig run, const TrainRunOptions& opts, std::ostream& log) {
  std::optional<LoadedCheckpoint> resumed;
  if (opts.resume) resumed = load_checkpoint(*opts.resume);

  const DatasetManifest m = load_manifest(opts.manifest);
  m.validate(true);
  run = resolve_run_config(std::move(run), m);
  run.model.validate();
  run.train.validate();
  run.train.threads = env_threads();

  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + opts.out_dir.string());
  RunConfig echoed = run;
  echoed.train.threads = 1;  // the worker count is environment, not configuration
  write_text(opts.out_dir / "config.resolved.json", to_json(echoed).dump(2) + "\n");

  const DatasetSplits data = make_splits(m, run.train, gaze_length(run.model));
  TrainHooks hooks;
  if (resumed) hooks.resume = &resumed->state;
  hooks.stop_after_epoch = opts.stop_after_epoch;
  const fs::path ckpt_path = opts.out_dir / "checkpoint.gzf";
  hooks.on_epoch_end = [&](const TrainState& state, const MetricsRecord& rec) {
    log << "epoch " << rec.epoch << " loss " << rec.train_loss << " val " << rec.val_acc << " test " << rec.test_acc
        << "\n";
    write_metrics(opts.out_dir, state.history, nullptr);
    if (opts.save_every > 0 && (rec.epoch + 1) % opts.save_every == 0) save_checkpoint(state, echoed, ckpt_path);
  };

  TrainResult r = train(run.model, data, run.train, hooks);
  const json summary = summary_json(r, echoed);
  write_metrics(opts.out_dir, r.state.history, &summary);
  write_text(opts.out_dir / "summary.json", summary.dump(2) + "\n");
  save_checkpoint(r.state, echoed, ckpt_path);
  return r;
}

std::vector<ModuleGradCheck> gradcheck_modules(double eps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ModuleGradCheck> out;
  out.push_back({"gaze_encoder", check_dsge(eps, rng)});
  out.push_back({"image_encoder", check_vit(eps, rng)});
  out.push_back({"fusion_head", check_fusion(eps, rng)});
  out.push_back({"cross_attention", check_cross_attention(eps, rng)});
  return out;
}

std::vector<AblationCell> ablation_cells(const std::string& axis, const RunConfig& base) {
  std::vector<AblationCell> cells;
  auto cell = [&](const std::string& name, GazeEncoderKind gaze, FusionMode fusion) {
    AblationCell c{name, base, 0, static_cast<int>(base.model.dsge.layers)};
    c.run.model.gaze = gaze;
    c.run.model.fusion = fusion;
    cells.push_back(std::move(c));
  };
  if (axis == "gaze") {
    cell("dsge", GazeEncoderKind::Dsge, FusionMode::Layer);
    cell("mlp", GazeEncoderKind::Mlp, FusionMode::Layer);
    cell("none", GazeEncoderKind::None, FusionMode::None);
  } else if (axis == "table3") {
    cell("wo", GazeEncoderKind::None, FusionMode::None);
    cell("dsge", GazeEncoderKind::Dsge, FusionMode::Add);
    cell("dsge_ca", GazeEncoderKind::Dsge, FusionMode::CrossAttention);
    cell("dsge_ca_fusion", GazeEncoderKind::Dsge, FusionMode::CrossAttentionLayer);
    cell("dsge_fusion", GazeEncoderKind::Dsge, FusionMode::Layer);
  } else if (axis == "table2") {
    const DsgeConfig& d = base.model.dsge;
    const double factor = static_cast<double>(d.hidden) / 128.0;
    for (int h : {64, 128, 256}) {
      for (int l : {4, 6, 8}) {
        AblationCell c{"h" + std::to_string(h) + "_l" + std::to_string(l), base, h, l};
        DsgeConfig& cd = c.run.model.dsge;
        cd.hidden = std::max<Index>(d.heads, static_cast<Index>(std::lround(h * factor)));
        cd.hidden -= cd.hidden % d.heads;
        cd.ffn_hidden = std::max<Index>(1, d.ffn_hidden * cd.hidden / d.hidden);
        cd.layers = l;
        c.run.model.gaze = GazeEncoderKind::Dsge;
        if (c.run.model.fusion == FusionMode::None) c.run.model.fusion = FusionMode::Layer;
        cells.push_back(std::move(c));
      }
    }
  } else {
    throw ConfigError("ablate: unknown axis '" + axis + "' (expected gaze|table3|table2)");
  }
  return cells;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaze-guided image classification toolkit", "gzf"};
  app.require_subcommand(1);

  CommonArgs common;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub, bool data) {
    sub->add_option("--config", common.config, "JSON run configuration");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--seed", seed_value, "seed override");
    if (data) sub->add_option("--data", common.data, "dataset manifest.json");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic shortcut dataset");
  add_common(synth, false);

  TrainArgs targs;
  CLI::App* train_cmd = app.add_subcommand("train", "train one model variant");
  add_common(train_cmd, true);
  train_cmd->add_option("--gaze", targs.gaze, "gaze encoder: dsge|mlp|none");
  train_cmd->add_option("--fusion", targs.fusion, "fusion: none|add|layer|ca|ca+layer");
  train_cmd->add_option("--resume", targs.resume, "checkpoint to continue from");
  train_cmd->add_option("--save-every", targs.save_every, "checkpoint every N epochs");
  train_cmd->add_option("--stop-after-epoch", targs.stop_after, "halt after this epoch (for resume tests)");
  train_cmd->add_flag("--no-timing", targs.no_timing, "record 0 seconds so metrics are byte-reproducible");
  train_cmd->add_flag("--freeze-encoders", targs.freeze, "update only the fusion head");

  std::string checkpoint;
  std::string split = "test";
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint.gzf");
  eval_cmd->add_option("--split", split, "train|val|test|all");

  std::string axis = "gaze";
  int seeds = 1;
  bool ablate_no_timing = false;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "run an ablation grid");
  add_common(ablate_cmd, true);
  ablate_cmd->add_option("--axis", axis, "gaze|table3|table2");
  ablate_cmd->add_option("--seeds", seeds, "seeds per cell");
  ablate_cmd->add_flag("--no-timing", ablate_no_timing, "record 0 seconds");

  double eps = kDefaultGradCheckEps;
  bool corrupt = false;
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  grad_cmd->add_option("--eps", eps, "central-difference step");
  grad_cmd->add_option("--seed", seed_value, "fixture seed");
  grad_cmd->add_flag("--corrupt-backward", corrupt, "inject a faulty backward rule (negative control)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  return guarded(err, [&]() -> int {
    auto seed_given = [&](CLI::App* sub) { return sub->count("--seed") > 0; };
    for (CLI::App* sub : {synth, train_cmd, eval_cmd, ablate_cmd}) {
      if (sub->parsed() && seed_given(sub)) common.seed = seed_value;
    }
    if (synth->parsed()) return cmd_synth(common, out);
    if (train_cmd->parsed()) return cmd_train(common, targs, out, err);
    if (eval_cmd->parsed()) return cmd_eval(common, checkpoint, split, out);
    if (ablate_cmd->parsed()) return cmd_ablate(common, axis, seeds, ablate_no_timing, out, err);
    return cmd_gradcheck(eps, corrupt, seed_value, out, err);
  });
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace gzf
