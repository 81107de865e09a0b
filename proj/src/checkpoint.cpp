#include "gzf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace gzf {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint payloads assume a little-endian host");

namespace {

constexpr std::size_t kPreamble = 4 + 8;

json metrics_json(const MetricsRecord& r) {
  return {{"epoch", r.epoch},           {"train_loss", r.train_loss},       {"val_acc", r.val_acc},
          {"test_acc", r.test_acc},     {"lr_multiplier", r.lr_multiplier}, {"seconds", r.seconds}};
}

MetricsRecord metrics_from_json(const json& j) {
  MetricsRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.val_acc = j.at("val_acc").get<double>();
  r.test_acc = j.at("test_acc").get<double>();
  r.lr_multiplier = j.at("lr_multiplier").get<double>();
  r.seconds = j.at("seconds").get<double>();
  return r;
}

}  // namespace

std::string encode_checkpoint(const CheckpointFile& ckpt) {
  json meta = ckpt.meta;
  meta["format_version"] = kCheckpointVersion;
  json index = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    index.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"count", t.size()}});
    offset += static_cast<std::uint64_t>(t.size()) * sizeof(double);
  }
  meta["tensors"] = std::move(index);
  const std::string header = meta.dump();

  std::string out;
  out.reserve(kPreamble + header.size() + offset);
  out.append(kCheckpointMagic, 4);
  const std::uint64_t len = header.size();
  char lenbuf[8];
  std::memcpy(lenbuf, &len, 8);
  out.append(lenbuf, 8);
  out += header;
  for (const auto& [name, t] : ckpt.tensors) {
    out.append(reinterpret_cast<const char*>(t.matrix().data()), static_cast<std::size_t>(t.size()) * sizeof(double));
  }
  return out;
}

void write_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to checkpoint " + path.string());
}

CheckpointFile decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < kPreamble) {
    throw FormatError("checkpoint: truncated preamble at offset " + std::to_string(bytes.size()));
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (bytes[i] != kCheckpointMagic[i]) throw FormatError("checkpoint: bad magic at offset " + std::to_string(i));
  }
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 4, 8);
  if (len > bytes.size() - kPreamble) {
    throw FormatError("checkpoint: header length " + std::to_string(len) + " at offset 4 exceeds file size");
  }
  CheckpointFile ckpt;
  try {
    ckpt.meta = json::parse(bytes.begin() + kPreamble, bytes.begin() + static_cast<std::ptrdiff_t>(kPreamble + len));
  } catch (const json::parse_error& e) {
    throw FormatError("checkpoint: corrupted header at offset " + std::to_string(kPreamble + e.byte - 1) + ": " +
                      e.what());
  }
  try {
    const int version = ckpt.meta.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint: version " + std::to_string(version) + " unsupported (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    const std::size_t payload = kPreamble + len;
    for (const auto& e : ckpt.meta.at("tensors")) {
      const auto name = e.at("name").get<std::string>();
      const auto shape = e.at("shape").get<Shape>();
      const auto offset = e.at("offset").get<std::uint64_t>();
      const auto count = e.at("count").get<std::uint64_t>();
      Tensor t(shape);
      if (static_cast<std::uint64_t>(t.size()) != count) {
        throw FormatError("checkpoint: tensor " + name + " count disagrees with its shape");
      }
      const std::uint64_t start = payload + offset;
      if (start + count * sizeof(double) > bytes.size()) {
        throw FormatError("checkpoint: payload of " + name + " truncated at offset " + std::to_string(bytes.size()));
      }
      std::memcpy(t.matrix().data(), bytes.data() + start, count * sizeof(double));
      ckpt.tensors.emplace_back(name, std::move(t));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("checkpoint: malformed tensor entry: ") + e.what());
  }
  ckpt.meta.erase("tensors");
  return ckpt;
}

CheckpointFile read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return decode_checkpoint(os.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_checkpoint(const TrainState& state, const RunConfig& run, const std::filesystem::path& path) {
  CheckpointFile ckpt;
  const json cfg = to_json(run);
  ckpt.meta["config"] = cfg;
  ckpt.meta["config_hash"] = config_hash(cfg);
  ckpt.meta["epoch"] = state.next_epoch;
  ckpt.meta["best_val_acc"] = state.best_val_acc;
  ckpt.meta["best_epoch"] = state.best_epoch;
  ckpt.meta["epochs_since_best"] = state.epochs_since_best;
  ckpt.meta["stopped"] = state.stopped;
  ckpt.meta["rng_state"] = state.rng_state;
  json history = json::array();
  for (const auto& r : state.history) history.push_back(metrics_json(r));
  ckpt.meta["history"] = std::move(history);

  GazeClassifier& model = const_cast<GazeClassifier&>(state.model);
  const ParamList params = model.parameters();
  const ParamList trainable = run.train.freeze_encoders ? model.head_parameters() : params;
  for (const auto& p : params) ckpt.tensors.emplace_back("model/" + p.name, *p.tensor);
  if (state.momentum.size() == trainable.size()) {
    for (std::size_t i = 0; i < trainable.size(); ++i) {
      ckpt.tensors.emplace_back("momentum/" + trainable[i].name,
                                Tensor(trainable[i].tensor->shape(), state.momentum[i]));
    }
  }
  if (state.best_params.size() == params.size()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      ckpt.tensors.emplace_back("best/" + params[i].name, Tensor(params[i].tensor->shape(), state.best_params[i]));
    }
  }
  write_checkpoint_file(path, ckpt);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  CheckpointFile ckpt = read_checkpoint_file(path);
  LoadedCheckpoint out;
  try {
    out.run = parse_run_config(ckpt.meta.at("config"), RunConfig{});
    out.state.next_epoch = ckpt.meta.at("epoch").get<int>();
    out.state.best_val_acc = ckpt.meta.at("best_val_acc").get<double>();
    out.state.best_epoch = ckpt.meta.at("best_epoch").get<int>();
    out.state.epochs_since_best = ckpt.meta.at("epochs_since_best").get<int>();
    out.state.stopped = ckpt.meta.at("stopped").get<bool>();
    out.state.rng_state = ckpt.meta.at("rng_state").get<std::string>();
    for (const auto& r : ckpt.meta.at("history")) out.state.history.push_back(metrics_from_json(r));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": checkpoint header missing training state: " + e.what());
  }

  out.state.model = GazeClassifier(with_dropout(out.run.model, out.run.train.dropout), out.run.train.seed);
  const ParamList params = out.state.model.parameters();
  const ParamList trainable = out.run.train.freeze_encoders ? out.state.model.head_parameters() : params;
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;

  auto fetch = [&](const std::string& name, const Tensor& like) -> const Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError(path.string() + ": checkpoint lacks tensor " + name);
    if (it->second->shape() != like.shape()) {
      throw FormatError(path.string() + ": tensor " + name + " has shape " + shape_string(it->second->shape()) +
                        ", model expects " + shape_string(like.shape()));
    }
    return *it->second;
  };
  for (const auto& p : params) *p.tensor = fetch("model/" + p.name, *p.tensor);
  for (const auto& p : trainable) {
    if (by_name.count("momentum/" + p.name)) out.state.momentum.push_back(fetch("momentum/" + p.name, *p.tensor).matrix());
  }
  if (!out.state.momentum.empty() && out.state.momentum.size() != trainable.size()) {
    throw FormatError(path.string() + ": incomplete momentum buffers");
  }
  for (const auto& p : params) {
    if (by_name.count("best/" + p.name)) out.state.best_params.push_back(fetch("best/" + p.name, *p.tensor).matrix());
  }
  if (!out.state.best_params.empty() && out.state.best_params.size() != params.size()) {
    throw FormatError(path.string() + ": incomplete best-parameter snapshot");
  }
  return out;
}

}  // namespace gzf
