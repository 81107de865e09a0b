#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gzf/config.hpp"
#include "gzf/trainer.hpp"

namespace gzf {

/// On-disk layout: "GZF1", u64 little-endian header length, JSON header,
/// then float64 little-endian payloads in header order. The header lists each
/// tensor's name, shape, byte offset (from the payload start) and count.
struct CheckpointFile {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

inline constexpr char kCheckpointMagic[4] = {'G', 'Z', 'F', '1'};
inline constexpr int kCheckpointVersion = 1;

void write_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& ckpt);
std::string encode_checkpoint(const CheckpointFile& ckpt);
CheckpointFile read_checkpoint_file(const std::filesystem::path& path);
CheckpointFile decode_checkpoint(const std::string& bytes);

/// Serializes a training state with the run configuration that produced it.
void save_checkpoint(const TrainState& state, const RunConfig& run, const std::filesystem::path& path);

struct LoadedCheckpoint {
  TrainState state;
  RunConfig run;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gzf
