#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gzf/autodiff.hpp"
#include "gzf/data_io.hpp"

namespace gzf {

/// Where each class's discriminative glyph may appear.
///   ClassRegion  uniformly inside a grid cell owned by the class
///   Uniform      uniformly anywhere in the image
enum class GlyphPlacement { ClassRegion, Uniform };

/// Shortcut-bias benchmark: every image carries a class-determining glyph and
/// possibly one bright corner marker whose presence correlates with
/// `designated_class` during training.
struct SynthConfig {
  Index image_size = 64;
  int num_classes = 4;
  int samples_per_class = 150;
  double p_spurious_train = 0.95;
  double p_spurious_test = 0.0;
  int designated_class = 0;
  std::size_t gaze_len = 176;
  double gaze_noise_sigma = 2.0;    // pixels
  double gaze_converge_rate = 0.15;  // lambda in (0, 1]
  double background_noise_sigma = 0.1;
  Index glyph_size = 12;
  double glyph_contrast = 0.1;
  Index marker_size = 8;
  double marker_intensity = 1.0;
  GlyphPlacement placement = GlyphPlacement::ClassRegion;
  SplitRatio split{5, 1};
  std::uint64_t seed = 0;

  void validate() const;
};

std::string to_string(GlyphPlacement p);
GlyphPlacement parse_glyph_placement(const std::string& s);

/// Marker probability for a sample: p for the designated class, 1 - p otherwise.
double marker_probability(const SynthConfig& cfg, int label, bool train_split);

/// Exponential approach from a uniform start: p' = p + lambda (target - p) + N(0, sigma^2 I),
/// clamped to the image. Coordinates are in image pixels.
GazeTrajectory synth_gaze(const Eigen::Vector2d& target, const SynthConfig& cfg, Rng& rng);

struct SynthSample {
  ImageSample image;
  GazeTrajectory gaze;
  int label = 0;
  bool marker = false;
  Eigen::Vector2d glyph_center;
};

/// Renders one sample deterministically from (cfg.seed, index).
SynthSample make_sample(const SynthConfig& cfg, std::size_t index, int label, bool train_split);

/// Draws the sample with an explicit marker decision (used to verify that the
/// marker never changes the label).
SynthSample make_sample(const SynthConfig& cfg, std::size_t index, int label, bool train_split, bool marker);

struct SynthMeta {
  std::vector<bool> marker;
  std::vector<Eigen::Vector2d> glyph_center;
};

/// Writes images/, gaze/, manifest.json and synth_meta.csv under out_dir.
DatasetManifest generate_dataset(const SynthConfig& cfg, const fs::path& out_dir, SynthMeta* meta = nullptr);

/// Per-sample seed derived from the dataset seed and the sample index.
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace gzf
