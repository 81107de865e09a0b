#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gzf/tensor.hpp"

namespace gzf {

namespace fs = std::filesystem;

/// Time-ordered fixations; row order is temporal order.
struct GazeTrajectory {
  std::vector<Eigen::Vector2d> points;
  Eigen::Vector2d source_extent{224.0, 224.0};  // (width, height) of the coordinate frame

  std::size_t size() const noexcept { return points.size(); }
  /// L x 2 tensor of (x, y) rows.
  Tensor to_tensor() const;
};

/// Parses the two-column "x,y" CSV format; an optional "x,y" header is allowed.
GazeTrajectory parse_gaze_csv(std::istream& in, Eigen::Vector2d source_extent = {224.0, 224.0});
GazeTrajectory load_gaze_csv(const fs::path& path, Eigen::Vector2d source_extent = {224.0, 224.0});
/// Writes shortest round-trip decimal representations, so load(save(t)) == t.
void save_gaze_csv(const fs::path& path, const GazeTrajectory& t);

/// Throws DataError if any point lies outside [0, extent].
void validate_gaze(const GazeTrajectory& t);

/// Linear per-axis rescale from the source frame to [0, dst].
GazeTrajectory normalize_gaze(const GazeTrajectory& t, double dst = 224.0);

/// Truncates to the first `length` points or pads by repeating the last point.
GazeTrajectory fit_length(const GazeTrajectory& t, std::size_t length = 176);

/// RGB image with interleaved pixels in [0, 1].
struct ImageSample {
  Index width = 0;
  Index height = 0;
  std::vector<double> pixels;  // height * width * 3, row-major, RGB interleaved

  double& at(Index y, Index x, Index c) { return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)]; }
  double at(Index y, Index x, Index c) const {
    return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
  }
};

/// Binary PPM (P6, maxval 255) only.
ImageSample load_ppm(const fs::path& path);
ImageSample parse_ppm(const std::string& bytes);
/// Quantizes each channel to round(255 v).
void save_ppm(const fs::path& path, const ImageSample& img);
std::string encode_ppm(const ImageSample& img);

/// (v - 0.5) / 0.5 per channel, laid out as a 3 x H x W tensor.
Tensor normalize_image(const ImageSample& img);

struct SampleEntry {
  std::string image;  // relative to the manifest directory
  std::string gaze;
  int label = 0;
  std::string split;  // "train", "test", or empty
};

struct DatasetManifest {
  int version = 1;
  std::vector<std::string> classes;
  Eigen::Vector2d image_extent{224.0, 224.0};
  Eigen::Vector2d gaze_extent{224.0, 224.0};
  std::vector<SampleEntry> samples;
  fs::path root;  // directory the relative paths resolve against

  std::size_t num_classes() const noexcept { return classes.size(); }
  /// Subset whose split tag equals `tag`.
  DatasetManifest subset(const std::string& tag) const;
  /// Throws DataError for bad labels or missing files.
  void validate(bool check_files = true) const;
};

DatasetManifest load_manifest(const fs::path& path);
/// Serializes to JSON; `path`'s directory becomes the manifest root.
void save_manifest(const DatasetManifest& m, const fs::path& path);
std::string manifest_json(const DatasetManifest& m);

struct SplitRatio {
  int train = 5;
  int test = 1;
};

/// Seeded per-class stratified partition. Classes with fewer than
/// train + test samples are split best-effort and reported in `warnings`.
std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& m, SplitRatio ratio,
                                                          std::uint64_t seed,
                                                          std::vector<std::string>* warnings = nullptr);

/// Image + trajectory + label, as stored on disk.
struct LabeledSample {
  ImageSample image;
  GazeTrajectory gaze;
  int label = 0;
};

LabeledSample load_sample(const DatasetManifest& m, std::size_t index);

/// Model-ready sample: normalized 3 x H x W image and L x 2 trajectory in [0, 224].
struct PreparedSample {
  Tensor image;
  Tensor gaze;
  int label = 0;
};

PreparedSample prepare_sample(const LabeledSample& s, std::size_t gaze_len = 176, double gaze_dst = 224.0);
std::vector<PreparedSample> load_prepared(const DatasetManifest& m, std::size_t gaze_len = 176,
                                          double gaze_dst = 224.0);

}  // namespace gzf
