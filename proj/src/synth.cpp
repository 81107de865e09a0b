#include "gzf/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gzf {

namespace {

constexpr std::array<const char*, 8> kGlyphNames = {"square", "cross", "ring", "saltire",
                                                    "hbar",   "vbar",  "triangle", "diamond"};

// Per-class tint; each channel is pushed up (+1) or down (-1) by the contrast.
constexpr std::array<std::array<int, 3>, 8> kTints = {{{+1, -1, -1},
                                                       {-1, +1, -1},
                                                       {-1, -1, +1},
                                                       {+1, +1, -1},
                                                       {+1, -1, +1},
                                                       {-1, +1, +1},
                                                       {+1, +1, +1},
                                                       {-1, -1, -1}}};

bool glyph_covers(int shape, Index u, Index v, Index size) {
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  const double w = std::max(1.0, static_cast<double>(size) / 6.0);
  const double du = std::abs(static_cast<double>(u) - c);
  const double dv = std::abs(static_cast<double>(v) - c);
  switch (shape % 8) {
    case 0: return true;
    case 1: return du < w || dv < w;
    case 2: return u < w || v < w || u >= size - w || v >= size - w;
    case 3: return std::abs(static_cast<double>(u - v)) < w || std::abs(static_cast<double>(u + v) - 2.0 * c) < w;
    case 4: return dv < 1.5 * w;
    case 5: return du < 1.5 * w;
    case 6: return du <= static_cast<double>(v) / 2.0;
    default: return du + dv <= c;
  }
}

Index grid_cells(int num_classes) {
  return static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(num_classes))));
}

// Inclusive bounds for the glyph's top-left corner.
struct Box {
  Index x0, x1, y0, y1;
};

Box placement_box(const SynthConfig& cfg, int label) {
  const Index s = cfg.image_size;
  const Index g = cfg.glyph_size;
  const Index lo = cfg.marker_size + 1;  // clear of the corner marker
  const Index hi = s - g;
  Box b{lo, hi, lo, hi};
  if (cfg.placement == GlyphPlacement::ClassRegion) {
    const Index cells = grid_cells(cfg.num_classes);
    const Index cell = s / cells;
    const Index cx = label % cells;
    const Index cy = label / cells;
    b.x0 = std::max(lo, cx * cell);
    b.x1 = std::min(hi, (cx + 1) * cell - g);
    b.y0 = std::max(lo, cy * cell);
    b.y1 = std::min(hi, (cy + 1) * cell - g);
  }
  return b;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

std::string to_string(GlyphPlacement p) { return p == GlyphPlacement::Uniform ? "uniform" : "class_region"; }

GlyphPlacement parse_glyph_placement(const std::string& s) {
  if (s == "class_region") return GlyphPlacement::ClassRegion;
  if (s == "uniform") return GlyphPlacement::Uniform;
  throw ConfigError("unknown glyph placement '" + s + "' (expected class_region|uniform)");
}

void SynthConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("synth: ") + name + " must lie in [0, 1]");
  };
  prob(p_spurious_train, "p_spurious_train");
  prob(p_spurious_test, "p_spurious_test");
  if (num_classes < 2 || num_classes > 64) throw ConfigError("synth: num_classes must lie in [2, 64]");
  if (samples_per_class < 1) throw ConfigError("synth: samples_per_class must be positive");
  if (designated_class < 0 || designated_class >= num_classes) {
    throw ConfigError("synth: designated_class outside [0, num_classes)");
  }
  if (gaze_len < 1) throw ConfigError("synth: gaze_len must be positive");
  if (!(gaze_noise_sigma >= 0.0)) throw ConfigError("synth: gaze_noise_sigma must be non-negative");
  if (!(gaze_converge_rate > 0.0 && gaze_converge_rate <= 1.0)) {
    throw ConfigError("synth: gaze_converge_rate must lie in (0, 1]");
  }
  if (!(background_noise_sigma >= 0.0)) throw ConfigError("synth: background_noise_sigma must be non-negative");
  if (marker_size < 1 || glyph_size < 3) throw ConfigError("synth: marker_size >= 1 and glyph_size >= 3 required");
  if (split.train < 0 || split.test < 0 || split.train + split.test == 0) {
    throw ConfigError("synth: split ratio components must be non-negative and not both zero");
  }
  for (int c = 0; c < num_classes; ++c) {
    const Box b = placement_box(*this, c);
    if (b.x0 > b.x1 || b.y0 > b.y1) {
      throw ConfigError("synth: image_size " + std::to_string(image_size) + " leaves no room for class " +
                        std::to_string(c) + "'s glyph");
    }
  }
}

double marker_probability(const SynthConfig& cfg, int label, bool train_split) {
  const double p = train_split ? cfg.p_spurious_train : cfg.p_spurious_test;
  return label == cfg.designated_class ? p : 1.0 - p;
}

GazeTrajectory synth_gaze(const Eigen::Vector2d& target, const SynthConfig& cfg, Rng& rng) {
  const double s = static_cast<double>(cfg.image_size);
  std::uniform_real_distribution<double> start(0.0, s);
  std::normal_distribution<double> noise(0.0, 1.0);
  GazeTrajectory t;
  t.source_extent = {s, s};
  t.points.reserve(cfg.gaze_len);
  Eigen::Vector2d p(start(rng), start(rng));
  t.points.push_back(p);
  while (t.points.size() < cfg.gaze_len) {
    p += cfg.gaze_converge_rate * (target - p);
    if (cfg.gaze_noise_sigma > 0.0) {
      const double ex = noise(rng);
      const double ey = noise(rng);
      p += cfg.gaze_noise_sigma * Eigen::Vector2d(ex, ey);
    }
    p = p.cwiseMax(0.0).cwiseMin(s);
    t.points.push_back(p);
  }
  return t;
}

SynthSample make_sample(const SynthConfig& cfg, std::size_t index, int label, bool train_split, bool marker) {
  Rng rng(sample_seed(cfg.seed, index));
  const Box box = placement_box(cfg, label);
  std::uniform_int_distribution<Index> px(box.x0, box.x1);
  std::uniform_int_distribution<Index> py(box.y0, box.y1);
  const Index gx = px(rng);
  const Index gy = py(rng);
  std::bernoulli_distribution marker_draw(marker_probability(cfg, label, train_split));
  (void)marker_draw(rng);  // keeps the stream aligned whichever way the marker goes

  SynthSample s;
  s.label = label;
  s.marker = marker;
  const Index n = cfg.image_size;
  s.image.width = n;
  s.image.height = n;
  s.image.pixels.assign(static_cast<std::size_t>(n * n * 3), 0.5);

  std::normal_distribution<double> bg(0.0, 1.0);
  const auto& tint = kTints[static_cast<std::size_t>(label % 8)];
  for (Index y = 0; y < n; ++y) {
    for (Index x = 0; x < n; ++x) {
      const Index u = x - gx;
      const Index v = y - gy;
      const bool glyph = u >= 0 && v >= 0 && u < cfg.glyph_size && v < cfg.glyph_size &&
                         glyph_covers(label, u, v, cfg.glyph_size);
      const bool in_marker = marker && x < cfg.marker_size && y < cfg.marker_size;
      for (Index c = 0; c < 3; ++c) {
        double value = 0.5 + cfg.background_noise_sigma * bg(rng);
        if (glyph) value += cfg.glyph_contrast * tint[static_cast<std::size_t>(c)];
        if (in_marker) value = cfg.marker_intensity;
        s.image.at(y, x, c) = std::clamp(value, 0.0, 1.0);
      }
    }
  }

  s.glyph_center = {static_cast<double>(gx) + static_cast<double>(cfg.glyph_size) / 2.0,
                    static_cast<double>(gy) + static_cast<double>(cfg.glyph_size) / 2.0};
  s.gaze = synth_gaze(s.glyph_center, cfg, rng);
  return s;
}

SynthSample make_sample(const SynthConfig& cfg, std::size_t index, int label, bool train_split) {
  Rng rng(sample_seed(cfg.seed, index));
  const Box box = placement_box(cfg, label);
  std::uniform_int_distribution<Index> px(box.x0, box.x1);
  std::uniform_int_distribution<Index> py(box.y0, box.y1);
  (void)px(rng);
  (void)py(rng);
  std::bernoulli_distribution marker_draw(marker_probability(cfg, label, train_split));
  return make_sample(cfg, index, label, train_split, marker_draw(rng));
}

DatasetManifest generate_dataset(const SynthConfig& cfg, const fs::path& out_dir, SynthMeta* meta) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  fs::create_directories(out_dir / "gaze", ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

  DatasetManifest m;
  m.root = out_dir;
  m.image_extent = {static_cast<double>(cfg.image_size), static_cast<double>(cfg.image_size)};
  m.gaze_extent = m.image_extent;
  for (int c = 0; c < cfg.num_classes; ++c) {
    m.classes.push_back(std::string(kGlyphNames[static_cast<std::size_t>(c % 8)]) +
                        (c >= 8 ? "_" + std::to_string(c / 8) : ""));
  }
  const std::size_t total = static_cast<std::size_t>(cfg.num_classes) * static_cast<std::size_t>(cfg.samples_per_class);
  for (std::size_t i = 0; i < total; ++i) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << i;
    m.samples.push_back({"images/" + name.str() + ".ppm", "gaze/" + name.str() + ".csv",
                         static_cast<int>(i / static_cast<std::size_t>(cfg.samples_per_class)), ""});
  }

  auto [train, test] = split_dataset(m, cfg.split, cfg.seed);
  std::vector<bool> is_train(total, false);
  for (const auto& s : train.samples) {
    is_train[static_cast<std::size_t>(std::stoul(s.image.substr(7, 6)))] = true;
  }

  std::ostringstream meta_csv;
  meta_csv << "index,label,split,marker,glyph_x,glyph_y\n";
  if (meta) {
    meta->marker.assign(total, false);
    meta->glyph_center.assign(total, Eigen::Vector2d::Zero());
  }
  for (std::size_t i = 0; i < total; ++i) {
    SampleEntry& e = m.samples[i];
    e.split = is_train[i] ? "train" : "test";
    const SynthSample s = make_sample(cfg, i, e.label, is_train[i]);
    save_ppm(out_dir / e.image, s.image);
    save_gaze_csv(out_dir / e.gaze, s.gaze);
    meta_csv << i << ',' << e.label << ',' << e.split << ',' << (s.marker ? 1 : 0) << ',' << s.glyph_center.x()
             << ',' << s.glyph_center.y() << '\n';
    if (meta) {
      meta->marker[i] = s.marker;
      meta->glyph_center[i] = s.glyph_center;
    }
  }

  save_manifest(m, out_dir / "manifest.json");
  std::ofstream mf(out_dir / "synth_meta.csv", std::ios::trunc);
  if (!mf) throw IoError("cannot write " + (out_dir / "synth_meta.csv").string());
  mf << meta_csv.str();
  return m;
}

}  // namespace gzf
