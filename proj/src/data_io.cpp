#include "gzf/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

namespace gzf {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& field, double& out) {
  const std::string f = trim(field);
  if (f.empty()) return false;
  const char* first = f.data();
  const char* last = f.data() + f.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Tensor GazeTrajectory::to_tensor() const {
  if (points.empty()) throw DataError("gaze trajectory is empty");
  Matrix m(static_cast<Index>(points.size()), 2);
  for (std::size_t i = 0; i < points.size(); ++i) m.row(static_cast<Index>(i)) = points[i].transpose();
  return Tensor::from_matrix(std::move(m));
}

GazeTrajectory parse_gaze_csv(std::istream& in, Eigen::Vector2d source_extent) {
  GazeTrajectory t;
  t.source_extent = source_extent;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (lineno == 1 && s == "x,y") continue;
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ParseError("gaze csv: expected two comma-separated coordinates", lineno);
    if (s.find(',', comma + 1) != std::string::npos) {
      throw ParseError("gaze csv: expected exactly two coordinates", lineno);
    }
    double x = 0.0, y = 0.0;
    if (!parse_double(s.substr(0, comma), x) || !parse_double(s.substr(comma + 1), y)) {
      throw ParseError("gaze csv: non-numeric coordinate in '" + s + "'", lineno);
    }
    t.points.emplace_back(x, y);
  }
  if (t.points.empty()) throw DataError("gaze csv: no fixations");
  return t;
}

GazeTrajectory load_gaze_csv(const fs::path& path, Eigen::Vector2d source_extent) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gaze file " + path.string());
  try {
    return parse_gaze_csv(in, source_extent);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_gaze_csv(const fs::path& path, const GazeTrajectory& t) {
  std::string out = "x,y\n";
  for (const auto& p : t.points) out += format_double(p.x()) + "," + format_double(p.y()) + "\n";
  write_file(path, out);
}

void validate_gaze(const GazeTrajectory& t) {
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const auto& p = t.points[i];
    if (p.x() < 0.0 || p.y() < 0.0 || p.x() > t.source_extent.x() || p.y() > t.source_extent.y()) {
      throw DataError("gaze point " + std::to_string(i) + " (" + format_double(p.x()) + ", " +
                      format_double(p.y()) + ") outside the " + format_double(t.source_extent.x()) + "x" +
                      format_double(t.source_extent.y()) + " frame");
    }
  }
}

GazeTrajectory normalize_gaze(const GazeTrajectory& t, double dst) {
  if (!(t.source_extent.x() > 0.0) || !(t.source_extent.y() > 0.0)) {
    throw DataError("normalize_gaze: source extent must be positive");
  }
  if (!(dst > 0.0)) throw DataError("normalize_gaze: destination extent must be positive");
  GazeTrajectory out;
  out.source_extent = {dst, dst};
  out.points.reserve(t.points.size());
  // Dividing first keeps the far edge exact: extent / extent == 1, so it lands
  // on dst instead of one ulp past it.
  const Eigen::Vector2d& ext = t.source_extent;
  for (const auto& p : t.points) out.points.emplace_back(p.x() / ext.x() * dst, p.y() / ext.y() * dst);
  return out;
}

GazeTrajectory fit_length(const GazeTrajectory& t, std::size_t length) {
  if (length < 1) throw DataError("fit_length: target length must be at least 1");
  if (t.points.empty()) throw DataError("fit_length: empty trajectory");
  GazeTrajectory out;
  out.source_extent = t.source_extent;
  const std::size_t keep = std::min(length, t.points.size());
  out.points.assign(t.points.begin(), t.points.begin() + static_cast<std::ptrdiff_t>(keep));
  out.points.resize(length, t.points[keep - 1]);
  return out;
}

ImageSample parse_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_ws();
    const std::size_t start = pos;
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw FormatError(std::string("ppm: ") + what + " too large");
      ++pos;
    }
    if (pos == start) throw FormatError(std::string("ppm: missing ") + what + " at byte " + std::to_string(start));
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError("ppm: expected magic 'P6' (binary RGB)");
  }
  pos = 2;
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (width <= 0 || height <= 0) throw FormatError("ppm: non-positive dimensions");
  if (maxval != 255) throw FormatError("ppm: only maxval 255 is supported, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("ppm: missing separator before pixel data");
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (bytes.size() - pos < need) {
    throw FormatError("ppm: truncated payload, expected " + std::to_string(need) + " bytes, got " +
                      std::to_string(bytes.size() - pos));
  }
  ImageSample img;
  img.width = width;
  img.height = height;
  img.pixels.resize(need);
  for (std::size_t i = 0; i < need; ++i) {
    img.pixels[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  }
  return img;
}

ImageSample load_ppm(const fs::path& path) {
  try {
    return parse_ppm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string encode_ppm(const ImageSample& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != static_cast<std::size_t>(img.width * img.height * 3)) {
    throw DataError("ppm: pixel buffer does not match dimensions");
  }
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.pixels.size());
  for (double v : img.pixels) {
    const double q = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return out;
}

void save_ppm(const fs::path& path, const ImageSample& img) { write_file(path, encode_ppm(img)); }

Tensor normalize_image(const ImageSample& img) {
  Tensor t({3, img.height, img.width});
  Matrix& m = t.matrix();
  for (Index y = 0; y < img.height; ++y) {
    for (Index x = 0; x < img.width; ++x) {
      for (Index c = 0; c < 3; ++c) m(c, y * img.width + x) = (img.at(y, x, c) - 0.5) / 0.5;
    }
  }
  return t;
}

DatasetManifest DatasetManifest::subset(const std::string& tag) const {
  DatasetManifest out = *this;
  out.samples.clear();
  for (const auto& s : samples) {
    if (s.split == tag) out.samples.push_back(s);
  }
  return out;
}

void DatasetManifest::validate(bool check_files) const {
  if (version != 1) throw FormatError("manifest: unsupported version " + std::to_string(version));
  if (classes.empty()) throw DataError("manifest: no classes");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= classes.size()) {
      throw DataError("manifest: sample " + std::to_string(i) + " has label " + std::to_string(s.label) +
                      " outside [0, " + std::to_string(classes.size()) + ")");
    }
    if (check_files) {
      for (const auto& rel : {s.image, s.gaze}) {
        if (!fs::exists(root / rel)) {
          throw IoError("manifest: sample " + std::to_string(i) + " references missing file " + (root / rel).string());
        }
      }
    }
  }
}

std::string manifest_json(const DatasetManifest& m) {
  json j;
  j["version"] = m.version;
  j["classes"] = m.classes;
  j["image_extent"] = {m.image_extent.x(), m.image_extent.y()};
  j["gaze_extent"] = {m.gaze_extent.x(), m.gaze_extent.y()};
  json samples = json::array();
  for (const auto& s : m.samples) {
    json e{{"image", s.image}, {"gaze", s.gaze}, {"label", s.label}};
    if (!s.split.empty()) e["split"] = s.split;
    samples.push_back(std::move(e));
  }
  j["samples"] = std::move(samples);
  return j.dump(1) + "\n";
}

void save_manifest(const DatasetManifest& m, const fs::path& path) { write_file(path, manifest_json(m)); }

DatasetManifest load_manifest(const fs::path& path) {
  const std::string text = read_file(path);
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.version = j.at("version").get<int>();
    if (m.version != 1) throw FormatError("manifest: unsupported version " + std::to_string(m.version));
    m.classes = j.at("classes").get<std::vector<std::string>>();
    const auto ie = j.at("image_extent").get<std::vector<double>>();
    const auto ge = j.at("gaze_extent").get<std::vector<double>>();
    if (ie.size() != 2 || ge.size() != 2) throw FormatError("manifest: extents must be [w, h]");
    m.image_extent = {ie[0], ie[1]};
    m.gaze_extent = {ge[0], ge[1]};
    for (const auto& e : j.at("samples")) {
      SampleEntry s;
      s.image = e.at("image").get<std::string>();
      s.gaze = e.at("gaze").get<std::string>();
      s.label = e.at("label").get<int>();
      if (e.contains("split")) s.split = e.at("split").get<std::string>();
      m.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed manifest: " + e.what());
  }
  m.root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  m.validate(true);
  return m;
}

std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& m, SplitRatio ratio,
                                                          std::uint64_t seed, std::vector<std::string>* warnings) {
  if (ratio.train < 0 || ratio.test < 0 || ratio.train + ratio.test == 0) {
    throw ConfigError("split_dataset: ratio components must be non-negative and not both zero");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < m.samples.size(); ++i) by_class[m.samples[i].label].push_back(i);

  DatasetManifest train = m, test = m;
  train.samples.clear();
  test.samples.clear();
  std::mt19937_64 rng(seed);
  const int parts = ratio.train + ratio.test;
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    if (idx.size() < static_cast<std::size_t>(parts) && warnings && ratio.train > 0 && ratio.test > 0) {
      warnings->push_back("class " + std::to_string(label) + " has only " + std::to_string(idx.size()) +
                          " samples; split is best-effort");
    }
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(idx.size()) * ratio.train / static_cast<double>(parts)));
    for (std::size_t k = 0; k < idx.size(); ++k) (k < n_train ? train_idx : test_idx).push_back(idx[k]);
  }
  // Keep manifest order within each side.
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  for (std::size_t i : train_idx) {
    train.samples.push_back(m.samples[i]);
    train.samples.back().split = "train";
  }
  for (std::size_t i : test_idx) {
    test.samples.push_back(m.samples[i]);
    test.samples.back().split = "test";
  }
  return {std::move(train), std::move(test)};
}

LabeledSample load_sample(const DatasetManifest& m, std::size_t index) {
  const SampleEntry& e = m.samples.at(index);
  LabeledSample s;
  s.image = load_ppm(m.root / e.image);
  s.gaze = load_gaze_csv(m.root / e.gaze, m.gaze_extent);
  validate_gaze(s.gaze);
  s.label = e.label;
  if (s.label < 0 || static_cast<std::size_t>(s.label) >= m.num_classes()) {
    throw DataError("sample " + std::to_string(index) + " label out of range");
  }
  return s;
}

PreparedSample prepare_sample(const LabeledSample& s, std::size_t gaze_len, double gaze_dst) {
  PreparedSample p;
  p.image = normalize_image(s.image);
  p.gaze = fit_length(normalize_gaze(s.gaze, gaze_dst), gaze_len).to_tensor();
  p.label = s.label;
  return p;
}

std::vector<PreparedSample> load_prepared(const DatasetManifest& m, std::size_t gaze_len, double gaze_dst) {
  std::vector<PreparedSample> out;
  out.reserve(m.samples.size());
  for (std::size_t i = 0; i < m.samples.size(); ++i) out.push_back(prepare_sample(load_sample(m, i), gaze_len, gaze_dst));
  return out;
}

}  // namespace gzf
