#include "mpt/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>

#include "mpt/random.hpp"

namespace mpt {
namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;
constexpr std::uint32_t kIdxLabels = 10;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t pos, const std::string& what) {
  if (bytes.size() < pos + 4) throw std::runtime_error(what + ": truncated IDX header");
  return (std::uint32_t{bytes[pos]} << 24) | (std::uint32_t{bytes[pos + 1]} << 16) |
         (std::uint32_t{bytes[pos + 2]} << 8) | std::uint32_t{bytes[pos + 3]};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double clamp_support(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

void validate(const Dataset& ds) {
  if (ds.num_labels == 0) throw std::invalid_argument(ds.name + ": num_labels must be positive");
  if (ds.inputs.rows != ds.labels.size()) {
    throw std::invalid_argument(ds.name + ": input rows and labels differ in count");
  }
  if (ds.inputs.cols != element_count(ds.input_shape)) {
    throw std::invalid_argument(ds.name + ": input width does not match input_shape");
  }
  for (double v : ds.inputs.data) {
    if (!(v >= -1.0 && v <= 1.0)) throw std::invalid_argument(ds.name + ": input outside [-1, 1]");
  }
  for (auto y : ds.labels) {
    if (y >= ds.num_labels) throw std::invalid_argument(ds.name + ": label out of range");
  }
}

std::vector<double> standard_noise_levels() {
  std::vector<double> levels;
  for (int k = 1; k <= 10; ++k) levels.push_back(k / 10.0);
  return levels;
}

double pixel_to_support(std::uint8_t byte) { return byte * 2.0 / 255.0 - 1.0; }

Dataset parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes,
                  std::string name) {
  const std::uint32_t image_magic = read_be32(image_bytes, 0, "images");
  if (image_magic != kImageMagic) {
    throw std::runtime_error("unexpected IDX magic " + std::to_string(image_magic) +
                             " in image file (expected 2051)");
  }
  const std::uint32_t label_magic = read_be32(label_bytes, 0, "labels");
  if (label_magic != kLabelMagic) {
    throw std::runtime_error("unexpected IDX magic " + std::to_string(label_magic) +
                             " in label file (expected 2049)");
  }
  const std::size_t n = read_be32(image_bytes, 4, "images");
  const std::uint32_t rows = read_be32(image_bytes, 8, "images");
  const std::uint32_t cols = read_be32(image_bytes, 12, "images");
  const std::size_t n_labels = read_be32(label_bytes, 4, "labels");
  if (n != n_labels) {
    throw std::runtime_error("IDX count mismatch: " + std::to_string(n) + " images vs " +
                             std::to_string(n_labels) + " labels");
  }
  const std::size_t pixels = std::size_t{rows} * cols;
  if (image_bytes.size() != 16 + n * pixels) {
    throw std::runtime_error(image_bytes.size() < 16 + n * pixels ? "truncated IDX image file"
                                                                    : "trailing bytes in IDX image file");
  }
  if (label_bytes.size() != 8 + n) {
    throw std::runtime_error(label_bytes.size() < 8 + n ? "truncated IDX label file"
                                                        : "trailing bytes in IDX label file");
  }

  Dataset ds;
  ds.name = std::move(name);
  ds.input_shape = {rows, cols};
  ds.num_labels = kIdxLabels;
  ds.inputs = Matrix(n, pixels);
  for (std::size_t k = 0; k < n * pixels; ++k) ds.inputs.data[k] = pixel_to_support(image_bytes[16 + k]);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t y = label_bytes[8 + i];
    if (y >= kIdxLabels) throw std::runtime_error("IDX label " + std::to_string(y) + " out of range");
    ds.labels[i] = y;
  }
  return ds;
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  return parse_idx(images, labels, images_path.stem().string());
}

Dataset synth_blobs(std::size_t n_per_class, std::uint32_t num_labels, std::span<const Point2> centers,
                    double spread, std::uint64_t seed, std::string name) {
  if (num_labels < 2) throw std::invalid_argument("synth_blobs needs at least 2 classes");
  if (centers.size() != num_labels) throw std::invalid_argument("synth_blobs needs one center per class");
  if (!(spread >= 0.0)) throw std::invalid_argument("synth_blobs spread must be non-negative");
  for (const auto& c : centers) {
    if (std::abs(c[0]) > 1.0 || std::abs(c[1]) > 1.0) {
      throw std::invalid_argument("blob centers must lie inside [-1, 1]^2");
    }
  }
  Dataset ds;
  ds.name = std::move(name);
  ds.input_shape = {2};
  ds.num_labels = num_labels;
  ds.inputs = Matrix(n_per_class * num_labels, 2);
  ds.labels.resize(n_per_class * num_labels);
  Rng rng(seed);
  std::size_t row = 0;
  for (std::uint32_t k = 0; k < num_labels; ++k) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
      for (std::size_t d = 0; d < 2; ++d) {
        ds.inputs(row, d) = clamp_support(centers[k][d] + spread * rng.normal());
      }
      ds.labels[row] = k;
    }
  }
  return ds;
}

Dataset perturb(const Dataset& ds, const NoiseSpec& noise) {
  Dataset out = ds;
  Rng rng(noise.seed);
  for (double& v : out.inputs.data) v = clamp_support(v + rng.uniform(-noise.level, noise.level));
  return out;
}

Dataset shift(const Dataset& ds, std::span<const double> offset, std::string name) {
  if (offset.size() != 1 && offset.size() != ds.inputs.cols) {
    throw std::invalid_argument("shift offset must have 1 or input-width entries");
  }
  Dataset out = ds;
  out.name = std::move(name);
  for (std::size_t i = 0; i < out.inputs.rows; ++i) {
    auto row = out.inputs.row(i);
    for (std::size_t d = 0; d < row.size(); ++d) {
      row[d] = clamp_support(row[d] + offset[offset.size() == 1 ? 0 : d]);
    }
  }
  return out;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices, std::string name) {
  Dataset out;
  out.name = std::move(name);
  out.input_shape = ds.input_shape;
  out.num_labels = ds.num_labels;
  out.inputs = Matrix(indices.size(), ds.inputs.cols);
  out.labels.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t src = indices[r];
    if (src >= ds.size()) throw std::out_of_range("subset index out of range");
    std::copy_n(ds.inputs.row(src).begin(), ds.inputs.cols, out.inputs.row(r).begin());
    out.labels[r] = ds.labels[src];
  }
  return out;
}

Dataset select_labels(const Dataset& ds, std::span<const std::uint32_t> keep, std::string name) {
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), ds.labels[i]) != keep.end()) indices.push_back(i);
  }
  return subset(ds, indices, std::move(name));
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("split of " + std::to_string(n) + " examples leaves an empty side");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::span<const std::size_t> all(order);
  return {subset(ds, all.first(n_train), ds.name + "_train"),
          subset(ds, all.subspan(n_train), ds.name + "_test")};
}

}  // namespace mpt
