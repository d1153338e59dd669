#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpt/matrix.hpp"
#include "mpt/netcore.hpp"

namespace mpt {

/// Labelled examples with every input coordinate inside the prior support
/// [-1, 1]. `inputs` holds one flattened example per row.
struct Dataset {
  std::string name;
  Matrix inputs;
  Shape input_shape;
  std::vector<std::uint32_t> labels;
  std::uint32_t num_labels = 0;

  std::size_t size() const { return labels.size(); }
};

void validate(const Dataset& ds);

struct NoiseSpec {
  double level = 0.1;
  std::uint64_t seed = 0;
};

/// The standard protocol's noise levels 0.1, 0.2, ..., 1.0.
std::vector<double> standard_noise_levels();

/// Maps an IDX pixel byte linearly from [0, 255] onto [-1, 1].
double pixel_to_support(std::uint8_t byte);

/// Parses an IDX image file (magic 2051, unsigned bytes, N x rows x cols)
/// and its IDX label file (magic 2049). K is 10.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);
Dataset parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes,
                  std::string name = "idx");

using Point2 = std::array<double, 2>;

/// Isotropic Gaussian blobs around `centers`, clamped into [-1, 1]^2.
/// Rows are grouped by class.
Dataset synth_blobs(std::size_t n_per_class, std::uint32_t num_labels, std::span<const Point2> centers,
                    double spread, std::uint64_t seed, std::string name = "blobs");

/// Adds independent U[-level, level] noise to every coordinate, then clamps
/// into [-1, 1].
Dataset perturb(const Dataset& ds, const NoiseSpec& noise);

/// Adds a per-coordinate offset (broadcast if a single value) and clamps.
Dataset shift(const Dataset& ds, std::span<const double> offset, std::string name);

/// Keeps only examples whose label is listed; K is unchanged.
Dataset select_labels(const Dataset& ds, std::span<const std::uint32_t> keep, std::string name);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices, std::string name);

/// Seeded shuffle split into (train, test) with round(fraction * N) train rows.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

}  // namespace mpt
