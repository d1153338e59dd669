#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mpt/matrix.hpp"

namespace mpt {

struct Dense {
  std::uint32_t in_dim = 0;
  std::uint32_t out_dim = 0;
  bool operator==(const Dense&) const = default;
};

/// Valid (unpadded) 2-d convolution over a (channels, height, width) input.
struct Conv2d {
  std::uint32_t in_channels = 0;
  std::uint32_t out_channels = 0;
  std::uint32_t kernel_size = 0;
  std::uint32_t stride = 1;
  bool operator==(const Conv2d&) const = default;
};

/// Concatenated ReLU: [max(v,0), max(-v,0)]. Doubles the leading dimension.
struct CRelu {
  bool operator==(const CRelu&) const = default;
};

struct Flatten {
  bool operator==(const Flatten&) const = default;
};

using Layer = std::variant<Dense, Conv2d, CRelu, Flatten>;
using Shape = std::vector<std::uint32_t>;

struct NetworkSpec {
  std::vector<Layer> layers;
  Shape input_shape;
  std::uint32_t num_labels = 0;
  bool operator==(const NetworkSpec&) const = default;
};

/// Flat storage for theta. Layer by layer: weights (row-major, output index
/// outermost) followed by biases.
struct ParameterVector {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
  bool operator==(const ParameterVector&) const = default;
};

/// dL/dtheta, same layout as ParameterVector.
struct GradientVector {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

std::string layer_name(const Layer& layer);
std::size_t element_count(const Shape& shape);

/// Validates the spec and returns the activation shape before each layer
/// plus the final output shape (layers.size() + 1 entries). Throws
/// std::invalid_argument describing the first incompatibility.
std::vector<Shape> layer_shapes(const NetworkSpec& spec);
void validate(const NetworkSpec& spec);

std::size_t parameter_count(const NetworkSpec& spec);
std::size_t input_size(const NetworkSpec& spec);

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
ParameterVector init_parameters(const NetworkSpec& spec, std::uint64_t seed);

std::vector<double> crelu(std::span<const double> v);

/// Activations of every layer for a batch; activations[l] is the input to
/// layer l (m x size), the last entry holds the energies.
struct ForwardTrace {
  std::vector<Matrix> activations;
  const EnergyTable& energies() const { return activations.back(); }
};

ForwardTrace forward_trace(const NetworkSpec& spec, const ParameterVector& params,
                           const Matrix& batch_inputs);

EnergyTable forward(const NetworkSpec& spec, const ParameterVector& params,
                    const Matrix& batch_inputs);

/// Reverse-mode gradient of sum_i sum_y upstream(i,y) * E(i,y).
GradientVector backward(const NetworkSpec& spec, const ParameterVector& params,
                        const ForwardTrace& trace, const Matrix& upstream);

GradientVector backward(const NetworkSpec& spec, const ParameterVector& params,
                        const Matrix& batch_inputs, const Matrix& upstream);

bool all_finite(std::span<const double> values);

}  // namespace mpt
