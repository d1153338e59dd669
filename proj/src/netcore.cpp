#include "mpt/netcore.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "mpt/random.hpp"

namespace mpt {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

[[noreturn]] void fail(std::size_t index, const Layer& layer, const std::string& what) {
  std::ostringstream os;
  os << "layer " << index << " (" << layer_name(layer) << "): " << what;
  throw std::invalid_argument(os.str());
}

std::size_t layer_param_count(const Layer& layer) {
  return std::visit(overloaded{
                        [](const Dense& d) -> std::size_t {
                          return std::size_t{d.in_dim} * d.out_dim + d.out_dim;
                        },
                        [](const Conv2d& c) -> std::size_t {
                          return std::size_t{c.out_channels} * c.in_channels * c.kernel_size *
                                     c.kernel_size +
                                 c.out_channels;
                        },
                        [](const auto&) -> std::size_t { return 0; },
                    },
                    layer);
}

struct ConvGeometry {
  std::size_t in_c, in_h, in_w, out_c, out_h, out_w, k, stride;
};

ConvGeometry conv_geometry(const Conv2d& c, const Shape& in, const Shape& out) {
  return {in[0], in[1], in[2], out[0], out[1], out[2], c.kernel_size, c.stride};
}

void dense_forward(const Dense& d, const double* w, const Matrix& x, Matrix& y) {
  const double* b = w + std::size_t{d.in_dim} * d.out_dim;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = &x.data[i * x.cols];
    double* yi = &y.data[i * y.cols];
    for (std::size_t o = 0; o < d.out_dim; ++o) {
      const double* wo = w + o * d.in_dim;
      double acc = b[o];
      for (std::size_t j = 0; j < d.in_dim; ++j) acc += wo[j] * xi[j];
      yi[o] = acc;
    }
  }
}

void conv_forward(const ConvGeometry& g, const double* w, const Matrix& x, Matrix& y) {
  const double* b = w + g.out_c * g.in_c * g.k * g.k;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = &x.data[i * x.cols];
    double* yi = &y.data[i * y.cols];
    for (std::size_t oc = 0; oc < g.out_c; ++oc) {
      for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          double acc = b[oc];
          for (std::size_t ic = 0; ic < g.in_c; ++ic) {
            const double* wk = w + ((oc * g.in_c + ic) * g.k) * g.k;
            const double* plane = xi + ic * g.in_h * g.in_w;
            for (std::size_t ky = 0; ky < g.k; ++ky) {
              const double* src = plane + (oy * g.stride + ky) * g.in_w + ox * g.stride;
              for (std::size_t kx = 0; kx < g.k; ++kx) acc += wk[ky * g.k + kx] * src[kx];
            }
          }
          yi[(oc * g.out_h + oy) * g.out_w + ox] = acc;
        }
      }
    }
  }
}

void conv_backward(const ConvGeometry& g, const double* w, const Matrix& x, const Matrix& gy,
                   double* gw, Matrix& gx) {
  double* gb = gw + g.out_c * g.in_c * g.k * g.k;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = &x.data[i * x.cols];
    const double* gyi = &gy.data[i * gy.cols];
    double* gxi = &gx.data[i * gx.cols];
    for (std::size_t oc = 0; oc < g.out_c; ++oc) {
      for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          const double up = gyi[(oc * g.out_h + oy) * g.out_w + ox];
          if (up == 0.0) continue;
          gb[oc] += up;
          for (std::size_t ic = 0; ic < g.in_c; ++ic) {
            const std::size_t wbase = ((oc * g.in_c + ic) * g.k) * g.k;
            const std::size_t pbase = ic * g.in_h * g.in_w;
            for (std::size_t ky = 0; ky < g.k; ++ky) {
              const std::size_t row = pbase + (oy * g.stride + ky) * g.in_w + ox * g.stride;
              for (std::size_t kx = 0; kx < g.k; ++kx) {
                gw[wbase + ky * g.k + kx] += up * xi[row + kx];
                gxi[row + kx] += up * w[wbase + ky * g.k + kx];
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

std::string layer_name(const Layer& layer) {
  return std::visit(overloaded{
                        [](const Dense&) { return std::string("dense"); },
                        [](const Conv2d&) { return std::string("conv2d"); },
                        [](const CRelu&) { return std::string("crelu"); },
                        [](const Flatten&) { return std::string("flatten"); },
                    },
                    layer);
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::vector<Shape> layer_shapes(const NetworkSpec& spec) {
  if (spec.num_labels < 2) throw std::invalid_argument("num_labels must be at least 2");
  if (spec.input_shape.empty()) throw std::invalid_argument("input_shape must not be empty");
  for (auto d : spec.input_shape) {
    if (d == 0) throw std::invalid_argument("input_shape entries must be positive");
  }
  if (spec.layers.empty()) throw std::invalid_argument("network has no layers");

  std::vector<Shape> shapes{spec.input_shape};
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Layer& layer = spec.layers[i];
    const Shape& in = shapes.back();
    Shape out = std::visit(
        overloaded{
            [&](const Dense& d) -> Shape {
              if (d.in_dim == 0 || d.out_dim == 0) fail(i, layer, "dimensions must be positive");
              if (in.size() != 1 || in[0] != d.in_dim) {
                fail(i, layer,
                     "expects input [" + std::to_string(d.in_dim) + "], got " + shape_str(in));
              }
              return {d.out_dim};
            },
            [&](const Conv2d& c) -> Shape {
              if (c.in_channels == 0 || c.out_channels == 0 || c.kernel_size == 0 || c.stride == 0) {
                fail(i, layer, "dimensions must be positive");
              }
              if (in.size() != 3 || in[0] != c.in_channels) {
                fail(i, layer,
                     "expects input [" + std::to_string(c.in_channels) + ",H,W], got " +
                         shape_str(in));
              }
              if (c.kernel_size > in[1] || c.kernel_size > in[2]) {
                fail(i, layer, "kernel larger than input " + shape_str(in));
              }
              return {c.out_channels, (in[1] - c.kernel_size) / c.stride + 1,
                      (in[2] - c.kernel_size) / c.stride + 1};
            },
            [&](const CRelu&) -> Shape {
              Shape s = in;
              s[0] *= 2;
              return s;
            },
            [&](const Flatten&) -> Shape {
              return {static_cast<std::uint32_t>(element_count(in))};
            },
        },
        layer);
    shapes.push_back(std::move(out));
  }
  const Shape& last = shapes.back();
  if (last.size() != 1 || last[0] != spec.num_labels) {
    throw std::invalid_argument("network output " + shape_str(last) + " does not match " +
                                std::to_string(spec.num_labels) + " labels");
  }
  return shapes;
}

void validate(const NetworkSpec& spec) { (void)layer_shapes(spec); }

std::size_t parameter_count(const NetworkSpec& spec) {
  validate(spec);
  std::size_t n = 0;
  for (const auto& layer : spec.layers) n += layer_param_count(layer);
  return n;
}

std::size_t input_size(const NetworkSpec& spec) { return element_count(spec.input_shape); }

ParameterVector init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  ParameterVector params{std::vector<double>(parameter_count(spec), 0.0)};
  Rng rng(seed);
  std::size_t offset = 0;
  for (const auto& layer : spec.layers) {
    std::size_t weights = 0;
    double fan_in = 0.0;
    if (const auto* d = std::get_if<Dense>(&layer)) {
      weights = std::size_t{d->in_dim} * d->out_dim;
      fan_in = d->in_dim;
    } else if (const auto* c = std::get_if<Conv2d>(&layer)) {
      weights = std::size_t{c->out_channels} * c->in_channels * c->kernel_size * c->kernel_size;
      fan_in = double(c->in_channels) * c->kernel_size * c->kernel_size;
    }
    if (weights > 0) {
      const double bound = 1.0 / std::sqrt(fan_in);
      for (std::size_t k = 0; k < weights; ++k) params.values[offset + k] = rng.uniform(-bound, bound);
    }
    offset += layer_param_count(layer);
  }
  return params;
}

std::vector<double> crelu(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> out(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = v[j] > 0.0 ? v[j] : 0.0;
    out[n + j] = v[j] < 0.0 ? -v[j] : 0.0;
  }
  return out;
}

ForwardTrace forward_trace(const NetworkSpec& spec, const ParameterVector& params,
                           const Matrix& batch_inputs) {
  const auto shapes = layer_shapes(spec);
  if (params.size() != parameter_count(spec)) {
    throw std::invalid_argument("parameter vector has " + std::to_string(params.size()) +
                                " entries, spec needs " + std::to_string(parameter_count(spec)));
  }
  if (batch_inputs.cols != element_count(spec.input_shape)) {
    throw std::invalid_argument("batch inputs have " + std::to_string(batch_inputs.cols) +
                                " columns, network expects " +
                                std::to_string(element_count(spec.input_shape)));
  }
  for (double v : batch_inputs.data) {
    if (!(v >= -1.0 && v <= 1.0)) {
      static thread_local bool warned = false;
      if (!warned) {
        std::clog << "warning: network input outside prior support [-1,1]\n";
        warned = true;
      }
      break;
    }
  }

  const std::size_t m = batch_inputs.rows;
  ForwardTrace trace;
  trace.activations.reserve(spec.layers.size() + 1);
  trace.activations.push_back(batch_inputs);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const Layer& layer = spec.layers[l];
    const Matrix& x = trace.activations.back();
    Matrix y(m, element_count(shapes[l + 1]));
    const double* w = params.values.data() + offset;
    std::visit(overloaded{
                   [&](const Dense& d) { dense_forward(d, w, x, y); },
                   [&](const Conv2d& c) { conv_forward(conv_geometry(c, shapes[l], shapes[l + 1]), w, x, y); },
                   [&](const CRelu&) {
                     for (std::size_t i = 0; i < m; ++i) {
                       auto out = crelu(x.row(i));
                       std::copy(out.begin(), out.end(), y.row(i).begin());
                     }
                   },
                   [&](const Flatten&) { y.data = x.data; },
               },
               layer);
    offset += layer_param_count(layer);
    trace.activations.push_back(std::move(y));
  }
  return trace;
}

EnergyTable forward(const NetworkSpec& spec, const ParameterVector& params,
                    const Matrix& batch_inputs) {
  auto trace = forward_trace(spec, params, batch_inputs);
  return std::move(trace.activations.back());
}

GradientVector backward(const NetworkSpec& spec, const ParameterVector& params,
                        const ForwardTrace& trace, const Matrix& upstream) {
  const auto shapes = layer_shapes(spec);
  const EnergyTable& energies = trace.energies();
  if (trace.activations.size() != spec.layers.size() + 1) {
    throw std::invalid_argument("forward trace does not match network depth");
  }
  if (upstream.rows != energies.rows || upstream.cols != energies.cols) {
    throw std::invalid_argument("upstream gradient is " + std::to_string(upstream.rows) + "x" +
                                std::to_string(upstream.cols) + ", energy table is " +
                                std::to_string(energies.rows) + "x" +
                                std::to_string(energies.cols));
  }

  GradientVector grad{std::vector<double>(params.size(), 0.0)};
  std::vector<std::size_t> offsets(spec.layers.size(), 0);
  for (std::size_t l = 1; l < spec.layers.size(); ++l) {
    offsets[l] = offsets[l - 1] + layer_param_count(spec.layers[l - 1]);
  }

  const std::size_t m = upstream.rows;
  Matrix g = upstream;
  for (std::size_t l = spec.layers.size(); l-- > 0;) {
    const Layer& layer = spec.layers[l];
    const Matrix& x = trace.activations[l];
    Matrix gx(m, x.cols);
    const double* w = params.values.data() + offsets[l];
    double* gw = grad.values.data() + offsets[l];
    std::visit(overloaded{
                   [&](const Dense& d) {
                     double* gb = gw + std::size_t{d.in_dim} * d.out_dim;
                     for (std::size_t i = 0; i < m; ++i) {
                       const double* xi = &x.data[i * x.cols];
                       const double* gi = &g.data[i * g.cols];
                       double* gxi = &gx.data[i * gx.cols];
                       for (std::size_t o = 0; o < d.out_dim; ++o) {
                         const double up = gi[o];
                         if (up == 0.0) continue;
                         gb[o] += up;
                         const double* wo = w + o * d.in_dim;
                         double* gwo = gw + o * d.in_dim;
                         for (std::size_t j = 0; j < d.in_dim; ++j) {
                           gwo[j] += up * xi[j];
                           gxi[j] += up * wo[j];
                         }
                       }
                     }
                   },
                   [&](const Conv2d& c) {
                     conv_backward(conv_geometry(c, shapes[l], shapes[l + 1]), w, x, g, gw, gx);
                   },
                   [&](const CRelu&) {
                     const std::size_t n = x.cols;
                     for (std::size_t i = 0; i < m; ++i) {
                       for (std::size_t j = 0; j < n; ++j) {
                         // Ties at zero go to the positive half.
                         gx(i, j) = x(i, j) >= 0.0 ? g(i, j) : -g(i, n + j);
                       }
                     }
                   },
                   [&](const Flatten&) { gx.data = g.data; },
               },
               layer);
    g = std::move(gx);
  }
  return grad;
}

GradientVector backward(const NetworkSpec& spec, const ParameterVector& params,
                        const Matrix& batch_inputs, const Matrix& upstream) {
  return backward(spec, params, forward_trace(spec, params, batch_inputs), upstream);
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace mpt
