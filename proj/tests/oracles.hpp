#pragma once

// Independent reference computations used to freeze and check expected
// values. Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "mpt/netcore.hpp"
#include "mpt/random.hpp"

namespace oracle {

using mpt::Matrix;

/// Straight-line forward pass for one input, nested loops over explicit
/// (channel, row, col) indices.
inline std::vector<double> forward_one(const mpt::NetworkSpec& spec, const std::vector<double>& params,
                                       std::vector<double> x) {
  std::vector<std::uint32_t> shape = spec.input_shape;
  std::size_t p = 0;
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<mpt::Dense>(&layer)) {
      std::vector<double> y(d->out_dim);
      const std::size_t bias_at = p + std::size_t{d->in_dim} * d->out_dim;
      for (std::uint32_t o = 0; o < d->out_dim; ++o) {
        double acc = 0.0;
        for (std::uint32_t j = 0; j < d->in_dim; ++j) acc += params[p + o * d->in_dim + j] * x[j];
        y[o] = acc + params[bias_at + o];
      }
      p = bias_at + d->out_dim;
      x = y;
      shape = {d->out_dim};
    } else if (const auto* c = std::get_if<mpt::Conv2d>(&layer)) {
      const std::uint32_t C = shape[0], H = shape[1], W = shape[2], K = c->kernel_size, S = c->stride;
      const std::uint32_t OH = (H - K) / S + 1, OW = (W - K) / S + 1;
      auto at = [&](std::uint32_t ch, std::uint32_t r, std::uint32_t col) { return x[(ch * H + r) * W + col]; };
      auto weight = [&](std::uint32_t oc, std::uint32_t ic, std::uint32_t ky, std::uint32_t kx) {
        return params[p + ((oc * C + ic) * K + ky) * K + kx];
      };
      const std::size_t bias_at = p + std::size_t{c->out_channels} * C * K * K;
      std::vector<double> y(std::size_t{c->out_channels} * OH * OW);
      for (std::uint32_t oc = 0; oc < c->out_channels; ++oc)
        for (std::uint32_t r = 0; r < OH; ++r)
          for (std::uint32_t col = 0; col < OW; ++col) {
            double acc = params[bias_at + oc];
            for (std::uint32_t ic = 0; ic < C; ++ic)
              for (std::uint32_t ky = 0; ky < K; ++ky)
                for (std::uint32_t kx = 0; kx < K; ++kx) acc += weight(oc, ic, ky, kx) * at(ic, r * S + ky, col * S + kx);
            y[(oc * OH + r) * OW + col] = acc;
          }
      p = bias_at + c->out_channels;
      x = y;
      shape = {c->out_channels, OH, OW};
    } else if (std::holds_alternative<mpt::CRelu>(layer)) {
      std::vector<double> y;
      for (double v : x) y.push_back(std::max(v, 0.0));
      for (double v : x) y.push_back(std::max(-v, 0.0));
      x = y;
      shape[0] *= 2;
    } else {
      shape = {static_cast<std::uint32_t>(x.size())};
    }
  }
  return x;
}

inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> at, double step) {
  std::vector<double> grad(at.size());
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double saved = at[k];
    at[k] = saved + step;
    const double up = f(at);
    at[k] = saved - step;
    const double down = f(at);
    at[k] = saved;
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

/// Pairwise AUROC by enumeration.
inline double brute_auroc(const std::vector<double>& in, const std::vector<double>& out) {
  double credit = 0.0;
  for (double a : in)
    for (double b : out) credit += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return credit / (static_cast<double>(in.size()) * static_cast<double>(out.size()));
}

/// Mean log softmax probability of the true label, computed naively.
inline double softmax_log_likelihood(const Matrix& e, const std::vector<std::uint32_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < e.rows; ++i) {
    double z = 0.0;
    for (std::size_t y = 0; y < e.cols; ++y) z += std::exp(e(i, y));
    total += std::log(std::exp(e(i, labels[i])) / z);
  }
  return total / static_cast<double>(e.rows);
}

/// Gradient of softmax_log_likelihood: (onehot - softmax) / m.
inline Matrix softmax_log_likelihood_gradient(const Matrix& e, const std::vector<std::uint32_t>& labels) {
  Matrix g(e.rows, e.cols);
  for (std::size_t i = 0; i < e.rows; ++i) {
    double z = 0.0;
    for (std::size_t y = 0; y < e.cols; ++y) z += std::exp(e(i, y));
    for (std::size_t y = 0; y < e.cols; ++y) {
      g(i, y) = ((y == labels[i] ? 1.0 : 0.0) - std::exp(e(i, y)) / z) / static_cast<double>(e.rows);
    }
  }
  return g;
}

/// Kolmogorov-Smirnov statistic of samples against U[lo, hi].
inline double ks_uniform(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  return d;
}

/// Random dense/CReLU network with 0-2 hidden layers.
inline mpt::NetworkSpec random_dense_spec(mpt::Rng& rng) {
  mpt::NetworkSpec spec;
  std::uint32_t width = 1 + static_cast<std::uint32_t>(rng.below(4));
  spec.input_shape = {width};
  spec.num_labels = 2 + static_cast<std::uint32_t>(rng.below(3));
  if (rng.uniform01() < 0.25) {
    spec.layers.emplace_back(mpt::CRelu{});
    width *= 2;
  }
  const auto hidden = rng.below(3);
  for (std::uint64_t h = 0; h < hidden; ++h) {
    const std::uint32_t next = 1 + static_cast<std::uint32_t>(rng.below(5));
    spec.layers.emplace_back(mpt::Dense{width, next});
    spec.layers.emplace_back(mpt::CRelu{});
    width = 2 * next;
  }
  spec.layers.emplace_back(mpt::Dense{width, spec.num_labels});
  return spec;
}

/// Random conv -> crelu -> flatten -> dense network.
inline mpt::NetworkSpec random_conv_spec(mpt::Rng& rng) {
  mpt::NetworkSpec spec;
  const std::uint32_t channels = 1 + static_cast<std::uint32_t>(rng.below(2));
  const std::uint32_t h = 4 + static_cast<std::uint32_t>(rng.below(3));
  const std::uint32_t w = 4 + static_cast<std::uint32_t>(rng.below(3));
  const std::uint32_t k = 2 + static_cast<std::uint32_t>(rng.below(2));
  const std::uint32_t stride = 1 + static_cast<std::uint32_t>(rng.below(2));
  const std::uint32_t filters = 1 + static_cast<std::uint32_t>(rng.below(3));
  spec.input_shape = {channels, h, w};
  spec.num_labels = 2 + static_cast<std::uint32_t>(rng.below(3));
  spec.layers.emplace_back(mpt::Conv2d{channels, filters, k, stride});
  spec.layers.emplace_back(mpt::CRelu{});
  spec.layers.emplace_back(mpt::Flatten{});
  const std::uint32_t flat = 2 * filters * ((h - k) / stride + 1) * ((w - k) / stride + 1);
  spec.layers.emplace_back(mpt::Dense{flat, spec.num_labels});
  return spec;
}

inline std::size_t count_params(const mpt::NetworkSpec& spec) {
  std::size_t n = 0;
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<mpt::Dense>(&layer)) n += std::size_t{d->in_dim} * d->out_dim + d->out_dim;
    if (const auto* c = std::get_if<mpt::Conv2d>(&layer))
      n += std::size_t{c->out_channels} * c->in_channels * c->kernel_size * c->kernel_size + c->out_channels;
  }
  return n;
}

inline std::vector<double> random_values(mpt::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_matrix(mpt::Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  Matrix m(rows, cols);
  m.data = random_values(rng, rows * cols, lo, hi);
  return m;
}

inline std::vector<std::uint32_t> random_labels(mpt::Rng& rng, std::size_t n, std::uint32_t k) {
  std::vector<std::uint32_t> labels(n);
  for (auto& y : labels) y = static_cast<std::uint32_t>(rng.below(k));
  return labels;
}

}  // namespace oracle
