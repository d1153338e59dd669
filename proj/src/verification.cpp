#include "mpt/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpt {
namespace {

constexpr double kSlack = 1e-12;

void normalize(std::vector<double>& p) {
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
}

void record(PropertyResult& prop, double slack, double tolerance) {
  ++prop.checks;
  if (prop.checks == 1 || slack < prop.worst) prop.worst = slack;
  if (!(slack >= -tolerance)) prop.passed = false;
}

}  // namespace

bool VerificationReport::passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.passed; });
}

const std::vector<double>& verification_alphas() {
  static const std::vector<double> alphas{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0, 1024.0};
  return alphas;
}

DiscreteModelPair random_model_pair(Rng& rng, std::size_t states) {
  DiscreteModelPair pair;
  pair.prior.resize(states);
  pair.oracle.resize(states);
  pair.model.resize(states);
  for (auto& v : pair.prior) v = 0.05 + rng.uniform01();
  // Sparse oracle with at least one populated state.
  const std::size_t anchor = static_cast<std::size_t>(rng.below(states));
  for (std::size_t z = 0; z < states; ++z) {
    pair.oracle[z] = (z == anchor || rng.uniform01() < 0.6) ? rng.uniform01() + 1e-3 : 0.0;
  }
  const bool mirror_prior = rng.uniform01() < 0.05;
  for (std::size_t z = 0; z < states; ++z) {
    if (mirror_prior) {
      pair.model[z] = pair.prior[z];
    } else if (pair.oracle[z] == 0.0 && rng.uniform01() < 0.3) {
      pair.model[z] = 0.0;
    } else {
      const double u = rng.uniform01();
      pair.model[z] = u * u * u + 1e-4;
    }
  }
  normalize(pair.prior);
  normalize(pair.oracle);
  normalize(pair.model);
  return pair;
}

VerificationReport verify_exact_suite(std::uint64_t seed, std::size_t instances) {
  PropertyResult lower{"p_alpha <= mpt_bound"};
  PropertyResult monotone{"p_alpha non-decreasing in alpha"};
  PropertyResult limit{"p_alpha -> mpt_bound as alpha grows"};
  PropertyResult chain_first{"l_perp >= l_alpha_perp"};
  PropertyResult chain_second{"l_alpha_perp >= cross_plus_reg"};

  Rng rng(seed);
  const auto& alphas = verification_alphas();
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t states = 2 + static_cast<std::size_t>(rng.below(11));
    const DiscreteModelPair pair = random_model_pair(rng, states);
    const double bound = mpt_bound_exact(pair);

    double previous = 0.0;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const double p = p_alpha_exact(pair, alphas[k]);
      record(lower, bound - p, kSlack * bound);
      if (k > 0) record(monotone, p - previous, kSlack * bound);
      previous = p;

      const auto chain = exact_objective_chain(pair, alphas[k]);
      record(chain_first, chain.l_perp - chain.l_alpha_perp, kSlack);
      record(chain_second, chain.l_alpha_perp - chain.cross_plus_reg, kSlack);
    }

    // Convergence: bound - p_alpha <= bound * S / alpha with
    // S = sum over non-minimizers of (r_min / r_z)^alpha.
    std::vector<double> ratios;
    for (std::size_t z = 0; z < states; ++z) {
      if (pair.model[z] > 0.0) ratios.push_back(pair.prior[z] / pair.model[z]);
    }
    std::sort(ratios.begin(), ratios.end());
    if (ratios.size() == 1 || ratios[1] > ratios[0]) {
      constexpr double alpha = 1024.0;
      double tail = 0.0;
      for (std::size_t k = 1; k < ratios.size(); ++k) tail += std::pow(ratios[0] / ratios[k], alpha);
      const double tolerance = bound * (tail / alpha + kSlack);
      const double gap = bound - p_alpha_exact(pair, alpha);
      record(limit, tolerance - std::abs(gap), 0.0);
    }
  }
  return {{lower, monotone, limit, chain_first, chain_second}};
}

}  // namespace mpt
