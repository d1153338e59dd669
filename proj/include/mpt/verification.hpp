#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mpt/objectives.hpp"
#include "mpt/random.hpp"

namespace mpt {

/// Outcome of one property checked over many random instances. `worst` is
/// the smallest observed slack (negative means violated).
struct PropertyResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  double worst = 0.0;
};

struct VerificationReport {
  std::vector<PropertyResult> properties;
  bool passed() const;
};

/// Random prior/oracle/model triple over `states` outcomes. The prior is
/// strictly positive; the model may vanish outside the oracle's support.
DiscreteModelPair random_model_pair(Rng& rng, std::size_t states);

/// Alpha values the suite sweeps, increasing.
const std::vector<double>& verification_alphas();

/// Checks on `instances` random pairs: softmin lower bound, monotonicity in
/// alpha, convergence to the min at alpha = 2^10, and the ordering
/// l_perp >= l_alpha_perp >= cross_plus_reg.
VerificationReport verify_exact_suite(std::uint64_t seed, std::size_t instances = 1000);

}  // namespace mpt
