#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mpt/matrix.hpp"

namespace mpt {

/// CCE: per-example conditional cross entropy with an alpha-tempered
/// log-partition. JCE: joint cross entropy. JI: joint intersection.
enum class ObjectiveKind { kCCE, kJCE, kJI };

std::string_view objective_name(ObjectiveKind kind);
ObjectiveKind parse_objective(std::string_view name);

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kCCE;
  double alpha = 1.0;
};

void validate(const ObjectiveConfig& cfg);

/// Thrown when a loss sees non-finite energies.
class DivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit finite distributions over R(Z): the prior P(z), the oracle
/// P(z|M*) and the model P(z|M_theta).
struct DiscreteModelPair {
  std::vector<double> prior;
  std::vector<double> oracle;
  std::vector<double> model;
};

void validate(const DiscreteModelPair& pair);

/// Objective value split into its data-fit and regularizer parts. Every
/// objective here is maximized.
struct LossValue {
  double value = 0.0;
  double fit_part = 0.0;
  double regularizer_part = 0.0;
};

/// (1/alpha) * ln sum_i exp(alpha * v_i), shifted by max(v).
double logsumexp(std::span<const double> v, double alpha = 1.0);

/// min_z prior(z) / model(z). Throws if the model has no mass where the
/// prior does.
double mpt_bound_exact(const DiscreteModelPair& pair);

/// Softmin lower bound (sum_z (prior(z)/model(z))^-alpha)^(-1/alpha).
double p_alpha_exact(const DiscreteModelPair& pair, double alpha);

struct ObjectiveChain {
  double l_perp = 0.0;
  double l_alpha_perp = 0.0;
  double cross_plus_reg = 0.0;
};

/// Intersection objective under conditional independence, its softmin
/// relaxation, and the cross-entropy lower bound. Always
/// l_perp >= l_alpha_perp >= cross_plus_reg.
ObjectiveChain exact_objective_chain(const DiscreteModelPair& pair, double alpha);

LossValue batch_loss(const ObjectiveConfig& cfg, const EnergyTable& energies,
                     std::span<const std::uint32_t> labels);

/// d(batch_loss value)/dE, same shape as the energy table.
Matrix batch_loss_gradient(const ObjectiveConfig& cfg, const EnergyTable& energies,
                           std::span<const std::uint32_t> labels);

}  // namespace mpt
