#include "mpt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_batch(const ObjectiveConfig& cfg, const EnergyTable& energies,
                 std::span<const std::uint32_t> labels) {
  validate(cfg);
  if (energies.rows == 0 || energies.cols == 0) throw std::invalid_argument("empty energy table");
  if (labels.size() != energies.rows) {
    throw std::invalid_argument("got " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(energies.rows) + " energy rows");
  }
  for (auto y : labels) {
    if (y >= energies.cols) {
      throw std::invalid_argument("label " + std::to_string(y) + " out of range for " +
                                  std::to_string(energies.cols) + " labels");
    }
  }
  for (double e : energies.data) {
    if (!std::isfinite(e)) throw DivergedError("non-finite energy in batch");
  }
}

std::vector<double> true_energies(const EnergyTable& energies, std::span<const std::uint32_t> labels) {
  std::vector<double> e(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) e[i] = energies(i, labels[i]);
  return e;
}

/// softmax(alpha * v) written into out.
void tempered_softmax(std::span<const double> v, double alpha, std::span<double> out) {
  const double top = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = std::exp(alpha * (v[j] - top));
    total += out[j];
  }
  for (auto& o : out) o /= total;
}

/// Joint regularizer: -(lse_alpha(all entries) - ln(mK)/alpha).
double joint_regularizer(const EnergyTable& energies, double alpha) {
  const double n = static_cast<double>(energies.data.size());
  return -(logsumexp(energies.data, alpha) - std::log(n) / alpha);
}

}  // namespace

std::string_view objective_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kCCE: return "CCE";
    case ObjectiveKind::kJCE: return "JCE";
    case ObjectiveKind::kJI: return "JI";
  }
  return "?";
}

ObjectiveKind parse_objective(std::string_view name) {
  if (name == "CCE") return ObjectiveKind::kCCE;
  if (name == "JCE") return ObjectiveKind::kJCE;
  if (name == "JI") return ObjectiveKind::kJI;
  throw std::invalid_argument("unknown objective '" + std::string(name) + "' (expected CCE, JCE or JI)");
}

void validate(const ObjectiveConfig& cfg) {
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) {
    throw std::invalid_argument("alpha must be a positive finite number");
  }
}

void validate(const DiscreteModelPair& pair) {
  const std::size_t n = pair.prior.size();
  if (n == 0) throw std::invalid_argument("distributions must not be empty");
  if (pair.oracle.size() != n || pair.model.size() != n) {
    throw std::invalid_argument("prior, oracle and model must have equal lengths");
  }
  auto check = [](const std::vector<double>& p, const char* what) {
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " has a negative or non-finite entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument(std::string(what) + " does not sum to 1");
    }
  };
  check(pair.prior, "prior");
  check(pair.oracle, "oracle");
  check(pair.model, "model");
}

double logsumexp(std::span<const double> v, double alpha) {
  if (v.empty()) throw std::invalid_argument("logsumexp of an empty sequence");
  if (!(alpha > 0.0)) throw std::invalid_argument("logsumexp scale must be positive");
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (double x : v) total += std::exp(alpha * (x - top));
  return top + std::log(total) / alpha;
}

double mpt_bound_exact(const DiscreteModelPair& pair) {
  validate(pair);
  double best = kInf;
  for (std::size_t z = 0; z < pair.prior.size(); ++z) {
    if (pair.model[z] > 0.0) best = std::min(best, pair.prior[z] / pair.model[z]);
  }
  if (best == kInf) throw std::domain_error("model puts no mass where the prior does");
  return best;
}

double p_alpha_exact(const DiscreteModelPair& pair, double alpha) {
  validate(pair);
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  std::vector<double> neg_log_ratio;
  for (std::size_t z = 0; z < pair.prior.size(); ++z) {
    const double p = pair.prior[z];
    const double q = pair.model[z];
    if (q == 0.0) continue;      // ratio +inf, contributes 0
    if (p == 0.0) return 0.0;    // ratio 0, term diverges
    neg_log_ratio.push_back(std::log(q) - std::log(p));
  }
  if (neg_log_ratio.empty()) throw std::domain_error("model puts no mass where the prior does");
  return std::exp(-logsumexp(neg_log_ratio, alpha));
}

ObjectiveChain exact_objective_chain(const DiscreteModelPair& pair, double alpha) {
  validate(pair);
  double overlap = 0.0;
  double cross = 0.0;
  for (std::size_t z = 0; z < pair.prior.size(); ++z) {
    const double o = pair.oracle[z];
    if (o == 0.0) continue;
    if (pair.model[z] == 0.0) {
      throw std::domain_error("model assigns zero probability where the oracle has mass: "
                              "cross entropy is -infinity");
    }
    overlap += o * pair.model[z];
    cross += o * std::log(pair.model[z]);
  }
  const double log_overlap = std::log(overlap);
  const double log_p_alpha = std::log(p_alpha_exact(pair, alpha));
  return {log_overlap + std::log(mpt_bound_exact(pair)), log_overlap + log_p_alpha,
          cross + log_p_alpha};
}

LossValue batch_loss(const ObjectiveConfig& cfg, const EnergyTable& energies,
                     std::span<const std::uint32_t> labels) {
  check_batch(cfg, energies, labels);
  const double m = static_cast<double>(energies.rows);
  const auto e = true_energies(energies, labels);

  LossValue loss;
  switch (cfg.kind) {
    case ObjectiveKind::kCCE: {
      double fit = 0.0;
      double reg = 0.0;
      for (std::size_t i = 0; i < energies.rows; ++i) {
        fit += e[i];
        reg -= logsumexp(energies.row(i), cfg.alpha);
      }
      loss.fit_part = fit / m;
      loss.regularizer_part = reg / m;
      break;
    }
    case ObjectiveKind::kJCE: {
      double fit = 0.0;
      for (double v : e) fit += v;
      loss.fit_part = fit / m;
      loss.regularizer_part = joint_regularizer(energies, cfg.alpha);
      break;
    }
    case ObjectiveKind::kJI:
      loss.fit_part = logsumexp(e, 1.0) - std::log(m);
      loss.regularizer_part = joint_regularizer(energies, cfg.alpha);
      break;
  }
  loss.value = loss.fit_part + loss.regularizer_part;
  if (!std::isfinite(loss.value)) throw DivergedError("non-finite loss");
  return loss;
}

Matrix batch_loss_gradient(const ObjectiveConfig& cfg, const EnergyTable& energies,
                           std::span<const std::uint32_t> labels) {
  check_batch(cfg, energies, labels);
  const std::size_t m = energies.rows;
  const double inv_m = 1.0 / static_cast<double>(m);
  Matrix grad(m, energies.cols);

  if (cfg.kind == ObjectiveKind::kCCE) {
    for (std::size_t i = 0; i < m; ++i) {
      auto g = grad.row(i);
      tempered_softmax(energies.row(i), cfg.alpha, g);
      for (auto& v : g) v *= -inv_m;
      g[labels[i]] += inv_m;
    }
    return grad;
  }

  tempered_softmax(energies.data, cfg.alpha, grad.data);
  for (auto& v : grad.data) v = -v;
  if (cfg.kind == ObjectiveKind::kJCE) {
    for (std::size_t i = 0; i < m; ++i) grad(i, labels[i]) += inv_m;
  } else {
    // Fit weights are softmax over the batch's true-label energies.
    const auto e = true_energies(energies, labels);
    std::vector<double> w(m);
    tempered_softmax(e, 1.0, w);
    for (std::size_t i = 0; i < m; ++i) grad(i, labels[i]) += w[i];
  }
  return grad;
}

}  // namespace mpt
