#include "mpt/scores.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mpt/objectives.hpp"

namespace mpt {
namespace {

void require_nonempty(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("score of an empty energy row");
}

}  // namespace

std::string_view score_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kEnergy: return "energy";
    case ScoreKind::kMaxEnergy: return "max_energy";
    case ScoreKind::kSoftmax: return "softmax";
  }
  return "?";
}

ScoreKind parse_score(std::string_view name) {
  for (auto kind : kAllScores) {
    if (score_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown score '" + std::string(name) +
                              "' (expected energy, max_energy or softmax)");
}

double energy_score(std::span<const double> row) {
  require_nonempty(row);
  return logsumexp(row, 1.0);
}

double max_energy_score(std::span<const double> row) {
  require_nonempty(row);
  return *std::max_element(row.begin(), row.end());
}

double softmax_score(std::span<const double> row) {
  require_nonempty(row);
  // max_y exp(E_y - lse) = exp(max - lse)
  return std::exp(max_energy_score(row) - logsumexp(row, 1.0));
}

double score(ScoreKind kind, std::span<const double> row) {
  switch (kind) {
    case ScoreKind::kEnergy: return energy_score(row);
    case ScoreKind::kMaxEnergy: return max_energy_score(row);
    case ScoreKind::kSoftmax: return softmax_score(row);
  }
  throw std::invalid_argument("bad score kind");
}

std::vector<double> score_rows(ScoreKind kind, const EnergyTable& energies) {
  std::vector<double> out(energies.rows);
  for (std::size_t i = 0; i < energies.rows; ++i) out[i] = score(kind, energies.row(i));
  return out;
}

}  // namespace mpt
