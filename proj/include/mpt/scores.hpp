#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mpt/matrix.hpp"

namespace mpt {

/// OOD scores over one energy row. Higher means more in-distribution.
enum class ScoreKind { kEnergy, kMaxEnergy, kSoftmax };

inline constexpr ScoreKind kAllScores[] = {ScoreKind::kEnergy, ScoreKind::kMaxEnergy,
                                           ScoreKind::kSoftmax};

std::string_view score_name(ScoreKind kind);
ScoreKind parse_score(std::string_view name);

/// logsumexp over labels at temperature 1.
double energy_score(std::span<const double> row);
/// Largest label energy.
double max_energy_score(std::span<const double> row);
/// Largest softmax probability, in (0, 1].
double softmax_score(std::span<const double> row);

double score(ScoreKind kind, std::span<const double> row);
std::vector<double> score_rows(ScoreKind kind, const EnergyTable& energies);

}  // namespace mpt
