#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "mpt/data.hpp"
#include "mpt/harness.hpp"

namespace mpt {

using Json = nlohmann::json;

/// {"input_shape": [2], "num_labels": 2, "layers": [{"type": "dense",
/// "in_dim": 2, "out_dim": 16}, {"type": "crelu"}, ...]}
NetworkSpec network_spec_from_json(const Json& j);
Json network_spec_to_json(const NetworkSpec& spec);

/// Builds a dataset from a reference such as
///   {"kind": "blobs", "name": "in", "n_per_class": 200, "num_labels": 2,
///    "centers": [[-0.5, 0], [0.5, 0]], "spread": 0.15, "seed": 1}
///   {"kind": "idx", "name": "mnist", "images": "...", "labels": "..."}
/// with optional "shift", "keep_labels" and "limit" transforms applied in
/// that order. Relative IDX paths resolve against `base_dir`.
Dataset dataset_from_json(const Json& ref, const std::filesystem::path& base_dir);

struct ExperimentData {
  Dataset train_set;
  Dataset test_set;
  std::vector<Dataset> out_sets;
};

/// Reads "train_set", then either "test_set" or a split of the train set
/// by "train_fraction" (seeded by "split_seed"), and "out_sets".
ExperimentData experiment_data_from_json(const Json& cfg, const std::filesystem::path& base_dir);

EvaluationPlan evaluation_plan_from_json(const Json& cfg);

/// Fields: objective {kind, alpha}, learning_rate, batch_size, epochs, seed, spec.
TrainConfig train_config_from_json(const Json& cfg);

/// Fields: objectives, alpha_grid, batch_sizes, seed_count plus the shared
/// TrainConfig fields (learning_rate, epochs, seed, spec) and the datasets.
GridSpec grid_spec_from_json(const Json& cfg, const std::filesystem::path& base_dir);

Json load_json_file(const std::filesystem::path& path);

}  // namespace mpt
