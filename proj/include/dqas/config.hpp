#pragma once
/**
 * @file
 * JSON experiment configuration. Top-level blocks: task, pool, objective,
 * trainer, output_dir, seed. Unknown keys anywhere are rejected.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dqas/tasks.hpp"
#include "dqas/trainer.hpp"

namespace dqas {

struct RunConfig {
    nlohmann::json raw;
    std::string task_kind;
    TrainConfig trainer;
    std::optional<LayerwiseOptions> layerwise;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

/// Sets a dotted key path ("trainer.epochs=1"); the value is parsed as JSON,
/// falling back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Validates the document and extracts everything but the task, which needs
/// the seed and is built separately.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Task described by the config's task/pool/objective blocks. Relative graph
/// file paths resolve against base_dir.
Task build_task(const RunConfig& config, const std::string& base_dir = ".");

} // namespace dqas
