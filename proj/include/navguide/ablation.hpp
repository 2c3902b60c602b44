#pragma once

#include <optional>
#include <vector>

#include "navguide/eval.hpp"
#include "navguide/sim.hpp"

namespace navguide {

struct AblationCell {
  Suite suite{Suite::kBasic};
  bool guided{false};
  MetricsSummary summary;
  std::vector<TrialResult> trials;  // ordered by trial index
};

struct AblationTable {
  std::vector<AblationCell> cells;
};

// Guided/unguided comparison over paired seeds: trial i of every arm in a
// suite runs on the same world and start. `arm` restricts the run to one arm;
// `jobs` parallelizes over trials without changing any output.
AblationTable run_ablation(const PlannerModel& model, const std::vector<Suite>& suites,
                           int trials_per_cell, std::uint64_t seed,
                           const PlannerConfig& pcfg, const TrialConfig& base_cfg,
                           int jobs = 1, std::optional<bool> arm = std::nullopt);

}  // namespace navguide
