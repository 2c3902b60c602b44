#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace navguide {

enum class FailureReason { kNone, kTimeout, kStuck, kPlannerError };

std::string failure_reason_name(FailureReason r);

struct TrialResult {
  bool success{false};
  double length{0.0};     // meters, meaningful only on success
  int collisions{0};      // overlap-onset events
  double sim_time{0.0};   // simulated seconds until termination
  FailureReason failure_reason{FailureReason::kNone};
  std::uint64_t seed{0};
  std::string suite;
  bool guided{false};
};

struct MetricsSummary {
  int n_trials{0};
  double success_rate{0.0};
  std::optional<double> length_mean;  // successes only; absent with none
  std::optional<double> length_var;   // population variance over successes
  double collisions_mean{0.0};        // averaged over all trials
};

MetricsSummary summarize(const std::vector<TrialResult>& results);

}  // namespace navguide
