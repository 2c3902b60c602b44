#include "navguide/eval.hpp"

#include <stdexcept>

namespace navguide {

std::string failure_reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::kNone: return "none";
    case FailureReason::kTimeout: return "timeout";
    case FailureReason::kStuck: return "stuck";
    case FailureReason::kPlannerError: return "planner-error";
  }
  return "?";
}

MetricsSummary summarize(const std::vector<TrialResult>& results) {
  if (results.empty()) throw std::invalid_argument("summarize: no results");
  MetricsSummary s;
  s.n_trials = static_cast<int>(results.size());

  int successes = 0;
  double length_sum = 0.0;
  double collisions_sum = 0.0;
  for (const auto& r : results) {
    if (r.success) {
      ++successes;
      length_sum += r.length;
    }
    collisions_sum += r.collisions;
  }
  s.success_rate = static_cast<double>(successes) / s.n_trials;
  s.collisions_mean = collisions_sum / s.n_trials;

  if (successes > 0) {
    const double mean = length_sum / successes;
    double var = 0.0;
    for (const auto& r : results) {
      if (r.success) var += (r.length - mean) * (r.length - mean);
    }
    s.length_mean = mean;
    s.length_var = var / successes;  // population form
  }
  return s;
}

}  // namespace navguide
