#include "navguide/selection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace navguide {

std::optional<double> direction_difference(const Path& p, const Path& q, std::size_t m) {
  const auto hp = mean_heading(p, m);
  const auto hq = mean_heading(q, m);
  if (!hp || !hq) return std::nullopt;
  return std::abs(angle_diff(*hp, *hq));
}

std::vector<Path> consistent_subset(const std::vector<Path>& candidates,
                                    const SelectionState& state, const SelectionConfig& cfg) {
  if (candidates.empty()) throw std::invalid_argument("consistent_subset: no candidates");
  if (!state.history.has_value()) return candidates;
  const auto history_heading = mean_heading(*state.history, cfg.m);
  if (!history_heading) return candidates;

  std::vector<Path> out;
  for (const auto& c : candidates) {
    const auto h = mean_heading(c, cfg.m);
    if (!h) continue;
    if (std::abs(angle_diff(*h, *history_heading)) < cfg.epsilon) out.push_back(c);
  }
  return out;
}

SelectResult select(const std::vector<Path>& candidates, const std::vector<double>& costs,
                    const SelectionState& state, const SelectionConfig& cfg) {
  if (candidates.empty() || candidates.size() != costs.size()) {
    throw std::invalid_argument("select: candidates/costs size mismatch or empty");
  }

  const auto history_heading =
      state.history ? mean_heading(*state.history, cfg.m) : std::nullopt;

  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  bool found_consistent = false;

  if (history_heading) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto h = mean_heading(candidates[i], cfg.m);
      if (!h || std::abs(angle_diff(*h, *history_heading)) >= cfg.epsilon) continue;
      if (costs[i] < best_cost) {
        best_cost = costs[i];
        best = i;
        found_consistent = true;
      }
    }
  }
  if (!found_consistent) {
    // fresh decision: no history, or nothing consistent with it
    best_cost = costs[0];
    best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (costs[i] < best_cost) {
        best_cost = costs[i];
        best = i;
      }
    }
  }

  SelectResult result;
  result.index = best;
  result.path = state.history ? blend(candidates[best], *state.history, cfg.blend_alpha)
                              : candidates[best];
  result.state.history = result.path;
  return result;
}

Path blend(const Path& current, const Path& history, double blend_alpha) {
  if (current.size() != history.size()) {
    throw std::invalid_argument("blend: path length mismatch");
  }
  Path out;
  out.waypoints.reserve(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    out.waypoints.push_back(current.waypoints[i] * (1.0 - blend_alpha) +
                            history.waypoints[i] * blend_alpha);
  }
  return out;
}

}  // namespace navguide
