#pragma once

#include <optional>
#include <vector>

#include "navguide/geometry.hpp"

namespace navguide {

struct SelectionConfig {
  double epsilon{kPi / 4.0};  // direction-difference threshold, radians
  std::size_t m{4};           // waypoints used by mean_heading
  double blend_alpha{0.3};    // history weight in the continuity filter
};

struct SelectionState {
  // Previously chosen path, expressed in the current robot frame by the
  // caller before each selection.
  std::optional<Path> history;
};

// |wrapped difference of the two mean headings|, in [0, pi]. nullopt when
// either path has an undefined direction.
std::optional<double> direction_difference(const Path& p, const Path& q, std::size_t m);

// Candidates whose direction stays within cfg.epsilon of the history path.
// Without history (or with a direction-less history) all candidates pass.
// Input order is preserved; candidates with undefined direction are dropped
// only when a usable history exists.
std::vector<Path> consistent_subset(const std::vector<Path>& candidates,
                                    const SelectionState& state, const SelectionConfig& cfg);

struct SelectResult {
  Path path;          // blended choice
  std::size_t index;  // pre-blend candidate index
  SelectionState state;
};

// Minimum-cost candidate within the consistent subset, falling back to the
// global minimum when the subset is empty; ties break toward the lowest
// index. The choice is blended against history and stored as the new history.
SelectResult select(const std::vector<Path>& candidates, const std::vector<double>& costs,
                    const SelectionState& state, const SelectionConfig& cfg);

// Waypoint-wise (1 - blend_alpha) * current + blend_alpha * history.
Path blend(const Path& current, const Path& history, double blend_alpha);

}  // namespace navguide
