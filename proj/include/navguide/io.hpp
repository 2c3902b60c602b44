#pragma once

#include <string>
#include <vector>

#include "navguide/ablation.hpp"
#include "navguide/diffusion.hpp"
#include "navguide/sim.hpp"

namespace navguide {

void save_world(const World& world, const std::string& path);
World load_world(const std::string& path);

// NDJSON: one expert sample per line, floats as JSON numbers.
void save_dataset(const ExpertDataset& dataset, const std::string& path);

// Loads and validates against the model dimensions; schema errors carry the
// offending line number.
std::vector<TrainBatchItem> load_dataset(const std::string& path, int n_w, int ctx_dim);

std::string results_json(const AblationTable& table);
std::string summary_csv(const AblationTable& table);

// Per-epoch training log.
std::string loss_log_csv(const TrainRunReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace navguide
