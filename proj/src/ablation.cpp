#include "navguide/ablation.hpp"

#include <atomic>
#include <thread>

namespace navguide {

namespace {

struct TrialTask {
  std::size_t cell{0};
  int index{0};
};

}  // namespace

AblationTable run_ablation(const PlannerModel& model, const std::vector<Suite>& suites,
                           int trials_per_cell, std::uint64_t seed,
                           const PlannerConfig& pcfg, const TrialConfig& base_cfg,
                           int jobs, std::optional<bool> arm) {
  if (trials_per_cell < 1) throw std::invalid_argument("run_ablation: trials_per_cell < 1");

  std::vector<bool> arms;
  if (arm.has_value()) {
    arms = {*arm};
  } else {
    arms = {true, false};
  }

  AblationTable table;
  for (Suite suite : suites) {
    for (bool guided : arms) {
      AblationCell cell;
      cell.suite = suite;
      cell.guided = guided;
      cell.trials.resize(trials_per_cell);
      table.cells.push_back(std::move(cell));
    }
  }

  std::vector<TrialTask> tasks;
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    for (int i = 0; i < trials_per_cell; ++i) tasks.push_back({c, i});
  }

  // Pairing: the trial seed depends on (suite, index) only, never on the arm,
  // so both arms of a row share the same world and start.
  const auto run_task = [&](const TrialTask& task) {
    AblationCell& cell = table.cells[task.cell];
    const std::uint64_t suite_tag = static_cast<std::uint64_t>(cell.suite) + 1;
    const std::uint64_t trial_seed =
        mix_seed(seed, suite_tag * 1000003ULL + static_cast<std::uint64_t>(task.index));
    const World world = make_trial_world(cell.suite, trial_seed, pcfg.cost.sigma_r);

    TrialConfig cfg = base_cfg;
    cfg.suite = cell.suite;
    cfg.guided = cell.guided;
    cfg.seed = trial_seed;
    cell.trials[task.index] = run_trial(world, model, cfg, pcfg);
  };

  if (jobs <= 1) {
    for (const auto& task : tasks) run_task(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min<int>(jobs, static_cast<int>(tasks.size()));
    workers.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) {
      workers.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          run_task(tasks[i]);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  for (auto& cell : table.cells) cell.summary = summarize(cell.trials);
  return table;
}

}  // namespace navguide
