#include "navguide/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace navguide {

namespace {

using nlohmann::json;

json rect_to_json(const Rect& r) {
  return json{{"min", {r.min.x, r.min.y}}, {"max", {r.max.x, r.max.y}}};
}

Rect rect_from_json(const json& j) {
  Rect r;
  r.min = {j.at("min").at(0).get<double>(), j.at("min").at(1).get<double>()};
  r.max = {j.at("max").at(0).get<double>(), j.at("max").at(1).get<double>()};
  return r;
}

std::string format_double(double v, const char* fmt = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

void save_world(const World& world, const std::string& path) {
  json j;
  j["kind"] = world.kind == WorldKind::kIndoor ? "indoor" : "outdoor";
  j["seed"] = world.seed;
  j["bounds"] = rect_to_json(world.bounds);
  j["spawn"] = rect_to_json(world.spawn);
  j["goal_region"] = rect_to_json(world.goal_region);
  j["discs"] = json::array();
  for (const auto& d : world.discs) {
    j["discs"].push_back({{"center", {d.center.x, d.center.y}}, {"radius", d.radius}});
  }
  j["rects"] = json::array();
  for (const auto& r : world.rects) j["rects"].push_back(rect_to_json(r));

  write_text_file(path, j.dump(2) + "\n");
}

World load_world(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_world: cannot open " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("load_world: parse error in " + path + ": " + e.what());
  }
  World w;
  const std::string kind = j.at("kind").get<std::string>();
  w.kind = kind == "indoor" ? WorldKind::kIndoor : WorldKind::kOutdoor;
  w.seed = j.value("seed", 0ULL);
  w.bounds = rect_from_json(j.at("bounds"));
  w.spawn = rect_from_json(j.at("spawn"));
  w.goal_region = rect_from_json(j.at("goal_region"));
  for (const auto& d : j.value("discs", json::array())) {
    w.discs.push_back({{d.at("center").at(0).get<double>(), d.at("center").at(1).get<double>()},
                       d.at("radius").get<double>()});
  }
  for (const auto& r : j.value("rects", json::array())) w.rects.push_back(rect_from_json(r));
  return w;
}

void save_dataset(const ExpertDataset& dataset, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
  for (const auto& s : dataset.samples) {
    json j;
    j["ctx"] = s.ctx.features;
    json npath = json::array();
    for (const auto& p : s.npath.waypoints) {
      npath.push_back(p.x);
      npath.push_back(p.y);
    }
    j["npath"] = npath;
    j["world"] = s.world_id;
    j["pose"] = {s.pose.x, s.pose.y, s.pose.heading};
    j["goal"] = {s.goal.x, s.goal.y};
    os << j.dump() << "\n";
  }
  if (!os) throw std::runtime_error("save_dataset: write failed on " + path);
}

std::vector<TrainBatchItem> load_dataset(const std::string& path, int n_w, int ctx_dim) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
  std::vector<TrainBatchItem> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("load_dataset: " + path + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
    TrainBatchItem item;
    try {
      item.ctx.features = j.at("ctx").get<std::vector<double>>();
      const auto flat = j.at("npath").get<std::vector<double>>();
      if (flat.size() % 2 != 0) throw std::runtime_error("odd npath length");
      for (std::size_t i = 0; i + 1 < flat.size(); i += 2) {
        item.npath.waypoints.push_back({flat[i], flat[i + 1]});
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("load_dataset: " + path + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
    if (static_cast<int>(item.ctx.features.size()) != ctx_dim) {
      throw std::runtime_error("load_dataset: " + path + ":" + std::to_string(line_no) +
                               ": ctx length != " + std::to_string(ctx_dim));
    }
    if (static_cast<int>(item.npath.size()) != n_w) {
      throw std::runtime_error("load_dataset: " + path + ":" + std::to_string(line_no) +
                               ": npath length != " + std::to_string(n_w));
    }
    out.push_back(std::move(item));
  }
  return out;
}

namespace {

json trial_to_json(const TrialResult& r) {
  json j;
  j["success"] = r.success;
  j["length"] = r.length;
  j["collisions"] = r.collisions;
  j["sim_time"] = r.sim_time;
  j["failure_reason"] = failure_reason_name(r.failure_reason);
  j["seed"] = r.seed;
  j["suite"] = r.suite;
  j["guided"] = r.guided;
  return j;
}

json summary_to_json(const MetricsSummary& s) {
  json j;
  j["n_trials"] = s.n_trials;
  j["success_rate"] = s.success_rate;
  if (s.length_mean) j["length_mean"] = *s.length_mean;
  if (s.length_var) j["length_var"] = *s.length_var;
  j["collisions_mean"] = s.collisions_mean;
  return j;
}

}  // namespace

std::string results_json(const AblationTable& table) {
  json j;
  j["cells"] = json::array();
  for (const auto& cell : table.cells) {
    json c;
    c["suite"] = suite_name(cell.suite);
    c["guided"] = cell.guided;
    c["summary"] = summary_to_json(cell.summary);
    c["trials"] = json::array();
    for (const auto& t : cell.trials) c["trials"].push_back(trial_to_json(t));
    j["cells"].push_back(std::move(c));
  }
  return j.dump(2) + "\n";
}

std::string summary_csv(const AblationTable& table) {
  std::ostringstream os;
  os << "suite,guided,n,success_rate,length_mean,length_var,collisions_mean\n";
  for (const auto& cell : table.cells) {
    const auto& s = cell.summary;
    os << suite_name(cell.suite) << "," << (cell.guided ? 1 : 0) << "," << s.n_trials << ","
       << format_double(s.success_rate) << ","
       << (s.length_mean ? format_double(*s.length_mean) : std::string()) << ","
       << (s.length_var ? format_double(*s.length_var) : std::string()) << ","
       << format_double(s.collisions_mean) << "\n";
  }
  return os.str();
}

std::string loss_log_csv(const TrainRunReport& report) {
  std::ostringstream os;
  os << "epoch,loss,lr\n";
  for (std::size_t i = 0; i < report.epoch_losses.size(); ++i) {
    os << (i + 1) << "," << format_double(report.epoch_losses[i], "%.12g") << ","
       << format_double(report.epoch_lr[i], "%.12g") << "\n";
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace navguide
