#include "chemo/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chemo/errors.hpp"
#include "chemo/field_io.hpp"

namespace chemo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string level_name(const std::string& prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%05zu.csv", prefix.c_str(), k);
  return buf;
}

json params_to_json(const ModelParams& p) {
  return json{{"s", p.s}, {"alpha", p.alpha}, {"m", p.m}, {"q", p.q}, {"T_final", p.T_final}};
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  p.s = j.at("s").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.m = j.at("m").get<double>();
  p.q = j.at("q").get<double>();
  p.T_final = j.at("T_final").get<double>();
  return p;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

void write_trajectory(const fs::path& dir, const Trajectory& trajectory,
                      const std::string& timestamp) {
  fs::create_directories(dir);
  if (trajectory.states.empty()) throw StructuralError("write_trajectory: empty trajectory");
  const Grid& g = trajectory.states.front().u.grid();
  json manifest;
  manifest["format"] = "chemo-trajectory/1";
  manifest["grid"] = json::parse(grid_to_json(g));
  manifest["params"] = params_to_json(trajectory.params);
  manifest["save_every"] = trajectory.save_every;
  manifest["rejected_steps"] = trajectory.rejected_steps;

  json states = json::array();
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const auto& st = trajectory.states[k];
    const std::string u_name = level_name("u", k), v_name = level_name("v", k);
    write_field_csv(dir / u_name, st.u);
    write_field_csv(dir / v_name, st.v);
    states.push_back({{"t", st.t}, {"u", u_name}, {"v", v_name}});
  }
  manifest["states"] = states;

  json steps = json::array();
  for (const auto& s : trajectory.steps) {
    steps.push_back({{"t", s.t}, {"dt", s.dt}, {"cfl", s.cfl_number}, {"control", s.control_number}});
  }
  manifest["steps"] = steps;

  json control = json::array();
  for (std::size_t k = 0; k < trajectory.control.level_count(); ++k) {
    const std::string name = level_name("f", k);
    write_field_csv(dir / name, trajectory.control.levels()[k]);
    control.push_back({{"t", trajectory.control.times()[k]}, {"file", name}});
  }
  manifest["control"] = control;
  if (!timestamp.empty()) manifest["created"] = timestamp;
  write_json(dir / "manifest.json", manifest);
}

Trajectory read_trajectory(const fs::path& dir) {
  const json manifest = read_json(dir / "manifest.json");
  try {
    if (manifest.value("format", "") != "chemo-trajectory/1") {
      throw DataError(dir.string() + ": not a chemo trajectory manifest");
    }
    const GridPtr grid = make_grid(grid_from_json(manifest.at("grid").dump()));
    Trajectory traj;
    traj.params = params_from_json(manifest.at("params"));
    traj.save_every = manifest.at("save_every").get<std::size_t>();
    traj.rejected_steps = manifest.value("rejected_steps", std::size_t{0});
    for (const auto& s : manifest.at("states")) {
      State st{read_field_csv(dir / s.at("u").get<std::string>(), grid),
               read_field_csv(dir / s.at("v").get<std::string>(), grid), s.at("t").get<double>()};
      traj.states.push_back(std::move(st));
    }
    if (traj.states.empty()) throw DataError(dir.string() + ": trajectory without states");
    for (const auto& s : manifest.at("steps")) {
      traj.steps.push_back(StepRecord{s.at("t").get<double>(), s.at("dt").get<double>(),
                                      s.at("cfl").get<double>(), s.at("control").get<double>()});
    }
    std::vector<double> times;
    std::vector<Field> levels;
    for (const auto& c : manifest.at("control")) {
      times.push_back(c.at("t").get<double>());
      levels.push_back(read_field_csv(dir / c.at("file").get<std::string>(), grid));
    }
    traj.control = Control(std::move(times), std::move(levels));
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
      if (!(traj.states[k].t > traj.states[k - 1].t)) {
        throw DataError(dir.string() + ": saved times are not increasing");
      }
    }
    return traj;
  } catch (const json::exception& e) {
    throw DataError(dir.string() + ": malformed manifest: " + e.what());
  } catch (const StructuralError& e) {
    throw DataError(dir.string() + ": " + e.what());
  } catch (const DomainError& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
}

void write_series(const fs::path& dir, const TimeSeries& series, const std::string& prefix) {
  if (series.fields.empty()) throw StructuralError("write_series: empty series");
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "chemo-series/1";
  manifest["grid"] = json::parse(grid_to_json(series.fields.front().grid()));
  json levels = json::array();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string name = level_name(prefix, k);
    write_field_csv(dir / name, series.fields[k]);
    levels.push_back({{"t", series.times[k]}, {"file", name}});
  }
  manifest["levels"] = levels;
  write_json(dir / "manifest.json", manifest);
}

TimeSeries read_series(const fs::path& dir) {
  const json manifest = read_json(dir / "manifest.json");
  try {
    if (manifest.value("format", "") != "chemo-series/1") {
      throw DataError(dir.string() + ": not a chemo series manifest");
    }
    const GridPtr grid = make_grid(grid_from_json(manifest.at("grid").dump()));
    TimeSeries s;
    for (const auto& l : manifest.at("levels")) {
      s.times.push_back(l.at("t").get<double>());
      s.fields.push_back(read_field_csv(dir / l.at("file").get<std::string>(), grid));
    }
    if (s.times.empty()) throw DataError(dir.string() + ": series without levels");
    return s;
  } catch (const json::exception& e) {
    throw DataError(dir.string() + ": malformed manifest: " + e.what());
  }
}

}  // namespace chemo
