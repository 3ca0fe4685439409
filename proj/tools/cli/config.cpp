#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <random>
#include <sstream>

#include <toml.hpp>

#include "chemo/errors.hpp"
#include "chemo/field_io.hpp"
#include "chemo/trajectory_io.hpp"

namespace chemo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw ConfigError("unsupported TOML value type (dates and times are not used)");
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + " must be a table/object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(path + ": unknown key '" + it.key() + "'");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

double number(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key) + " must be a number");
  return v.get<double>();
}

std::size_t count(const json& j, const char* key, const std::string& path, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(join(path, key) + " must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

bool flag(const json& j, const char* key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(join(path, key) + " must be true or false");
  return j.at(key).get<bool>();
}

std::string text(const json& j, const char* key, const std::string& path,
                 const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(join(path, key) + " must be a string");
  return j.at(key).get<std::string>();
}

template <class T>
std::vector<T> list(const json& j, const char* key, const std::string& path,
                    std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(join(path, key) + " must be an array");
  std::vector<T> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(join(path, key) + " must contain numbers");
    if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer() || e.get<long long>() < 0) {
        throw ConfigError(join(path, key) + " must contain nonnegative integers");
      }
    }
    out.push_back(e.get<T>());
  }
  return out;
}

fs::path existing(const fs::path& base, const std::string& name, const std::string& path) {
  const fs::path p = fs::path(name).is_absolute() ? fs::path(name) : base / name;
  if (!fs::exists(p)) throw ConfigError(path + ": file not found: " + p.string());
  return p;
}

double cosine_profile(const Grid& g, std::size_t cell, const std::vector<double>& modes) {
  double value = 1.0;
  for (std::size_t a = 0; a < g.dimension(); ++a) {
    const double k = a < modes.size() ? modes[a] : 0.0;
    value *= std::cos(k * M_PI * g.center(cell, a) / g.length(a));
  }
  return value;
}

double gaussian_profile(const Grid& g, std::size_t cell, const std::vector<double>& center,
                        double width) {
  double r2 = 0.0;
  for (std::size_t a = 0; a < g.dimension(); ++a) {
    const double d = g.center(cell, a) - center[a];
    r2 += d * d;
  }
  return std::exp(-r2 / (2.0 * width * width));
}

std::vector<double> point(const json& j, const char* key, const std::string& path,
                          const Grid& g) {
  std::vector<double> c = list<double>(j, key, path, {});
  if (c.size() != g.dimension()) {
    throw ConfigError(join(path, key) + " needs " + std::to_string(g.dimension()) + " entries");
  }
  return c;
}

Field field_spec(const json& j, const std::string& path, const GridPtr& grid, const fs::path& base) {
  const Grid& g = *grid;
  if (j.is_number()) return Field(grid, j.get<double>());
  require_object(j, path);
  if (j.contains("file")) {
    allow_keys(j, path, {"file"});
    const fs::path p = existing(base, text(j, "file", path, ""), join(path, "file"));
    try {
      return read_field_csv(p, grid);
    } catch (const DataError& e) {
      throw DataError(join(path, "file") + ": " + e.what());
    }
  }
  const std::string preset = text(j, "preset", path, "constant");
  Field f(grid);
  if (preset == "constant") {
    allow_keys(j, path, {"preset", "value"});
    return Field(grid, number(j, "value", path, 0.0));
  }
  if (preset == "cosine") {
    allow_keys(j, path, {"preset", "base", "amplitude", "modes"});
    const double base_value = number(j, "base", path, 0.0);
    const double amp = number(j, "amplitude", path, 0.0);
    const auto modes = list<double>(j, "modes", path, {1.0});
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = base_value + amp * cosine_profile(g, i, modes);
    return f;
  }
  if (preset == "gaussian") {
    allow_keys(j, path, {"preset", "base", "amplitude", "center", "width"});
    const double base_value = number(j, "base", path, 0.0);
    const double amp = number(j, "amplitude", path, 1.0);
    const double width = number(j, "width", path, 0.1);
    if (!(width > 0.0)) throw ConfigError(join(path, "width") + " must be > 0");
    const auto center = point(j, "center", path, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      f[i] = base_value + amp * gaussian_profile(g, i, center, width);
    }
    return f;
  }
  if (preset == "random") {
    allow_keys(j, path, {"preset", "base", "amplitude", "seed"});
    const double base_value = number(j, "base", path, 0.0);
    const double amp = number(j, "amplitude", path, 1.0);
    std::mt19937_64 rng(count(j, "seed", path, 0));
    for (std::size_t i = 0; i < g.size(); ++i) {
      f[i] = base_value + amp * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    return f;
  }
  throw ConfigError(join(path, "preset") + ": unknown preset '" + preset + "'");
}

DesiredState desired_spec(const json& j, const std::string& path, const GridPtr& grid,
                          const fs::path& base, const std::function<Trajectory()>& uncontrolled,
                          bool want_u) {
  if (j.is_number()) return DesiredState::constant(j.get<double>());
  require_object(j, path);
  if (j.contains("dir")) {
    allow_keys(j, path, {"dir"});
    const fs::path p = existing(base, text(j, "dir", path, ""), join(path, "dir"));
    try {
      TimeSeries s = read_series(p);
      if (!(s.fields.front().grid() == *grid)) {
        throw ConfigError(path + ": series grid differs from the run grid");
      }
      return DesiredState::from_series(std::move(s));
    } catch (const DataError& e) {
      throw DataError(join(path, "dir") + ": " + e.what());
    }
  }
  const std::string preset = text(j, "preset", path, "constant");
  if (preset == "constant") {
    allow_keys(j, path, {"preset", "value"});
    return DesiredState::constant(number(j, "value", path, 0.0));
  }
  if (preset == "gaussian" || preset == "decaying") {
    allow_keys(j, path, {"preset", "base", "amplitude", "center", "width", "rate"});
    const double width = number(j, "width", path, 0.1);
    if (!(width > 0.0)) throw ConfigError(join(path, "width") + " must be > 0");
    auto center = point(j, "center", path, *grid);
    const double amp = number(j, "amplitude", path, 1.0);
    const double base_value = number(j, "base", path, 0.0);
    if (preset == "gaussian") {
      allow_keys(j, path, {"preset", "base", "amplitude", "center", "width"});
      return DesiredState::gaussian(amp, std::move(center), width, base_value);
    }
    return DesiredState::decaying(amp, std::move(center), width, number(j, "rate", path, 1.0),
                                  base_value);
  }
  if (preset == "uncontrolled") {
    allow_keys(j, path, {"preset"});
    const Trajectory t = uncontrolled();
    return DesiredState::from_series(want_u ? t.u_series() : t.v_series());
  }
  throw ConfigError(join(path, "preset") + ": unknown preset '" + preset + "'");
}

}  // namespace

json load_document(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  const std::string ext = path.extension().string();
  if (ext == ".toml") {
    try {
      return toml_to_json(toml::parse_file(path.string()));
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << path.string() << ":" << e.source().begin.line << ": " << e.description();
      throw ConfigError(msg.str());
    }
  }
  if (ext != ".json") throw ConfigError("config must end in .json or .toml: " + path.string());
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> preset_names() {
  return {"equilibrium", "exponential-control", "gaussian", "uncontrolled", "small-instance"};
}

json preset_document(const std::string& name) {
  if (name == "equilibrium") {
    return json::parse(R"({
      "grid": {"dims": [32], "lengths": [1.0]},
      "model": {"s": 1, "T_final": 1.0},
      "sim": {"dt_max": 0.01},
      "initial": {"u": 0.0, "v": 1.0},
      "control": {"preset": "zero"},
      "compare": true
    })");
  }
  if (name == "exponential-control") {
    return json::parse(R"({
      "grid": {"dims": [16], "lengths": [1.0]},
      "model": {"s": 1, "T_final": 1.0},
      "sim": {"dt_max": 0.001},
      "initial": {"u": 0.0, "v": 1.0},
      "control": {"preset": "constant", "value": 0.5},
      "compare": true
    })");
  }
  if (name == "gaussian") {
    return json::parse(R"({
      "grid": {"dims": [32, 32], "lengths": [1.0, 1.0],
               "control_box": {"lo": [0.0, 0.0], "hi": [0.5, 0.5]}},
      "model": {"s": 2, "T_final": 0.5},
      "sim": {"dt_max": 0.005, "save_every": 10},
      "initial": {"u": {"preset": "gaussian", "base": 0.2, "amplitude": 1.0,
                        "center": [0.5, 0.5], "width": 0.15},
                  "v": {"preset": "cosine", "base": 1.0, "amplitude": 0.3, "modes": [1, 1]}},
      "control": {"field": {"preset": "constant", "value": 1.0}, "levels": 2},
      "compare": true
    })");
  }
  if (name == "uncontrolled" || name == "small-instance") {
    json doc = json::parse(R"({
      "grid": {"dims": [16], "lengths": [1.0]},
      "model": {"s": 1, "q": 3, "T_final": 0.5},
      "sim": {"dt_max": 0.07142857142857142},
      "initial": {"u": {"preset": "cosine", "base": 0.5, "amplitude": 0.3, "modes": [1]},
                  "v": {"preset": "cosine", "base": 0.5, "amplitude": 0.2, "modes": [1]}},
      "cost": {"gamma_u": 0.1, "gamma_v": 1.0, "gamma_f": 0.1, "M": 1.0,
               "u_d": {"preset": "constant", "value": 0.5},
               "v_d": {"preset": "gaussian", "base": 0.3, "amplitude": 0.6,
                       "center": [0.25], "width": 0.15}},
      "optimizer": {"control_levels": 8, "basis": {"time_nodes": 2, "space_nodes": [2]},
                    "max_iters": 50, "stop_tol": 1e-6, "seed": 0},
      "sweep": {"M_values": [0.05, 0.1, 0.2, 0.5, 1, 2]}
    })");
    if (name == "uncontrolled") {
      doc["cost"]["u_d"] = json{{"preset", "uncontrolled"}};
      doc["cost"]["v_d"] = json{{"preset", "uncontrolled"}};
    }
    return doc;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key.path=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override has an empty key segment: " + key);
    if (!node->is_object()) throw ConfigError("override path is not a table: " + key);
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value = json::parse(raw, nullptr, false);
  *node = value.is_discarded() ? json(raw) : std::move(value);
}

OptimizationProblem RunConfig::problem() const {
  OptimizationProblem p{u0, v0, model, cost, sim, control_levels};
  return p;
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  require_object(doc, "config");
  allow_keys(doc, "config", {"grid", "model", "sim", "initial", "control", "cost", "optimizer",
                             "audit", "compare", "sweep", "output"});
  RunConfig rc;
  rc.base_dir = base_dir;

  // grid
  if (!doc.contains("grid")) throw ConfigError("grid: section is required");
  const json& gj = doc.at("grid");
  require_object(gj, "grid");
  allow_keys(gj, "grid", {"dims", "lengths", "spacing", "control_box"});
  const auto dims = list<std::size_t>(gj, "dims", "grid", {});
  if (dims.empty()) throw ConfigError("grid.dims is required");
  try {
    Grid g = [&] {
      if (gj.contains("spacing")) {
        if (gj.contains("lengths")) throw ConfigError("grid: give lengths or spacing, not both");
        return Grid(dims, list<double>(gj, "spacing", "grid", {}));
      }
      return Grid::box(dims, list<double>(gj, "lengths", "grid", std::vector<double>(dims.size(), 1.0)));
    }();
    if (gj.contains("control_box")) {
      const json& cb = gj.at("control_box");
      require_object(cb, "grid.control_box");
      allow_keys(cb, "grid.control_box", {"lo", "hi"});
      g = g.with_control_box(point(cb, "lo", "grid.control_box", g),
                             point(cb, "hi", "grid.control_box", g));
    }
    rc.grid = make_grid(std::move(g));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  } catch (const StructuralError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  // model
  const json empty = json::object();
  const json& mj = doc.value("model", empty);
  require_object(mj, "model");
  allow_keys(mj, "model", {"s", "alpha", "m", "q", "T_final"});
  rc.model.s = number(mj, "s", "model", rc.model.s);
  rc.model.alpha = number(mj, "alpha", "model", rc.model.alpha);
  rc.model.m = number(mj, "m", "model", rc.model.m);
  rc.model.q = number(mj, "q", "model", rc.model.q);
  rc.model.T_final = number(mj, "T_final", "model", rc.model.T_final);
  try {
    rc.model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  // sim
  const json& sj = doc.value("sim", empty);
  require_object(sj, "sim");
  allow_keys(sj, "sim", {"dt_max", "save_every", "grow_after", "cfl_limit", "solver"});
  rc.sim.dt_max = number(sj, "dt_max", "sim", rc.sim.dt_max);
  rc.sim.save_every = count(sj, "save_every", "sim", rc.sim.save_every);
  rc.sim.grow_after = count(sj, "grow_after", "sim", rc.sim.grow_after);
  rc.sim.step.cfl_limit = number(sj, "cfl_limit", "sim", rc.sim.step.cfl_limit);
  const std::string solver = text(sj, "solver", "sim", "cholesky");
  if (solver == "cholesky") {
    rc.sim.step.solver.kind = SolverKind::cholesky;
  } else if (solver == "cg") {
    rc.sim.step.solver.kind = SolverKind::conjugate_gradient;
  } else {
    throw ConfigError("sim.solver must be 'cholesky' or 'cg'");
  }
  if (!(rc.sim.dt_max > 0.0)) throw ConfigError("sim.dt_max must be > 0");
  if (rc.sim.save_every < 1) throw ConfigError("sim.save_every must be >= 1");
  if (rc.sim.grow_after < 1) throw ConfigError("sim.grow_after must be >= 1");
  if (!(rc.sim.step.cfl_limit > 0.0 && rc.sim.step.cfl_limit <= 1.0)) {
    throw ConfigError("sim.cfl_limit must lie in (0, 1]");
  }

  // initial conditions
  const json& ij = doc.value("initial", empty);
  require_object(ij, "initial");
  allow_keys(ij, "initial", {"u", "v"});
  rc.u0 = field_spec(ij.value("u", json(0.0)), "initial.u", rc.grid, base_dir);
  rc.v0 = field_spec(ij.value("v", json(0.0)), "initial.v", rc.grid, base_dir);
  if (rc.u0.min() < 0.0) throw ConfigError("initial.u must be nonnegative");
  if (rc.v0.min() < 0.0) throw ConfigError("initial.v must be nonnegative");

  // control
  const json& cj = doc.value("control", json{{"preset", "zero"}});
  require_object(cj, "control");
  const std::size_t levels = count(cj, "levels", "control", 2);
  if (levels < 1) throw ConfigError("control.levels must be >= 1");
  if (cj.contains("dir")) {
    allow_keys(cj, "control", {"dir"});
    const fs::path p = existing(base_dir, text(cj, "dir", "control", ""), "control.dir");
    try {
      TimeSeries s = read_series(p);
      if (!(s.fields.front().grid() == *rc.grid)) {
        throw ConfigError("control.dir: series grid differs from the run grid");
      }
      std::vector<Field> fields;
      for (const Field& f : s.fields) fields.emplace_back(rc.grid, std::vector<double>(f.begin(), f.end()));
      rc.control = Control(s.times, std::move(fields));
    } catch (const DataError& e) {
      throw DataError(std::string("control.dir: ") + e.what());
    } catch (const DomainError& e) {
      throw ConfigError(std::string("control.dir: ") + e.what());
    }
  } else if (cj.contains("field")) {
    allow_keys(cj, "control", {"field", "levels"});
    const Field f = field_spec(cj.at("field"), "control.field", rc.grid, base_dir);
    const Control unit = Control::constant(rc.grid, rc.model.T_final, levels, 1.0);
    std::vector<Field> fields(unit.level_count(), f);
    rc.control = Control(unit.times(), std::move(fields));
  } else {
    allow_keys(cj, "control", {"preset", "value", "levels"});
    const std::string preset = text(cj, "preset", "control", "zero");
    if (preset == "zero") {
      rc.control = Control::zero(rc.grid, rc.model.T_final, levels);
    } else if (preset == "constant") {
      rc.control_value = number(cj, "value", "control", 0.0);
      rc.control = Control::constant(rc.grid, rc.model.T_final, levels, rc.control_value);
      rc.control_is_uniform = rc.grid->control_cell_count() == rc.grid->size();
    } else {
      throw ConfigError("control.preset: unknown preset '" + preset + "'");
    }
  }

  rc.compare = flag(doc, "compare", "", false);

  // cost
  const json& kj = doc.value("cost", empty);
  require_object(kj, "cost");
  allow_keys(kj, "cost", {"gamma_u", "gamma_v", "gamma_f", "M", "u_d", "v_d"});
  rc.cost.gamma_u = number(kj, "gamma_u", "cost", rc.cost.gamma_u);
  rc.cost.gamma_v = number(kj, "gamma_v", "cost", rc.cost.gamma_v);
  rc.cost.gamma_f = number(kj, "gamma_f", "cost", rc.cost.gamma_f);
  rc.cost.M = number(kj, "M", "cost", rc.cost.M);
  rc.cost.q = rc.model.q;
  std::optional<Trajectory> uncontrolled;
  auto baseline = [&]() -> Trajectory {
    if (!uncontrolled) {
      uncontrolled = simulate(rc.u0, rc.v0, Control::zero(rc.grid, rc.model.T_final, 1), rc.model,
                              rc.sim);
    }
    return *uncontrolled;
  };
  rc.cost.u_d = desired_spec(kj.value("u_d", json(0.0)), "cost.u_d", rc.grid, base_dir, baseline, true);
  rc.cost.v_d = desired_spec(kj.value("v_d", json(0.0)), "cost.v_d", rc.grid, base_dir, baseline, false);
  try {
    rc.cost.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("cost: ") + e.what());
  }

  // optimizer
  const json& oj = doc.value("optimizer", empty);
  require_object(oj, "optimizer");
  allow_keys(oj, "optimizer", {"max_iters", "step0", "shrink", "armijo", "max_backtracks",
                               "fd_epsilon", "stop_tol", "seed", "starts", "threads", "basis",
                               "control_levels"});
  OptimizerConfig& oc = rc.optimizer;
  oc.max_iters = count(oj, "max_iters", "optimizer", oc.max_iters);
  oc.step0 = number(oj, "step0", "optimizer", oc.step0);
  oc.shrink = number(oj, "shrink", "optimizer", oc.shrink);
  oc.armijo = number(oj, "armijo", "optimizer", oc.armijo);
  oc.max_backtracks = count(oj, "max_backtracks", "optimizer", oc.max_backtracks);
  oc.fd_epsilon = number(oj, "fd_epsilon", "optimizer", oc.fd_epsilon);
  oc.stop_tol = number(oj, "stop_tol", "optimizer", oc.stop_tol);
  oc.seed = count(oj, "seed", "optimizer", oc.seed);
  oc.starts = count(oj, "starts", "optimizer", oc.starts);
  oc.threads = static_cast<unsigned>(count(oj, "threads", "optimizer", oc.threads));
  rc.control_levels = count(oj, "control_levels", "optimizer", rc.control_levels);
  if (rc.control_levels < 1) throw ConfigError("optimizer.control_levels must be >= 1");
  const json& bj = oj.value("basis", empty);
  require_object(bj, "optimizer.basis");
  allow_keys(bj, "optimizer.basis", {"time_nodes", "space_nodes"});
  oc.basis.time_nodes = count(bj, "time_nodes", "optimizer.basis", 2);
  oc.basis.space_nodes = list<std::size_t>(bj, "space_nodes", "optimizer.basis",
                                           std::vector<std::size_t>(rc.grid->dimension(), 2));
  if (oc.basis.space_nodes.size() != rc.grid->dimension()) {
    throw ConfigError("optimizer.basis.space_nodes needs one entry per grid axis");
  }
  try {
    oc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  // audit
  const json& aj = doc.value("audit", empty);
  require_object(aj, "audit");
  allow_keys(aj, "audit", {"beta", "K", "weak_tol"});
  rc.audit_beta = number(aj, "beta", "audit", rc.audit_beta);
  if (!(rc.audit_beta > 0.0)) throw ConfigError("audit.beta must be > 0");
  if (aj.contains("K")) rc.audit_K = number(aj, "K", "audit", 0.0);
  if (aj.contains("weak_tol")) rc.weak_tol = number(aj, "weak_tol", "audit", 0.0);

  // sweeps
  const json& wj = doc.value("sweep", empty);
  require_object(wj, "sweep");
  allow_keys(wj, "sweep", {"lambdas", "M_values", "m_values", "alpha_values"});
  rc.lambdas = list<double>(wj, "lambdas", "sweep", rc.lambdas);
  rc.M_values = list<double>(wj, "M_values", "sweep", rc.M_values);
  rc.m_values = list<double>(wj, "m_values", "sweep", rc.m_values);
  rc.alpha_values = list<double>(wj, "alpha_values", "sweep", rc.alpha_values);

  const std::string out = text(doc, "output", "", "out");
  rc.output_dir = fs::path(out).is_absolute() ? fs::path(out) : base_dir / out;
  return rc;
}

}  // namespace chemo::cli
