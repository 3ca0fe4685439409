#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemo/cost.hpp"
#include "chemo/opt.hpp"
#include "chemo/sim.hpp"

namespace chemo::cli {

/// Declarative run description. Field initial conditions and controls are
/// resolved against the grid at load time, so a RunConfig is ready to use.
struct RunConfig {
  GridPtr grid;
  ModelParams model;
  SimOptions sim;
  Field u0;
  Field v0;
  Control control;
  bool control_is_uniform = false;  ///< constant preset covering the whole grid
  double control_value = 0.0;
  CostParams cost;
  OptimizerConfig optimizer;
  std::size_t control_levels = 9;
  double audit_beta = 1e-3;
  std::optional<double> audit_K;
  std::optional<double> weak_tol;
  bool compare = false;
  std::vector<double> lambdas{0.0, 1.0, 2.0, 4.0};
  std::vector<double> M_values;
  std::vector<double> m_values{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> alpha_values{0.025, 0.05, 0.1, 0.2};
  std::filesystem::path output_dir = "out";
  std::filesystem::path base_dir = ".";

  OptimizationProblem problem() const;
};

/// Raw document before interpretation: JSON, or TOML converted to JSON.
nlohmann::json load_document(const std::filesystem::path& path);

/// Built-in configurations: equilibrium, exponential-control, gaussian,
/// uncontrolled, small-instance.
nlohmann::json preset_document(const std::string& name);
std::vector<std::string> preset_names();

/// Applies "a.b.c=value" to the document. The value is read as JSON when it
/// parses (numbers, booleans, arrays) and as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Interprets and validates a document; relative paths resolve against
/// `base_dir`. Throws ConfigError with the offending field in the message.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

}  // namespace chemo::cli
