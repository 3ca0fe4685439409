#pragma once

#include <filesystem>
#include <string>

#include "chemo/sim.hpp"

namespace chemo {

/// Writes `dir/manifest.json` plus one CSV per saved level (u_NNNNN.csv,
/// v_NNNNN.csv) and per control level (f_NNNNN.csv). The manifest records the
/// grid, model parameters, saved times, the full dt history and, when
/// `timestamp` is non-empty, a "created" field.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& trajectory,
                      const std::string& timestamp = {});

/// Inverse of write_trajectory. Throws DataError on any missing or malformed piece.
Trajectory read_trajectory(const std::filesystem::path& dir);

/// A field series (e.g. comparison solution w or a control): manifest.json
/// with grid and times plus `<prefix>_NNNNN.csv` per level.
void write_series(const std::filesystem::path& dir, const TimeSeries& series,
                  const std::string& prefix);
TimeSeries read_series(const std::filesystem::path& dir);

}  // namespace chemo
