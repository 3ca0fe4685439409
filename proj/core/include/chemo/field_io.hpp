#pragma once

#include <filesystem>
#include <string>

#include "chemo/grid.hpp"

namespace chemo {

/// Shortest round-trip decimal representation; byte-stable across runs.
std::string format_number(double x);

/// Grid header: {"dims": [...], "spacing": [...], "control_mask": [0|1, ...]}.
std::string grid_to_json(const Grid& grid);
Grid grid_from_json(const std::string& text);
void write_grid_json(const std::filesystem::path& path, const Grid& grid);
Grid read_grid_json(const std::filesystem::path& path);

/// One row per cell: index coordinates then value, after a header row
/// "i0[,i1[,i2]],value".
void write_field_csv(const std::filesystem::path& path, const Field& field);
/// Throws DataError on a missing file, a malformed row or a shape mismatch.
Field read_field_csv(const std::filesystem::path& path, GridPtr grid);

}  // namespace chemo
