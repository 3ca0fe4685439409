#include "chemo/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "chemo/errors.hpp"

namespace chemo {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw Error("format_number: conversion failed");
  return std::string(buf, end);
}

std::string grid_to_json(const Grid& grid) {
  json j;
  j["dims"] = grid.dims();
  j["spacing"] = grid.spacing();
  std::vector<int> mask(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = grid.in_control(i) ? 1 : 0;
  j["control_mask"] = mask;
  return j.dump();
}

Grid grid_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    auto dims = j.at("dims").get<std::vector<std::size_t>>();
    auto spacing = j.at("spacing").get<std::vector<double>>();
    std::vector<bool> mask;
    if (j.contains("control_mask")) {
      for (const auto& m : j.at("control_mask")) mask.push_back(m.get<int>() != 0);
    }
    return Grid(std::move(dims), std::move(spacing), std::move(mask));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed grid header: ") + e.what());
  } catch (const StructuralError& e) {
    throw DataError(std::string("inconsistent grid header: ") + e.what());
  } catch (const DomainError& e) {
    throw DataError(std::string("invalid grid header: ") + e.what());
  }
}

void write_grid_json(const std::filesystem::path& path, const Grid& grid) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << grid_to_json(grid) << '\n';
}

Grid read_grid_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read grid header " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return grid_from_json(ss.str());
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  const Grid& g = field.grid();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t a = 0; a < g.dimension(); ++a) out << 'i' << a << ',';
  out << "value\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    for (std::size_t a = 0; a < g.dimension(); ++a) out << c[a] << ',';
    out << format_number(field[i]) << '\n';
  }
}

namespace {

double parse_double(const std::string& token, const std::filesystem::path& path,
                    std::size_t line) {
  double x = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": bad number '" + token + "'");
  }
  return x;
}

}  // namespace

Field read_field_csv(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read field file " + path.string());
  const Grid& g = *grid;
  std::vector<double> values(g.size(), 0.0);
  std::vector<bool> seen(g.size(), false);
  std::string line;
  std::size_t lineno = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.front() == 'i') continue;
    std::vector<std::string> tokens;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) tokens.push_back(tok);
    if (tokens.size() != g.dimension() + 1) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(g.dimension() + 1) + " columns");
    }
    std::size_t cell = 0;
    for (std::size_t a = 0; a < g.dimension(); ++a) {
      const double c = parse_double(tokens[a], path, lineno);
      if (c < 0 || c >= static_cast<double>(g.dims()[a]) || c != std::floor(c)) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": index out of range");
      }
      cell += static_cast<std::size_t>(c) * g.stride(a);
    }
    if (seen[cell]) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate cell");
    }
    seen[cell] = true;
    values[cell] = parse_double(tokens.back(), path, lineno);
    if (!std::isfinite(values[cell])) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
    }
    ++rows;
  }
  if (rows != g.size()) {
    throw DataError(path.string() + ": " + std::to_string(rows) + " rows for " +
                    std::to_string(g.size()) + " cells");
  }
  return Field(std::move(grid), std::move(values));
}

}  // namespace chemo
