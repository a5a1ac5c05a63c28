#pragma once

#include <filesystem>

#include "bdgraphtv/domain.hpp"
#include "bdgraphtv/graph_energy.hpp"

namespace bdgraphtv {

/// CSV with header x0,…,x{d-1}; the seed goes to "<path>.meta.json".
void write_points_csv(const std::filesystem::path& path, const EmpiricalMeasure& cloud);
EmpiricalMeasure read_points_csv(const std::filesystem::path& path);

/// CSV with header u0,…,u{k-1}, one row per point.
void write_field_csv(const std::filesystem::path& path, const NodeField& field);
NodeField read_field_csv(const std::filesystem::path& path);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

}  // namespace bdgraphtv
