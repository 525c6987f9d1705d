#pragma once

#include "chaoslab/grid_field.hpp"
#include "chaoslab/particles.hpp"

#include <filesystem>

namespace chaoslab {

/// Binary layout: "CLGF", u32 version, i32 n, dim, components, kind, f64 time, then the values
/// as little-endian doubles in GridField storage order.
void write_field_binary(const std::filesystem::path& path, const GridField& field);
GridField read_field_binary(const std::filesystem::path& path);

/// CSV with columns x1..xd, then one column per component.
void write_field_csv(const std::filesystem::path& path, const GridField& field);

/// CSV rows (realization, particle, x1..xd) for one output time of an ensemble.
void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& ensemble, std::size_t time_index);

} // namespace chaoslab
