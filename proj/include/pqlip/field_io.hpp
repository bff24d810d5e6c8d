#pragma once

#include "pqlip/grid.hpp"

#include <iosfwd>
#include <string>

namespace pqlip {

/// One row per node: the node coordinates followed by the N component
/// values, x fastest. Header "x,u0" in 1D, "x,y,u0,...,u{N-1}" in 2D.
void write_field_csv(std::ostream& os, const DiscreteField& u);
DiscreteField read_field_csv(std::istream& is);

/// Binary layout, little endian:
///   "DGVF" | u32 version (=1) | u32 dim | u32 n_nodes per axis (dim entries)
///   | u32 N | f64 values, node-major with x fastest and the N components of
///   a node adjacent.
void write_field_binary(std::ostream& os, const DiscreteField& u);
DiscreteField read_field_binary(std::istream& is);

void save_field(const std::string& path, const DiscreteField& u);
/// Dispatches on the magic bytes.
DiscreteField load_field(const std::string& path);

} // namespace pqlip
