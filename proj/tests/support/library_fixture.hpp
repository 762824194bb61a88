// Test-support: generates a miniature backbone-dependent rotamer library in
// the Dunbrack text format. Every 10-degree bin carries four rotamer
// components whose probabilities vary smoothly with phi/psi and sum to 1.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "rforge/types.hpp"

namespace rforge::testsupport {

inline constexpr int kLibraryComponents = 4;

// Full 36x36 grid for the given amino acids. Components have chi1 means
// evenly spaced around the circle and per-chi sigmas around 14-16 degrees.
std::string make_full_grid_library(std::span<const AminoAcid> aas);

// Component chi means used by the generator for one amino acid (canonical
// chi count entries per component).
std::vector<std::vector<double>> library_component_means(AminoAcid aa);

} // namespace rforge::testsupport
