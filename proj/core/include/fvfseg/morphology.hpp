#pragma once

#include "fvfseg/volume.hpp"

namespace fvfseg {

enum class MorphMode { Erode, Dilate };

/// Binary erosion/dilation with the Chebyshev ball of `radius` (a
/// (2r+1)^3 cube; radius 1 is the 26-neighborhood), applied `iterations`
/// times. Voxels outside the grid count as background for both modes, so
/// erosion eats in from the grid faces.
BinaryMask morphology(const BinaryMask& mask, MorphMode mode, int radius = 1,
                      int iterations = 1);

inline BinaryMask erode(const BinaryMask& mask, int radius = 1, int iterations = 1) {
  return morphology(mask, MorphMode::Erode, radius, iterations);
}
inline BinaryMask dilate(const BinaryMask& mask, int radius = 1, int iterations = 1) {
  return morphology(mask, MorphMode::Dilate, radius, iterations);
}

/// Removes `depth` layers of voxels from the surface of the mask.
BinaryMask mask_boundary_strip(const BinaryMask& mask, int depth);

enum class Connectivity { Six = 6, TwentySix = 26 };

Connectivity connectivity_from_int(int n);

/// Per-voxel component labels (0 = background, components numbered from 1 in
/// order of their smallest linear index).
struct ComponentLabels {
  std::vector<int> labels;
  std::vector<std::size_t> sizes;  // sizes[label - 1]
};

ComponentLabels label_components(const BinaryMask& mask, Connectivity conn);

/// The connected component with the most voxels. Ties go to the component
/// whose smallest linear index comes first. Throws EmptyRegion on an empty mask.
BinaryMask largest_component(const BinaryMask& mask,
                             Connectivity conn = Connectivity::TwentySix);

}  // namespace fvfseg
