#pragma once

#include <vector>

#include "fvfseg/volume.hpp"

namespace fvfseg {

/// Normalized 1D Gaussian kernel with support truncated at ceil(3*sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur, sigma in voxels, replicate-edge boundary.
ScalarVolume gaussian_smooth(const ScalarVolume& vol, double sigma);

/// Central differences in world units on the interior, one-sided at the
/// faces. Every dimension must be at least 3.
VectorField central_gradient(const ScalarVolume& vol);

ScalarVolume magnitude(const VectorField& field);

/// Pushes `vol` through `t`: output(p) = vol(t^-1 p), trilinear, zero outside
/// the source domain.
ScalarVolume resample_affine(const ScalarVolume& vol, const AffineTransform& t,
                             const Dims& out_dims, const Vec3& out_spacing);

/// Mask variant: trilinear interpolation of the 0/1 field then a 0.5 threshold.
BinaryMask resample_mask(const BinaryMask& mask, const AffineTransform& t,
                         const Dims& out_dims, const Vec3& out_spacing);

}  // namespace fvfseg
