#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fvfseg/keyvalue.hpp"
#include "fvfseg/morphology.hpp"
#include "fvfseg/volume.hpp"

namespace fvfseg {

struct CandidateParams {
  double psi = 0.6 * 255.0;   // threshold on GBBM values, 0 < psi < omega
  double omega = 255.0;       // range of the map being thresholded
  int strip_depth = 2;
  int erode_iters = 2;
  int dilate_iters = 2;
  Connectivity connectivity = Connectivity::TwentySix;

  void validate() const;
};

struct CandidateRegion {
  BinaryMask mask;
  Vec3 centroid;  // world coordinates
  std::size_t voxel_count = 0;
  /// Voxel counts after each pipeline step (strip .. reverse transform).
  std::vector<std::size_t> step_counts;

  KeyValues report() const;
};

/// b = 1 iff value > psi.
BinaryMask binarize_gbbm(const ScalarVolume& gbbm, double psi, double omega = 255.0);

/// Six-step extraction: strip the brain boundary, threshold, erode, keep the
/// largest component, dilate (clipped to the stripped brain) and optionally
/// map back through `t_inv`. Throws NoCandidateError naming the step at which
/// the region vanished.
CandidateRegion extract_candidate(const ScalarVolume& gbbm, const BinaryMask& brain_mask,
                                  const CandidateParams& params,
                                  const std::optional<AffineTransform>& t_inv = std::nullopt);

Vec3 mask_centroid(const BinaryMask& mask);

}  // namespace fvfseg
