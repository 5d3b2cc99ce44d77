#include "fvfseg/candidate.hpp"

#include <cmath>

#include "fvfseg/filters.hpp"

namespace fvfseg {

void CandidateParams::validate() const {
  require(omega > 0.0, ErrorCode::InvalidParameter, "omega must be > 0");
  require(psi > 0.0 && psi < omega, ErrorCode::InvalidParameter,
          "psi must lie strictly between 0 and omega");
  require(strip_depth >= 1, ErrorCode::InvalidParameter, "strip_depth must be >= 1");
  require(erode_iters >= 1 && dilate_iters >= 1, ErrorCode::InvalidParameter,
          "morphology iteration counts must be >= 1");
}

KeyValues CandidateRegion::report() const {
  static const char* names[] = {"strip", "threshold", "erode", "largest", "dilate", "transform"};
  KeyValues kv;
  kv.set("candidate_voxels", voxel_count);
  kv.set("centroid_x", centroid.x);
  kv.set("centroid_y", centroid.y);
  kv.set("centroid_z", centroid.z);
  for (std::size_t s = 0; s < step_counts.size() && s < 6; ++s) {
    kv.set(std::string("step") + std::to_string(s + 1) + "_" + names[s] + "_voxels",
           step_counts[s]);
  }
  return kv;
}

BinaryMask binarize_gbbm(const ScalarVolume& gbbm, double psi, double omega) {
  require(psi > 0.0 && psi < omega, ErrorCode::InvalidParameter,
          "psi must lie strictly between 0 and omega");
  BinaryMask out(gbbm.grid());
  for (std::size_t n = 0; n < gbbm.size(); ++n) out.set(n, gbbm[n] > psi);
  return out;
}

Vec3 mask_centroid(const BinaryMask& mask) {
  const Grid& g = mask.grid();
  double sx = 0.0, sy = 0.0, sz = 0.0;
  std::size_t n = 0;
  for (std::size_t idx = 0; idx < mask.size(); ++idx) {
    if (!mask[idx]) continue;
    const Index3 c = g.coords(idx);
    sx += c.i;
    sy += c.j;
    sz += c.k;
    ++n;
  }
  require(n > 0, ErrorCode::EmptyRegion, "centroid of an empty mask");
  const double inv = 1.0 / static_cast<double>(n);
  return {sx * inv * g.spacing.x, sy * inv * g.spacing.y, sz * inv * g.spacing.z};
}

CandidateRegion extract_candidate(const ScalarVolume& gbbm, const BinaryMask& brain_mask,
                                  const CandidateParams& params,
                                  const std::optional<AffineTransform>& t_inv) {
  params.validate();
  require_same_grid(gbbm.grid(), brain_mask.grid(), "extract_candidate");

  CandidateRegion out;
  auto check = [&](const BinaryMask& m, int step, const char* what) {
    const std::size_t c = m.count();
    out.step_counts.push_back(c);
    if (c == 0) {
      throw NoCandidateError(step, std::string("no candidate region: empty after step ") +
                                       std::to_string(step) + " (" + what + ")");
    }
  };

  // 1. boundary removal
  const BinaryMask inner = mask_boundary_strip(brain_mask, params.strip_depth);
  check(inner, 1, "boundary strip");
  ScalarVolume stripped = gbbm;
  for (std::size_t n = 0; n < stripped.size(); ++n) {
    if (!inner[n]) stripped[n] = 0.0;
  }
  // 2. threshold
  BinaryMask m = binarize_gbbm(stripped, params.psi, params.omega);
  check(m, 2, "threshold");
  // 3. erosion
  m = erode(m, 1, params.erode_iters);
  check(m, 3, "erosion");
  // 4. largest region
  m = largest_component(m, params.connectivity);
  check(m, 4, "largest component");
  // 5. dilation, kept inside the stripped brain
  m = intersect(dilate(m, 1, params.dilate_iters), inner);
  check(m, 5, "dilation");
  // 6. reverse transform
  if (t_inv && !t_inv->is_identity()) {
    m = resample_mask(m, *t_inv, m.dims(), m.grid().spacing);
  }
  check(m, 6, "reverse transform");

  out.voxel_count = m.count();
  out.centroid = mask_centroid(m);
  out.mask = std::move(m);
  return out;
}

}  // namespace fvfseg
