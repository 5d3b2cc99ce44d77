#pragma once

#include <functional>
#include <optional>

#include "fvfseg/candidate.hpp"
#include "fvfseg/volume.hpp"

namespace fvfseg {

/// Implicit surface: the zero level set of `phi`, negative inside.
struct LevelSetField {
  ScalarVolume phi;
  int iteration = 0;
  double band_halfwidth = 6.0;  // voxels
};

/// Exact Euclidean distance (mm) from every voxel to the nearest voxel whose
/// membership differs, shifted by half a voxel so the interface sits midway
/// between voxel centers: inside voxels get -(d - h/2), outside voxels d - h/2
/// with h the smallest spacing.
ScalarVolume signed_distance(const BinaryMask& mask);

LevelSetField signed_distance_init(const BinaryMask& region, double band_halfwidth = 6.0);

/// Voxels with phi < 0.
BinaryMask zero_level_mask(const LevelSetField& ls);
BinaryMask zero_level_mask(const ScalarVolume& phi);

/// Restores phi to a signed distance function without moving its zero level
/// set: interface voxels keep |phi| clipped to the distance of the nearest
/// axial zero crossing, the rest is rebuilt with fast sweeping of the
/// eikonal equation. Signs are preserved.
LevelSetField reinitialize(const LevelSetField& ls);

struct EdgeMap {
  ScalarVolume f;        // |grad(G_sigma * image)| rescaled to [0, 1]
  VectorField gradient;  // central_gradient(f)
};

EdgeMap edge_map(const ScalarVolume& image, double sigma);

/// Everything the directional external force needs.
struct ForceContext {
  ScalarVolume edge;
  VectorField edge_gradient;
  Vec3 center;  // source point A (candidate centroid, world mm)
  BinaryMask candidate;
  double edge_weight = 1.0;

  void validate() const;
};

ForceContext make_force_context(const ScalarVolume& image, const CandidateRegion& region,
                                double edge_sigma, double edge_weight = 1.0);

/// cos of the angle between two direction vectors.
double directional_cosine(Vec3 a, Vec3 b);

struct ForceSample {
  Vec3 force;            // unit length or exactly zero
  double delta = 0.0;    // +1 inside the candidate, -1 outside
  std::optional<double> cos_gamma;  // angle between `normal` and A->B
};

/// Directional external force at world point B: the edge gradient plus
/// delta times the unit direction from A to B, normalized. Zero when B == A
/// or the sum vanishes. Throws Range if B lies outside the grid.
ForceSample external_force(const ForceContext& ctx, Vec3 point, Vec3 normal);

/// External force evaluated at every voxel center.
VectorField external_force_field(const ForceContext& ctx);

struct EvolutionParams {
  double dt = 0.0;  // <= 0 selects the stability bound
  double alpha = 0.2;
  double beta = 1.0;
  int max_iters = 400;
  int reinit_every = 20;
  double stop_tol = 1e-3;

  void validate() const;
};

/// dt <= 0.9 / (6 alpha / h^2 + 3 beta / h).
double stability_bound(double alpha, double beta, double h);

struct IterationStats {
  int iteration = 0;
  std::size_t inside_voxels = 0;
  double max_update = 0.0;
  std::size_t interface_voxels = 0;
  double cos_mean = 0.0;
  double cos_min = 0.0;
  double cos_max = 0.0;
  bool reinitialized = false;
};

using IterationObserver = std::function<void(const IterationStats&)>;

struct EvolutionResult {
  LevelSetField field;
  bool converged = false;  // stopped on stop_tol rather than max_iters
  double dt = 0.0;
};

/// Explicit time stepping of
///   phi <- phi + dt * (alpha * K * |grad phi| - beta * E . grad phi)
/// with K the mean curvature (central differences) and the advection term
/// upwinded along the external force E. Throws InstabilityError when phi
/// turns non-finite or a single step moves it by more than one voxel.
EvolutionResult evolve(const LevelSetField& ls, const ForceContext& ctx,
                       const EvolutionParams& params, const IterationObserver& observer = {});

}  // namespace fvfseg
