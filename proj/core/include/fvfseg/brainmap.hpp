#pragma once

#include <array>
#include <cstddef>

#include "fvfseg/ngmm.hpp"
#include "fvfseg/volume.hpp"

namespace fvfseg {

enum class Tissue { CSF = 0, GM = 1, WM = 2 };

/// Three values indexed CSF, GM, WM.
struct TissueTriple {
  std::array<double, 3> v{};

  double& operator[](std::size_t k) { return v[k]; }
  double operator[](std::size_t k) const { return v[k]; }
  double& operator[](Tissue t) { return v[static_cast<std::size_t>(t)]; }
  double operator[](Tissue t) const { return v[static_cast<std::size_t>(t)]; }
  double sum() const { return v[0] + v[1] + v[2]; }
  friend bool operator==(const TissueTriple&, const TissueTriple&) = default;
};

/// Template intensities plus per-tissue probability (or raw weight) maps and
/// the brain mask, all on one grid.
struct ProbabilisticAtlas {
  ScalarVolume template_image;
  ScalarVolume csf;
  ScalarVolume gm;
  ScalarVolume wm;
  BinaryMask brain_mask;

  const Grid& grid() const { return template_image.grid(); }
  const ScalarVolume& tissue(Tissue t) const;
  /// Throws Grid on mismatched grids, InvalidParameter on negative tissue values.
  void validate() const;
};

struct GbbmParams {
  double omega = 255.0;
};

/// Tissue maps at one voxel normalized to sum 1; uniform when they sum to 0.
TissueTriple spatial_prior(const ProbabilisticAtlas& atlas, std::size_t voxel);
TissueTriple spatial_prior(const TissueTriple& xi);

struct Posterior {
  TissueTriple p;
  bool degenerate = false;  // Bayes denominator vanished; p is the prior
};

/// Bayes rule with a per-voxel prior and the mixture's class likelihoods.
/// The model must have exactly three components (CSF, GM, WM).
Posterior posterior_triple(const TissueMixtureModel& model, const TissueTriple& prior, double x);

/// Pearson correlation of the paired triples; 0 if either has variance < 1e-12.
double pearson_cc(const TissueTriple& alpha, const TissueTriple& beta);

/// 1 - cc for cc > 0, -cc otherwise. The jump at cc = 0 is intentional.
double cc_to_cm(double cc);

struct GbbmResult {
  ScalarVolume map;
  std::size_t degenerate_voxels = 0;
};

/// Abnormality map: omega * cc_to_cm(pearson_cc(posterior, prior)) inside the
/// atlas brain mask, 0 outside. `patient` must already be normalized.
GbbmResult build_gbbm(const ScalarVolume& patient, const ProbabilisticAtlas& atlas,
                      const TissueMixtureModel& model, const GbbmParams& params = {});

}  // namespace fvfseg
