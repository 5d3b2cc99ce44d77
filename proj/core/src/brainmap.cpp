#include "fvfseg/brainmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fvfseg {

const ScalarVolume& ProbabilisticAtlas::tissue(Tissue t) const {
  switch (t) {
    case Tissue::CSF:
      return csf;
    case Tissue::GM:
      return gm;
    case Tissue::WM:
      return wm;
  }
  return csf;
}

void ProbabilisticAtlas::validate() const {
  const Grid& g = template_image.grid();
  require_same_grid(g, csf.grid(), "atlas CSF map");
  require_same_grid(g, gm.grid(), "atlas GM map");
  require_same_grid(g, wm.grid(), "atlas WM map");
  require_same_grid(g, brain_mask.grid(), "atlas brain mask");
  for (const ScalarVolume* v : {&csf, &gm, &wm}) {
    for (double x : v->data()) {
      require(x >= 0.0 && std::isfinite(x), ErrorCode::InvalidParameter,
              "atlas tissue maps must be finite and non-negative");
    }
  }
}

TissueTriple spatial_prior(const TissueTriple& xi) {
  const double s = xi.sum();
  if (!(s > 0.0)) return {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return {{xi[0] / s, xi[1] / s, xi[2] / s}};
}

TissueTriple spatial_prior(const ProbabilisticAtlas& atlas, std::size_t voxel) {
  require(voxel < atlas.csf.size(), ErrorCode::Range, "spatial_prior: voxel out of range");
  return spatial_prior(TissueTriple{{atlas.csf[voxel], atlas.gm[voxel], atlas.wm[voxel]}});
}

Posterior posterior_triple(const TissueMixtureModel& model, const TissueTriple& prior,
                           double x) {
  require(model.size() == 3, ErrorCode::InvalidParameter,
          "posterior_triple needs a three-class (CSF, GM, WM) model");
  // Log domain keeps tail classes representable down to the double range.
  constexpr double kMinDenominator = 1e-300;
  std::array<double, 3> lt{};
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 3; ++k) {
    lt[k] = prior[k] > 0.0
                ? std::log(prior[k]) + log_gaussian_pdf(x, model[k].mean, model[k].stddev)
                : -std::numeric_limits<double>::infinity();
    mx = std::max(mx, lt[k]);
  }
  if (!std::isfinite(mx)) return {prior, true};
  double s = 0.0;
  for (double v : lt) s += std::exp(v - mx);
  const double log_denominator = mx + std::log(s);
  if (log_denominator < std::log(kMinDenominator)) return {prior, true};

  Posterior out;
  for (std::size_t k = 0; k < 3; ++k) out.p[k] = std::exp(lt[k] - log_denominator);
  return out;
}

double pearson_cc(const TissueTriple& a, const TissueTriple& b) {
  const double ma = a.sum() / 3.0;
  const double mb = b.sum() / 3.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double da = a[k] - ma;
    const double db = b[k] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  // Sample (n - 1) normalization; it cancels in the ratio and only matters
  // for the degeneracy threshold.
  if (va / 2.0 < 1e-12 || vb / 2.0 < 1e-12) return 0.0;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

double cc_to_cm(double cc) {
  require(cc >= -1.0 && cc <= 1.0, ErrorCode::InvalidParameter,
          "cc_to_cm: correlation outside [-1, 1]");
  return cc > 0.0 ? 1.0 - cc : 0.0 - cc;
}

GbbmResult build_gbbm(const ScalarVolume& patient, const ProbabilisticAtlas& atlas,
                      const TissueMixtureModel& model, const GbbmParams& params) {
  require(params.omega > 0.0 && std::isfinite(params.omega), ErrorCode::InvalidParameter,
          "omega must be > 0");
  require_same_grid(patient.grid(), atlas.grid(), "build_gbbm patient vs atlas");
  atlas.validate();
  require(model.size() == 3, ErrorCode::InvalidParameter,
          "build_gbbm needs a three-class (CSF, GM, WM) model");

  GbbmResult out{ScalarVolume(patient.grid(), 0.0), 0};
  for (std::size_t n = 0; n < patient.size(); ++n) {
    if (!atlas.brain_mask[n]) continue;
    const TissueTriple prior = spatial_prior(atlas, n);
    const Posterior post = posterior_triple(model, prior, patient[n]);
    if (post.degenerate) ++out.degenerate_voxels;
    out.map[n] = params.omega * cc_to_cm(pearson_cc(post.p, prior));
  }
  return out;
}

}  // namespace fvfseg
