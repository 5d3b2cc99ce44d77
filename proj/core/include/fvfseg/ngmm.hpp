#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fvfseg/keyvalue.hpp"
#include "fvfseg/volume.hpp"

namespace fvfseg {

/// Lower bound on component variance, in normalized-intensity units squared.
inline constexpr double kVarianceFloor = 1e-6;

struct GaussianComponent {
  double weight = 1.0;
  double mean = 0.0;
  double stddev = 1.0;
};

/// Univariate Gaussian mixture over normalized intensity. Components are kept
/// sorted by mean; with three components they are CSF, GM, WM in that order.
class TissueMixtureModel {
 public:
  TissueMixtureModel() = default;
  /// Sorts by mean and validates (weights sum to 1, sigma above the floor,
  /// strictly increasing means).
  explicit TissueMixtureModel(std::vector<GaussianComponent> components);

  std::size_t size() const { return components_.size(); }
  const GaussianComponent& operator[](std::size_t k) const { return components_[k]; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  std::string label(std::size_t k) const;

  KeyValues to_keyvalues() const;
  static TissueMixtureModel from_keyvalues(const KeyValues& kv);

 private:
  std::vector<GaussianComponent> components_;
};

void save_model(const TissueMixtureModel& model, const std::filesystem::path& path);
TissueMixtureModel load_model(const std::filesystem::path& path);

struct NormalizationRecord {
  double mean = 1.0;  // raw-intensity divisor
  std::string note;
};

struct NormalizedVolume {
  ScalarVolume volume;
  NormalizationRecord record;
};

/// Divides the whole volume by its mean over `mask`.
NormalizedVolume normalize_intensity(const ScalarVolume& vol, const BinaryMask& mask);

double gaussian_pdf(double x, double mean, double stddev);
double log_gaussian_pdf(double x, double mean, double stddev);
double mixture_density(const TissueMixtureModel& model, double x);

struct EmOptions {
  int components = 3;
  double tol = 1e-6;  // per-sample log-likelihood improvement
  int max_iters = 500;
  std::uint64_t seed = 0;
  double init_jitter = 0.0;  // stddev of seeded mean jitter, in units of sample std
};

struct EmResult {
  TissueMixtureModel model;
  /// Per-sample log-likelihood of the initial parameters followed by one
  /// entry per completed iteration.
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool converged = false;
};

EmResult fit_em(std::span<const double> samples, const EmOptions& options = {});

/// Masked voxel values, subsampled with a uniform stride down to at most
/// `max_samples` values.
std::vector<double> masked_samples(const ScalarVolume& vol, const BinaryMask& mask,
                                   std::size_t max_samples = 2'000'000);

}  // namespace fvfseg
