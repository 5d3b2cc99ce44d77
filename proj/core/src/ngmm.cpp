#include "fvfseg/ngmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace fvfseg {

TissueMixtureModel::TissueMixtureModel(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  require(!components_.empty(), ErrorCode::InvalidParameter, "mixture needs >= 1 component");
  std::stable_sort(components_.begin(), components_.end(),
                   [](const auto& a, const auto& b) { return a.mean < b.mean; });
  double wsum = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    require(std::isfinite(c.mean) && std::isfinite(c.stddev) && c.weight >= 0.0 &&
                c.weight <= 1.0,
            ErrorCode::InvalidParameter, "mixture component has invalid parameters");
    require(c.stddev * c.stddev >= kVarianceFloor * (1.0 - 1e-12), ErrorCode::InvalidParameter,
            "mixture component stddev below the variance floor");
    if (k > 0) {
      require(c.mean > components_[k - 1].mean, ErrorCode::InvalidParameter,
              "mixture component means must be distinct");
    }
    wsum += c.weight;
  }
  require(std::abs(wsum - 1.0) <= 1e-9, ErrorCode::InvalidParameter,
          "mixture weights must sum to 1");
}

std::string TissueMixtureModel::label(std::size_t k) const {
  if (components_.size() == 3) {
    static const char* names[] = {"CSF", "GM", "WM"};
    return names[k];
  }
  return "C" + std::to_string(k);
}

KeyValues TissueMixtureModel::to_keyvalues() const {
  KeyValues kv;
  kv.set("K", components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const std::string s = std::to_string(k);
    kv.set("weight_" + s, components_[k].weight);
    kv.set("mean_" + s, components_[k].mean);
    kv.set("std_" + s, components_[k].stddev);
  }
  return kv;
}

TissueMixtureModel TissueMixtureModel::from_keyvalues(const KeyValues& kv) {
  const long long K = kv.get_int("K");
  require(K >= 1 && K <= 64, ErrorCode::Config, "model K out of range");
  std::vector<GaussianComponent> comps(static_cast<std::size_t>(K));
  for (long long k = 0; k < K; ++k) {
    const std::string s = std::to_string(k);
    comps[static_cast<std::size_t>(k)] = {kv.get_real("weight_" + s), kv.get_real("mean_" + s),
                                          kv.get_real("std_" + s)};
  }
  return TissueMixtureModel(std::move(comps));
}

void save_model(const TissueMixtureModel& model, const std::filesystem::path& path) {
  model.to_keyvalues().save(path);
}

TissueMixtureModel load_model(const std::filesystem::path& path) {
  return TissueMixtureModel::from_keyvalues(KeyValues::load(path));
}

NormalizedVolume normalize_intensity(const ScalarVolume& vol, const BinaryMask& mask) {
  require_same_grid(vol.grid(), mask.grid(), "normalize_intensity");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (mask[i]) {
      sum += vol[i];
      ++n;
    }
  }
  require(n > 0, ErrorCode::Normalization, "normalize_intensity: mask is empty");
  const double m = sum / static_cast<double>(n);
  require(m > 0.0 && std::isfinite(m), ErrorCode::Normalization,
          "normalize_intensity: masked mean is not positive");

  std::vector<double> out(vol.size());
  for (std::size_t i = 0; i < vol.size(); ++i) out[i] = vol[i] / m;
  NormalizationRecord rec{m, "mean over " + std::to_string(n) + " masked voxels"};
  return {ScalarVolume(vol.grid(), std::move(out)), rec};
}

double log_gaussian_pdf(double x, double mean, double stddev) {
  require(stddev > 0.0, ErrorCode::InvalidParameter, "gaussian stddev must be > 0");
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double gaussian_pdf(double x, double mean, double stddev) {
  require(stddev > 0.0, ErrorCode::InvalidParameter, "gaussian stddev must be > 0");
  const double z = (x - mean) / stddev;
  return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi));
}

double mixture_density(const TissueMixtureModel& model, double x) {
  double p = 0.0;
  for (const auto& c : model.components()) p += c.weight * gaussian_pdf(x, c.mean, c.stddev);
  return p;
}

std::vector<double> masked_samples(const ScalarVolume& vol, const BinaryMask& mask,
                                   std::size_t max_samples) {
  require_same_grid(vol.grid(), mask.grid(), "masked_samples");
  const std::size_t n = mask.count();
  const std::size_t stride = n <= max_samples ? 1 : (n + max_samples - 1) / max_samples;
  std::vector<double> out;
  out.reserve(n / stride + 1);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (!mask[i]) continue;
    if (seen++ % stride == 0) out.push_back(vol[i]);
  }
  return out;
}

namespace {

struct Params {
  std::vector<double> w, mu, var;
};

// E-step; fills responsibilities (n x K, row-major) and returns the mean
// per-sample log-likelihood.
double expectation(const std::vector<double>& x, const Params& p, std::vector<double>& resp) {
  const std::size_t K = p.w.size();
  std::vector<double> logw(K), logc(K), inv2v(K);
  for (std::size_t k = 0; k < K; ++k) {
    logw[k] = std::log(p.w[k]);
    logc[k] = -0.5 * std::log(2.0 * std::numbers::pi * p.var[k]);
    inv2v[k] = 0.5 / p.var[k];
  }
  double ll = 0.0;
  std::vector<double> lt(K);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      const double d = x[i] - p.mu[k];
      lt[k] = p.w[k] > 0.0 ? logw[k] + logc[k] - d * d * inv2v[k]
                           : -std::numeric_limits<double>::infinity();
      mx = std::max(mx, lt[k]);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(lt[k] - mx);
    const double lse = mx + std::log(s);
    ll += lse;
    for (std::size_t k = 0; k < K; ++k) resp[i * K + k] = std::exp(lt[k] - lse);
  }
  return ll / static_cast<double>(x.size());
}

void maximization(const std::vector<double>& x, const std::vector<double>& resp, Params& p) {
  const std::size_t K = p.w.size();
  const double n = static_cast<double>(x.size());
  std::vector<double> nk(K, 0.0), sx(K, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      nk[k] += resp[i * K + k];
      sx[k] += resp[i * K + k] * x[i];
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (nk[k] <= 0.0) {
      p.w[k] = 0.0;
      continue;
    }
    p.mu[k] = sx[k] / nk[k];
  }
  std::vector<double> sv(K, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const double d = x[i] - p.mu[k];
      sv[k] += resp[i * K + k] * d * d;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (nk[k] <= 0.0) continue;
    p.w[k] = nk[k] / n;
    p.var[k] = std::max(sv[k] / nk[k], kVarianceFloor);
  }
}

}  // namespace

EmResult fit_em(std::span<const double> samples, const EmOptions& opt) {
  require(opt.components >= 1, ErrorCode::InvalidParameter, "EM needs K >= 1");
  require(opt.max_iters >= 1 && opt.tol >= 0.0, ErrorCode::InvalidParameter,
          "EM needs max_iters >= 1 and tol >= 0");
  const auto K = static_cast<std::size_t>(opt.components);
  require(samples.size() >= 10 * K, ErrorCode::InsufficientData,
          "EM needs at least 10*K samples, got " + std::to_string(samples.size()));

  // Sorting makes every accumulation order-independent, so any permutation of
  // the input yields a bit-identical model.
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  for (double v : x) {
    require(std::isfinite(v), ErrorCode::Numerical, "EM sample is not finite");
  }
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);

  Params p;
  p.w.assign(K, 1.0 / static_cast<double>(K));
  p.var.assign(K, std::max((sd / static_cast<double>(K)) * (sd / static_cast<double>(K)),
                           kVarianceFloor));
  p.mu.resize(K);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double q = (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(K));
    const auto idx = std::min(x.size() - 1, static_cast<std::size_t>(q * n));
    p.mu[k] = x[idx];
    if (opt.init_jitter > 0.0) p.mu[k] += opt.init_jitter * sd * jitter(rng);
  }

  EmResult result;
  std::vector<double> resp(x.size() * K);
  double ll = expectation(x, p, resp);
  require(std::isfinite(ll), ErrorCode::Numerical, "EM log-likelihood is not finite");
  result.log_likelihood.push_back(ll);

  for (int it = 1; it <= opt.max_iters; ++it) {
    maximization(x, resp, p);
    const double next = expectation(x, p, resp);
    require(std::isfinite(next), ErrorCode::Numerical,
            "EM log-likelihood became non-finite at iteration " + std::to_string(it));
    result.log_likelihood.push_back(next);
    result.iterations = it;
    const double gain = next - ll;
    ll = next;
    if (gain < opt.tol) {
      result.converged = true;
      break;
    }
  }

  std::vector<GaussianComponent> comps;
  double wsum = 0.0;
  for (std::size_t k = 0; k < K; ++k) wsum += p.w[k];
  for (std::size_t k = 0; k < K; ++k) {
    comps.push_back({p.w[k] / wsum, p.mu[k], std::sqrt(p.var[k])});
  }
  result.model = TissueMixtureModel(std::move(comps));
  return result;
}

}  // namespace fvfseg
