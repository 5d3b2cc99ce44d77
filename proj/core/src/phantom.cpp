#include "fvfseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fvfseg {

namespace {

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Fills the template with per-tissue Gaussian noise around the tissue means.
ScalarVolume noisy_template(const PhantomAtlas& pa, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const Grid& g = pa.atlas.grid();
  ScalarVolume out(g, 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const int t = pa.tissue_label(n);
    if (t < 0) continue;
    const auto ti = static_cast<std::size_t>(t);
    out[n] = std::max(0.0, pa.intensities.mean[ti] + pa.intensities.stddev[ti] * unit(rng));
  }
  return out;
}

}  // namespace

int PhantomAtlas::tissue_label(std::size_t voxel) const {
  if (!atlas.brain_mask[voxel]) return -1;
  const double c = atlas.csf[voxel];
  const double g = atlas.gm[voxel];
  const double w = atlas.wm[voxel];
  if (c >= g && c >= w) return 0;
  return g >= w ? 1 : 2;
}

KeyValues PhantomAtlas::manifest() const {
  KeyValues kv;
  const Grid& g = atlas.grid();
  kv.set("atlas_seed", static_cast<long long>(seed));
  kv.set("dims", std::to_string(g.dims.nx) + " " + std::to_string(g.dims.ny) + " " +
                     std::to_string(g.dims.nz));
  kv.set("spacing", format_real(g.spacing.x) + " " + format_real(g.spacing.y) + " " +
                        format_real(g.spacing.z));
  kv.set("brain_center", format_real(brain_center.x) + " " + format_real(brain_center.y) +
                             " " + format_real(brain_center.z));
  kv.set("brain_radius", brain_radius);
  kv.set("layout_brain_radius_fraction", layout.brain_radius_fraction);
  kv.set("layout_ventricle", layout.ventricle);
  kv.set("layout_white_matter", layout.white_matter);
  kv.set("layout_gray_matter", layout.gray_matter);
  kv.set("layout_softness", layout.softness);
  const auto mix_text = [](const ShellMix& m) {
    return format_real(m[0]) + " " + format_real(m[1]) + " " + format_real(m[2]);
  };
  kv.set("layout_ventricle_mix", mix_text(layout.ventricle_mix));
  kv.set("layout_white_matter_mix", mix_text(layout.white_matter_mix));
  kv.set("layout_gray_matter_mix", mix_text(layout.gray_matter_mix));
  kv.set("layout_rim_mix", mix_text(layout.rim_mix));
  static const char* names[] = {"csf", "gm", "wm"};
  for (std::size_t t = 0; t < 3; ++t) {
    kv.set(std::string(names[t]) + "_mean", intensities.mean[t]);
    kv.set(std::string(names[t]) + "_std", intensities.stddev[t]);
  }
  return kv;
}

TumorShape tumor_shape_from_string(const std::string& s) {
  if (s == "sphere") return TumorShape::Sphere;
  if (s == "ellipsoid") return TumorShape::Ellipsoid;
  if (s == "blob") return TumorShape::Blob;
  fail(ErrorCode::InvalidParameter, "unknown tumor shape '" + s + "'");
}

std::string to_string(TumorShape shape) {
  switch (shape) {
    case TumorShape::Sphere:
      return "sphere";
    case TumorShape::Ellipsoid:
      return "ellipsoid";
    case TumorShape::Blob:
      return "blob";
  }
  return "sphere";
}

KeyValues TumorSpec::manifest() const {
  KeyValues kv;
  kv.set("tumor_shape", to_string(shape));
  kv.set("tumor_center",
         format_real(center.x) + " " + format_real(center.y) + " " + format_real(center.z));
  kv.set("tumor_radii",
         format_real(radii.x) + " " + format_real(radii.y) + " " + format_real(radii.z));
  kv.set("tumor_offset_sigma", offset_sigma);
  kv.set("tumor_seed", static_cast<long long>(seed));
  return kv;
}

TumorSpec default_tumor(const PhantomAtlas& pa, TumorShape shape) {
  TumorSpec t;
  t.shape = shape;
  // Deep enough that the cap stays clear of the stripped brain edge, far
  // enough out that it keeps off the white matter.
  const double depth = 0.62;
  t.center = pa.brain_center + Vec3{0.0, 0.0, depth * pa.brain_radius};
  t.radii = shape == TumorShape::Sphere ? Vec3{8.0, 8.0, 8.0} : Vec3{10.0, 7.0, 5.0};
  return t;
}

PhantomAtlas synth_atlas(const Dims& dims, std::uint64_t seed, const Vec3& spacing,
                         const PhantomLayout& layout, const TissueIntensities& intensities) {
  require(dims.nx >= 32 && dims.ny >= 32 && dims.nz >= 32, ErrorCode::InvalidParameter,
          "synth_atlas needs every dimension >= 32");
  require(layout.ventricle > 0.0 && layout.ventricle < layout.white_matter &&
              layout.white_matter < layout.gray_matter && layout.gray_matter < 1.0 &&
              layout.softness > 0.0 && layout.brain_radius_fraction > 0.0 &&
              layout.brain_radius_fraction <= 0.5,
          ErrorCode::InvalidParameter, "phantom layout fractions must be increasing in (0, 1)");
  for (const ShellMix* m : {&layout.ventricle_mix, &layout.white_matter_mix,
                            &layout.gray_matter_mix, &layout.rim_mix}) {
    const double sum = (*m)[0] + (*m)[1] + (*m)[2];
    require((*m)[0] >= 0.0 && (*m)[1] >= 0.0 && (*m)[2] >= 0.0 && sum <= 1.0 + 1e-12,
            ErrorCode::InvalidParameter, "shell tissue mix must be non-negative and sum <= 1");
  }
  for (std::size_t t = 0; t < 3; ++t) {
    require(intensities.mean[t] > 0.0 && intensities.stddev[t] > 0.0,
            ErrorCode::InvalidParameter, "tissue intensities must be positive");
    if (t > 0) {
      require(intensities.mean[t] > intensities.mean[t - 1], ErrorCode::InvalidParameter,
              "tissue means must increase CSF < GM < WM");
    }
  }

  const Grid g(dims, spacing);
  PhantomAtlas pa;
  pa.layout = layout;
  pa.intensities = intensities;
  pa.seed = seed;
  const Vec3 extent{(dims.nx - 1) * spacing.x, (dims.ny - 1) * spacing.y,
                    (dims.nz - 1) * spacing.z};
  pa.brain_center = 0.5 * extent;
  pa.brain_radius = layout.brain_radius_fraction *
                    std::min({dims.nx * spacing.x, dims.ny * spacing.y, dims.nz * spacing.z});

  ProbabilisticAtlas& at = pa.atlas;
  at.csf = ScalarVolume(g, 0.0);
  at.gm = ScalarVolume(g, 0.0);
  at.wm = ScalarVolume(g, 0.0);
  at.brain_mask = BinaryMask(g);
  const double R = pa.brain_radius;
  const double w = layout.softness;
  for (int k = 0; k < dims.nz; ++k) {
    for (int j = 0; j < dims.ny; ++j) {
      for (int i = 0; i < dims.nx; ++i) {
        const double r = norm(g.world(i, j, k) - pa.brain_center);
        if (r > R) continue;
        const std::size_t n = g.index(i, j, k);
        at.brain_mask.set(n, true);
        // Nested logistic steps give shell memberships summing to one.
        const double s1 = logistic((r - layout.ventricle * R) / w);
        const double s2 = logistic((r - layout.white_matter * R) / w);
        const double s3 = logistic((r - layout.gray_matter * R) / w);
        const std::array<double, 4> shell{1.0 - s1, s1 * (1.0 - s2), s1 * s2 * (1.0 - s3),
                                          s1 * s2 * s3};
        const std::array<const ShellMix*, 4> mix{&layout.ventricle_mix, &layout.white_matter_mix,
                                                 &layout.gray_matter_mix, &layout.rim_mix};
        std::array<double, 3> p{};
        for (std::size_t m = 0; m < 4; ++m) {
          for (std::size_t t = 0; t < 3; ++t) p[t] += shell[m] * (*mix[m])[t];
        }
        at.csf[n] = p[0];
        at.gm[n] = p[1];
        at.wm[n] = p[2];
      }
    }
  }
  at.template_image = ScalarVolume(g, 0.0);
  at.template_image = noisy_template(pa, seed);
  return pa;
}

BinaryMask tumor_region(const Grid& g, const TumorSpec& t) {
  require(t.radii.x > 0.0 && t.radii.y > 0.0 && t.radii.z > 0.0, ErrorCode::InvalidParameter,
          "tumor radii must be positive");
  // Blob: ellipsoid whose radius is modulated by a few seeded low-frequency
  // lobes, up to +-20%.
  std::array<Vec3, 3> lobe_dirs{};
  std::array<double, 3> lobe_amp{}, lobe_phase{};
  if (t.shape == TumorShape::Blob) {
    std::mt19937_64 rng(t.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (std::size_t m = 0; m < 3; ++m) {
      Vec3 d{unit(rng), unit(rng), unit(rng)};
      lobe_dirs[m] = (1.0 / std::max(norm(d), 1e-9)) * d;
      lobe_amp[m] = 0.2 / 3.0;
      lobe_phase[m] = phase(rng);
    }
  }
  const Vec3 radii = t.shape == TumorShape::Sphere ? Vec3{t.radii.x, t.radii.x, t.radii.x}
                                                   : t.radii;
  BinaryMask out(g);
  for (int k = 0; k < g.dims.nz; ++k) {
    for (int j = 0; j < g.dims.ny; ++j) {
      for (int i = 0; i < g.dims.nx; ++i) {
        const Vec3 d = g.world(i, j, k) - t.center;
        const double q = std::sqrt((d.x / radii.x) * (d.x / radii.x) +
                                   (d.y / radii.y) * (d.y / radii.y) +
                                   (d.z / radii.z) * (d.z / radii.z));
        double limit = 1.0;
        if (t.shape == TumorShape::Blob && norm(d) > 1e-12) {
          const Vec3 u = (1.0 / norm(d)) * d;
          for (std::size_t m = 0; m < 3; ++m) {
            limit += lobe_amp[m] * std::cos(3.0 * dot(u, lobe_dirs[m]) + lobe_phase[m]);
          }
        }
        out.set(i, j, k, q <= limit);
      }
    }
  }
  return out;
}

PatientVolume synth_patient(const PhantomAtlas& pa, const TumorSpec& tumor) {
  require(tumor.offset_sigma == 0.0 || std::abs(tumor.offset_sigma) >= 3.0,
          ErrorCode::InvalidParameter,
          "tumor offset must be 0 (healthy control) or have magnitude >= 3 sigma");
  const Grid& g = pa.atlas.grid();
  BinaryMask truth = tumor_region(g, tumor);
  require(!truth.empty(), ErrorCode::InvalidParameter, "tumor region covers no voxels");
  require(is_subset(truth, pa.atlas.brain_mask), ErrorCode::InvalidParameter,
          "tumor does not fit inside the brain mask");

  const Vec3 c = tumor.center;
  const int ci = static_cast<int>(std::lround(c.x / g.spacing.x));
  const int cj = static_cast<int>(std::lround(c.y / g.spacing.y));
  const int ck = static_cast<int>(std::lround(c.z / g.spacing.z));
  require(g.contains(ci, cj, ck), ErrorCode::InvalidParameter, "tumor center is off the grid");
  const int local = pa.tissue_label(g.index(ci, cj, ck));
  require(local >= 0, ErrorCode::InvalidParameter, "tumor center lies outside the brain");
  const auto lt = static_cast<std::size_t>(local);
  const double mu = pa.intensities.mean[lt];
  const double sd = pa.intensities.stddev[lt];

  const std::uint64_t seed = mix_seed(pa.seed, tumor.seed);
  ScalarVolume image = noisy_template(pa, seed);
  const double level = std::max(0.0, mu + tumor.offset_sigma * sd);
  for (std::size_t n = 0; n < image.size(); ++n) {
    if (truth[n]) image[n] = level;
  }
  return {std::move(image), std::move(truth)};
}

}  // namespace fvfseg
