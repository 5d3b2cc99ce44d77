#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "fvfseg/brainmap.hpp"
#include "fvfseg/keyvalue.hpp"

namespace fvfseg {

/// Raw-intensity Gaussian per tissue, indexed CSF, GM, WM.
struct TissueIntensities {
  std::array<double, 3> mean{180.0, 300.0, 390.0};
  std::array<double, 3> stddev{14.0, 24.0, 31.0};
};

/// Tissue composition (CSF, GM, WM) of one radial shell. Real atlases are
/// never one-hot: cortex carries sulcal CSF, white matter some gray.
using ShellMix = std::array<double, 3>;

/// Radial shell boundaries as fractions of the brain radius, the logistic
/// softness of the transitions (mm) and each shell's tissue mix.
struct PhantomLayout {
  double brain_radius_fraction = 0.47;  // of the smallest grid extent
  double ventricle = 0.10;              // CSF core
  double white_matter = 0.30;
  double gray_matter = 0.85;            // CSF rim beyond this
  double softness = 1.0;
  ShellMix ventricle_mix{1.0, 0.0, 0.0};
  ShellMix white_matter_mix{0.02, 0.10, 0.88};
  ShellMix gray_matter_mix{0.22, 0.75, 0.03};
  ShellMix rim_mix{0.85, 0.15, 0.0};
};

struct PhantomAtlas {
  ProbabilisticAtlas atlas;
  TissueIntensities intensities;
  PhantomLayout layout;
  std::uint64_t seed = 0;
  Vec3 brain_center;
  double brain_radius = 0.0;  // mm

  /// Hard tissue label (argmax of the maps) at a voxel; -1 outside the brain.
  int tissue_label(std::size_t voxel) const;
  KeyValues manifest() const;
};

enum class TumorShape { Sphere, Ellipsoid, Blob };

TumorShape tumor_shape_from_string(const std::string& s);
std::string to_string(TumorShape shape);

struct TumorSpec {
  TumorShape shape = TumorShape::Sphere;
  Vec3 center;                 // world mm
  Vec3 radii{8.0, 8.0, 8.0};   // mm; spheres use radii.x
  double offset_sigma = 4.0;   // in units of the local tissue stddev; 0 is a healthy control
  std::uint64_t seed = 1;

  KeyValues manifest() const;
};

/// Default tumor placement: inside the gray-matter band, displaced from the
/// brain center along +z.
TumorSpec default_tumor(const PhantomAtlas& atlas, TumorShape shape = TumorShape::Sphere);

PhantomAtlas synth_atlas(const Dims& dims, std::uint64_t seed,
                         const Vec3& spacing = {1.0, 1.0, 1.0},
                         const PhantomLayout& layout = {},
                         const TissueIntensities& intensities = {});

struct PatientVolume {
  ScalarVolume image;
  BinaryMask truth;
};

BinaryMask tumor_region(const Grid& grid, const TumorSpec& tumor);

PatientVolume synth_patient(const PhantomAtlas& atlas, const TumorSpec& tumor);

}  // namespace fvfseg
