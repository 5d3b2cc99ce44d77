#include "fvfseg/volume.hpp"

#include <algorithm>
#include <sstream>

namespace fvfseg {

namespace {

void validate_grid(const Dims& d, const Vec3& s) {
  require(d.nx > 0 && d.ny > 0 && d.nz > 0, ErrorCode::InvalidParameter,
          "volume dims must be positive");
  require(s.x > 0.0 && s.y > 0.0 && s.z > 0.0 && std::isfinite(s.x) &&
              std::isfinite(s.y) && std::isfinite(s.z),
          ErrorCode::InvalidParameter, "volume spacing must be positive and finite");
}

}  // namespace

Grid::Grid(Dims d, Vec3 s) : dims(d), spacing(s) { validate_grid(d, s); }

Index3 Grid::coords(std::size_t idx) const {
  const auto nx = static_cast<std::size_t>(dims.nx);
  const auto ny = static_cast<std::size_t>(dims.ny);
  Index3 out;
  out.i = static_cast<int>(idx % nx);
  out.j = static_cast<int>((idx / nx) % ny);
  out.k = static_cast<int>(idx / (nx * ny));
  return out;
}

double Grid::min_spacing() const { return std::min({spacing.x, spacing.y, spacing.z}); }

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (a == b) return;
  std::ostringstream os;
  os << context << ": grid mismatch (" << a.dims.nx << "x" << a.dims.ny << "x"
     << a.dims.nz << " vs " << b.dims.nx << "x" << b.dims.ny << "x" << b.dims.nz
     << " or differing spacing)";
  fail(ErrorCode::Grid, os.str());
}

ScalarVolume::ScalarVolume(const Grid& grid, double fill)
    : grid_(grid), data_(grid.voxels(), fill) {
  validate_grid(grid.dims, grid.spacing);
}

ScalarVolume::ScalarVolume(const Grid& grid, std::vector<double> data)
    : grid_(grid), data_(std::move(data)) {
  validate_grid(grid.dims, grid.spacing);
  require(data_.size() == grid.voxels(), ErrorCode::InvalidParameter,
          "volume data length does not match dims");
}

bool ScalarVolume::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

BinaryMask::BinaryMask(const Grid& grid, bool fill)
    : grid_(grid), data_(grid.voxels(), fill ? 1 : 0) {
  validate_grid(grid.dims, grid.spacing);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out(mask.grid());
  for (std::size_t n = 0; n < mask.size(); ++n) out.set(n, !mask[n]);
  return out;
}

BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
  require_same_grid(a.grid(), b.grid(), "intersect");
  BinaryMask out(a.grid());
  for (std::size_t n = 0; n < a.size(); ++n) out.set(n, a[n] && b[n]);
  return out;
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  require_same_grid(inner.grid(), outer.grid(), "is_subset");
  for (std::size_t n = 0; n < inner.size(); ++n) {
    if (inner[n] && !outer[n]) return false;
  }
  return true;
}

VectorField::VectorField(const Grid& grid)
    : x(grid.voxels(), 0.0), y(grid.voxels(), 0.0), z(grid.voxels(), 0.0), grid_(grid) {}

AffineTransform::AffineTransform()
    : linear_{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}}, translation_{} {}

AffineTransform::AffineTransform(const Matrix& linear, Vec3 translation)
    : linear_(linear), translation_(translation) {
  require(std::abs(determinant()) > 1e-12, ErrorCode::InvalidParameter,
          "affine transform is not invertible");
}

AffineTransform AffineTransform::translation(Vec3 offset) {
  AffineTransform t;
  t.translation_ = offset;
  return t;
}

AffineTransform AffineTransform::rotation_z(double radians, Vec3 center) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  Matrix m{{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}};
  // p' = R (p - center) + center
  Vec3 rc{m[0][0] * center.x + m[0][1] * center.y, m[1][0] * center.x + m[1][1] * center.y,
          center.z};
  return AffineTransform(m, center - rc);
}

Vec3 AffineTransform::apply(Vec3 p) const {
  return {linear_[0][0] * p.x + linear_[0][1] * p.y + linear_[0][2] * p.z + translation_.x,
          linear_[1][0] * p.x + linear_[1][1] * p.y + linear_[1][2] * p.z + translation_.y,
          linear_[2][0] * p.x + linear_[2][1] * p.y + linear_[2][2] * p.z + translation_.z};
}

double AffineTransform::determinant() const {
  const auto& m = linear_;
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

AffineTransform AffineTransform::inverse() const {
  const double det = determinant();
  require(std::abs(det) > 1e-12, ErrorCode::InvalidParameter,
          "affine transform is not invertible");
  if (is_identity()) return *this;
  const auto& m = linear_;
  Matrix inv;
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  const Vec3 t = translation_;
  Vec3 it{-(inv[0][0] * t.x + inv[0][1] * t.y + inv[0][2] * t.z),
          -(inv[1][0] * t.x + inv[1][1] * t.y + inv[1][2] * t.z),
          -(inv[2][0] * t.x + inv[2][1] * t.y + inv[2][2] * t.z)};
  return AffineTransform(inv, it);
}

bool AffineTransform::is_identity() const {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (linear_[r][c] != (r == c ? 1.0 : 0.0)) return false;
    }
  }
  return translation_ == Vec3{};
}

}  // namespace fvfseg
