#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fvfseg/error.hpp"

namespace fvfseg {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t voxels() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  int operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct Index3 {
  int i = 0;
  int j = 0;
  int k = 0;
};

/// Geometry shared by every volume type: extent plus voxel size in mm.
/// World position of voxel (i, j, k) is (i*sx, j*sy, k*sz).
struct Grid {
  Dims dims;
  Vec3 spacing{1.0, 1.0, 1.0};

  Grid() = default;
  Grid(Dims d, Vec3 s);

  std::size_t voxels() const { return dims.voxels(); }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(dims.ny) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(dims.nx) +
           static_cast<std::size_t>(i);
  }
  Index3 coords(std::size_t idx) const;
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims.nx && j < dims.ny && k < dims.nz;
  }
  Vec3 world(int i, int j, int k) const {
    return {i * spacing.x, j * spacing.y, k * spacing.z};
  }
  double min_spacing() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws ErrorCode::Grid when the two grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* context);

class ScalarVolume {
 public:
  ScalarVolume() = default;
  explicit ScalarVolume(const Grid& grid, double fill = 0.0);
  ScalarVolume(const Grid& grid, std::vector<double> data);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::size_t idx) { return data_[idx]; }
  double operator[](std::size_t idx) const { return data_[idx]; }
  double& at(int i, int j, int k) { return data_[grid_.index(i, j, k)]; }
  double at(int i, int j, int k) const { return data_[grid_.index(i, j, k)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  friend bool operator==(const ScalarVolume&, const ScalarVolume&) = default;

 private:
  Grid grid_;
  std::vector<double> data_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(const Grid& grid, bool fill = false);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims; }
  std::size_t size() const { return data_.size(); }

  bool operator[](std::size_t idx) const { return data_[idx] != 0; }
  void set(std::size_t idx, bool value) { data_[idx] = value ? 1 : 0; }
  bool at(int i, int j, int k) const { return data_[grid_.index(i, j, k)] != 0; }
  void set(int i, int j, int k, bool value) { set(grid_.index(i, j, k), value); }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  const std::vector<std::uint8_t>& bytes() const { return data_; }
  std::vector<std::uint8_t>& bytes() { return data_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Grid grid_;
  std::vector<std::uint8_t> data_;
};

BinaryMask complement(const BinaryMask& mask);
BinaryMask intersect(const BinaryMask& a, const BinaryMask& b);
bool is_subset(const BinaryMask& inner, const BinaryMask& outer);

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return x.size(); }
  Vec3 operator[](std::size_t idx) const { return {x[idx], y[idx], z[idx]}; }

  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;

 private:
  Grid grid_;
};

/// World-space affine map p -> linear * p + translation.
class AffineTransform {
 public:
  using Matrix = std::array<std::array<double, 3>, 3>;

  AffineTransform();  // identity
  AffineTransform(const Matrix& linear, Vec3 translation);

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(Vec3 offset);
  /// Rotation by `radians` about the z axis through `center`.
  static AffineTransform rotation_z(double radians, Vec3 center);

  Vec3 apply(Vec3 p) const;
  double determinant() const;
  AffineTransform inverse() const;
  bool is_identity() const;

  const Matrix& linear() const { return linear_; }
  Vec3 offset() const { return translation_; }

 private:
  Matrix linear_;
  Vec3 translation_;
};

}  // namespace fvfseg
