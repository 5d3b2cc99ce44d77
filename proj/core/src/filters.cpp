#include "fvfseg/filters.hpp"

#include <algorithm>
#include <cmath>

namespace fvfseg {

std::vector<double> gaussian_kernel(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::InvalidParameter,
          "gaussian sigma must be > 0");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1);
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * (t * t) / (sigma * sigma));
    k[static_cast<std::size_t>(t + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

ScalarVolume gaussian_smooth(const ScalarVolume& vol, double sigma) {
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const Grid& g = vol.grid();
  const Dims& d = g.dims;

  std::vector<double> a = vol.data();
  std::vector<double> b(a.size());
  for (int axis = 0; axis < 3; ++axis) {
    const int n = d[axis];
    for (int k = 0; k < d.nz; ++k) {
      for (int j = 0; j < d.ny; ++j) {
        for (int i = 0; i < d.nx; ++i) {
          const int pos = axis == 0 ? i : (axis == 1 ? j : k);
          double acc = 0.0;
          for (int t = -radius; t <= radius; ++t) {
            const int q = std::clamp(pos + t, 0, n - 1);
            const std::size_t src = axis == 0   ? g.index(q, j, k)
                                    : axis == 1 ? g.index(i, q, k)
                                                : g.index(i, j, q);
            acc += kernel[static_cast<std::size_t>(t + radius)] * a[src];
          }
          b[g.index(i, j, k)] = acc;
        }
      }
    }
    a.swap(b);
  }
  return ScalarVolume(g, std::move(a));
}

VectorField central_gradient(const ScalarVolume& vol) {
  const Grid& g = vol.grid();
  const Dims& d = g.dims;
  require(d.nx >= 3 && d.ny >= 3 && d.nz >= 3, ErrorCode::InvalidParameter,
          "central_gradient needs every dimension >= 3");
  VectorField out(g);
  std::vector<double>* comps[3] = {&out.x, &out.y, &out.z};
  for (int k = 0; k < d.nz; ++k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        const int c[3] = {i, j, k};
        for (int axis = 0; axis < 3; ++axis) {
          const int n = d[axis];
          const double h = g.spacing[axis];
          int lo = c[axis] - 1;
          int hi = c[axis] + 1;
          double denom = 2.0 * h;
          if (lo < 0) {
            lo = c[axis];
            denom = h;
          } else if (hi >= n) {
            hi = c[axis];
            denom = h;
          }
          int a[3] = {i, j, k};
          int b[3] = {i, j, k};
          a[axis] = lo;
          b[axis] = hi;
          (*comps[axis])[g.index(i, j, k)] =
              (vol.at(b[0], b[1], b[2]) - vol.at(a[0], a[1], a[2])) / denom;
        }
      }
    }
  }
  return out;
}

ScalarVolume magnitude(const VectorField& field) {
  ScalarVolume out(field.grid());
  for (std::size_t n = 0; n < field.size(); ++n) out[n] = norm(field[n]);
  return out;
}

namespace {

// Snaps near-integer continuous indices so that identity-like maps sample
// grid points exactly instead of blending in a 1e-16 weight.
double snap(double u) {
  const double r = std::round(u);
  return std::abs(u - r) < 1e-9 ? r : u;
}

double trilinear(const std::vector<double>& data, const Grid& g, double u, double v,
                 double w) {
  const Dims& d = g.dims;
  if (u < 0.0 || v < 0.0 || w < 0.0 || u > d.nx - 1 || v > d.ny - 1 || w > d.nz - 1) {
    return 0.0;
  }
  const int i0 = std::min(static_cast<int>(std::floor(u)), d.nx - 1);
  const int j0 = std::min(static_cast<int>(std::floor(v)), d.ny - 1);
  const int k0 = std::min(static_cast<int>(std::floor(w)), d.nz - 1);
  const double fu = u - i0;
  const double fv = v - j0;
  const double fw = w - k0;
  if (fu == 0.0 && fv == 0.0 && fw == 0.0) return data[g.index(i0, j0, k0)];
  const int i1 = std::min(i0 + 1, d.nx - 1);
  const int j1 = std::min(j0 + 1, d.ny - 1);
  const int k1 = std::min(k0 + 1, d.nz - 1);
  auto at = [&](int i, int j, int k) { return data[g.index(i, j, k)]; };
  const double c00 = at(i0, j0, k0) * (1 - fu) + at(i1, j0, k0) * fu;
  const double c10 = at(i0, j1, k0) * (1 - fu) + at(i1, j1, k0) * fu;
  const double c01 = at(i0, j0, k1) * (1 - fu) + at(i1, j0, k1) * fu;
  const double c11 = at(i0, j1, k1) * (1 - fu) + at(i1, j1, k1) * fu;
  const double c0 = c00 * (1 - fv) + c10 * fv;
  const double c1 = c01 * (1 - fv) + c11 * fv;
  return c0 * (1 - fw) + c1 * fw;
}

std::vector<double> resample_values(const std::vector<double>& src, const Grid& src_grid,
                                    const AffineTransform& t, const Grid& out_grid) {
  const AffineTransform inv = t.inverse();
  std::vector<double> out(out_grid.voxels());
  const Vec3& s = src_grid.spacing;
  for (int k = 0; k < out_grid.dims.nz; ++k) {
    for (int j = 0; j < out_grid.dims.ny; ++j) {
      for (int i = 0; i < out_grid.dims.nx; ++i) {
        const Vec3 p = inv.apply(out_grid.world(i, j, k));
        out[out_grid.index(i, j, k)] =
            trilinear(src, src_grid, snap(p.x / s.x), snap(p.y / s.y), snap(p.z / s.z));
      }
    }
  }
  return out;
}

}  // namespace

ScalarVolume resample_affine(const ScalarVolume& vol, const AffineTransform& t,
                             const Dims& out_dims, const Vec3& out_spacing) {
  const Grid out_grid(out_dims, out_spacing);
  return ScalarVolume(out_grid, resample_values(vol.data(), vol.grid(), t, out_grid));
}

BinaryMask resample_mask(const BinaryMask& mask, const AffineTransform& t,
                         const Dims& out_dims, const Vec3& out_spacing) {
  const Grid out_grid(out_dims, out_spacing);
  std::vector<double> src(mask.size());
  for (std::size_t n = 0; n < mask.size(); ++n) src[n] = mask[n] ? 1.0 : 0.0;
  const std::vector<double> vals = resample_values(src, mask.grid(), t, out_grid);
  BinaryMask out(out_grid);
  for (std::size_t n = 0; n < vals.size(); ++n) out.set(n, vals[n] >= 0.5);
  return out;
}

}  // namespace fvfseg
