#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. They are written for obviousness, not speed, and share no code with
// the library algorithms they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fvfseg/brainmap.hpp"
#include "fvfseg/morphology.hpp"
#include "fvfseg/ngmm.hpp"
#include "fvfseg/volume.hpp"

namespace oracle {

using fvfseg::BinaryMask;
using fvfseg::Dims;
using fvfseg::Grid;

inline BinaryMask random_mask(const Grid& g, std::mt19937_64& rng, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(g);
  for (std::size_t n = 0; n < m.size(); ++n) m.set(n, on(rng));
  return m;
}

inline bool in_grid(const Grid& g, int i, int j, int k) {
  return i >= 0 && j >= 0 && k >= 0 && i < g.dims.nx && j < g.dims.ny && k < g.dims.nz;
}

// One pass with the (2r+1)^3 cube. Outside the grid is background.
inline BinaryMask erode_once(const BinaryMask& m, int r) {
  const Grid& g = m.grid();
  BinaryMask out(g);
  for (int k = 0; k < g.dims.nz; ++k)
    for (int j = 0; j < g.dims.ny; ++j)
      for (int i = 0; i < g.dims.nx; ++i) {
        bool all = true;
        for (int dk = -r; dk <= r && all; ++dk)
          for (int dj = -r; dj <= r && all; ++dj)
            for (int di = -r; di <= r && all; ++di) {
              const int a = i + di, b = j + dj, c = k + dk;
              if (!in_grid(g, a, b, c) || !m.at(a, b, c)) all = false;
            }
        out.set(i, j, k, all);
      }
  return out;
}

inline BinaryMask dilate_once(const BinaryMask& m, int r) {
  const Grid& g = m.grid();
  BinaryMask out(g);
  for (int k = 0; k < g.dims.nz; ++k)
    for (int j = 0; j < g.dims.ny; ++j)
      for (int i = 0; i < g.dims.nx; ++i) {
        bool any = false;
        for (int dk = -r; dk <= r && !any; ++dk)
          for (int dj = -r; dj <= r && !any; ++dj)
            for (int di = -r; di <= r && !any; ++di) {
              const int a = i + di, b = j + dj, c = k + dk;
              if (in_grid(g, a, b, c) && m.at(a, b, c)) any = true;
            }
        out.set(i, j, k, any);
      }
  return out;
}

inline BinaryMask erode(BinaryMask m, int r, int iters) {
  for (int t = 0; t < iters; ++t) m = erode_once(m, r);
  return m;
}

inline BinaryMask dilate(BinaryMask m, int r, int iters) {
  for (int t = 0; t < iters; ++t) m = dilate_once(m, r);
  return m;
}

inline BinaryMask complement(const BinaryMask& m) {
  BinaryMask out(m.grid());
  for (std::size_t n = 0; n < m.size(); ++n) out.set(n, !m[n]);
  return out;
}

// Dilation where out-of-grid voxels count as foreground. Complementing a
// mask whose outside is background gives one whose outside is foreground,
// so this is the dilation that matches erosion under duality.
inline BinaryMask dilate_outside_set(const BinaryMask& m, int r) {
  const Grid& g = m.grid();
  BinaryMask out(g);
  for (int k = 0; k < g.dims.nz; ++k)
    for (int j = 0; j < g.dims.ny; ++j)
      for (int i = 0; i < g.dims.nx; ++i) {
        bool any = false;
        for (int dk = -r; dk <= r && !any; ++dk)
          for (int dj = -r; dj <= r && !any; ++dj)
            for (int di = -r; di <= r && !any; ++di) {
              const int a = i + di, b = j + dj, c = k + dk;
              if (!in_grid(g, a, b, c) || m.at(a, b, c)) any = true;
            }
        out.set(i, j, k, any);
      }
  return out;
}

// Component labels by naive repeated flood fill from each unvisited voxel in
// linear order, using an explicit stack.
inline std::vector<int> flood_labels(const BinaryMask& m, int connectivity) {
  const Grid& g = m.grid();
  std::vector<int> label(m.size(), 0);
  int next = 0;
  std::vector<std::array<int, 3>> stack;
  for (int k = 0; k < g.dims.nz; ++k)
    for (int j = 0; j < g.dims.ny; ++j)
      for (int i = 0; i < g.dims.nx; ++i) {
        const std::size_t s = g.index(i, j, k);
        if (!m[s] || label[s]) continue;
        ++next;
        label[s] = next;
        stack.push_back({i, j, k});
        while (!stack.empty()) {
          const auto [a, b, c] = stack.back();
          stack.pop_back();
          for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
              for (int di = -1; di <= 1; ++di) {
                const int manhattan = std::abs(di) + std::abs(dj) + std::abs(dk);
                if (manhattan == 0) continue;
                if (connectivity == 6 && manhattan != 1) continue;
                const int x = a + di, y = b + dj, z = c + dk;
                if (!in_grid(g, x, y, z)) continue;
                const std::size_t t = g.index(x, y, z);
                if (m[t] && !label[t]) {
                  label[t] = next;
                  stack.push_back({x, y, z});
                }
              }
        }
      }
  return label;
}

// Largest component by counting flood labels; ties keep the lowest label
// (= smallest seed index, since labels are assigned in linear order).
inline BinaryMask largest_component(const BinaryMask& m, int connectivity) {
  const std::vector<int> label = flood_labels(m, connectivity);
  const int n = *std::max_element(label.begin(), label.end());
  std::vector<std::size_t> size(static_cast<std::size_t>(n) + 1, 0);
  for (int l : label) ++size[static_cast<std::size_t>(l)];
  int best = 1;
  for (int l = 2; l <= n; ++l)
    if (size[static_cast<std::size_t>(l)] > size[static_cast<std::size_t>(best)]) best = l;
  BinaryMask out(m.grid());
  for (std::size_t v = 0; v < m.size(); ++v) out.set(v, n > 0 && label[v] == best);
  return out;
}

// Exact signed distance by all-pairs search: for each voxel, the distance to
// the nearest voxel of opposite membership, minus half a voxel, negative
// inside. Isotropic spacing h.
inline std::vector<double> brute_signed_distance(const BinaryMask& m) {
  const Grid& g = m.grid();
  const double h = g.min_spacing();
  std::vector<std::array<double, 3>> in_pts, out_pts;
  for (int k = 0; k < g.dims.nz; ++k)
    for (int j = 0; j < g.dims.ny; ++j)
      for (int i = 0; i < g.dims.nx; ++i) {
        const fvfseg::Vec3 w = g.world(i, j, k);
        (m.at(i, j, k) ? in_pts : out_pts).push_back({w.x, w.y, w.z});
      }
  std::vector<double> phi(m.size());
  for (int k = 0; k < g.dims.nz; ++k)
    for (int j = 0; j < g.dims.ny; ++j)
      for (int i = 0; i < g.dims.nx; ++i) {
        const bool inside = m.at(i, j, k);
        const auto& other = inside ? out_pts : in_pts;
        const fvfseg::Vec3 w = g.world(i, j, k);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : other) {
          const double dx = p[0] - w.x, dy = p[1] - w.y, dz = p[2] - w.z;
          best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        const double d = std::sqrt(best) - 0.5 * h;
        phi[g.index(i, j, k)] = inside ? -d : d;
      }
  return phi;
}

inline BinaryMask sphere_mask(const Grid& g, fvfseg::Vec3 c, double r) {
  BinaryMask m(g);
  for (int k = 0; k < g.dims.nz; ++k)
    for (int j = 0; j < g.dims.ny; ++j)
      for (int i = 0; i < g.dims.nx; ++i) {
        const fvfseg::Vec3 d = g.world(i, j, k) - c;
        m.set(i, j, k, d.x * d.x + d.y * d.y + d.z * d.z <= r * r);
      }
  return m;
}

// ---- formula oracles, evaluated directly from the textbook expressions ----

inline long double pdf_ld(long double x, long double mu, long double sigma) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double z = (x - mu) / sigma;
  return std::exp(-0.5L * z * z) / (sigma * std::sqrt(2.0L * pi));
}

inline long double mixture_ld(const fvfseg::TissueMixtureModel& m, long double x) {
  long double s = 0.0L;
  for (const auto& c : m.components()) s += c.weight * pdf_ld(x, c.mean, c.stddev);
  return s;
}

inline std::array<long double, 3> prior_ld(const std::array<double, 3>& xi) {
  const long double s = static_cast<long double>(xi[0]) + xi[1] + xi[2];
  if (s == 0.0L) return {1.0L / 3, 1.0L / 3, 1.0L / 3};
  return {xi[0] / s, xi[1] / s, xi[2] / s};
}

// Bayes rule in extended precision, working with log-densities relative to
// the largest term so far-tail inputs stay representable.
inline std::array<long double, 3> posterior_ld(const fvfseg::TissueMixtureModel& m,
                                               const std::array<double, 3>& prior, double x) {
  const long double pi = 3.141592653589793238462643383279502884L;
  std::array<long double, 3> lg{};
  long double top = -std::numeric_limits<long double>::infinity();
  for (std::size_t k = 0; k < 3; ++k) {
    if (prior[k] <= 0.0) {
      lg[k] = -std::numeric_limits<long double>::infinity();
      continue;
    }
    const long double s = m[k].stddev;
    const long double z = (static_cast<long double>(x) - m[k].mean) / s;
    lg[k] = std::log(static_cast<long double>(prior[k])) - 0.5L * z * z - std::log(s) -
            0.5L * std::log(2.0L * pi);
    top = std::max(top, lg[k]);
  }
  long double total = 0.0L;
  std::array<long double, 3> p{};
  for (std::size_t k = 0; k < 3; ++k) {
    p[k] = std::exp(lg[k] - top);
    total += p[k];
  }
  for (auto& v : p) v /= total;
  return p;
}

inline long double pearson_ld(const std::array<long double, 3>& a,
                              const std::array<long double, 3>& b) {
  const long double ma = (a[0] + a[1] + a[2]) / 3, mb = (b[0] + b[1] + b[2]) / 3;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  // variances with the 1/(n-1) sample normalization
  if (saa / 2 < 1e-12L || sbb / 2 < 1e-12L) return 0.0L;
  return sab / std::sqrt(saa * sbb);
}

inline long double cm_ld(long double cc) { return cc > 0 ? 1.0L - cc : -cc; }

inline double rel_err(long double got, long double want) {
  const long double scale = std::max(std::fabs(want), 1e-300L);
  return static_cast<double>(std::fabs(got - want) / scale);
}

}  // namespace oracle
