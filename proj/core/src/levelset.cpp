#include "fvfseg/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fvfseg/filters.hpp"

namespace fvfseg {

namespace {

constexpr double kFar = 1e20;
// Squared-distance sentinel for the EDT; small enough that parabola
// intersections between two sentinel rows stay well conditioned.
constexpr double kFarSq = 1e12;

// 1D squared Euclidean distance transform (lower envelope of parabolas) with
// sample spacing h.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, double h,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double h2 = h * h;
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    auto meet = [&](int p) {
      return ((f[q] + h2 * q * q) - (f[p] + h2 * p * p)) / (2.0 * h2 * (q - p));
    };
    double s = meet(v[k]);
    while (s <= z[k]) {
      --k;
      s = meet(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = h2 * dq * dq + f[v[k]];
  }
}

// Squared distance (mm^2) from each voxel to the nearest voxel where
// `feature` is set; kFarSq when there is none.
std::vector<double> squared_edt(const BinaryMask& feature) {
  const Grid& g = feature.grid();
  const Dims& dm = g.dims;
  std::vector<double> dist(feature.size());
  for (std::size_t n = 0; n < dist.size(); ++n) dist[n] = feature[n] ? 0.0 : kFarSq;

  const int maxn = std::max({dm.nx, dm.ny, dm.nz});
  std::vector<double> f(static_cast<std::size_t>(maxn)), d(static_cast<std::size_t>(maxn));
  std::vector<int> v(static_cast<std::size_t>(maxn));
  std::vector<double> z(static_cast<std::size_t>(maxn) + 1);
  for (int axis = 0; axis < 3; ++axis) {
    const int n = dm[axis];
    f.resize(static_cast<std::size_t>(n));
    d.resize(static_cast<std::size_t>(n));
    const int la = axis == 0 ? dm.ny : dm.nx;
    const int lb = axis == 2 ? dm.ny : dm.nz;
    for (int b = 0; b < lb; ++b) {
      for (int a = 0; a < la; ++a) {
        auto idx = [&](int t) {
          if (axis == 0) return g.index(t, a, b);
          if (axis == 1) return g.index(a, t, b);
          return g.index(a, b, t);
        };
        for (int t = 0; t < n; ++t) f[static_cast<std::size_t>(t)] = dist[idx(t)];
        edt_1d(f, d, g.spacing[axis], v, z);
        for (int t = 0; t < n; ++t) dist[idx(t)] = std::min(d[static_cast<std::size_t>(t)], kFarSq);
      }
    }
  }
  return dist;
}

double grid_diagonal(const Grid& g) {
  return norm(Vec3{g.dims.nx * g.spacing.x, g.dims.ny * g.spacing.y, g.dims.nz * g.spacing.z});
}

// Godunov update for |grad u| = 1 from the smaller neighbour on each axis.
double eikonal_update(std::array<double, 3> a, std::array<double, 3> h) {
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int l, int r) { return a[l] < a[r]; });
  double A = 0.0, B = 0.0, C = -1.0;
  double u = kFar;
  for (int m = 0; m < 3; ++m) {
    const int ax = order[m];
    if (a[ax] >= kFar) break;
    if (m > 0 && u <= a[ax]) break;
    const double w = 1.0 / (h[ax] * h[ax]);
    A += w;
    B += a[ax] * w;
    C += a[ax] * a[ax] * w;
    const double disc = B * B - A * C;
    u = (B + std::sqrt(std::max(disc, 0.0))) / A;
  }
  return u;
}

}  // namespace

ScalarVolume signed_distance(const BinaryMask& mask) {
  const Grid& g = mask.grid();
  const std::vector<double> to_outside = squared_edt(complement(mask));
  const std::vector<double> to_inside = squared_edt(mask);
  const double half = 0.5 * g.min_spacing();
  const double cap = grid_diagonal(g);
  ScalarVolume phi(g);
  for (std::size_t n = 0; n < mask.size(); ++n) {
    const double d2 = mask[n] ? to_outside[n] : to_inside[n];
    const double d = d2 >= 0.5 * kFarSq ? cap : std::sqrt(d2);
    phi[n] = mask[n] ? -(d - half) : d - half;
  }
  return phi;
}

LevelSetField signed_distance_init(const BinaryMask& region, double band_halfwidth) {
  require(!region.empty(), ErrorCode::InvalidParameter,
          "signed_distance_init: region mask is empty");
  require(band_halfwidth > 0.0, ErrorCode::InvalidParameter, "band half-width must be > 0");
  return {signed_distance(region), 0, band_halfwidth};
}

BinaryMask zero_level_mask(const ScalarVolume& phi) {
  BinaryMask out(phi.grid());
  for (std::size_t n = 0; n < phi.size(); ++n) out.set(n, phi[n] < 0.0);
  return out;
}

BinaryMask zero_level_mask(const LevelSetField& ls) { return zero_level_mask(ls.phi); }

LevelSetField reinitialize(const LevelSetField& ls) {
  const ScalarVolume& phi = ls.phi;
  require(phi.all_finite(), ErrorCode::NumericalInstability,
          "reinitialize: phi contains non-finite values");
  const Grid& g = phi.grid();
  const Dims& dm = g.dims;
  const std::array<double, 3> h{g.spacing.x, g.spacing.y, g.spacing.z};

  std::vector<double> dist(phi.size(), kFar);
  std::vector<std::uint8_t> fixed(phi.size(), 0);
  auto negative = [&](std::size_t n) { return phi[n] < 0.0; };

  for (int k = 0; k < dm.nz; ++k) {
    for (int j = 0; j < dm.ny; ++j) {
      for (int i = 0; i < dm.nx; ++i) {
        const std::size_t n = g.index(i, j, k);
        const int c[3] = {i, j, k};
        // Interface voxels keep their value, clipped to the nearest axial
        // crossing of the linear interpolant. Dividing by a local gradient
        // estimate moved the front by O(h^2 K) on every call.
        double cap = kFar;
        for (int ax = 0; ax < 3; ++ax) {
          for (int step : {-1, 1}) {
            const int t = c[ax] + step;
            if (t < 0 || t >= dm[ax]) continue;
            int o[3] = {i, j, k};
            o[ax] = t;
            const std::size_t m = g.index(o[0], o[1], o[2]);
            if (negative(m) == negative(n)) continue;
            cap = std::min(cap, phi[n] / (phi[n] - phi[m]) * h[ax]);
          }
        }
        if (cap >= kFar) continue;
        dist[n] = std::min(std::abs(phi[n]), cap);
        fixed[n] = 1;
      }
    }
  }

  // Fast sweeping over the eight axis orderings, twice.
  for (int round = 0; round < 2; ++round) {
    for (int dir = 0; dir < 8; ++dir) {
      const int si = (dir & 1) ? -1 : 1;
      const int sj = (dir & 2) ? -1 : 1;
      const int sk = (dir & 4) ? -1 : 1;
      for (int kk = 0; kk < dm.nz; ++kk) {
        const int k = sk > 0 ? kk : dm.nz - 1 - kk;
        for (int jj = 0; jj < dm.ny; ++jj) {
          const int j = sj > 0 ? jj : dm.ny - 1 - jj;
          for (int ii = 0; ii < dm.nx; ++ii) {
            const int i = si > 0 ? ii : dm.nx - 1 - ii;
            const std::size_t n = g.index(i, j, k);
            if (fixed[n]) continue;
            std::array<double, 3> a{kFar, kFar, kFar};
            if (i > 0) a[0] = std::min(a[0], dist[n - 1]);
            if (i < dm.nx - 1) a[0] = std::min(a[0], dist[n + 1]);
            const std::size_t sy = static_cast<std::size_t>(dm.nx);
            if (j > 0) a[1] = std::min(a[1], dist[n - sy]);
            if (j < dm.ny - 1) a[1] = std::min(a[1], dist[n + sy]);
            const std::size_t sz = sy * static_cast<std::size_t>(dm.ny);
            if (k > 0) a[2] = std::min(a[2], dist[n - sz]);
            if (k < dm.nz - 1) a[2] = std::min(a[2], dist[n + sz]);
            const double u = eikonal_update(a, h);
            if (u < dist[n]) dist[n] = u;
          }
        }
      }
    }
  }

  const double cap = grid_diagonal(g);
  LevelSetField out{ScalarVolume(g), ls.iteration, ls.band_halfwidth};
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const double d = std::min(dist[n], cap);
    out.phi[n] = negative(n) ? -d : d;
  }
  return out;
}

EdgeMap edge_map(const ScalarVolume& image, double sigma) {
  const ScalarVolume smoothed = gaussian_smooth(image, sigma);
  ScalarVolume f = magnitude(central_gradient(smoothed));
  const double mx = *std::max_element(f.data().begin(), f.data().end());
  if (mx > 0.0) {
    for (double& v : f.data()) v /= mx;
  }
  VectorField grad = central_gradient(f);
  return {std::move(f), std::move(grad)};
}

void ForceContext::validate() const {
  require_same_grid(edge.grid(), edge_gradient.grid(), "force context edge gradient");
  require_same_grid(edge.grid(), candidate.grid(), "force context candidate");
  require(std::isfinite(center.x) && std::isfinite(center.y) && std::isfinite(center.z),
          ErrorCode::InvalidParameter, "force context center must be finite");
  require(edge_weight >= 0.0 && std::isfinite(edge_weight), ErrorCode::InvalidParameter,
          "edge weight must be >= 0");
}

ForceContext make_force_context(const ScalarVolume& image, const CandidateRegion& region,
                                double edge_sigma, double edge_weight) {
  require_same_grid(image.grid(), region.mask.grid(), "make_force_context");
  EdgeMap em = edge_map(image, edge_sigma);
  ForceContext ctx{std::move(em.f), std::move(em.gradient), region.centroid, region.mask,
                   edge_weight};
  ctx.validate();
  return ctx;
}

double directional_cosine(Vec3 a, Vec3 b) {
  const double na = std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z);
  const double nb = std::sqrt(b.x * b.x + b.y * b.y + b.z * b.z);
  require(na > 1e-12 && nb > 1e-12, ErrorCode::InvalidParameter,
          "directional_cosine: zero-length direction");
  return std::clamp((a.x * b.x + a.y * b.y + a.z * b.z) / (na * nb), -1.0, 1.0);
}

namespace {

ForceSample force_at(const ForceContext& ctx, std::size_t n, Vec3 b, Vec3 normal) {
  ForceSample out;
  out.delta = ctx.candidate[n] ? 1.0 : -1.0;
  const Vec3 ab = b - ctx.center;
  const double len = norm(ab);
  if (len < 1e-12) return out;
  if (norm(normal) > 1e-12) out.cos_gamma = directional_cosine(normal, ab);
  const Vec3 gamma = (1.0 / len) * ab;
  const Vec3 s{ctx.edge_weight * ctx.edge_gradient.x[n] + out.delta * gamma.x,
               ctx.edge_weight * ctx.edge_gradient.y[n] + out.delta * gamma.y,
               ctx.edge_weight * ctx.edge_gradient.z[n] + out.delta * gamma.z};
  const double sn = norm(s);
  if (sn < 1e-12) return out;
  out.force = (1.0 / sn) * s;
  return out;
}

}  // namespace

ForceSample external_force(const ForceContext& ctx, Vec3 point, Vec3 normal) {
  const Grid& g = ctx.edge.grid();
  const double u = point.x / g.spacing.x;
  const double v = point.y / g.spacing.y;
  const double w = point.z / g.spacing.z;
  const int i = static_cast<int>(std::lround(u));
  const int j = static_cast<int>(std::lround(v));
  const int k = static_cast<int>(std::lround(w));
  require(std::isfinite(u) && std::isfinite(v) && std::isfinite(w) && g.contains(i, j, k),
          ErrorCode::Range, "external_force: point lies outside the grid");
  return force_at(ctx, g.index(i, j, k), point, normal);
}

VectorField external_force_field(const ForceContext& ctx) {
  ctx.validate();
  const Grid& g = ctx.edge.grid();
  VectorField out(g);
  for (int k = 0; k < g.dims.nz; ++k) {
    for (int j = 0; j < g.dims.ny; ++j) {
      for (int i = 0; i < g.dims.nx; ++i) {
        const std::size_t n = g.index(i, j, k);
        const Vec3 f = force_at(ctx, n, g.world(i, j, k), Vec3{}).force;
        out.x[n] = f.x;
        out.y[n] = f.y;
        out.z[n] = f.z;
      }
    }
  }
  return out;
}

void EvolutionParams::validate() const {
  require(std::isfinite(dt), ErrorCode::InvalidParameter, "dt must be finite");
  require(alpha >= 0.0 && beta >= 0.0, ErrorCode::InvalidParameter,
          "alpha and beta must be >= 0");
  require(max_iters >= 1, ErrorCode::InvalidParameter, "max_iters must be >= 1");
  require(reinit_every >= 1, ErrorCode::InvalidParameter, "reinit_every must be >= 1");
  require(stop_tol >= 0.0, ErrorCode::InvalidParameter, "stop_tol must be >= 0");
}

double stability_bound(double alpha, double beta, double h) {
  const double denom = 6.0 * alpha / (h * h) + 3.0 * beta / h;
  return denom > 0.0 ? 0.9 / denom : std::numeric_limits<double>::infinity();
}

EvolutionResult evolve(const LevelSetField& ls, const ForceContext& ctx,
                       const EvolutionParams& params, const IterationObserver& observer) {
  params.validate();
  ctx.validate();
  require_same_grid(ls.phi.grid(), ctx.edge.grid(), "evolve");
  require(ls.phi.all_finite(), ErrorCode::NumericalInstability, "evolve: phi is not finite");

  const Grid& g = ls.phi.grid();
  const Dims& dm = g.dims;
  const double hmin = g.min_spacing();
  const double hx = g.spacing.x, hy = g.spacing.y, hz = g.spacing.z;
  const double max_curvature = 1.0 / hmin;
  double dt = params.dt;
  if (dt <= 0.0) dt = stability_bound(params.alpha, params.beta, hmin);
  require(std::isfinite(dt), ErrorCode::InvalidParameter,
          "dt must be given when alpha and beta are both zero");

  const VectorField force = external_force_field(ctx);
  const double band = ls.band_halfwidth * hmin;
  const std::size_t sy = static_cast<std::size_t>(dm.nx);
  const std::size_t sz = sy * static_cast<std::size_t>(dm.ny);

  EvolutionResult result;
  result.dt = dt;
  LevelSetField cur = ls;
  std::vector<double> next(cur.phi.size());

  auto inside_count = [](const ScalarVolume& phi) {
    std::size_t c = 0;
    for (double v : phi.data()) c += v < 0.0;
    return c;
  };
  std::size_t checkpoint = inside_count(cur.phi);

  for (int step = 1; step <= params.max_iters; ++step) {
    const std::vector<double>& p = cur.phi.data();
    double max_update = 0.0;
    IterationStats stats;
    double cos_sum = 0.0;
    stats.cos_min = 1.0;
    stats.cos_max = -1.0;

    for (int k = 0; k < dm.nz; ++k) {
      const std::size_t km = k > 0 ? sz : 0, kp = k < dm.nz - 1 ? sz : 0;
      for (int j = 0; j < dm.ny; ++j) {
        const std::size_t jm = j > 0 ? sy : 0, jp = j < dm.ny - 1 ? sy : 0;
        for (int i = 0; i < dm.nx; ++i) {
          const std::size_t n = g.index(i, j, k);
          const double c = p[n];
          if (std::abs(c) > band) {
            next[n] = c;
            continue;
          }
          const std::size_t im = i > 0 ? 1 : 0, ip = i < dm.nx - 1 ? 1 : 0;
          const double xm = p[n - im], xp = p[n + ip];
          const double ym = p[n - jm], yp = p[n + jp];
          const double zm = p[n - km], zp = p[n + kp];

          // Central first and second differences (replicated at faces).
          const double px = (xp - xm) / (2.0 * hx);
          const double py = (yp - ym) / (2.0 * hy);
          const double pz = (zp - zm) / (2.0 * hz);
          const double pxx = (xp - 2.0 * c + xm) / (hx * hx);
          const double pyy = (yp - 2.0 * c + ym) / (hy * hy);
          const double pzz = (zp - 2.0 * c + zm) / (hz * hz);
          const double pxy =
              (p[n + ip + jp] - p[n + ip - jm] - p[n - im + jp] + p[n - im - jm]) / (4.0 * hx * hy);
          const double pxz =
              (p[n + ip + kp] - p[n + ip - km] - p[n - im + kp] + p[n - im - km]) / (4.0 * hx * hz);
          const double pyz =
              (p[n + jp + kp] - p[n + jp - km] - p[n - jm + kp] + p[n - jm - km]) / (4.0 * hy * hz);

          const double g2 = px * px + py * py + pz * pz;
          double curvature_term = 0.0;
          if (g2 > 1e-12) {
            const double gn = std::sqrt(g2);
            const double num = pxx * (py * py + pz * pz) + pyy * (px * px + pz * pz) +
                               pzz * (px * px + py * py) - 2.0 * px * py * pxy -
                               2.0 * px * pz * pxz - 2.0 * py * pz * pyz;
            // Mean curvature: half the divergence of the unit normal.
            const double K = std::clamp(num / (2.0 * g2 * gn), -max_curvature, max_curvature);
            curvature_term = K * gn;

            if (std::abs(c) <= 0.5 * hmin) {
              const Vec3 ab = g.world(i, j, k) - ctx.center;
              if (norm(ab) > 1e-12) {
                const double cg = directional_cosine(Vec3{px, py, pz}, ab);
                cos_sum += cg;
                stats.cos_min = std::min(stats.cos_min, cg);
                stats.cos_max = std::max(stats.cos_max, cg);
                ++stats.interface_voxels;
              }
            }
          }

          // Upwind advection along the external force.
          const double ex = force.x[n], ey = force.y[n], ez = force.z[n];
          const double dxm = im ? (c - xm) / hx : (xp - c) / hx;
          const double dxp = ip ? (xp - c) / hx : (c - xm) / hx;
          const double dym = jm ? (c - ym) / hy : (yp - c) / hy;
          const double dyp = jp ? (yp - c) / hy : (c - ym) / hy;
          const double dzm = km ? (c - zm) / hz : (zp - c) / hz;
          const double dzp = kp ? (zp - c) / hz : (c - zm) / hz;
          const double advection = ex * (ex > 0.0 ? dxm : dxp) + ey * (ey > 0.0 ? dym : dyp) +
                                   ez * (ez > 0.0 ? dzm : dzp);

          const double update =
              dt * (params.alpha * curvature_term - params.beta * advection);
          next[n] = c + update;
          const double mag = std::abs(update);
          if (!(mag <= max_update)) max_update = mag;  // NaN propagates
        }
      }
    }

    if (!std::isfinite(max_update)) {
      throw InstabilityError(cur.iteration + 1,
                             "level set became non-finite at iteration " +
                                 std::to_string(cur.iteration + 1));
    }
    // A step that honors the CFL bound moves phi by well under a voxel.
    if (max_update > hmin) {
      throw InstabilityError(cur.iteration + 1,
                             "level set update of " + std::to_string(max_update) +
                                 " exceeds one voxel at iteration " +
                                 std::to_string(cur.iteration + 1) + "; reduce dt");
    }

    cur.phi.data().swap(next);
    ++cur.iteration;

    stats.iteration = cur.iteration;
    stats.max_update = max_update;
    if (stats.interface_voxels > 0) {
      stats.cos_mean = cos_sum / static_cast<double>(stats.interface_voxels);
    } else {
      stats.cos_min = stats.cos_max = 0.0;
    }

    bool stop = false;
    if (step % params.reinit_every == 0) {
      cur = reinitialize(cur);
      stats.reinitialized = true;
      const std::size_t now = inside_count(cur.phi);
      const double change =
          std::abs(static_cast<double>(now) - static_cast<double>(checkpoint)) /
          static_cast<double>(std::max<std::size_t>(checkpoint, 1));
      if (change < params.stop_tol) stop = true;
      checkpoint = now;
    }
    stats.inside_voxels = inside_count(cur.phi);
    if (observer) observer(stats);
    if (stop) {
      result.converged = true;
      break;
    }
  }
  result.field = std::move(cur);
  return result;
}

}  // namespace fvfseg
