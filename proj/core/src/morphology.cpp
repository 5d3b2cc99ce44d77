#include "fvfseg/morphology.hpp"

#include <array>
#include <cstdlib>
#include <vector>

namespace fvfseg {

namespace {

// One separable pass of a box filter along `axis`. Dilation marks a voxel if
// any voxel in the window is set; erosion requires the full window, with
// out-of-grid positions counting as unset.
void box_pass(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out,
              const Dims& d, int axis, int radius, MorphMode mode) {
  const int n = d[axis];
  const std::size_t stride =
      axis == 0 ? 1 : (axis == 1 ? static_cast<std::size_t>(d.nx)
                                 : static_cast<std::size_t>(d.nx) * d.ny);
  const int len_a = axis == 0 ? d.ny : d.nx;
  const int len_b = axis == 2 ? d.ny : d.nz;
  std::vector<int> prefix(static_cast<std::size_t>(n) + 1);

  for (int b = 0; b < len_b; ++b) {
    for (int a = 0; a < len_a; ++a) {
      std::size_t base = 0;
      if (axis == 0) base = (static_cast<std::size_t>(b) * d.ny + a) * d.nx;
      if (axis == 1) base = static_cast<std::size_t>(b) * d.ny * d.nx + a;
      if (axis == 2) base = static_cast<std::size_t>(b) * d.nx + a;

      prefix[0] = 0;
      for (int t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + in[base + t * stride];

      for (int t = 0; t < n; ++t) {
        const int lo = t - radius;
        const int hi = t + radius;
        const int clo = lo < 0 ? 0 : lo;
        const int chi = hi >= n ? n - 1 : hi;
        const int ones = prefix[chi + 1] - prefix[clo];
        bool value;
        if (mode == MorphMode::Dilate) {
          value = ones > 0;
        } else {
          value = lo >= 0 && hi < n && ones == 2 * radius + 1;
        }
        out[base + t * stride] = value ? 1 : 0;
      }
    }
  }
}

}  // namespace

BinaryMask morphology(const BinaryMask& mask, MorphMode mode, int radius, int iterations) {
  require(radius >= 1, ErrorCode::InvalidParameter, "morphology radius must be >= 1");
  require(iterations >= 1, ErrorCode::InvalidParameter, "morphology iterations must be >= 1");

  std::vector<std::uint8_t> a = mask.bytes();
  std::vector<std::uint8_t> b(a.size());
  const Dims& d = mask.dims();
  for (int it = 0; it < iterations; ++it) {
    for (int axis = 0; axis < 3; ++axis) {
      box_pass(a, b, d, axis, radius, mode);
      a.swap(b);
    }
  }
  BinaryMask out(mask.grid());
  out.bytes() = std::move(a);
  return out;
}

BinaryMask mask_boundary_strip(const BinaryMask& mask, int depth) {
  return morphology(mask, MorphMode::Erode, 1, depth);
}

Connectivity connectivity_from_int(int n) {
  if (n == 6) return Connectivity::Six;
  if (n == 26) return Connectivity::TwentySix;
  fail(ErrorCode::InvalidParameter, "connectivity must be 6 or 26");
}

ComponentLabels label_components(const BinaryMask& mask, Connectivity conn) {
  const Grid& g = mask.grid();
  std::vector<std::array<int, 3>> offsets;
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int manhattan = std::abs(di) + std::abs(dj) + std::abs(dk);
        if (manhattan == 0) continue;
        if (conn == Connectivity::Six && manhattan != 1) continue;
        offsets.push_back({di, dj, dk});
      }
    }
  }

  ComponentLabels out;
  out.labels.assign(mask.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || out.labels[seed] != 0) continue;
    const int label = static_cast<int>(out.sizes.size()) + 1;
    std::size_t size = 0;
    out.labels[seed] = label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      ++size;
      const Index3 c = g.coords(cur);
      for (const auto& o : offsets) {
        const int i = c.i + o[0];
        const int j = c.j + o[1];
        const int k = c.k + o[2];
        if (!g.contains(i, j, k)) continue;
        const std::size_t nb = g.index(i, j, k);
        if (mask[nb] && out.labels[nb] == 0) {
          out.labels[nb] = label;
          stack.push_back(nb);
        }
      }
    }
    out.sizes.push_back(size);
  }
  return out;
}

BinaryMask largest_component(const BinaryMask& mask, Connectivity conn) {
  const ComponentLabels cc = label_components(mask, conn);
  require(!cc.sizes.empty(), ErrorCode::EmptyRegion,
          "largest_component: mask has no set voxels");
  // Labels are issued in seed order, so a strict comparison keeps the
  // earliest seed on ties.
  std::size_t best = 0;
  for (std::size_t l = 1; l < cc.sizes.size(); ++l) {
    if (cc.sizes[l] > cc.sizes[best]) best = l;
  }
  const int keep = static_cast<int>(best) + 1;
  BinaryMask out(mask.grid());
  for (std::size_t n = 0; n < mask.size(); ++n) out.set(n, cc.labels[n] == keep);
  return out;
}

}  // namespace fvfseg
