#include "fvfseg/metrics.hpp"

namespace fvfseg {

KeyValues OverlapReport::to_keyvalues() const {
  KeyValues kv;
  kv.set("tm", tanimoto);
  kv.set("result_voxels", result_voxels);
  kv.set("truth_voxels", truth_voxels);
  kv.set("intersection_voxels", intersection_voxels);
  kv.set("union_voxels", union_voxels());
  return kv;
}

OverlapReport tanimoto(const BinaryMask& result, const BinaryMask& truth) {
  require_same_grid(result.grid(), truth.grid(), "tanimoto");
  OverlapReport r;
  for (std::size_t n = 0; n < result.size(); ++n) {
    const bool x = result[n];
    const bool g = truth[n];
    r.result_voxels += x;
    r.truth_voxels += g;
    r.intersection_voxels += x && g;
  }
  const std::size_t uni = r.union_voxels();
  r.tanimoto = uni == 0 ? 1.0
                        : static_cast<double>(r.intersection_voxels) / static_cast<double>(uni);
  return r;
}

}  // namespace fvfseg
