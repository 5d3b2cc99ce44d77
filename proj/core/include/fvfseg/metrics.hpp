#pragma once

#include "fvfseg/keyvalue.hpp"
#include "fvfseg/volume.hpp"

namespace fvfseg {

struct OverlapReport {
  double tanimoto = 1.0;
  std::size_t result_voxels = 0;        // |R_X|
  std::size_t truth_voxels = 0;         // |R_G|
  std::size_t intersection_voxels = 0;  // |R_X n R_G|

  std::size_t union_voxels() const {
    return result_voxels + truth_voxels - intersection_voxels;
  }
  KeyValues to_keyvalues() const;
};

/// |X n G| / |X u G| by exact counting. Two empty masks score 1.
OverlapReport tanimoto(const BinaryMask& result, const BinaryMask& truth);

}  // namespace fvfseg
