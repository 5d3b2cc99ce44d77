#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "fvfseg/volume.hpp"

namespace fvfseg {

// MVOL container: a short text header followed by a raw little-endian
// payload in x-fastest order.
//
//   MVOL1
//   dims <nx> <ny> <nz>
//   spacing <sx> <sy> <sz>
//   dtype scalar32|mask8
//   encoding raw-le
//   <blank line>
//   <payload>
//
// scalar32 voxels are IEEE-754 binary32; mask8 voxels are one byte, 0 or 1.
// Values are narrowed to binary32 on write, so read(write(v)) == v holds
// bit-exact whenever v's values are representable as float.

enum class Dtype { Scalar32, Mask8 };

struct MvolHeader {
  Grid grid;
  Dtype dtype = Dtype::Scalar32;
};

using AnyVolume = std::variant<ScalarVolume, BinaryMask>;

AnyVolume read_volume(const std::filesystem::path& path);
ScalarVolume read_scalar(const std::filesystem::path& path);
BinaryMask read_mask(const std::filesystem::path& path);

/// Parse an in-memory MVOL image (header + payload).
AnyVolume decode_volume(const std::string& bytes);
std::string encode_volume(const ScalarVolume& vol);
std::string encode_volume(const BinaryMask& mask);

/// Writes through a sibling temporary file renamed into place, so a failed
/// write never leaves a partial file under `path`.
void write_volume(const ScalarVolume& vol, const std::filesystem::path& path);
void write_volume(const BinaryMask& mask, const std::filesystem::path& path);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace fvfseg
