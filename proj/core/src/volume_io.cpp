#include "fvfseg/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fvfseg/keyvalue.hpp"

namespace fvfseg {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "MVOL1";

std::string encode_header(const Grid& g, Dtype dtype) {
  require(g.dims.nx > 0 && g.dims.ny > 0 && g.dims.nz > 0, ErrorCode::InvalidParameter,
          "refusing to write a volume with zero-voxel dims");
  std::string h;
  h += kMagic;
  h += "\ndims " + std::to_string(g.dims.nx) + " " + std::to_string(g.dims.ny) + " " +
       std::to_string(g.dims.nz);
  h += "\nspacing " + format_real(g.spacing.x) + " " + format_real(g.spacing.y) + " " +
       format_real(g.spacing.z);
  h += dtype == Dtype::Scalar32 ? "\ndtype scalar32" : "\ndtype mask8";
  h += "\nencoding raw-le\n\n";
  return h;
}

// Reads one '\n'-terminated header line starting at `pos`.
std::string next_line(const std::string& bytes, std::size_t& pos) {
  const std::size_t end = bytes.find('\n', pos);
  require(end != std::string::npos, ErrorCode::Format, "MVOL header is truncated");
  std::string line = bytes.substr(pos, end - pos);
  pos = end + 1;
  return line;
}

std::istringstream expect_key(const std::string& line, const std::string& key) {
  std::istringstream is(line);
  std::string k;
  is >> k;
  require(k == key, ErrorCode::Format, "MVOL header: expected '" + key + "', got '" + line + "'");
  return is;
}

MvolHeader parse_header(const std::string& bytes, std::size_t& pos) {
  require(next_line(bytes, pos) == kMagic, ErrorCode::Format, "bad MVOL magic");

  Dims d;
  {
    auto is = expect_key(next_line(bytes, pos), "dims");
    long long nx = 0, ny = 0, nz = 0;
    is >> nx >> ny >> nz;
    require(static_cast<bool>(is) && nx > 0 && ny > 0 && nz > 0 && nx < (1 << 20) &&
                ny < (1 << 20) && nz < (1 << 20),
            ErrorCode::Format, "MVOL header: dims must be three positive integers");
    d = Dims{static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)};
  }
  Vec3 s;
  {
    auto is = expect_key(next_line(bytes, pos), "spacing");
    is >> s.x >> s.y >> s.z;
    require(static_cast<bool>(is) && s.x > 0 && s.y > 0 && s.z > 0 && std::isfinite(s.x) &&
                std::isfinite(s.y) && std::isfinite(s.z),
            ErrorCode::Format, "MVOL header: spacing must be three positive reals");
  }
  MvolHeader h;
  h.grid = Grid(d, s);
  {
    auto is = expect_key(next_line(bytes, pos), "dtype");
    std::string tag;
    is >> tag;
    if (tag == "scalar32") {
      h.dtype = Dtype::Scalar32;
    } else if (tag == "mask8") {
      h.dtype = Dtype::Mask8;
    } else {
      fail(ErrorCode::UnsupportedDtype, "MVOL: unsupported dtype '" + tag + "'");
    }
  }
  {
    auto is = expect_key(next_line(bytes, pos), "encoding");
    std::string tag;
    is >> tag;
    require(tag == "raw-le", ErrorCode::Format, "MVOL: unsupported encoding '" + tag + "'");
  }
  require(next_line(bytes, pos).empty(), ErrorCode::Format,
          "MVOL header must end with a blank line");
  return h;
}

}  // namespace

AnyVolume decode_volume(const std::string& bytes) {
  std::size_t pos = 0;
  const MvolHeader h = parse_header(bytes, pos);
  const std::size_t n = h.grid.voxels();
  const std::size_t width = h.dtype == Dtype::Scalar32 ? 4 : 1;
  const std::size_t payload = bytes.size() - pos;
  if (payload != n * width) {
    fail(ErrorCode::Truncation, "MVOL payload is " + std::to_string(payload) +
                                    " bytes, header implies " + std::to_string(n * width));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);

  if (h.dtype == Dtype::Mask8) {
    BinaryMask mask(h.grid);
    for (std::size_t i = 0; i < n; ++i) {
      require(p[i] <= 1, ErrorCode::Format, "mask8 payload byte is not 0 or 1");
      mask.set(i, p[i] == 1);
    }
    return mask;
  }

  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[4 * i]) |
                               (static_cast<std::uint32_t>(p[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(p[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(p[4 * i + 3]) << 24);
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return ScalarVolume(h.grid, std::move(data));
}

std::string encode_volume(const ScalarVolume& vol) {
  std::string out = encode_header(vol.grid(), Dtype::Scalar32);
  out.reserve(out.size() + 4 * vol.size());
  for (double v : vol.data()) {
    const float f = static_cast<float>(v);
    require(std::isfinite(v) && std::isfinite(f), ErrorCode::InvalidParameter,
            "refusing to write a non-finite voxel value");
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    out.push_back(static_cast<char>(bits & 0xFF));
    out.push_back(static_cast<char>((bits >> 8) & 0xFF));
    out.push_back(static_cast<char>((bits >> 16) & 0xFF));
    out.push_back(static_cast<char>((bits >> 24) & 0xFF));
  }
  return out;
}

std::string encode_volume(const BinaryMask& mask) {
  std::string out = encode_header(mask.grid(), Dtype::Mask8);
  for (std::uint8_t b : mask.bytes()) out.push_back(static_cast<char>(b ? 1 : 0));
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::Io, "error reading '" + path.string() + "'");
  return bytes;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorCode::Io, "error writing '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::Io, "cannot move temporary file onto '" + path.string() + "'");
  }
}

AnyVolume read_volume(const fs::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_volume(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

ScalarVolume read_scalar(const fs::path& path) {
  AnyVolume v = read_volume(path);
  if (auto* s = std::get_if<ScalarVolume>(&v)) return std::move(*s);
  fail(ErrorCode::UnsupportedDtype, path.string() + ": expected scalar32, found mask8");
}

BinaryMask read_mask(const fs::path& path) {
  AnyVolume v = read_volume(path);
  if (auto* m = std::get_if<BinaryMask>(&v)) return std::move(*m);
  fail(ErrorCode::UnsupportedDtype, path.string() + ": expected mask8, found scalar32");
}

void write_volume(const ScalarVolume& vol, const fs::path& path) {
  write_file_atomic(path, encode_volume(vol));
}

void write_volume(const BinaryMask& mask, const fs::path& path) {
  write_file_atomic(path, encode_volume(mask));
}

}  // namespace fvfseg
