#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "abow/common.hpp"
#include "abow/sha256.hpp"

namespace abow {

using json = nlohmann::json;

// On-disk container used by every persisted artifact: a JSON header followed
// by raw little-endian binary blocks in the order the header declares them.
//
//   bytes 0..7   magic "ABOWBF01"
//   bytes 8..15  header length (u64, little-endian)
//   header       UTF-8 JSON; carries "blocks" descriptors and "payload_sha256"
//   payload      concatenated block data, f32 or i32 little-endian
inline constexpr char kBlockFileMagic[8] = {'A', 'B', 'O', 'W', 'B', 'F', '0', '1'};

struct BlockData {
  std::string name;
  std::string dtype;  // "f32" | "i32"
  std::vector<std::int64_t> shape;
  std::vector<float> f32;
  std::vector<std::int32_t> i32;

  std::int64_t elements() const {
    std::int64_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }

  static BlockData floats(std::string name, std::vector<std::int64_t> shape,
                          std::vector<float> data) {
    BlockData b;
    b.name = std::move(name);
    b.dtype = "f32";
    b.shape = std::move(shape);
    b.f32 = std::move(data);
    require(b.elements() == static_cast<std::int64_t>(b.f32.size()),
            "block shape does not match data size: " + b.name);
    return b;
  }

  static BlockData ints(std::string name, std::vector<std::int64_t> shape,
                        std::vector<std::int32_t> data) {
    BlockData b;
    b.name = std::move(name);
    b.dtype = "i32";
    b.shape = std::move(shape);
    b.i32 = std::move(data);
    require(b.elements() == static_cast<std::int64_t>(b.i32.size()),
            "block shape does not match data size: " + b.name);
    return b;
  }

  static BlockData from_matrix(std::string name, const Matrix& m) {
    std::vector<float> data(m.data(), m.data() + m.size());
    return floats(std::move(name), {m.rows(), m.cols()}, std::move(data));
  }

  Matrix as_matrix() const {
    require(dtype == "f32" && shape.size() == 2, "block is not a float matrix: " + name);
    Matrix m(shape[0], shape[1]);
    std::memcpy(m.data(), f32.data(), f32.size() * sizeof(float));
    return m;
  }

  Vector as_vector() const {
    require(dtype == "f32", "block is not float data: " + name);
    Vector v(static_cast<Eigen::Index>(f32.size()));
    std::memcpy(v.data(), f32.data(), f32.size() * sizeof(float));
    return v;
  }
};

namespace detail {

inline void append_le32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::string block_bytes(const BlockData& b) {
  std::string out;
  out.reserve(static_cast<std::size_t>(b.elements()) * 4);
  if (b.dtype == "f32") {
    for (float f : b.f32) append_le32(out, std::bit_cast<std::uint32_t>(f));
  } else if (b.dtype == "i32") {
    for (std::int32_t v : b.i32) append_le32(out, std::bit_cast<std::uint32_t>(v));
  } else {
    throw ValidationError("unknown block dtype: " + b.dtype);
  }
  return out;
}

inline std::uint32_t read_le32(const char* p) {
  return std::uint32_t(std::uint8_t(p[0])) | (std::uint32_t(std::uint8_t(p[1])) << 8) |
         (std::uint32_t(std::uint8_t(p[2])) << 16) | (std::uint32_t(std::uint8_t(p[3])) << 24);
}

}  // namespace detail

struct BlockFile {
  json header;
  std::vector<BlockData> blocks;

  bool has(std::string_view name) const {
    for (const auto& b : blocks)
      if (b.name == name) return true;
    return false;
  }

  const BlockData& block(std::string_view name) const {
    for (const auto& b : blocks)
      if (b.name == name) return b;
    throw MissingArtifactError("block not found: " + std::string(name));
  }
};

/// Writes header + blocks atomically (tmp file then rename). The header is
/// augmented with block descriptors and the payload hash.
inline void write_blockfile(const std::filesystem::path& path, json header,
                            const std::vector<BlockData>& blocks) {
  json descr = json::array();
  Sha256 payload_hash;
  std::vector<std::string> encoded;
  encoded.reserve(blocks.size());
  for (const auto& b : blocks) {
    encoded.push_back(detail::block_bytes(b));
    payload_hash.update(encoded.back());
    descr.push_back({{"name", b.name}, {"dtype", b.dtype}, {"shape", b.shape}});
  }
  header["blocks"] = std::move(descr);
  header["payload_sha256"] = payload_hash.hex_digest();

  const std::string head = header.dump();
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(bool(out), "cannot open for writing: " + tmp.string());
    out.write(kBlockFileMagic, 8);
    const std::uint64_t len = head.size();
    char len_le[8];
    for (int i = 0; i < 8; ++i) len_le[i] = static_cast<char>((len >> (8 * i)) & 0xff);
    out.write(len_le, 8);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& bytes : encoded)
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(bool(out), "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Reads just the JSON header of a blockfile.
inline json read_blockfile_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("missing artifact: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kBlockFileMagic, 8) != 0)
    throw MissingArtifactError("not a blockfile: " + path.string());
  char len_le[8];
  in.read(len_le, 8);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= std::uint64_t(std::uint8_t(len_le[i])) << (8 * i);
  std::string head(len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(len));
  if (!in) throw MissingArtifactError("truncated blockfile header: " + path.string());
  return json::parse(head);
}

inline BlockFile read_blockfile(const std::filesystem::path& path, bool verify_hash = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("missing artifact: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kBlockFileMagic, 8) != 0)
    throw MissingArtifactError("not a blockfile: " + path.string());
  char len_le[8];
  in.read(len_le, 8);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= std::uint64_t(std::uint8_t(len_le[i])) << (8 * i);
  std::string head(len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(len));
  if (!in) throw MissingArtifactError("truncated blockfile header: " + path.string());

  BlockFile bf;
  bf.header = json::parse(head);
  Sha256 payload_hash;
  for (const auto& d : bf.header.at("blocks")) {
    BlockData b;
    b.name = d.at("name").get<std::string>();
    b.dtype = d.at("dtype").get<std::string>();
    b.shape = d.at("shape").get<std::vector<std::int64_t>>();
    const auto n = static_cast<std::size_t>(b.elements());
    std::string bytes(n * 4, '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw MissingArtifactError("truncated blockfile payload: " + path.string());
    payload_hash.update(bytes);
    if (b.dtype == "f32") {
      b.f32.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        b.f32[i] = std::bit_cast<float>(detail::read_le32(bytes.data() + 4 * i));
    } else if (b.dtype == "i32") {
      b.i32.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        b.i32[i] = std::bit_cast<std::int32_t>(detail::read_le32(bytes.data() + 4 * i));
    } else {
      throw MissingArtifactError("unknown block dtype in " + path.string() + ": " + b.dtype);
    }
    bf.blocks.push_back(std::move(b));
  }
  if (verify_hash) {
    const std::string expect = bf.header.value("payload_sha256", "");
    const std::string got = payload_hash.hex_digest();
    if (expect != got)
      throw MissingArtifactError("payload hash mismatch (corrupt artifact): " + path.string());
  }
  return bf;
}

}  // namespace abow
