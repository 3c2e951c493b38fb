#pragma once

// Flat binary arrays: "DGSA" magic, u32 rank, u32 dims[rank], then
// little-endian float32 values in row-major order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "dgssa/error.hpp"

namespace dgssa::io {

struct Array {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

namespace detail {

inline std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_u32_le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

}  // namespace detail

inline Array parse_array(std::span<const unsigned char> bytes, const std::string& origin = "<memory>") {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "DGSA", 4) != 0) {
    throw Error(Errc::Format, origin + ": missing DGSA header");
  }
  const std::uint32_t rank = detail::load_u32_le(bytes.data() + 4);
  if (rank == 0 || rank > 8) throw Error(Errc::Format, origin + ": unsupported rank " + std::to_string(rank));
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(rank);
  if (bytes.size() < header) throw Error(Errc::Format, origin + ": truncated header");
  Array a;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    a.dims.push_back(detail::load_u32_le(bytes.data() + 8 + 4 * i));
    count *= a.dims.back();
  }
  if (bytes.size() != header + 4 * count) {
    throw Error(Errc::Format, origin + ": expected " + std::to_string(count) + " float32 values");
  }
  a.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t raw = detail::load_u32_le(bytes.data() + header + 4 * i);
    a.values[i] = static_cast<double>(std::bit_cast<float>(raw));
  }
  return a;
}

inline std::vector<unsigned char> encode_array(const Array& a) {
  std::vector<unsigned char> out{'D', 'G', 'S', 'A'};
  detail::store_u32_le(out, static_cast<std::uint32_t>(a.dims.size()));
  for (auto d : a.dims) detail::store_u32_le(out, d);
  for (double v : a.values) detail::store_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, path.string() + ": cannot create");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, path.string() + ": write failed");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

inline Array read_array(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return parse_array(bytes, path.string());
}

inline void write_array(const std::filesystem::path& path, const Array& a) { write_bytes(path, encode_array(a)); }

}  // namespace dgssa::io
