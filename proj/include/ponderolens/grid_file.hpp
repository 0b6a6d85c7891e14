#pragma once
#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ponderolens {

static_assert(std::endian::native == std::endian::little,
              "grid files are written with native little-endian layout");

enum class DType : std::uint8_t { f64 = 0, c128 = 1 };

/// "PLG1" container: magic, u32 version, u8 dtype, u8 rank, u64 dims[rank],
/// f64 axis_min[rank], f64 axis_max[rank], row-major payload.
struct GridFile {
  static constexpr std::uint32_t version = 1;
  DType dtype = DType::f64;
  std::vector<std::uint64_t> dims;
  std::vector<double> axis_min, axis_max;
  std::vector<double> real;                 ///< used when dtype == f64
  std::vector<std::complex<double>> cplx;   ///< used when dtype == c128

  std::uint64_t count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
  void validate() const {
    if (dims.empty() || dims.size() > 255) throw IoError("grid file: rank must be 1..255");
    if (axis_min.size() != dims.size() || axis_max.size() != dims.size())
      throw IoError("grid file: axis extents do not match the rank");
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (dims[i] > 1 && !(axis_max[i] > axis_min[i]))
        throw IoError("grid file: axis extents must increase strictly");
    const std::uint64_t n = dtype == DType::f64 ? real.size() : cplx.size();
    if (n != count()) throw IoError("grid file: payload length does not match dims");
  }
};

namespace detail {
template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void get(std::ifstream& in, T& v, const std::string& path) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("grid file truncated: " + path);
}
}  // namespace detail

inline void write_grid_file(const std::string& path, const GridFile& g) {
  g.validate();
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw IoError("cannot open for writing: " + path);
  o.write("PLG1", 4);
  detail::put(o, GridFile::version);
  detail::put(o, static_cast<std::uint8_t>(g.dtype));
  detail::put(o, static_cast<std::uint8_t>(g.dims.size()));
  for (auto d : g.dims) detail::put(o, d);
  for (auto v : g.axis_min) detail::put(o, v);
  for (auto v : g.axis_max) detail::put(o, v);
  if (g.dtype == DType::f64)
    o.write(reinterpret_cast<const char*>(g.real.data()), std::streamsize(g.real.size() * 8));
  else
    o.write(reinterpret_cast<const char*>(g.cplx.data()), std::streamsize(g.cplx.size() * 16));
  if (!o) throw IoError("write failed: " + path);
}

inline GridFile read_grid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PLG1", 4) != 0) throw IoError("not a PLG1 grid file: " + path);
  std::uint32_t ver;
  std::uint8_t dt, rank;
  detail::get(in, ver, path);
  if (ver != GridFile::version) throw IoError("unsupported grid file version: " + path);
  detail::get(in, dt, path);
  detail::get(in, rank, path);
  if (dt > 1) throw IoError("unknown dtype code in " + path);
  GridFile g;
  g.dtype = DType(dt);
  g.dims.resize(rank);
  g.axis_min.resize(rank);
  g.axis_max.resize(rank);
  for (auto& d : g.dims) detail::get(in, d, path);
  for (auto& v : g.axis_min) detail::get(in, v, path);
  for (auto& v : g.axis_max) detail::get(in, v, path);
  const std::uint64_t n = g.count();
  if (g.dtype == DType::f64) {
    g.real.resize(n);
    in.read(reinterpret_cast<char*>(g.real.data()), std::streamsize(n * 8));
  } else {
    g.cplx.resize(n);
    in.read(reinterpret_cast<char*>(g.cplx.data()), std::streamsize(n * 16));
  }
  if (!in) throw IoError("grid file payload truncated: " + path);
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in " + path);
  g.validate();
  return g;
}

}  // namespace ponderolens
