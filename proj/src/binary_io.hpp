#pragma once

// Little-endian primitives shared by the model and reference-bundle formats.

#include "har/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace har::detail
{
template<typename T> T to_little(T v) noexcept
{
   if constexpr(std::endian::native == std::endian::big) {
      auto* b = reinterpret_cast<unsigned char*>(&v);
      std::reverse(b, b + sizeof(T));
   }
   return v;
}

template<typename T> void write_le(std::ostream& out, T v)
{
   v = to_little(v);
   out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template<typename T> T read_le(std::istream& in)
{
   T v{};
   if(!in.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorKind::Parse, "binary file truncated");
   return to_little(v);
}

inline void write_doubles(std::ostream& out, const double* data, std::size_t n)
{
   for(std::size_t i = 0; i < n; ++i) write_le(out, data[i]);
}

inline void read_doubles(std::istream& in, double* data, std::size_t n)
{
   for(std::size_t i = 0; i < n; ++i) data[i] = read_le<double>(in);
}

// Row-major on disk regardless of Eigen's storage order.
inline void write_matrix_rowmajor(std::ostream& out, const Eigen::MatrixXd& m)
{
   for(Eigen::Index r = 0; r < m.rows(); ++r)
      for(Eigen::Index c = 0; c < m.cols(); ++c) write_le(out, m(r, c));
}

inline void read_matrix_rowmajor(std::istream& in, Eigen::MatrixXd& m)
{
   for(Eigen::Index r = 0; r < m.rows(); ++r)
      for(Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_le<double>(in);
}

inline void write_block(std::ostream& out, const std::string& magic, const std::string& header)
{
   out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
   write_le<std::uint64_t>(out, header.size());
   out.write(header.data(), static_cast<std::streamsize>(header.size()));
}

inline std::string read_block(std::istream& in, const std::string& magic)
{
   std::string got(magic.size(), '\0');
   if(!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic)
      fail(ErrorKind::Parse, "bad file magic (expected " + magic.substr(0, magic.size() - 1) + ")");
   const auto len = read_le<std::uint64_t>(in);
   if(len > (1ull << 32)) fail(ErrorKind::Parse, "header length implausible");
   std::string header(len, '\0');
   if(!in.read(header.data(), static_cast<std::streamsize>(len))) fail(ErrorKind::Parse, "header truncated");
   return header;
}

} // namespace har::detail
