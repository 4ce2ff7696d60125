// sepfront/binary_io.hpp

// Copyright 2026  The Sepfront Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Little-endian primitives for the SEPF/SEPX binary containers.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sepfront {
namespace detail {

inline void write_u8(std::ostream &out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

inline void write_u32(std::ostream &out, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline void write_f32(std::ostream &out, double v) {
  float f = static_cast<float>(v);
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  write_u32(out, u);
}

inline std::uint8_t read_u8(std::istream &in) {
  int c = in.get();
  if (c == EOF) throw std::runtime_error("unexpected end of file");
  return static_cast<std::uint8_t>(c);
}

inline std::uint32_t read_u32(std::istream &in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char *>(b), 4);
  if (!in) throw std::runtime_error("unexpected end of file");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

inline double read_f32(std::istream &in) {
  std::uint32_t u = read_u32(in);
  float f;
  std::memcpy(&f, &u, 4);
  return static_cast<double>(f);
}

/// Row-major f32 dump of an Eigen matrix (or column vector).
inline void write_matrix_f32(std::ostream &out, const Eigen::MatrixXd &m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f32(out, m(r, c));
  }
}

inline void read_matrix_f32(std::istream &in, Eigen::Ref<Eigen::MatrixXd> m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f32(in);
  }
}

inline void write_magic(std::ostream &out, const char magic[4]) {
  out.write(magic, 4);
}

inline void expect_magic(std::istream &in, const char magic[4],
                         const std::string &what) {
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0) {
    throw std::runtime_error("bad magic bytes: not a " + what + " file");
  }
}

}  // namespace detail
}  // namespace sepfront
