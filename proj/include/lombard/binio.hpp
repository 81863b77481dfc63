// Copyright (c) 2026 lombardctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOMBARD_BINIO_HPP_
#define LOMBARD_BINIO_HPP_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace lombard {

// Little-endian primitive I/O shared by the SEMB, PCAM, TTTS, and WAV codecs.
// Readers throw std::runtime_error naming what was being read when the stream
// ends early, so format loaders get "truncated payload" diagnostics for free.

inline void write_u16le(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(bytes, 2);
}

inline void write_u32le(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

inline void write_u64le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline void write_f32le(std::ostream& out, float v) {
  write_u32le(out, std::bit_cast<std::uint32_t>(v));
}

inline void write_f64le(std::ostream& out, double v) {
  write_u64le(out, std::bit_cast<std::uint64_t>(v));
}

inline void read_exact(std::istream& in, char* buf, std::size_t n, const std::string& what) {
  in.read(buf, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error("truncated payload: reading " + what);
  }
}

inline std::uint16_t read_u16le(std::istream& in, const std::string& what) {
  char bytes[2];
  read_exact(in, bytes, 2, what);
  return static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[0]) |
                                    (static_cast<unsigned char>(bytes[1]) << 8));
}

inline std::uint32_t read_u32le(std::istream& in, const std::string& what) {
  char bytes[4];
  read_exact(in, bytes, 4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[i]);
  return v;
}

inline std::uint64_t read_u64le(std::istream& in, const std::string& what) {
  char bytes[8];
  read_exact(in, bytes, 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[i]);
  return v;
}

inline float read_f32le(std::istream& in, const std::string& what) {
  return std::bit_cast<float>(read_u32le(in, what));
}

inline double read_f64le(std::istream& in, const std::string& what) {
  return std::bit_cast<double>(read_u64le(in, what));
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& format) {
  char got[4];
  read_exact(in, got, 4, format + " magic");
  for (int i = 0; i < 4; ++i) {
    if (got[i] != magic[i]) {
      throw std::runtime_error("bad magic: not a " + format + " file");
    }
  }
}

}  // namespace lombard

#endif  // LOMBARD_BINIO_HPP_
