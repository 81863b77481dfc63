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

#include "lombard/wav.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lombard/binio.hpp"

namespace lombard {

namespace {

constexpr std::uint16_t kPcmFormat = 1;
constexpr double kPcmScale = 32768.0;

void skip_bytes(std::istream& in, std::uint32_t n, const std::string& what) {
  in.ignore(static_cast<std::streamsize>(n));
  if (static_cast<std::uint32_t>(in.gcount()) != n) {
    throw std::runtime_error("truncated payload: reading " + what);
  }
}

}  // namespace

WavAudio load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open WAV file: " + path);

  expect_magic(in, "RIFF", "WAV");
  read_u32le(in, "WAV riff size");
  expect_magic(in, "WAVE", "WAV");

  bool have_fmt = false;
  bool have_data = false;
  std::uint32_t sample_rate = 0;
  std::string payload;

  while (in.peek() != std::char_traits<char>::eof()) {
    char id[4];
    read_exact(in, id, 4, "WAV chunk id");
    const std::string chunk(id, 4);
    const std::uint32_t size = read_u32le(in, "WAV chunk size");

    if (chunk == "fmt ") {
      if (have_fmt) throw std::runtime_error("duplicate fmt chunk in WAV file");
      if (size < 16) throw std::runtime_error("fmt chunk too short in WAV file");
      const std::uint16_t format = read_u16le(in, "WAV format tag");
      const std::uint16_t channels = read_u16le(in, "WAV channel count");
      sample_rate = read_u32le(in, "WAV sample rate");
      read_u32le(in, "WAV byte rate");
      read_u16le(in, "WAV block align");
      const std::uint16_t bits = read_u16le(in, "WAV bit depth");
      if (format != kPcmFormat) {
        throw std::runtime_error("unsupported WAV encoding: expected PCM");
      }
      if (channels != 1) {
        throw std::runtime_error("unsupported WAV layout: expected mono");
      }
      if (bits != 16) {
        throw std::runtime_error("unsupported WAV depth: expected 16-bit samples");
      }
      if (sample_rate == 0) {
        throw std::runtime_error("zero sample rate in WAV file");
      }
      skip_bytes(in, size - 16 + (size % 2), "WAV fmt chunk");
      have_fmt = true;
    } else if (chunk == "data") {
      if (have_data) throw std::runtime_error("duplicate data chunk in WAV file");
      if (size % 2 != 0) throw std::runtime_error("odd data chunk size in WAV file");
      payload.resize(size);
      if (size > 0) read_exact(in, payload.data(), size, "WAV samples");
      have_data = true;
    } else {
      skip_bytes(in, size + (size % 2), "WAV chunk body");
    }
  }

  if (!have_fmt) throw std::runtime_error("missing fmt chunk in WAV file");
  if (!have_data) throw std::runtime_error("missing data chunk in WAV file");

  WavAudio audio;
  audio.sample_rate = sample_rate;
  audio.samples.resize(payload.size() / 2);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const auto lo = static_cast<unsigned char>(payload[2 * i]);
    const auto hi = static_cast<unsigned char>(payload[2 * i + 1]);
    const auto raw = static_cast<std::uint16_t>(lo | (hi << 8));
    audio.samples[i] = static_cast<std::int16_t>(raw) / kPcmScale;
  }
  return audio;
}

void save_wav(const WavAudio& audio, const std::string& path) {
  if (audio.sample_rate == 0) {
    throw std::invalid_argument("sample rate must be positive");
  }
  for (double v : audio.samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite sample");
  }
  const std::uint64_t data_bytes = 2 * static_cast<std::uint64_t>(audio.samples.size());
  if (data_bytes + 36 > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("too many samples for a WAV file");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  out.write("RIFF", 4);
  write_u32le(out, static_cast<std::uint32_t>(36 + data_bytes));
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32le(out, 16);
  write_u16le(out, kPcmFormat);
  write_u16le(out, 1);
  write_u32le(out, audio.sample_rate);
  write_u32le(out, audio.sample_rate * 2);
  write_u16le(out, 2);
  write_u16le(out, 16);
  out.write("data", 4);
  write_u32le(out, static_cast<std::uint32_t>(data_bytes));
  for (double v : audio.samples) {
    long long q = std::llround(v * kPcmScale);
    if (q < -32768) q = -32768;
    if (q > 32767) q = 32767;
    write_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }

  if (!out) throw std::runtime_error("failed writing WAV file: " + path);
}

}  // namespace lombard
