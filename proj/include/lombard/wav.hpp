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

#ifndef LOMBARD_WAV_HPP_
#define LOMBARD_WAV_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace lombard {

// Mono audio at a fixed sample rate. Samples are the 16-bit PCM values
// divided by 32768, so every on-disk sample maps to exactly one double and
// save(load(f)) reproduces the sample payload bitwise.
struct WavAudio {
  std::uint32_t sample_rate = 0;
  std::vector<double> samples;
};

// Reads a RIFF/WAVE file holding 16-bit PCM mono audio. Unknown chunks are
// skipped. Throws std::runtime_error on malformed or truncated files and on
// unsupported encodings (no resampling, no format conversion).
WavAudio load_wav(const std::string& path);

// Writes a canonical 44-byte-header WAV file. Samples are quantized with
// llround(v * 32768) and clamped to the 16-bit range. Throws
// std::invalid_argument on a zero sample rate or non-finite samples and
// std::runtime_error when the file cannot be written.
void save_wav(const WavAudio& audio, const std::string& path);

}  // namespace lombard

#endif  // LOMBARD_WAV_HPP_
