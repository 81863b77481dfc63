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

#ifndef LOMBARD_MEL_HPP_
#define LOMBARD_MEL_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace lombard {

// Desk-scale stand-in for a mel-spectrogram: frames x channels, row-major.
struct ToyMel {
  std::size_t frames = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  ToyMel() = default;
  ToyMel(std::size_t t, std::size_t c, double fill = 0.0)
      : frames(t), channels(c), values(t * c, fill) {}

  double& at(std::size_t t, std::size_t c) { return values[t * channels + c]; }
  double at(std::size_t t, std::size_t c) const { return values[t * channels + c]; }
  double* row(std::size_t t) { return values.data() + t * channels; }
  const double* row(std::size_t t) const { return values.data() + t * channels; }
};

// Throws std::invalid_argument on empty shape, size mismatch, or non-finite
// values.
void validate_mel(const ToyMel& mel);

// CSV with one frame per row, no header, 17 significant digits.
void save_mel_csv(const ToyMel& mel, const std::string& path);
ToyMel load_mel_csv(const std::string& path);

}  // namespace lombard

#endif  // LOMBARD_MEL_HPP_
