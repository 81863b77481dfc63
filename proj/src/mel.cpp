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

#include "lombard/mel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lombard {

void validate_mel(const ToyMel& mel) {
  if (mel.frames == 0 || mel.channels == 0) {
    throw std::invalid_argument("mel must have at least one frame and one channel");
  }
  if (mel.values.size() != mel.frames * mel.channels) {
    throw std::invalid_argument("mel value count does not match frames x channels");
  }
  for (double v : mel.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("mel contains a non-finite value");
  }
}

void save_mel_csv(const ToyMel& mel, const std::string& path) {
  validate_mel(mel);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[64];
  for (std::size_t t = 0; t < mel.frames; ++t) {
    for (std::size_t c = 0; c < mel.channels; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", mel.at(t, c));
      if (c > 0) out << ',';
      out << buf;
    }
    out << "\n";
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

ToyMel load_mel_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open mel file: " + path);
  ToyMel mel;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                    ": non-numeric cell '" + cell + "'");
      }
    }
    if (mel.channels == 0) {
      mel.channels = row.size();
    } else if (row.size() != mel.channels) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(mel.channels) + " cells, got " +
                                  std::to_string(row.size()));
    }
    mel.values.insert(mel.values.end(), row.begin(), row.end());
    ++mel.frames;
  }
  validate_mel(mel);
  return mel;
}

}  // namespace lombard
