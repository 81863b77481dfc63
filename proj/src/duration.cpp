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

#include "lombard/duration.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace lombard {

namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_vowel(char c) {
  const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return l == 'a' || l == 'e' || l == 'i' || l == 'o' || l == 'u' || l == 'y';
}

std::size_t count_word(const std::string& word) {
  std::size_t groups = 0;
  bool in_group = false;
  bool has_letter = false;
  char last_letter = '\0';
  for (char c : word) {
    if (is_letter(c)) {
      has_letter = true;
      last_letter = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (is_vowel(c)) {
        if (!in_group) ++groups;
        in_group = true;
      } else {
        in_group = false;
      }
    } else {
      in_group = false;
    }
  }
  if (!has_letter) return 0;
  if (last_letter == 'e' && groups > 1) --groups;
  return groups > 0 ? groups : 1;
}

}  // namespace

std::size_t count_syllables(const std::string& text) {
  std::size_t total = 0;
  std::string word;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      total += count_word(word);
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  total += count_word(word);
  return total;
}

DurationSpec target_duration(std::size_t syllables, double speed, double rate_base,
                             double frame_rate) {
  if (syllables == 0) throw std::invalid_argument("syllable count must be at least 1");
  if (!(speed > 0.0)) throw std::invalid_argument("speed must be positive");
  if (!(rate_base > 0.0)) throw std::invalid_argument("rate must be positive");
  if (!(frame_rate > 0.0)) throw std::invalid_argument("frame rate must be positive");

  DurationSpec spec;
  spec.syllables = syllables;
  spec.rate_base = rate_base;
  spec.speed = speed;
  spec.seconds = static_cast<double>(syllables) / (rate_base * speed);
  const long long frames = std::llround(spec.seconds * frame_rate);
  spec.frames = frames < 1 ? 1 : static_cast<std::size_t>(frames);
  return spec;
}

}  // namespace lombard
