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

#ifndef LOMBARD_DURATION_HPP_
#define LOMBARD_DURATION_HPP_

#include <cstddef>
#include <string>

namespace lombard {

struct DurationSpec {
  std::size_t syllables = 0;
  double rate_base = 4.0;  // syllables per second at speed 1.0
  double speed = 1.0;
  double seconds = 0.0;
  std::size_t frames = 0;
};

// Heuristic syllable count, frozen: per whitespace-separated word, the number
// of maximal vowel-letter runs (a, e, i, o, u, y, case-insensitive), minus
// one when the word's last letter is a trailing silent 'e' (never dropping
// to 0), and at least 1 for any word containing a letter. Tokens without
// letters count 0.
std::size_t count_syllables(const std::string& text);

// seconds = syllables / (rate_base * speed); frames = round(seconds *
// frame_rate), at least 1. Speeds below 1 lengthen the utterance.
DurationSpec target_duration(std::size_t syllables, double speed, double rate_base,
                             double frame_rate);

}  // namespace lombard

#endif  // LOMBARD_DURATION_HPP_
