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

#ifndef LOMBARD_EVAL_HPP_
#define LOMBARD_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lombard/wav.hpp"

namespace lombard {

// Target condition for noise mixing. When clean is true the mixer is a
// passthrough and target_snr_db is ignored; otherwise target_snr_db must be
// finite.
struct SnrSpec {
  bool clean = false;
  double target_snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Output of mix_at_snr. For a clean spec, audio is a bitwise copy of the
// input, gain is 0, achieved_snr_db is +infinity, and clipped is 0. Otherwise
// achieved_snr_db is measured pre-clipping and clipped counts samples clamped
// to [-1, 1].
struct MixResult {
  WavAudio audio;
  double gain = 0.0;
  double achieved_snr_db = 0.0;
  std::size_t clipped = 0;
};

// Adds a seeded random offset loop/crop of noise to clean, scaled so the
// mixed pair hits the target SNR. Power is the mean squared amplitude over
// the whole signal (clean) and over the selected segment (noise). Throws
// std::invalid_argument on empty or silent inputs and sample-rate mismatch,
// and std::runtime_error when the selected noise segment is silent.
MixResult mix_at_snr(const WavAudio& clean, const WavAudio& noise,
                     const SnrSpec& spec);

// Lowercases ASCII letters, deletes punctuation characters outright (so
// "don't" becomes "dont"), and splits on whitespace. Bytes outside ASCII are
// kept verbatim.
std::vector<std::string> normalize_tokens(const std::string& text);

// Minimal edit alignment between a reference and a hypothesis.
struct WerResult {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_words = 0;
  double wer = 0.0;
};

// Unit-cost dynamic programming alignment. Ties are broken preferring a
// substitution over an insert plus delete pair. Throws std::invalid_argument
// on an empty reference.
WerResult word_error_rate(const std::vector<std::string>& reference,
                          const std::vector<std::string>& hypothesis);

// Noise-robustness ratio wer_noisy / wer_clean. Returns std::nullopt when
// wer_clean is zero (the ratio is undefined, not infinite). Throws
// std::invalid_argument on negative or non-finite inputs.
std::optional<double> relative_wer(double wer_noisy, double wer_clean);

// Cosine similarity and its percentage form.
struct SimilarityResult {
  double cosine = 0.0;
  double percentage = 0.0;
};

// <a, b> / (|a| |b|). Throws std::invalid_argument on dimension mismatch or
// a zero vector.
SimilarityResult cosine_similarity(const std::vector<double>& a,
                                   const std::vector<double>& b);

// Speaker-consistency score for a manipulated style: the cosine similarity
// between the manipulated-speech embedding and the normal-speech embedding.
SimilarityResult relative_ssim(const std::vector<double>& manipulated,
                               const std::vector<double>& normal);

// One scored utterance under one (level, noise) condition. The wer field is
// unit-agnostic (fraction or percent) as long as records are consistent;
// ssim and delta_ssim are percentages and may be absent when no embeddings
// were extracted.
struct EvalRecord {
  std::string utterance;
  std::string level;
  std::string noise;
  double wer = 0.0;
  std::optional<double> ssim;
  std::optional<double> delta_ssim;
};

// Grid of conditions to aggregate over. Every record must name a level and
// noise listed here. Cells for the clean_label noise act as the denominator
// for delta_wer within their level.
struct ReportLayout {
  std::vector<std::string> levels;
  std::vector<std::string> noises;
  std::string clean_label = "clean";
};

// Aggregated metrics for one (level, noise) cell. Absent optionals mark
// unavailable values: no records, no embedding scores, or no usable clean
// counterpart for delta_wer.
struct ConditionCell {
  std::string level;
  std::string noise;
  std::size_t count = 0;
  std::optional<double> mean_wer;
  std::optional<double> delta_wer;
  std::optional<double> mean_ssim;
  std::optional<double> mean_delta_ssim;
};

// Full condition grid in level-major order.
struct EvalReport {
  ReportLayout layout;
  std::vector<ConditionCell> cells;

  const ConditionCell& cell(const std::string& level,
                            const std::string& noise) const;
};

// Macro-averages records per cell and derives delta_wer from the per-level
// mean WERs against the level's clean cell. Missing counterparts leave the
// cell flagged unavailable rather than fabricated. Throws
// std::invalid_argument on invalid layouts or records outside the grid.
EvalReport build_report(const std::vector<EvalRecord>& records,
                        const ReportLayout& layout);

// CSV with header level,noise,wer,delta_wer,ssim,delta_ssim,n and one row
// per cell; unavailable values are empty fields.
std::string report_csv(const EvalReport& report);

// Human-readable aligned table with the same cells; unavailable values are
// printed as "-".
std::string report_table(const EvalReport& report);

}  // namespace lombard

#endif  // LOMBARD_EVAL_HPP_
