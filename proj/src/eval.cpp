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

#include "lombard/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lombard/rng.hpp"

namespace lombard {

namespace {

constexpr std::uint64_t kMixTag = 0x6d6978;

double mean_square(const std::vector<double>& samples) {
  double sum = 0.0;
  for (double v : samples) sum += v * v;
  return sum / static_cast<double>(samples.size());
}

void require_finite_samples(const WavAudio& audio, const char* name) {
  for (double v : audio.samples) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string("non-finite sample in ") + name +
                                  " signal");
    }
  }
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void check_label(const std::string& label, const char* what) {
  if (label.empty()) {
    throw std::invalid_argument(std::string("empty ") + what +
                                " in report layout");
  }
  if (label.find_first_of(",\r\n") != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " contains a comma or " +
                                "newline: " + label);
  }
}

void validate_layout(const ReportLayout& layout) {
  if (layout.levels.empty()) {
    throw std::invalid_argument("report layout has no levels");
  }
  if (layout.noises.empty()) {
    throw std::invalid_argument("report layout has no noise conditions");
  }
  check_label(layout.clean_label, "clean label");
  for (std::size_t i = 0; i < layout.levels.size(); ++i) {
    check_label(layout.levels[i], "level");
    for (std::size_t j = i + 1; j < layout.levels.size(); ++j) {
      if (layout.levels[i] == layout.levels[j]) {
        throw std::invalid_argument("duplicate level in report layout: " +
                                    layout.levels[i]);
      }
    }
  }
  for (std::size_t i = 0; i < layout.noises.size(); ++i) {
    check_label(layout.noises[i], "noise condition");
    for (std::size_t j = i + 1; j < layout.noises.size(); ++j) {
      if (layout.noises[i] == layout.noises[j]) {
        throw std::invalid_argument(
            "duplicate noise condition in report layout: " +
            layout.noises[i]);
      }
    }
  }
}

struct CellAccum {
  std::size_t count = 0;
  double wer_sum = 0.0;
  std::size_t ssim_count = 0;
  double ssim_sum = 0.0;
  std::size_t delta_ssim_count = 0;
  double delta_ssim_sum = 0.0;
};

}  // namespace

MixResult mix_at_snr(const WavAudio& clean, const WavAudio& noise,
                     const SnrSpec& spec) {
  if (clean.samples.empty()) {
    throw std::invalid_argument("clean signal is empty");
  }
  require_finite_samples(clean, "clean");

  if (spec.clean) {
    MixResult result;
    result.audio = clean;
    result.gain = 0.0;
    result.achieved_snr_db = std::numeric_limits<double>::infinity();
    result.clipped = 0;
    return result;
  }

  if (!std::isfinite(spec.target_snr_db)) {
    throw std::invalid_argument("target SNR must be finite");
  }
  if (noise.samples.empty()) {
    throw std::invalid_argument("noise signal is empty");
  }
  if (noise.sample_rate != clean.sample_rate) {
    throw std::invalid_argument("sample-rate mismatch between clean and noise");
  }
  require_finite_samples(noise, "noise");

  const double p_clean = mean_square(clean.samples);
  if (p_clean == 0.0) {
    throw std::invalid_argument("clean signal is silent");
  }
  if (mean_square(noise.samples) == 0.0) {
    throw std::invalid_argument("noise signal is silent");
  }

  Rng rng(mix_seed(spec.seed, kMixTag));
  const std::size_t noise_len = noise.samples.size();
  const auto offset = static_cast<std::size_t>(rng.below(noise_len));

  std::vector<double> segment(clean.samples.size());
  for (std::size_t i = 0; i < segment.size(); ++i) {
    segment[i] = noise.samples[(offset + i) % noise_len];
  }
  const double p_segment = mean_square(segment);
  if (p_segment == 0.0) {
    throw std::runtime_error("selected noise segment is silent");
  }

  const double gain = std::sqrt(
      p_clean / (p_segment * std::pow(10.0, spec.target_snr_db / 10.0)));

  MixResult result;
  result.gain = gain;
  result.achieved_snr_db = 10.0 * std::log10(p_clean / (gain * gain * p_segment));
  result.audio.sample_rate = clean.sample_rate;
  result.audio.samples.resize(clean.samples.size());
  result.clipped = 0;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) {
    double v = clean.samples[i] + gain * segment[i];
    if (v > 1.0) {
      v = 1.0;
      ++result.clipped;
    } else if (v < -1.0) {
      v = -1.0;
      ++result.clipped;
    }
    result.audio.samples[i] = v;
  }
  return result;
}

std::vector<std::string> normalize_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      if (!current.empty()) {
        tokens.push_back(current);
        current.clear();
      }
    } else if (uc >= 0x80) {
      current.push_back(ch);
    } else if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

WerResult word_error_rate(const std::vector<std::string>& reference,
                          const std::vector<std::string>& hypothesis) {
  if (reference.empty()) throw std::invalid_argument("empty reference");
  const std::size_t r = reference.size();
  const std::size_t h = hypothesis.size();

  std::vector<std::size_t> dp((r + 1) * (h + 1), 0);
  const auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return dp[i * (h + 1) + j];
  };
  for (std::size_t j = 0; j <= h; ++j) at(0, j) = j;
  for (std::size_t i = 0; i <= r; ++i) at(i, 0) = i;
  for (std::size_t i = 1; i <= r; ++i) {
    for (std::size_t j = 1; j <= h; ++j) {
      if (reference[i - 1] == hypothesis[j - 1]) {
        at(i, j) = at(i - 1, j - 1);
      } else {
        at(i, j) = 1 + std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
      }
    }
  }

  WerResult result;
  result.reference_words = r;
  std::size_t i = r;
  std::size_t j = h;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] &&
        at(i, j) == at(i - 1, j - 1)) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
      ++result.substitutions;
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++result.deletions;
      --i;
    } else {
      ++result.insertions;
      --j;
    }
  }
  result.wer = static_cast<double>(result.substitutions + result.deletions +
                                   result.insertions) /
               static_cast<double>(r);
  return result;
}

std::optional<double> relative_wer(double wer_noisy, double wer_clean) {
  if (!std::isfinite(wer_noisy) || !std::isfinite(wer_clean) ||
      wer_noisy < 0.0 || wer_clean < 0.0) {
    throw std::invalid_argument("WER values must be non-negative and finite");
  }
  if (wer_clean == 0.0) return std::nullopt;
  return wer_noisy / wer_clean;
}

SimilarityResult cosine_similarity(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(
        "dimension mismatch: " + std::to_string(a.size()) + " vs " +
        std::to_string(b.size()));
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw std::invalid_argument("non-finite value in embedding");
    }
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw std::invalid_argument("zero vector has no direction");
  }
  SimilarityResult result;
  result.cosine = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  result.percentage = 100.0 * result.cosine;
  return result;
}

SimilarityResult relative_ssim(const std::vector<double>& manipulated,
                               const std::vector<double>& normal) {
  return cosine_similarity(manipulated, normal);
}

const ConditionCell& EvalReport::cell(const std::string& level,
                                      const std::string& noise) const {
  for (const ConditionCell& c : cells) {
    if (c.level == level && c.noise == noise) return c;
  }
  throw std::invalid_argument("unknown report cell: " + level + "/" + noise);
}

EvalReport build_report(const std::vector<EvalRecord>& records,
                        const ReportLayout& layout) {
  validate_layout(layout);

  std::unordered_map<std::string, std::size_t> level_index;
  for (std::size_t i = 0; i < layout.levels.size(); ++i) {
    level_index[layout.levels[i]] = i;
  }
  std::unordered_map<std::string, std::size_t> noise_index;
  for (std::size_t j = 0; j < layout.noises.size(); ++j) {
    noise_index[layout.noises[j]] = j;
  }

  const std::size_t n_noises = layout.noises.size();
  std::vector<CellAccum> accum(layout.levels.size() * n_noises);
  for (const EvalRecord& rec : records) {
    const auto li = level_index.find(rec.level);
    if (li == level_index.end()) {
      throw std::invalid_argument("record level not in report layout: " +
                                  rec.level);
    }
    const auto ni = noise_index.find(rec.noise);
    if (ni == noise_index.end()) {
      throw std::invalid_argument(
          "record noise condition not in report layout: " + rec.noise);
    }
    if (!std::isfinite(rec.wer) || rec.wer < 0.0) {
      throw std::invalid_argument("record WER must be non-negative and finite");
    }
    CellAccum& cell = accum[li->second * n_noises + ni->second];
    cell.count += 1;
    cell.wer_sum += rec.wer;
    if (rec.ssim.has_value()) {
      if (!std::isfinite(*rec.ssim)) {
        throw std::invalid_argument("record SSIM must be finite");
      }
      cell.ssim_count += 1;
      cell.ssim_sum += *rec.ssim;
    }
    if (rec.delta_ssim.has_value()) {
      if (!std::isfinite(*rec.delta_ssim)) {
        throw std::invalid_argument("record delta SSIM must be finite");
      }
      cell.delta_ssim_count += 1;
      cell.delta_ssim_sum += *rec.delta_ssim;
    }
  }

  EvalReport report;
  report.layout = layout;
  report.cells.resize(accum.size());
  for (std::size_t i = 0; i < layout.levels.size(); ++i) {
    for (std::size_t j = 0; j < n_noises; ++j) {
      const CellAccum& a = accum[i * n_noises + j];
      ConditionCell& cell = report.cells[i * n_noises + j];
      cell.level = layout.levels[i];
      cell.noise = layout.noises[j];
      cell.count = a.count;
      if (a.count > 0) {
        cell.mean_wer = a.wer_sum / static_cast<double>(a.count);
      }
      if (a.ssim_count > 0) {
        cell.mean_ssim = a.ssim_sum / static_cast<double>(a.ssim_count);
      }
      if (a.delta_ssim_count > 0) {
        cell.mean_delta_ssim =
            a.delta_ssim_sum / static_cast<double>(a.delta_ssim_count);
      }
    }
  }

  const auto clean_it = noise_index.find(layout.clean_label);
  if (clean_it != noise_index.end()) {
    for (std::size_t i = 0; i < layout.levels.size(); ++i) {
      const ConditionCell& clean_cell =
          report.cells[i * n_noises + clean_it->second];
      if (!clean_cell.mean_wer.has_value()) continue;
      for (std::size_t j = 0; j < n_noises; ++j) {
        ConditionCell& cell = report.cells[i * n_noises + j];
        if (!cell.mean_wer.has_value()) continue;
        cell.delta_wer = relative_wer(*cell.mean_wer, *clean_cell.mean_wer);
      }
    }
  }
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "level,noise,wer,delta_wer,ssim,delta_ssim,n\n";
  for (const ConditionCell& cell : report.cells) {
    out += cell.level;
    out += ',';
    out += cell.noise;
    out += ',';
    if (cell.mean_wer) out += format_metric(*cell.mean_wer);
    out += ',';
    if (cell.delta_wer) out += format_metric(*cell.delta_wer);
    out += ',';
    if (cell.mean_ssim) out += format_metric(*cell.mean_ssim);
    out += ',';
    if (cell.mean_delta_ssim) out += format_metric(*cell.mean_delta_ssim);
    out += ',';
    out += std::to_string(cell.count);
    out += '\n';
  }
  return out;
}

std::string report_table(const EvalReport& report) {
  const std::vector<std::string> headers = {"level",      "noise", "wer",
                                            "delta_wer",  "ssim",  "delta_ssim",
                                            "n"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(report.cells.size());
  for (const ConditionCell& cell : report.cells) {
    std::vector<std::string> row(7);
    row[0] = cell.level;
    row[1] = cell.noise;
    row[2] = cell.mean_wer ? format_fixed(*cell.mean_wer) : "-";
    row[3] = cell.delta_wer ? format_fixed(*cell.delta_wer) : "-";
    row[4] = cell.mean_ssim ? format_fixed(*cell.mean_ssim) : "-";
    row[5] = cell.mean_delta_ssim ? format_fixed(*cell.mean_delta_ssim) : "-";
    row[6] = std::to_string(cell.count);
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    widths[c] = headers[c].size();
    for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
  }

  const auto emit_row = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      if (c < 2) {
        line += row[c];
        line += std::string(widths[c] - row[c].size(), ' ');
      } else {
        line += std::string(widths[c] - row[c].size(), ' ');
        line += row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    line += '\n';
    return line;
  };

  std::string out = emit_row(headers);
  for (const auto& row : rows) out += emit_row(row);
  return out;
}

}  // namespace lombard
