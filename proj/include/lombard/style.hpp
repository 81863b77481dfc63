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

#ifndef LOMBARD_STYLE_HPP_
#define LOMBARD_STYLE_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lombard/ini.hpp"
#include "lombard/pca.hpp"

namespace lombard {

// One preset axis triple. loudness/clarity are coefficients in units of a
// component's sigma; speed scales the syllable rate (below 1 = slower).
struct LombardPreset {
  std::string name;
  double loudness = 0.0;
  double clarity = 0.0;
  double speed = 1.0;
};

struct AxisBindingEntry {
  std::string model_ref;
  std::size_t component_index = 0;
  double weight = 1.0;
};

// Maps a preset axis onto concrete PCA components: the axis coefficient is
// multiplied by each entry's weight to form a shift directive.
struct AxisBinding {
  std::string axis;  // "loudness" or "clarity"
  std::vector<AxisBindingEntry> entries;
};

struct StyleControlConfig {
  std::vector<LombardPreset> presets;
  std::vector<AxisBinding> bindings;

  const LombardPreset* find_preset(const std::string& name) const;
};

using ModelRegistry = std::map<std::string, PcaModel>;

// (component_index, coefficient); the applied delta is coefficient * sigma_k.
using Shift = std::pair<std::size_t, double>;

// inverse_project(project(e) + delta), delta_k = coefficient_k * sigma_k.
// Rejects out-of-range or repeated component indices.
std::vector<double> shift_embedding(const std::vector<float>& values, const PcaModel& model,
                                    const std::vector<Shift>& shifts);
std::vector<double> shift_embedding(const std::vector<double>& values, const PcaModel& model,
                                    const std::vector<Shift>& shifts);

struct PresetResult {
  std::vector<double> values;
  double speed = 1.0;
};

// Resolves each bound axis into shift directives (coefficient = axis value
// times entry weight) and applies them sequentially in binding order,
// grouped per model. Axes with a zero coefficient are skipped outright, so
// the "normal" preset is an exact identity.
PresetResult apply_preset(const StyleEmbedding& e, const LombardPreset& preset,
                          const std::vector<AxisBinding>& bindings, const ModelRegistry& models);

// sqrt(sum_k (coefficient_k * sigma_k)^2): the embedding-space distance the
// shift moves any input by.
double displacement_norm(const PcaModel& model, const std::vector<Shift>& shifts);

// The four shipped presets (soft, normal, loud, very_loud) and the default
// bindings: loudness moves components 0 and 1 of the "loudness" model with
// weight 1.0 each, clarity moves component 1 of the "clarity" model.
StyleControlConfig default_style_config();

// Parses `[preset.<name>]` / `[binding.<axis>]` sections. Throws on unknown
// sections or keys, duplicate names, non-numeric values, speed outside
// (0, 4], or mismatched components/weights lists.
StyleControlConfig parse_style_config(const IniFile& file);
StyleControlConfig load_style_config(const std::string& path);

}  // namespace lombard

#endif  // LOMBARD_STYLE_HPP_
