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

#include "lombard/style.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace lombard {

namespace {

void validate_shifts(const PcaModel& model, const std::vector<Shift>& shifts) {
  std::set<std::size_t> seen;
  for (const auto& [index, coefficient] : shifts) {
    if (index >= model.component_count()) {
      throw std::invalid_argument("component index " + std::to_string(index) +
                                  " out of range (model has " +
                                  std::to_string(model.component_count()) + " components)");
    }
    if (!std::isfinite(coefficient)) {
      throw std::invalid_argument("shift coefficient for component " + std::to_string(index) +
                                  " is not finite");
    }
    if (!seen.insert(index).second) {
      throw std::invalid_argument("component index " + std::to_string(index) +
                                  " appears twice in one shift list");
    }
  }
}

template <typename Scalar>
std::vector<double> shift_impl(const std::vector<Scalar>& values, const PcaModel& model,
                               const std::vector<Shift>& shifts) {
  validate_shifts(model, shifts);
  std::vector<double> score = project(model, values);
  for (const auto& [index, coefficient] : shifts) {
    score[index] += coefficient * model.sigma[index];
  }
  return inverse_project(model, score);
}

}  // namespace

const LombardPreset* StyleControlConfig::find_preset(const std::string& name) const {
  for (const auto& p : presets) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<double> shift_embedding(const std::vector<float>& values, const PcaModel& model,
                                    const std::vector<Shift>& shifts) {
  return shift_impl(values, model, shifts);
}

std::vector<double> shift_embedding(const std::vector<double>& values, const PcaModel& model,
                                    const std::vector<Shift>& shifts) {
  return shift_impl(values, model, shifts);
}

PresetResult apply_preset(const StyleEmbedding& e, const LombardPreset& preset,
                          const std::vector<AxisBinding>& bindings, const ModelRegistry& models) {
  const auto axis_value = [&](const std::string& axis) {
    return axis == "loudness" ? preset.loudness : preset.clarity;
  };
  for (const std::string axis : {"loudness", "clarity"}) {
    if (axis_value(axis) == 0.0) continue;
    bool bound = false;
    for (const auto& b : bindings) bound = bound || b.axis == axis;
    if (!bound) {
      throw std::invalid_argument("preset '" + preset.name + "' sets " + axis +
                                  " but no " + axis + " binding is configured");
    }
  }

  PresetResult result;
  result.speed = preset.speed;
  result.values.assign(e.values.begin(), e.values.end());
  for (const AxisBinding& binding : bindings) {
    const double value = axis_value(binding.axis);
    if (value == 0.0) continue;
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<Shift>> groups;
    for (const AxisBindingEntry& entry : binding.entries) {
      if (!groups.count(entry.model_ref)) group_order.push_back(entry.model_ref);
      groups[entry.model_ref].emplace_back(entry.component_index, value * entry.weight);
    }
    for (const std::string& ref : group_order) {
      const auto it = models.find(ref);
      if (it == models.end()) {
        throw std::invalid_argument("binding for axis '" + binding.axis +
                                    "' references unknown model '" + ref + "'");
      }
      result.values = shift_embedding(result.values, it->second, groups[ref]);
    }
  }
  return result;
}

double displacement_norm(const PcaModel& model, const std::vector<Shift>& shifts) {
  validate_shifts(model, shifts);
  double sumsq = 0.0;
  for (const auto& [index, coefficient] : shifts) {
    const double delta = coefficient * model.sigma[index];
    sumsq += delta * delta;
  }
  return std::sqrt(sumsq);
}

StyleControlConfig default_style_config() {
  StyleControlConfig config;
  config.presets = {
      {"soft", -0.5, -0.5, 1.0},
      {"normal", 0.0, 0.0, 1.0},
      {"loud", 0.5, 0.5, 0.9},
      {"very_loud", 1.0, 1.0, 0.9},
  };
  config.bindings = {
      {"loudness", {{"loudness", 0, 1.0}, {"loudness", 1, 1.0}}},
      {"clarity", {{"clarity", 1, 1.0}}},
  };
  return config;
}

StyleControlConfig parse_style_config(const IniFile& file) {
  StyleControlConfig config;
  std::set<std::string> preset_names;
  std::set<std::string> bound_axes;
  for (const IniSection& section : file.sections) {
    if (section.name.rfind("preset.", 0) == 0) {
      LombardPreset preset;
      preset.name = section.name.substr(7);
      if (preset.name.empty()) throw std::invalid_argument("preset section without a name");
      if (!preset_names.insert(preset.name).second) {
        throw std::invalid_argument("duplicate preset '" + preset.name + "'");
      }
      for (const auto& [key, value] : section.entries) {
        if (key != "loudness" && key != "clarity" && key != "speed") {
          throw std::invalid_argument("unknown key '" + key + "' in [" + section.name + "]");
        }
      }
      for (const char* key : {"loudness", "clarity", "speed"}) {
        if (!section.find(key)) {
          throw std::invalid_argument("[" + section.name + "] is missing '" + key + "'");
        }
      }
      preset.loudness = section.get_double("loudness", 0.0);
      preset.clarity = section.get_double("clarity", 0.0);
      preset.speed = section.get_double("speed", 1.0);
      if (!std::isfinite(preset.loudness) || !std::isfinite(preset.clarity)) {
        throw std::invalid_argument("[" + section.name + "] has a non-finite coefficient");
      }
      if (!(preset.speed > 0.0) || preset.speed > 4.0) {
        throw std::invalid_argument("[" + section.name + "] speed must be in (0, 4]");
      }
      config.presets.push_back(std::move(preset));
    } else if (section.name.rfind("binding.", 0) == 0) {
      AxisBinding binding;
      binding.axis = section.name.substr(8);
      if (binding.axis != "loudness" && binding.axis != "clarity") {
        throw std::invalid_argument("unknown binding axis '" + binding.axis +
                                    "' (expected loudness or clarity)");
      }
      if (!bound_axes.insert(binding.axis).second) {
        throw std::invalid_argument("duplicate binding for axis '" + binding.axis + "'");
      }
      for (const auto& [key, value] : section.entries) {
        if (key != "model" && key != "components" && key != "weights") {
          throw std::invalid_argument("unknown key '" + key + "' in [" + section.name + "]");
        }
      }
      const std::string* model = section.find("model");
      const std::string* components = section.find("components");
      const std::string* weights = section.find("weights");
      if (!model || !components || !weights) {
        throw std::invalid_argument("[" + section.name +
                                    "] needs 'model', 'components', and 'weights'");
      }
      const std::vector<double> indices =
          split_double_list(*components, "[" + section.name + "] components");
      const std::vector<double> weight_values =
          split_double_list(*weights, "[" + section.name + "] weights");
      if (indices.empty() || indices.size() != weight_values.size()) {
        throw std::invalid_argument("[" + section.name +
                                    "] components and weights must be non-empty lists of "
                                    "matching length");
      }
      for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0.0 || indices[i] != std::floor(indices[i])) {
          throw std::invalid_argument("[" + section.name +
                                      "] component indices must be non-negative integers");
        }
        if (!std::isfinite(weight_values[i])) {
          throw std::invalid_argument("[" + section.name + "] weights must be finite");
        }
        binding.entries.push_back(
            {*model, static_cast<std::size_t>(indices[i]), weight_values[i]});
      }
      config.bindings.push_back(std::move(binding));
    } else {
      throw std::invalid_argument("unknown section [" + section.name +
                                  "] (expected preset.* or binding.*)");
    }
  }
  if (config.presets.empty()) throw std::invalid_argument("preset file defines no presets");
  return config;
}

StyleControlConfig load_style_config(const std::string& path) {
  return parse_style_config(load_ini(path));
}

}  // namespace lombard
