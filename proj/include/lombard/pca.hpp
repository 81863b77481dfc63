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

#ifndef LOMBARD_PCA_HPP_
#define LOMBARD_PCA_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lombard/embedding.hpp"

namespace lombard {

// PCA basis fitted on an embedding corpus. Component rows are orthonormal,
// ordered by decreasing variance, and carry a deterministic sign (the
// largest-magnitude entry of each row is positive, ties broken by lowest
// index). sigma holds the standard deviation of training scores per
// component (n-1 normalization).
struct PcaModel {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;
  std::vector<double> sigma;
  std::vector<double> explained_variance_ratio;

  std::size_t dimension() const { return mean.size(); }
  std::size_t component_count() const { return components.size(); }
};

struct ComponentCorrelation {
  std::size_t component_index = 0;
  double pearson_r = 0.0;
  std::size_t sample_count = 0;
  // False when the component's scores have no variance across the pairs;
  // pearson_r is meaningless then and must not be read as 0.
  bool defined = true;
};

// Fits via singular value decomposition of the centered data matrix
// (one-sided Jacobi). k = nullopt keeps the maximum min(N-1, D) components.
// Deterministic: the same corpus yields a bitwise-identical model.
PcaModel fit_pca(const EmbeddingCorpus& corpus, std::optional<std::size_t> k = std::nullopt);

// score = components * (e - mean).
std::vector<double> project(const PcaModel& model, const std::vector<float>& values);
std::vector<double> project(const PcaModel& model, const std::vector<double>& values);

// mean + components^T * score.
std::vector<double> inverse_project(const PcaModel& model, const std::vector<double>& score);

// Pearson r between per-component scores and the paired attribute values.
// Needs at least 3 pairs and a non-constant attribute.
std::vector<ComponentCorrelation> correlate_components(
    const PcaModel& model, const std::vector<std::pair<StyleEmbedding, double>>& pairs);

// Throws when rows are not orthonormal within tol, sigma increases or is
// negative, sizes disagree, or any value is non-finite.
void validate_pca_model(const PcaModel& model, double tol);

// PCAM binary: magic `PCAM`, u32 LE K, u32 LE D, mean (D f64 LE), sigma
// (K f64 LE), explained_variance_ratio (K f64 LE), components row-major
// (K x D f64 LE). Load re-validates orthonormality at 1e-6.
void save_pca(const PcaModel& model, const std::string& path);
PcaModel load_pca(const std::string& path);

}  // namespace lombard

#endif  // LOMBARD_PCA_HPP_
