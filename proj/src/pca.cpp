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

#include "lombard/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lombard/binio.hpp"

namespace lombard {

namespace {

constexpr char kPcamMagic[5] = "PCAM";

// Relative threshold below which a singular value is treated as exactly zero
// and its direction replaced by deterministic basis completion.
constexpr double kRankEps = 1e-12;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Orthogonalizes the columns in place (one-sided Jacobi / Hestenes). Columns
// are stored as rows of `cols` for contiguity. On return, column norms are
// the singular values of the original matrix and normalized columns are the
// corresponding left singular vectors.
void hestenes_orthogonalize(std::vector<std::vector<double>>& cols) {
  const std::size_t n = cols.size();
  constexpr double kConvEps = 1e-14;
  constexpr int kMaxSweeps = 100;
  double frob2 = 0.0;
  for (const auto& c : cols) frob2 += dot(c, c);
  // Columns at the roundoff floor cannot be orthogonalized relative to their
  // own norm; they are dropped by the rank threshold later, so leave them be.
  const double negligible2 = frob2 * 1e-28;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double app = dot(cols[p], cols[p]);
        if (app <= negligible2) continue;
        const double aqq = dot(cols[q], cols[q]);
        if (aqq <= negligible2) continue;
        const double apq = dot(cols[p], cols[q]);
        if (std::abs(apq) <= kConvEps * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < cols[p].size(); ++i) {
          const double vp = cols[p][i];
          const double vq = cols[q][i];
          cols[p][i] = cs * vp - sn * vq;
          cols[q][i] = sn * vp + cs * vq;
        }
      }
    }
    if (!rotated) return;
  }
  throw std::runtime_error("PCA singular value decomposition did not converge");
}

// Picks a unit vector orthogonal to the given rows, scanning the standard
// basis in index order so the result is deterministic.
std::vector<double> complete_basis(const std::vector<std::vector<double>>& rows, std::size_t d) {
  for (std::size_t axis = 0; axis < d; ++axis) {
    std::vector<double> v(d, 0.0);
    v[axis] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& r : rows) {
        const double c = dot(v, r);
        for (std::size_t i = 0; i < d; ++i) v[i] -= c * r[i];
      }
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm > 0.5) {
      for (double& x : v) x /= norm;
      return v;
    }
  }
  throw std::runtime_error("PCA basis completion failed");
}

void apply_sign_convention(std::vector<double>& row) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (std::abs(row[i]) > std::abs(row[arg])) arg = i;
  }
  if (row[arg] < 0.0) {
    for (double& x : row) x = -x;
  }
}

}  // namespace

PcaModel fit_pca(const EmbeddingCorpus& corpus, std::optional<std::size_t> k) {
  validate_corpus(corpus);
  const std::size_t n = corpus.size();
  const std::size_t d = corpus.dimension;
  if (n < 2) throw std::invalid_argument("PCA needs at least 2 embeddings, got " + std::to_string(n));
  const std::size_t k_max = std::min(n - 1, d);
  const std::size_t k_eff = k.value_or(k_max);
  if (k_eff < 1 || k_eff > k_max) {
    throw std::invalid_argument("k out of range: " + std::to_string(k_eff) +
                                " (valid range 1.." + std::to_string(k_max) + ")");
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const StyleEmbedding& e : corpus.embeddings) {
    for (std::size_t i = 0; i < d; ++i) model.mean[i] += e.values[i];
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  // Columns of the transposed centered data matrix: one centered point each.
  std::vector<std::vector<double>> cols(n, std::vector<double>(d));
  double total_sumsq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      const double c = static_cast<double>(corpus.embeddings[j].values[i]) - model.mean[i];
      cols[j][i] = c;
      total_sumsq += c * c;
    }
  }

  hestenes_orthogonalize(cols);

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(dot(cols[j], cols[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  const double s_max = norms[order[0]];
  const double denom = std::sqrt(static_cast<double>(n - 1));
  const double total_variance = total_sumsq / static_cast<double>(n - 1);

  model.components.reserve(k_eff);
  model.sigma.reserve(k_eff);
  model.explained_variance_ratio.reserve(k_eff);
  for (std::size_t r = 0; r < k_eff; ++r) {
    const double s = norms[order[r]];
    std::vector<double> row;
    if (s_max > 0.0 && s > s_max * kRankEps) {
      row = cols[order[r]];
      for (double& x : row) x /= s;
      model.sigma.push_back(s / denom);
    } else {
      row = complete_basis(model.components, d);
      model.sigma.push_back(0.0);
    }
    apply_sign_convention(row);
    model.components.push_back(std::move(row));
    const double var = model.sigma.back() * model.sigma.back();
    model.explained_variance_ratio.push_back(total_variance > 0.0 ? var / total_variance : 0.0);
  }

  validate_pca_model(model, 1e-8);
  return model;
}

namespace {

template <typename Scalar>
std::vector<double> project_impl(const PcaModel& model, const std::vector<Scalar>& values) {
  if (values.size() != model.dimension()) {
    throw std::invalid_argument("dimension mismatch: embedding has " +
                                std::to_string(values.size()) + " values, model expects " +
                                std::to_string(model.dimension()));
  }
  std::vector<double> score(model.component_count(), 0.0);
  for (std::size_t r = 0; r < model.component_count(); ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < model.dimension(); ++i) {
      s += model.components[r][i] * (static_cast<double>(values[i]) - model.mean[i]);
    }
    score[r] = s;
  }
  return score;
}

}  // namespace

std::vector<double> project(const PcaModel& model, const std::vector<float>& values) {
  return project_impl(model, values);
}

std::vector<double> project(const PcaModel& model, const std::vector<double>& values) {
  return project_impl(model, values);
}

std::vector<double> inverse_project(const PcaModel& model, const std::vector<double>& score) {
  if (score.size() != model.component_count()) {
    throw std::invalid_argument("score length " + std::to_string(score.size()) +
                                " does not match component count " +
                                std::to_string(model.component_count()));
  }
  std::vector<double> values = model.mean;
  for (std::size_t r = 0; r < model.component_count(); ++r) {
    for (std::size_t i = 0; i < model.dimension(); ++i) {
      values[i] += model.components[r][i] * score[r];
    }
  }
  return values;
}

std::vector<ComponentCorrelation> correlate_components(
    const PcaModel& model, const std::vector<std::pair<StyleEmbedding, double>>& pairs) {
  const std::size_t n = pairs.size();
  if (n < 3) {
    throw std::invalid_argument("correlation needs at least 3 pairs, got " + std::to_string(n));
  }

  std::vector<std::vector<double>> scores(n);
  for (std::size_t j = 0; j < n; ++j) scores[j] = project(model, pairs[j].first.values);

  double attr_mean = 0.0;
  for (const auto& p : pairs) attr_mean += p.second;
  attr_mean /= static_cast<double>(n);
  double attr_var = 0.0;
  for (const auto& p : pairs) attr_var += (p.second - attr_mean) * (p.second - attr_mean);
  if (attr_var == 0.0) {
    throw std::invalid_argument("attribute has zero variance across the pairs");
  }

  const std::size_t k = model.component_count();
  std::vector<double> score_mean(k, 0.0);
  std::vector<double> score_var(k, 0.0);
  std::vector<double> cross(k, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < k; ++r) score_mean[r] += scores[j][r];
  }
  for (double& m : score_mean) m /= static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double da = pairs[j].second - attr_mean;
    for (std::size_t r = 0; r < k; ++r) {
      const double ds = scores[j][r] - score_mean[r];
      score_var[r] += ds * ds;
      cross[r] += ds * da;
    }
  }

  const double var_max = *std::max_element(score_var.begin(), score_var.end());
  std::vector<ComponentCorrelation> out(k);
  for (std::size_t r = 0; r < k; ++r) {
    out[r].component_index = r;
    out[r].sample_count = n;
    if (score_var[r] <= 0.0 || score_var[r] <= var_max * 1e-24) {
      out[r].defined = false;
      out[r].pearson_r = std::numeric_limits<double>::quiet_NaN();
    } else {
      out[r].pearson_r = cross[r] / std::sqrt(score_var[r] * attr_var);
    }
  }
  return out;
}

void validate_pca_model(const PcaModel& model, double tol) {
  const std::size_t k = model.component_count();
  const std::size_t d = model.dimension();
  if (k == 0 || d == 0) throw std::runtime_error("PCA model is empty");
  if (model.sigma.size() != k || model.explained_variance_ratio.size() != k) {
    throw std::runtime_error("PCA model field sizes disagree");
  }
  for (const auto& row : model.components) {
    if (row.size() != d) throw std::runtime_error("PCA component row has wrong dimension");
    for (double x : row) {
      if (!std::isfinite(x)) throw std::runtime_error("PCA model contains non-finite values");
    }
  }
  for (double x : model.mean) {
    if (!std::isfinite(x)) throw std::runtime_error("PCA model contains non-finite values");
  }
  for (std::size_t r = 0; r < k; ++r) {
    if (!std::isfinite(model.sigma[r]) || model.sigma[r] < 0.0) {
      throw std::runtime_error("PCA sigma must be non-negative");
    }
    if (r > 0 && model.sigma[r] > model.sigma[r - 1]) {
      throw std::runtime_error("PCA sigma must be non-increasing");
    }
  }
  double evr_sum = 0.0;
  for (double e : model.explained_variance_ratio) evr_sum += e;
  if (evr_sum > 1.0 + 1e-9) {
    throw std::runtime_error("explained variance ratios sum beyond 1");
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double g = dot(model.components[i], model.components[j]);
      const double target = (i == j) ? 1.0 : 0.0;
      if (std::abs(g - target) >= tol) {
        throw std::runtime_error("orthonormality violated in PCA components");
      }
    }
  }
}

void save_pca(const PcaModel& model, const std::string& path) {
  validate_pca_model(model, 1e-6);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kPcamMagic, 4);
  write_u32le(out, static_cast<std::uint32_t>(model.component_count()));
  write_u32le(out, static_cast<std::uint32_t>(model.dimension()));
  for (double m : model.mean) write_f64le(out, m);
  for (double s : model.sigma) write_f64le(out, s);
  for (double e : model.explained_variance_ratio) write_f64le(out, e);
  for (const auto& row : model.components) {
    for (double x : row) write_f64le(out, x);
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

PcaModel load_pca(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open PCA model file: " + path);
  expect_magic(in, kPcamMagic, "PCAM");
  const std::uint32_t k = read_u32le(in, "PCAM component count");
  const std::uint32_t d = read_u32le(in, "PCAM dimension");
  if (k == 0 || d == 0) throw std::runtime_error(path + ": empty PCA model");

  PcaModel model;
  model.mean.resize(d);
  for (auto& m : model.mean) m = read_f64le(in, "PCAM mean");
  model.sigma.resize(k);
  for (auto& s : model.sigma) s = read_f64le(in, "PCAM sigma");
  model.explained_variance_ratio.resize(k);
  for (auto& e : model.explained_variance_ratio) e = read_f64le(in, "PCAM variance ratios");
  model.components.assign(k, std::vector<double>(d));
  for (auto& row : model.components) {
    for (auto& x : row) x = read_f64le(in, "PCAM components");
  }
  char extra;
  if (in.read(&extra, 1)) throw std::runtime_error(path + ": trailing bytes after PCAM payload");
  validate_pca_model(model, 1e-6);
  return model;
}

}  // namespace lombard
