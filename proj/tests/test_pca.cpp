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

#include <cmath>
#include <cstring>

#include "doctest.h"
#include "lombard/rng.hpp"
#include "oracle_eig.hpp"
#include "temp_dir.hpp"

using lombard::EmbeddingCorpus;
using lombard::PcaModel;
using lombard::StyleEmbedding;
using lombard::testing::TempDir;
using lombard::testing::covariance_eigendecomposition;

namespace {

EmbeddingCorpus make_corpus(const std::vector<std::vector<float>>& rows) {
  EmbeddingCorpus corpus;
  corpus.dimension = rows.at(0).size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    corpus.embeddings.push_back({"p" + std::to_string(i), rows[i]});
  }
  return corpus;
}

EmbeddingCorpus random_corpus(std::size_t n, std::size_t dim, std::uint64_t seed) {
  lombard::Rng rng(seed);
  EmbeddingCorpus corpus;
  corpus.dimension = dim;
  for (std::size_t i = 0; i < n; ++i) {
    StyleEmbedding e;
    e.id = "r" + std::to_string(i);
    for (std::size_t k = 0; k < dim; ++k) {
      e.values.push_back(static_cast<float>(rng.normal() * (1.0 + 0.5 * static_cast<double>(k))));
    }
    corpus.embeddings.push_back(std::move(e));
  }
  return corpus;
}

double max_orthonormality_error(const PcaModel& model) {
  double worst = 0.0;
  for (std::size_t i = 0; i < model.component_count(); ++i) {
    for (std::size_t j = i; j < model.component_count(); ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < model.dimension(); ++k) {
        g += model.components[i][k] * model.components[j][k];
      }
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

// Relative spectral gaps decide whether eigenvector comparison is well-posed.
bool well_separated(const std::vector<double>& eigenvalues) {
  const double top = eigenvalues.front();
  if (top <= 0.0) return false;
  for (std::size_t i = 0; i + 1 < eigenvalues.size(); ++i) {
    if ((eigenvalues[i] - eigenvalues[i + 1]) / top < 1e-3) return false;
  }
  return eigenvalues.back() / top > 1e-3;
}

}  // namespace

TEST_CASE("fit_pca reproduces the hand-computed collinear example") {
  const EmbeddingCorpus corpus = make_corpus({{1, 1}, {2, 2}, {3, 3}});
  const PcaModel model = lombard::fit_pca(corpus);

  REQUIRE(model.component_count() == 2);
  CHECK(model.mean[0] == doctest::Approx(2.0));
  CHECK(model.mean[1] == doctest::Approx(2.0));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(model.components[0][0] == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(model.components[0][1] == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(model.sigma[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(model.sigma[1] == 0.0);

  SUBCASE("project of a training point matches the hand oracle") {
    const std::vector<double> score = lombard::project(model, std::vector<double>{3.0, 3.0});
    CHECK(score[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(score[1] == doctest::Approx(0.0));
  }
  SUBCASE("inverse_project of that score returns the point") {
    const std::vector<double> values = lombard::inverse_project(model, {std::sqrt(2.0), 0.0});
    CHECK(values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(values[1] == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("fit_pca on identical points gives zero sigma and the point as mean") {
  const EmbeddingCorpus corpus = make_corpus({{4, -1, 2}, {4, -1, 2}, {4, -1, 2}});
  const PcaModel model = lombard::fit_pca(corpus);
  CHECK(model.mean[0] == doctest::Approx(4.0));
  CHECK(model.mean[1] == doctest::Approx(-1.0));
  CHECK(model.mean[2] == doctest::Approx(2.0));
  for (double s : model.sigma) CHECK(s == 0.0);
  for (double e : model.explained_variance_ratio) CHECK(e == 0.0);
  CHECK(max_orthonormality_error(model) < 1e-8);
}

TEST_CASE("fit_pca rejects invalid inputs") {
  SUBCASE("single point") {
    CHECK_THROWS_AS(lombard::fit_pca(make_corpus({{1, 2}})), std::invalid_argument);
  }
  SUBCASE("k above min(N-1, D)") {
    CHECK_THROWS_AS(lombard::fit_pca(make_corpus({{1, 2}, {3, 4}}), 2), std::invalid_argument);
  }
  SUBCASE("k of zero") {
    CHECK_THROWS_AS(lombard::fit_pca(make_corpus({{1, 2}, {3, 4}, {5, 7}}), 0),
                    std::invalid_argument);
  }
  SUBCASE("non-finite input") {
    EmbeddingCorpus corpus = make_corpus({{1, 2}, {3, 4}});
    corpus.embeddings[1].values[0] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(lombard::fit_pca(corpus), std::invalid_argument);
  }
}

TEST_CASE("project and inverse_project validate lengths") {
  const PcaModel model = lombard::fit_pca(make_corpus({{1, 2}, {3, 5}, {4, 1}}));
  CHECK_THROWS_AS(lombard::project(model, std::vector<double>{1.0, 2.0, 3.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lombard::inverse_project(model, {1.0, 2.0, 3.0}), std::invalid_argument);
  const std::vector<double> at_mean = lombard::project(model, model.mean);
  for (double s : at_mean) CHECK(s == doctest::Approx(0.0));
  const std::vector<double> back = lombard::inverse_project(model, {0.0, 0.0});
  CHECK(back[0] == doctest::Approx(model.mean[0]));
  CHECK(back[1] == doctest::Approx(model.mean[1]));
}

TEST_CASE("fitted models match the covariance eigendecomposition oracle") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 60 && compared < 8; ++seed) {
    const std::size_t d = 2 + static_cast<std::size_t>(seed % 5);
    const std::size_t n = d + 2 + static_cast<std::size_t>(seed % 5);
    const EmbeddingCorpus corpus = random_corpus(n, d, seed * 1000);
    const auto oracle = covariance_eigendecomposition(corpus);
    if (!well_separated(oracle.eigenvalues)) continue;
    ++compared;

    const PcaModel model = lombard::fit_pca(corpus);
    REQUIRE(model.component_count() == d);
    for (std::size_t r = 0; r < d; ++r) {
      CHECK(model.sigma[r] * model.sigma[r] ==
            doctest::Approx(oracle.eigenvalues[r]).epsilon(1e-8));
      for (std::size_t i = 0; i < d; ++i) {
        CHECK(model.components[r][i] == doctest::Approx(oracle.eigenvectors[r][i]).epsilon(1e-8));
      }
    }
  }
  CHECK(compared >= 8);
}

TEST_CASE("fit holds its structural invariants on random corpora") {
  for (std::uint64_t seed : {3u, 14u, 159u, 2653u}) {
    const std::size_t d = 2 + seed % 7;
    const std::size_t n = 2 + seed % 9;
    const EmbeddingCorpus corpus = random_corpus(n, d, seed);
    const PcaModel model = lombard::fit_pca(corpus);

    CHECK(model.component_count() == std::min(n - 1, d));
    CHECK(max_orthonormality_error(model) < 1e-8);
    for (std::size_t r = 1; r < model.component_count(); ++r) {
      CHECK(model.sigma[r] <= model.sigma[r - 1]);
    }
    double evr_sum = 0.0;
    for (double e : model.explained_variance_ratio) evr_sum += e;
    CHECK(evr_sum <= 1.0 + 1e-9);

    for (const StyleEmbedding& e : corpus.embeddings) {
      const auto round = lombard::inverse_project(model, lombard::project(model, e.values));
      double norm = 0.0;
      double err = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        norm += static_cast<double>(e.values[i]) * e.values[i];
        const double delta = round[i] - e.values[i];
        err += delta * delta;
      }
      CHECK(std::sqrt(err) <= 1e-6 * (1.0 + std::sqrt(norm)));
    }
  }
}

TEST_CASE("fit is deterministic down to the bit") {
  const EmbeddingCorpus corpus = random_corpus(9, 5, 777);
  const PcaModel a = lombard::fit_pca(corpus);
  const PcaModel b = lombard::fit_pca(corpus);
  REQUIRE(a.component_count() == b.component_count());
  for (std::size_t r = 0; r < a.component_count(); ++r) {
    CHECK(std::memcmp(a.components[r].data(), b.components[r].data(),
                      a.dimension() * sizeof(double)) == 0);
  }
  CHECK(std::memcmp(a.sigma.data(), b.sigma.data(), a.sigma.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.mean.data(), b.mean.data(), a.mean.size() * sizeof(double)) == 0);
}

TEST_CASE("requesting fewer components truncates the model") {
  const EmbeddingCorpus corpus = random_corpus(10, 4, 31);
  const PcaModel full = lombard::fit_pca(corpus);
  const PcaModel k2 = lombard::fit_pca(corpus, 2);
  REQUIRE(k2.component_count() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(k2.sigma[r] == doctest::Approx(full.sigma[r]).epsilon(1e-12));
  }
  CHECK(lombard::project(k2, corpus.embeddings[0].values).size() == 2);
}

TEST_CASE("correlate_components recovers engineered linear relations") {
  const EmbeddingCorpus corpus = random_corpus(12, 3, 99);
  const PcaModel model = lombard::fit_pca(corpus);

  std::vector<std::pair<StyleEmbedding, double>> pairs;
  for (const auto& e : corpus.embeddings) {
    const double s1 = lombard::project(model, e.values)[0];
    pairs.emplace_back(e, 2.0 * s1 + 5.0);
  }
  auto res = lombard::correlate_components(model, pairs);
  REQUIRE(res.size() == model.component_count());
  CHECK(res[0].defined);
  CHECK(res[0].pearson_r == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res[0].sample_count == pairs.size());

  for (auto& p : pairs) p.second = -lombard::project(model, p.first.values)[0];
  res = lombard::correlate_components(model, pairs);
  CHECK(res[0].pearson_r == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("correlate_components rejects degenerate inputs") {
  const EmbeddingCorpus corpus = random_corpus(6, 2, 5);
  const PcaModel model = lombard::fit_pca(corpus);

  SUBCASE("fewer than 3 pairs") {
    std::vector<std::pair<StyleEmbedding, double>> pairs = {
        {corpus.embeddings[0], 1.0}, {corpus.embeddings[1], 2.0}};
    CHECK_THROWS_AS(lombard::correlate_components(model, pairs), std::invalid_argument);
  }
  SUBCASE("constant attribute") {
    std::vector<std::pair<StyleEmbedding, double>> pairs;
    for (const auto& e : corpus.embeddings) pairs.emplace_back(e, 7.0);
    CHECK_THROWS_WITH_AS(lombard::correlate_components(model, pairs),
                         doctest::Contains("zero variance"), std::invalid_argument);
  }
}

TEST_CASE("components without score variance are flagged undefined") {
  // All points share the same second coordinate, so the second principal
  // direction is exactly the y axis and every score along it is zero.
  const EmbeddingCorpus corpus = make_corpus({{1, 5}, {2, 5}, {4, 5}, {8, 5}});
  const PcaModel model = lombard::fit_pca(corpus, 2);
  std::vector<std::pair<StyleEmbedding, double>> pairs;
  for (const auto& e : corpus.embeddings) pairs.emplace_back(e, e.values[0]);
  const auto res = lombard::correlate_components(model, pairs);
  CHECK(res[0].defined);
  CHECK(res[0].pearson_r == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(res[1].defined);
  CHECK(std::isnan(res[1].pearson_r));
}

TEST_CASE("PCAM files roundtrip bitwise and reject corruption") {
  TempDir tmp;
  const EmbeddingCorpus corpus = random_corpus(8, 4, 2024);
  const PcaModel model = lombard::fit_pca(corpus);
  const std::string path = tmp.file("model.pcam");
  lombard::save_pca(model, path);

  SUBCASE("roundtrip") {
    const PcaModel loaded = lombard::load_pca(path);
    REQUIRE(loaded.component_count() == model.component_count());
    REQUIRE(loaded.dimension() == model.dimension());
    CHECK(std::memcmp(loaded.mean.data(), model.mean.data(),
                      model.dimension() * sizeof(double)) == 0);
    CHECK(std::memcmp(loaded.sigma.data(), model.sigma.data(),
                      model.sigma.size() * sizeof(double)) == 0);
    for (std::size_t r = 0; r < model.component_count(); ++r) {
      CHECK(std::memcmp(loaded.components[r].data(), model.components[r].data(),
                        model.dimension() * sizeof(double)) == 0);
    }
  }
  SUBCASE("corrupted component row fails orthonormality validation") {
    PcaModel bad = model;
    bad.components[0][0] += 0.01;
    const std::string bad_path = tmp.file("bad.pcam");
    CHECK_THROWS_WITH_AS(lombard::save_pca(bad, bad_path),
                         doctest::Contains("orthonormality"), std::runtime_error);

    std::string bytes = lombard::testing::read_bytes(path);
    // First component entry sits after magic, counts, mean, sigma, and
    // ratios; stamp it to 2.0 so the row norm is far from 1.
    const std::size_t offset = 4 + 8 + model.dimension() * 8 + model.sigma.size() * 16;
    const double two = 2.0;
    std::memcpy(bytes.data() + offset, &two, sizeof(two));
    lombard::testing::write_text(bad_path, bytes);
    CHECK_THROWS_WITH_AS(lombard::load_pca(bad_path), doctest::Contains("orthonormality"),
                         std::runtime_error);
  }
  SUBCASE("wrong magic") {
    std::string bytes = lombard::testing::read_bytes(path);
    bytes[1] = 'X';
    const std::string bad_path = tmp.file("magic.pcam");
    lombard::testing::write_text(bad_path, bytes);
    CHECK_THROWS_WITH_AS(lombard::load_pca(bad_path), doctest::Contains("bad magic"),
                         std::runtime_error);
  }
  SUBCASE("truncation") {
    const std::string bytes = lombard::testing::read_bytes(path);
    const std::string bad_path = tmp.file("short.pcam");
    lombard::testing::write_text(bad_path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_WITH_AS(lombard::load_pca(bad_path), doctest::Contains("truncated"),
                         std::runtime_error);
  }
}
