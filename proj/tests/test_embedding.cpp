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

#include "lombard/embedding.hpp"

#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "lombard/rng.hpp"
#include "temp_dir.hpp"

using lombard::AttributeTable;
using lombard::EmbeddingCorpus;
using lombard::StyleEmbedding;
using lombard::testing::TempDir;
using lombard::testing::read_bytes;
using lombard::testing::write_text;

namespace {

EmbeddingCorpus random_corpus(std::size_t n, std::size_t dim, std::uint64_t seed) {
  lombard::Rng rng(seed);
  EmbeddingCorpus corpus;
  corpus.dimension = dim;
  for (std::size_t i = 0; i < n; ++i) {
    StyleEmbedding e;
    e.id = "utt" + std::to_string(i);
    for (std::size_t k = 0; k < dim; ++k) {
      e.values.push_back(static_cast<float>(rng.normal()));
    }
    corpus.embeddings.push_back(std::move(e));
  }
  return corpus;
}

}  // namespace

TEST_CASE("load_corpus_csv parses a well-formed file") {
  TempDir tmp;
  const std::string path = tmp.file("corpus.csv");
  write_text(path,
             "id,v0,v1\n"
             "a,1.0,2.0\n"
             "b,3.5,-4.5\n"
             "c,0.0,0.25\n");
  const EmbeddingCorpus corpus = lombard::load_corpus_csv(path);
  CHECK(corpus.size() == 3);
  CHECK(corpus.dimension == 2);
  CHECK(corpus.embeddings[0].id == "a");
  CHECK(corpus.embeddings[1].values[0] == doctest::Approx(3.5));
  CHECK(corpus.embeddings[2].values[1] == doctest::Approx(0.25));
}

TEST_CASE("load_corpus_csv preserves row order") {
  TempDir tmp;
  const std::string path = tmp.file("corpus.csv");
  write_text(path, "id,v0\nz,1\nm,2\na,3\n");
  const EmbeddingCorpus corpus = lombard::load_corpus_csv(path);
  CHECK(corpus.embeddings[0].id == "z");
  CHECK(corpus.embeddings[1].id == "m");
  CHECK(corpus.embeddings[2].id == "a");
}

TEST_CASE("load_corpus_csv rejects malformed input with line numbers") {
  TempDir tmp;
  const std::string path = tmp.file("corpus.csv");

  SUBCASE("empty data section") {
    write_text(path, "id,v0,v1\n");
    CHECK_THROWS_WITH_AS(lombard::load_corpus_csv(path),
                         doctest::Contains("empty corpus"), std::invalid_argument);
  }
  SUBCASE("ragged row names its line") {
    write_text(path, "id,v0,v1\na,1.0,2.0\nb,3.0\n");
    CHECK_THROWS_WITH_AS(lombard::load_corpus_csv(path), doctest::Contains(":3:"),
                         std::invalid_argument);
  }
  SUBCASE("non-numeric cell") {
    write_text(path, "id,v0\na,oops\n");
    CHECK_THROWS_WITH_AS(lombard::load_corpus_csv(path), doctest::Contains("non-numeric"),
                         std::invalid_argument);
  }
  SUBCASE("duplicate id") {
    write_text(path, "id,v0\na,1\na,2\n");
    CHECK_THROWS_WITH_AS(lombard::load_corpus_csv(path), doctest::Contains("duplicate id"),
                         std::invalid_argument);
  }
  SUBCASE("malformed header") {
    write_text(path, "name,v0\na,1\n");
    CHECK_THROWS_WITH_AS(lombard::load_corpus_csv(path), doctest::Contains("header"),
                         std::invalid_argument);
  }
  SUBCASE("header with wrong column label") {
    write_text(path, "id,v0,v2\na,1,2\n");
    CHECK_THROWS_WITH_AS(lombard::load_corpus_csv(path), doctest::Contains("v1"),
                         std::invalid_argument);
  }
  SUBCASE("non-finite value") {
    write_text(path, "id,v0\na,inf\n");
    CHECK_THROWS_AS(lombard::load_corpus_csv(path), std::invalid_argument);
  }
}

TEST_CASE("SEMB file layout matches the format definition byte for byte") {
  TempDir tmp;
  EmbeddingCorpus corpus;
  corpus.dimension = 2;
  corpus.embeddings.push_back({"u1", {1.5f, -2.0f}});
  const std::string path = tmp.file("corpus.semb");
  lombard::save_corpus_binary(corpus, path);

  const std::string bytes = read_bytes(path);
  // magic(4) + count(4) + dim(4) + id table(2 + 2) + values(2 * 4)
  REQUIRE(bytes.size() == 24);
  CHECK(bytes.compare(0, 4, "SEMB") == 0);
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);   // count, LE
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);   // dimension, LE
  CHECK(static_cast<unsigned char>(bytes[12]) == 2);  // id byte length, LE
  CHECK(bytes.compare(14, 2, "u1") == 0);
  float v0 = 0.0f;
  float v1 = 0.0f;
  std::memcpy(&v0, bytes.data() + 16, 4);
  std::memcpy(&v1, bytes.data() + 20, 4);
  CHECK(v0 == 1.5f);
  CHECK(v1 == -2.0f);
}

TEST_CASE("SEMB roundtrip is bitwise on ids and values") {
  TempDir tmp;
  const EmbeddingCorpus corpus = random_corpus(7, 16, 42);
  const std::string path = tmp.file("corpus.semb");
  lombard::save_corpus_binary(corpus, path);
  const EmbeddingCorpus loaded = lombard::load_corpus_binary(path);
  REQUIRE(loaded.size() == corpus.size());
  CHECK(loaded.dimension == corpus.dimension);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded.embeddings[i].id == corpus.embeddings[i].id);
    REQUIRE(loaded.embeddings[i].values.size() == corpus.embeddings[i].values.size());
    for (std::size_t k = 0; k < corpus.dimension; ++k) {
      CHECK(std::memcmp(&loaded.embeddings[i].values[k], &corpus.embeddings[i].values[k],
                        sizeof(float)) == 0);
    }
  }
}

TEST_CASE("load_corpus_binary rejects damaged files") {
  TempDir tmp;
  const EmbeddingCorpus corpus = random_corpus(2, 3, 7);
  const std::string path = tmp.file("corpus.semb");
  lombard::save_corpus_binary(corpus, path);
  const std::string bytes = read_bytes(path);

  SUBCASE("wrong magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    const std::string bad_path = tmp.file("bad_magic.semb");
    write_text(bad_path, bad);
    CHECK_THROWS_WITH_AS(lombard::load_corpus_binary(bad_path), doctest::Contains("bad magic"),
                         std::runtime_error);
  }
  SUBCASE("truncated payload") {
    const std::string bad_path = tmp.file("truncated.semb");
    write_text(bad_path, bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_WITH_AS(lombard::load_corpus_binary(bad_path), doctest::Contains("truncated"),
                         std::runtime_error);
  }
  SUBCASE("trailing garbage") {
    const std::string bad_path = tmp.file("trailing.semb");
    write_text(bad_path, bytes + "xx");
    CHECK_THROWS_WITH_AS(lombard::load_corpus_binary(bad_path), doctest::Contains("trailing"),
                         std::runtime_error);
  }
}

TEST_CASE("CSV to binary to CSV preserves the printed values") {
  TempDir tmp;
  const std::string csv1 = tmp.file("a.csv");
  write_text(csv1,
             "id,v0,v1\n"
             "a,0.10000000149011612,2\n"
             "b,-3.4028234663852886e+38,1e-06\n");
  const EmbeddingCorpus c1 = lombard::load_corpus_csv(csv1);
  const std::string bin = tmp.file("a.semb");
  lombard::save_corpus_binary(c1, bin);
  const EmbeddingCorpus c2 = lombard::load_corpus_binary(bin);
  const std::string csv2 = tmp.file("b.csv");
  lombard::save_corpus_csv(c2, csv2);
  const EmbeddingCorpus c3 = lombard::load_corpus_csv(csv2);
  REQUIRE(c3.size() == c1.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    for (std::size_t k = 0; k < c1.dimension; ++k) {
      CHECK(c3.embeddings[i].values[k] == c1.embeddings[i].values[k]);
    }
  }
}

TEST_CASE("save_corpus_binary reports unwritable destinations") {
  const EmbeddingCorpus corpus = random_corpus(1, 2, 3);
  CHECK_THROWS_AS(lombard::save_corpus_binary(corpus, "/nonexistent-dir/out.semb"),
                  std::runtime_error);
}

TEST_CASE("join_attributes pairs labeled embeddings in corpus order") {
  EmbeddingCorpus corpus = random_corpus(3, 2, 11);
  AttributeTable table;
  table.rows.push_back({"utt2", "spl_db", 72.5});
  table.rows.push_back({"utt0", "spl_db", 61.0});
  table.rows.push_back({"utt0", "clarity", 1.0});

  const auto pairs = lombard::join_attributes(corpus, table, "spl_db");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].first.id == "utt0");
  CHECK(pairs[0].second == doctest::Approx(61.0));
  CHECK(pairs[1].first.id == "utt2");
  CHECK(pairs[1].second == doctest::Approx(72.5));
}

TEST_CASE("join_attributes covers the whole corpus when every id is labeled") {
  EmbeddingCorpus corpus = random_corpus(4, 2, 13);
  AttributeTable table;
  for (const auto& e : corpus.embeddings) table.rows.push_back({e.id, "clarity", 0.0});
  CHECK(lombard::join_attributes(corpus, table, "clarity").size() == corpus.size());
}

TEST_CASE("join_attributes rejects absent attributes and unknown ids") {
  EmbeddingCorpus corpus = random_corpus(2, 2, 17);
  AttributeTable table;
  table.rows.push_back({"utt0", "clarity", 1.0});

  CHECK_THROWS_WITH_AS(lombard::join_attributes(corpus, table, "spl_db"),
                       doctest::Contains("spl_db"), std::invalid_argument);

  table.rows.push_back({"ghost", "clarity", -1.0});
  CHECK_THROWS_WITH_AS(lombard::join_attributes(corpus, table, "clarity"),
                       doctest::Contains("ghost"), std::invalid_argument);
}

TEST_CASE("load_attributes_csv validates shape and duplicates") {
  TempDir tmp;
  const std::string path = tmp.file("attrs.csv");

  SUBCASE("well-formed") {
    write_text(path, "id,attribute,value\nu1,spl_db,63.5\nu1,clarity,-1\n");
    const AttributeTable table = lombard::load_attributes_csv(path);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].value == doctest::Approx(63.5));
    CHECK(table.rows[1].attribute == "clarity");
  }
  SUBCASE("duplicate pair rejected with line number") {
    write_text(path, "id,attribute,value\nu1,spl_db,63.5\nu1,spl_db,64.0\n");
    CHECK_THROWS_WITH_AS(lombard::load_attributes_csv(path), doctest::Contains(":3:"),
                         std::invalid_argument);
  }
  SUBCASE("bad header") {
    write_text(path, "id,value\nu1,63.5\n");
    CHECK_THROWS_WITH_AS(lombard::load_attributes_csv(path), doctest::Contains("header"),
                         std::invalid_argument);
  }
}
