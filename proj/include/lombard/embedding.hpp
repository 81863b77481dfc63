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

#ifndef LOMBARD_EMBEDDING_HPP_
#define LOMBARD_EMBEDDING_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace lombard {

// One utterance's style vector. Values are stored as f32, the unit they
// travel in on disk (SEMB) and the precision style encoders emit; analysis
// code widens to double internally.
struct StyleEmbedding {
  std::string id;
  std::vector<float> values;
};

struct EmbeddingCorpus {
  std::vector<StyleEmbedding> embeddings;
  std::size_t dimension = 0;

  std::size_t size() const { return embeddings.size(); }
};

struct AttributeRow {
  std::string id;
  std::string attribute;
  double value = 0.0;
};

// Per-utterance labels (loudness in dB SPL, clarity as ordinal reals).
// An (id, attribute) pair appears at most once.
struct AttributeTable {
  std::vector<AttributeRow> rows;
};

// Throws std::invalid_argument if the corpus is empty, dimensions are not
// uniform, ids repeat, or any value is non-finite.
void validate_corpus(const EmbeddingCorpus& corpus);

// CSV with header `id,v0,...,v{D-1}`. Errors carry 1-based line numbers.
EmbeddingCorpus load_corpus_csv(const std::string& path);

// Emits the same header; floats printed with 17 significant digits.
void save_corpus_csv(const EmbeddingCorpus& corpus, const std::string& path);

// SEMB binary: magic `SEMB`, u32 LE count, u32 LE dimension, id table
// (u16 LE byte length + UTF-8 id per embedding), then count*dimension
// f32 LE values row-major. Roundtrips bitwise.
void save_corpus_binary(const EmbeddingCorpus& corpus, const std::string& path);
EmbeddingCorpus load_corpus_binary(const std::string& path);

// CSV with header `id,attribute,value`. Duplicate (id, attribute) pairs
// are rejected with the offending line number.
AttributeTable load_attributes_csv(const std::string& path);

// Pairs each corpus embedding carrying `attribute` with its value, in corpus
// order. Throws if the attribute is absent from the table entirely or if a
// row with that attribute names an id the corpus does not contain.
std::vector<std::pair<StyleEmbedding, double>> join_attributes(
    const EmbeddingCorpus& corpus, const AttributeTable& table, const std::string& attribute);

}  // namespace lombard

#endif  // LOMBARD_EMBEDDING_HPP_
