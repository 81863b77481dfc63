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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "lombard/binio.hpp"

namespace lombard {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void fail_line(const std::string& path, std::size_t lineno, const std::string& msg) {
  throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + msg);
}

float parse_f32_cell(const std::string& cell, const std::string& path, std::size_t lineno) {
  try {
    std::size_t pos = 0;
    const float v = std::stof(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail_line(path, lineno, "non-numeric cell '" + cell + "'");
  }
}

double parse_f64_cell(const std::string& cell, const std::string& path, std::size_t lineno) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail_line(path, lineno, "non-numeric cell '" + cell + "'");
  }
}

constexpr char kSembMagic[5] = "SEMB";

}  // namespace

void validate_corpus(const EmbeddingCorpus& corpus) {
  if (corpus.embeddings.empty()) throw std::invalid_argument("empty corpus");
  if (corpus.dimension == 0) throw std::invalid_argument("corpus dimension must be positive");
  std::unordered_set<std::string> seen;
  for (const StyleEmbedding& e : corpus.embeddings) {
    if (e.values.size() != corpus.dimension) {
      throw std::invalid_argument("embedding '" + e.id + "' has dimension " +
                                  std::to_string(e.values.size()) + ", corpus dimension is " +
                                  std::to_string(corpus.dimension));
    }
    if (!seen.insert(e.id).second) {
      throw std::invalid_argument("duplicate embedding id '" + e.id + "'");
    }
    for (float v : e.values) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("embedding '" + e.id + "' contains a non-finite value");
      }
    }
  }
}

EmbeddingCorpus load_corpus_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open corpus file: " + path);

  std::string line;
  if (!std::getline(in, line)) fail_line(path, 1, "missing header row");
  const std::vector<std::string> header = split_csv_line(strip_cr(line));
  if (header.size() < 2 || header[0] != "id") {
    fail_line(path, 1, "malformed header, expected 'id,v0,...'");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k + 1] != "v" + std::to_string(k)) {
      fail_line(path, 1, "malformed header, expected column 'v" + std::to_string(k) +
                             "', got '" + header[k + 1] + "'");
    }
  }

  EmbeddingCorpus corpus;
  corpus.dimension = dim;
  std::unordered_set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != dim + 1) {
      fail_line(path, lineno, "expected " + std::to_string(dim + 1) + " cells, got " +
                                  std::to_string(cells.size()));
    }
    StyleEmbedding e;
    e.id = cells[0];
    if (e.id.empty()) fail_line(path, lineno, "empty id");
    if (!seen.insert(e.id).second) fail_line(path, lineno, "duplicate id '" + e.id + "'");
    e.values.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const float v = parse_f32_cell(cells[k + 1], path, lineno);
      if (!std::isfinite(v)) fail_line(path, lineno, "non-finite value in column v" + std::to_string(k));
      e.values.push_back(v);
    }
    corpus.embeddings.push_back(std::move(e));
  }
  if (corpus.embeddings.empty()) throw std::invalid_argument(path + ": empty corpus");
  return corpus;
}

void save_corpus_csv(const EmbeddingCorpus& corpus, const std::string& path) {
  validate_corpus(corpus);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "id";
  for (std::size_t k = 0; k < corpus.dimension; ++k) out << ",v" << k;
  out << "\n";
  char buf[64];
  for (const StyleEmbedding& e : corpus.embeddings) {
    out << e.id;
    for (float v : e.values) {
      std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

void save_corpus_binary(const EmbeddingCorpus& corpus, const std::string& path) {
  validate_corpus(corpus);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kSembMagic, 4);
  write_u32le(out, static_cast<std::uint32_t>(corpus.embeddings.size()));
  write_u32le(out, static_cast<std::uint32_t>(corpus.dimension));
  for (const StyleEmbedding& e : corpus.embeddings) {
    if (e.id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::runtime_error("embedding id too long for SEMB id table: '" + e.id + "'");
    }
    write_u16le(out, static_cast<std::uint16_t>(e.id.size()));
    out.write(e.id.data(), static_cast<std::streamsize>(e.id.size()));
  }
  for (const StyleEmbedding& e : corpus.embeddings) {
    for (float v : e.values) write_f32le(out, v);
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

EmbeddingCorpus load_corpus_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open corpus file: " + path);
  expect_magic(in, kSembMagic, "SEMB");
  const std::uint32_t count = read_u32le(in, "SEMB count");
  const std::uint32_t dim = read_u32le(in, "SEMB dimension");
  if (count == 0) throw std::runtime_error(path + ": empty corpus");
  if (dim == 0) throw std::runtime_error(path + ": zero dimension");

  EmbeddingCorpus corpus;
  corpus.dimension = dim;
  corpus.embeddings.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = read_u16le(in, "SEMB id length");
    std::string id(len, '\0');
    if (len > 0) read_exact(in, id.data(), len, "SEMB id");
    corpus.embeddings[i].id = std::move(id);
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    auto& values = corpus.embeddings[i].values;
    values.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) values[k] = read_f32le(in, "SEMB values");
  }
  char extra;
  if (in.read(&extra, 1)) throw std::runtime_error(path + ": trailing bytes after SEMB payload");
  validate_corpus(corpus);
  return corpus;
}

AttributeTable load_attributes_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open attribute file: " + path);
  std::string line;
  if (!std::getline(in, line)) fail_line(path, 1, "missing header row");
  if (strip_cr(line) != "id,attribute,value") {
    fail_line(path, 1, "malformed header, expected 'id,attribute,value'");
  }
  AttributeTable table;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 3) {
      fail_line(path, lineno, "expected 3 cells, got " + std::to_string(cells.size()));
    }
    AttributeRow row;
    row.id = cells[0];
    row.attribute = cells[1];
    if (row.id.empty()) fail_line(path, lineno, "empty id");
    if (row.attribute.empty()) fail_line(path, lineno, "empty attribute name");
    row.value = parse_f64_cell(cells[2], path, lineno);
    if (!std::isfinite(row.value)) fail_line(path, lineno, "non-finite value");
    if (!seen.insert({row.id, row.attribute}).second) {
      fail_line(path, lineno, "duplicate (id, attribute) pair ('" + row.id + "', '" +
                                  row.attribute + "')");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::pair<StyleEmbedding, double>> join_attributes(
    const EmbeddingCorpus& corpus, const AttributeTable& table, const std::string& attribute) {
  std::unordered_map<std::string, double> labeled;
  bool attribute_seen = false;
  for (const AttributeRow& row : table.rows) {
    if (row.attribute != attribute) continue;
    attribute_seen = true;
    labeled.emplace(row.id, row.value);
  }
  if (!attribute_seen) {
    throw std::invalid_argument("attribute '" + attribute + "' absent from attribute table");
  }

  std::vector<std::pair<StyleEmbedding, double>> pairs;
  std::size_t matched = 0;
  for (const StyleEmbedding& e : corpus.embeddings) {
    const auto it = labeled.find(e.id);
    if (it == labeled.end()) continue;
    pairs.emplace_back(e, it->second);
    ++matched;
  }
  if (matched != labeled.size()) {
    for (const auto& [id, value] : labeled) {
      bool found = false;
      for (const StyleEmbedding& e : corpus.embeddings) {
        if (e.id == id) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw std::invalid_argument("attribute table references id '" + id +
                                    "' not present in the corpus");
      }
    }
  }
  return pairs;
}

}  // namespace lombard
