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

#include "lombard/toy_tts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "lombard/binio.hpp"
#include "lombard/duration.hpp"
#include "lombard/rng.hpp"

namespace lombard {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974;
constexpr std::uint64_t kTrainTag = 0x747261696e;
constexpr std::uint64_t kMaskTag = 0x6d61736b;
constexpr std::uint64_t kPatternTag = 0x70617474;
constexpr std::uint64_t kSampleTag = 0x73616d70;
constexpr std::uint64_t kSynthTag = 0x73796e74;

constexpr double kFlowTimeMargin = 1e-9;

void validate_config(const ModelConfig& config) {
  if (config.channels == 0 || config.hidden == 0 || config.blocks == 0 ||
      config.char_embed == 0 || config.time_embed == 0 || config.style_dim == 0 ||
      config.encoder_hidden == 0) {
    throw std::invalid_argument("model config dimensions must be positive");
  }
  if (config.freeze_boundary > config.blocks) {
    throw std::invalid_argument("freeze boundary cannot exceed the block count");
  }
}

Linear make_linear(std::size_t out, std::size_t in) {
  Linear l;
  l.out = out;
  l.in = in;
  l.w.assign(out * in, 0.0);
  l.b.assign(out, 0.0);
  return l;
}

void init_linear_weights(Linear& l, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
  for (double& v : l.w) v = rng.normal(0.0, scale);
}

// Allocates every tensor at its configured shape, all zeros.
TtsModel make_model(const ModelConfig& config) {
  validate_config(config);
  TtsModel model;
  model.config = config;
  const std::size_t feature =
      2 * config.channels + config.char_embed + config.time_embed;
  model.encoder.frame_proj = make_linear(config.encoder_hidden, config.channels);
  model.encoder.pool_proj = make_linear(config.style_dim, 2 * config.encoder_hidden);
  model.field.in_proj = make_linear(config.hidden, feature);
  model.field.blocks.resize(config.blocks);
  for (Block& block : model.field.blocks) {
    block.l1 = make_linear(config.hidden, config.hidden);
    block.l2 = make_linear(config.hidden, config.hidden);
  }
  model.field.film.resize(config.blocks - config.freeze_boundary);
  for (FilmHead& head : model.field.film) {
    head.gamma = make_linear(config.hidden, config.style_dim);
    head.beta = make_linear(config.hidden, config.style_dim);
  }
  model.field.out_proj = make_linear(config.channels, config.hidden);
  model.field.char_table.assign(kAlphabetSize * config.char_embed, 0.0);
  model.field.time_proj = make_linear(config.time_embed, 1);
  return model;
}

template <typename LinearT, typename Fn>
void visit_linear(const std::string& base, LinearT& l, const Fn& fn) {
  fn(base + ".w", l.w, std::vector<std::size_t>{l.out, l.in});
  fn(base + ".b", l.b, std::vector<std::size_t>{l.out});
}

template <typename ModelT, typename Fn>
void visit_tensors(ModelT& model, const Fn& fn) {
  visit_linear("enc.frame_proj", model.encoder.frame_proj, fn);
  visit_linear("enc.pool_proj", model.encoder.pool_proj, fn);
  visit_linear("field.in_proj", model.field.in_proj, fn);
  for (std::size_t i = 0; i < model.field.blocks.size(); ++i) {
    const std::string base = "field.block" + std::to_string(i);
    visit_linear(base + ".l1", model.field.blocks[i].l1, fn);
    visit_linear(base + ".l2", model.field.blocks[i].l2, fn);
  }
  for (std::size_t i = 0; i < model.field.film.size(); ++i) {
    const std::string base =
        "field.film" + std::to_string(model.config.freeze_boundary + i);
    visit_linear(base + ".gamma", model.field.film[i].gamma, fn);
    visit_linear(base + ".beta", model.field.film[i].beta, fn);
  }
  visit_linear("field.out_proj", model.field.out_proj, fn);
  fn("field.char_table", model.field.char_table,
     std::vector<std::size_t>{kAlphabetSize, model.config.char_embed});
  visit_linear("field.time_proj", model.field.time_proj, fn);
}

void linear_forward(const Linear& l, const double* x, double* y) {
  for (std::size_t i = 0; i < l.out; ++i) {
    const double* row = &l.w[i * l.in];
    double acc = l.b[i];
    for (std::size_t j = 0; j < l.in; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

struct FieldDims {
  std::size_t channels = 0;
  std::size_t hidden = 0;
  std::size_t char_embed = 0;
  std::size_t time_embed = 0;
  std::size_t feature = 0;
  std::size_t blocks = 0;
  std::size_t boundary = 0;
  std::size_t style_dim = 0;
};

FieldDims field_dims(const VectorFieldParams& field) {
  FieldDims d;
  d.hidden = field.in_proj.out;
  d.feature = field.in_proj.in;
  d.channels = field.out_proj.out;
  d.time_embed = field.time_proj.out;
  d.blocks = field.blocks.size();
  if (d.hidden == 0 || d.channels == 0 || d.time_embed == 0 || d.blocks == 0 ||
      field.char_table.size() % kAlphabetSize != 0 ||
      field.char_table.empty() || field.film.size() > d.blocks) {
    throw std::invalid_argument("vector field parameter shapes are inconsistent");
  }
  d.char_embed = field.char_table.size() / kAlphabetSize;
  d.boundary = d.blocks - field.film.size();
  d.style_dim = field.film.empty() ? 0 : field.film.front().gamma.in;
  bool ok = d.feature == 2 * d.channels + d.char_embed + d.time_embed &&
            field.out_proj.in == d.hidden && field.time_proj.in == 1;
  for (const Block& block : field.blocks) {
    ok = ok && block.l1.out == d.hidden && block.l1.in == d.hidden &&
         block.l2.out == d.hidden && block.l2.in == d.hidden;
  }
  for (const FilmHead& head : field.film) {
    ok = ok && head.gamma.out == d.hidden && head.gamma.in == d.style_dim &&
         head.beta.out == d.hidden && head.beta.in == d.style_dim;
  }
  if (!ok) throw std::invalid_argument("vector field parameter shapes are inconsistent");
  return d;
}

struct FieldCache {
  std::size_t frames = 0;
  std::vector<double> time_vec;            // time_embed
  std::vector<double> input;               // frames x feature
  std::vector<std::vector<double>> h;      // blocks + 1 layers of frames x hidden
  std::vector<std::vector<double>> u;      // tanh activations per block
  std::vector<std::vector<double>> y;      // pre-FiLM block outputs
  std::vector<std::vector<double>> gamma;  // per FiLM head, hidden
  std::vector<std::vector<double>> beta;
  std::vector<double> v;                   // frames x channels
};

void field_forward(const VectorFieldParams& field, const FieldDims& d,
                   const std::vector<double>& xt, const std::vector<double>& ctx,
                   const CharSequence& chars, const std::vector<double>& style,
                   double t, bool film_active, FieldCache* cache) {
  const std::size_t frames = chars.symbols.size();
  cache->frames = frames;
  cache->time_vec.resize(d.time_embed);
  for (std::size_t j = 0; j < d.time_embed; ++j) {
    cache->time_vec[j] = field.time_proj.w[j] * t + field.time_proj.b[j];
  }

  const bool use_film = film_active && !field.film.empty();
  cache->gamma.assign(field.film.size(), {});
  cache->beta.assign(field.film.size(), {});
  if (use_film) {
    for (std::size_t i = 0; i < field.film.size(); ++i) {
      cache->gamma[i].resize(d.hidden);
      cache->beta[i].resize(d.hidden);
      linear_forward(field.film[i].gamma, style.data(), cache->gamma[i].data());
      for (double& g : cache->gamma[i]) g += 1.0;
      linear_forward(field.film[i].beta, style.data(), cache->beta[i].data());
    }
  }

  cache->input.resize(frames * d.feature);
  for (std::size_t tt = 0; tt < frames; ++tt) {
    double* in = &cache->input[tt * d.feature];
    const double* xrow = &xt[tt * d.channels];
    const double* crow = &ctx[tt * d.channels];
    std::copy(xrow, xrow + d.channels, in);
    std::copy(crow, crow + d.channels, in + d.channels);
    const double* embed = &field.char_table[chars.symbols[tt] * d.char_embed];
    std::copy(embed, embed + d.char_embed, in + 2 * d.channels);
    std::copy(cache->time_vec.begin(), cache->time_vec.end(),
              in + 2 * d.channels + d.char_embed);
  }

  cache->h.assign(d.blocks + 1, std::vector<double>(frames * d.hidden));
  cache->u.assign(d.blocks, std::vector<double>(frames * d.hidden));
  cache->y.assign(d.blocks, std::vector<double>(frames * d.hidden));
  for (std::size_t tt = 0; tt < frames; ++tt) {
    linear_forward(field.in_proj, &cache->input[tt * d.feature],
                   &cache->h[0][tt * d.hidden]);
  }

  std::vector<double> pre(d.hidden);
  for (std::size_t bi = 0; bi < d.blocks; ++bi) {
    const Block& block = field.blocks[bi];
    const bool has_film = use_film && bi >= d.boundary;
    for (std::size_t tt = 0; tt < frames; ++tt) {
      const double* hin = &cache->h[bi][tt * d.hidden];
      double* act = &cache->u[bi][tt * d.hidden];
      double* out = &cache->y[bi][tt * d.hidden];
      linear_forward(block.l1, hin, pre.data());
      for (std::size_t j = 0; j < d.hidden; ++j) act[j] = std::tanh(pre[j]);
      linear_forward(block.l2, act, out);
      for (std::size_t j = 0; j < d.hidden; ++j) out[j] += hin[j];
      double* next = &cache->h[bi + 1][tt * d.hidden];
      if (has_film) {
        const std::vector<double>& g = cache->gamma[bi - d.boundary];
        const std::vector<double>& b = cache->beta[bi - d.boundary];
        for (std::size_t j = 0; j < d.hidden; ++j) next[j] = g[j] * out[j] + b[j];
      } else {
        std::copy(out, out + d.hidden, next);
      }
    }
  }

  cache->v.resize(frames * d.channels);
  for (std::size_t tt = 0; tt < frames; ++tt) {
    linear_forward(field.out_proj, &cache->h[d.blocks][tt * d.hidden],
                   &cache->v[tt * d.channels]);
  }
}

// Masked mean squared error against the flow target and, when grad is given,
// full backpropagation through the cached forward pass. Gradients accumulate.
double field_backward(const VectorFieldParams& field, const FieldDims& d,
                      const FieldCache& cache, const CharSequence& chars,
                      const std::vector<double>& style,
                      const std::vector<double>& target,
                      const std::vector<std::uint8_t>& mask, double t,
                      bool film_active, std::size_t masked,
                      VectorFieldParams* grad, std::vector<double>* style_grad) {
  const std::size_t frames = cache.frames;
  const double norm = 1.0 / (static_cast<double>(masked) * static_cast<double>(d.channels));
  double loss = 0.0;
  std::vector<double> dv(frames * d.channels, 0.0);
  for (std::size_t tt = 0; tt < frames; ++tt) {
    if (!mask[tt]) continue;
    for (std::size_t c = 0; c < d.channels; ++c) {
      const double diff = cache.v[tt * d.channels + c] - target[tt * d.channels + c];
      loss += diff * diff;
      dv[tt * d.channels + c] = 2.0 * diff * norm;
    }
  }
  loss *= norm;
  if (grad == nullptr) return loss;

  std::vector<double> dh(frames * d.hidden, 0.0);
  for (std::size_t tt = 0; tt < frames; ++tt) {
    const double* dvr = &dv[tt * d.channels];
    const double* top = &cache.h[d.blocks][tt * d.hidden];
    double* dhr = &dh[tt * d.hidden];
    for (std::size_t i = 0; i < d.channels; ++i) {
      grad->out_proj.b[i] += dvr[i];
      double* wrow = &grad->out_proj.w[i * d.hidden];
      const double* frow = &field.out_proj.w[i * d.hidden];
      for (std::size_t j = 0; j < d.hidden; ++j) {
        wrow[j] += dvr[i] * top[j];
        dhr[j] += frow[j] * dvr[i];
      }
    }
  }

  const bool use_film = film_active && !field.film.empty();
  std::vector<double> dy(d.hidden), da(d.hidden), dhin(d.hidden);
  for (std::size_t bi = d.blocks; bi-- > 0;) {
    const Block& block = field.blocks[bi];
    Block& gblock = grad->blocks[bi];
    const bool has_film = use_film && bi >= d.boundary;
    std::vector<double> dgamma, dbeta;
    if (has_film) {
      dgamma.assign(d.hidden, 0.0);
      dbeta.assign(d.hidden, 0.0);
    }
    for (std::size_t tt = 0; tt < frames; ++tt) {
      double* dout = &dh[tt * d.hidden];
      const double* out = &cache.y[bi][tt * d.hidden];
      const double* act = &cache.u[bi][tt * d.hidden];
      const double* hin = &cache.h[bi][tt * d.hidden];
      if (has_film) {
        const std::vector<double>& g = cache.gamma[bi - d.boundary];
        for (std::size_t j = 0; j < d.hidden; ++j) {
          dgamma[j] += dout[j] * out[j];
          dbeta[j] += dout[j];
          dy[j] = dout[j] * g[j];
        }
      } else {
        std::copy(dout, dout + d.hidden, dy.begin());
      }
      for (std::size_t i = 0; i < d.hidden; ++i) {
        gblock.l2.b[i] += dy[i];
        double* wrow = &gblock.l2.w[i * d.hidden];
        for (std::size_t j = 0; j < d.hidden; ++j) wrow[j] += dy[i] * act[j];
      }
      for (std::size_t j = 0; j < d.hidden; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d.hidden; ++i) {
          acc += block.l2.w[i * d.hidden + j] * dy[i];
        }
        da[j] = acc * (1.0 - act[j] * act[j]);
      }
      for (std::size_t i = 0; i < d.hidden; ++i) {
        gblock.l1.b[i] += da[i];
        double* wrow = &gblock.l1.w[i * d.hidden];
        for (std::size_t j = 0; j < d.hidden; ++j) wrow[j] += da[i] * hin[j];
      }
      for (std::size_t j = 0; j < d.hidden; ++j) {
        double acc = dy[j];
        for (std::size_t i = 0; i < d.hidden; ++i) {
          acc += block.l1.w[i * d.hidden + j] * da[i];
        }
        dhin[j] = acc;
      }
      std::copy(dhin.begin(), dhin.end(), dout);
    }
    if (has_film) {
      const std::size_t fi = bi - d.boundary;
      const FilmHead& head = field.film[fi];
      FilmHead& ghead = grad->film[fi];
      for (std::size_t i = 0; i < d.hidden; ++i) {
        ghead.gamma.b[i] += dgamma[i];
        ghead.beta.b[i] += dbeta[i];
        double* gw = &ghead.gamma.w[i * d.style_dim];
        double* bw = &ghead.beta.w[i * d.style_dim];
        for (std::size_t j = 0; j < d.style_dim; ++j) {
          gw[j] += dgamma[i] * style[j];
          bw[j] += dbeta[i] * style[j];
        }
      }
      if (style_grad != nullptr) {
        for (std::size_t j = 0; j < d.style_dim; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < d.hidden; ++i) {
            acc += head.gamma.w[i * d.style_dim + j] * dgamma[i] +
                   head.beta.w[i * d.style_dim + j] * dbeta[i];
          }
          (*style_grad)[j] += acc;
        }
      }
    }
  }

  std::vector<double> dtime(d.time_embed, 0.0);
  for (std::size_t tt = 0; tt < frames; ++tt) {
    const double* dhr = &dh[tt * d.hidden];
    const double* in = &cache.input[tt * d.feature];
    for (std::size_t i = 0; i < d.hidden; ++i) {
      grad->in_proj.b[i] += dhr[i];
      double* wrow = &grad->in_proj.w[i * d.feature];
      for (std::size_t j = 0; j < d.feature; ++j) wrow[j] += dhr[i] * in[j];
    }
    double* char_grad = &grad->char_table[chars.symbols[tt] * d.char_embed];
    for (std::size_t j = 2 * d.channels; j < d.feature; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d.hidden; ++i) {
        acc += field.in_proj.w[i * d.feature + j] * dhr[i];
      }
      if (j < 2 * d.channels + d.char_embed) {
        char_grad[j - 2 * d.channels] += acc;
      } else {
        dtime[j - 2 * d.channels - d.char_embed] += acc;
      }
    }
  }
  for (std::size_t j = 0; j < d.time_embed; ++j) {
    grad->time_proj.w[j] += dtime[j] * t;
    grad->time_proj.b[j] += dtime[j];
  }
  return loss;
}

struct CfmProblem {
  FieldDims dims;
  std::size_t frames = 0;
  std::size_t masked = 0;
  std::vector<double> xt;
  std::vector<double> ctx;
  std::vector<double> target;
};

// Shared validation plus the x_t / context / target construction both the
// loss and its gradient run on.
CfmProblem prepare_cfm(const VectorFieldParams& field, const CfmBatch& batch,
                       const ToyMel& x0, double t, bool film_active) {
  CfmProblem p;
  p.dims = field_dims(field);
  validate_mel(batch.x1);
  validate_mel(x0);
  if (batch.x1.channels != p.dims.channels) {
    throw std::invalid_argument("sample channel count does not match the field");
  }
  if (x0.frames != batch.x1.frames || x0.channels != batch.x1.channels) {
    throw std::invalid_argument("x0 shape must match x1");
  }
  p.frames = batch.x1.frames;
  if (batch.chars.symbols.size() != p.frames) {
    throw std::invalid_argument("character sequence length must match the frame count");
  }
  for (std::uint32_t sym : batch.chars.symbols) {
    if (sym >= kAlphabetSize) throw std::invalid_argument("character symbol out of range");
  }
  if (batch.mask.size() != p.frames) {
    throw std::invalid_argument("mask length must match the frame count");
  }
  for (std::uint8_t m : batch.mask) {
    if (m) ++p.masked;
  }
  if (p.masked == 0) throw std::invalid_argument("mask selects no frames");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("flow time must lie in (0, 1)");
  if (film_active && !field.film.empty()) {
    if (batch.style.size() != p.dims.style_dim) {
      throw std::invalid_argument("style embedding length does not match the FiLM heads");
    }
    for (double s : batch.style) {
      if (!std::isfinite(s)) throw std::invalid_argument("style embedding has non-finite values");
    }
  }
  const std::size_t n = p.frames * p.dims.channels;
  p.xt.resize(n);
  p.target.resize(n);
  p.ctx.assign(n, 0.0);
  for (std::size_t tt = 0; tt < p.frames; ++tt) {
    for (std::size_t c = 0; c < p.dims.channels; ++c) {
      const std::size_t idx = tt * p.dims.channels + c;
      p.xt[idx] = (1.0 - t) * x0.values[idx] + t * batch.x1.values[idx];
      p.target[idx] = batch.x1.values[idx] - x0.values[idx];
      if (!batch.mask[tt]) p.ctx[idx] = batch.x1.values[idx];
    }
  }
  return p;
}

void require_same_shape(const VectorFieldParams& field, const VectorFieldParams& grad) {
  auto same = [](const Linear& a, const Linear& b) {
    return a.out == b.out && a.in == b.in && a.w.size() == b.w.size() &&
           a.b.size() == b.b.size();
  };
  bool ok = same(field.in_proj, grad.in_proj) && same(field.out_proj, grad.out_proj) &&
            same(field.time_proj, grad.time_proj) &&
            field.blocks.size() == grad.blocks.size() &&
            field.film.size() == grad.film.size() &&
            field.char_table.size() == grad.char_table.size();
  for (std::size_t i = 0; ok && i < field.blocks.size(); ++i) {
    ok = same(field.blocks[i].l1, grad.blocks[i].l1) &&
         same(field.blocks[i].l2, grad.blocks[i].l2);
  }
  for (std::size_t i = 0; ok && i < field.film.size(); ++i) {
    ok = same(field.film[i].gamma, grad.film[i].gamma) &&
         same(field.film[i].beta, grad.film[i].beta);
  }
  if (!ok) throw std::invalid_argument("gradient container shape does not match the field");
}

struct EncoderCache {
  std::size_t frames = 0;
  std::vector<double> hidden;  // frames x encoder_hidden
  std::vector<double> mean;    // encoder_hidden
  std::vector<double> stdev;   // encoder_hidden
  std::vector<double> pooled;  // 2 * encoder_hidden
};

std::vector<double> encode_style_cached(const StyleEncoderParams& params,
                                        const ToyMel& mel, EncoderCache* cache) {
  validate_mel(mel);
  if (mel.frames < 2) {
    throw std::invalid_argument("style reference needs at least 2 frames");
  }
  if (params.frame_proj.in != mel.channels) {
    throw std::invalid_argument("style reference channel count does not match the encoder");
  }
  if (params.pool_proj.in != 2 * params.frame_proj.out) {
    throw std::invalid_argument("style encoder parameter shapes are inconsistent");
  }
  const std::size_t frames = mel.frames;
  const std::size_t width = params.frame_proj.out;
  std::vector<double> hidden(frames * width);
  for (std::size_t t = 0; t < frames; ++t) {
    linear_forward(params.frame_proj, mel.row(t), &hidden[t * width]);
  }

  // Sorting each channel column before summing makes the pooled statistics
  // bitwise invariant to frame order, not just invariant up to rounding.
  std::vector<double> pooled(2 * width);
  std::vector<double> mean(width), stdev(width);
  std::vector<double> column(frames);
  for (std::size_t j = 0; j < width; ++j) {
    for (std::size_t t = 0; t < frames; ++t) column[t] = hidden[t * width + j];
    std::sort(column.begin(), column.end());
    double m, s;
    if (column.front() == column.back()) {
      // A constant column has an exact mean and exactly zero deviation.
      m = column.front();
      s = 0.0;
    } else {
      double sum = 0.0;
      for (double v : column) sum += v;
      m = sum / static_cast<double>(frames);
      double ss = 0.0;
      for (double v : column) {
        const double dev = v - m;
        ss += dev * dev;
      }
      s = std::sqrt(ss / static_cast<double>(frames - 1));
    }
    mean[j] = m;
    stdev[j] = s;
    pooled[j] = m;
    pooled[width + j] = s;
  }

  std::vector<double> out(params.pool_proj.out);
  linear_forward(params.pool_proj, pooled.data(), out.data());
  if (cache != nullptr) {
    cache->frames = frames;
    cache->hidden = std::move(hidden);
    cache->mean = std::move(mean);
    cache->stdev = std::move(stdev);
    cache->pooled = std::move(pooled);
  }
  return out;
}

void encoder_backward(const StyleEncoderParams& params, const ToyMel& mel,
                      const EncoderCache& cache, const std::vector<double>& de,
                      StyleEncoderParams* grad) {
  const std::size_t frames = cache.frames;
  const std::size_t width = params.frame_proj.out;
  const std::size_t pooled_width = 2 * width;
  std::vector<double> dpooled(pooled_width, 0.0);
  for (std::size_t i = 0; i < params.pool_proj.out; ++i) {
    grad->pool_proj.b[i] += de[i];
    double* wrow = &grad->pool_proj.w[i * pooled_width];
    const double* frow = &params.pool_proj.w[i * pooled_width];
    for (std::size_t j = 0; j < pooled_width; ++j) {
      wrow[j] += de[i] * cache.pooled[j];
      dpooled[j] += frow[j] * de[i];
    }
  }
  std::vector<double> dhidden(frames * width);
  for (std::size_t j = 0; j < width; ++j) {
    const double dmean = dpooled[j];
    const double dstd = dpooled[width + j];
    const double s = cache.stdev[j];
    for (std::size_t t = 0; t < frames; ++t) {
      double g = dmean / static_cast<double>(frames);
      if (s > 0.0) {
        g += dstd * (cache.hidden[t * width + j] - cache.mean[j]) /
             (static_cast<double>(frames - 1) * s);
      }
      dhidden[t * width + j] = g;
    }
  }
  for (std::size_t t = 0; t < frames; ++t) {
    const double* mrow = mel.row(t);
    const double* dr = &dhidden[t * width];
    for (std::size_t i = 0; i < width; ++i) {
      grad->frame_proj.b[i] += dr[i];
      double* wrow = &grad->frame_proj.w[i * params.frame_proj.in];
      for (std::size_t c = 0; c < params.frame_proj.in; ++c) {
        wrow[c] += dr[i] * mrow[c];
      }
    }
  }
}

struct TensorRef {
  std::string name;
  std::vector<double>* data = nullptr;
};

std::vector<TensorRef> collect_tensors(TtsModel& model) {
  std::vector<TensorRef> refs;
  for_each_tensor(model, [&](const std::string& name, std::vector<double>& data,
                             const std::vector<std::size_t>&) {
    refs.push_back({name, &data});
  });
  return refs;
}

bool trains_in_stage(const std::string& name, TrainStage stage, std::size_t boundary) {
  if (stage == TrainStage::pretrain) {
    return name.rfind("field.film", 0) != 0;
  }
  if (name.rfind("field.block", 0) == 0) {
    const std::size_t index = std::stoul(name.substr(11));
    return index >= boundary;
  }
  return true;
}

}  // namespace

CharSequence make_char_sequence(const std::string& text, std::size_t frames) {
  CharSequence seq;
  seq.symbols.reserve(frames);
  for (char raw : text) {
    if (seq.symbols.size() == frames) break;
    std::uint32_t sym = kUnknownSymbol;
    if (raw >= 'a' && raw <= 'z') {
      sym = 1 + static_cast<std::uint32_t>(raw - 'a');
    } else if (raw >= 'A' && raw <= 'Z') {
      sym = 1 + static_cast<std::uint32_t>(raw - 'A');
    } else if (raw == ' ') {
      sym = kSpaceSymbol;
    }
    seq.symbols.push_back(sym);
  }
  seq.symbols.resize(frames, kFillerSymbol);
  return seq;
}

TtsModel init_model(const ModelConfig& config, std::uint64_t seed) {
  TtsModel model = make_model(config);
  Rng rng(mix_seed(seed, kInitTag));
  init_linear_weights(model.encoder.frame_proj, rng);
  init_linear_weights(model.encoder.pool_proj, rng);
  init_linear_weights(model.field.in_proj, rng);
  for (Block& block : model.field.blocks) {
    init_linear_weights(block.l1, rng);
    init_linear_weights(block.l2, rng);
  }
  for (double& v : model.field.char_table) v = rng.normal(0.0, 0.5);
  init_linear_weights(model.field.out_proj, rng);
  init_linear_weights(model.field.time_proj, rng);
  return model;
}

TtsModel zeros_like(const TtsModel& model) {
  TtsModel zeros = model;
  for_each_tensor(zeros, [](const std::string&, std::vector<double>& data,
                            const std::vector<std::size_t>&) {
    std::fill(data.begin(), data.end(), 0.0);
  });
  return zeros;
}

void for_each_tensor(TtsModel& model, const TensorVisitor& fn) {
  visit_tensors(model, fn);
}

void for_each_tensor(const TtsModel& model, const ConstTensorVisitor& fn) {
  visit_tensors(model, fn);
}

std::vector<double> encode_style(const StyleEncoderParams& params, const ToyMel& mel) {
  return encode_style_cached(params, mel, nullptr);
}

void encode_style_grad(const StyleEncoderParams& params, const ToyMel& mel,
                       const std::vector<double>& embedding_grad,
                       StyleEncoderParams* grad) {
  if (grad == nullptr) throw std::invalid_argument("gradient output must not be null");
  if (embedding_grad.size() != params.pool_proj.out) {
    throw std::invalid_argument("embedding gradient length does not match the encoder");
  }
  if (grad->frame_proj.out != params.frame_proj.out ||
      grad->frame_proj.in != params.frame_proj.in ||
      grad->pool_proj.out != params.pool_proj.out ||
      grad->pool_proj.in != params.pool_proj.in) {
    throw std::invalid_argument("gradient container shape does not match the encoder");
  }
  EncoderCache cache;
  encode_style_cached(params, mel, &cache);
  encoder_backward(params, mel, cache, embedding_grad, grad);
}

ToyMel film_apply(const ToyMel& block_output, const std::vector<double>& gamma,
                  const std::vector<double>& beta) {
  validate_mel(block_output);
  if (gamma.size() != block_output.channels || beta.size() != block_output.channels) {
    throw std::invalid_argument("FiLM parameter length must match the channel count");
  }
  ToyMel out = block_output;
  for (std::size_t t = 0; t < out.frames; ++t) {
    for (std::size_t c = 0; c < out.channels; ++c) {
      out.at(t, c) = gamma[c] * block_output.at(t, c) + beta[c];
    }
  }
  return out;
}

ToyMel formant_shift_augment(const ToyMel& mel, double factor) {
  validate_mel(mel);
  if (!std::isfinite(factor) || factor <= 0.0) {
    throw std::invalid_argument("formant shift factor must be positive");
  }
  ToyMel out = mel;
  const std::size_t channels = mel.channels;
  const double top = static_cast<double>(channels - 1);
  for (std::size_t t = 0; t < mel.frames; ++t) {
    const double* src = mel.row(t);
    double* dst = out.row(t);
    for (std::size_t j = 0; j < channels; ++j) {
      const double pos = static_cast<double>(j) / factor;
      if (pos >= top) {
        dst[j] = src[channels - 1];
        continue;
      }
      const std::size_t lo = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(lo);
      dst[j] = (1.0 - frac) * src[lo] + frac * src[lo + 1];
    }
  }
  return out;
}

std::vector<std::uint8_t> mask_spans(std::size_t frames, double ratio, std::uint64_t seed) {
  if (frames == 0) throw std::invalid_argument("mask needs at least one frame");
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("mask ratio must lie in [0, 1]");
  }
  std::vector<std::uint8_t> mask(frames, 0);
  const std::size_t span = std::min(
      frames, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(frames))));
  if (span == 0) return mask;
  Rng rng(mix_seed(seed, kMaskTag));
  const std::size_t start =
      static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(frames - span + 1)));
  std::fill(mask.begin() + static_cast<std::ptrdiff_t>(start),
            mask.begin() + static_cast<std::ptrdiff_t>(start + span), std::uint8_t{1});
  return mask;
}

double cfm_loss(const VectorFieldParams& field, const CfmBatch& batch, const ToyMel& x0,
                double t, bool film_active) {
  const CfmProblem p = prepare_cfm(field, batch, x0, t, film_active);
  FieldCache cache;
  field_forward(field, p.dims, p.xt, p.ctx, batch.chars, batch.style, t, film_active,
                &cache);
  return field_backward(field, p.dims, cache, batch.chars, batch.style, p.target,
                        batch.mask, t, film_active, p.masked, nullptr, nullptr);
}

double cfm_loss_grad(const VectorFieldParams& field, const CfmBatch& batch,
                     const ToyMel& x0, double t, bool film_active,
                     VectorFieldParams* grad, std::vector<double>* style_grad) {
  if (grad == nullptr) throw std::invalid_argument("gradient output must not be null");
  const CfmProblem p = prepare_cfm(field, batch, x0, t, film_active);
  require_same_shape(field, *grad);
  if (style_grad != nullptr && style_grad->size() != p.dims.style_dim) {
    throw std::invalid_argument("style gradient length does not match the FiLM heads");
  }
  FieldCache cache;
  field_forward(field, p.dims, p.xt, p.ctx, batch.chars, batch.style, t, film_active,
                &cache);
  return field_backward(field, p.dims, cache, batch.chars, batch.style, p.target,
                        batch.mask, t, film_active, p.masked, grad,
                        film_active ? style_grad : nullptr);
}

SyntheticTask::SyntheticTask(const ModelConfig& config, std::uint64_t seed,
                             std::size_t size, std::size_t frames, std::size_t ref_frames)
    : config_(config), seed_(seed), size_(size), frames_(frames), ref_frames_(ref_frames) {
  validate_config(config);
  if (size_ == 0) throw std::invalid_argument("synthetic task needs at least one sample");
  if (frames_ == 0) throw std::invalid_argument("synthetic task needs at least one frame");
  if (ref_frames_ < 2) {
    throw std::invalid_argument("style references need at least 2 frames");
  }
  char_pattern_.assign(kAlphabetSize * config_.channels, 0.0);
  Rng rng(mix_seed(seed_, kPatternTag));
  for (std::size_t sym = 1; sym < kAlphabetSize; ++sym) {
    double* row = &char_pattern_[sym * config_.channels];
    double mean = 0.0;
    for (std::size_t c = 0; c < config_.channels; ++c) {
      row[c] = rng.uniform(-0.4, 0.4);
      mean += row[c];
    }
    mean /= static_cast<double>(config_.channels);
    for (std::size_t c = 0; c < config_.channels; ++c) row[c] -= mean;
  }
}

double SyntheticTask::style_scalar_for(std::size_t index) {
  return static_cast<double>(index % 3) - 1.0;
}

TrainSample SyntheticTask::sample(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("sample index out of range");
  Rng rng(mix_seed(seed_, kSampleTag, index));
  const double scalar = style_scalar_for(index);
  TrainSample out;
  out.style_scalar = scalar;
  out.chars.symbols.assign(frames_, kFillerSymbol);
  const std::size_t text_len = frames_ - frames_ / 4;
  for (std::size_t i = 0; i < text_len; ++i) {
    const std::uint64_t pick = rng.below(27);
    out.chars.symbols[i] =
        pick == 26 ? kSpaceSymbol : static_cast<std::uint32_t>(1 + pick);
  }
  out.x1 = ToyMel(frames_, config_.channels);
  for (std::size_t t = 0; t < frames_; ++t) {
    const double* pattern = &char_pattern_[out.chars.symbols[t] * config_.channels];
    for (std::size_t c = 0; c < config_.channels; ++c) {
      out.x1.at(t, c) = scalar + pattern[c] + 0.05 * rng.normal();
    }
  }
  out.style_ref = ToyMel(ref_frames_, config_.channels);
  for (double& v : out.style_ref.values) v = scalar + 0.1 * rng.normal();
  return out;
}

TrainResult train(const TrainConfig& config, const SyntheticTask& task,
                  const TtsModel* pretrained) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (!(config.mask_ratio_min >= 0.0 && config.mask_ratio_min <= config.mask_ratio_max &&
        config.mask_ratio_max <= 1.0)) {
    throw std::invalid_argument("mask ratio range must satisfy 0 <= min <= max <= 1");
  }
  if (!(config.formant_min >= 0.8 && config.formant_min <= config.formant_max &&
        config.formant_max <= 1.25)) {
    throw std::invalid_argument("formant range must satisfy 0.8 <= min <= max <= 1.25");
  }
  const bool finetune = config.stage == TrainStage::finetune;
  if (finetune && pretrained == nullptr) {
    throw std::invalid_argument("finetuning needs a pretrained model");
  }
  if (!finetune && pretrained != nullptr) {
    throw std::invalid_argument("pretraining starts from a fresh model");
  }

  TrainResult result;
  result.model = finetune ? *pretrained : init_model(task.config(), config.seed);
  TtsModel& model = result.model;
  if (finetune && model.config.channels != task.config().channels) {
    throw std::invalid_argument("pretrained model does not match the task");
  }
  const FieldDims dims = field_dims(model.field);
  if (finetune && !model.field.film.empty() &&
      model.encoder.pool_proj.out != dims.style_dim) {
    throw std::invalid_argument("style encoder output does not match the FiLM heads");
  }
  const std::size_t channels = dims.channels;

  TtsModel grads = zeros_like(model);
  std::vector<TensorRef> params = collect_tensors(model);
  std::vector<TensorRef> grad_refs = collect_tensors(grads);
  struct AdamSlot {
    std::vector<double>* param;
    const std::vector<double>* grad;
    std::vector<double> m;
    std::vector<double> v;
  };
  std::vector<AdamSlot> slots;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!trains_in_stage(params[i].name, config.stage, model.config.freeze_boundary)) {
      continue;
    }
    AdamSlot slot;
    slot.param = params[i].data;
    slot.grad = grad_refs[i].data;
    slot.m.assign(params[i].data->size(), 0.0);
    slot.v.assign(params[i].data->size(), 0.0);
    slots.push_back(std::move(slot));
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  Rng rng(mix_seed(config.seed, kTrainTag));
  FieldCache cache;
  EncoderCache enc_cache;
  std::vector<double> xt, ctx_flat, target, style, style_grad;
  std::size_t adam_step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t start = 0; start < task.size(); start += config.batch_size) {
      const std::size_t stop = std::min(start + config.batch_size, task.size());
      for (const TensorRef& ref : grad_refs) {
        std::fill(ref.data->begin(), ref.data->end(), 0.0);
      }
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const TrainSample sample = task.sample(i);
        const std::size_t frames = sample.x1.frames;
        const double t =
            kFlowTimeMargin + rng.uniform() * (1.0 - 2.0 * kFlowTimeMargin);
        const double ratio = rng.uniform(config.mask_ratio_min, config.mask_ratio_max);
        std::vector<std::uint8_t> mask = mask_spans(frames, ratio, rng.bits());
        std::size_t masked = 0;
        for (std::uint8_t m : mask) {
          if (m) ++masked;
        }
        if (masked == 0) {
          mask[rng.below(frames)] = 1;
          masked = 1;
        }

        ToyMel context(frames, channels);
        for (std::size_t tt = 0; tt < frames; ++tt) {
          if (mask[tt]) continue;
          std::copy(sample.x1.row(tt), sample.x1.row(tt) + channels, context.row(tt));
        }
        if (finetune) {
          const double factor = rng.uniform(config.formant_min, config.formant_max);
          context = formant_shift_augment(context, factor);
        }

        const std::size_t n = frames * channels;
        xt.resize(n);
        target.resize(n);
        ToyMel x0(frames, channels);
        for (double& v : x0.values) v = rng.normal();
        for (std::size_t k = 0; k < n; ++k) {
          xt[k] = (1.0 - t) * x0.values[k] + t * sample.x1.values[k];
          target[k] = sample.x1.values[k] - x0.values[k];
        }

        if (finetune) {
          style = encode_style_cached(model.encoder, sample.style_ref, &enc_cache);
          style_grad.assign(style.size(), 0.0);
        } else {
          style.clear();
        }

        field_forward(model.field, dims, xt, context.values, sample.chars, style, t,
                      finetune, &cache);
        batch_loss += field_backward(model.field, dims, cache, sample.chars, style,
                                     target, mask, t, finetune, masked, &grads.field,
                                     finetune ? &style_grad : nullptr);
        if (finetune) {
          encoder_backward(model.encoder, sample.style_ref, enc_cache, style_grad,
                           &grads.encoder);
        }
      }

      const double inv = 1.0 / static_cast<double>(stop - start);
      batch_loss *= inv;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error(
            "training diverged: non-finite loss at epoch " + std::to_string(epoch) +
            ", step " + std::to_string(result.step_losses.size()));
      }
      for (const TensorRef& ref : grad_refs) {
        for (double& g : *ref.data) g *= inv;
      }

      ++adam_step;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_step));
      for (AdamSlot& slot : slots) {
        std::vector<double>& p = *slot.param;
        const std::vector<double>& g = *slot.grad;
        for (std::size_t k = 0; k < p.size(); ++k) {
          slot.m[k] = kBeta1 * slot.m[k] + (1.0 - kBeta1) * g[k];
          slot.v[k] = kBeta2 * slot.v[k] + (1.0 - kBeta2) * g[k] * g[k];
          const double mhat = slot.m[k] / bc1;
          const double vhat = slot.v[k] / bc2;
          p[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + kEps);
        }
      }
      result.step_losses.push_back(batch_loss);
    }
  }
  return result;
}

ToyMel synthesize(const TtsModel& model, const std::string& text,
                  const std::vector<double>& style, double speed, std::uint64_t seed,
                  double frame_rate, std::size_t euler_steps) {
  const FieldDims dims = field_dims(model.field);
  if (euler_steps == 0) throw std::invalid_argument("euler steps must be positive");
  if (!model.field.film.empty()) {
    if (style.size() != dims.style_dim) {
      throw std::invalid_argument("style embedding length does not match the FiLM heads");
    }
    for (double s : style) {
      if (!std::isfinite(s)) throw std::invalid_argument("style embedding has non-finite values");
    }
  }
  const std::size_t syllables = count_syllables(text);
  if (syllables == 0) throw std::invalid_argument("text has no syllables to time");
  const DurationSpec spec = target_duration(syllables, speed, 4.0, frame_rate);
  const std::size_t frames = spec.frames;
  const CharSequence chars = make_char_sequence(text, frames);

  Rng rng(mix_seed(seed, kSynthTag));
  std::vector<double> x(frames * dims.channels);
  for (double& v : x) v = rng.normal();
  const std::vector<double> ctx(frames * dims.channels, 0.0);

  const double dt = 1.0 / static_cast<double>(euler_steps);
  FieldCache cache;
  for (std::size_t step = 0; step < euler_steps; ++step) {
    const double t = static_cast<double>(step) / static_cast<double>(euler_steps);
    field_forward(model.field, dims, x, ctx, chars, style, t, true, &cache);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += dt * cache.v[k];
  }

  ToyMel out;
  out.frames = frames;
  out.channels = dims.channels;
  out.values = std::move(x);
  return out;
}

void save_checkpoint(const TtsModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out.write("TTTS", 4);
  write_u32le(out, 1);
  std::uint32_t count = 0;
  for_each_tensor(model, [&](const std::string&, const std::vector<double>&,
                             const std::vector<std::size_t>&) { ++count; });
  write_u32le(out, count);
  for_each_tensor(model, [&](const std::string& name, const std::vector<double>& data,
                             const std::vector<std::size_t>& dims) {
    write_u32le(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32le(out, static_cast<std::uint32_t>(dims.size()));
    std::size_t total = 1;
    for (std::size_t dim : dims) {
      write_u32le(out, static_cast<std::uint32_t>(dim));
      total *= dim;
    }
    if (total != data.size()) {
      throw std::runtime_error("tensor size does not match its shape: " + name);
    }
    for (double v : data) write_f32le(out, static_cast<float>(v));
  });
  if (!out) throw std::runtime_error("failed while writing " + path);
}

TtsModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  expect_magic(in, "TTTS", "toy TTS checkpoint");
  const std::uint32_t version = read_u32le(in, "checkpoint version");
  if (version != 1) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = read_u32le(in, "tensor count");
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> tensors;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t name_len = read_u32le(in, "tensor name length");
    std::string name(name_len, '\0');
    read_exact(in, name.data(), name_len, "tensor name");
    const std::uint32_t rank = read_u32le(in, "tensor rank");
    if (rank == 0 || rank > 2) {
      throw std::runtime_error("tensor has unsupported rank: " + name);
    }
    std::vector<std::size_t> dims(rank);
    std::size_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      dims[r] = read_u32le(in, "tensor dimension");
      if (dims[r] == 0) throw std::runtime_error("tensor has a zero dimension: " + name);
      total *= dims[r];
    }
    std::vector<double> data(total);
    for (std::size_t i = 0; i < total; ++i) {
      data[i] = static_cast<double>(read_f32le(in, "tensor data"));
    }
    if (!tensors.emplace(name, std::make_pair(std::move(dims), std::move(data))).second) {
      throw std::runtime_error("duplicate tensor in checkpoint: " + name);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("trailing bytes after checkpoint payload");
  }

  auto need = [&](const std::string& name, std::size_t rank)
      -> const std::pair<std::vector<std::size_t>, std::vector<double>>& {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw std::runtime_error("checkpoint is missing tensor: " + name);
    }
    if (it->second.first.size() != rank) {
      throw std::runtime_error("checkpoint tensor has unexpected shape: " + name);
    }
    return it->second;
  };

  ModelConfig config;
  const auto& frame_proj = need("enc.frame_proj.w", 2);
  config.encoder_hidden = frame_proj.first[0];
  config.channels = frame_proj.first[1];
  config.style_dim = need("enc.pool_proj.w", 2).first[0];
  config.hidden = need("field.in_proj.w", 2).first[0];
  const auto& char_table = need("field.char_table", 2);
  if (char_table.first[0] != kAlphabetSize) {
    throw std::runtime_error("checkpoint alphabet size is unsupported");
  }
  config.char_embed = char_table.first[1];
  config.time_embed = need("field.time_proj.w", 2).first[0];
  std::size_t blocks = 0;
  while (tensors.count("field.block" + std::to_string(blocks) + ".l1.w") != 0) ++blocks;
  if (blocks == 0) throw std::runtime_error("checkpoint has no residual blocks");
  config.blocks = blocks;
  std::size_t film_heads = 0;
  for (std::size_t i = 0; i < blocks; ++i) {
    if (tensors.count("field.film" + std::to_string(i) + ".gamma.w") != 0) ++film_heads;
  }
  config.freeze_boundary = blocks - film_heads;

  TtsModel model = make_model(config);
  std::size_t assigned = 0;
  for_each_tensor(model, [&](const std::string& name, std::vector<double>& data,
                             const std::vector<std::size_t>& dims) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw std::runtime_error("checkpoint is missing tensor: " + name);
    }
    if (it->second.first != dims) {
      throw std::runtime_error("checkpoint tensor has unexpected shape: " + name);
    }
    data = std::move(it->second.second);
    ++assigned;
  });
  if (assigned != tensors.size()) {
    throw std::runtime_error("checkpoint contains unknown tensors");
  }
  for_each_tensor(std::as_const(model),
                  [&](const std::string& name, const std::vector<double>& data,
                      const std::vector<std::size_t>&) {
                    for (double v : data) {
                      if (!std::isfinite(v)) {
                        throw std::runtime_error("checkpoint tensor has non-finite values: " +
                                                 name);
                      }
                    }
                  });
  return model;
}

}  // namespace lombard
