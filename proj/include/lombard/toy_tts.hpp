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

#ifndef LOMBARD_TOY_TTS_HPP_
#define LOMBARD_TOY_TTS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lombard/mel.hpp"

namespace lombard {

// Character alphabet: 0 is the filler used for padding, 1..26 are the
// lowercased letters, 27 is space, 28 stands in for anything else.
constexpr std::uint32_t kFillerSymbol = 0;
constexpr std::uint32_t kSpaceSymbol = 27;
constexpr std::uint32_t kUnknownSymbol = 28;
constexpr std::size_t kAlphabetSize = 29;

struct CharSequence {
  std::vector<std::uint32_t> symbols;
};

// Lowercases, maps to the alphabet above, and pads with filler to exactly
// `frames` symbols (truncating text longer than the frame budget).
CharSequence make_char_sequence(const std::string& text, std::size_t frames);

struct ModelConfig {
  std::size_t channels = 8;        // mel channels C
  std::size_t hidden = 16;         // residual block width
  std::size_t blocks = 4;
  std::size_t freeze_boundary = 2; // blocks below this index are frozen in finetune
  std::size_t char_embed = 8;
  std::size_t time_embed = 8;
  std::size_t style_dim = 16;      // embedding dimension D
  std::size_t encoder_hidden = 8;
};

struct Linear {
  std::size_t out = 0;
  std::size_t in = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
};

// Residual unit: y = x + l2(tanh(l1(x))).
struct Block {
  Linear l1;
  Linear l2;
};

// Per-conditioned-block FiLM head. The scale is 1 + gamma(e) so an all-zero
// head is exactly the identity.
struct FilmHead {
  Linear gamma;
  Linear beta;
};

struct StyleEncoderParams {
  Linear frame_proj;  // encoder_hidden x channels
  Linear pool_proj;   // style_dim x (2 * encoder_hidden)
};

struct VectorFieldParams {
  Linear in_proj;                  // hidden x (2*channels + char_embed + time_embed)
  std::vector<Block> blocks;       // size = config.blocks
  std::vector<FilmHead> film;      // size = blocks - freeze_boundary; film[i]
                                   // conditions block freeze_boundary + i
  Linear out_proj;                 // channels x hidden
  std::vector<double> char_table;  // kAlphabetSize x char_embed, row-major
  Linear time_proj;                // time_embed x 1
};

struct TtsModel {
  ModelConfig config;
  StyleEncoderParams encoder;
  VectorFieldParams field;
};

// Seeded deterministic initialization; FiLM heads start all-zero.
TtsModel init_model(const ModelConfig& config, std::uint64_t seed);

// Same shapes as `model`, all values zero. Used as a gradient container.
TtsModel zeros_like(const TtsModel& model);

// Visits every parameter tensor in a fixed order; names double as checkpoint
// tensor names and dims as checkpoint shapes.
using TensorVisitor =
    std::function<void(const std::string&, std::vector<double>&, const std::vector<std::size_t>&)>;
using ConstTensorVisitor = std::function<void(const std::string&, const std::vector<double>&,
                                              const std::vector<std::size_t>&)>;
void for_each_tensor(TtsModel& model, const TensorVisitor& fn);
void for_each_tensor(const TtsModel& model, const ConstTensorVisitor& fn);

// Linear frame projection, exact order-invariant mean/std statistics pooling
// (sample std, hence the 2-frame minimum), linear output projection.
std::vector<double> encode_style(const StyleEncoderParams& params, const ToyMel& mel);

// Backpropagates d loss / d embedding through encode_style, accumulating into
// *grad (shape of params). Pairs with cfm_loss_grad's style gradient to close
// the finetuning chain.
void encode_style_grad(const StyleEncoderParams& params, const ToyMel& mel,
                       const std::vector<double>& embedding_grad,
                       StyleEncoderParams* grad);

// out[t][c] = gamma[c] * in[t][c] + beta[c].
ToyMel film_apply(const ToyMel& block_output, const std::vector<double>& gamma,
                  const std::vector<double>& beta);

// Resamples each frame's channel axis at positions j / factor with linear
// interpolation, clamping to the edges. factor must lie in [0.8, 1.25].
ToyMel formant_shift_augment(const ToyMel& mel, double factor);

// One contiguous span of round(ratio * T) masked frames, start drawn
// uniformly from the seeded generator.
std::vector<std::uint8_t> mask_spans(std::size_t frames, double ratio, std::uint64_t seed);

struct CfmBatch {
  ToyMel x1;
  CharSequence chars;
  std::vector<double> style;
  std::vector<std::uint8_t> mask;
};

// Conditional flow matching loss for one sample: with x_t = (1-t)*x0 + t*x1
// and target x1 - x0, the mean squared error of the predicted field over
// masked frames only. The unmasked frames of x1 are fed to the model as
// context. film_active selects whether FiLM conditioning runs (it is off
// during pretraining).
double cfm_loss(const VectorFieldParams& field, const CfmBatch& batch, const ToyMel& x0,
                double t, bool film_active = true);

// Same loss; accumulates analytic gradients into *grad (shape of `field`)
// and, when style_grad is non-null, d loss / d style into *style_grad.
double cfm_loss_grad(const VectorFieldParams& field, const CfmBatch& batch, const ToyMel& x0,
                     double t, bool film_active, VectorFieldParams* grad,
                     std::vector<double>* style_grad);

struct TrainSample {
  ToyMel x1;
  CharSequence chars;
  ToyMel style_ref;
  double style_scalar = 0.0;
};

// Deterministic synthetic corpus: sample i carries style scalar s(i) in
// {-1, 0, +1}; targets are s + a zero-mean per-character channel pattern +
// seeded noise, and the style reference mel is s + seeded noise. Closed-form
// expectations make conditional generation checkable.
class SyntheticTask {
 public:
  SyntheticTask(const ModelConfig& config, std::uint64_t seed, std::size_t size,
                std::size_t frames, std::size_t ref_frames);

  std::size_t size() const { return size_; }
  std::size_t frames() const { return frames_; }
  const ModelConfig& config() const { return config_; }
  TrainSample sample(std::size_t index) const;
  static double style_scalar_for(std::size_t index);

 private:
  ModelConfig config_;
  std::uint64_t seed_;
  std::size_t size_;
  std::size_t frames_;
  std::size_t ref_frames_;
  std::vector<double> char_pattern_;  // kAlphabetSize x channels, zero-mean rows
};

enum class TrainStage { pretrain, finetune };

struct TrainConfig {
  TrainStage stage = TrainStage::pretrain;
  std::uint64_t seed = 0;
  double learning_rate = 0.01;
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  double mask_ratio_min = 0.3;
  double mask_ratio_max = 0.8;
  double formant_min = 0.9;   // finetune context augmentation range
  double formant_max = 1.15;
  std::size_t euler_steps = 32;
};

struct TrainResult {
  TtsModel model;
  std::vector<double> step_losses;  // mean batch loss per optimizer step
};

// Two-stage training with explicit backpropagation and Adam. Pretraining
// initializes a fresh model from config.seed and trains every block without
// FiLM; the style encoder rides along untouched by the loss. Finetuning
// copies *pretrained, keeps blocks below freeze_boundary bitwise frozen, and
// trains FiLM heads, the remaining field, and the style encoder. A NaN loss
// aborts with step diagnostics.
TrainResult train(const TrainConfig& config, const SyntheticTask& task,
                  const TtsModel* pretrained = nullptr);

// Reference-free sampling: frame count from the syllable rate rule, x0 drawn
// from the seeded generator, N Euler steps of dx/dt = v(x, t, chars, style)
// with zero context. Deterministic per seed.
ToyMel synthesize(const TtsModel& model, const std::string& text,
                  const std::vector<double>& style, double speed, std::uint64_t seed,
                  double frame_rate = 50.0, std::size_t euler_steps = 32);

// TTTS checkpoint: magic `TTTS`, u32 version, u32 tensor count, then named
// tensors (u32 name length + bytes, u32 rank, u32 dims, f32 LE data).
// Parameters are stored as f32; save(load(p)) is bitwise stable.
void save_checkpoint(const TtsModel& model, const std::string& path);
TtsModel load_checkpoint(const std::string& path);

}  // namespace lombard

#endif  // LOMBARD_TOY_TTS_HPP_
