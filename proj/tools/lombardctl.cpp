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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lombard/duration.hpp"
#include "lombard/embedding.hpp"
#include "lombard/eval.hpp"
#include "lombard/ini.hpp"
#include "lombard/mel.hpp"
#include "lombard/pca.hpp"
#include "lombard/rng.hpp"
#include "lombard/style.hpp"
#include "lombard/toy_tts.hpp"
#include "lombard/wav.hpp"

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Shared plumbing: config file, seed precedence, formatting, path hygiene.
// ---------------------------------------------------------------------------

struct GlobalState {
  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<lombard::IniFile> config;

  const lombard::IniFile* config_file() {
    if (!config_path.empty() && !config.has_value()) {
      config = lombard::load_ini(config_path);
    }
    return config.has_value() ? &*config : nullptr;
  }
};

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + " must be an unsigned integer, got '" +
                                text + "'");
  }
  if (used != text.size() || text.empty() || text[0] == '-') {
    throw std::invalid_argument(what + " must be an unsigned integer, got '" +
                                text + "'");
  }
  return static_cast<std::uint64_t>(value);
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + " must be a number, got '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw std::invalid_argument(what + " must be a finite number, got '" +
                                text + "'");
  }
  return value;
}

// Precedence: --seed flag, then LOMBARDCTL_SEED, then [run] seed in the
// config file. Commands that consume randomness refuse to run without one.
std::uint64_t resolve_seed(GlobalState& global) {
  if (global.seed_flag.has_value()) return *global.seed_flag;
  if (const char* env = std::getenv("LOMBARDCTL_SEED")) {
    return parse_u64(env, "LOMBARDCTL_SEED");
  }
  if (const lombard::IniFile* cfg = global.config_file()) {
    if (const lombard::IniSection* run = cfg->find_section("run")) {
      if (const std::string* seed = run->find("seed")) {
        return parse_u64(*seed, "[run] seed");
      }
    }
  }
  throw std::invalid_argument(
      "no seed configured: pass --seed, set LOMBARDCTL_SEED, or add seed "
      "under [run] in the config file");
}

std::string config_string(GlobalState& global, const std::string& section,
                          const std::string& key, const std::string& fallback) {
  if (const lombard::IniFile* cfg = global.config_file()) {
    if (const lombard::IniSection* s = cfg->find_section(section)) {
      if (const std::string* v = s->find(key)) return *v;
    }
  }
  return fallback;
}

double resolve_frame_rate(GlobalState& global, double flag_value) {
  if (flag_value > 0.0) return flag_value;
  const std::string text = config_string(global, "run", "frame_rate", "");
  if (text.empty()) return 50.0;
  const double rate = parse_double(text, "[run] frame_rate");
  if (rate <= 0.0) {
    throw std::invalid_argument("[run] frame_rate must be positive");
  }
  return rate;
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_distinct_paths(const std::string& input, const std::string& output,
                            const char* what) {
  std::error_code ec;
  const fs::path in_canon = fs::weakly_canonical(input, ec);
  const fs::path out_canon = fs::weakly_canonical(output, ec);
  if (input == output || (!in_canon.empty() && in_canon == out_canon)) {
    throw std::invalid_argument(std::string(what) +
                                " output path equals an input path: " + output);
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing file: " + path);
}

std::string read_text_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument(std::string("cannot open ") + what +
                                " file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Corpus files may be SEMB binaries or the CSV interchange format; sniff the
// magic rather than trusting the extension.
lombard::EmbeddingCorpus load_corpus_any(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open corpus file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  const bool is_semb =
      in.gcount() == 4 && std::memcmp(magic, "SEMB", 4) == 0;
  in.close();
  return is_semb ? lombard::load_corpus_binary(path)
                 : lombard::load_corpus_csv(path);
}

// ---------------------------------------------------------------------------
// Noise conditions: "clean" plus SNR levels with stable labels.
// ---------------------------------------------------------------------------

struct NoiseCondition {
  std::string label;
  bool clean = false;
  double snr_db = 0.0;
};

NoiseCondition parse_noise_token(const std::string& raw) {
  std::string token = raw;
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) {
    token.erase(token.begin());
  }
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) {
    token.pop_back();
  }
  if (token.empty()) {
    throw std::invalid_argument("empty noise level entry");
  }
  NoiseCondition cond;
  if (token == "clean") {
    cond.label = "clean";
    cond.clean = true;
    return cond;
  }
  cond.snr_db = parse_double(token, "noise level");
  cond.label = "snr" + token;
  return cond;
}

std::vector<NoiseCondition> resolve_noise_conditions(GlobalState& global,
                                                     const std::string& flag) {
  std::string text = flag;
  if (text.empty()) text = config_string(global, "noise", "levels", "");
  if (text.empty()) text = "clean,10,5,1";
  std::vector<NoiseCondition> conditions;
  for (const std::string& token : lombard::split_list(text)) {
    conditions.push_back(parse_noise_token(token));
  }
  if (conditions.empty()) {
    throw std::invalid_argument("noise level list is empty");
  }
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    for (std::size_t j = i + 1; j < conditions.size(); ++j) {
      if (conditions[i].label == conditions[j].label) {
        throw std::invalid_argument("duplicate noise level: " +
                                    conditions[i].label);
      }
    }
  }
  return conditions;
}

// ---------------------------------------------------------------------------
// External commands: {wav} templates run through /bin/sh with captured
// standard output.
// ---------------------------------------------------------------------------

std::string shell_quote(const std::string& text) {
  std::string quoted = "'";
  for (char ch : text) {
    if (ch == '\'') {
      quoted += "'\\''";
    } else {
      quoted += ch;
    }
  }
  quoted += "'";
  return quoted;
}

std::string instantiate_template(const std::string& command_template,
                                 const std::string& wav_path) {
  const std::string placeholder = "{wav}";
  if (command_template.find(placeholder) == std::string::npos) {
    throw std::invalid_argument(
        "command template is missing the {wav} placeholder: " +
        command_template);
  }
  std::string command = command_template;
  const std::string quoted = shell_quote(wav_path);
  std::size_t pos = 0;
  while ((pos = command.find(placeholder, pos)) != std::string::npos) {
    command.replace(pos, placeholder.size(), quoted);
    pos += quoted.size();
  }
  return command;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) {
    throw std::runtime_error("cannot start external command: " + command);
  }
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int status = pclose(pipe);
  if (status == -1) {
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = 128;
  }
  return result;
}

// ---------------------------------------------------------------------------
// pca fit / pca correlate
// ---------------------------------------------------------------------------

struct PcaFitOptions {
  std::string corpus;
  std::string out;
  std::optional<std::uint64_t> k;
};

int cmd_pca_fit(GlobalState&, const PcaFitOptions& opt) {
  require_distinct_paths(opt.corpus, opt.out, "pca fit");
  const lombard::EmbeddingCorpus corpus = load_corpus_any(opt.corpus);
  std::optional<std::size_t> k;
  if (opt.k.has_value()) k = static_cast<std::size_t>(*opt.k);
  const lombard::PcaModel model = lombard::fit_pca(corpus, k);
  lombard::save_pca(model, opt.out);

  std::cout << "components=" << model.component_count() << "\n";
  std::cout << "dimension=" << model.dimension() << "\n";
  std::cout << "samples=" << corpus.size() << "\n";
  for (std::size_t i = 0; i < model.component_count(); ++i) {
    std::cout << "component " << i << ": sigma=" << format_g(model.sigma[i])
              << " variance_ratio="
              << format_g(model.explained_variance_ratio[i]) << "\n";
  }
  return 0;
}

struct PcaCorrelateOptions {
  std::string model;
  std::string corpus;
  std::string attributes;
  std::string attribute;
  std::string out_summary;
  std::string out_scatter;
};

int cmd_pca_correlate(GlobalState&, const PcaCorrelateOptions& opt) {
  const lombard::PcaModel model = lombard::load_pca(opt.model);
  const lombard::EmbeddingCorpus corpus = load_corpus_any(opt.corpus);
  const lombard::AttributeTable table =
      lombard::load_attributes_csv(opt.attributes);
  const auto pairs = lombard::join_attributes(corpus, table, opt.attribute);
  const auto correlations = lombard::correlate_components(model, pairs);

  std::string summary = "component,pearson_r,n\n";
  for (const lombard::ComponentCorrelation& c : correlations) {
    summary += std::to_string(c.component_index);
    summary += ',';
    if (c.defined) summary += format_full(c.pearson_r);
    summary += ',';
    summary += std::to_string(c.sample_count);
    summary += '\n';
  }
  write_text_file(opt.out_summary, summary);

  std::string scatter = "component,id,score,attribute\n";
  for (std::size_t k = 0; k < model.component_count(); ++k) {
    for (const auto& [embedding, value] : pairs) {
      const std::vector<double> score =
          lombard::project(model, embedding.values);
      scatter += std::to_string(k);
      scatter += ',';
      scatter += embedding.id;
      scatter += ',';
      scatter += format_full(score[k]);
      scatter += ',';
      scatter += format_full(value);
      scatter += '\n';
    }
  }
  write_text_file(opt.out_scatter, scatter);

  std::cout << "components=" << correlations.size() << "\n";
  std::cout << "pairs=" << pairs.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// style apply
// ---------------------------------------------------------------------------

struct StyleApplyOptions {
  std::string embedding;
  std::string out;
  std::string preset;
  std::string presets_path;
  std::vector<std::string> binds;
  std::string loudness_model;
  std::string clarity_model;
  std::string shift_model;
  std::vector<std::string> shifts;
};

lombard::ModelRegistry load_registry(const StyleApplyOptions& opt) {
  lombard::ModelRegistry registry;
  std::vector<std::pair<std::string, std::string>> entries;
  if (!opt.loudness_model.empty()) entries.emplace_back("loudness", opt.loudness_model);
  if (!opt.clarity_model.empty()) entries.emplace_back("clarity", opt.clarity_model);
  for (const std::string& bind : opt.binds) {
    const std::size_t eq = bind.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == bind.size()) {
      throw std::invalid_argument("--bind must look like name=model.pcam, got '" +
                                  bind + "'");
    }
    entries.emplace_back(bind.substr(0, eq), bind.substr(eq + 1));
  }
  for (const auto& [name, path] : entries) {
    if (registry.count(name) != 0) {
      throw std::invalid_argument("model '" + name + "' bound twice");
    }
    registry.emplace(name, lombard::load_pca(path));
  }
  return registry;
}

int cmd_style_apply(GlobalState& global, const StyleApplyOptions& opt) {
  require_distinct_paths(opt.embedding, opt.out, "style apply");
  const bool preset_mode = !opt.preset.empty();
  const bool shift_mode = !opt.shifts.empty();
  if (preset_mode == shift_mode) {
    throw std::invalid_argument(
        "pass exactly one of --preset or --shift directives");
  }

  const lombard::EmbeddingCorpus corpus = load_corpus_any(opt.embedding);
  lombard::EmbeddingCorpus output;
  output.dimension = corpus.dimension;
  double speed = 1.0;

  if (preset_mode) {
    std::string presets_path = opt.presets_path;
    if (presets_path.empty()) {
      presets_path = config_string(global, "paths", "presets", "");
    }
    const lombard::StyleControlConfig config =
        presets_path.empty() ? lombard::default_style_config()
                             : lombard::load_style_config(presets_path);
    const lombard::LombardPreset* preset = config.find_preset(opt.preset);
    if (preset == nullptr) {
      std::string names;
      for (const lombard::LombardPreset& p : config.presets) {
        if (!names.empty()) names += ", ";
        names += p.name;
      }
      throw std::invalid_argument("unknown preset '" + opt.preset +
                                  "' (available: " + names + ")");
    }
    const lombard::ModelRegistry registry = load_registry(opt);
    for (const lombard::StyleEmbedding& e : corpus.embeddings) {
      const lombard::PresetResult result =
          lombard::apply_preset(e, *preset, config.bindings, registry);
      speed = result.speed;
      lombard::StyleEmbedding shifted;
      shifted.id = e.id;
      shifted.values.assign(result.values.begin(), result.values.end());
      output.embeddings.push_back(std::move(shifted));
    }
  } else {
    if (opt.shift_model.empty()) {
      throw std::invalid_argument("--shift directives require --model");
    }
    const lombard::PcaModel model = lombard::load_pca(opt.shift_model);
    std::vector<lombard::Shift> shifts;
    for (const std::string& text : opt.shifts) {
      const std::size_t colon = text.find(':');
      if (colon == std::string::npos) {
        throw std::invalid_argument(
            "--shift must look like component:coefficient, got '" + text + "'");
      }
      shifts.emplace_back(
          static_cast<std::size_t>(
              parse_u64(text.substr(0, colon), "shift component")),
          parse_double(text.substr(colon + 1), "shift coefficient"));
    }
    for (const lombard::StyleEmbedding& e : corpus.embeddings) {
      const std::vector<double> shifted =
          lombard::shift_embedding(e.values, model, shifts);
      lombard::StyleEmbedding out_embedding;
      out_embedding.id = e.id;
      out_embedding.values.assign(shifted.begin(), shifted.end());
      output.embeddings.push_back(std::move(out_embedding));
    }
  }

  lombard::save_corpus_binary(output, opt.out);
  std::cout << "embeddings=" << output.size() << "\n";
  std::cout << "speed=" << format_g(speed) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// duration
// ---------------------------------------------------------------------------

struct DurationOptions {
  std::string text;
  double speed = 1.0;
  double rate_base = 4.0;
  double frame_rate = 0.0;
};

int cmd_duration(GlobalState& global, const DurationOptions& opt) {
  const double frame_rate = resolve_frame_rate(global, opt.frame_rate);
  const std::size_t syllables = lombard::count_syllables(opt.text);
  const lombard::DurationSpec spec =
      lombard::target_duration(syllables, opt.speed, opt.rate_base, frame_rate);
  std::cout << "syllables=" << spec.syllables << "\n";
  std::cout << "seconds=" << format_g(spec.seconds) << "\n";
  std::cout << "frames=" << spec.frames << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// tts train / tts synth
// ---------------------------------------------------------------------------

struct TtsTrainOptions {
  std::string stage;
  std::string out;
  std::string init;
  std::uint64_t epochs = 10;
  std::uint64_t batch_size = 8;
  double learning_rate = 0.01;
  std::uint64_t task_size = 24;
  std::uint64_t task_frames = 12;
  std::uint64_t task_ref_frames = 6;
  std::optional<std::uint64_t> task_seed;
};

int cmd_tts_train(GlobalState& global, const TtsTrainOptions& opt) {
  const std::uint64_t seed = resolve_seed(global);
  lombard::TrainConfig config;
  if (opt.stage == "pretrain") {
    config.stage = lombard::TrainStage::pretrain;
  } else if (opt.stage == "finetune") {
    config.stage = lombard::TrainStage::finetune;
  } else {
    throw std::invalid_argument("--stage must be pretrain or finetune, got '" +
                                opt.stage + "'");
  }
  config.seed = seed;
  config.epochs = static_cast<std::size_t>(opt.epochs);
  config.batch_size = static_cast<std::size_t>(opt.batch_size);
  config.learning_rate = opt.learning_rate;

  const lombard::ModelConfig model_config;
  const lombard::SyntheticTask task(
      model_config, opt.task_seed.value_or(seed),
      static_cast<std::size_t>(opt.task_size),
      static_cast<std::size_t>(opt.task_frames),
      static_cast<std::size_t>(opt.task_ref_frames));

  lombard::TrainResult result;
  if (config.stage == lombard::TrainStage::finetune) {
    if (opt.init.empty()) {
      throw std::invalid_argument("finetune requires --init checkpoint");
    }
    require_distinct_paths(opt.init, opt.out, "tts train");
    const lombard::TtsModel pretrained = lombard::load_checkpoint(opt.init);
    result = lombard::train(config, task, &pretrained);
  } else {
    if (!opt.init.empty()) {
      throw std::invalid_argument("pretraining starts fresh; drop --init");
    }
    result = lombard::train(config, task, nullptr);
  }
  lombard::save_checkpoint(result.model, opt.out);

  std::cout << "stage=" << opt.stage << "\n";
  std::cout << "steps=" << result.step_losses.size() << "\n";
  if (!result.step_losses.empty()) {
    std::cout << "first_loss=" << format_g(result.step_losses.front()) << "\n";
    std::cout << "final_loss=" << format_g(result.step_losses.back()) << "\n";
  }
  return 0;
}

struct TtsSynthOptions {
  std::string checkpoint;
  std::string text;
  std::string out;
  std::string out_wav;
  std::string style_path;
  std::uint64_t style_index = 0;
  double speed = 1.0;
  double frame_rate = 0.0;
  std::uint64_t euler_steps = 32;
  std::uint64_t sample_rate = 16000;
};

// Desk-scale waveform rendering for piping synthesized mels into the noise
// mixer: each frame becomes sample_rate/frame_rate samples holding the
// frame's channel mean, clamped to [-1, 1].
lombard::WavAudio render_mel_wave(const lombard::ToyMel& mel,
                                  std::uint32_t sample_rate, double frame_rate) {
  lombard::WavAudio audio;
  audio.sample_rate = sample_rate;
  const long long per_frame =
      std::max(1LL, std::llround(static_cast<double>(sample_rate) / frame_rate));
  audio.samples.reserve(mel.frames * static_cast<std::size_t>(per_frame));
  for (std::size_t t = 0; t < mel.frames; ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < mel.channels; ++c) mean += mel.at(t, c);
    mean /= static_cast<double>(mel.channels);
    const double value = std::clamp(mean, -1.0, 1.0);
    for (long long i = 0; i < per_frame; ++i) audio.samples.push_back(value);
  }
  return audio;
}

int cmd_tts_synth(GlobalState& global, const TtsSynthOptions& opt) {
  const std::uint64_t seed = resolve_seed(global);
  const double frame_rate = resolve_frame_rate(global, opt.frame_rate);
  require_distinct_paths(opt.checkpoint, opt.out, "tts synth");

  const lombard::TtsModel model = lombard::load_checkpoint(opt.checkpoint);
  std::vector<double> style(model.config.style_dim, 0.0);
  if (!opt.style_path.empty()) {
    const lombard::EmbeddingCorpus corpus = load_corpus_any(opt.style_path);
    if (opt.style_index >= corpus.size()) {
      throw std::invalid_argument(
          "--style-index " + std::to_string(opt.style_index) +
          " is out of range for " + std::to_string(corpus.size()) +
          " embeddings");
    }
    const std::vector<float>& values =
        corpus.embeddings[static_cast<std::size_t>(opt.style_index)].values;
    style.assign(values.begin(), values.end());
  }

  const lombard::ToyMel mel = lombard::synthesize(
      model, opt.text, style, opt.speed, seed, frame_rate,
      static_cast<std::size_t>(opt.euler_steps));
  lombard::save_mel_csv(mel, opt.out);
  std::cout << "frames=" << mel.frames << "\n";
  std::cout << "channels=" << mel.channels << "\n";

  if (!opt.out_wav.empty()) {
    if (opt.sample_rate == 0 || opt.sample_rate > 192000) {
      throw std::invalid_argument("--sample-rate must be in [1, 192000]");
    }
    const lombard::WavAudio audio = render_mel_wave(
        mel, static_cast<std::uint32_t>(opt.sample_rate), frame_rate);
    lombard::save_wav(audio, opt.out_wav);
    std::cout << "samples=" << audio.samples.size() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// mix-noise
// ---------------------------------------------------------------------------

struct MixNoiseOptions {
  std::string clean;
  std::string noise;
  std::string snr;
  std::string out;
};

int cmd_mix_noise(GlobalState& global, const MixNoiseOptions& opt) {
  require_distinct_paths(opt.clean, opt.out, "mix-noise");
  require_distinct_paths(opt.noise, opt.out, "mix-noise");
  const NoiseCondition cond = parse_noise_token(opt.snr);
  lombard::SnrSpec spec;
  spec.clean = cond.clean;
  spec.target_snr_db = cond.snr_db;
  spec.seed = resolve_seed(global);

  const lombard::WavAudio clean = lombard::load_wav(opt.clean);
  const lombard::WavAudio noise = lombard::load_wav(opt.noise);
  const lombard::MixResult result = lombard::mix_at_snr(clean, noise, spec);
  lombard::save_wav(result.audio, opt.out);

  std::cout << "gain=" << format_full(result.gain) << "\n";
  std::cout << "achieved_snr_db=" << format_full(result.achieved_snr_db)
            << "\n";
  std::cout << "clipped=" << result.clipped << "\n";
  if (result.clipped > 0) {
    std::cerr << "warning: " << result.clipped
              << " samples clipped to [-1, 1]\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval wer / eval run / report
// ---------------------------------------------------------------------------

struct EvalWerOptions {
  std::string reference;
  std::string hypothesis;
};

int cmd_eval_wer(GlobalState&, const EvalWerOptions& opt) {
  const std::vector<std::string> reference =
      lombard::normalize_tokens(read_text_file(opt.reference, "reference"));
  const std::vector<std::string> hypothesis =
      lombard::normalize_tokens(read_text_file(opt.hypothesis, "hypothesis"));
  const lombard::WerResult result =
      lombard::word_error_rate(reference, hypothesis);
  std::cout << "substitutions=" << result.substitutions << "\n";
  std::cout << "deletions=" << result.deletions << "\n";
  std::cout << "insertions=" << result.insertions << "\n";
  std::cout << "reference_words=" << result.reference_words << "\n";
  std::cout << "wer=" << format_full(result.wer) << "\n";
  return 0;
}

struct ManifestRow {
  std::string utterance;
  std::string level;
  std::string wav;
  std::string transcript;
  std::string reference_wav;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(field);
  for (std::string& f : fields) {
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) {
      f.erase(f.begin());
    }
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) {
      f.pop_back();
    }
  }
  return fields;
}

bool filename_safe(const std::string& text) {
  if (text.empty()) return false;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (!std::isalnum(uc) && ch != '_' && ch != '-' && ch != '.') return false;
  }
  return true;
}

std::string resolve_relative(const fs::path& base, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (base / p).string();
}

std::vector<ManifestRow> parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest file: " + path);
  const fs::path base = fs::path(path).parent_path();

  std::vector<ManifestRow> rows;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  bool has_reference_column = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string where =
        path + " line " + std::to_string(line_number) + ": ";
    if (!header_seen) {
      if (fields == std::vector<std::string>{"utterance", "level", "wav",
                                             "transcript"}) {
        has_reference_column = false;
      } else if (fields == std::vector<std::string>{"utterance", "level", "wav",
                                                    "transcript",
                                                    "reference_wav"}) {
        has_reference_column = true;
      } else {
        throw std::invalid_argument(
            where +
            "expected header utterance,level,wav,transcript[,reference_wav]");
      }
      header_seen = true;
      continue;
    }
    const std::size_t expected = has_reference_column ? 5 : 4;
    if (fields.size() != expected) {
      throw std::invalid_argument(where + "expected " +
                                  std::to_string(expected) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    ManifestRow row;
    row.utterance = fields[0];
    row.level = fields[1];
    row.wav = resolve_relative(base, fields[2]);
    row.transcript = resolve_relative(base, fields[3]);
    if (has_reference_column && !fields[4].empty()) {
      row.reference_wav = resolve_relative(base, fields[4]);
    }
    if (!filename_safe(row.utterance)) {
      throw std::invalid_argument(
          where + "utterance id must use only letters, digits, '.', '_', '-'");
    }
    if (row.level.empty() || fields[2].empty() || fields[3].empty()) {
      throw std::invalid_argument(where + "level, wav, and transcript are "
                                          "required");
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) {
    throw std::invalid_argument("manifest has no header: " + path);
  }
  if (rows.empty()) {
    throw std::invalid_argument("manifest lists no utterances: " + path);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (rows[i].utterance == rows[j].utterance &&
          rows[i].level == rows[j].level) {
        throw std::invalid_argument("duplicate manifest entry for utterance '" +
                                    rows[i].utterance + "' at level '" +
                                    rows[i].level + "'");
      }
    }
  }
  return rows;
}

std::string records_csv(const std::vector<lombard::EvalRecord>& records) {
  std::string out = "utterance,level,noise,wer,ssim,delta_ssim\n";
  for (const lombard::EvalRecord& rec : records) {
    out += rec.utterance;
    out += ',';
    out += rec.level;
    out += ',';
    out += rec.noise;
    out += ',';
    out += format_full(rec.wer);
    out += ',';
    if (rec.ssim) out += format_full(*rec.ssim);
    out += ',';
    if (rec.delta_ssim) out += format_full(*rec.delta_ssim);
    out += '\n';
  }
  return out;
}

std::optional<std::vector<double>> run_embedder(const std::string& embedder,
                                                const std::string& wav,
                                                std::vector<std::string>* log) {
  const CommandResult result = run_command(instantiate_template(embedder, wav));
  if (result.exit_code != 0) {
    log->push_back("embedder exited with code " +
                   std::to_string(result.exit_code) + " on " + wav);
    return std::nullopt;
  }
  std::istringstream in(result.output);
  std::vector<double> values;
  double value = 0.0;
  while (in >> value) values.push_back(value);
  std::string trailing;
  if (values.empty() || (in.clear(), in >> trailing, !trailing.empty())) {
    log->push_back("embedder produced no usable numbers on " + wav);
    return std::nullopt;
  }
  return values;
}

struct EvalRunOptions {
  std::string manifest;
  std::string out_dir;
  std::string noise_wav;
  std::string transcriber;
  std::string embedder;
  std::string levels;
  std::string normal_level = "normal";
};

int cmd_eval_run(GlobalState& global, const EvalRunOptions& opt) {
  const std::uint64_t seed = resolve_seed(global);
  const std::vector<ManifestRow> rows = parse_manifest(opt.manifest);
  const std::vector<NoiseCondition> conditions =
      resolve_noise_conditions(global, opt.levels);

  std::string transcriber = opt.transcriber;
  if (transcriber.empty()) {
    transcriber = config_string(global, "external", "transcriber", "");
  }
  if (transcriber.empty()) {
    throw std::invalid_argument(
        "no transcriber configured: pass --transcriber or set it under "
        "[external] in the config file");
  }
  std::string embedder = opt.embedder;
  if (embedder.empty()) {
    embedder = config_string(global, "external", "embedder", "");
  }

  const bool needs_noise = std::any_of(
      conditions.begin(), conditions.end(),
      [](const NoiseCondition& c) { return !c.clean; });
  lombard::WavAudio noise;
  if (needs_noise) {
    if (opt.noise_wav.empty()) {
      throw std::invalid_argument(
          "noise levels include an SNR condition; pass --noise");
    }
    noise = lombard::load_wav(opt.noise_wav);
  }

  fs::create_directories(fs::path(opt.out_dir) / "audio");

  std::vector<lombard::EvalRecord> records;
  std::vector<std::string> failures;
  std::size_t attempts = 0;
  std::size_t transcribed = 0;

  struct RowExtras {
    std::optional<double> ssim;
    std::optional<double> delta_ssim;
  };
  std::vector<std::optional<std::vector<double>>> row_embeddings(rows.size());
  std::vector<RowExtras> extras(rows.size());
  std::vector<std::string> embed_log;

  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const ManifestRow& row = rows[ri];
    const lombard::WavAudio clean = lombard::load_wav(row.wav);
    const std::vector<std::string> reference =
        lombard::normalize_tokens(read_text_file(row.transcript, "transcript"));

    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
      const NoiseCondition& cond = conditions[ci];
      lombard::SnrSpec spec;
      spec.clean = cond.clean;
      spec.target_snr_db = cond.snr_db;
      spec.seed = lombard::mix_seed(seed, ri, ci);
      const lombard::MixResult mixed = cond.clean
          ? lombard::mix_at_snr(clean, clean, spec)
          : lombard::mix_at_snr(clean, noise, spec);
      if (mixed.clipped > 0) {
        std::cerr << "warning: " << mixed.clipped << " samples clipped for "
                  << row.utterance << " (" << row.level << ") at "
                  << cond.label << "\n";
      }

      const std::string mixed_path =
          (fs::path(opt.out_dir) / "audio" /
           (row.utterance + "_" + row.level + "_" + cond.label + ".wav"))
              .string();
      lombard::save_wav(mixed.audio, mixed_path);

      ++attempts;
      const CommandResult transcript =
          run_command(instantiate_template(transcriber, mixed_path));
      if (transcript.exit_code != 0) {
        failures.push_back(row.utterance + "," + row.level + "," + cond.label +
                           ",exit=" + std::to_string(transcript.exit_code));
        std::cerr << "warning: transcriber failed on " << row.utterance
                  << " at " << cond.label << " (exit "
                  << transcript.exit_code << ")\n";
        continue;
      }
      ++transcribed;

      lombard::EvalRecord record;
      record.utterance = row.utterance;
      record.level = row.level;
      record.noise = cond.label;
      record.wer =
          lombard::word_error_rate(
              reference, lombard::normalize_tokens(transcript.output))
              .wer;
      records.push_back(std::move(record));
    }

    if (!embedder.empty()) {
      row_embeddings[ri] = run_embedder(embedder, row.wav, &embed_log);
      if (row_embeddings[ri].has_value() && !row.reference_wav.empty()) {
        const auto reference_embedding =
            run_embedder(embedder, row.reference_wav, &embed_log);
        if (reference_embedding.has_value()) {
          extras[ri].ssim = lombard::cosine_similarity(*row_embeddings[ri],
                                                       *reference_embedding)
                                .percentage;
        }
      }
    }
  }

  if (!embedder.empty()) {
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
      if (!row_embeddings[ri].has_value()) continue;
      if (rows[ri].level == opt.normal_level) continue;
      for (std::size_t rj = 0; rj < rows.size(); ++rj) {
        if (rows[rj].utterance == rows[ri].utterance &&
            rows[rj].level == opt.normal_level &&
            row_embeddings[rj].has_value()) {
          extras[ri].delta_ssim = lombard::relative_ssim(*row_embeddings[ri],
                                                         *row_embeddings[rj])
                                      .percentage;
          break;
        }
      }
    }
    const std::string clean_label = "clean";
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
      if (!extras[ri].ssim.has_value() && !extras[ri].delta_ssim.has_value()) {
        continue;
      }
      for (lombard::EvalRecord& rec : records) {
        if (rec.utterance == rows[ri].utterance &&
            rec.level == rows[ri].level && rec.noise == clean_label) {
          rec.ssim = extras[ri].ssim;
          rec.delta_ssim = extras[ri].delta_ssim;
        }
      }
    }
    for (const std::string& line : embed_log) {
      std::cerr << "warning: " << line << "\n";
    }
  }

  lombard::ReportLayout layout;
  for (const ManifestRow& row : rows) {
    if (std::find(layout.levels.begin(), layout.levels.end(), row.level) ==
        layout.levels.end()) {
      layout.levels.push_back(row.level);
    }
  }
  for (const NoiseCondition& cond : conditions) {
    layout.noises.push_back(cond.label);
  }
  layout.clean_label = "clean";

  const lombard::EvalReport report = lombard::build_report(records, layout);
  write_text_file(
      (fs::path(opt.out_dir) / "records.csv").string(), records_csv(records));
  write_text_file((fs::path(opt.out_dir) / "report.csv").string(),
                  lombard::report_csv(report));
  write_text_file((fs::path(opt.out_dir) / "report.txt").string(),
                  lombard::report_table(report));
  std::string failure_text = "utterance,level,noise,status\n";
  for (const std::string& line : failures) {
    failure_text += line;
    failure_text += '\n';
  }
  write_text_file((fs::path(opt.out_dir) / "failures.csv").string(),
                  failure_text);

  std::cout << "rows=" << rows.size() << "\n";
  std::cout << "conditions=" << conditions.size() << "\n";
  std::cout << "records=" << records.size() << "\n";
  std::cout << "failures=" << failures.size() << "\n";

  if (attempts > 0 && transcribed == 0) {
    std::cerr << "error: the transcriber failed on every row\n";
    return 3;
  }
  return 0;
}

struct ReportOptions {
  std::string records;
  std::string out_csv;
  std::string out_table;
  std::string levels;
  std::string noises;
  std::string clean_label = "clean";
};

std::vector<lombard::EvalRecord> parse_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open records file: " + path);
  std::vector<lombard::EvalRecord> records;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string where =
        path + " line " + std::to_string(line_number) + ": ";
    if (!header_seen) {
      if (fields != std::vector<std::string>{"utterance", "level", "noise",
                                             "wer", "ssim", "delta_ssim"}) {
        throw std::invalid_argument(
            where + "expected header utterance,level,noise,wer,ssim,delta_ssim");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 6) {
      throw std::invalid_argument(where + "expected 6 fields, got " +
                                  std::to_string(fields.size()));
    }
    lombard::EvalRecord record;
    record.utterance = fields[0];
    record.level = fields[1];
    record.noise = fields[2];
    record.wer = parse_double(fields[3], where + "wer");
    if (!fields[4].empty()) {
      record.ssim = parse_double(fields[4], where + "ssim");
    }
    if (!fields[5].empty()) {
      record.delta_ssim = parse_double(fields[5], where + "delta_ssim");
    }
    records.push_back(std::move(record));
  }
  if (!header_seen) {
    throw std::invalid_argument("records file has no header: " + path);
  }
  if (records.empty()) {
    throw std::invalid_argument("records file lists no rows: " + path);
  }
  return records;
}

int cmd_report(GlobalState&, const ReportOptions& opt) {
  const std::vector<lombard::EvalRecord> records =
      parse_records_csv(opt.records);

  lombard::ReportLayout layout;
  layout.clean_label = opt.clean_label;
  if (!opt.levels.empty()) {
    layout.levels = lombard::split_list(opt.levels);
  } else {
    for (const lombard::EvalRecord& rec : records) {
      if (std::find(layout.levels.begin(), layout.levels.end(), rec.level) ==
          layout.levels.end()) {
        layout.levels.push_back(rec.level);
      }
    }
  }
  if (!opt.noises.empty()) {
    layout.noises = lombard::split_list(opt.noises);
  } else {
    for (const lombard::EvalRecord& rec : records) {
      if (std::find(layout.noises.begin(), layout.noises.end(), rec.noise) ==
          layout.noises.end()) {
        layout.noises.push_back(rec.noise);
      }
    }
  }

  const lombard::EvalReport report = lombard::build_report(records, layout);
  if (!opt.out_csv.empty()) {
    require_distinct_paths(opt.records, opt.out_csv, "report");
    write_text_file(opt.out_csv, lombard::report_csv(report));
  }
  if (!opt.out_table.empty()) {
    require_distinct_paths(opt.records, opt.out_table, "report");
    write_text_file(opt.out_table, lombard::report_table(report));
  }
  std::cout << lombard::report_table(report);
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Command wiring
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"lombardctl: Lombard-style TTS control toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  auto global = std::make_shared<GlobalState>();
  app.add_option("--config", global->config_path,
                 "Run configuration file (key = value with [section] headers)");
  app.add_option("--seed", global->seed_flag,
                 "Seed override (precedence: --seed, LOMBARDCTL_SEED, config)");

  int rc = 0;

  CLI::App* pca = app.add_subcommand("pca", "PCA analysis of style embeddings");
  pca->require_subcommand(1);

  auto fit_opt = std::make_shared<PcaFitOptions>();
  CLI::App* fit = pca->add_subcommand("fit", "Fit a PCA basis on a corpus");
  fit->add_option("--corpus", fit_opt->corpus, "SEMB or CSV corpus")->required();
  fit->add_option("--out", fit_opt->out, "Output PCAM model")->required();
  fit->add_option("--k", fit_opt->k, "Components to keep (default: maximum)");
  fit->callback([global, fit_opt, &rc]() { rc = cmd_pca_fit(*global, *fit_opt); });

  auto corr_opt = std::make_shared<PcaCorrelateOptions>();
  CLI::App* correlate = pca->add_subcommand(
      "correlate", "Correlate component scores with an attribute");
  correlate->add_option("--model", corr_opt->model, "PCAM model")->required();
  correlate->add_option("--corpus", corr_opt->corpus, "SEMB or CSV corpus")
      ->required();
  correlate->add_option("--attributes", corr_opt->attributes,
                        "Attribute CSV (id,attribute,value)")
      ->required();
  correlate->add_option("--attribute", corr_opt->attribute,
                        "Attribute name to correlate")
      ->required();
  correlate->add_option("--out-summary", corr_opt->out_summary,
                        "Summary CSV (component,pearson_r,n)")
      ->required();
  correlate->add_option("--out-scatter", corr_opt->out_scatter,
                        "Scatter CSV (component,id,score,attribute)")
      ->required();
  correlate->callback(
      [global, corr_opt, &rc]() { rc = cmd_pca_correlate(*global, *corr_opt); });

  CLI::App* style = app.add_subcommand("style", "Style embedding manipulation");
  style->require_subcommand(1);

  auto apply_opt = std::make_shared<StyleApplyOptions>();
  CLI::App* apply = style->add_subcommand(
      "apply", "Shift embeddings by a preset or explicit directives");
  apply->add_option("--embedding", apply_opt->embedding, "Input SEMB or CSV")
      ->required();
  apply->add_option("--out", apply_opt->out, "Output SEMB")->required();
  apply->add_option("--preset", apply_opt->preset, "Preset name");
  apply->add_option("--presets", apply_opt->presets_path,
                    "Preset/binding config (default: built-in table)");
  apply->add_option("--loudness-model", apply_opt->loudness_model,
                    "PCAM bound as 'loudness'");
  apply->add_option("--clarity-model", apply_opt->clarity_model,
                    "PCAM bound as 'clarity'");
  apply->add_option("--bind", apply_opt->binds,
                    "Extra model binding name=model.pcam (repeatable)");
  apply->add_option("--model", apply_opt->shift_model,
                    "PCAM for explicit --shift directives");
  apply->add_option("--shift", apply_opt->shifts,
                    "Explicit shift component:coefficient (repeatable)");
  apply->callback(
      [global, apply_opt, &rc]() { rc = cmd_style_apply(*global, *apply_opt); });

  auto duration_opt = std::make_shared<DurationOptions>();
  CLI::App* duration =
      app.add_subcommand("duration", "Syllable-rate duration rule");
  duration->add_option("--text", duration_opt->text, "Input text")->required();
  duration->add_option("--speed", duration_opt->speed,
                       "Speed factor (below 1 lengthens)");
  duration->add_option("--rate-base", duration_opt->rate_base,
                       "Syllables per second at speed 1");
  duration->add_option("--frame-rate", duration_opt->frame_rate,
                       "Frames per second (default: config or 50)");
  duration->callback([global, duration_opt, &rc]() {
    rc = cmd_duration(*global, *duration_opt);
  });

  CLI::App* tts = app.add_subcommand("tts", "Toy TTS training and synthesis");
  tts->require_subcommand(1);

  auto train_opt = std::make_shared<TtsTrainOptions>();
  CLI::App* train = tts->add_subcommand("train", "Train on the synthetic task");
  train->add_option("--stage", train_opt->stage, "pretrain or finetune")
      ->required();
  train->add_option("--out", train_opt->out, "Output TTTS checkpoint")
      ->required();
  train->add_option("--init", train_opt->init,
                    "Pretrained checkpoint (finetune only)");
  train->add_option("--epochs", train_opt->epochs, "Training epochs");
  train->add_option("--batch", train_opt->batch_size, "Batch size");
  train->add_option("--lr", train_opt->learning_rate, "Adam learning rate");
  train->add_option("--task-size", train_opt->task_size,
                    "Synthetic corpus size");
  train->add_option("--task-frames", train_opt->task_frames,
                    "Frames per synthetic sample");
  train->add_option("--task-ref-frames", train_opt->task_ref_frames,
                    "Frames per style reference");
  train->add_option("--task-seed", train_opt->task_seed,
                    "Synthetic task seed (default: run seed)");
  train->callback(
      [global, train_opt, &rc]() { rc = cmd_tts_train(*global, *train_opt); });

  auto synth_opt = std::make_shared<TtsSynthOptions>();
  CLI::App* synth = tts->add_subcommand("synth", "Reference-free synthesis");
  synth->add_option("--checkpoint", synth_opt->checkpoint, "TTTS checkpoint")
      ->required();
  synth->add_option("--text", synth_opt->text, "Text to synthesize")->required();
  synth->add_option("--out", synth_opt->out, "Output mel CSV")->required();
  synth->add_option("--out-wav", synth_opt->out_wav,
                    "Also render a waveform WAV for the noise mixer");
  synth->add_option("--style", synth_opt->style_path,
                    "SEMB/CSV style embeddings (default: zero style)");
  synth->add_option("--style-index", synth_opt->style_index,
                    "Embedding row to use from --style");
  synth->add_option("--speed", synth_opt->speed, "Speed factor");
  synth->add_option("--frame-rate", synth_opt->frame_rate,
                    "Frames per second (default: config or 50)");
  synth->add_option("--euler-steps", synth_opt->euler_steps,
                    "ODE integration steps");
  synth->add_option("--sample-rate", synth_opt->sample_rate,
                    "Sample rate for --out-wav");
  synth->callback(
      [global, synth_opt, &rc]() { rc = cmd_tts_synth(*global, *synth_opt); });

  auto mix_opt = std::make_shared<MixNoiseOptions>();
  CLI::App* mix = app.add_subcommand("mix-noise", "Mix noise at a target SNR");
  mix->add_option("--clean", mix_opt->clean, "Clean WAV")->required();
  mix->add_option("--noise", mix_opt->noise, "Noise WAV")->required();
  mix->add_option("--snr", mix_opt->snr, "Target SNR in dB, or 'clean'")
      ->required();
  mix->add_option("--out", mix_opt->out, "Output WAV")->required();
  mix->callback([global, mix_opt, &rc]() { rc = cmd_mix_noise(*global, *mix_opt); });

  CLI::App* eval = app.add_subcommand("eval", "Objective evaluation");
  eval->require_subcommand(1);

  auto wer_opt = std::make_shared<EvalWerOptions>();
  CLI::App* wer = eval->add_subcommand("wer", "Word error rate of two transcripts");
  wer->add_option("--reference", wer_opt->reference, "Reference transcript file")
      ->required();
  wer->add_option("--hypothesis", wer_opt->hypothesis,
                  "Hypothesis transcript file")
      ->required();
  wer->callback([global, wer_opt, &rc]() { rc = cmd_eval_wer(*global, *wer_opt); });

  auto run_opt = std::make_shared<EvalRunOptions>();
  CLI::App* run = eval->add_subcommand(
      "run", "Mix, transcribe, and score a manifest of utterances");
  run->add_option("--manifest", run_opt->manifest,
                  "CSV manifest (utterance,level,wav,transcript[,reference_wav])")
      ->required();
  run->add_option("--out-dir", run_opt->out_dir, "Output directory")->required();
  run->add_option("--noise", run_opt->noise_wav, "Noise WAV for SNR conditions");
  run->add_option("--transcriber", run_opt->transcriber,
                  "Transcriber command template with {wav}");
  run->add_option("--embedder", run_opt->embedder,
                  "Speaker-embedding command template with {wav}");
  run->add_option("--levels", run_opt->levels,
                  "Noise levels (default: config or clean,10,5,1)");
  run->add_option("--normal-level", run_opt->normal_level,
                  "Level treated as the normal-style baseline");
  run->callback([global, run_opt, &rc]() { rc = cmd_eval_run(*global, *run_opt); });

  auto report_opt = std::make_shared<ReportOptions>();
  CLI::App* report =
      app.add_subcommand("report", "Aggregate per-utterance records");
  report->add_option("--records", report_opt->records,
                     "Records CSV (utterance,level,noise,wer,ssim,delta_ssim)")
      ->required();
  report->add_option("--out-csv", report_opt->out_csv, "Report CSV path");
  report->add_option("--out-table", report_opt->out_table,
                     "Report text table path");
  report->add_option("--levels", report_opt->levels,
                     "Level order (default: first appearance)");
  report->add_option("--noises", report_opt->noises,
                     "Noise order (default: first appearance)");
  report->add_option("--clean-label", report_opt->clean_label,
                     "Noise label used as the delta-WER baseline");
  report->callback(
      [global, report_opt, &rc]() { rc = cmd_report(*global, *report_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
