// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The miniature vision-language model: a pre-norm ViT over tiles, a 2x2
// space-to-depth merge, a two-layer GELU projector and a pre-norm causal
// decoder with (YaRN-scaled) rotary embeddings. Every computation is built on
// nn::Graph so training and inference share one code path.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "medvlm/model/config.hpp"
#include "medvlm/model/image.hpp"
#include "medvlm/model/params.hpp"
#include "medvlm/nn/graph.hpp"

namespace medvlm::model {

inline constexpr std::int64_t kIgnoreIndex = -100;

/// Truncated-normal (sigma 0.02) weights, zero biases, unit norm gains.
ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Binds parameters into a graph on first use. With a gradient store, each
/// leaf accumulates into the tensor of the same path.
class Bindings {
 public:
  Bindings(nn::Graph& graph, const ParamStore& params, ParamStore* grads = nullptr)
      : graph_(graph), params_(params), grads_(grads) {}
  nn::Graph::Id operator()(const std::string& path);

 private:
  nn::Graph& graph_;
  const ParamStore& params_;
  ParamStore* grads_;
  std::unordered_map<std::string, nn::Graph::Id> ids_;
};

/// Normalized patches of one crop: [(tile/patch)^2, 3 * patch^2].
nn::Tensor patchify(const Image& crop, const VisionConfig& cfg);

// Graph builders.
nn::Graph::Id encode_tile(nn::Graph& g, Bindings& b, const Image& crop, const ModelConfig& cfg);
nn::Graph::Id project(nn::Graph& g, Bindings& b, nn::Graph::Id vision_tokens);
nn::Graph::Id decoder_logits(nn::Graph& g, Bindings& b, nn::Graph::Id embedded, const ModelConfig& cfg,
                             std::span<const double> inv_freq, double temperature);

/// Vision tokens for a list of crops: [n_crops * tokens_per_tile, merged_width].
nn::Tensor encode_tiles(std::span<const Image> crops, const ParamStore& params, const ModelConfig& cfg);
/// fc2(gelu(fc1(x))): [n, merged_width] -> [n, d_model].
nn::Tensor project(const nn::Tensor& vision_tokens, const ParamStore& params);
/// Tiles, encodes and projects one image into LM space.
nn::Tensor embed_image(const Image& image, const ParamStore& params, const ModelConfig& cfg);

/// Text with image placeholders. `supervised[i]` marks tokens the loss should
/// predict (answer/caption tokens); empty means nothing is supervised.
struct TokenSequence {
  std::vector<std::int64_t> ids;
  std::vector<bool> supervised;
};

struct AssembledSequence {
  nn::Tensor embeddings;               // [len, d_model]
  std::vector<std::int64_t> tokens;    // token id per row, -1 for image rows
  std::vector<bool> label_mask;        // true where the row is a supervised text token
  std::vector<std::int64_t> targets() const;  // next-token targets with kIgnoreIndex
};

/// Replaces each placeholder with its block, in order.
AssembledSequence assemble_sequence(const TokenSequence& seq, std::int64_t image_token,
                                    std::span<const nn::Tensor> image_blocks, const ParamStore& params);

/// Graph form of assemble_sequence; returns the embedded sequence node.
nn::Graph::Id assemble(nn::Graph& g, Bindings& b, const TokenSequence& seq, std::int64_t image_token,
                       const std::vector<nn::Graph::Id>& image_blocks, AssembledSequence* layout = nullptr);

/// Causal decoder logits [seq, vocab] with the configured (YaRN) rotary scaling.
nn::Tensor forward(const nn::Tensor& embedded, const ParamStore& params, const ModelConfig& cfg);
/// Same, with explicit frequencies and attention temperature.
nn::Tensor forward(const nn::Tensor& embedded, const ParamStore& params, const ModelConfig& cfg,
                   std::span<const double> inv_freq, double temperature);

/// A multimodal training or prompting example.
struct Example {
  TokenSequence text;
  std::vector<Image> images;
};

/// BOS then the prompt bytes, with one image sentinel per "<image>" marker.
/// Nothing is supervised.
Example encode_prompt(std::string_view prompt, std::vector<Image> images);

/// Mean next-token loss over supervised positions; optional gradients.
double example_loss(const Example& ex, const ParamStore& params, const ModelConfig& cfg,
                    ParamStore* grads = nullptr, double grad_scale = 1.0);
/// Number of supervised targets example_loss averages over.
std::int64_t supervised_targets(const Example& ex);

struct GenerationOptions {
  std::int64_t max_new_tokens = 64;
  std::vector<std::int64_t> stop_tokens{257};
  std::vector<std::string> stop_sequences;
};

/// Greedy decoding: argmax, lowest id on ties; stops at a stop token, a stop
/// sequence (which is stripped) or the budget.
std::string generate_greedy(const Example& prompt, const ParamStore& params, const ModelConfig& cfg,
                            const GenerationOptions& opts);

/// Position of the largest logit in a row, lowest index on ties.
std::int64_t argmax_row(const nn::Tensor& logits, std::int64_t row);

}  // namespace medvlm::model
