// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/model/vlm.hpp"

#include <algorithm>

#include "medvlm/model/tiling.hpp"
#include "medvlm/model/tokenizer.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/random.hpp"

namespace medvlm::model {

using nn::Graph;
using nn::Tensor;

namespace {

constexpr double kInitStd = 0.02;

Tensor random_tensor(util::Rng& rng, nn::Shape shape) {
  Tensor t(std::move(shape));
  for (auto& x : t.values()) x = rng.truncated_normal(kInitStd);
  return t;
}

void add_block(ParamStore& p, util::Rng& rng, const std::string& prefix, std::int64_t width, std::int64_t mlp_ratio) {
  const std::int64_t hidden = width * mlp_ratio;
  p.add(prefix + ".norm1.weight", Tensor({width}, 1.0));
  for (const char* name : {"q", "k", "v", "o"}) {
    p.add(prefix + ".attn." + name + ".weight", random_tensor(rng, {width, width}));
  }
  p.add(prefix + ".norm2.weight", Tensor({width}, 1.0));
  p.add(prefix + ".mlp.fc1.weight", random_tensor(rng, {width, hidden}));
  p.add(prefix + ".mlp.fc1.bias", Tensor({hidden}));
  p.add(prefix + ".mlp.fc2.weight", random_tensor(rng, {hidden, width}));
  p.add(prefix + ".mlp.fc2.bias", Tensor({width}));
}

Graph::Id block(Graph& g, Bindings& b, const std::string& prefix, Graph::Id x, std::int64_t heads, bool causal,
                const std::vector<double>* inv_freq, double temperature) {
  const Graph::Id h = g.rms_norm(x, b(prefix + ".norm1.weight"));
  Graph::Id q = g.linear(h, b(prefix + ".attn.q.weight"));
  Graph::Id k = g.linear(h, b(prefix + ".attn.k.weight"));
  const Graph::Id v = g.linear(h, b(prefix + ".attn.v.weight"));
  if (inv_freq) {
    const std::int64_t seq = g.value(x).rows();
    std::vector<std::int64_t> positions(static_cast<std::size_t>(seq));
    for (std::int64_t i = 0; i < seq; ++i) positions[static_cast<std::size_t>(i)] = i;
    q = g.rope(q, heads, positions, *inv_freq);
    k = g.rope(k, heads, std::move(positions), *inv_freq);
  }
  const Graph::Id a = g.attention(q, k, v, heads, causal, temperature);
  x = g.add(x, g.linear(a, b(prefix + ".attn.o.weight")));
  const Graph::Id h2 = g.rms_norm(x, b(prefix + ".norm2.weight"));
  const Graph::Id m = g.linear(g.gelu(g.linear(h2, b(prefix + ".mlp.fc1.weight"), b(prefix + ".mlp.fc1.bias"))),
                               b(prefix + ".mlp.fc2.weight"), b(prefix + ".mlp.fc2.bias"));
  return g.add(x, m);
}

}  // namespace

ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  util::Rng rng(seed);
  ParamStore p;
  const auto& vc = cfg.vision;
  p.add("vision.patch_embed.weight", random_tensor(rng, {vc.patch_dim(), vc.width}));
  p.add("vision.patch_embed.bias", Tensor({vc.width}));
  p.add("vision.pos_embed", random_tensor(rng, {vc.patch_tokens_per_tile(), vc.width}));
  for (std::int64_t i = 0; i < vc.layers; ++i) {
    add_block(p, rng, "vision.blocks." + std::to_string(i), vc.width, vc.mlp_ratio);
  }
  p.add("vision.final_norm.weight", Tensor({vc.width}, 1.0));

  const std::int64_t hidden = cfg.projector_hidden_width();
  p.add("projector.fc1.weight", random_tensor(rng, {vc.merged_width(), hidden}));
  p.add("projector.fc1.bias", Tensor({hidden}));
  p.add("projector.fc2.weight", random_tensor(rng, {hidden, cfg.lm.d_model}));
  p.add("projector.fc2.bias", Tensor({cfg.lm.d_model}));

  const auto& lc = cfg.lm;
  p.add("lm.embed.weight", random_tensor(rng, {lc.vocab_size, lc.d_model}));
  for (std::int64_t i = 0; i < lc.layers; ++i) {
    add_block(p, rng, "lm.layers." + std::to_string(i), lc.d_model, lc.mlp_ratio);
  }
  p.add("lm.final_norm.weight", Tensor({lc.d_model}, 1.0));
  p.add("lm.head.weight", random_tensor(rng, {lc.d_model, lc.vocab_size}));
  return p;
}

Graph::Id Bindings::operator()(const std::string& path) {
  if (auto it = ids_.find(path); it != ids_.end()) return it->second;
  const Graph::Id id = graph_.param(params_.at(path), grads_ ? &grads_->at(path) : nullptr);
  ids_.emplace(path, id);
  return id;
}

Tensor patchify(const Image& crop, const VisionConfig& cfg) {
  if (crop.width != cfg.tile_size || crop.height != cfg.tile_size) {
    throw ShapeError("encode_tiles: crop is " + std::to_string(crop.width) + "x" + std::to_string(crop.height) +
                     ", expected " + std::to_string(cfg.tile_size) + "x" + std::to_string(cfg.tile_size));
  }
  const std::int64_t grid = cfg.grid(), ps = cfg.patch_size;
  Tensor out({grid * grid, cfg.patch_dim()});
  for (std::int64_t pr = 0; pr < grid; ++pr) {
    for (std::int64_t pc = 0; pc < grid; ++pc) {
      double* dst = out.data() + (pr * grid + pc) * cfg.patch_dim();
      std::int64_t k = 0;
      for (std::int64_t y = 0; y < ps; ++y) {
        for (std::int64_t x = 0; x < ps; ++x) {
          for (int c = 0; c < 3; ++c) {
            dst[k++] = static_cast<double>(crop.at(pc * ps + x, pr * ps + y, c)) / 127.5 - 1.0;
          }
        }
      }
    }
  }
  return out;
}

Graph::Id encode_tile(Graph& g, Bindings& b, const Image& crop, const ModelConfig& cfg) {
  const auto& vc = cfg.vision;
  const Graph::Id patches = g.input(patchify(crop, vc));
  Graph::Id x = g.linear(patches, b("vision.patch_embed.weight"), b("vision.patch_embed.bias"));
  x = g.add(x, b("vision.pos_embed"));
  for (std::int64_t i = 0; i < vc.layers; ++i) {
    x = block(g, b, "vision.blocks." + std::to_string(i), x, vc.heads, false, nullptr, 1.0);
  }
  x = g.rms_norm(x, b("vision.final_norm.weight"));
  return g.space_to_depth(x, vc.grid(), vc.merge_factor());
}

Graph::Id project(Graph& g, Bindings& b, Graph::Id vision_tokens) {
  const Graph::Id h = g.gelu(g.linear(vision_tokens, b("projector.fc1.weight"), b("projector.fc1.bias")));
  return g.linear(h, b("projector.fc2.weight"), b("projector.fc2.bias"));
}

Graph::Id decoder_logits(Graph& g, Bindings& b, Graph::Id embedded, const ModelConfig& cfg,
                         std::span<const double> inv_freq, double temperature) {
  const auto& lc = cfg.lm;
  const std::int64_t seq = g.value(embedded).rows();
  if (seq < 1) throw ValidationError("forward: empty sequence");
  if (seq > lc.max_seq_len) {
    throw ValidationError("forward: sequence length " + std::to_string(seq) + " exceeds max_seq_len " +
                          std::to_string(lc.max_seq_len));
  }
  if (g.value(embedded).cols() != lc.d_model) throw ShapeError("forward: embedding width != d_model");
  const std::vector<double> freqs(inv_freq.begin(), inv_freq.end());
  Graph::Id x = embedded;
  for (std::int64_t i = 0; i < lc.layers; ++i) {
    x = block(g, b, "lm.layers." + std::to_string(i), x, lc.heads, true, &freqs, temperature);
  }
  x = g.rms_norm(x, b("lm.final_norm.weight"));
  return g.linear(x, b("lm.head.weight"));
}

Tensor encode_tiles(std::span<const Image> crops, const ParamStore& params, const ModelConfig& cfg) {
  if (crops.empty()) return Tensor({0, cfg.vision.merged_width()});
  Graph g;
  Bindings b(g, params);
  std::vector<Graph::Id> parts;
  for (const auto& c : crops) parts.push_back(encode_tile(g, b, c, cfg));
  return g.value(g.concat_rows(parts));
}

Tensor project(const Tensor& vision_tokens, const ParamStore& params) {
  const auto& w1 = params.at("projector.fc1.weight");
  if (vision_tokens.rank() != 2 || vision_tokens.cols() != w1.dim(0)) {
    throw ShapeError("project: token width " + std::to_string(vision_tokens.cols()) + " != projector input " +
                     std::to_string(w1.dim(0)));
  }
  Graph g;
  Bindings b(g, params);
  return g.value(project(g, b, g.input(vision_tokens)));
}

namespace {

Graph::Id image_block(Graph& g, Bindings& b, const Image& image, const ModelConfig& cfg) {
  const TilingPlan plan = plan_tiling(image.width, image.height, cfg.vision);
  const auto crops = tile_image(image, plan, cfg.vision);
  std::vector<Graph::Id> parts;
  for (const auto& c : crops) parts.push_back(encode_tile(g, b, c, cfg));
  const Graph::Id tokens = parts.size() == 1 ? parts.front() : g.concat_rows(parts);
  return project(g, b, tokens);
}

struct Layout {
  std::vector<std::int64_t> tokens;
  std::vector<bool> label_mask;
};

void check_placeholders(const TokenSequence& seq, std::int64_t image_token, std::size_t blocks) {
  if (!seq.supervised.empty() && seq.supervised.size() != seq.ids.size()) {
    throw ValidationError("assemble_sequence: supervised mask length differs from token count");
  }
  const auto n = static_cast<std::size_t>(std::count(seq.ids.begin(), seq.ids.end(), image_token));
  if (n != blocks) {
    throw ValidationError("assemble_sequence: " + std::to_string(n) + " placeholders but " + std::to_string(blocks) +
                          " image blocks");
  }
}

}  // namespace

Tensor embed_image(const Image& image, const ParamStore& params, const ModelConfig& cfg) {
  Graph g;
  Bindings b(g, params);
  return g.value(image_block(g, b, image, cfg));
}

std::vector<std::int64_t> AssembledSequence::targets() const {
  std::vector<std::int64_t> t(tokens.size(), kIgnoreIndex);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (label_mask[i + 1]) t[i] = tokens[i + 1];
  }
  return t;
}

Graph::Id assemble(Graph& g, Bindings& b, const TokenSequence& seq, std::int64_t image_token,
                   const std::vector<Graph::Id>& image_blocks, AssembledSequence* layout) {
  check_placeholders(seq, image_token, image_blocks.size());
  std::vector<Graph::Id> parts;
  Layout lay;
  std::vector<std::int64_t> run;
  auto flush = [&] {
    if (run.empty()) return;
    parts.push_back(g.embedding(run, b("lm.embed.weight")));
    run.clear();
  };
  std::size_t next_block = 0;
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    const std::int64_t id = seq.ids[i];
    if (id == image_token) {
      flush();
      const Graph::Id blk = image_blocks[next_block++];
      parts.push_back(blk);
      const std::int64_t rows = g.value(blk).rows();
      lay.tokens.insert(lay.tokens.end(), static_cast<std::size_t>(rows), -1);
      lay.label_mask.insert(lay.label_mask.end(), static_cast<std::size_t>(rows), false);
    } else {
      run.push_back(id);
      lay.tokens.push_back(id);
      lay.label_mask.push_back(!seq.supervised.empty() && seq.supervised[i]);
    }
  }
  flush();
  if (parts.empty()) throw ValidationError("assemble_sequence: empty sequence");
  const Graph::Id out = parts.size() == 1 ? parts.front() : g.concat_rows(parts);
  if (layout) {
    layout->tokens = std::move(lay.tokens);
    layout->label_mask = std::move(lay.label_mask);
  }
  return out;
}

AssembledSequence assemble_sequence(const TokenSequence& seq, std::int64_t image_token,
                                    std::span<const Tensor> image_blocks, const ParamStore& params) {
  check_placeholders(seq, image_token, image_blocks.size());
  const std::int64_t d = params.at("lm.embed.weight").cols();
  Graph g;
  Bindings b(g, params);
  std::vector<Graph::Id> blocks;
  for (const auto& blk : image_blocks) {
    if (blk.rank() != 2 || blk.cols() != d) throw ShapeError("assemble_sequence: image block width != d_model");
    blocks.push_back(g.input(blk));
  }
  AssembledSequence out;
  if (seq.ids.empty()) {
    out.embeddings = Tensor({0, d});
    return out;
  }
  const Graph::Id id = assemble(g, b, seq, image_token, blocks, &out);
  out.embeddings = g.value(id);
  return out;
}

Tensor forward(const Tensor& embedded, const ParamStore& params, const ModelConfig& cfg,
               std::span<const double> inv_freq, double temperature) {
  Graph g;
  Bindings b(g, params);
  return g.value(decoder_logits(g, b, g.input(embedded), cfg, inv_freq, temperature));
}

Tensor forward(const Tensor& embedded, const ParamStore& params, const ModelConfig& cfg) {
  const auto yarn = nn::yarn_scale(cfg.lm.rope);
  return forward(embedded, params, cfg, yarn.inv_freq, yarn.attention_temperature);
}

std::int64_t supervised_targets(const Example& ex) {
  std::int64_t n = 0;
  // A supervised token in the very first row has no predecessor to predict it.
  for (std::size_t i = 1; i < ex.text.ids.size() && i < ex.text.supervised.size(); ++i) {
    if (ex.text.supervised[i] && ex.text.ids[i] != ByteTokenizer::kImage) ++n;
  }
  return n;
}

Example encode_prompt(std::string_view prompt, std::vector<Image> images) {
  Example ex;
  ex.images = std::move(images);
  ex.text.ids.push_back(ByteTokenizer::kBos);
  static constexpr std::string_view kMarker = "<image>";
  std::size_t pos = 0;
  while (pos < prompt.size()) {
    const std::size_t hit = prompt.find(kMarker, pos);
    const std::size_t end = hit == std::string_view::npos ? prompt.size() : hit;
    const auto ids = ByteTokenizer::encode(prompt.substr(pos, end - pos));
    ex.text.ids.insert(ex.text.ids.end(), ids.begin(), ids.end());
    if (hit == std::string_view::npos) break;
    ex.text.ids.push_back(ByteTokenizer::kImage);
    pos = hit + kMarker.size();
  }
  ex.text.supervised.assign(ex.text.ids.size(), false);
  return ex;
}

double example_loss(const Example& ex, const ParamStore& params, const ModelConfig& cfg, ParamStore* grads,
                    double grad_scale) {
  Graph g;
  Bindings b(g, params, grads);
  std::vector<Graph::Id> blocks;
  for (const auto& img : ex.images) blocks.push_back(image_block(g, b, img, cfg));
  AssembledSequence layout;
  const Graph::Id emb = assemble(g, b, ex.text, ByteTokenizer::kImage, blocks, &layout);
  const auto yarn = nn::yarn_scale(cfg.lm.rope);
  const Graph::Id logits = decoder_logits(g, b, emb, cfg, yarn.inv_freq, yarn.attention_temperature);
  const Graph::Id loss = g.cross_entropy(logits, layout.targets(), kIgnoreIndex);
  if (grads) g.backward(loss, grad_scale);
  return g.value(loss)[0];
}

std::int64_t argmax_row(const Tensor& logits, std::int64_t row) {
  const std::int64_t v = logits.cols();
  const double* r = logits.data() + row * v;
  std::int64_t best = 0;
  for (std::int64_t j = 1; j < v; ++j) {
    if (r[j] > r[best]) best = j;
  }
  return best;
}

std::string generate_greedy(const Example& prompt, const ParamStore& params, const ModelConfig& cfg,
                            const GenerationOptions& opts) {
  if (opts.max_new_tokens <= 0) return {};
  std::vector<Tensor> blocks;
  std::int64_t length = 0;
  for (const auto& img : prompt.images) {
    blocks.push_back(embed_image(img, params, cfg));
    length += blocks.back().rows();
  }
  const auto placeholders = std::count(prompt.text.ids.begin(), prompt.text.ids.end(), ByteTokenizer::kImage);
  length += static_cast<std::int64_t>(prompt.text.ids.size()) - placeholders;
  if (length > cfg.lm.max_seq_len) {
    throw ValidationError("generate_greedy: prompt of " + std::to_string(length) + " positions exceeds max_seq_len " +
                          std::to_string(cfg.lm.max_seq_len));
  }
  const auto yarn = nn::yarn_scale(cfg.lm.rope);
  TokenSequence seq{prompt.text.ids, {}};
  std::vector<std::int64_t> generated;
  std::string text;
  for (std::int64_t step = 0; step < opts.max_new_tokens && length <= cfg.lm.max_seq_len; ++step) {
    const auto assembled = assemble_sequence(seq, ByteTokenizer::kImage, blocks, params);
    const Tensor logits = forward(assembled.embeddings, params, cfg, yarn.inv_freq, yarn.attention_temperature);
    const std::int64_t next = argmax_row(logits, logits.rows() - 1);
    if (std::find(opts.stop_tokens.begin(), opts.stop_tokens.end(), next) != opts.stop_tokens.end()) break;
    generated.push_back(next);
    text = ByteTokenizer::decode(generated);
    bool stopped = false;
    for (const auto& stop : opts.stop_sequences) {
      if (!stop.empty() && text.size() >= stop.size() && text.compare(text.size() - stop.size(), stop.size(), stop) == 0) {
        text.resize(text.size() - stop.size());
        stopped = true;
        break;
      }
    }
    if (stopped) break;
    seq.ids.push_back(next);
    ++length;
  }
  return text;
}

}  // namespace medvlm::model
