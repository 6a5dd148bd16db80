// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reverse-mode tape over the primitives in ops.hpp. A Graph lives for one
// forward/backward pass; parameter leaves reference caller-owned tensors and
// accumulate their gradients into caller-owned sinks.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "medvlm/nn/ops.hpp"
#include "medvlm/nn/tensor.hpp"

namespace medvlm::nn {

class Graph {
 public:
  using Id = std::int32_t;

  /// Leaf bound to `value` (not copied; must outlive the graph). When
  /// `grad_sink` is non-null the leaf's gradient is added into it by backward().
  Id param(const Tensor& value, Tensor* grad_sink);
  /// Leaf owning its value; receives a gradient that can be read with grad().
  Id input(Tensor value);

  Id linear(Id x, Id weight, Id bias);
  Id linear(Id x, Id weight);
  Id add(Id a, Id b);
  Id rms_norm(Id x, Id weight);
  Id gelu(Id x);
  /// Rows of `table` selected by ids.
  Id embedding(std::span<const std::int64_t> ids, Id table);
  /// x: [seq, heads * head_dim].
  Id rope(Id x, std::int64_t heads, std::vector<std::int64_t> positions, std::vector<double> inv_freq);
  /// q, k, v: [seq, heads * head_dim].
  Id attention(Id q, Id k, Id v, std::int64_t heads, bool causal, double temperature);
  /// Scalar mean cross-entropy, shape [1].
  Id cross_entropy(Id logits, std::vector<std::int64_t> targets, std::int64_t ignore_index);
  Id concat_rows(const std::vector<Id>& parts);
  /// [grid*grid, d] -> [(grid/factor)^2, factor^2 * d], merging factor x factor neighbourhoods.
  Id space_to_depth(Id x, std::int64_t grid, std::int64_t factor);

  const Tensor& value(Id id) const;
  const Tensor& grad(Id id) const;

  /// Seeds d(loss) = seed and propagates to every leaf.
  void backward(Id loss, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    Tensor* sink = nullptr;
    std::function<void()> backward;
  };

  Id push(Tensor value, std::function<void()> backward = {});
  Tensor& grad_ref(Id id);
  void accumulate(Id id, const Tensor& g);

  std::vector<Node> nodes_;
};

/// Space-to-depth on a plain tensor; shared by the graph op and its tests.
Tensor space_to_depth(const Tensor& x, std::int64_t grid, std::int64_t factor);
Tensor depth_to_space(const Tensor& y, std::int64_t grid, std::int64_t factor);

}  // namespace medvlm::nn
