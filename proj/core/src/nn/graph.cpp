// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/nn/graph.hpp"

#include "medvlm/util/error.hpp"

namespace medvlm::nn {

Graph::Id Graph::push(Tensor value, std::function<void()> backward) {
  Node node;
  node.owned = std::move(value);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return static_cast<Id>(nodes_.size() - 1);
}

const Tensor& Graph::value(Id id) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(id));
  return n.ref ? *n.ref : n.owned;
}

const Tensor& Graph::grad(Id id) const { return nodes_.at(static_cast<std::size_t>(id)).grad; }

Tensor& Graph::grad_ref(Id id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty() && n.grad.shape().empty()) n.grad = Tensor::zeros_like(value(id));
  return n.grad;
}

void Graph::accumulate(Id id, const Tensor& g) {
  Tensor& dst = grad_ref(id);
  if (dst.size() != g.size()) throw ShapeError("gradient size mismatch on graph node");
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

Graph::Id Graph::param(const Tensor& value, Tensor* grad_sink) {
  Node node;
  node.ref = &value;
  node.sink = grad_sink;
  nodes_.push_back(std::move(node));
  return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::input(Tensor value) { return push(std::move(value)); }

Graph::Id Graph::linear(Id x, Id weight, Id bias) {
  Id out = push(nn::linear(value(x), value(weight), &value(bias)));
  nodes_[static_cast<std::size_t>(out)].backward = [this, x, weight, bias, out] {
    auto g = nn::linear_backward(value(x), value(weight), grad(out), true);
    accumulate(x, g.dx);
    accumulate(weight, g.dweight);
    accumulate(bias, g.dbias);
  };
  return out;
}

Graph::Id Graph::linear(Id x, Id weight) {
  Id out = push(nn::linear(value(x), value(weight), nullptr));
  nodes_[static_cast<std::size_t>(out)].backward = [this, x, weight, out] {
    auto g = nn::linear_backward(value(x), value(weight), grad(out), false);
    accumulate(x, g.dx);
    accumulate(weight, g.dweight);
  };
  return out;
}

Graph::Id Graph::add(Id a, Id b) {
  require_same_shape(value(a), value(b), "graph add");
  Tensor sum = value(a);
  const Tensor& vb = value(b);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += vb[i];
  Id out = push(std::move(sum));
  nodes_[static_cast<std::size_t>(out)].backward = [this, a, b, out] {
    accumulate(a, grad(out));
    accumulate(b, grad(out));
  };
  return out;
}

Graph::Id Graph::rms_norm(Id x, Id weight) {
  Id out = push(nn::rms_norm(value(x), value(weight)));
  nodes_[static_cast<std::size_t>(out)].backward = [this, x, weight, out] {
    auto g = nn::rms_norm_backward(value(x), value(weight), grad(out));
    accumulate(x, g.dx);
    accumulate(weight, g.dweight);
  };
  return out;
}

Graph::Id Graph::gelu(Id x) {
  Id out = push(nn::gelu(value(x)));
  nodes_[static_cast<std::size_t>(out)].backward = [this, x, out] {
    accumulate(x, nn::gelu_backward(value(x), grad(out)));
  };
  return out;
}

Graph::Id Graph::embedding(std::span<const std::int64_t> ids, Id table) {
  const Tensor& tab = value(table);
  const std::int64_t d = tab.cols();
  std::vector<std::int64_t> rows(ids.begin(), ids.end());
  Tensor out({static_cast<std::int64_t>(rows.size()), d});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= tab.dim(0)) {
      throw ValidationError("embedding: token id " + std::to_string(rows[r]) + " outside vocabulary");
    }
    std::copy_n(tab.data() + rows[r] * d, d, out.data() + static_cast<std::int64_t>(r) * d);
  }
  Id id = push(std::move(out));
  nodes_[static_cast<std::size_t>(id)].backward = [this, rows = std::move(rows), table, id, d] {
    Tensor& gt = grad_ref(table);
    const Tensor& go = grad(id);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::int64_t j = 0; j < d; ++j) gt[static_cast<std::size_t>(rows[r] * d + j)] += go.at(static_cast<std::int64_t>(r), j);
    }
  };
  return id;
}

Graph::Id Graph::rope(Id x, std::int64_t heads, std::vector<std::int64_t> positions, std::vector<double> inv_freq) {
  const Tensor& vx = value(x);
  if (vx.rank() != 2 || vx.cols() % heads != 0) throw ShapeError("graph rope expects [seq, heads*head_dim]");
  const Shape flat = vx.shape();
  const Shape split{vx.dim(0), heads, vx.cols() / heads};
  Id out = push(nn::apply_rope(vx.reshaped(split), positions, inv_freq).reshaped(flat));
  nodes_[static_cast<std::size_t>(out)].backward = [this, x, out, split, flat, positions = std::move(positions),
                                                   inv_freq = std::move(inv_freq)] {
    accumulate(x, nn::apply_rope_backward(grad(out).reshaped(split), positions, inv_freq).reshaped(flat));
  };
  return out;
}

Graph::Id Graph::attention(Id q, Id k, Id v, std::int64_t heads, bool causal, double temperature) {
  const Tensor& vq = value(q);
  if (vq.rank() != 2 || vq.cols() % heads != 0) throw ShapeError("graph attention expects [seq, heads*head_dim]");
  const Shape flat = vq.shape();
  const Shape split{vq.dim(0), heads, vq.cols() / heads};
  auto res = nn::attention(vq.reshaped(split), value(k).reshaped(split), value(v).reshaped(split), causal,
                           temperature);
  Id out = push(res.output.reshaped(flat));
  nodes_[static_cast<std::size_t>(out)].backward = [this, q, k, v, out, split, flat, temperature,
                                                   probs = std::move(res.probs)] {
    auto g = nn::attention_backward(value(q).reshaped(split), value(k).reshaped(split), value(v).reshaped(split),
                                    probs, grad(out).reshaped(split), temperature);
    accumulate(q, g.dq.reshaped(flat));
    accumulate(k, g.dk.reshaped(flat));
    accumulate(v, g.dv.reshaped(flat));
  };
  return out;
}

Graph::Id Graph::cross_entropy(Id logits, std::vector<std::int64_t> targets, std::int64_t ignore_index) {
  const double loss = nn::cross_entropy(value(logits), targets, ignore_index);
  Id out = push(Tensor({1}, loss));
  nodes_[static_cast<std::size_t>(out)].backward = [this, logits, out, targets = std::move(targets),
                                                   ignore_index] {
    Tensor g = nn::cross_entropy_backward(value(logits), targets, ignore_index);
    const double upstream = grad(out)[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= upstream;
    accumulate(logits, g);
  };
  return out;
}

Graph::Id Graph::concat_rows(const std::vector<Id>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  const std::int64_t d = value(parts.front()).cols();
  std::int64_t total = 0;
  for (Id p : parts) {
    if (value(p).cols() != d) throw ShapeError("concat_rows width mismatch");
    total += value(p).rows();
  }
  Tensor out({total, d});
  std::int64_t row = 0;
  for (Id p : parts) {
    const Tensor& vp = value(p);
    std::copy(vp.values().begin(), vp.values().end(), out.data() + row * d);
    row += vp.rows();
  }
  Id id = push(std::move(out));
  nodes_[static_cast<std::size_t>(id)].backward = [this, parts, id, d] {
    const Tensor& go = grad(id);
    std::int64_t r = 0;
    for (Id p : parts) {
      Tensor& gp = grad_ref(p);
      const std::int64_t n = value(p).rows() * d;
      for (std::int64_t i = 0; i < n; ++i) gp[static_cast<std::size_t>(i)] += go[static_cast<std::size_t>(r * d + i)];
      r += value(p).rows();
    }
  };
  return id;
}

Tensor space_to_depth(const Tensor& x, std::int64_t grid, std::int64_t factor) {
  if (factor <= 0 || grid % factor != 0 || x.rows() != grid * grid) {
    throw ShapeError("space_to_depth: grid " + std::to_string(grid) + " factor " + std::to_string(factor) +
                     " on " + shape_str(x.shape()));
  }
  const std::int64_t d = x.cols(), g2 = grid / factor;
  Tensor out({g2 * g2, factor * factor * d});
  for (std::int64_t br = 0; br < g2; ++br) {
    for (std::int64_t bc = 0; bc < g2; ++bc) {
      double* dst = out.data() + (br * g2 + bc) * factor * factor * d;
      for (std::int64_t dr = 0; dr < factor; ++dr) {
        for (std::int64_t dc = 0; dc < factor; ++dc) {
          const std::int64_t src_row = (br * factor + dr) * grid + (bc * factor + dc);
          std::copy_n(x.data() + src_row * d, d, dst + (dr * factor + dc) * d);
        }
      }
    }
  }
  return out;
}

Tensor depth_to_space(const Tensor& y, std::int64_t grid, std::int64_t factor) {
  const std::int64_t g2 = grid / factor;
  const std::int64_t d = y.cols() / (factor * factor);
  if (y.rows() != g2 * g2 || y.cols() != factor * factor * d) throw ShapeError("depth_to_space shape mismatch");
  Tensor x({grid * grid, d});
  for (std::int64_t br = 0; br < g2; ++br) {
    for (std::int64_t bc = 0; bc < g2; ++bc) {
      const double* src = y.data() + (br * g2 + bc) * factor * factor * d;
      for (std::int64_t dr = 0; dr < factor; ++dr) {
        for (std::int64_t dc = 0; dc < factor; ++dc) {
          const std::int64_t dst_row = (br * factor + dr) * grid + (bc * factor + dc);
          std::copy_n(src + (dr * factor + dc) * d, d, x.data() + dst_row * d);
        }
      }
    }
  }
  return x;
}

Graph::Id Graph::space_to_depth(Id x, std::int64_t grid, std::int64_t factor) {
  Id out = push(nn::space_to_depth(value(x), grid, factor));
  nodes_[static_cast<std::size_t>(out)].backward = [this, x, out, grid, factor] {
    accumulate(x, nn::depth_to_space(grad(out), grid, factor));
  };
  return out;
}

void Graph::backward(Id loss, double seed) {
  if (value(loss).size() != 1) throw ShapeError("backward expects a scalar loss");
  for (auto& n : nodes_) n.grad = Tensor();
  grad_ref(loss)[0] = seed;
  for (Id i = loss; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward();
    if (n.sink) {
      Tensor& s = *n.sink;
      if (s.size() != n.grad.size()) throw ShapeError("gradient sink shape mismatch");
      for (std::size_t j = 0; j < s.size(); ++j) s[j] += n.grad[j];
    }
  }
}

}  // namespace medvlm::nn
