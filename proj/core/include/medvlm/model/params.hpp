// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medvlm/nn/tensor.hpp"

namespace medvlm::model {

/// Named parameter tensors, addressable by dotted path (`projector.fc1.weight`).
/// Iteration order is insertion order and is stable across runs.
class ParamStore {
 public:
  nn::Tensor& add(std::string path, nn::Tensor value);

  bool contains(std::string_view path) const;
  nn::Tensor& at(std::string_view path);
  const nn::Tensor& at(std::string_view path) const;

  std::size_t size() const { return entries_.size(); }
  const std::string& path(std::size_t i) const { return entries_[i].first; }
  nn::Tensor& tensor(std::size_t i) { return entries_[i].second; }
  const nn::Tensor& tensor(std::size_t i) const { return entries_[i].second; }
  std::vector<std::string> paths() const;

  /// Same paths and shapes, all zeros.
  ParamStore zeros_like() const;
  void zero();
  std::int64_t parameter_count() const;

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, nn::Tensor>> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Top-level module of a path: "vision", "projector" or "lm".
std::string module_of(std::string_view path);

}  // namespace medvlm::model
