// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/model/params.hpp"

#include "medvlm/util/error.hpp"

namespace medvlm::model {

nn::Tensor& ParamStore::add(std::string path, nn::Tensor value) {
  if (index_.contains(path)) throw ValidationError("duplicate parameter path " + path);
  index_.emplace(path, entries_.size());
  entries_.emplace_back(std::move(path), std::move(value));
  return entries_.back().second;
}

bool ParamStore::contains(std::string_view path) const { return index_.find(path) != index_.end(); }

nn::Tensor& ParamStore::at(std::string_view path) {
  auto it = index_.find(path);
  if (it == index_.end()) throw ValidationError("unknown parameter path " + std::string(path));
  return entries_[it->second].second;
}

const nn::Tensor& ParamStore::at(std::string_view path) const {
  auto it = index_.find(path);
  if (it == index_.end()) throw ValidationError("unknown parameter path " + std::string(path));
  return entries_[it->second].second;
}

std::vector<std::string> ParamStore::paths() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [p, _] : entries_) out.push_back(p);
  return out;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore z;
  for (const auto& [p, t] : entries_) z.add(p, nn::Tensor::zeros_like(t));
  return z;
}

void ParamStore::zero() {
  for (auto& [_, t] : entries_) t.fill(0.0);
}

std::int64_t ParamStore::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& [_, t] : entries_) n += static_cast<std::int64_t>(t.size());
  return n;
}

std::string module_of(std::string_view path) { return std::string(path.substr(0, path.find('.'))); }

}  // namespace medvlm::model
