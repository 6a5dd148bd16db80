// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Checkpoint layout (all integers little-endian):
//   8 bytes   magic "MVLMCKPT"
//   u32       format version (1)
//   u64       header length N
//   N bytes   JSON header {"config", "tensors": [{path, shape, dtype, offset, nbytes}], "extra"}
//   ...       raw float64 tensor data; offsets are relative to the end of the header

#include <filesystem>
#include <string>

#include "medvlm/model/config.hpp"
#include "medvlm/model/params.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::model {

struct Checkpoint {
  ModelConfig config;
  ParamStore params;
  util::Json extra = util::Json::object();
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace medvlm::model
