// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/model/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"

namespace medvlm::model {
namespace {

constexpr char kMagic[8] = {'M', 'V', 'L', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  if (pos + static_cast<std::size_t>(bytes) > in.size()) throw IoError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  util::Json header;
  header["format"] = "medvlm-checkpoint";
  header["config"] = ckpt.config;
  util::Json tensors = util::Json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& t = ckpt.params.tensor(i);
    const std::uint64_t nbytes = t.size() * sizeof(double);
    tensors.push_back({{"path", ckpt.params.path(i)},
                       {"shape", t.shape()},
                       {"dtype", "f64"},
                       {"offset", offset},
                       {"nbytes", nbytes}});
    offset += nbytes;
  }
  header["tensors"] = std::move(tensors);
  header["extra"] = ckpt.extra;
  const std::string hdr = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kVersion, 4);
  put_le(out, hdr.size(), 8);
  out += hdr;
  out.reserve(out.size() + offset);
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    for (double x : ckpt.params.tensor(i).values()) put_le(out, std::bit_cast<std::uint64_t>(x), 8);
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("checkpoint: bad magic");
  }
  const auto version = get_le(bytes, 8, 4);
  if (version != kVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const auto hdr_len = get_le(bytes, 12, 8);
  const std::size_t data_start = 20 + hdr_len;
  if (data_start > bytes.size()) throw IoError("checkpoint: truncated header");
  util::Json header;
  try {
    header = util::Json::parse(bytes.substr(20, hdr_len));
  } catch (const util::Json::exception& e) {
    throw IoError(std::string("checkpoint: malformed header: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.config = header.at("config").get<ModelConfig>();
  ckpt.extra = header.value("extra", util::Json::object());
  for (const auto& entry : header.at("tensors")) {
    if (entry.at("dtype") != "f64") throw IoError("checkpoint: unsupported dtype");
    const auto shape = entry.at("shape").get<nn::Shape>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
    nn::Tensor t(shape);
    if (nbytes != t.size() * sizeof(double)) throw IoError("checkpoint: tensor byte count does not match shape");
    if (data_start + offset + nbytes > bytes.size()) throw IoError("checkpoint: tensor data out of range");
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = std::bit_cast<double>(get_le(bytes, data_start + offset + 8 * i, 8));
    }
    ckpt.params.add(entry.at("path").get<std::string>(), std::move(t));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  util::write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(util::read_file(path)); }

}  // namespace medvlm::model
