// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "medvlm/eval/prompt.hpp"
#include "medvlm/model/checkpoint.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::eval {

/// Greedy only: temperature is always sent as 0.
struct DecodeParams {
  std::int64_t max_new_tokens = 2048;
  std::vector<std::string> stop;
};

struct EndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1; requests go to <base>/chat/completions
  std::string model;
  double timeout_seconds = 120.0;
  int max_retries = 3;
  int max_concurrency = 1;
  int retry_backoff_ms = 100;  // multiplied by the attempt number
  DecodeParams decode;
  std::string api_key;  // from MEDVLM_API_KEY; never serialized

  void validate() const;
};

enum class DecodeStatus { ok, transport_error, http_error, malformed_response, decode_error };
std::string to_string(DecodeStatus s);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::ok;
  std::string text;
  std::string error;
  int attempts = 0;
  double latency_ms = 0.0;
};

/// One completion per call. Implementations must be safe to call from
/// several threads at once.
class Decoder {
 public:
  virtual ~Decoder() = default;
  virtual DecodeResult decode(const std::vector<ChatMessage>& messages) = 0;
  /// Output-relevant identity of the decoder (no credentials, no transport
  /// tuning), hashed into the run summary.
  virtual util::Json describe() const = 0;
};

/// Chat-completions client. Connection failures, 429 and 5xx responses are
/// retried up to max_retries times; every other outcome is final.
class HttpDecoder final : public Decoder {
 public:
  HttpDecoder(EndpointConfig config, std::filesystem::path image_root);
  DecodeResult decode(const std::vector<ChatMessage>& messages) override;
  util::Json describe() const override;

  /// The JSON body sent for `messages`, images inlined as base64 data URLs.
  util::Json request_body(const std::vector<ChatMessage>& messages) const;

 private:
  EndpointConfig config_;
  std::filesystem::path image_root_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

/// Greedy decoding with a trained checkpoint. Messages are flattened into
/// the training layout: "<image>" markers, "question: ", "answer: ".
class LocalDecoder final : public Decoder {
 public:
  LocalDecoder(const std::filesystem::path& checkpoint, DecodeParams params, std::filesystem::path image_root);
  DecodeResult decode(const std::vector<ChatMessage>& messages) override;
  util::Json describe() const override;

  static std::string render(const std::vector<ChatMessage>& messages);

 private:
  model::Checkpoint checkpoint_;
  std::string checkpoint_sha256_;
  DecodeParams params_;
  std::filesystem::path image_root_;
};

/// "local:PATH" selects LocalDecoder; anything else is an endpoint URL.
std::unique_ptr<Decoder> make_decoder(const std::string& spec, EndpointConfig endpoint,
                                      const std::filesystem::path& image_root);

}  // namespace medvlm::eval
