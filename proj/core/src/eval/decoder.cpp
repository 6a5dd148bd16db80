// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "medvlm/eval/decoder.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>

#include "medvlm/model/image.hpp"
#include "medvlm/model/vlm.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::eval {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string mime_type(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  return "application/octet-stream";
}

util::Json decode_json(const DecodeParams& p) { return {{"max_new_tokens", p.max_new_tokens}, {"stop", p.stop}}; }

}  // namespace

void EndpointConfig::validate() const {
  if (max_retries < 0) throw ConfigError("endpoint max_retries must be >= 0");
  if (max_concurrency < 1) throw ConfigError("endpoint concurrency must be >= 1");
  if (!(timeout_seconds > 0.0)) throw ConfigError("endpoint timeout must be positive");
  if (decode.max_new_tokens < 0) throw ConfigError("max_new_tokens must be >= 0");
  if (retry_backoff_ms < 0) throw ConfigError("retry backoff must be >= 0");
}

std::string to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::ok:
      return "ok";
    case DecodeStatus::transport_error:
      return "transport_error";
    case DecodeStatus::http_error:
      return "http_error";
    case DecodeStatus::malformed_response:
      return "malformed_response";
    case DecodeStatus::decode_error:
      return "decode_error";
  }
  return "unknown";
}

HttpDecoder::HttpDecoder(EndpointConfig config, std::filesystem::path image_root)
    : config_(std::move(config)), image_root_(std::move(image_root)) {
  config_.validate();
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL '" + url + "' has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("endpoint URL must be http or https");
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

util::Json HttpDecoder::request_body(const std::vector<ChatMessage>& messages) const {
  auto msgs = util::Json::array();
  for (const auto& m : messages) {
    auto content = util::Json::array();
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::text) {
        content.push_back({{"type", "text"}, {"text", p.value}});
      } else {
        const auto path = image_root_ / p.value;
        const auto url = "data:" + mime_type(path) + ";base64," + util::base64_encode(util::read_file(path));
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
      }
    }
    msgs.push_back({{"role", m.role}, {"content", content}});
  }
  util::Json body{{"model", config_.model}, {"messages", msgs}, {"temperature", 0},
                  {"max_tokens", config_.decode.max_new_tokens}};
  if (!config_.decode.stop.empty()) body["stop"] = config_.decode.stop;
  return body;
}

DecodeResult HttpDecoder::decode(const std::vector<ChatMessage>& messages) {
  DecodeResult result;
  const auto start = Clock::now();
  std::string body;
  try {
    body = request_body(messages).dump();
  } catch (const Error& e) {
    result.status = DecodeStatus::decode_error;
    result.error = e.what();
    return result;
  }
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  const auto path = path_prefix_ + "/chat/completions";

  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0 && config_.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms * attempt));
    }
    result.attempts = attempt + 1;
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      result.status = DecodeStatus::transport_error;
      result.error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      result.status = DecodeStatus::transport_error;
      result.error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      result.status = DecodeStatus::http_error;
      result.error = "HTTP " + std::to_string(res->status);
      break;
    }
    try {
      const auto j = util::Json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      std::string text;
      if (content.is_string()) {
        text = content.get<std::string>();
      } else {
        for (const auto& part : content) {
          if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
        }
      }
      result.status = DecodeStatus::ok;
      result.text = std::move(text);
      result.error.clear();
    } catch (const util::Json::exception& e) {
      result.status = DecodeStatus::malformed_response;
      result.error = e.what();
    }
    break;
  }
  result.latency_ms = elapsed_ms(start);
  return result;
}

util::Json HttpDecoder::describe() const {
  return {{"kind", "http"}, {"base_url", config_.base_url}, {"model", config_.model},
          {"temperature", 0}, {"decode", decode_json(config_.decode)}};
}

LocalDecoder::LocalDecoder(const std::filesystem::path& checkpoint, DecodeParams params,
                           std::filesystem::path image_root)
    : checkpoint_(model::load_checkpoint(checkpoint)),
      checkpoint_sha256_(util::sha256_file(checkpoint)),
      params_(std::move(params)),
      image_root_(std::move(image_root)) {}

std::string LocalDecoder::render(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    if (m.role == "system") continue;
    if (m.role == "assistant") {
      out += m.text() + "\n";
      continue;
    }
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::image) out += "<image>";
    }
    out += "question: " + m.text() + "\nanswer: ";
  }
  return out;
}

DecodeResult LocalDecoder::decode(const std::vector<ChatMessage>& messages) {
  DecodeResult result;
  result.attempts = 1;
  const auto start = Clock::now();
  try {
    std::vector<model::Image> images;
    for (const auto& m : messages) {
      for (const auto& p : m.parts) {
        if (p.kind == ContentPart::Kind::image) images.push_back(model::read_ppm(image_root_ / p.value));
      }
    }
    const auto prompt = model::encode_prompt(render(messages), std::move(images));
    model::GenerationOptions opts;
    opts.max_new_tokens = params_.max_new_tokens;
    opts.stop_sequences = params_.stop;
    result.text = model::generate_greedy(prompt, checkpoint_.params, checkpoint_.config, opts);
  } catch (const Error& e) {
    result.status = DecodeStatus::decode_error;
    result.error = e.what();
  }
  result.latency_ms = elapsed_ms(start);
  return result;
}

util::Json LocalDecoder::describe() const {
  return {{"kind", "local"}, {"checkpoint_sha256", checkpoint_sha256_}, {"decode", decode_json(params_)}};
}

std::unique_ptr<Decoder> make_decoder(const std::string& spec, EndpointConfig endpoint,
                                      const std::filesystem::path& image_root) {
  if (spec.starts_with("local:")) {
    endpoint.validate();
    return std::make_unique<LocalDecoder>(spec.substr(6), endpoint.decode, image_root);
  }
  endpoint.base_url = spec;
  return std::make_unique<HttpDecoder>(std::move(endpoint), image_root);
}

}  // namespace medvlm::eval
