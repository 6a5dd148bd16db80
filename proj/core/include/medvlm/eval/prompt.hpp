// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "medvlm/bench/instance.hpp"
#include "medvlm/util/jsonl.hpp"

namespace medvlm::eval {

struct ContentPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string value;  // text, or image path relative to the benchmark

  bool operator==(const ContentPart&) const = default;
};

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::vector<ContentPart> parts;

  /// Concatenated text parts.
  std::string text() const;
  bool operator==(const ChatMessage&) const = default;
};

/// A versioned chat template. Templates are data: adding one for another
/// model family needs no code.
struct PromptTemplate {
  std::string id;
  std::string system_prompt;  // empty: no system message
  std::string mc_instruction = "Answer with the option letter only.";
};

/// Throws ConfigError when the id is unknown.
const PromptTemplate& find_template(const std::string& id);
/// Replaces any template with the same id.
void register_template(PromptTemplate tmpl);
std::vector<std::string> template_ids();

/// System message (if the template has one), one user/assistant pair per
/// shot in order, then the query. Images come before the question text;
/// options render as "A. text" lines followed by the template instruction.
std::vector<ChatMessage> format_prompt(const bench::BenchmarkInstance& instance, const std::string& template_id);

/// The user message for one instance, as used for both queries and shots.
ChatMessage user_message(const bench::BenchmarkInstance& instance, const PromptTemplate& tmpl);

util::Json messages_to_json(const std::vector<ChatMessage>& messages);

}  // namespace medvlm::eval
