// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/eval/prompt.hpp"

#include <map>
#include <mutex>

#include "medvlm/util/error.hpp"

namespace medvlm::eval {
namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, PromptTemplate> templates;

  Registry() {
    templates["medvlm-chat-v1"] = {"medvlm-chat-v1", "You are a careful medical assistant. Answer concisely.",
                                   "Answer with the option letter only."};
    templates["plain-v1"] = {"plain-v1", "", "Answer with the option letter only."};
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

std::string ChatMessage::text() const {
  std::string out;
  for (const auto& p : parts) {
    if (p.kind == ContentPart::Kind::text) out += p.value;
  }
  return out;
}

const PromptTemplate& find_template(const std::string& id) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  const auto it = r.templates.find(id);
  if (it == r.templates.end()) throw ConfigError("unknown prompt template '" + id + "'");
  return it->second;
}

void register_template(PromptTemplate tmpl) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto id = tmpl.id;
  r.templates.insert_or_assign(std::move(id), std::move(tmpl));
}

std::vector<std::string> template_ids() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> ids;
  for (const auto& [id, t] : r.templates) ids.push_back(id);
  return ids;
}

ChatMessage user_message(const bench::BenchmarkInstance& instance, const PromptTemplate& tmpl) {
  ChatMessage msg{"user", {}};
  for (const auto& img : instance.images) msg.parts.push_back({ContentPart::Kind::image, img});
  std::string text = instance.question;
  if (instance.is_multiple_choice()) {
    for (const auto& o : instance.options) text += "\n" + o.key + ". " + o.text;
    text += "\n" + tmpl.mc_instruction;
  }
  msg.parts.push_back({ContentPart::Kind::text, std::move(text)});
  return msg;
}

std::vector<ChatMessage> format_prompt(const bench::BenchmarkInstance& instance, const std::string& template_id) {
  const auto& tmpl = find_template(template_id);
  std::vector<ChatMessage> messages;
  if (!tmpl.system_prompt.empty()) messages.push_back({"system", {{ContentPart::Kind::text, tmpl.system_prompt}}});
  for (const auto& shot : instance.shots) {
    messages.push_back(user_message(shot, tmpl));
    const auto it = shot.meta.find("reference");
    std::string answer = shot.is_multiple_choice() ? shot.answer_key : (it == shot.meta.end() ? "" : it->second);
    if (answer.empty()) throw ValidationError("shot '" + shot.id + "' has no answer to demonstrate");
    messages.push_back({"assistant", {{ContentPart::Kind::text, std::move(answer)}}});
  }
  messages.push_back(user_message(instance, tmpl));
  return messages;
}

util::Json messages_to_json(const std::vector<ChatMessage>& messages) {
  auto arr = util::Json::array();
  for (const auto& m : messages) {
    auto parts = util::Json::array();
    for (const auto& p : m.parts) {
      parts.push_back({{"type", p.kind == ContentPart::Kind::text ? "text" : "image"}, {"value", p.value}});
    }
    arr.push_back({{"role", m.role}, {"content", parts}});
  }
  return arr;
}

}  // namespace medvlm::eval
