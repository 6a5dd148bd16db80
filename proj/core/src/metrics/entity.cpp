// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/metrics/entity.hpp"

#include <cctype>
#include <set>

#include "medvlm/util/error.hpp"

namespace medvlm::metrics {
namespace {

std::string normalize(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

struct Token {
  std::string word;
  bool sentence_start = false;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string cur;
  bool boundary = true;
  auto flush = [&] {
    if (cur.empty()) return;
    out.push_back({std::move(cur), boundary});
    cur.clear();
    boundary = false;
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
      continue;
    }
    flush();
    if (c == '.' || c == ';' || c == '!' || c == '?' || c == '\n') boundary = true;
  }
  flush();
  return out;
}

}  // namespace

std::string to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negative"; }

Polarity parse_polarity(std::string_view s) {
  if (s == "positive" || s == "present") return Polarity::positive;
  if (s == "negative" || s == "absent") return Polarity::negative;
  throw ValidationError("unknown polarity '" + std::string(s) + "'");
}

Entity Entity::make(std::string_view text, std::string label, Polarity polarity) {
  Entity e{normalize(text), std::move(label), polarity};
  if (e.text.empty()) throw ValidationError("entity text is empty");
  return e;
}

void EntityGraph::validate() const {
  for (const auto& r : relations) {
    if (r.from >= entities.size() || r.to >= entities.size()) {
      throw ValidationError("relation endpoint out of range");
    }
  }
}

util::Json graph_to_json(const std::string& report_id, const EntityGraph& graph) {
  auto ents = util::Json::array();
  for (const auto& e : graph.entities) {
    ents.push_back({{"text", e.text}, {"label", e.label}, {"polarity", to_string(e.polarity)}});
  }
  util::Json j{{"report_id", report_id}, {"entities", ents}};
  if (!graph.relations.empty()) {
    auto rels = util::Json::array();
    for (const auto& r : graph.relations) rels.push_back({{"from", r.from}, {"to", r.to}, {"label", r.label}});
    j["relations"] = rels;
  }
  return j;
}

EntityGraph graph_from_json(const util::Json& j) {
  EntityGraph g;
  try {
    for (const auto& e : j.at("entities")) {
      g.entities.push_back(Entity::make(e.at("text").get<std::string>(), e.value("label", std::string()),
                                        parse_polarity(e.value("polarity", std::string("positive")))));
    }
    for (const auto& r : j.value("relations", util::Json::array())) {
      g.relations.push_back(
          {r.at("from").get<std::size_t>(), r.at("to").get<std::size_t>(), r.value("label", std::string())});
    }
  } catch (const util::Json::exception& e) {
    throw ValidationError(std::string("malformed entity graph: ") + e.what());
  }
  g.validate();
  return g;
}

std::vector<std::pair<std::string, EntityGraph>> read_entity_graphs(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, EntityGraph>> out;
  std::set<std::string> seen;
  for (const auto& j : util::read_jsonl(path)) {
    if (!j.contains("report_id")) throw ValidationError(path.string() + ": record without report_id");
    auto id = j["report_id"].get<std::string>();
    if (!seen.insert(id).second) throw ValidationError(path.string() + ": duplicate report_id '" + id + "'");
    out.emplace_back(std::move(id), graph_from_json(j));
  }
  return out;
}

ToyExtractor::ToyExtractor(std::map<std::string, std::string> lexicon, std::size_t window)
    : lexicon_(std::move(lexicon)), window_(window) {
  for (const auto& [term, label] : lexicon_) {
    std::size_t words = 1;
    for (char c : term) words += c == ' ' ? 1 : 0;
    max_words_ = std::max(max_words_, words);
  }
}

std::map<std::string, std::string> ToyExtractor::default_lexicon() {
  return {
      {"effusion", "observation"},       {"pleural effusion", "observation"}, {"pneumothorax", "observation"},
      {"consolidation", "observation"},  {"opacity", "observation"},          {"edema", "observation"},
      {"cardiomegaly", "observation"},   {"atelectasis", "observation"},      {"nodule", "observation"},
      {"fracture", "observation"},       {"pneumonia", "observation"},        {"abnormality", "observation"},
      {"square", "observation"},         {"circle", "observation"},           {"triangle", "observation"},
      {"lung", "anatomy"},               {"lungs", "anatomy"},                {"heart", "anatomy"},
      {"mediastinum", "anatomy"},        {"pleural", "anatomy"},              {"left lower lobe", "anatomy"},
      {"right lower lobe", "anatomy"},   {"upper field", "anatomy"},          {"lower field", "anatomy"},
  };
}

EntityGraph ToyExtractor::extract(std::string_view report) const {
  const auto tokens = tokenize(report);
  EntityGraph g;
  std::size_t sentence_begin = 0;
  for (std::size_t i = 0; i < tokens.size();) {
    if (tokens[i].sentence_start) sentence_begin = i;
    std::size_t matched = 0;
    std::string term;
    for (std::size_t n = std::min(max_words_, tokens.size() - i); n >= 1; --n) {
      std::string candidate;
      bool crosses = false;
      for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && tokens[i + k].sentence_start) crosses = true;
        if (k > 0) candidate += ' ';
        candidate += tokens[i + k].word;
      }
      if (!crosses && lexicon_.contains(candidate)) {
        matched = n;
        term = std::move(candidate);
        break;
      }
    }
    if (matched == 0) {
      ++i;
      continue;
    }
    bool negated = false;
    const std::size_t from = i >= window_ ? std::max(i - window_, sentence_begin) : sentence_begin;
    for (std::size_t k = from; k < i; ++k) {
      const auto& w = tokens[k].word;
      if (w == "no" || w == "without") negated = true;
      if (w == "negative" && k + 1 < tokens.size() && tokens[k + 1].word == "for" && k + 1 < i) negated = true;
    }
    g.entities.push_back(Entity::make(term, lexicon_.at(term), negated ? Polarity::negative : Polarity::positive));
    i += matched;
  }
  return g;
}

}  // namespace medvlm::metrics
