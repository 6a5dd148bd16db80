// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "medvlm/util/jsonl.hpp"

namespace medvlm::metrics {

enum class Polarity { positive, negative };

std::string to_string(Polarity p);
/// Accepts "positive"/"negative" (also "present"/"absent"). Throws ValidationError.
Polarity parse_polarity(std::string_view s);

struct Entity {
  std::string text;  // lower-cased, whitespace-collapsed
  std::string label;
  Polarity polarity = Polarity::positive;

  /// Normalizes the text; throws ValidationError when it ends up empty.
  static Entity make(std::string_view text, std::string label, Polarity polarity);
  auto operator<=>(const Entity&) const = default;
};

struct Relation {
  std::size_t from = 0;
  std::size_t to = 0;
  std::string label;

  bool operator==(const Relation&) const = default;
};

struct EntityGraph {
  std::vector<Entity> entities;
  std::vector<Relation> relations;

  /// Relation endpoints must index entities.
  void validate() const;
  bool operator==(const EntityGraph&) const = default;
};

/// Line-delimited {report_id, entities: [{text, label, polarity}], relations?}.
util::Json graph_to_json(const std::string& report_id, const EntityGraph& graph);
EntityGraph graph_from_json(const util::Json& j);
/// report_id -> graph, in file order; duplicate ids are an error.
std::vector<std::pair<std::string, EntityGraph>> read_entity_graphs(const std::filesystem::path& path);

/// Lexicon lookup with a negation window. Demo-grade only: real extractors
/// are learned models.
class ToyExtractor {
 public:
  /// Term (one or more lower-case words) -> label.
  explicit ToyExtractor(std::map<std::string, std::string> lexicon = default_lexicon(), std::size_t window = 3);

  /// Longest-match terms over lower-cased alphanumeric tokens. A term is
  /// negative when "no", "without" or "negative for" occurs in the `window`
  /// tokens before it within the same sentence.
  EntityGraph extract(std::string_view report) const;

  static std::map<std::string, std::string> default_lexicon();

 private:
  std::map<std::string, std::string> lexicon_;
  std::size_t max_words_ = 1;
  std::size_t window_;
};

}  // namespace medvlm::metrics
