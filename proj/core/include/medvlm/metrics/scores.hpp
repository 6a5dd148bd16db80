// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medvlm/metrics/entity.hpp"

namespace medvlm::metrics {

inline constexpr double kPartialCredit = 0.5;

/// 1 when text, label and polarity agree; `partial` when only the text does; else 0.
double entity_match_credit(const Entity& pred, const Entity& ref, double partial = kPartialCredit);

/// Best total credit over one-to-one matchings, by bitmask dynamic
/// programming over the smaller side. Exponential in min(|pred|, |ref|).
double optimal_credit_exact(const std::vector<Entity>& pred, const std::vector<Entity>& ref,
                            double partial = kPartialCredit);
/// Highest credit first; ties by (pred entity, ref entity, pred index, ref
/// index). Optimal whenever credits are {0, partial, 1} as produced by
/// entity_match_credit, because full matches only occur inside a text group.
double optimal_credit_greedy(const std::vector<Entity>& pred, const std::vector<Entity>& ref,
                             double partial = kPartialCredit);

struct F1Parts {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean with the empty conventions: both empty -> 1, one empty -> 0.
F1Parts f1_from_credit(double pred_credit, double ref_credit, std::size_t n_pred, std::size_t n_ref);

/// Entity-level partial-credit F1. Exact assignment when both sides have at
/// most `exact_limit` entities, greedy otherwise.
F1Parts radgraph_partial_f1(const EntityGraph& pred, const EntityGraph& ref, std::size_t exact_limit = 12,
                            double partial = kPartialCredit);

using Embedder = std::function<std::vector<double>(std::string_view)>;

/// Character trigrams of " text " hashed (FNV-1a) into `dim` buckets, L2-normalized.
/// Text with no trigrams maps to the zero vector.
class TrigramHashEmbedder {
 public:
  explicit TrigramHashEmbedder(std::size_t dim = 128) : dim_(dim) {}
  std::vector<double> operator()(std::string_view text) const;
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
};

double cosine(std::span<const double> a, std::span<const double> b);

struct RateResult {
  F1Parts parts;
  /// Entities whose embedding was the zero vector; each scored 0.
  std::size_t zero_vectors = 0;
};

/// Soft match: each entity takes its best cosine against same-polarity
/// entities on the other side, zeroed below tau. Precision and recall are
/// the means over pred and ref.
RateResult rate_similarity_f1(const std::vector<Entity>& pred, const std::vector<Entity>& ref, const Embedder& embed,
                              double tau = 0.5);

/// Lower-case alphanumeric runs.
std::vector<std::string> bleu_tokens(std::string_view text);
/// BLEU-4, uniform weights, clipped counts, no smoothing, brevity penalty.
double bleu4(std::string_view pred, std::string_view ref);
/// Corpus form: n-gram counts and lengths summed before combining.
double corpus_bleu4(std::span<const std::string> preds, std::span<const std::string> refs);

/// Placeholder weights; not the published coefficients.
struct CompositeConfig {
  double w0 = 0.0;
  double w1 = 1.0;
  double w2 = 1.0;
};

/// w0 + w1 (1 - graph_f1) + w2 (1 - bleu); lower is better.
double radcliq_composite(double graph_f1, double bleu, const CompositeConfig& cfg = {});

/// 1 / mean(scores). Throws ValidationError on empty input or mean <= 0.
double reciprocal_mean(std::span<const double> scores);

}  // namespace medvlm::metrics
