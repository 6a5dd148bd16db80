// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/metrics/scores.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <tuple>

#include "medvlm/util/error.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::metrics {

double entity_match_credit(const Entity& pred, const Entity& ref, double partial) {
  if (pred.text != ref.text) return 0.0;
  return pred.label == ref.label && pred.polarity == ref.polarity ? 1.0 : partial;
}

double optimal_credit_exact(const std::vector<Entity>& pred, const std::vector<Entity>& ref, double partial) {
  const bool swap = pred.size() < ref.size();
  const auto& outer = swap ? ref : pred;
  const auto& inner = swap ? pred : ref;
  const std::size_t m = inner.size();
  if (m > 20) throw ValidationError("exact assignment limited to 20 entities on the smaller side");
  const std::size_t states = std::size_t{1} << m;
  std::vector<double> best(states, -1.0);
  best[0] = 0.0;
  for (const auto& o : outer) {
    auto next = best;
    for (std::size_t mask = 0; mask < states; ++mask) {
      if (best[mask] < 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const double c = swap ? entity_match_credit(inner[j], o, partial) : entity_match_credit(o, inner[j], partial);
        if (c <= 0.0) continue;
        auto& slot = next[mask | (std::size_t{1} << j)];
        slot = std::max(slot, best[mask] + c);
      }
    }
    best = std::move(next);
  }
  return *std::max_element(best.begin(), best.end());
}

double optimal_credit_greedy(const std::vector<Entity>& pred, const std::vector<Entity>& ref, double partial) {
  struct Edge {
    double credit;
    std::size_t i, j;
  };
  std::vector<Edge> edges;
  std::map<std::string, std::vector<std::size_t>> ref_by_text;
  for (std::size_t j = 0; j < ref.size(); ++j) ref_by_text[ref[j].text].push_back(j);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto it = ref_by_text.find(pred[i].text);
    if (it == ref_by_text.end()) continue;
    for (auto j : it->second) edges.push_back({entity_match_credit(pred[i], ref[j], partial), i, j});
  }
  std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
    if (a.credit != b.credit) return a.credit > b.credit;
    return std::tie(pred[a.i], ref[a.j], a.i, a.j) < std::tie(pred[b.i], ref[b.j], b.i, b.j);
  });
  std::vector<bool> used_p(pred.size()), used_r(ref.size());
  double total = 0.0;
  for (const auto& e : edges) {
    if (e.credit <= 0.0 || used_p[e.i] || used_r[e.j]) continue;
    used_p[e.i] = used_r[e.j] = true;
    total += e.credit;
  }
  return total;
}

F1Parts f1_from_credit(double pred_credit, double ref_credit, std::size_t n_pred, std::size_t n_ref) {
  if (n_pred == 0 && n_ref == 0) return {1.0, 1.0, 1.0};
  if (n_pred == 0 || n_ref == 0) return {0.0, 0.0, 0.0};
  F1Parts p;
  p.precision = pred_credit / static_cast<double>(n_pred);
  p.recall = ref_credit / static_cast<double>(n_ref);
  p.f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
  return p;
}

F1Parts radgraph_partial_f1(const EntityGraph& pred, const EntityGraph& ref, std::size_t exact_limit,
                            double partial) {
  const auto& pe = pred.entities;
  const auto& re = ref.entities;
  const bool exact = pe.size() <= exact_limit && re.size() <= exact_limit;
  const double credit = exact ? optimal_credit_exact(pe, re, partial) : optimal_credit_greedy(pe, re, partial);
  return f1_from_credit(credit, credit, pe.size(), re.size());
}

std::vector<double> TrigramHashEmbedder::operator()(std::string_view text) const {
  std::vector<double> v(dim_, 0.0);
  const std::string padded = " " + std::string(text) + " ";
  if (text.empty()) return v;
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    v[util::fnv1a32(std::string_view(padded).substr(i, 3)) % dim_] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine of vectors with different dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

RateResult rate_similarity_f1(const std::vector<Entity>& pred, const std::vector<Entity>& ref, const Embedder& embed,
                              double tau) {
  if (tau < 0.0 || tau > 1.0) throw ValidationError("rate tau must lie in [0, 1]");
  RateResult result;
  auto embed_all = [&](const std::vector<Entity>& es) {
    std::vector<std::vector<double>> out;
    for (const auto& e : es) {
      out.push_back(embed(e.text));
      const bool zero = std::all_of(out.back().begin(), out.back().end(), [](double x) { return x == 0.0; });
      if (zero) ++result.zero_vectors;
    }
    return out;
  };
  const auto pv = embed_all(pred);
  const auto rv = embed_all(ref);
  auto side = [&](const std::vector<Entity>& a, const std::vector<std::vector<double>>& av,
                  const std::vector<Entity>& b, const std::vector<std::vector<double>>& bv) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double best = 0.0;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (a[i].polarity != b[j].polarity) continue;
        best = std::max(best, cosine(av[i], bv[j]));
      }
      total += best >= tau ? best : 0.0;
    }
    return total;
  };
  const double p_sum = side(pred, pv, ref, rv);
  const double r_sum = side(ref, rv, pred, pv);
  result.parts = f1_from_credit(p_sum, r_sum, pred.size(), ref.size());
  return result;
}

std::vector<std::string> bleu_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

struct BleuStats {
  std::array<double, 4> matches{};
  std::array<double, 4> totals{};
  double pred_len = 0.0;
  double ref_len = 0.0;

  void add(const std::vector<std::string>& p, const std::vector<std::string>& r) {
    pred_len += static_cast<double>(p.size());
    ref_len += static_cast<double>(r.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, double> ref_counts;
      for (std::size_t i = 0; i + n <= r.size(); ++i) ref_counts[{r.begin() + i, r.begin() + i + n}] += 1.0;
      std::map<std::vector<std::string>, double> pred_counts;
      for (std::size_t i = 0; i + n <= p.size(); ++i) pred_counts[{p.begin() + i, p.begin() + i + n}] += 1.0;
      for (const auto& [gram, count] : pred_counts) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
        totals[n - 1] += count;
      }
    }
  }

  double score() const {
    if (pred_len == 0.0) return 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
      if (totals[n] == 0.0 || matches[n] == 0.0) return 0.0;
      log_sum += std::log(matches[n] / totals[n]);
    }
    const double bp = pred_len < ref_len ? std::exp(1.0 - ref_len / pred_len) : 1.0;
    return bp * std::exp(log_sum / 4.0);
  }
};

}  // namespace

double bleu4(std::string_view pred, std::string_view ref) {
  BleuStats s;
  s.add(bleu_tokens(pred), bleu_tokens(ref));
  return s.score();
}

double corpus_bleu4(std::span<const std::string> preds, std::span<const std::string> refs) {
  if (preds.size() != refs.size()) throw ValidationError("corpus BLEU needs one reference per prediction");
  BleuStats s;
  for (std::size_t i = 0; i < preds.size(); ++i) s.add(bleu_tokens(preds[i]), bleu_tokens(refs[i]));
  return s.score();
}

double radcliq_composite(double graph_f1, double bleu, const CompositeConfig& cfg) {
  if (!(graph_f1 >= 0.0 && graph_f1 <= 1.0) || !(bleu >= 0.0 && bleu <= 1.0)) {
    throw ValidationError("composite inputs must lie in [0, 1]");
  }
  return cfg.w0 + cfg.w1 * (1.0 - graph_f1) + cfg.w2 * (1.0 - bleu);
}

double reciprocal_mean(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("reciprocal_mean of an empty list");
  double sum = 0.0;
  for (double s : scores) sum += s;
  const double mean = sum / static_cast<double>(scores.size());
  if (!(mean > 0.0)) throw ValidationError("reciprocal_mean needs a positive mean");
  return 1.0 / mean;
}

}  // namespace medvlm::metrics
