// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <memory>
#include <ostream>

#include "commands.hpp"
#include "medvlm/cli/manifest.hpp"
#include "medvlm/metrics/scores.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::cli {
namespace {

struct MetricsOptions {
  std::filesystem::path pred;
  std::filesystem::path ref;
  std::string metric;
  std::filesystem::path out;
  double tau = 0.5;
  double w0 = 0.0, w1 = 1.0, w2 = 1.0;
  std::size_t exact_limit = 12;
};

// A report: id plus text and/or entities. Field aliases let eval results and
// benchmark files be used directly.
struct ReportRow {
  std::string id;
  std::optional<std::string> text;
  std::optional<metrics::EntityGraph> graph;
};

std::vector<ReportRow> read_reports(const std::filesystem::path& path) {
  std::vector<ReportRow> rows;
  std::set<std::string> seen;
  for (const auto& j : util::read_jsonl(path)) {
    ReportRow r;
    if (j.contains("report_id")) {
      r.id = j["report_id"].get<std::string>();
    } else if (j.contains("id")) {
      r.id = j["id"].get<std::string>();
    } else {
      throw ValidationError(path.string() + ": record without report_id");
    }
    if (!seen.insert(r.id).second) throw ValidationError(path.string() + ": duplicate report '" + r.id + "'");
    if (j.contains("text")) {
      r.text = j["text"].get<std::string>();
    } else if (j.contains("raw_output")) {
      r.text = j["raw_output"].get<std::string>();
    } else if (j.contains("meta") && j["meta"].contains("reference")) {
      r.text = j["meta"]["reference"].get<std::string>();
    }
    if (j.contains("entities")) r.graph = metrics::graph_from_json(j);
    rows.push_back(std::move(r));
  }
  return rows;
}

metrics::EntityGraph graph_of(const ReportRow& r, const metrics::ToyExtractor& extractor) {
  if (r.graph) return *r.graph;
  if (!r.text) throw ValidationError("report '" + r.id + "' has neither entities nor text");
  return extractor.extract(*r.text);
}

const std::string& text_of(const ReportRow& r) {
  if (!r.text) throw ValidationError("report '" + r.id + "' has no text");
  return *r.text;
}

int cmd_metrics(const MetricsOptions& opt, Context& ctx) {
  auto manifest = start_manifest("metrics", tool_version());
  const auto preds = read_reports(opt.pred);
  const auto refs = read_reports(opt.ref);
  std::map<std::string, const ReportRow*> pred_by_id;
  for (const auto& p : preds) pred_by_id[p.id] = &p;

  const metrics::ToyExtractor extractor;
  const metrics::TrigramHashEmbedder embedder;
  const metrics::CompositeConfig composite{opt.w0, opt.w1, opt.w2};
  util::Json per_report = util::Json::array();
  std::vector<double> scores;
  std::vector<std::string> pred_texts, ref_texts;
  std::size_t zero_vectors = 0;

  for (const auto& ref : refs) {
    const auto it = pred_by_id.find(ref.id);
    if (it == pred_by_id.end()) throw ValidationError("no prediction for report '" + ref.id + "'");
    const auto& pred = *it->second;
    double value = 0.0;
    if (opt.metric == "radgraph") {
      value = metrics::radgraph_partial_f1(graph_of(pred, extractor), graph_of(ref, extractor), opt.exact_limit).f1;
    } else if (opt.metric == "rate") {
      const auto r = metrics::rate_similarity_f1(graph_of(pred, extractor).entities, graph_of(ref, extractor).entities,
                                                 embedder, opt.tau);
      zero_vectors += r.zero_vectors;
      value = r.parts.f1;
    } else if (opt.metric == "bleu") {
      pred_texts.push_back(text_of(pred));
      ref_texts.push_back(text_of(ref));
      value = metrics::bleu4(pred_texts.back(), ref_texts.back());
    } else {
      const double g =
          metrics::radgraph_partial_f1(graph_of(pred, extractor), graph_of(ref, extractor), opt.exact_limit).f1;
      const double b = metrics::bleu4(text_of(pred), text_of(ref));
      value = metrics::radcliq_composite(g, b, composite);
    }
    scores.push_back(value);
    per_report.push_back({{"report_id", ref.id}, {"score", value}});
  }

  util::Json result{{"metric", opt.metric}, {"reports", scores.size()}};
  double mean = 0.0;
  for (double s : scores) mean += s;
  if (!scores.empty()) mean /= static_cast<double>(scores.size());
  if (opt.metric == "radcliq") {
    result["mean_composite"] = mean;
    result["reciprocal_mean"] = metrics::reciprocal_mean(scores);
    result["weights"] = {{"w0", opt.w0}, {"w1", opt.w1}, {"w2", opt.w2}, {"canonical", false}};
  } else if (opt.metric == "bleu") {
    result["mean"] = mean;
    result["corpus_bleu4"] = metrics::corpus_bleu4(pred_texts, ref_texts);
  } else {
    result["mean"] = mean;
  }
  if (opt.metric == "rate") {
    result["tau"] = opt.tau;
    result["zero_vector_entities"] = zero_vectors;
    if (zero_vectors > 0) ctx.err << "warning: " << zero_vectors << " entities embedded to the zero vector\n";
  }
  result["per_report"] = per_report;
  if (!opt.out.parent_path().empty()) std::filesystem::create_directories(opt.out.parent_path());
  util::write_file_atomic(opt.out, result.dump(2) + "\n");
  ctx.out << opt.metric << " over " << scores.size() << " reports: "
          << (opt.metric == "radcliq" ? result["reciprocal_mean"] : result["mean"]).dump() << "\n";

  manifest.config_sha256 = util::sha256_hex(
      util::Json{{"metric", opt.metric}, {"tau", opt.tau}, {"w", {opt.w0, opt.w1, opt.w2}}, {"exact_limit", opt.exact_limit}}
          .dump());
  manifest.inputs.push_back(digest_file("pred", opt.pred));
  manifest.inputs.push_back(digest_file("ref", opt.ref));
  manifest.outputs.push_back(digest_file(opt.out.filename().string(), opt.out));
  write_manifest(manifest_for(opt.out), manifest);
  return kExitOk;
}

}  // namespace

void register_metrics(CLI::App& app, Context& ctx, Action& action) {
  auto opt = std::make_shared<MetricsOptions>();
  auto* sub = app.add_subcommand("metrics", "Score generated reports against references");
  sub->add_option("--pred", opt->pred, "Predicted reports (JSONL: report_id plus text and/or entities)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--ref", opt->ref, "Reference reports, same layout")->required()->check(CLI::ExistingFile);
  sub->add_option("--metric", opt->metric, "radgraph | rate | bleu | radcliq")
      ->required()
      ->check(CLI::IsMember({"radgraph", "rate", "bleu", "radcliq"}));
  sub->add_option("--out", opt->out, "Metric report (JSON)")->required();
  sub->add_option("--tau", opt->tau, "rate: similarity threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sub->add_option("--w0", opt->w0, "radcliq: intercept (placeholder default)")->capture_default_str();
  sub->add_option("--w1", opt->w1, "radcliq: graph-term weight (placeholder default)")->capture_default_str();
  sub->add_option("--w2", opt->w2, "radcliq: BLEU-term weight (placeholder default)")->capture_default_str();
  sub->add_option("--exact-limit", opt->exact_limit, "radgraph: largest side solved by exact assignment")
      ->capture_default_str();
  sub->callback([opt, &ctx, &action] { action = [opt, &ctx] { return cmd_metrics(*opt, ctx); }; });
}

}  // namespace medvlm::cli
