// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "medvlm/eval/decoder.hpp"
#include "medvlm/eval/extract.hpp"
#include "medvlm/eval/harness.hpp"
#include "medvlm/eval/prompt.hpp"
#include "medvlm/model/checkpoint.hpp"
#include "medvlm/model/image.hpp"
#include "medvlm/model/params.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"
#include "test_support.hpp"

namespace medvlm::eval {
namespace {

using bench::BenchmarkInstance;
using bench::Option;
using testing::read_bytes;
using testing::TempDir;

const std::vector<Option> kOptions{{"A", "Aspirin"}, {"B", "Heparin"}, {"C", "Warfarin"}, {"D", "None of these"}};

BenchmarkInstance mc_instance(const std::string& id = "m1") {
  BenchmarkInstance b;
  b.id = id;
  b.dataset = "mmlu-med";
  b.subject = "pharmacology";
  b.question = "Which drug is a vitamin K antagonist?";
  b.options = kOptions;
  b.answer_key = "C";
  return b;
}

// ---- extraction ----

TEST(Extract, Examples) {
  EXPECT_EQ(extract_option("The answer is (B).", kOptions), "B");
  EXPECT_EQ(extract_option("C", kOptions), "C");
  EXPECT_EQ(extract_option("I cannot determine this.", kOptions), std::nullopt);
  EXPECT_EQ(extract_option("A or B", kOptions), std::nullopt);
  EXPECT_EQ(extract_option("  (d)  ", kOptions), "D");
  EXPECT_EQ(extract_option("warfarin", kOptions), "C");
  EXPECT_EQ(extract_option("Answer: A. On reflection, the answer is D", kOptions), "D");
  EXPECT_EQ(extract_option("answer = B", kOptions), "B");
  EXPECT_EQ(extract_option("The answer is E", kOptions), std::nullopt);
  EXPECT_EQ(extract_option("The answer is Aspirin", kOptions), std::nullopt);
  EXPECT_EQ(extract_option("", kOptions), std::nullopt);
}

TEST(Extract, TotalOverRandomStrings) {
  const std::string alphabet = "ABCDEabcde ().:=-answerAnswer ISis\n\t!?xyz0123";
  std::mt19937_64 gen(21);
  std::set<std::string> keys;
  for (const auto& o : kOptions) keys.insert(o.key);
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const auto len = gen() % 40;
    for (std::size_t k = 0; k < len; ++k) s += alphabet[gen() % alphabet.size()];
    const auto got = extract_option(s, kOptions);
    if (got) {
      EXPECT_TRUE(keys.contains(*got)) << s;
    }
    EXPECT_EQ(got, extract_option(s, kOptions));
  }
}

// ---- prompts ----

TEST(Prompt, ZeroShotGolden) {
  const auto msgs = format_prompt(mc_instance(), "plain-v1");
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(msgs[0].role, "user");
  EXPECT_EQ(msgs[0].text(),
            "Which drug is a vitamin K antagonist?\n"
            "A. Aspirin\n"
            "B. Heparin\n"
            "C. Warfarin\n"
            "D. None of these\n"
            "Answer with the option letter only.");
  const auto chat = format_prompt(mc_instance(), "medvlm-chat-v1");
  ASSERT_EQ(chat.size(), 2u);
  EXPECT_EQ(chat[0].role, "system");
  EXPECT_EQ(chat[1], msgs[0]);
}

TEST(Prompt, ShotPrecedesQueryAndImagesPrecedeText) {
  auto q = mc_instance("q");
  q.images = {"img/q.ppm"};
  auto shot = mc_instance("s");
  shot.answer_key = "A";
  q.shots = {shot};
  const auto msgs = format_prompt(q, "plain-v1");
  ASSERT_EQ(msgs.size(), 3u);
  EXPECT_EQ(msgs[0].role, "user");
  EXPECT_EQ(msgs[1].role, "assistant");
  EXPECT_EQ(msgs[1].text(), "A");
  EXPECT_EQ(msgs[2].role, "user");
  ASSERT_EQ(msgs[2].parts.size(), 2u);
  EXPECT_EQ(msgs[2].parts[0], (ContentPart{ContentPart::Kind::image, "img/q.ppm"}));
  EXPECT_EQ(msgs[2].parts[1].kind, ContentPart::Kind::text);
}

TEST(Prompt, GenerationItemHasNoOptionLines) {
  BenchmarkInstance g;
  g.id = "g";
  g.dataset = "impression";
  g.question = "Write the impression.";
  g.meta = {{"reference", "Normal."}};
  BenchmarkInstance q = g;
  q.id = "q";
  q.shots = {g};
  const auto msgs = format_prompt(q, "plain-v1");
  ASSERT_EQ(msgs.size(), 3u);
  EXPECT_EQ(msgs[1].text(), "Normal.");
  EXPECT_EQ(msgs[2].text(), "Write the impression.");
  EXPECT_THROW(format_prompt(q, "no-such-template"), ConfigError);
}

TEST(Prompt, TemplatesAreData) {
  register_template({"custom-v1", "Sys.", "Reply with one letter."});
  const auto msgs = format_prompt(mc_instance(), "custom-v1");
  EXPECT_EQ(msgs[0].text(), "Sys.");
  EXPECT_TRUE(msgs[1].text().ends_with("\nReply with one letter."));
}

// ---- scoring ----

EvalRecord rec(const std::string& id, bool correct, const std::string& subject = "s") {
  EvalRecord r;
  r.id = id;
  r.dataset = "d";
  r.subject = subject;
  r.gold = "A";
  r.extracted = correct ? std::optional<std::string>("A") : std::nullopt;
  r.correct = correct;
  return r;
}

TEST(Score, Arithmetic) {
  EXPECT_EQ(score({rec("1", true), rec("2", true), rec("3", true), rec("4", false)}).overall.accuracy(), "75.00");
  EXPECT_EQ(score({rec("1", false), rec("2", false)}).overall.accuracy(), "0.00");
  EXPECT_EQ(score({rec("1", true), rec("2", false), rec("3", false)}).overall.accuracy(), "33.33");
  EXPECT_EQ(score({rec("1", true), rec("2", true), rec("3", false)}).overall.accuracy(), "66.67");
  EXPECT_EQ(score({}).overall.accuracy(), "0.00");
  EXPECT_THROW(score({rec("1", true), rec("1", false)}), ValidationError);
}

TEST(Score, MakeRecordCorrectnessLaw) {
  const auto inst = mc_instance();
  for (const std::string out : {"C", "The answer is (C)", "B", "maybe", "warfarin"}) {
    const auto r = make_record(inst, {DecodeStatus::ok, out, "", 1, 1.0});
    EXPECT_EQ(r.correct, r.extracted.has_value() && *r.extracted == r.gold) << out;
  }
  const auto failed = make_record(inst, {DecodeStatus::transport_error, "C", "boom", 4, 1.0});
  EXPECT_FALSE(failed.correct);
  EXPECT_FALSE(failed.extracted.has_value());
  EXPECT_EQ(failed.status, "transport_error");
  EXPECT_EQ(EvalRecord::from_json(failed.to_json()), failed);
}

// ---- harness with a scripted model ----

TEST(Harness, OracleAccuracyAndBreakdown) {
  const auto oracle = testing::harness_oracle(200);
  ASSERT_EQ(oracle.expected_correct, 125);
  testing::ScriptedDecoder decoder(oracle.sheet);
  TempDir tmp;
  const auto summary = run_eval(oracle.benchmark, decoder, tmp.path(), {.concurrency = 4});
  EXPECT_EQ(summary.score.overall.total, 200);
  EXPECT_EQ(summary.score.overall.correct, oracle.expected_correct);
  EXPECT_EQ(summary.score.overall.accuracy(), "62.50");
  EXPECT_EQ(summary.score.null_extractions, oracle.expected_null);
  EXPECT_EQ(summary.score.failures.at("transport_error"), oracle.expected_transport);
  for (const auto& [subject, ct] : oracle.by_subject) {
    const auto& t = summary.score.by_subject.at(subject);
    EXPECT_EQ(t.correct, ct.first) << subject;
    EXPECT_EQ(t.total, ct.second) << subject;
  }
  EXPECT_EQ(decoder.calls(), 200);

  const auto records = read_records(tmp / "results.jsonl");
  ASSERT_EQ(records.size(), oracle.benchmark.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].id, oracle.benchmark[i].id);
    EXPECT_EQ(records[i].correct, records[i].extracted && *records[i].extracted == records[i].gold);
  }
  EXPECT_TRUE(std::filesystem::exists(tmp / "timings.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "summary.txt"));
  EXPECT_FALSE(std::filesystem::exists(tmp / "results.jsonl.partial"));
  const auto summary_json = util::Json::parse(read_bytes(tmp / "summary.json"));
  EXPECT_EQ(summary_json["config_sha256"], summary.config_sha256);
}

TEST(Harness, ConcurrencyDoesNotChangeFiles) {
  const auto oracle = testing::harness_oracle(200);
  TempDir one, eight;
  testing::ScriptedDecoder d1(oracle.sheet), d8(oracle.sheet);
  run_eval(oracle.benchmark, d1, one.path(), {.concurrency = 1});
  run_eval(oracle.benchmark, d8, eight.path(), {.concurrency = 8});
  EXPECT_EQ(read_bytes(one / "results.jsonl"), read_bytes(eight / "results.jsonl"));
  EXPECT_EQ(read_bytes(one / "summary.json"), read_bytes(eight / "summary.json"));
  EXPECT_EQ(read_bytes(one / "summary.txt"), read_bytes(eight / "summary.txt"));
}

TEST(Harness, ResumeSkipsCompletedRecords) {
  const auto oracle = testing::harness_oracle(40);
  TempDir full, resumed;
  testing::ScriptedDecoder d_full(oracle.sheet);
  run_eval(oracle.benchmark, d_full, full.path());
  const auto all = read_bytes(full / "results.jsonl");

  // First 15 records plus a torn line, as left by an interrupted run.
  std::string prefix;
  std::size_t pos = 0;
  for (int i = 0; i < 15; ++i) pos = all.find('\n', pos) + 1;
  prefix = all.substr(0, pos) + "{\"id\":\"q10";
  testing::write_bytes(resumed / "results.jsonl.partial", prefix);

  testing::ScriptedDecoder d_resume(oracle.sheet);
  const auto summary = run_eval(oracle.benchmark, d_resume, resumed.path());
  EXPECT_EQ(summary.requested, 25);
  EXPECT_EQ(d_resume.calls(), 25);
  EXPECT_EQ(read_bytes(resumed / "results.jsonl"), all);

  testing::ScriptedDecoder d_again(oracle.sheet);
  EXPECT_EQ(run_eval(oracle.benchmark, d_again, resumed.path()).requested, 0);
  EXPECT_EQ(d_again.calls(), 0);
}

TEST(Harness, ResumeRejectsForeignPrefix) {
  const auto oracle = testing::harness_oracle(8);
  TempDir tmp;
  auto r = rec("not-in-order", true);
  testing::write_bytes(tmp / "results.jsonl.partial", r.to_json().dump() + "\n");
  testing::ScriptedDecoder d(oracle.sheet);
  EXPECT_THROW(run_eval(oracle.benchmark, d, tmp.path()), ValidationError);
}

TEST(Harness, OutputDirectoryIsLocked) {
  const auto oracle = testing::harness_oracle(8);
  TempDir tmp;
  util::DirectoryLock held(tmp.path());
  testing::ScriptedDecoder d(oracle.sheet);
  EXPECT_THROW(run_eval(oracle.benchmark, d, tmp.path()), IoError);
  EXPECT_EQ(d.calls(), 0);
}

// ---- HTTP decoding against a mock endpoint ----

class MockEndpoint {
 public:
  explicit MockEndpoint(int failures_before_success) : failures_(failures_before_success) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = util::Json::parse(req.body);
      {
        std::lock_guard lock(mu_);
        bodies_.push_back(body);
      }
      if (failures_.fetch_sub(1) > 0) {
        res.status = 503;
        res.set_content("busy", "text/plain");
        return;
      }
      // Deterministic reply derived from the question text.
      const std::string text = body["messages"].back()["content"].back()["text"].get<std::string>();
      const std::string letter(1, static_cast<char>('A' + util::fnv1a64(text) % 4));
      util::Json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "The answer is " + letter}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }
  EndpointConfig config() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "mock";
    c.timeout_seconds = 10;
    c.max_retries = 3;
    c.retry_backoff_ms = 1;
    return c;
  }
  std::vector<util::Json> bodies() const {
    std::lock_guard lock(mu_);
    return bodies_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> failures_;
  mutable std::mutex mu_;
  std::vector<util::Json> bodies_;
};

TEST(HttpDecoder, RetriesTransientFailures) {
  MockEndpoint mock(2);
  HttpDecoder decoder(mock.config(), {});
  const auto r = decoder.decode(format_prompt(mc_instance(), "plain-v1"));
  EXPECT_EQ(r.status, DecodeStatus::ok) << r.error;
  EXPECT_EQ(r.attempts, 3);
  EXPECT_TRUE(r.text.starts_with("The answer is "));
  EXPECT_GE(r.latency_ms, 0.0);
  const auto bodies = mock.bodies();
  ASSERT_EQ(bodies.size(), 3u);
  for (const auto& b : bodies) {
    EXPECT_EQ(b["temperature"], 0);
    EXPECT_EQ(b["model"], "mock");
    EXPECT_EQ(b["max_tokens"], 2048);
  }
}

TEST(HttpDecoder, ExhaustedRetriesFailTheInstance) {
  MockEndpoint mock(100);
  auto cfg = mock.config();
  cfg.max_retries = 2;
  HttpDecoder decoder(cfg, {});
  const auto r = decoder.decode(format_prompt(mc_instance(), "plain-v1"));
  EXPECT_NE(r.status, DecodeStatus::ok);
  EXPECT_EQ(r.attempts, 3);
  EXPECT_FALSE(make_record(mc_instance(), r).correct);
}

TEST(HttpDecoder, UnreachableEndpointIsTransportError) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  EndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.model = "none";
  cfg.max_retries = 1;
  cfg.retry_backoff_ms = 0;
  cfg.timeout_seconds = 2;
  HttpDecoder decoder(cfg, {});
  const auto r = decoder.decode(format_prompt(mc_instance(), "plain-v1"));
  EXPECT_EQ(r.status, DecodeStatus::transport_error);
  EXPECT_EQ(r.attempts, 2);
}

TEST(HttpDecoder, ImagesInlineAsDataUrls) {
  TempDir tmp;
  testing::write_bytes(tmp / "x.ppm", "P6\n1 1\n255\nabc");
  EndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:9/v1";
  cfg.model = "m";
  HttpDecoder decoder(cfg, tmp.path());
  auto inst = mc_instance();
  inst.images = {"x.ppm"};
  const auto body = decoder.request_body(format_prompt(inst, "plain-v1"));
  const auto& part = body["messages"][0]["content"][0];
  EXPECT_EQ(part["type"], "image_url");
  const std::string url = part["image_url"]["url"];
  EXPECT_TRUE(url.starts_with("data:")) << url;
  EXPECT_TRUE(url.ends_with(util::base64_encode("P6\n1 1\n255\nabc"))) << url;
  EXPECT_FALSE(body.dump().find("api_key") != std::string::npos);
}

TEST(HttpDecoder, ConcurrencyAgainstMockGivesIdenticalFiles) {
  const auto oracle = testing::harness_oracle(48);
  MockEndpoint mock(0);
  TempDir one, four;
  HttpDecoder decoder(mock.config(), {});
  run_eval(oracle.benchmark, decoder, one.path(), {.concurrency = 1});
  run_eval(oracle.benchmark, decoder, four.path(), {.concurrency = 4});
  EXPECT_EQ(read_bytes(one / "results.jsonl"), read_bytes(four / "results.jsonl"));
  EXPECT_EQ(read_bytes(one / "summary.json"), read_bytes(four / "summary.json"));
  EXPECT_EQ(mock.bodies().size(), 96u);
}

TEST(EndpointConfig, Validation) {
  EndpointConfig c;
  c.base_url = "http://localhost:1/v1";
  c.model = "m";
  EXPECT_NO_THROW(c.validate());
  c.max_concurrency = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.max_concurrency = 1;
  c.max_retries = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

// ---- local decoding ----

TEST(LocalDecoder, GreedyIsDeterministic) {
  model::ModelConfig cfg;
  cfg.vision.tile_size = 16;
  cfg.vision.patch_size = 4;
  cfg.vision.width = 8;
  cfg.vision.layers = 1;
  cfg.vision.heads = 2;
  cfg.vision.mlp_ratio = 2;
  cfg.vision.max_tiles = 2;
  cfg.lm.d_model = 8;
  cfg.lm.heads = 2;
  cfg.lm.layers = 1;
  cfg.lm.mlp_ratio = 2;
  cfg.lm.max_seq_len = 512;
  cfg.lm.rope = {.head_dim = 4, .theta_base = 10000.0, .original_context = 128, .scale_factor = 4.0};
  TempDir tmp;
  model::save_checkpoint(tmp / "m.ckpt", {cfg, model::init_params(cfg, 3), util::Json::object()});
  model::Image img(16, 16);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = static_cast<std::uint8_t>(i * 37);
  model::write_ppm(tmp / "i.ppm", img);

  auto inst = mc_instance();
  inst.question = "Q?";
  inst.images = {"i.ppm"};
  DecodeParams params;
  params.max_new_tokens = 6;
  LocalDecoder a(tmp / "m.ckpt", params, tmp.path()), b(tmp / "m.ckpt", params, tmp.path());
  const auto msgs = format_prompt(inst, "plain-v1");
  const auto ra = a.decode(msgs), rb = b.decode(msgs);
  EXPECT_EQ(ra.status, DecodeStatus::ok) << ra.error;
  EXPECT_EQ(ra.text, rb.text);
  EXPECT_EQ(a.describe(), b.describe());
  EXPECT_EQ(a.describe()["checkpoint_sha256"], util::sha256_file(tmp / "m.ckpt"));

  auto missing = inst;
  missing.images = {"absent.ppm"};
  EXPECT_EQ(a.decode(format_prompt(missing, "plain-v1")).status, DecodeStatus::decode_error);
  EXPECT_NE(make_decoder("local:" + (tmp / "m.ckpt").string(), {}, tmp.path()), nullptr);
}

}  // namespace
}  // namespace medvlm::eval
