// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "medvlm/eval/prompt.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::testing {

std::filesystem::path fixture_dir() { return MEDVLM_FIXTURE_DIR; }
std::filesystem::path source_dir() { return MEDVLM_SOURCE_DIR; }

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "medvlm-test-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<double> central_differences(std::span<double> x, const std::vector<std::size_t>& coords,
                                        const std::function<double()>& f, double h) {
  std::vector<double> out;
  out.reserve(coords.size());
  for (std::size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f();
    x[i] = saved - h;
    const double minus = f();
    x[i] = saved;
    out.push_back((plus - minus) / (2.0 * h));
  }
  return out;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_error: size mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

std::vector<std::size_t> sample_coords(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (n <= count) return all;
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(gen)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

model::TilingPlan brute_force_tiling(std::int64_t width, std::int64_t height, const model::VisionConfig& cfg) {
  struct Candidate {
    std::int64_t rows, cols;
    long double gap;
    std::int64_t num, den;  // reduced max(ch, rw) / min(ch, rw)
  };
  std::vector<Candidate> grids;
  for (std::int64_t n = 1; n <= cfg.max_tiles; ++n) {
    for (std::int64_t r = 1; r <= n; ++r) {
      if (n % r != 0) continue;
      const std::int64_t c = n / r;
      const std::int64_t a = c * height, b = r * width;
      const std::int64_t g = std::gcd(a, b);
      grids.push_back({r, c, std::fabs(std::log(static_cast<long double>(c) / r) -
                                       std::log(static_cast<long double>(width) / height)),
                       std::max(a, b) / g, std::min(a, b) / g});
    }
  }
  const long double tile_area = static_cast<long double>(cfg.tile_size) * cfg.tile_size;
  const auto target = static_cast<std::int64_t>(std::ceil(static_cast<long double>(width) * height / tile_area));
  auto better = [&](const Candidate& x, const Candidate& y) {
    const bool tie = x.num == y.num && x.den == y.den;
    if (!tie) return x.gap < y.gap;
    const std::int64_t dx = std::llabs(x.rows * x.cols - target), dy = std::llabs(y.rows * y.cols - target);
    if (dx != dy) return dx < dy;
    if (x.rows * x.cols != y.rows * y.cols) return x.rows * x.cols < y.rows * y.cols;
    return x.rows < y.rows;
  };
  const Candidate best = *std::min_element(grids.begin(), grids.end(), better);
  model::TilingPlan plan;
  plan.grid_rows = best.rows;
  plan.grid_cols = best.cols;
  plan.has_thumbnail = cfg.include_thumbnail && best.rows * best.cols > 1;
  plan.resized_width = best.cols * cfg.tile_size;
  plan.resized_height = best.rows * cfg.tile_size;
  return plan;
}

double exhaustive_credit(const std::vector<metrics::Entity>& pred, const std::vector<metrics::Entity>& ref,
                         double partial) {
  const bool pred_larger = pred.size() >= ref.size();
  const auto& big = pred_larger ? pred : ref;
  const auto& small = pred_larger ? ref : pred;
  auto credit = [&](const metrics::Entity& a, const metrics::Entity& b) {
    if (a.text != b.text) return 0.0;
    return a.label == b.label && a.polarity == b.polarity ? 1.0 : partial;
  };
  std::vector<std::size_t> perm(big.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = 0.0;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i) total += credit(small[i], big[perm[i]]);
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

curriculum::CurriculumResult run_config(const curriculum::RunConfig& cfg,
                                        const std::optional<std::filesystem::path>& checkpoint_dir,
                                        const std::optional<model::Checkpoint>& resume,
                                        const std::vector<std::string>& only) {
  std::vector<curriculum::StageConfig> stages;
  if (cfg.backbone_warmup && !resume) stages.push_back(*cfg.backbone_warmup);
  for (const auto& s : cfg.stages) {
    if (only.empty() || std::find(only.begin(), only.end(), s.name) != only.end()) stages.push_back(s);
  }
  std::map<std::string, curriculum::Dataset> datasets;
  for (const auto& s : stages) {
    if (!datasets.contains(s.data_source)) {
      datasets[s.data_source] = curriculum::load_dataset(s.data_source, cfg.datasets.at(s.data_source), cfg.seed);
    }
  }
  curriculum::Model m = resume ? curriculum::Model{resume->config, resume->params}
                               : curriculum::Model{cfg.model, model::init_params(cfg.model, cfg.seed)};
  curriculum::CurriculumOptions opts;
  opts.checkpoint_dir = checkpoint_dir;
  return curriculum::train_curriculum(std::move(m), stages, datasets, cfg.seed, opts);
}

double stage_loss_ratio(const curriculum::TrainLog& log, const std::string& stage) {
  const auto steps = std::count_if(log.steps.begin(), log.steps.end(), [&](const auto& r) { return r.stage == stage; });
  const std::int64_t window = std::clamp<std::int64_t>(steps / 4, 1, 10);
  return log.smoothed_end(stage, window) / log.smoothed_start(stage, window);
}

eval::DecodeResult ScriptedDecoder::decode(const std::vector<eval::ChatMessage>& messages) {
  std::string key;
  for (const auto& m : messages) {
    if (m.role == "user") key = m.text();
  }
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  if (jitter_) std::this_thread::sleep_for(std::chrono::microseconds(100 + util::fnv1a64(key) % 400));
  const auto it = sheet_.find(key);
  if (it == sheet_.end()) return {eval::DecodeStatus::decode_error, "", "no scripted answer", 1, 0.0};
  eval::DecodeResult r = it->second;
  r.attempts = 1;
  return r;
}

std::int64_t ScriptedDecoder::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string query_key(const bench::BenchmarkInstance& instance, const std::string& template_id) {
  return eval::user_message(instance, eval::find_template(template_id)).text();
}

HarnessOracle harness_oracle(std::size_t n, const std::string& template_id) {
  static const std::vector<std::string> subjects{"anatomy", "nutrition", "Pharmacy", "Public_Health", "virology"};
  static const std::vector<std::string> letters{"A", "B", "C", "D"};
  HarnessOracle o;
  for (std::size_t i = 0; i < n; ++i) {
    bench::BenchmarkInstance b;
    b.id = "q" + std::to_string(1000 + i);
    b.dataset = i % 3 == 0 ? "mmmu-med" : "mmlu-med";
    b.subject = subjects[(i / 3) % subjects.size()];
    b.question = "Oracle question " + std::to_string(i) + "?";
    for (std::size_t k = 0; k < 4; ++k) b.options.push_back({letters[k], "choice " + std::to_string(i) + "-" + letters[k]});
    const std::size_t gold = (i * 7 + 1) % 4;
    b.answer_key = letters[gold];
    const std::string& g = letters[gold];

    eval::DecodeResult r;
    bool correct = false;
    switch (i % 8) {
      case 0: r.text = g; correct = true; break;
      case 1: r.text = "Let me think. The answer is (" + g + ")."; correct = true; break;
      case 2: r.text = " (" + g + ")\n"; correct = true; break;
      case 3: r.text = "CHOICE " + std::to_string(i) + "-" + g; correct = true; break;
      case 4: r.text = "answer: " + g; correct = true; break;
      case 5: r.text = letters[(gold + 1) % 4]; break;
      case 6: r.text = "It could be " + letters[0] + " or " + letters[1] + "."; ++o.expected_null; break;
      default:
        r.status = eval::DecodeStatus::transport_error;
        r.error = "connection refused";
        ++o.expected_transport;
        break;
    }
    if (correct) ++o.expected_correct;
    auto& tally = o.by_subject[*b.subject];
    tally.first += correct ? 1 : 0;
    tally.second += 1;
    o.sheet[query_key(b, template_id)] = r;
    o.benchmark.push_back(std::move(b));
  }
  return o;
}

}  // namespace medvlm::testing
