// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "medvlm/curriculum/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <set>

#include "medvlm/curriculum/synthetic.hpp"
#include "medvlm/model/image.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"

namespace medvlm::curriculum {
namespace {

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const int line = node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  void require_map(const YAML::Node& node, const std::string& where) const {
    if (!node.IsMap()) fail(node, where + " must be a mapping");
  }

  void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) const {
    require_map(node, where);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <typename T>
  T get(const YAML::Node& node, const std::string& key, const std::string& where) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "invalid value for '" + key + "' in " + where);
    }
  }

  template <typename T>
  void read(const YAML::Node& parent, const char* key, T& out, const std::string& where) const {
    if (const auto n = parent[key]) out = get<T>(n, key, where);
  }

 private:
  std::string source_;
};

nn::RopeConfig parse_rope(const Parser& p, const YAML::Node& n, nn::RopeConfig rope) {
  p.check_keys(n, "model.lm.rope",
               {"head_dim", "theta_base", "original_context", "scale_factor", "beta_fast", "beta_slow"});
  p.read(n, "head_dim", rope.head_dim, "model.lm.rope");
  p.read(n, "theta_base", rope.theta_base, "model.lm.rope");
  p.read(n, "original_context", rope.original_context, "model.lm.rope");
  p.read(n, "scale_factor", rope.scale_factor, "model.lm.rope");
  p.read(n, "beta_fast", rope.beta_fast, "model.lm.rope");
  p.read(n, "beta_slow", rope.beta_slow, "model.lm.rope");
  return rope;
}

model::ModelConfig parse_model(const Parser& p, const YAML::Node& n) {
  model::ModelConfig cfg;
  p.check_keys(n, "model", {"vision", "lm", "projector_hidden"});
  if (const auto v = n["vision"]) {
    const std::string w = "model.vision";
    p.check_keys(v, w,
                 {"tile_size", "patch_size", "max_tiles", "include_thumbnail", "thumbnail_first", "downsample_ratio",
                  "width", "layers", "heads", "mlp_ratio"});
    auto& c = cfg.vision;
    p.read(v, "tile_size", c.tile_size, w);
    p.read(v, "patch_size", c.patch_size, w);
    p.read(v, "max_tiles", c.max_tiles, w);
    p.read(v, "include_thumbnail", c.include_thumbnail, w);
    p.read(v, "thumbnail_first", c.thumbnail_first, w);
    p.read(v, "downsample_ratio", c.downsample_ratio, w);
    p.read(v, "width", c.width, w);
    p.read(v, "layers", c.layers, w);
    p.read(v, "heads", c.heads, w);
    p.read(v, "mlp_ratio", c.mlp_ratio, w);
  }
  if (const auto l = n["lm"]) {
    const std::string w = "model.lm";
    p.check_keys(l, w, {"vocab_size", "d_model", "layers", "heads", "mlp_ratio", "max_seq_len", "rope"});
    auto& c = cfg.lm;
    p.read(l, "vocab_size", c.vocab_size, w);
    p.read(l, "d_model", c.d_model, w);
    p.read(l, "layers", c.layers, w);
    p.read(l, "heads", c.heads, w);
    p.read(l, "mlp_ratio", c.mlp_ratio, w);
    p.read(l, "max_seq_len", c.max_seq_len, w);
    nn::RopeConfig rope{.head_dim = c.heads > 0 ? c.d_model / c.heads : 0};
    if (const auto r = l["rope"]) rope = parse_rope(p, r, rope);
    c.rope = rope;
  }
  p.read(n, "projector_hidden", cfg.projector_hidden, "model");
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    p.fail(n, e.what());
  }
  return cfg;
}

void apply_stage_overrides(const Parser& p, const YAML::Node& n, StageConfig& st, const std::string& where) {
  p.check_keys(n, where,
               {"name", "trainable", "lr", "epochs", "max_seq_len", "data", "warmup_ratio", "min_lr", "batch_size",
                "grad_accum", "max_steps"});
  if (const auto t = n["trainable"]) {
    st.trainable.clear();
    for (const auto& m : p.get<std::vector<std::string>>(t, "trainable", where)) st.trainable.insert(m);
    std::erase_if(st.lr_map, [&](const auto& kv) { return !st.trainable.contains(kv.first); });
  }
  if (const auto lr = n["lr"]) {
    p.require_map(lr, where + ".lr");
    for (const auto& kv : lr) {
      st.lr_map[kv.first.as<std::string>()] = p.get<double>(kv.second, "lr", where);
    }
  }
  p.read(n, "epochs", st.epochs, where);
  p.read(n, "max_seq_len", st.max_seq_len, where);
  p.read(n, "data", st.data_source, where);
  p.read(n, "warmup_ratio", st.warmup_ratio, where);
  p.read(n, "min_lr", st.min_lr, where);
  p.read(n, "batch_size", st.batch_size, where);
  p.read(n, "grad_accum", st.grad_accum, where);
  p.read(n, "max_steps", st.max_steps, where);
  try {
    st.validate();
  } catch (const ConfigError& e) {
    p.fail(n, e.what());
  }
}

}  // namespace

util::Json RunConfig::snapshot() const {
  util::Json j;
  j["seed"] = seed;
  j["profile"] = profile;
  j["model"] = model;
  util::Json ds = util::Json::object();
  for (const auto& [id, spec] : datasets) {
    ds[id] = {{"kind", spec.kind}, {"count", spec.count}, {"image_size", spec.image_size},
              {"path", spec.path.generic_string()}};
  }
  j["datasets"] = ds;
  auto stage_json = [](const StageConfig& s) {
    util::Json lr = util::Json::object();
    for (const auto& [m, v] : s.lr_map) lr[m] = v;
    return util::Json{{"name", s.name},
                      {"trainable", std::vector<std::string>(s.trainable.begin(), s.trainable.end())},
                      {"lr", lr},
                      {"epochs", s.epochs},
                      {"max_seq_len", s.max_seq_len},
                      {"data", s.data_source},
                      {"warmup_ratio", s.warmup_ratio},
                      {"min_lr", s.min_lr},
                      {"batch_size", s.batch_size},
                      {"grad_accum", s.grad_accum},
                      {"max_steps", s.max_steps}};
  };
  j["backbone_warmup"] = backbone_warmup ? stage_json(*backbone_warmup) : util::Json(nullptr);
  util::Json st = util::Json::array();
  for (const auto& s : stages) st.push_back(stage_json(s));
  j["stages"] = st;
  return j;
}

RunConfig parse_run_config(const std::string& yaml_text, const std::string& source) {
  Parser p(source);
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
  p.check_keys(root, "config", {"seed", "output_dir", "profile", "model", "datasets", "backbone_warmup", "stages"});

  RunConfig cfg;
  p.read(root, "seed", cfg.seed, "config");
  if (const auto o = root["output_dir"]) cfg.output_dir = p.get<std::string>(o, "output_dir", "config");
  p.read(root, "profile", cfg.profile, "config");
  if (const auto m = root["model"]) cfg.model = parse_model(p, m);

  if (const auto ds = root["datasets"]) {
    p.require_map(ds, "datasets");
    for (const auto& kv : ds) {
      const auto id = kv.first.as<std::string>();
      const std::string where = "datasets." + id;
      p.check_keys(kv.second, where, {"kind", "count", "image_size", "path"});
      DatasetSpec spec;
      p.read(kv.second, "kind", spec.kind, where);
      p.read(kv.second, "count", spec.count, where);
      p.read(kv.second, "image_size", spec.image_size, where);
      if (const auto path = kv.second["path"]) spec.path = p.get<std::string>(path, "path", where);
      static const std::set<std::string> kinds{"synthetic-captions", "synthetic-reports", "synthetic-vqa",
                                               "synthetic-text", "jsonl"};
      if (!kinds.contains(spec.kind)) p.fail(kv.second, "unknown dataset kind '" + spec.kind + "' in " + where);
      if (spec.kind == "jsonl" && spec.path.empty()) p.fail(kv.second, where + ": jsonl datasets need a path");
      if (spec.count < 1) p.fail(kv.second, where + ": count must be >= 1");
      cfg.datasets[id] = spec;
    }
  }

  std::vector<StageConfig> defaults;
  try {
    defaults = default_stages(cfg.profile);
  } catch (const ConfigError& e) {
    p.fail(root["profile"], e.what());
  }

  if (const auto w = root["backbone_warmup"]) {
    StageConfig st;
    st.name = std::string(kBackboneWarmup);
    st.trainable = {"lm"};
    st.lr_map = {{"lm", 1e-3}};
    st.data_source = "text";
    p.check_keys(w, "backbone_warmup", {"data", "steps", "lr", "batch_size", "warmup_ratio", "max_seq_len"});
    p.read(w, "data", st.data_source, "backbone_warmup");
    p.read(w, "steps", st.max_steps, "backbone_warmup");
    p.read(w, "batch_size", st.batch_size, "backbone_warmup");
    p.read(w, "warmup_ratio", st.warmup_ratio, "backbone_warmup");
    p.read(w, "max_seq_len", st.max_seq_len, "backbone_warmup");
    if (const auto lr = w["lr"]) st.lr_map["lm"] = p.get<double>(lr, "lr", "backbone_warmup");
    try {
      st.validate();
    } catch (const ConfigError& e) {
      p.fail(w, e.what());
    }
    cfg.backbone_warmup = st;
  }

  if (const auto stages = root["stages"]) {
    if (!stages.IsSequence()) p.fail(stages, "stages must be a list");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const auto n = stages[i];
      const std::string where = "stages[" + std::to_string(i) + "]";
      p.require_map(n, where);
      if (!n["name"]) p.fail(n, where + " needs a name");
      const auto name = p.get<std::string>(n["name"], "name", where);
      auto it = std::find_if(defaults.begin(), defaults.end(), [&](const auto& s) { return s.name == name; });
      if (it == defaults.end()) p.fail(n["name"], "unknown stage name '" + name + "' in " + where);
      StageConfig st = *it;
      apply_stage_overrides(p, n, st, where);
      cfg.stages.push_back(st);
    }
  } else {
    cfg.stages = defaults;
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = util::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.string());
}

Dataset read_pairs_jsonl(const std::filesystem::path& path) {
  Dataset out;
  const auto base = path.parent_path();
  std::size_t line = 0;
  for (const auto& row : util::read_jsonl(path)) {
    ++line;
    if (!row.contains("prompt") || !row.contains("target")) {
      throw ValidationError(path.string() + ": record " + std::to_string(line) + " needs prompt and target");
    }
    std::vector<model::Image> images;
    for (const auto& ref : row.value("images", util::Json::array())) {
      std::filesystem::path p = ref.get<std::string>();
      images.push_back(model::read_ppm(p.is_absolute() ? p : base / p));
    }
    out.push_back(make_example(row.at("prompt").get<std::string>(), row.at("target").get<std::string>(), std::move(images)));
  }
  return out;
}

Dataset load_dataset(const std::string& id, const DatasetSpec& spec, std::uint64_t seed) {
  const std::uint64_t s = util::mix64(seed ^ util::fnv1a64(id));
  if (spec.kind == "synthetic-captions") return synthetic_captions(spec.count, s, spec.image_size);
  if (spec.kind == "synthetic-reports") return synthetic_reports(spec.count, s, spec.image_size);
  if (spec.kind == "synthetic-vqa") return synthetic_vqa(spec.count, s, spec.image_size);
  if (spec.kind == "synthetic-text") return synthetic_text(spec.count, s);
  if (spec.kind == "jsonl") return read_pairs_jsonl(spec.path);
  throw ConfigError("dataset '" + id + "': unknown kind '" + spec.kind + "'");
}

}  // namespace medvlm::curriculum
