#include "tnc/io/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "tnc/error.hpp"

namespace tnc::io {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [key, value] : j_.items())
      if (!allowed.contains(key)) throw ConfigError("unknown config key '" + path_ + "." + key + "'");
  }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
};

simgen::ProcessSpec process_from(const json& j, const std::string& path) {
  if (j.is_string()) {
    switch (simgen::process_kind_from_string(j.get<std::string>())) {
      case simgen::ProcessKind::GpPeriodic: return simgen::ProcessSpec::gp_periodic();
      case simgen::ProcessKind::GpSquaredExp: return simgen::ProcessSpec::gp_squared_exp();
      case simgen::ProcessKind::NarmaAlpha: return simgen::ProcessSpec::narma_alpha();
      case simgen::ProcessKind::NarmaBeta: return simgen::ProcessSpec::narma_beta();
    }
  }
  Section s(j, path, {"kind", "variance", "lengthscale", "period", "order", "input_low", "input_high"});
  std::string kind;
  s.read("kind", kind);
  simgen::ProcessSpec p;
  p.kind = simgen::process_kind_from_string(kind);
  if (p.kind == simgen::ProcessKind::GpPeriodic) p = simgen::ProcessSpec::gp_periodic();
  if (p.kind == simgen::ProcessKind::NarmaAlpha) p = simgen::ProcessSpec::narma_alpha();
  if (p.kind == simgen::ProcessKind::NarmaBeta) p = simgen::ProcessSpec::narma_beta();
  s.read("variance", p.variance);
  s.read("lengthscale", p.lengthscale);
  s.read("period", p.period);
  s.read("order", p.order);
  s.read("input_low", p.input_low);
  s.read("input_high", p.input_high);
  return p;
}

json process_to(const simgen::ProcessSpec& p) {
  json j{{"kind", simgen::to_string(p.kind)}};
  if (p.is_gp()) {
    j["variance"] = p.variance;
    j["lengthscale"] = p.lengthscale;
    if (p.kind == simgen::ProcessKind::GpPeriodic) j["period"] = p.period;
  } else {
    j["order"] = p.order;
    j["input_low"] = p.input_low;
    j["input_high"] = p.input_high;
  }
  return j;
}

void read_generator(const json& j, GeneratorConfig& g) {
  Section s(j, "generator",
            {"instances", "length", "noise_sigma", "correlated_source", "correlated_target",
             "correlation_weight", "hold_steps", "normalize", "narma_retries", "grid", "stay_prob",
             "switch_prob", "initial_dist"});
  s.read("instances", g.instances);
  s.read("length", g.length);
  s.read("noise_sigma", g.spec.noise_sigma);
  s.read("correlated_source", g.spec.correlated_source);
  s.read("correlated_target", g.spec.correlated_target);
  s.read("correlation_weight", g.spec.correlation_weight);
  s.read("hold_steps", g.spec.hold_steps);
  s.read("normalize", g.spec.normalize);
  s.read("narma_retries", g.spec.narma_retries);
  s.read("stay_prob", g.hmm.stay_prob);
  s.read("switch_prob", g.hmm.switch_prob);
  s.read("initial_dist", g.hmm.initial_dist);
  if (s.has("grid")) {
    const json& grid = s.at("grid");
    if (!grid.is_array()) throw ConfigError("generator.grid: expected an array of states");
    g.spec.grid.clear();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid[i].is_array()) throw ConfigError("generator.grid[" + std::to_string(i) + "]: expected an array");
      auto& row = g.spec.grid.emplace_back();
      for (std::size_t f = 0; f < grid[i].size(); ++f)
        row.push_back(process_from(grid[i][f], "generator.grid[" + std::to_string(i) + "][" + std::to_string(f) + "]"));
    }
    g.hmm.n_states = static_cast<int>(g.spec.grid.size());
  }
}

void read_train(const json& j, train::TrainConfig& t) {
  Section s(j, "train",
            {"delta", "encoding_size", "hidden_size", "discriminator_hidden", "bidirectional", "w",
             "samples_per_anchor", "anchors_per_instance", "anchors_per_batch",
             "validation_anchors_per_instance", "epochs", "learning_rate", "beta1", "beta2",
             "adam_eps", "weight_decay", "eta_max", "p_threshold", "policy", "validation_fraction"});
  s.read("delta", t.delta);
  s.read("encoding_size", t.encoding_size);
  s.read("hidden_size", t.hidden_size);
  s.read("discriminator_hidden", t.discriminator_hidden);
  s.read("bidirectional", t.bidirectional);
  s.read("w", t.w);
  s.read("samples_per_anchor", t.samples_per_anchor);
  s.read("anchors_per_instance", t.anchors_per_instance);
  s.read("anchors_per_batch", t.anchors_per_batch);
  s.read("validation_anchors_per_instance", t.validation_anchors_per_instance);
  s.read("epochs", t.epochs);
  s.read("learning_rate", t.learning_rate);
  s.read("beta1", t.beta1);
  s.read("beta2", t.beta2);
  s.read("adam_eps", t.adam_eps);
  s.read("weight_decay", t.weight_decay);
  s.read("eta_max", t.eta_max);
  s.read("p_threshold", t.p_threshold);
  s.read("validation_fraction", t.validation_fraction);
  std::string policy = stationarity::to_string(t.policy);
  s.read("policy", policy);
  t.policy = stationarity::feature_policy_from_string(policy);
}

void read_eval(const json& j, EvalConfig& e) {
  Section s(j, "eval", {"mode", "stride", "k", "kmeans_init", "probe_l2", "test_fraction", "knn_k", "knn_sample_cap"});
  s.read("mode", e.mode);
  s.read("stride", e.stride);
  s.read("k", e.k);
  s.read("kmeans_init", e.kmeans_init);
  s.read("probe_l2", e.probe_l2);
  s.read("test_fraction", e.test_fraction);
  s.read("knn_k", e.knn_k);
  s.read("knn_sample_cap", e.knn_sample_cap);
}

void validate_eval(const EvalConfig& e) {
  static const std::set<std::string> modes{"cluster", "classify", "trajectory", "knn-baseline"};
  if (!modes.contains(e.mode)) throw ConfigError("eval.mode must be one of cluster, classify, trajectory, knn-baseline");
  if (e.stride < 0 || e.k < 0) throw ConfigError("eval.stride and eval.k must be >= 0");
  if (e.kmeans_init < 1 || e.knn_k < 1 || e.knn_sample_cap < 1)
    throw ConfigError("eval.kmeans_init, eval.knn_k and eval.knn_sample_cap must be >= 1");
  if (!(e.probe_l2 >= 0)) throw ConfigError("eval.probe_l2 must be >= 0");
  if (!(e.test_fraction > 0 && e.test_fraction < 1)) throw ConfigError("eval.test_fraction must lie in (0, 1)");
}

}  // namespace

void RunConfig::resolve() {
  if (version != kConfigVersion) throw ConfigError("unsupported config version " + std::to_string(version));
  if (threads < 1) throw ConfigError("threads must be >= 1");
  train.seed = seed;
  train.threads = threads;
  train.validate();
  generator.spec.validate();
  generator.hmm.validate();
  if (generator.hmm.n_states != static_cast<int>(generator.spec.n_states()))
    throw ConfigError("generator: HMM state count differs from the emission grid");
  if (generator.instances < 1 || generator.length < 1)
    throw ConfigError("generator.instances and generator.length must be >= 1");
  validate_eval(eval);
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "config", {"version", "seed", "threads", "generator", "train", "eval", "paths"});
  root.read("version", c.version);
  root.read("seed", c.seed);
  root.read("threads", c.threads);
  if (root.has("generator")) read_generator(root.at("generator"), c.generator);
  if (root.has("train")) read_train(root.at("train"), c.train);
  if (root.has("eval")) read_eval(root.at("eval"), c.eval);
  if (root.has("paths")) {
    Section p(root.at("paths"), "paths", {"dataset", "checkpoint", "output"});
    p.read("dataset", c.paths.dataset);
    p.read("checkpoint", c.paths.checkpoint);
    p.read("output", c.paths.output);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  json grid = json::array();
  for (const auto& row : c.generator.spec.grid) {
    json r = json::array();
    for (const auto& p : row) r.push_back(process_to(p));
    grid.push_back(r);
  }
  const auto& g = c.generator;
  const auto& t = c.train;
  const auto& e = c.eval;
  json j{
      {"version", c.version},
      {"seed", c.seed},
      {"threads", c.threads},
      {"generator",
       {{"instances", g.instances}, {"length", g.length}, {"noise_sigma", g.spec.noise_sigma},
        {"correlated_source", g.spec.correlated_source}, {"correlated_target", g.spec.correlated_target},
        {"correlation_weight", g.spec.correlation_weight}, {"hold_steps", g.spec.hold_steps},
        {"normalize", g.spec.normalize}, {"narma_retries", g.spec.narma_retries}, {"grid", grid},
        {"stay_prob", g.hmm.stay_prob}, {"switch_prob", g.hmm.switch_prob},
        {"initial_dist", g.hmm.initial_dist}}},
      {"train",
       {{"delta", t.delta}, {"encoding_size", t.encoding_size}, {"hidden_size", t.hidden_size},
        {"discriminator_hidden", t.discriminator_hidden}, {"bidirectional", t.bidirectional},
        {"w", t.w}, {"samples_per_anchor", t.samples_per_anchor},
        {"anchors_per_instance", t.anchors_per_instance}, {"anchors_per_batch", t.anchors_per_batch},
        {"validation_anchors_per_instance", t.validation_anchors_per_instance}, {"epochs", t.epochs},
        {"learning_rate", t.learning_rate}, {"beta1", t.beta1}, {"beta2", t.beta2},
        {"adam_eps", t.adam_eps}, {"weight_decay", t.weight_decay}, {"eta_max", t.eta_max},
        {"p_threshold", t.p_threshold}, {"policy", stationarity::to_string(t.policy)},
        {"validation_fraction", t.validation_fraction}}},
      {"eval",
       {{"mode", e.mode}, {"stride", e.stride}, {"k", e.k}, {"kmeans_init", e.kmeans_init},
        {"probe_l2", e.probe_l2}, {"test_fraction", e.test_fraction}, {"knn_k", e.knn_k},
        {"knn_sample_cap", e.knn_sample_cap}}},
      {"paths", {{"dataset", c.paths.dataset}, {"checkpoint", c.paths.checkpoint}, {"output", c.paths.output}}},
  };
  return j.dump(2) + "\n";
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream f(path);
  f << dump_config(config);
  if (!f) throw LoadError("cannot write config " + path.string());
}

}  // namespace tnc::io
