#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>

#include "tnc/checkpoint.hpp"
#include "tnc/error.hpp"
#include "tnc/eval/cluster.hpp"
#include "tnc/eval/dtw.hpp"
#include "tnc/eval/encode.hpp"
#include "tnc/eval/probe.hpp"
#include "tnc/eval/report.hpp"
#include "tnc/io/config.hpp"
#include "tnc/io/csv.hpp"
#include "tnc/io/dataset_file.hpp"
#include "tnc/simgen.hpp"
#include "tnc/stationarity.hpp"
#include "tnc/trainer.hpp"

namespace fs = std::filesystem;

namespace tnc::cli {

namespace {

io::RunConfig base_config(const CommonOptions& c) {
  io::RunConfig cfg = c.config ? io::load_config(*c.config) : io::RunConfig{};
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  return cfg;
}

TimeSeriesDataset load_data(const DataSource& src, io::RunConfig& cfg) {
  if (!src.csv_files.empty()) {
    if (src.dataset) throw ConfigError("give either --dataset or --from-csv, not both");
    std::vector<fs::path> files(src.csv_files.begin(), src.csv_files.end());
    TimeSeriesDataset data = io::dataset_from_csv(files, src.label_column);
    data.normalize();
    return data;
  }
  if (src.dataset) cfg.paths.dataset = *src.dataset;
  if (cfg.paths.dataset.empty()) throw ConfigError("no dataset given (--dataset, --from-csv or paths.dataset)");
  return io::load_dataset(cfg.paths.dataset);
}

fs::path output_dir(const std::optional<std::string>& flag, io::RunConfig& cfg) {
  if (flag) cfg.paths.output = *flag;
  if (cfg.paths.output.empty()) throw ConfigError("no output directory given (--out-dir or paths.output)");
  fs::create_directories(cfg.paths.output);
  return cfg.paths.output;
}

void print_shape(std::ostream& out, const TimeSeriesDataset& data) {
  out << "dataset N=" << data.n_instances() << " D=" << data.n_features() << " T=" << data.length()
      << " labels=" << (data.has_labels() ? "yes" : "no") << '\n';
}

void write_history(const fs::path& path, const std::vector<train::EpochRecord>& history) {
  std::ofstream f(path);
  f << "epoch,loss,neighbor_term,nonneighbor_negative_term,nonneighbor_positive_term,accuracy,"
       "val_loss,val_accuracy,mean_eta,anchors,skipped_anchors,seconds\n";
  f << std::setprecision(9);
  for (const auto& r : history)
    f << r.epoch << ',' << r.train.total << ',' << r.train.neighbor_term << ','
      << r.train.nonneighbor_negative_term << ',' << r.train.nonneighbor_positive_term << ','
      << r.train.discriminator_accuracy << ',' << r.validation.total << ','
      << r.validation.discriminator_accuracy << ',' << r.mean_eta << ',' << r.anchors << ','
      << r.skipped_anchors << ',' << r.seconds << '\n';
  if (!f) throw LoadError("cannot write " + path.string());
}

int cluster_count(const io::RunConfig& cfg, const TimeSeriesDataset& data) {
  if (cfg.eval.k > 0) return cfg.eval.k;
  if (!data.has_labels()) throw ConfigError("unlabeled dataset: pass --k for the number of clusters");
  return static_cast<int>(data.n_states());
}

void require_labels(const TimeSeriesDataset& data, const std::string& mode) {
  if (!data.has_labels()) throw ConfigError(mode + " mode needs a labeled dataset");
}

void eval_cluster(const io::RunConfig& cfg, const model::ModelCheckpoint& ckpt,
                  const TimeSeriesDataset& data, int stride, eval::EvalReport& report) {
  const int delta = ckpt.encoder_config.window_size;
  const int k = cluster_count(cfg, data);
  const eval::KMeansOptions km{.n_init = cfg.eval.kmeans_init};
  const auto enc = eval::encode_dataset(ckpt, data, delta, stride, cfg.threads);
  const auto tnc = eval::evaluate_clusters(enc.encodings, k, cfg.seed, cfg.threads, km);
  const auto raw = eval::evaluate_clusters(eval::raw_windows(data, delta, stride).encodings, k,
                                           cfg.seed, cfg.threads, km);
  report.set("k", static_cast<long long>(k));
  report.set("n_windows", static_cast<long long>(enc.size()));
  report.set("silhouette", tnc.silhouette);
  report.set("davies_bouldin", tnc.davies_bouldin);
  report.set("raw_silhouette", raw.silhouette);
  report.set("raw_davies_bouldin", raw.davies_bouldin);
}

void eval_classify(const io::RunConfig& cfg, const model::ModelCheckpoint& ckpt,
                   const TimeSeriesDataset& data, int stride, eval::EvalReport& report) {
  require_labels(data, "classify");
  std::vector<std::size_t> train_ids, test_ids;
  train::split_instances(data.n_instances(), cfg.eval.test_fraction, cfg.seed, train_ids, test_ids);
  if (train_ids.empty() || test_ids.empty())
    throw ConfigError("classify mode needs at least two instances for a train/test split");
  const int delta = ckpt.encoder_config.window_size;
  const auto train = eval::encode_dataset(ckpt, data.subset(train_ids), delta, stride, cfg.threads);
  const auto test = eval::encode_dataset(ckpt, data.subset(test_ids), delta, stride, cfg.threads);
  const auto res = eval::linear_probe(train, test, cfg.seed, {.l2 = cfg.eval.probe_l2});
  report.set("accuracy", res.accuracy);
  report.set("auprc", res.auprc);
  report.set("n_train", static_cast<long long>(train.size()));
  report.set("n_test", static_cast<long long>(test.size()));
}

void eval_trajectory(const io::RunConfig& cfg, const model::ModelCheckpoint& ckpt,
                     const TimeSeriesDataset& data, std::vector<std::size_t> instances,
                     const fs::path& dir, eval::EvalReport& report) {
  const int delta = ckpt.encoder_config.window_size;
  if (instances.empty()) {
    instances.resize(data.n_instances());
    std::iota(instances.begin(), instances.end(), std::size_t{0});
  }
  for (auto n : instances)
    if (n >= data.n_instances()) throw ConfigError("instance " + std::to_string(n) + " out of range");
  const auto enc = eval::encode_dataset(ckpt, data, delta, delta, cfg.threads);
  std::optional<eval::KMeansResult> km;
  if (data.has_labels() || cfg.eval.k > 0)
    km = eval::kmeans(enc.encodings, cluster_count(cfg, data), cfg.seed, {.n_init = cfg.eval.kmeans_init});
  eval::TransitionScore total;
  for (auto n : instances) {
    const auto one = enc.instance(n);
    const fs::path file = dir / ("trajectory_" + std::to_string(n) + ".csv");
    std::ofstream f(file);
    eval::write_trajectory_csv(f, one);
    if (!f) throw LoadError("cannot write " + file.string());
    if (km && data.has_labels()) {
      const auto nearest = eval::nearest_centroid(one.encodings, km->centroids);
      const auto s = eval::transition_detection(one, nearest, data.instance_labels(n));
      total.transitions += s.transitions;
      total.detected += s.detected;
    }
  }
  report.set("n_instances", static_cast<long long>(instances.size()));
  report.set("windows_per_instance", static_cast<long long>(enc.size() / std::max<std::size_t>(1, data.n_instances())));
  if (data.has_labels()) {
    report.set("transitions", static_cast<long long>(total.transitions));
    report.set("transition_rate", total.rate());
  }
  report.note("trajectory CSVs: " + dir.string() + "/trajectory_<instance>.csv");
}

void eval_knn(const io::RunConfig& cfg, int delta, const TimeSeriesDataset& data, eval::EvalReport& report) {
  require_labels(data, "knn-baseline");
  std::vector<std::size_t> ids(data.n_instances());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng = derive_rng(cfg.seed, 0x6b6e6e);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(std::min(ids.size(), static_cast<std::size_t>(cfg.eval.knn_sample_cap)));
  std::vector<std::size_t> tr, te;
  train::split_instances(ids.size(), cfg.eval.test_fraction, cfg.seed, tr, te);
  if (tr.empty() || te.empty()) throw ConfigError("knn-baseline needs at least two instances");
  for (auto& i : tr) i = ids[i];
  for (auto& i : te) i = ids[i];
  const auto started = std::chrono::steady_clock::now();
  const auto train = eval::collect_windows(data.subset(tr), delta);
  const auto test = eval::collect_windows(data.subset(te), delta);
  const auto pred = eval::knn_classify(train.windows, train.labels, test.windows, cfg.eval.knn_k, cfg.threads);
  report.set("accuracy", eval::accuracy(pred, test.labels));
  report.set("k", static_cast<long long>(cfg.eval.knn_k));
  report.set("n_instances", static_cast<long long>(ids.size()));
  report.set("n_train", static_cast<long long>(train.windows.size()));
  report.set("n_test", static_cast<long long>(test.windows.size()));
  report.set("seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
}

}  // namespace

void cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  io::RunConfig cfg = base_config(opt.common);
  if (opt.instances) cfg.generator.instances = *opt.instances;
  if (opt.length) cfg.generator.length = *opt.length;
  if (opt.out) cfg.paths.output = *opt.out;
  if (cfg.paths.output.empty()) throw ConfigError("no output path given (--out or paths.output)");
  cfg.resolve();
  const auto& g = cfg.generator;
  const TimeSeriesDataset data =
      simgen::assemble_dataset(g.spec, g.hmm, g.instances, g.length, cfg.seed, cfg.threads);
  const fs::path path = cfg.paths.output;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::save_dataset(data, path);
  io::save_config(cfg, fs::path(path.string() + ".config.json"));

  print_shape(out, data);
  std::vector<std::size_t> counts(data.n_states(), 0);
  for (auto s : data.labels()) ++counts[s];
  out << "state frequencies:";
  for (std::size_t s = 0; s < counts.size(); ++s)
    out << ' ' << s << '=' << std::fixed << std::setprecision(4)
        << static_cast<double>(counts[s]) / static_cast<double>(data.labels().size());
  out << std::defaultfloat << "\nseed=" << cfg.seed << "\nwrote " << path.string() << '\n';
}

void cmd_train(const TrainOptions& opt, std::ostream& out) {
  io::RunConfig cfg = base_config(opt.common);
  auto& t = cfg.train;
  if (opt.epochs) t.epochs = *opt.epochs;
  if (opt.delta) t.delta = *opt.delta;
  if (opt.encoding_size) t.encoding_size = *opt.encoding_size;
  if (opt.hidden_size) t.hidden_size = *opt.hidden_size;
  if (opt.samples) t.samples_per_anchor = *opt.samples;
  if (opt.anchors) t.anchors_per_instance = *opt.anchors;
  if (opt.batch) t.anchors_per_batch = *opt.batch;
  if (opt.eta_max) t.eta_max = *opt.eta_max;
  if (opt.w) t.w = *opt.w;
  if (opt.lr) t.learning_rate = *opt.lr;
  if (opt.p_threshold) t.p_threshold = *opt.p_threshold;
  if (opt.policy) t.policy = stationarity::feature_policy_from_string(*opt.policy);
  cfg.resolve();
  const TimeSeriesDataset data = load_data(opt.data, cfg);
  const fs::path dir = output_dir(opt.out_dir, cfg);
  if (static_cast<std::size_t>(t.delta) > data.length())
    throw ConfigError("delta=" + std::to_string(t.delta) + " exceeds series length T=" + std::to_string(data.length()));
  print_shape(out, data);
  io::save_config(cfg, dir / "config.json");

  const auto result = train::train(data, cfg.train, &out);
  model::save_checkpoint(result.checkpoint, dir / "checkpoint.tnc");
  write_history(dir / "history.csv", result.history);
  out << "best_epoch=" << result.best_epoch << "\nseed=" << cfg.seed << "\nwrote "
      << (dir / "checkpoint.tnc").string() << '\n';
}

void cmd_eval(const EvalOptions& opt, std::ostream& out) {
  io::RunConfig cfg = base_config(opt.common);
  auto& e = cfg.eval;
  if (opt.mode) e.mode = *opt.mode;
  if (opt.stride) e.stride = *opt.stride;
  if (opt.k) e.k = *opt.k;
  if (opt.knn_k) e.knn_k = *opt.knn_k;
  if (opt.sample_cap) e.knn_sample_cap = *opt.sample_cap;
  if (opt.test_fraction) e.test_fraction = *opt.test_fraction;
  if (opt.checkpoint) cfg.paths.checkpoint = *opt.checkpoint;
  cfg.resolve();
  const TimeSeriesDataset data = load_data(opt.data, cfg);
  const fs::path dir = output_dir(opt.out_dir, cfg);

  std::optional<model::ModelCheckpoint> ckpt;
  if (!cfg.paths.checkpoint.empty()) ckpt = model::load_checkpoint(cfg.paths.checkpoint);
  if (!ckpt && e.mode != "knn-baseline") throw ConfigError(e.mode + " mode needs --checkpoint");
  int delta = cfg.train.delta;
  if (ckpt) {
    const auto& ec = ckpt->encoder_config;
    delta = ec.window_size;
    if (static_cast<std::size_t>(ec.input_features) != data.n_features() ||
        static_cast<std::size_t>(ec.window_size) > data.length())
      throw ConfigError("checkpoint expects D=" + std::to_string(ec.input_features) +
                        ", delta=" + std::to_string(ec.window_size) + " but the dataset has D=" +
                        std::to_string(data.n_features()) + ", T=" + std::to_string(data.length()));
  }
  const int stride = e.stride > 0 ? e.stride : delta;
  io::save_config(cfg, dir / "config.json");

  eval::EvalReport report(e.mode);
  report.set("seed", static_cast<long long>(cfg.seed));
  report.set("delta", static_cast<long long>(delta));
  if (e.mode == "cluster")
    eval_cluster(cfg, *ckpt, data, stride, report);
  else if (e.mode == "classify")
    eval_classify(cfg, *ckpt, data, stride, report);
  else if (e.mode == "trajectory")
    eval_trajectory(cfg, *ckpt, data, opt.instances, dir, report);
  else
    eval_knn(cfg, delta, data, report);
  report.save(dir);
  out << report.text();
}

void cmd_adf(const AdfOptions& opt, std::ostream& out) {
  const io::CsvTable table = io::read_csv(opt.csv);
  const auto& col = table.columns[table.column_index(opt.column)];
  std::optional<int> max_lag;
  if (opt.max_lag) max_lag = *opt.max_lag;
  const auto r = stationarity::adf_test(col, max_lag);
  out << std::setprecision(10) << "statistic=" << r.test_statistic << "\nlag=" << r.chosen_lag
      << "\np_value=" << r.p_value << "\nn_obs=" << r.n_obs_used << '\n';
}

void cmd_convert(const ConvertOptions& opt, std::ostream& out) {
  std::vector<fs::path> files(opt.csv_files.begin(), opt.csv_files.end());
  TimeSeriesDataset data = io::dataset_from_csv(files, opt.label_column);
  if (opt.normalize) data.normalize();
  io::save_dataset(data, opt.out);
  print_shape(out, data);
  out << "wrote " << opt.out << '\n';
}

}  // namespace tnc::cli
