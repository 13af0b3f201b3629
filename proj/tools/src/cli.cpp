#include "tnc/cli/cli.hpp"

#include <algorithm>

#include "CLI11.hpp"
#include "commands.hpp"
#include "tnc/error.hpp"

namespace tnc::cli {

namespace {

void add_common(CLI::App* app, CommonOptions& c) {
  app->add_option("--config", c.config, "JSON run configuration; flags override its values");
  app->add_option("--seed", c.seed, "Random seed (default 42)");
  app->add_option("--threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber);
}

void add_source(CLI::App* app, DataSource& d) {
  app->add_option("--dataset", d.dataset, "Dataset file (TNCD)");
  app->add_option("--from-csv", d.csv_files, "CSV files, one instance each, used instead of --dataset");
  app->add_option("--label-column", d.label_column, "Label column of the CSV files");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal Neighborhood Coding for non-stationary time series", "tnc"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Generate the simulated HMM dataset");
  add_common(s, sim.common);
  s->add_option("--out", sim.out, "Output dataset path");
  s->add_option("--instances", sim.instances, "Number of instances");
  s->add_option("--length", sim.length, "Time steps per instance");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train encoder and discriminator");
  add_common(t, tr.common);
  add_source(t, tr.data);
  t->add_option("--out-dir", tr.out_dir, "Directory for checkpoint, history and config");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--delta", tr.delta, "Window size");
  t->add_option("--encoding-size", tr.encoding_size);
  t->add_option("--hidden-size", tr.hidden_size, "Recurrent hidden units per direction");
  t->add_option("--samples", tr.samples, "Neighbors and non-neighbors per anchor");
  t->add_option("--anchors", tr.anchors, "Anchors per instance and epoch");
  t->add_option("--batch", tr.batch, "Anchors per gradient step");
  t->add_option("--eta-max", tr.eta_max);
  t->add_option("--w", tr.w, "Positive weight of non-neighbor samples");
  t->add_option("--lr", tr.lr, "Learning rate");
  t->add_option("--p-threshold", tr.p_threshold, "ADF significance level");
  t->add_option("--policy", tr.policy, "Feature policy: all, any or majority");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Evaluate frozen encodings");
  add_common(e, ev.common);
  add_source(e, ev.data);
  e->add_option("--checkpoint", ev.checkpoint);
  e->add_option("--mode", ev.mode, "cluster, classify, trajectory or knn-baseline")
      ->check(CLI::IsMember({"cluster", "classify", "trajectory", "knn-baseline"}));
  e->add_option("--out-dir", ev.out_dir, "Directory for report.txt, metrics.txt and CSVs");
  e->add_option("--stride", ev.stride, "Window stride (default: window size)");
  e->add_option("--k", ev.k, "Clusters (default: number of labeled states)");
  e->add_option("--knn-k", ev.knn_k);
  e->add_option("--sample-cap", ev.sample_cap, "Instances drawn for knn-baseline");
  e->add_option("--test-fraction", ev.test_fraction);
  e->add_option("--instances", ev.instances, "Instances exported in trajectory mode (default: all)");

  AdfOptions adf;
  auto* a = app.add_subcommand("adf", "Augmented Dickey-Fuller test on a CSV column");
  a->add_option("--csv", adf.csv)->required();
  a->add_option("--column", adf.column, "Column name or 0-based index")->required();
  a->add_option("--max-lag", adf.max_lag);

  ConvertOptions conv;
  auto* c = app.add_subcommand("convert", "Convert CSV files into a dataset file");
  c->add_option("--from-csv", conv.csv_files)->required();
  c->add_option("--label-column", conv.label_column);
  c->add_option("--out", conv.out)->required();
  c->add_flag("--normalize", conv.normalize, "Z-normalize every feature");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) cmd_simulate(sim, out);
    if (*t) cmd_train(tr, out);
    if (*e) cmd_eval(ev, out);
    if (*a) cmd_adf(adf, out);
    if (*c) cmd_convert(conv, out);
  } catch (const NumericalError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace tnc::cli
