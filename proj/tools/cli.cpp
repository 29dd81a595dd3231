#include "cli.hpp"

#include "drn/checkpoint.hpp"
#include "drn/checks.hpp"
#include "drn/data.hpp"
#include "drn/error.hpp"
#include "drn/experiments.hpp"
#include "drn/train.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace drn::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string full_precision(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

int to_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(what + ": '" + text + "' is not an integer");
  return v;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, mode);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  return f;
}

// Writes the subcommand's resolved options next to its main output.
void write_resolved_config(const CLI::App& sub, const fs::path& path) {
  open_out(path) << sub.config_to_str(true, false);
}

// A config file holds flat `key = value` lines naming long options of the
// subcommand. Its values are placed before the command-line flags, so flags win.
// Resolved configs written by a run can be fed back this way.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (!file || args.empty()) return args;
  std::ifstream in(*file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config file '" + *file + "'");
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--") {
      throw UsageError("config file '" + *file + "' must be flat key = value lines");
    }
    // positionals are recorded in resolved configs but always come from the command line
    if (item.name == "config" || item.name == "generator" || item.name == "model" || item.name == "experiment") continue;
    injected.push_back("--" + item.name);
    injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
  }
  std::vector<std::string> out{args.front()};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string generator;
  fs::path out;
  fs::path test_out;
  std::uint64_t seed = 0;
  int n = 100;
  int steps = 3;
  double dt = 0.2;
  double variance = 0.1;
  int bins = 100;
  int n_train = 100;
  int n_test = 1000;
  fs::path csv;
  std::string group_column = "date";
  std::string value_column = "value";
  double lower = 0.0;
  double upper = 1.0;
  double bandwidth = 0.0;
  int horizon = 1;
  int samples_per_distribution = 0;
};

CLI::App* add_gen(CLI::App& app, GenOptions& o) {
  auto* sub = app.add_subcommand("gen", "Generate a dataset file");
  sub->add_option("generator", o.generator, "shifting-gaussian | climate-ou | csv-kde")->required();
  sub->add_option("--out", o.out, "Output dataset (training set for climate-ou)")->required();
  sub->add_option("--test-out", o.test_out, "climate-ou test set (default: <out stem>_test<ext>)");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--n", o.n, "Number of samples (shifting-gaussian)");
  sub->add_option("--T", o.steps, "Input time steps (shifting-gaussian, csv-kde)");
  sub->add_option("--dt", o.dt, "Time step (shifting-gaussian)");
  sub->add_option("--variance", o.variance, "Gaussian variance (shifting-gaussian)");
  sub->add_option("--bins", o.bins, "Bins per distribution (shifting-gaussian, csv-kde)");
  sub->add_option("--n-train", o.n_train, "Training samples (climate-ou)");
  sub->add_option("--n-test", o.n_test, "Test samples (climate-ou)");
  sub->add_option("--csv", o.csv, "Input CSV (csv-kde)");
  sub->add_option("--group-column", o.group_column, "Column defining one distribution (csv-kde)");
  sub->add_option("--value-column", o.value_column, "Column of sample values (csv-kde)");
  sub->add_option("--lower", o.lower, "Support lower bound (csv-kde)");
  sub->add_option("--upper", o.upper, "Support upper bound (csv-kde)");
  sub->add_option("--bandwidth", o.bandwidth, "KDE bandwidth; 0 selects Silverman's rule (csv-kde)");
  sub->add_option("--horizon", o.horizon, "Steps ahead of the last input to predict (csv-kde)");
  sub->add_option("--samples-per-dist", o.samples_per_distribution,
                  "Replace every distribution by a histogram of this many draws (0 keeps exact pdfs)");
  return sub;
}

void report_dataset(std::ostream& out, const Dataset& d, const fs::path& path) {
  out << "wrote " << d.size() << " samples, shape (" << d.steps() << ", " << d.nodes_per_step() << "), support ["
      << d.support().lower() << ", " << d.support().upper() << "] q=" << d.support().bins() << " -> "
      << path.string() << '\n';
}

int cmd_gen(const CLI::App& sub, const GenOptions& o, std::ostream& out) {
  Rng rng(o.seed);
  std::vector<std::pair<Dataset, fs::path>> outputs;
  if (o.generator == "shifting-gaussian") {
    ShiftingGaussianConfig config;
    config.samples = o.n;
    config.steps = o.steps;
    config.dt = o.dt;
    config.variance = o.variance;
    config.bins = o.bins;
    outputs.emplace_back(gen_shifting_gaussian(config, rng), o.out);
  } else if (o.generator == "climate-ou") {
    auto [train, test] = gen_climate_ou(o.n_train, o.n_test, rng);
    fs::path test_out = o.test_out;
    if (test_out.empty()) {
      test_out = o.out.parent_path() / (o.out.stem().string() + "_test" + o.out.extension().string());
    }
    outputs.emplace_back(std::move(train), o.out);
    outputs.emplace_back(std::move(test), test_out);
  } else if (o.generator == "csv-kde") {
    if (o.csv.empty()) throw UsageError("csv-kde needs --csv");
    const Support support(o.lower, o.upper, o.bins);
    const auto bandwidth = o.bandwidth > 0.0 ? std::optional<double>(o.bandwidth) : std::nullopt;
    std::vector<BinnedDistribution> series;
    for (auto& g : load_csv_samples(o.csv, support, o.group_column, o.value_column, bandwidth)) {
      series.push_back(std::move(g.distribution));
    }
    Dataset data = sequences_from_series(series, o.steps, o.horizon);
    data.meta.generator = "csv-kde";
    data.meta.set("source", o.csv.filename().string());
    outputs.emplace_back(std::move(data), o.out);
  } else {
    throw Error(ErrorCode::UnknownGenerator, "unknown generator '" + o.generator +
                                                 "' (expected shifting-gaussian, climate-ou or csv-kde)");
  }
  for (auto& [data, path] : outputs) {
    data.meta.seed = o.seed;
    if (o.samples_per_distribution > 0) data = degrade_with_sampling(data, o.samples_per_distribution, rng);
    save_dataset(path, data);
    report_dataset(out, data, path);
  }
  write_resolved_config(sub, o.out.string() + ".config");
  return kSuccess;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string kind;
  std::string architecture;
  fs::path train;
  fs::path val;
  fs::path test;
  fs::path out;
  int history = 0;
  double learning_rate = 1e-3;
  int epochs = 5000;
  int patience = 50;
  std::uint64_t seed = 0;
  int batch_size = 0;
  double weight_min = 0.0;
  double weight_max = 1.0;
  double bias_min = 0.0;
  double bias_max = 1.0;
};

CLI::App* add_train(CLI::App& app, TrainOptions& o) {
  auto* sub = app.add_subcommand("train", "Train a model and write checkpoint, loss history and summary");
  sub->add_option("model", o.kind, "drn | rdrn | mlp")->required()->check(CLI::IsMember({"drn", "rdrn", "mlp"}));
  sub->add_option("--arch", o.architecture, "'A - NxB - C' for drn/mlp, 'm=<int>' for rdrn")->required();
  sub->add_option("--train", o.train, "Training dataset")->required();
  sub->add_option("--val", o.val, "Validation dataset")->required();
  sub->add_option("--test", o.test, "Optional test dataset evaluated after training");
  sub->add_option("--out", o.out, "Output directory")->required();
  sub->add_option("--history", o.history, "Most recent time steps used (0: inferred)");
  sub->add_option("--lr", o.learning_rate, "Adam learning rate");
  sub->add_option("--epochs", o.epochs, "Maximum epochs");
  sub->add_option("--patience", o.patience, "Epochs without validation improvement before stopping");
  sub->add_option("--seed", o.seed, "Initialization and shuffling seed");
  sub->add_option("--batch-size", o.batch_size, "Minibatch size (0: full batch)");
  sub->add_option("--weight-min", o.weight_min, "Lower bound of initial DRN/RDRN weights");
  sub->add_option("--weight-max", o.weight_max, "Upper bound of initial DRN/RDRN weights");
  sub->add_option("--bias-min", o.bias_min, "Lower bound of initial bias magnitudes");
  sub->add_option("--bias-max", o.bias_max, "Upper bound of initial bias magnitudes");
  return sub;
}

int infer_history(const Architecture& arch, const Dataset& data) {
  const int k = data.nodes_per_step();
  if (arch.kind == "rdrn") return data.steps();
  const int per_step = arch.kind == "drn" ? k : k * data.support().bins();
  if (arch.layers.front() % per_step != 0) {
    throw Error(ErrorCode::ShapeMismatch, "input width " + std::to_string(arch.layers.front()) +
                                              " is not a multiple of " + std::to_string(per_step));
  }
  return arch.layers.front() / per_step;
}

void write_metrics_columns(std::ostream& header, std::ostream& row, const std::string& prefix, const Metrics& m) {
  header << ',' << prefix << "jsd_mean," << prefix << "jsd_se," << prefix << "l2_mean," << prefix << "l2_se";
  row << ',' << full_precision(m.jsd_mean) << ',' << full_precision(m.jsd_se) << ',' << full_precision(m.l2_mean)
      << ',' << full_precision(m.l2_se);
}

int cmd_train(const CLI::App& sub, const TrainOptions& o, std::ostream& out) {
  const Architecture arch = parse_architecture(o.kind, o.architecture);
  const Dataset train_data = load_dataset(o.train);
  const Dataset val_data = load_dataset(o.val);
  const int history = o.history > 0 ? o.history : infer_history(arch, train_data);
  auto model = build_model(arch, history, train_data);

  TrainConfig config;
  config.learning_rate = o.learning_rate;
  config.max_epochs = o.epochs;
  config.patience = o.patience;
  config.seed = o.seed;
  config.batch_size = o.batch_size;
  config.init.weight = {o.weight_min, o.weight_max};
  config.init.bias_magnitude = {o.bias_min, o.bias_max};

  out << o.kind << ' ' << format_architecture(arch) << ", history " << history << ", " << model->param_count()
      << " parameters\n";
  TrainReport report = train(*model, train_data, val_data, config);

  std::optional<Metrics> test_metrics;
  if (!o.test.empty()) {
    const Dataset test_data = load_dataset(o.test);
    if (!(test_data.support() == train_data.support())) {
      throw Error(ErrorCode::SupportMismatch, "test and training supports differ");
    }
    test_metrics = evaluate(*model, test_data);
    report.test = *test_metrics;
  }

  fs::create_directories(o.out);
  save_checkpoint(o.out / "checkpoint.txt", *model);
  {
    auto f = open_out(o.out / "report.csv");
    report.write_csv(f);
  }
  {
    std::ostringstream header, row;
    const int best = report.best_epoch;
    header << "model,architecture,history,params,epochs,best_epoch,train_loss,val_loss,train_jsd,seconds";
    row << o.kind << ",\"" << format_architecture(arch) << "\"," << history << ',' << report.param_count << ','
        << report.train_loss.size() << ',' << best << ','
        << (best >= 0 ? full_precision(report.train_loss[best]) : std::string("nan")) << ','
        << (best >= 0 ? full_precision(report.val_loss[best]) : std::string("nan")) << ','
        << full_precision(dataset_loss(*model, train_data)) << ',' << full_precision(report.seconds);
    if (test_metrics) write_metrics_columns(header, row, "test_", *test_metrics);
    open_out(o.out / "summary.csv") << header.str() << '\n' << row.str() << '\n';
  }
  write_resolved_config(sub, o.out / "train.config");

  out << "epochs " << report.train_loss.size() << ", best epoch " << report.best_epoch << ", val loss "
      << report.best_val_loss << ", " << report.seconds << " s\n";
  if (test_metrics) {
    out << "test JSD " << test_metrics->jsd_mean << " (" << test_metrics->jsd_se << "), L2 " << test_metrics->l2_mean
        << " (" << test_metrics->l2_se << ")\n";
  }
  out << "wrote " << (o.out / "checkpoint.txt").string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  fs::path checkpoint;
  fs::path data;
  std::string metrics = "jsd,l2";
  fs::path samples;
  fs::path out;
};

CLI::App* add_eval(CLI::App& app, EvalOptions& o) {
  auto* sub = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  sub->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  sub->add_option("--data", o.data, "Dataset file")->required();
  sub->add_option("--metrics", o.metrics, "Comma-separated subset of jsd,l2,nll");
  sub->add_option("--samples", o.samples, "Held-out samples for NLL: one line of values per data item");
  sub->add_option("--out", o.out, "CSV output (default: stdout only)");
  return sub;
}

std::vector<std::vector<double>> read_sample_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::vector<std::vector<double>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<double> values;
    std::string token;
    while (ss >> token) {
      try {
        values.push_back(std::stod(token));
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad value '" + token + "'");
      }
    }
    out.push_back(std::move(values));
  }
  return out;
}

int cmd_eval(const CLI::App& sub, const EvalOptions& o, std::ostream& out) {
  const auto metrics = split_list(o.metrics);
  for (const auto& m : metrics) {
    if (m != "jsd" && m != "l2" && m != "nll") throw UsageError("unknown metric '" + m + "'");
  }
  if (metrics.empty()) throw UsageError("no metrics requested");
  const bool want_nll = std::find(metrics.begin(), metrics.end(), "nll") != metrics.end();
  if (want_nll && o.samples.empty()) throw UsageError("nll needs --samples");

  const auto model = load_checkpoint(o.checkpoint);
  const Dataset data = load_dataset(o.data);
  if (!(model->support() == data.support())) {
    throw Error(ErrorCode::SupportMismatch, "checkpoint and dataset supports differ");
  }
  Metrics m = evaluate(*model, data);
  if (want_nll) add_nll(m, *model, data, read_sample_lines(o.samples));

  std::ostringstream header, row;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const std::string sep = i == 0 ? "" : ",";
    double mean = 0.0, se = 0.0;
    if (metrics[i] == "jsd") std::tie(mean, se) = std::pair(m.jsd_mean, m.jsd_se);
    if (metrics[i] == "l2") std::tie(mean, se) = std::pair(m.l2_mean, m.l2_se);
    if (metrics[i] == "nll") std::tie(mean, se) = std::pair(*m.nll_mean, *m.nll_se);
    header << sep << metrics[i] << "_mean," << metrics[i] << "_se";
    row << sep << full_precision(mean) << ',' << full_precision(se);
    out << metrics[i] << ' ' << mean << " (" << se << ")\n";
  }
  if (!o.out.empty()) {
    open_out(o.out) << header.str() << '\n' << row.str() << '\n';
    write_resolved_config(sub, o.out.string() + ".config");
  }
  return kSuccess;
}

// ---------------------------------------------------------------- check

CLI::App* add_check(CLI::App& app, std::string& suite) {
  auto* sub = app.add_subcommand("check", "Run numerical property suites");
  sub->add_option("--suite", suite, "props | gradcheck | oracle | all")
      ->check(CLI::IsMember({"props", "gradcheck", "oracle", "all"}));
  return sub;
}

int cmd_check(const std::string& suite, std::ostream& out) {
  const auto results = run_checks(suite);
  print_checks(out, results);
  const auto failed = std::count_if(results.begin(), results.end(), [](const CheckResult& r) { return !r.passed; });
  out << results.size() - failed << " passed, " << failed << " failed\n";
  return failed == 0 ? kSuccess : kCheckFailure;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string experiment;
  std::string task;
  std::string models = "drn,rdrn,mlp";
  std::string sizes;
  std::string seeds = "1,2,3,4,5";
  int n_train = 100;
  fs::path out;
  int epochs = 0;
  int patience = 0;
};

CLI::App* add_sweep(CLI::App& app, SweepOptions& o) {
  auto* sub = app.add_subcommand("sweep", "Train and evaluate over a grid; appends long-format CSV rows");
  sub->add_option("experiment", o.experiment, "train-size | sample-noise")
      ->required()
      ->check(CLI::IsMember({"train-size", "sample-noise"}));
  sub->add_option("--task", o.task, "shifting-gaussian | climate-ou (default: by experiment)");
  sub->add_option("--models", o.models, "Comma-separated models");
  sub->add_option("--sizes", o.sizes,
                  "Training sizes (train-size) or samples per distribution, 'full' for exact pdfs (sample-noise)");
  sub->add_option("--seeds", o.seeds, "Comma-separated seeds");
  sub->add_option("--n-train", o.n_train, "Training size for sample-noise");
  sub->add_option("--out", o.out, "Result CSV")->required();
  sub->add_option("--epochs", o.epochs, "Override maximum epochs of every recipe (0: recipe default)");
  sub->add_option("--patience", o.patience, "Override patience of every recipe (0: recipe default)");
  return sub;
}

constexpr const char* kSweepHeader = "experiment,model,size,seed,metric,value";

int cmd_sweep(const CLI::App& sub, const SweepOptions& o, std::ostream& out) {
  const bool noise = o.experiment == "sample-noise";
  const Task task = parse_task(o.task.empty() ? (noise ? "climate-ou" : "shifting-gaussian") : o.task);
  const auto models = split_list(o.models);
  std::vector<std::string> sizes =
      split_list(o.sizes.empty() ? (noise ? "100,500,1000,10000,full" : "20,30,40,50") : o.sizes);
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(o.seeds)) seeds.push_back(static_cast<std::uint64_t>(to_int(s, "seed")));
  for (const auto& m : models) default_recipe(task, m);
  for (const auto& s : sizes) {
    if (!(noise && s == "full") && to_int(s, "size") < 1) throw UsageError("sizes must be positive");
  }
  const std::vector<std::string> metric_names{"jsd", "l2"};

  std::map<std::string, std::set<std::string>> done;
  if (fs::exists(o.out)) {
    std::ifstream in(o.out);
    std::string line;
    if (std::getline(in, line) && line != kSweepHeader) {
      throw Error(ErrorCode::ParseError, "'" + o.out.string() + "' is not a sweep result file");
    }
    while (std::getline(in, line)) {
      const auto f = split_list(line);
      if (f.size() == 6) done[f[0] + ',' + f[1] + ',' + f[2] + ',' + f[3]].insert(f[4]);
    }
  }
  const bool fresh = !fs::exists(o.out) || fs::file_size(o.out) == 0;
  auto csv = open_out(o.out, std::ios::app);
  if (fresh) csv << kSweepHeader << '\n' << std::flush;
  write_resolved_config(sub, o.out.string() + ".config");

  int ran = 0, skipped = 0;
  for (const auto& model : models) {
    for (const auto& size : sizes) {
      for (const auto seed : seeds) {
        const std::string key = o.experiment + ',' + model + ',' + size + ',' + std::to_string(seed);
        const auto it = done.find(key);
        if (it != done.end() && std::all_of(metric_names.begin(), metric_names.end(),
                                            [&](const std::string& m) { return it->second.count(m) > 0; })) {
          ++skipped;
          continue;
        }
        Recipe recipe = default_recipe(task, model);
        if (o.epochs > 0) recipe.train.max_epochs = o.epochs;
        if (o.patience > 0) recipe.train.patience = o.patience;
        const int n_train = noise ? o.n_train : to_int(size, "size");
        std::optional<int> per_dist;
        if (noise && size != "full") per_dist = to_int(size, "size");
        const CellResult r = run_cell(task, recipe, n_train, seed, per_dist);
        const std::map<std::string, double> values{{"jsd", r.test.jsd_mean}, {"l2", r.test.l2_mean}};
        for (const auto& m : metric_names) {
          if (it != done.end() && it->second.count(m)) continue;
          csv << key << ',' << m << ',' << full_precision(values.at(m)) << '\n';
        }
        csv.flush();
        ++ran;
        out << key << ": L2 " << r.test.l2_mean << ", JSD " << r.test.jsd_mean << " (" << r.report.train_loss.size()
            << " epochs, " << r.report.seconds << " s)\n";
      }
    }
  }
  out << ran << " cells run, " << skipped << " already complete\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distribution regression networks: data generation, training, evaluation and checks", "drn"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GenOptions gen_options;
  TrainOptions train_options;
  EvalOptions eval_options;
  std::string suite = "all";
  SweepOptions sweep_options;
  std::string config_path;
  CLI::App* subs[] = {add_gen(app, gen_options), add_train(app, train_options), add_eval(app, eval_options),
                      add_check(app, suite), add_sweep(app, sweep_options)};
  for (auto* s : subs) s->add_option("--config", config_path, "Flat key = value file of option defaults");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kSuccess : kUsageError;
    }
    if (app.got_subcommand("gen")) return cmd_gen(*subs[0], gen_options, out);
    if (app.got_subcommand("train")) return cmd_train(*subs[1], train_options, out);
    if (app.got_subcommand("eval")) return cmd_eval(*subs[2], eval_options, out);
    if (app.got_subcommand("check")) return cmd_check(suite, out);
    return cmd_sweep(*subs[4], sweep_options, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::ArchitectureParseError || e.code() == ErrorCode::UnknownGenerator;
    return usage ? kUsageError : kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace drn::cli
