#include "drn/experiments.hpp"

#include "drn/error.hpp"
#include "drn/mlp.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace drn {

namespace {

constexpr std::uint64_t kDegradeStream = 0x5deece66dULL;

class ArchParser {
 public:
  explicit ArchParser(std::string_view text) : text_(text) {}

  int integer(const char* what) {
    skip_space();
    int value = 0;
    const auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{} || value < 0) fail(std::string("expected ") + what);
    pos_ = static_cast<std::size_t>(end - text_.data());
    return value;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || std::tolower(static_cast<unsigned char>(text_[pos_])) != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void finish() {
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing text");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::ArchitectureParseError, "architecture '" + std::string(text_) + "' at position " +
                                                       std::to_string(pos_) + ": " + message);
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Task parse_task(std::string_view name) {
  if (name == "shifting-gaussian") return Task::ShiftingGaussian;
  if (name == "climate-ou") return Task::ClimateOu;
  throw Error(ErrorCode::InvalidArgument, "unknown task '" + std::string(name) + "'");
}

std::string to_string(Task task) { return task == Task::ShiftingGaussian ? "shifting-gaussian" : "climate-ou"; }

TaskData make_task_data(Task task, int n_train, std::uint64_t seed) {
  if (n_train < 1) throw Error(ErrorCode::InvalidArgument, "training size must be at least 1");
  Rng rng(seed);
  const int n_val = std::max(100, n_train);
  if (task == Task::ShiftingGaussian) {
    ShiftingGaussianConfig config;
    config.samples = 1000;
    Dataset test = gen_shifting_gaussian(config, rng);
    config.samples = n_val;
    Dataset val = gen_shifting_gaussian(config, rng);
    config.samples = n_train;
    Dataset train = gen_shifting_gaussian(config, rng);
    return {std::move(train), std::move(val), std::move(test)};
  }
  Dataset test = gen_climate_ou_set(1000, rng);
  Dataset val = gen_climate_ou_set(n_val, rng);
  Dataset train = gen_climate_ou_set(n_train, rng);
  return {std::move(train), std::move(val), std::move(test)};
}

TaskData degrade_task_data(const TaskData& data, int samples_per_distribution, std::uint64_t seed) {
  Rng rng(seed ^ kDegradeStream);
  Dataset train = degrade_with_sampling(data.train, samples_per_distribution, rng);
  Dataset val = degrade_with_sampling(data.val, samples_per_distribution, rng);
  const Dataset noisy_test = degrade_with_sampling(data.test, samples_per_distribution, rng);
  Dataset test(data.test.support(), data.test.steps(), data.test.nodes_per_step());
  test.meta = noisy_test.meta;
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    SequenceSample s = noisy_test[i];
    s.target = data.test[i].target;
    test.add(std::move(s));
  }
  return {std::move(train), std::move(val), std::move(test)};
}

Architecture parse_architecture(const std::string& kind, std::string_view text) {
  ArchParser p(text);
  Architecture arch;
  arch.kind = kind;
  if (kind == "rdrn") {
    p.expect('m');
    p.expect('=');
    arch.hidden = p.integer("hidden width");
    if (arch.hidden < 1) p.fail("hidden width must be at least 1");
    p.finish();
    return arch;
  }
  if (kind != "drn" && kind != "mlp") throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + kind + "'");
  const int inputs = p.integer("input width");
  if (inputs < 1) p.fail("input width must be at least 1");
  p.expect('-');
  const int depth = p.integer("hidden layer count");
  p.expect('x');
  const int width = p.integer("hidden layer width");
  if (depth > 0 && width < 1) p.fail("hidden layer width must be at least 1");
  p.expect('-');
  const int outputs = p.integer("output width");
  if (outputs < 1) p.fail("output width must be at least 1");
  p.finish();
  arch.layers.push_back(inputs);
  for (int i = 0; i < depth; ++i) arch.layers.push_back(width);
  arch.layers.push_back(outputs);
  return arch;
}

std::string format_architecture(const Architecture& arch) {
  if (arch.kind == "rdrn") return "m=" + std::to_string(arch.hidden);
  const auto& l = arch.layers;
  const int depth = static_cast<int>(l.size()) - 2;
  return std::to_string(l.front()) + " - " + std::to_string(depth) + "x" + std::to_string(depth > 0 ? l[1] : 0) +
         " - " + std::to_string(l.back());
}

Recipe default_recipe(Task task, const std::string& kind) {
  Recipe r;
  r.kind = kind;
  const bool sg = task == Task::ShiftingGaussian;
  if (kind == "drn") {
    r.architecture = sg ? "3 - 2x10 - 1" : "3 - 1x5 - 1";
    r.history = 3;
  } else if (kind == "rdrn") {
    r.architecture = "m=5";
    r.history = sg ? 3 : 5;
  } else if (kind == "mlp") {
    r.architecture = sg ? "300 - 1x3 - 100" : "300 - 2x50 - 100";
    r.history = 3;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + kind + "'");
  }
  // One budget for every model. Learning rate and initial weight range
  // picked on mean validation loss over three tuning seeds.
  r.train.max_epochs = 10000;
  r.train.patience = 500;
  if (kind == "mlp") {
    r.train.learning_rate = sg ? 0.05 : 0.01;
  } else {
    r.train.learning_rate = 0.05;
    if (!sg) r.train.init.weight = {0.0, 100.0};
  }
  return r;
}

std::unique_ptr<Model> build_model(const Architecture& arch, int history, const Dataset& data) {
  const int k = data.nodes_per_step();
  const int q = data.support().bins();
  if (history < 1 || history > data.steps()) {
    throw Error(ErrorCode::ShapeMismatch, "history " + std::to_string(history) + " outside 1.." +
                                              std::to_string(data.steps()) + " available steps");
  }
  if (arch.kind == "rdrn") return std::make_unique<RdrnModel>(k, arch.hidden, history, data.support());
  if (arch.kind == "drn") {
    if (arch.layers.front() != history * k) {
      throw Error(ErrorCode::ShapeMismatch, "DRN input width " + std::to_string(arch.layers.front()) +
                                                " must equal history x distributions per step = " +
                                                std::to_string(history * k));
    }
    return std::make_unique<DrnModel>(NetworkSpec(arch.layers), data.support(), k);
  }
  if (arch.kind == "mlp") {
    if (arch.layers.front() != history * k * q || arch.layers.back() != q) {
      throw Error(ErrorCode::ShapeMismatch, "MLP needs " + std::to_string(history * k * q) + " inputs and " +
                                                std::to_string(q) + " outputs");
    }
    return std::make_unique<MlpModel>(arch.layers, data.support(), k);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + arch.kind + "'");
}

std::unique_ptr<Model> build_model(const Recipe& recipe, const Dataset& data) {
  return build_model(parse_architecture(recipe.kind, recipe.architecture), recipe.history, data);
}

CellResult run_cell(Task task, const Recipe& recipe, int n_train, std::uint64_t seed,
                    std::optional<int> samples_per_distribution) {
  TaskData data = make_task_data(task, n_train, seed);
  if (samples_per_distribution) data = degrade_task_data(data, *samples_per_distribution, seed);
  auto model = build_model(recipe, data.train);
  TrainConfig config = recipe.train;
  config.seed = seed;
  CellResult result;
  result.report = train(*model, data.train, data.val, config);
  result.test = evaluate(*model, data.test);
  result.report.test = result.test;
  return result;
}

}  // namespace drn
