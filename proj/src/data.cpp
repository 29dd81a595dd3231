#include "drn/data.hpp"

#include "drn/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace drn {

std::optional<std::string> DatasetMeta::get(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  return std::nullopt;
}

void DatasetMeta::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : params) {
    if (k == key) {
      v = value;
      return;
    }
  }
  params.emplace_back(key, value);
}

Dataset::Dataset(Support support, int steps, int nodes_per_step)
    : support_(support), steps_(steps), nodes_(nodes_per_step) {
  if (steps < 1 || nodes_per_step < 1) throw Error(ErrorCode::InvalidArgument, "dataset shape must be positive");
}

void Dataset::add(SequenceSample sample) {
  if (static_cast<int>(sample.inputs.size()) != steps_) {
    throw Error(ErrorCode::ShapeMismatch, "sample has " + std::to_string(sample.inputs.size()) + " steps, expected " +
                                              std::to_string(steps_));
  }
  for (const auto& step : sample.inputs) {
    if (static_cast<int>(step.size()) != nodes_) throw Error(ErrorCode::ShapeMismatch, "wrong nodes per step");
    for (const auto& p : step)
      if (!(p.support() == support_)) throw Error(ErrorCode::SupportMismatch, "input support differs from dataset");
  }
  if (!(sample.target.support() == support_)) throw Error(ErrorCode::SupportMismatch, "target support differs");
  samples_.push_back(std::move(sample));
}

PackedBatch pack(const Dataset& data) {
  const int q = data.support().bins();
  const auto n = static_cast<Eigen::Index>(data.size());
  PackedBatch batch;
  batch.inputs.assign(static_cast<std::size_t>(data.steps()) * data.nodes_per_step(), Matrix(q, n));
  batch.targets.resize(q, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& s = data.samples()[c];
    for (int t = 0; t < data.steps(); ++t)
      for (int k = 0; k < data.nodes_per_step(); ++k)
        batch.inputs[t * data.nodes_per_step() + k].col(c) = s.inputs[t][k].mass();
    batch.targets.col(c) = s.target.mass();
  }
  return batch;
}

Dataset truncate_history(const Dataset& data, int steps) {
  if (steps < 1 || steps > data.steps()) {
    throw Error(ErrorCode::ShapeMismatch, "history " + std::to_string(steps) + " not in [1, " +
                                              std::to_string(data.steps()) + "]");
  }
  Dataset out(data.support(), steps, data.nodes_per_step());
  out.meta = data.meta;
  for (const auto& s : data.samples()) {
    SequenceSample t{Sequence(s.inputs.end() - steps, s.inputs.end()), s.target, s.latent};
    out.add(std::move(t));
  }
  return out;
}

Dataset subset(const Dataset& data, std::size_t begin, std::size_t count) {
  if (begin + count > data.size()) throw Error(ErrorCode::InvalidArgument, "subset range exceeds dataset");
  Dataset out(data.support(), data.steps(), data.nodes_per_step());
  out.meta = data.meta;
  for (std::size_t i = begin; i < begin + count; ++i) out.add(data.samples()[i]);
  return out;
}

namespace {

std::string round_trip(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

double shifting_gaussian_mean(double t) { return 0.5 + 0.3 * std::sin(t); }

Dataset gen_shifting_gaussian(const ShiftingGaussianConfig& config, Rng& rng) {
  if (config.samples < 1 || config.steps < 1 || !(config.dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "shifting Gaussian needs samples >= 1, steps >= 1, dt > 0");
  }
  const Support support(0.0, 1.0, config.bins);
  Dataset data(support, config.steps, 1);
  data.meta.generator = "shifting-gaussian";
  data.meta.set("T", std::to_string(config.steps));
  data.meta.set("dt", round_trip(config.dt));
  data.meta.set("variance", round_trip(config.variance));

  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < config.samples; ++i) {
    const double phase = phase_dist(rng);
    Sequence inputs;
    for (int t = 0; t < config.steps; ++t) {
      inputs.push_back({discretize_gaussian(shifting_gaussian_mean(phase + t * config.dt), config.variance, support)});
    }
    auto target = discretize_gaussian(shifting_gaussian_mean(phase + config.steps * config.dt), config.variance, support);
    data.add({std::move(inputs), std::move(target), {phase}});
  }
  return data;
}

OuMoments ou_moments(double y, double t) {
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "OU time must be non-negative");
  return {y * std::exp(-kOuDrift * t), kOuDiffusion * (1.0 - std::exp(-2.0 * kOuDrift * t)) / kOuDrift};
}

Support climate_support(int bins) { return Support(-0.01, 0.1, bins); }

BinnedDistribution ou_distribution(double y, double t, const Support& support) {
  const OuMoments m = ou_moments(y, t);
  if (!(m.variance > 0.0)) throw Error(ErrorCode::VarianceUnderflow, "OU variance is zero at t = 0");
  return discretize_gaussian(m.mean, m.variance, support);
}

Dataset gen_climate_ou_set(int samples, Rng& rng) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "climate dataset needs at least one sample");
  const Support support = climate_support();
  Dataset data(support, kClimateSteps, 1);
  data.meta.generator = "climate-ou";
  data.meta.set("T", std::to_string(kClimateSteps));

  std::uniform_real_distribution<double> y_dist(0.02, 0.09);
  std::uniform_real_distribution<double> t0_dist(0.01, 0.05);
  for (int i = 0; i < samples; ++i) {
    const double y = y_dist(rng);
    const double t0 = t0_dist(rng);
    Sequence inputs;
    for (int s = kClimateSteps - 1; s >= 0; --s) inputs.push_back({ou_distribution(y, t0 - s * kClimateDelta, support)});
    data.add({std::move(inputs), ou_distribution(y, t0 + kClimateHorizon, support), {y, t0}});
  }
  return data;
}

std::pair<Dataset, Dataset> gen_climate_ou(int train, int test, Rng& rng) {
  Dataset a = gen_climate_ou_set(train, rng);
  Dataset b = gen_climate_ou_set(test, rng);
  return {std::move(a), std::move(b)};
}

Dataset degrade_with_sampling(const Dataset& data, int samples_per_distribution, Rng& rng) {
  if (samples_per_distribution < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  const auto n = static_cast<std::size_t>(samples_per_distribution);
  auto degrade = [&](const BinnedDistribution& p) { return histogram_rebin(sample(p, n, rng), p.support()); };

  Dataset out(data.support(), data.steps(), data.nodes_per_step());
  out.meta = data.meta;
  out.meta.set("n_samples", std::to_string(samples_per_distribution));
  for (const auto& s : data.samples()) {
    Sequence inputs;
    for (const auto& step : s.inputs) {
      std::vector<BinnedDistribution> row;
      for (const auto& p : step) row.push_back(degrade(p));
      inputs.push_back(std::move(row));
    }
    auto target = degrade(s.target);
    out.add({std::move(inputs), std::move(target), s.latent});
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::MalformedCsv, "line 1: no column named '" + name + "'");
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::vector<GroupedDistribution> load_csv_samples(const std::filesystem::path& path, const Support& support,
                                                  const std::string& group_column, const std::string& value_column,
                                                  std::optional<double> bandwidth) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedCsv, "line 1: missing header row");
  const auto header = split_csv_line(line, 1);
  const std::size_t group_idx = find_column(header, group_column);
  const std::size_t value_idx = find_column(header, value_column);

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " fields, found " +
                                               std::to_string(fields.size()));
    }
    const std::string& group = fields[group_idx];
    auto [it, inserted] = values.try_emplace(group);
    if (inserted) order.push_back(group);
    const std::string& cell = fields[value_idx];
    if (cell.find_first_not_of(' ') == std::string::npos) continue;  // missing value
    double x = 0.0;
    if (!parse_double(cell, x) || !std::isfinite(x)) {
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ", column " +
                                               std::to_string(value_idx + 1) + ": cannot parse '" + cell + "'");
    }
    if (!support.contains(x)) {
      throw Error(ErrorCode::ValueOutOfSupport, "line " + std::to_string(line_no) + ": value " + cell +
                                                    " outside support");
    }
    it->second.push_back(x);
  }

  std::vector<GroupedDistribution> out;
  for (const auto& group : order) {
    const auto& v = values.at(group);
    if (v.empty()) throw Error(ErrorCode::EmptyGroup, "group '" + group + "' has no values");
    out.push_back({group, kde(v, support, bandwidth)});
  }
  return out;
}

Dataset sequences_from_series(const std::vector<BinnedDistribution>& series, int steps, int horizon) {
  if (steps < 1 || horizon < 1) throw Error(ErrorCode::InvalidArgument, "steps and horizon must be positive");
  if (series.empty()) throw Error(ErrorCode::EmptySamples, "empty series");
  Dataset data(series.front().support(), steps, 1);
  for (std::size_t start = 0; start + steps - 1 + horizon < series.size(); ++start) {
    Sequence inputs;
    for (int t = 0; t < steps; ++t) inputs.push_back({series[start + t]});
    data.add({std::move(inputs), series[start + steps - 1 + horizon], {static_cast<double>(start)}});
  }
  return data;
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const Support& s = data.support();
  out << std::setprecision(17);
  out << "DRNDATA v1\n";
  out << "support " << s.lower() << ' ' << s.upper() << ' ' << s.bins() << '\n';
  out << "shape " << data.size() << ' ' << data.steps() << ' ' << data.nodes_per_step() << '\n';
  out << "meta " << data.meta.generator << ' ' << data.meta.seed;
  for (const auto& [k, v] : data.meta.params) out << ' ' << k << '=' << v;
  out << '\n';
  auto row = [&](const BinnedDistribution& p) {
    for (int i = 0; i < p.bins(); ++i) out << (i ? " " : "") << p[i];
    out << '\n';
  };
  for (const auto& sample : data.samples()) {
    for (const auto& step : sample.inputs)
      for (const auto& p : step) row(p);
    row(sample.target);
  }
}

namespace {

[[noreturn]] void data_parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "dataset line " + std::to_string(line) + ": " + what);
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::istringstream {
    if (!std::getline(in, line)) data_parse_error(line_no + 1, "unexpected end of file");
    ++line_no;
    return std::istringstream(line);
  };

  {
    auto ss = next();
    std::string magic, version;
    ss >> magic >> version;
    if (magic != "DRNDATA" || version != "v1") data_parse_error(line_no, "expected 'DRNDATA v1'");
  }
  double lower = 0, upper = 0;
  int bins = 0;
  {
    auto ss = next();
    std::string tag;
    if (!(ss >> tag >> lower >> upper >> bins) || tag != "support") data_parse_error(line_no, "bad support line");
  }
  std::size_t count = 0;
  int steps = 0, nodes = 0;
  {
    auto ss = next();
    std::string tag;
    if (!(ss >> tag >> count >> steps >> nodes) || tag != "shape") data_parse_error(line_no, "bad shape line");
  }
  Dataset data(Support(lower, upper, bins), steps, nodes);
  {
    auto ss = next();
    std::string tag;
    if (!(ss >> tag >> data.meta.generator >> data.meta.seed) || tag != "meta") data_parse_error(line_no, "bad meta line");
    std::string kv;
    while (ss >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) data_parse_error(line_no, "meta entry '" + kv + "' lacks '='");
      data.meta.params.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }

  auto read_row = [&]() {
    auto ss = next();
    Vector mass(bins);
    std::string token;
    for (int i = 0; i < bins; ++i) {
      if (!(ss >> token) || !parse_double(token, mass(i))) {
        data_parse_error(line_no, "expected " + std::to_string(bins) + " masses");
      }
    }
    if (ss >> token) data_parse_error(line_no, "trailing data");
    if ((mass.array() < 0.0).any() || !mass.allFinite()) data_parse_error(line_no, "negative or non-finite mass");
    if (std::abs(mass.sum() - 1.0) > 1e-6) data_parse_error(line_no, "masses do not sum to 1");
    if (std::abs(mass.sum() - 1.0) > BinnedDistribution::kSumTolerance) mass /= mass.sum();
    return BinnedDistribution(data.support(), std::move(mass));
  };
  for (std::size_t n = 0; n < count; ++n) {
    Sequence inputs;
    for (int t = 0; t < steps; ++t) {
      std::vector<BinnedDistribution> row;
      for (int k = 0; k < nodes; ++k) row.push_back(read_row());
      inputs.push_back(std::move(row));
    }
    auto target = read_row();
    data.add({std::move(inputs), std::move(target), {}});
  }
  return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_dataset(out, data);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace drn
