#include "drn/checkpoint.hpp"

#include "drn/error.hpp"
#include "drn/mlp.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace drn {

void write_checkpoint(std::ostream& out, const Model& model) {
  const Support& s = model.support();
  out << std::setprecision(17);
  out << "DRNCKPT v1\n";
  out << "model " << model.kind() << '\n';
  out << "support " << s.lower() << ' ' << s.upper() << ' ' << s.bins() << '\n';
  out << "nodes_per_step " << model.nodes_per_step() << '\n';
  if (const auto* drn = dynamic_cast<const DrnModel*>(&model)) {
    out << "layers";
    for (int n : drn->spec().layer_sizes()) out << ' ' << n;
    out << '\n';
  } else if (const auto* rdrn = dynamic_cast<const RdrnModel*>(&model)) {
    out << "recurrent " << rdrn->nodes_per_step() << ' ' << rdrn->hidden() << ' ' << rdrn->history() << '\n';
  } else if (const auto* mlp = dynamic_cast<const MlpModel*>(&model)) {
    out << "layers";
    for (int n : mlp->dims()) out << ' ' << n;
    out << '\n';
  } else {
    throw Error(ErrorCode::InvalidArgument, "unsupported model kind " + model.kind());
  }
  out << "params " << model.param_count() << '\n';
  for (double v : model.params()) out << v << '\n';
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::CheckpointParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::unique_ptr<Model> read_checkpoint(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* expected_tag) {
    if (!std::getline(in, line)) fail(line_no + 1, std::string("missing '") + expected_tag + "' line");
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != expected_tag) fail(line_no, std::string("expected '") + expected_tag + "', found '" + tag + "'");
    return ss;
  };

  {
    auto ss = next("DRNCKPT");
    std::string version;
    ss >> version;
    if (version != "v1") fail(line_no, "unsupported version '" + version + "'");
  }
  std::string kind;
  if (!(next("model") >> kind)) fail(line_no, "missing model kind");
  double lower = 0, upper = 0;
  int bins = 0;
  if (!(next("support") >> lower >> upper >> bins)) fail(line_no, "bad support");
  int nodes = 0;
  if (!(next("nodes_per_step") >> nodes)) fail(line_no, "bad nodes_per_step");

  std::unique_ptr<Model> model;
  try {
    const Support support(lower, upper, bins);
    if (kind == "drn" || kind == "mlp") {
      auto ss = next("layers");
      std::vector<int> sizes;
      for (int n; ss >> n;) sizes.push_back(n);
      if (kind == "drn") {
        model = std::make_unique<DrnModel>(NetworkSpec(sizes), support, nodes);
      } else {
        model = std::make_unique<MlpModel>(sizes, support, nodes);
      }
    } else if (kind == "rdrn") {
      int n = 0, m = 0, steps = 0;
      if (!(next("recurrent") >> n >> m >> steps)) fail(line_no, "bad recurrent dimensions");
      model = std::make_unique<RdrnModel>(n, m, steps, support);
    } else {
      fail(line_no, "unknown model kind '" + kind + "'");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CheckpointParseError) throw;
    fail(line_no, e.what());
  }

  Eigen::Index count = 0;
  if (!(next("params") >> count)) fail(line_no, "bad params count");
  if (count != model->param_count()) {
    fail(line_no, "parameter count " + std::to_string(count) + " does not match architecture (" +
                      std::to_string(model->param_count()) + ")");
  }
  Vector params(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!std::getline(in, line)) fail(line_no + 1, "unexpected end of parameters");
    ++line_no;
    const char* begin = line.data();
    const char* end = begin + line.size();
    while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
    const auto [ptr, ec] = std::from_chars(begin, end, params(i));
    if (ec != std::errc() || ptr != end || !std::isfinite(params(i))) fail(line_no, "bad parameter value");
  }
  model->set_params(std::move(params));
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_checkpoint(out, model);
}

std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace drn
