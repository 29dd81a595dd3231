#include "drn/checkpoint.hpp"
#include "drn/mlp.hpp"

#include "helpers.hpp"

#include <sstream>

using namespace drn;
using drn::test::error_code_of;

namespace {

std::unique_ptr<Model> round_trip(const Model& model) {
  std::stringstream buffer;
  write_checkpoint(buffer, model);
  return read_checkpoint(buffer);
}

std::unique_ptr<Model> parse(const std::string& text) {
  std::istringstream in(text);
  return read_checkpoint(in);
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  const Support s(-0.01, 0.1, 12);
  Rng rng(1);
  std::vector<std::unique_ptr<Model>> models;
  models.push_back(std::make_unique<DrnModel>(NetworkSpec({6, 3, 1}), s, 2));
  models.push_back(std::make_unique<RdrnModel>(2, 3, 4, s));
  models.push_back(std::make_unique<MlpModel>(std::vector<int>{36, 5, 12}, s));
  for (auto& m : models) {
    m->initialize({{0.0, 10.0}, {0.0, 1.0}}, rng);
    const auto back = round_trip(*m);
    CHECK(back->kind() == m->kind());
    CHECK(back->support() == s);
    CHECK(back->history() == m->history());
    CHECK(back->nodes_per_step() == m->nodes_per_step());
    CHECK(back->params() == m->params());
  }
}

TEST_CASE("checkpoint file") {
  const auto path = std::filesystem::temp_directory_path() / "drn_test_checkpoint.txt";
  RdrnModel model(1, 5, 3, Support(0, 1, 100));
  Rng rng(2);
  model.initialize({}, rng);
  save_checkpoint(path, model);
  const auto back = load_checkpoint(path);
  CHECK(back->params() == model.params());
  CHECK(back->param_count() == 59);
  CHECK(error_code_of([] { load_checkpoint("/nonexistent/ckpt.txt"); }) == ErrorCode::IoError);
}

TEST_CASE("checkpoint parse errors") {
  const std::string head = "DRNCKPT v1\nmodel drn\nsupport 0 1 4\nnodes_per_step 1\nlayers 1 1\n";
  const std::string ok = head + "params 5\n1\n0\n0\n0.5\n0.5\n";
  CHECK(parse(ok)->param_count() == 5);
  CHECK(error_code_of([&] { parse("DRNCKPT v2\n"); }) == ErrorCode::CheckpointParseError);
  CHECK(error_code_of([&] { parse(head + "params 6\n"); }) == ErrorCode::CheckpointParseError);
  CHECK(error_code_of([&] { parse(head + "params 5\n1\n0\n0\n0.5\n"); }) == ErrorCode::CheckpointParseError);
  CHECK(error_code_of([&] { parse(head + "params 5\n1\n0\nabc\n0.5\n0.5\n"); }) == ErrorCode::CheckpointParseError);
  CHECK(error_code_of([&] { parse(head + "params 5\n1\n0\nnan\n0.5\n0.5\n"); }) == ErrorCode::CheckpointParseError);
  CHECK(error_code_of([&] { parse("DRNCKPT v1\nmodel cnn\nsupport 0 1 4\nnodes_per_step 1\n"); }) ==
        ErrorCode::CheckpointParseError);
  CHECK(error_code_of([&] { parse("DRNCKPT v1\nmodel drn\nsupport 1 0 4\nnodes_per_step 1\nlayers 1 1\n"); }) ==
        ErrorCode::CheckpointParseError);
  try {
    parse(head + "params 5\n1\n0\nabc\n0.5\n0.5\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 9") != std::string::npos);
  }
}
