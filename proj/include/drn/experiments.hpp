#ifndef DRN_EXPERIMENTS_HPP
#define DRN_EXPERIMENTS_HPP

// Synthetic benchmark tasks, architecture strings and the per-task training
// recipes used by `drn sweep`.

#include "drn/data.hpp"
#include "drn/model.hpp"
#include "drn/train.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drn {

enum class Task { ShiftingGaussian, ClimateOu };

// "shifting-gaussian" or "climate-ou"; throws InvalidArgument.
Task parse_task(std::string_view name);
std::string to_string(Task task);

struct TaskData {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Validation holds max(100, n_train) samples and test 1000. The test set is
// drawn first, so every training size sees the same test set for a seed.
TaskData make_task_data(Task task, int n_train, std::uint64_t seed);

// Replaces train/val inputs and targets and test inputs with histograms of
// `samples_per_distribution` draws. Test targets stay exact.
TaskData degrade_task_data(const TaskData& data, int samples_per_distribution, std::uint64_t seed);

// "A - NxB - C" for drn and mlp; "m=<int>" for rdrn.
struct Architecture {
  std::string kind;
  std::vector<int> layers;
  int hidden = 0;
};

// Throws ArchitectureParseError naming the offending character position.
Architecture parse_architecture(const std::string& kind, std::string_view text);
std::string format_architecture(const Architecture& arch);

struct Recipe {
  std::string kind;
  std::string architecture;
  int history = 3;
  TrainConfig train;
};

Recipe default_recipe(Task task, const std::string& kind);

// Checks the architecture against the dataset's support and shape.
std::unique_ptr<Model> build_model(const Architecture& arch, int history, const Dataset& data);
std::unique_ptr<Model> build_model(const Recipe& recipe, const Dataset& data);

struct CellResult {
  Metrics test;
  TrainReport report;
};

CellResult run_cell(Task task, const Recipe& recipe, int n_train, std::uint64_t seed,
                    std::optional<int> samples_per_distribution = std::nullopt);

}  // namespace drn

#endif  // DRN_EXPERIMENTS_HPP
