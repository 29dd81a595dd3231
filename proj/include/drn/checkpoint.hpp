#ifndef DRN_CHECKPOINT_HPP
#define DRN_CHECKPOINT_HPP

// Text checkpoint:
//
//   DRNCKPT v1
//   model <drn|rdrn|mlp>
//   support <lower> <upper> <q>
//   nodes_per_step <K>
//   layers <n_0> ... <n_out>          (drn, mlp)
//   recurrent <n> <m> <T>             (rdrn)
//   params <count>
//   <one parameter per line, 17 significant digits>

#include "drn/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>

namespace drn {

void write_checkpoint(std::ostream& out, const Model& model);
std::unique_ptr<Model> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Model& model);
std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path);

}  // namespace drn

#endif  // DRN_CHECKPOINT_HPP
