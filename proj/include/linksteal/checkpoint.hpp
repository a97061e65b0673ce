#pragma once

#include <filesystem>
#include <iosfwd>

#include "linksteal/gnn.hpp"

namespace linksteal {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layout (all integers and floats little-endian):
//   "LSGNNCK1"                       8-byte magic
//   u32 arch, u32 layer count (2), u64 num_classes, f64 dropout
//   per layer: u32 kind, u64 in_dim, u64 out_dim, u64 heads, u32 tensor count,
//              then (u64 rows, u64 cols) per tensor
//   payload: every tensor's float64 values, row-major, in header order
void save_checkpoint(std::ostream& out, const TrainedGnn& model);
TrainedGnn load_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const TrainedGnn& model);
TrainedGnn load_checkpoint(const std::filesystem::path& path);

}  // namespace linksteal
