#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "kstt/optim.hpp"

// Binary parameter checkpoints.
//
// Layout, all integers and floats little-endian:
//   "KSTT"                      4 magic bytes
//   u32 version                 currently 1
//   repeated until end of file:
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, u64 extent[rank]
//     f64 value[product(extents)]
namespace kstt {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params);
// Overwrites the values of every registered parameter. Names and shapes
// must match the file exactly.
void load_checkpoint(const std::filesystem::path& path, ParamStore& params);

}  // namespace kstt
