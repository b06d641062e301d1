#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "uaplab/numcore/network.hpp"

namespace uaplab::num {

// Network checkpoint layout (little-endian):
//   "UAPLNET1"  magic (8 bytes)
//   u32         format version (kNetworkFormatVersion)
//   u32         layer count
//   u32 rank, u64 dims[rank]   input shape
//   per layer:  u8 kind tag (LayerKind), then
//     affine:   tensor weight, tensor bias
//     conv:     u64 stride, tensor weight, tensor bias
//     relu/flatten: nothing
//   tensor = u32 rank, u64 dims[rank], f64 values (row-major)
inline constexpr std::uint32_t kNetworkFormatVersion = 1;

void write_network(std::ostream& out, const Network& net);
Network read_network(std::istream& in);

void save_network(const std::filesystem::path& path, const Network& net);
Network load_network(const std::filesystem::path& path);

}  // namespace uaplab::num
