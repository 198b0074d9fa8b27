#pragma once

#include <cstdint>
#include <string>
#include <vector>

// "DPUT" tensor container: the on-disk interchange format for segment
// stores, feature tensors and exported intensity maps.
//
//   magic "DPUT" | u32 version | u32 rank | u32 dims[rank]
//   | float32 payload (little-endian, last-dim fastest)
//   | u8 label per record (dims[0] bytes)
//
// Records are indexed by the first dimension; a standalone map is stored
// with a leading dimension of 1.

namespace dpu {

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;    // row-major over dims
  std::vector<std::uint8_t> labels;  // one per record, size = dims[0]

  std::size_t record_size() const;
  std::size_t n_records() const { return dims.empty() ? 0 : dims[0]; }
};

void save_tensor(const std::string& path, const Tensor& t);
Tensor load_tensor(const std::string& path);

}  // namespace dpu
