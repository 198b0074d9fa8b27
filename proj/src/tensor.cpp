#include "dpu/tensor.hpp"

#include <fstream>
#include <stdexcept>

#include "dpu/binio.hpp"

namespace dpu {

namespace {
constexpr char kMagic[4] = {'D', 'P', 'U', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::size_t Tensor::record_size() const {
  if (dims.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t i = 1; i < dims.size(); ++i) n *= dims[i];
  return n;
}

void save_tensor(const std::string& path, const Tensor& t) {
  if (t.dims.empty()) throw std::invalid_argument("save_tensor: rank 0");
  std::size_t total = 1;
  for (auto d : t.dims) total *= d;
  if (t.data.size() != total)
    throw std::invalid_argument("save_tensor: payload size does not match dims");
  if (t.labels.size() != t.dims[0])
    throw std::invalid_argument("save_tensor: need one label per record");

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_tensor: cannot open " + path);
  binio::write_magic(os, kMagic);
  binio::write_le<std::uint32_t>(os, kVersion);
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) binio::write_le<std::uint32_t>(os, d);
  for (float v : t.data) binio::write_le<float>(os, v);
  for (auto b : t.labels) binio::write_le<std::uint8_t>(os, b);
  if (!os) throw std::runtime_error("save_tensor: write failed for " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_tensor: cannot open " + path);
  binio::expect_magic(is, kMagic, "load_tensor");
  const auto version = binio::read_le<std::uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error("load_tensor: unsupported version " + std::to_string(version));
  const auto rank = binio::read_le<std::uint32_t>(is);
  if (rank == 0 || rank > 8) throw std::runtime_error("load_tensor: bad rank");

  Tensor t;
  t.dims.resize(rank);
  std::size_t total = 1;
  for (auto& d : t.dims) {
    d = binio::read_le<std::uint32_t>(is);
    total *= d;
  }
  t.data.resize(total);
  for (auto& v : t.data) v = binio::read_le<float>(is);
  t.labels.resize(t.dims[0]);
  for (auto& b : t.labels) b = binio::read_le<std::uint8_t>(is);
  return t;
}

}  // namespace dpu
