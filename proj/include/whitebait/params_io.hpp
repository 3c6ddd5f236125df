#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "whitebait/tensor.hpp"

namespace whitebait {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Binary layout, all integers little-endian:
//   magic "WBPARAMS" (8 bytes), u32 version (=1), u64 count
//   per tensor: u32 name length, name bytes, u32 rank, u64 dims[rank],
//               f64 data[product(dims)] (IEEE-754, little-endian)
inline constexpr char kParamsMagic[8] = {'W', 'B', 'P', 'A', 'R', 'A', 'M', 'S'};
inline constexpr std::uint32_t kParamsVersion = 1;

void write_tensors(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensors(std::istream& in);

void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

}  // namespace whitebait
