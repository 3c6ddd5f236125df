#include "whitebait/params_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "whitebait/error.hpp"

namespace whitebait {

namespace {

static_assert(sizeof(double) == 8);

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw InputError("parameter file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_tensors(std::ostream& out, const std::vector<NamedTensor>& tensors) {
  out.write(kParamsMagic, sizeof(kParamsMagic));
  put_le<std::uint32_t>(out, kParamsVersion);
  put_le<std::uint64_t>(out, tensors.size());
  for (const auto& t : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rank()));
    for (auto d : t.value.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.value.values()) put_le<double>(out, v);
  }
}

std::vector<NamedTensor> read_tensors(std::istream& in) {
  char magic[sizeof(kParamsMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kParamsMagic, sizeof(magic)) != 0)
    throw InputError("not a parameter file (bad magic)");
  auto version = get_le<std::uint32_t>(in);
  if (version != kParamsVersion) throw InputError("unsupported parameter file version " + std::to_string(version));
  auto count = get_le<std::uint64_t>(in);
  std::vector<NamedTensor> out;
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor t;
    auto len = get_le<std::uint32_t>(in);
    if (len > (1u << 16)) throw InputError("parameter name too long");
    t.name.resize(len);
    if (!in.read(t.name.data(), len)) throw InputError("parameter file truncated");
    auto rank = get_le<std::uint32_t>(in);
    if (rank > 8) throw InputError("parameter rank too large");
    Shape shape(rank);
    for (auto& d : shape) d = get_le<std::uint64_t>(in);
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = get_le<double>(in);
    t.value = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(t));
  }
  return out;
}

void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_tensors(out, tensors);
  if (!out) throw InputError("write failed: " + path.string());
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_tensors(in);
}

}  // namespace whitebait
