#include "eprcs/array_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "eprcs/errors.hpp"

namespace eprcs {

namespace {

constexpr char kMagic[4] = {'E', 'P', 'R', 'A'};
constexpr std::size_t kMaxRank = 4;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("array file truncated in header");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

}  // namespace

std::size_t Array::size() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

void write_array(std::ostream& os, std::span<const std::size_t> dims,
                 std::span<const double> data) {
  if (dims.empty() || dims.size() > kMaxRank) {
    throw std::invalid_argument("array rank must be 1..4");
  }
  const std::size_t count = std::accumulate(dims.begin(), dims.end(),
                                            std::size_t{1}, std::multiplies<>());
  if (count != data.size()) throw ShapeMismatch("array dims do not match data");
  os.write(kMagic, 4);
  put_u32(os, kArrayVersion);
  put_u32(os, static_cast<std::uint32_t>(dims.size()));
  for (std::size_t i = 0; i < kMaxRank; ++i) {
    put_u32(os, i < dims.size() ? static_cast<std::uint32_t>(dims[i]) : 0u);
  }
  put_u32(os, 0);  // reserved
  for (double d : data) put_f64(os, d);
  if (!os) throw std::runtime_error("array write failed");
}

Array read_array(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not an EPRA array file");
  }
  const std::uint32_t version = get_u32(is);
  if (version != kArrayVersion) {
    throw std::runtime_error("unsupported EPRA version " + std::to_string(version));
  }
  const std::uint32_t rank = get_u32(is);
  if (rank == 0 || rank > kMaxRank) throw std::runtime_error("bad EPRA rank");
  Array a;
  for (std::size_t i = 0; i < kMaxRank; ++i) {
    const std::uint32_t d = get_u32(is);
    if (i < rank) a.dims.push_back(d);
  }
  get_u32(is);
  a.data.resize(a.size());
  std::vector<unsigned char> raw(a.data.size() * 8);
  if (!is.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size()))) {
    throw std::runtime_error("array file truncated in data");
  }
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(raw[8 * k + i]) << (8 * i);
    }
    a.data[k] = std::bit_cast<double>(bits);
  }
  return a;
}

void write_array(const std::filesystem::path& path,
                 std::span<const std::size_t> dims, std::span<const double> data) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_array(os, dims, data);
}

Array read_array(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingArtifact(path.string());
  return read_array(is);
}

void write_matrix(const std::filesystem::path& path, const RealMatrix& m) {
  const std::array<std::size_t, 2> dims = {static_cast<std::size_t>(m.rows()),
                                           static_cast<std::size_t>(m.cols())};
  write_array(path, dims, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

RealMatrix read_matrix(const std::filesystem::path& path) {
  const Array a = read_array(path);
  if (a.dims.size() != 2) throw ShapeMismatch(path.string() + " is not a matrix");
  RealMatrix m(static_cast<Eigen::Index>(a.dims[0]),
               static_cast<Eigen::Index>(a.dims[1]));
  std::copy(a.data.begin(), a.data.end(), m.data());
  return m;
}

}  // namespace eprcs
