#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "eprcs/types.hpp"

namespace eprcs {

// EPRA array file: 32-byte header ("EPRA", u32 version, u32 rank, u32 dims[4],
// 4 zero bytes), then little-endian float64 values in row-major order.
struct Array {
  std::vector<std::size_t> dims;
  std::vector<double> data;

  std::size_t size() const;
};

inline constexpr std::uint32_t kArrayVersion = 1;

void write_array(std::ostream& os, std::span<const std::size_t> dims,
                 std::span<const double> data);
Array read_array(std::istream& is);

/// File wrappers; read_array throws MissingArtifact if the file is absent.
void write_array(const std::filesystem::path& path,
                 std::span<const std::size_t> dims, std::span<const double> data);
Array read_array(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const RealMatrix& m);
/// Throws ShapeMismatch unless the file holds a rank-2 array.
RealMatrix read_matrix(const std::filesystem::path& path);

}  // namespace eprcs
