#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace eprcs {

using Complex = std::complex<double>;

// Joint arrays are indexed (particle-1 pixel, particle-2 pixel). Row-major
// storage makes the flat index i*n + j match the Kronecker order a1 (x) a2.
using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Domain { position, momentum };
enum class Particle { signal = 0, idler = 1 };

constexpr std::string_view to_string(Domain d) {
  return d == Domain::position ? "position" : "momentum";
}

constexpr bool is_power_of_two(std::size_t n) {
  return n > 0 && (n & (n - 1)) == 0;
}

}  // namespace eprcs
