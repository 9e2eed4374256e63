#include "eprcs/grid_transform.hpp"

#include <cmath>
#include <numbers>

namespace eprcs {

GridTransform::GridTransform(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  const auto n = static_cast<long long>(grid_.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);
  forward_.resize(n, n);
  for (long long m = 0; m < n; ++m) {
    const long long a = m - n / 2;
    for (long long j = 0; j < n; ++j) {
      const long long b = j - n / 2;
      // k_m x_j split so the dominant a*b*dx*dk = 2 pi a b / n term is
      // reduced modulo n exactly.
      const long long ab = ((a * b) % n + n) % n;
      const double phase = two_pi_over_n * static_cast<double>(ab) +
                           static_cast<double>(a) * grid_.dk * grid_.x_offset +
                           static_cast<double>(b) * grid_.dx * grid_.k_offset +
                           grid_.k_offset * grid_.x_offset;
      forward_(m, j) = std::polar(scale, -phase);
    }
  }
  forward_transpose_ = forward_.transpose();
  inverse_ = forward_.adjoint();
  inverse_transpose_ = forward_.conjugate();
}

ComplexMatrix GridTransform::to_momentum(const ComplexMatrix& position) const {
  return forward_ * position * forward_transpose_;
}

ComplexMatrix GridTransform::to_position(const ComplexMatrix& momentum) const {
  return inverse_ * momentum * inverse_transpose_;
}

}  // namespace eprcs
