#pragma once

#include "eprcs/spdc_model.hpp"
#include "eprcs/types.hpp"

namespace eprcs {

// Unitary position <-> momentum map on a GridSpec: U(m, j) = exp(-i k_m x_j) /
// sqrt(n). Joint amplitudes transform one particle axis at a time.
class GridTransform {
 public:
  explicit GridTransform(const GridSpec& grid);

  ComplexMatrix to_momentum(const ComplexMatrix& position) const;
  ComplexMatrix to_position(const ComplexMatrix& momentum) const;

  const ComplexMatrix& matrix() const { return forward_; }
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  ComplexMatrix forward_;
  ComplexMatrix forward_transpose_;
  ComplexMatrix inverse_;            // U^H
  ComplexMatrix inverse_transpose_;  // conj(U)
};

}  // namespace eprcs
