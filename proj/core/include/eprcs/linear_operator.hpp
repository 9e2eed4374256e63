#pragma once

#include <cstddef>
#include <span>

namespace eprcs {

// Matrix-free real linear map used by the TV solver.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;

  /// out = A x; out.size() == rows().
  virtual void apply(std::span<const double> x, std::span<double> out) const = 0;
  /// out = A^T y; out.size() == cols().
  virtual void adjoint(std::span<const double> y,
                       std::span<double> out) const = 0;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(std::size_t size) : size_(size) {}

  std::size_t rows() const override { return size_; }
  std::size_t cols() const override { return size_; }
  void apply(std::span<const double> x, std::span<double> out) const override;
  void adjoint(std::span<const double> y, std::span<double> out) const override;

 private:
  std::size_t size_;
};

}  // namespace eprcs
