#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "eprcs/linear_operator.hpp"
#include "eprcs/rng.hpp"
#include "eprcs/types.hpp"

namespace eprcs {

/// Length-n vector over {+1, -1}.
class SigningVector {
 public:
  SigningVector() = default;
  /// Throws std::invalid_argument if any entry is not +1 or -1.
  explicit SigningVector(std::vector<std::int8_t> entries);

  std::size_t size() const { return entries_.size(); }
  std::int8_t operator[](std::size_t i) const { return entries_[i]; }
  std::span<const std::int8_t> entries() const { return entries_; }
  SigningVector negated() const;

  bool operator==(const SigningVector&) const = default;

 private:
  std::vector<std::int8_t> entries_;
};

/// Length-n transmit (1) / reject (0) pattern.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(std::vector<std::uint8_t> entries);
  static BinaryMask ones(std::size_t n);
  static BinaryMask zeros(std::size_t n);

  std::size_t size() const { return entries_.size(); }
  std::uint8_t operator[](std::size_t i) const { return entries_[i]; }
  std::span<const std::uint8_t> entries() const { return entries_; }
  std::size_t transmitted() const;
  BinaryMask complement() const;

  bool operator==(const BinaryMask&) const = default;

 private:
  std::vector<std::uint8_t> entries_;
};

/// Row r of the order-n Sylvester Hadamard matrix, H(r, c) = (-1)^popcount(r&c).
SigningVector hadamard_row(std::size_t n, std::size_t r);

/// Entry-wise (s + 1) / 2.
BinaryMask mask_from_signs(const SigningVector& s);

/// In-place unnormalized Walsh-Hadamard transform in Sylvester (natural)
/// order; data.size() must be a power of two.
void fwht(std::span<double> data);

/// Hadamard row indices used by one measurement: `first` for the signal
/// particle, `second` for the idler.
struct RowPair {
  std::uint32_t first = 0;
  std::uint32_t second = 0;
  bool operator==(const RowPair&) const = default;
};

/// How rows are drawn once all n^2 joint rows are used. `distinct` rejects
/// M > n^2; `cycle` appends fresh random passes over all n^2 pairs so that
/// repeated acquisitions of a row carry independent shot noise.
enum class RowPolicy { distinct, cycle };

/// Seeded measurement design: four independent permutations (per domain, per
/// particle) of the Hadamard columns and per-domain lists of row pairs.
/// Measurement 0 always uses the all-ones joint row (0, 0).
class SensingPlan {
 public:
  /// Validates and assembles a plan from explicit parts (used by the reader).
  SensingPlan(std::size_t n, std::uint64_t seed, RowPolicy policy,
              std::array<std::vector<std::uint32_t>, 4> permutations,
              std::array<std::vector<RowPair>, 2> rows);

  std::size_t n() const { return n_; }
  std::size_t measurements() const { return rows_[0].size(); }
  std::uint64_t seed() const { return seed_; }
  RowPolicy policy() const { return policy_; }

  const std::vector<std::uint32_t>& permutation(Domain d, Particle p) const;
  const std::vector<RowPair>& rows(Domain d) const;

  /// Local sensing vector a_i (momentum) or b_i (position) of one particle:
  /// entry j is H(row, perm[j]).
  SigningVector signing_vector(Domain d, Particle p, std::size_t i) const;

  /// Explicit joint row a_i (x) a_i' of length n^2 (test and small-n use).
  std::vector<double> joint_row(Domain d, std::size_t i) const;

  bool operator==(const SensingPlan&) const = default;

 private:
  static std::size_t slot(Domain d, Particle p);

  std::size_t n_;
  std::uint64_t seed_;
  RowPolicy policy_;
  std::array<std::vector<std::uint32_t>, 4> permutations_;
  std::array<std::vector<RowPair>, 2> rows_;
};

/// Deterministic in (n, M, seed, policy). Throws BadOrder, TooManyRows, or
/// std::invalid_argument("empty plan") for M == 0.
SensingPlan plan_sensing(std::size_t n, std::size_t measurements,
                         std::uint64_t seed,
                         RowPolicy policy = RowPolicy::distinct);

void write_plan(std::ostream& os, const SensingPlan& plan);
SensingPlan read_plan(std::istream& is);

/// Implicit Kronecker-Hadamard sensing matrix of one domain, optionally
/// restricted to a subset of measurement rows. Applies in O(n^2 log n + M).
class SensingOperator final : public LinearOperator {
 public:
  SensingOperator(const SensingPlan& plan, Domain domain);
  SensingOperator(const SensingPlan& plan, Domain domain,
                  std::span<const std::size_t> keep_rows);

  std::size_t rows() const override { return rows_.size(); }
  std::size_t cols() const override { return n_ * n_; }
  std::size_t n() const { return n_; }

  void apply(std::span<const double> x, std::span<double> out) const override;
  void adjoint(std::span<const double> y, std::span<double> out) const override;

 private:
  std::size_t n_;
  std::vector<std::uint32_t> perm_signal_;
  std::vector<std::uint32_t> perm_idler_;
  std::vector<RowPair> rows_;
};

/// ShapeMismatch unless signal.size() == n^2.
std::vector<double> apply_sensing(const SensingPlan& plan, Domain domain,
                                  std::span<const double> signal);
/// ShapeMismatch unless y.size() == M.
std::vector<double> apply_adjoint(const SensingPlan& plan, Domain domain,
                                  std::span<const double> y);

struct SpectrumRatios {
  double peak_ratio = 0.0;     // |f(0)|^2 / (n/2)^2
  double offpeak_ratio = 0.0;  // mean_{p != 0} |f(p)|^2 / |f(0)|^2
};

/// Power spectrum of one mask sampled at oversample*n frequencies across one
/// period of its Fourier transform (oversample = 1 is the plain DFT).
SpectrumRatios spectrum_ratios(const BinaryMask& mask,
                               std::size_t oversample = 1);

struct SpectrumCheck {
  double peak_ratio_mean = 0.0;
  double offpeak_ratio_mean = 0.0;
};

/// Ensemble means of spectrum_ratios over `trials` masks whose pixels
/// transmit independently with probability 1/2. The random-mask model
/// predicts an off-peak ratio of 2/n for the continuous transform.
SpectrumCheck spectrum_model_check(std::size_t n, std::size_t trials, Rng& rng,
                                   std::size_t oversample = 1);

}  // namespace eprcs
