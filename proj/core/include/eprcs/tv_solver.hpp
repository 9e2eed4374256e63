#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "eprcs/linear_operator.hpp"

namespace eprcs {

/// Parameters of the TV-regularized least-squares solver.
///
/// The solver works on a normalized copy of the problem: the operator is
/// scaled to unit spectral norm and the data to unit max-norm, so `mu` and
/// `beta` are dimensionless and the same defaults serve every operator. The
/// returned signal is mapped back to the caller's units.
struct SolverConfig {
  double mu = 256.0;     // data-fidelity weight
  double beta = 0.0;     // gradient-splitting penalty; <= 0 selects beta = mu
  int max_outer_iterations = 300;
  int inner_iterations = 4;  // shrink/CG alternations per multiplier update
  int cg_iterations = 8;
  double relative_change_tolerance = 1e-5;
  bool nonnegativity = false;
  bool normalize = true;

  void validate() const;
  double penalty() const { return beta > 0.0 ? beta : mu; }
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;  // (mu/2)||y - Ax||^2 + TV(x), normalized units
  double residual = 0.0;   // ||y - Ax||_2, caller units
  double tv = 0.0;         // TV(x), caller units
  double relative_change = 0.0;
  // Augmented Lagrangian after each shrink and CG half-step of this outer
  // iteration (multipliers fixed).
  std::vector<double> lagrangian;
};

struct ReconstructionResult {
  std::vector<double> signal;  // row-major rows x cols
  std::size_t rows = 0;
  std::size_t cols = 0;
  double final_residual = 0.0;
  double final_tv = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// Anisotropic total variation: sum of |X_i - X_j| over horizontally and
/// vertically adjacent pairs, each pair once, no wraparound.
double tv(std::span<const double> signal, std::size_t rows, std::size_t cols);

/// Approximately minimizes (mu/2)||y - A x||^2 + TV(x) with an augmented-
/// Lagrangian alternating-direction method on the split w = grad x: soft
/// thresholding for w, a few CG steps for x, multiplier ascent per outer
/// iteration. Starts from A^T y / M. Throws SolverDiverged on non-finite
/// iterates and ShapeMismatch on inconsistent sizes. When `log` is set, one
/// line per outer iteration is written to it.
ReconstructionResult tv_min(std::span<const double> y, const LinearOperator& op,
                            std::size_t rows, std::size_t cols,
                            const SolverConfig& config,
                            std::ostream* log = nullptr);

/// tv_min with the identity operator and mu = weight.
std::vector<double> tv_denoise(std::span<const double> signal, std::size_t rows,
                               std::size_t cols, double weight,
                               SolverConfig config = {});

}  // namespace eprcs
