#include "eprcs/tv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "eprcs/errors.hpp"

namespace eprcs {

void IdentityOperator::apply(std::span<const double> x,
                             std::span<double> out) const {
  if (x.size() != size_ || out.size() != size_) {
    throw ShapeMismatch("identity apply: shape mismatch");
  }
  std::copy(x.begin(), x.end(), out.begin());
}

void IdentityOperator::adjoint(std::span<const double> y,
                               std::span<double> out) const {
  apply(y, out);
}

void SolverConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("solver mu must be positive");
  }
  if (!std::isfinite(beta)) throw std::invalid_argument("solver beta must be finite");
  if (!(relative_change_tolerance > 0.0)) {
    throw std::invalid_argument("solver tolerance must be positive");
  }
  if (max_outer_iterations < 1 || inner_iterations < 1 || cg_iterations < 1) {
    throw std::invalid_argument("solver iteration counts must be positive");
  }
}

double tv(std::span<const double> signal, std::size_t rows, std::size_t cols) {
  if (signal.size() != rows * cols) {
    throw ShapeMismatch("tv: signal length does not match shape");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = signal[i * cols + j];
      if (j + 1 < cols) total += std::abs(signal[i * cols + j + 1] - v);
      if (i + 1 < rows) total += std::abs(signal[(i + 1) * cols + j] - v);
    }
  }
  return total;
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// Forward differences with a zero last column / row.
struct Gradient {
  std::size_t rows;
  std::size_t cols;

  void forward(const Vec& x, Vec& gh, Vec& gv) const {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t k = i * cols + j;
        gh[k] = j + 1 < cols ? x[k + 1] - x[k] : 0.0;
        gv[k] = i + 1 < rows ? x[k + cols] - x[k] : 0.0;
      }
    }
  }

  // out = Dh^T ph + Dv^T pv
  void adjoint(const Vec& ph, const Vec& pv, Vec& out) const {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t k = i * cols + j;
        double v = 0.0;
        if (j + 1 < cols) v -= ph[k];
        if (j > 0) v += ph[k - 1];
        if (i + 1 < rows) v -= pv[k];
        if (i > 0) v += pv[k - cols];
        out[k] = v;
      }
    }
  }
};

class ScaledProblem {
 public:
  ScaledProblem(const LinearOperator& op, double scale)
      : op_(op), inv_scale_(1.0 / scale), tmp_(op.rows()) {}

  void apply(const Vec& x, Vec& out) const {
    op_.apply(x, out);
    for (auto& v : out) v *= inv_scale_;
  }
  void adjoint(const Vec& y, Vec& out) const {
    op_.adjoint(y, out);
    for (auto& v : out) v *= inv_scale_;
  }
  // out = A^T A x (scaled)
  void normal(const Vec& x, Vec& out) const {
    apply(x, tmp_);
    adjoint(tmp_, out);
  }

 private:
  const LinearOperator& op_;
  double inv_scale_;
  mutable Vec tmp_;
};

// Largest singular value by power iteration on A^T A from a fixed start.
double spectral_norm(const LinearOperator& op) {
  const std::size_t n = op.cols();
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(i) + 0.1);
  }
  Vec av(op.rows());
  Vec atav(n);
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double nv = norm(v);
    if (!(nv > 0.0)) return 1.0;
    for (auto& e : v) e /= nv;
    op.apply(v, av);
    op.adjoint(av, atav);
    const double next = dot(v, atav);
    v.swap(atav);
    if (std::abs(next - lambda) <= 1e-10 * std::max(next, 1e-300)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda > 0.0 ? std::sqrt(lambda) : 1.0;
}

void require_finite(double v, const SolverConfig& cfg, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "solver diverged: non-finite " << what << " (mu=" << cfg.mu
       << ", beta=" << cfg.penalty() << ")";
    throw SolverDiverged(os.str());
  }
}

}  // namespace

ReconstructionResult tv_min(std::span<const double> y_in, const LinearOperator& op,
                            std::size_t rows, std::size_t cols,
                            const SolverConfig& config, std::ostream* log) {
  config.validate();
  const std::size_t n = rows * cols;
  const std::size_t m = op.rows();
  if (op.cols() != n) throw ShapeMismatch("operator columns != rows*cols");
  if (y_in.size() != m) throw ShapeMismatch("measurement length != operator rows");
  if (m == 0) throw std::invalid_argument("no measurements");
  for (double v : y_in) require_finite(v, config, "measurement");

  const Vec y(y_in.begin(), y_in.end());
  double y_max = 0.0;
  for (double v : y) y_max = std::max(y_max, std::abs(v));

  // x_hat = kappa x solves (A/s) x_hat ~ y / y_max.
  const double s = config.normalize ? spectral_norm(op) : 1.0;
  const double kappa = (config.normalize && y_max > 0.0) ? s / y_max : 1.0;
  const double y_scale = config.normalize && y_max > 0.0 ? 1.0 / y_max : 1.0;
  const ScaledProblem a(op, s);
  Vec yh(m);
  for (std::size_t i = 0; i < m; ++i) yh[i] = y[i] * y_scale;

  const double mu = config.mu;
  const double beta = config.penalty();
  const Gradient grad{rows, cols};

  Vec x(n);
  op.adjoint(y, x);
  for (auto& v : x) v *= kappa / static_cast<double>(m);

  Vec gh(n), gv(n), wh(n, 0.0), wv(n, 0.0), nh(n, 0.0), nv(n, 0.0);
  Vec rhs(n), aty(n), r(n), p(n), q(n), tmp(n), th(n), tv_(n), ax(m);
  a.adjoint(yh, aty);

  auto shrink = [](double v, double t) {
    return v > t ? v - t : (v < -t ? v + t : 0.0);
  };

  // Q v = beta D^T D v + mu A^T A v
  auto apply_q = [&](const Vec& v, Vec& out) {
    grad.forward(v, th, tv_);
    grad.adjoint(th, tv_, out);
    a.normal(v, tmp);
    for (std::size_t k = 0; k < n; ++k) out[k] = beta * out[k] + mu * tmp[k];
  };

  auto lagrangian = [&]() {
    grad.forward(x, gh, gv);
    a.apply(x, ax);
    double l = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dh = gh[k] - wh[k];
      const double dv = gv[k] - wv[k];
      l += std::abs(wh[k]) + std::abs(wv[k]) - nh[k] * dh - nv[k] * dv +
           0.5 * beta * (dh * dh + dv * dv);
    }
    double fit = 0.0;
    for (std::size_t i = 0; i < m; ++i) fit += (ax[i] - yh[i]) * (ax[i] - yh[i]);
    return l + 0.5 * mu * fit;
  };

  ReconstructionResult result;
  result.rows = rows;
  result.cols = cols;

  Vec x_prev = x;
  Vec signal(n);
  for (int outer = 1; outer <= config.max_outer_iterations; ++outer) {
    IterationRecord rec;
    rec.iteration = outer;
    for (int inner = 0; inner < config.inner_iterations; ++inner) {
      // w-step
      grad.forward(x, gh, gv);
      for (std::size_t k = 0; k < n; ++k) {
        wh[k] = shrink(gh[k] - nh[k] / beta, 1.0 / beta);
        wv[k] = shrink(gv[k] - nv[k] / beta, 1.0 / beta);
      }
      rec.lagrangian.push_back(lagrangian());

      // x-step: CG on Q x = D^T(beta w + nu) + mu A^T y, warm started.
      for (std::size_t k = 0; k < n; ++k) {
        th[k] = beta * wh[k] + nh[k];
        tv_[k] = beta * wv[k] + nv[k];
      }
      grad.adjoint(th, tv_, rhs);
      for (std::size_t k = 0; k < n; ++k) rhs[k] += mu * aty[k];
      apply_q(x, q);
      for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - q[k];
      p = r;
      double rr = dot(r, r);
      const double stop = 1e-28 * std::max(dot(rhs, rhs), 1e-300);
      for (int it = 0; it < config.cg_iterations && rr > stop; ++it) {
        apply_q(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) break;
        const double alpha = rr / pq;
        for (std::size_t k = 0; k < n; ++k) {
          x[k] += alpha * p[k];
          r[k] -= alpha * q[k];
        }
        const double rr_next = dot(r, r);
        const double ratio = rr_next / rr;
        rr = rr_next;
        for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + ratio * p[k];
      }
      if (config.nonnegativity) {
        for (auto& v : x) v = std::max(v, 0.0);
      }
      rec.lagrangian.push_back(lagrangian());
      require_finite(rec.lagrangian.back(), config, "augmented Lagrangian");
    }

    // Multiplier ascent.
    grad.forward(x, gh, gv);
    for (std::size_t k = 0; k < n; ++k) {
      nh[k] -= beta * (gh[k] - wh[k]);
      nv[k] -= beta * (gv[k] - wv[k]);
    }

    Vec diff(n);
    for (std::size_t k = 0; k < n; ++k) diff[k] = x[k] - x_prev[k];
    const double prev_norm = norm(x_prev);
    const double change = norm(diff);
    rec.relative_change =
        prev_norm > 0.0 ? change / prev_norm : (change > 0.0 ? 1.0 : 0.0);
    x_prev = x;

    for (std::size_t k = 0; k < n; ++k) signal[k] = x[k] / kappa;
    a.apply(x, ax);
    double fit = 0.0;
    for (std::size_t i = 0; i < m; ++i) fit += (ax[i] - yh[i]) * (ax[i] - yh[i]);
    rec.tv = tv(signal, rows, cols);
    rec.objective = 0.5 * mu * fit + rec.tv * kappa;
    Vec as(m);
    op.apply(signal, as);
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) res += (y[i] - as[i]) * (y[i] - as[i]);
    rec.residual = std::sqrt(res);
    require_finite(rec.objective, config, "objective");

    if (log) {
      *log << "iter=" << outer << " objective=" << rec.objective
           << " residual=" << rec.residual << " tv=" << rec.tv
           << " rel_change=" << rec.relative_change << "\n";
    }
    result.iterations = outer;
    result.final_residual = rec.residual;
    result.final_tv = rec.tv;
    const bool done = rec.relative_change < config.relative_change_tolerance;
    result.history.push_back(std::move(rec));
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.signal = std::move(signal);
  return result;
}

std::vector<double> tv_denoise(std::span<const double> signal, std::size_t rows,
                               std::size_t cols, double weight,
                               SolverConfig config) {
  config.mu = weight;
  const IdentityOperator id(rows * cols);
  return tv_min(signal, id, rows, cols, config).signal;
}

}  // namespace eprcs
