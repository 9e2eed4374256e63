#include "eprcs/entropy.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "eprcs/errors.hpp"

namespace eprcs {

namespace {

double plogp_sum(const double* data, Eigen::Index size) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) {
    const double p = data[i];
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

JointDistribution threshold_normalize(const RealMatrix& signal, double fraction,
                                      const GridSpec& grid, Domain domain) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("threshold fraction must lie in [0, 1)");
  }
  if (signal.size() == 0) throw AllZero("empty signal");
  if (!signal.allFinite()) throw std::invalid_argument("signal is not finite");
  const double peak = signal.maxCoeff();
  if (!(peak > 0.0)) throw AllZero("signal has no positive entries");
  const double cut = fraction * peak;
  RealMatrix kept = signal.unaryExpr(
      [cut](double v) { return v < cut || v < 0.0 ? 0.0 : v; });
  if (!(kept.sum() > 0.0)) throw AllZero("threshold removed every entry");
  return JointDistribution::from_weights(std::move(kept), grid, domain);
}

double shannon_entropy(const RealMatrix& p) {
  return plogp_sum(p.data(), p.size());
}

double marginal_entropy(const JointDistribution& joint, Particle particle) {
  const Eigen::VectorXd m = particle == Particle::signal
                                ? Eigen::VectorXd(joint.values.rowwise().sum())
                                : Eigen::VectorXd(joint.values.colwise().sum().transpose());
  return plogp_sum(m.data(), m.size());
}

double conditional_entropy(const JointDistribution& joint,
                           Particle conditioned_on) {
  const double h = shannon_entropy(joint.values) -
                   marginal_entropy(joint, conditioned_on);
  return std::max(h, 0.0);  // rounding can leave -1e-16 for perfect correlation
}

double mutual_information(const JointDistribution& joint) {
  const double i = marginal_entropy(joint, Particle::signal) +
                   marginal_entropy(joint, Particle::idler) -
                   shannon_entropy(joint.values);
  return std::max(i, 0.0);
}

double steering_bound(double dx, double dk, int dims) {
  if (!(dx > 0.0) || !(dk > 0.0)) {
    throw std::invalid_argument("pixel widths must be positive");
  }
  if (dims < 1) throw std::invalid_argument("dims must be positive");
  return dims * std::log2(std::numbers::pi * std::numbers::e / (dx * dk));
}

bool steering_bound_vacuous(double dx, double dk) {
  return dx * dk >= std::numbers::pi * std::numbers::e;
}

SteeringReport steering_witness(const JointDistribution& position,
                                const JointDistribution& momentum, int dims) {
  if (!(position.grid == momentum.grid)) {
    throw ShapeMismatch("position and momentum grids differ");
  }
  SteeringReport r;
  r.dims = dims;
  r.h_x_cond = conditional_entropy(position);
  r.h_k_cond = conditional_entropy(momentum);
  r.bound = steering_bound(position.grid.dx, position.grid.dk, dims);
  r.vacuous = steering_bound_vacuous(position.grid.dx, position.grid.dk);
  r.violation = r.bound - (r.h_x_cond + r.h_k_cond);
  r.entangled = r.violation > 0.0;
  return r;
}

void write_report(std::ostream& os, const SteeringReport& r,
                  const ReportProvenance& p) {
  os << "[steering]\n"
     << "run_id = " << p.run_id << "\n"
     << "measurements = " << p.measurements << "\n"
     << "flux = " << p.flux << "\n"
     << "threshold = " << p.threshold << "\n"
     << "dims = " << r.dims << "\n"
     << "h_x_cond_bits = " << r.h_x_cond << "\n"
     << "h_k_cond_bits = " << r.h_k_cond << "\n"
     << "bound_bits = " << r.bound << "\n"
     << "violation_bits = " << r.violation << "\n"
     << "entangled = " << (r.entangled ? "true" : "false") << "\n"
     << "vacuous_bound = " << (r.vacuous ? "true" : "false") << "\n";
}

double mse(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("mse: shapes differ");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace eprcs
