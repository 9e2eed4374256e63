#include "eprcs/photon_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "eprcs/errors.hpp"

namespace eprcs {

namespace {

Eigen::VectorXd port_weights(const BinaryMask& mask, Port port) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double t = mask[i];
    v[static_cast<Eigen::Index>(i)] = port == Port::transmit ? t : 1.0 - t;
  }
  return v;
}

void check_mask(const BinaryMask& m, std::size_t n) {
  if (m.size() != n) throw ShapeMismatch("mask length does not match grid");
}

}  // namespace

FilterSet filter_set(const SensingPlan& plan, std::size_t i) {
  return {
      mask_from_signs(plan.signing_vector(Domain::momentum, Particle::signal, i)),
      mask_from_signs(plan.signing_vector(Domain::momentum, Particle::idler, i)),
      mask_from_signs(plan.signing_vector(Domain::position, Particle::signal, i)),
      mask_from_signs(plan.signing_vector(Domain::position, Particle::idler, i)),
  };
}

double PortProbabilities::total() const {
  double s = 0.0;
  for (const auto& row : p) {
    for (double v : row) s += v;
  }
  return s;
}

std::uint64_t CoincidenceRecord::total() const {
  std::uint64_t s = 0;
  for (const auto& row : counts) {
    for (auto v : row) s += v;
  }
  return s;
}

PhotonSimulator::PhotonSimulator(const BiphotonAmplitude& state)
    : transform_(state.grid),
      momentum_(transform_.to_momentum(state.values)),
      norm_(state.values.cwiseAbs2().sum()) {
  if (!(norm_ > 0.0)) throw AllZero("state has zero norm");
}

ComplexMatrix PhotonSimulator::filtered_position(const Eigen::VectorXd& f,
                                                 const Eigen::VectorXd& g) const {
  ComplexMatrix filtered =
      momentum_.array() * (f * g.transpose()).cast<Complex>().array();
  return transform_.to_position(filtered);
}

PortProbabilities PhotonSimulator::port_probabilities(const FilterSet& fs) const {
  const std::size_t n = this->n();
  check_mask(fs.momentum_signal, n);
  check_mask(fs.momentum_idler, n);
  check_mask(fs.position_signal, n);
  check_mask(fs.position_idler, n);

  std::array<Eigen::VectorXd, 2> f = {
      port_weights(fs.momentum_signal, Port::transmit),
      port_weights(fs.momentum_signal, Port::reject)};
  std::array<Eigen::VectorXd, 2> g = {
      port_weights(fs.momentum_idler, Port::transmit),
      port_weights(fs.momentum_idler, Port::reject)};
  std::array<Eigen::VectorXd, 2> b1 = {
      port_weights(fs.position_signal, Port::transmit),
      port_weights(fs.position_signal, Port::reject)};
  std::array<Eigen::VectorXd, 2> b2 = {
      port_weights(fs.position_idler, Port::transmit),
      port_weights(fs.position_idler, Port::reject)};

  PortProbabilities out;
  for (std::size_t mc = 0; mc < 4; ++mc) {
    const auto ms = static_cast<std::size_t>(combo_signal(mc));
    const auto mi = static_cast<std::size_t>(combo_idler(mc));
    const RealMatrix intensity = filtered_position(f[ms], g[mi]).cwiseAbs2();
    for (std::size_t pi = 0; pi < 2; ++pi) {
      const Eigen::VectorXd projected = intensity * b2[pi];
      for (std::size_t ps = 0; ps < 2; ++ps) {
        out.p[combo_index(static_cast<Port>(ps), static_cast<Port>(pi))][mc] =
            b1[ps].dot(projected) / norm_;
      }
    }
  }
  return out;
}

JointDistribution PhotonSimulator::perturbed_position_distribution(
    const BinaryMask& f, const BinaryMask& g) const {
  check_mask(f, n());
  check_mask(g, n());
  return JointDistribution::from_weights(
      filtered_position(port_weights(f, Port::transmit),
                        port_weights(g, Port::transmit))
          .cwiseAbs2(),
      grid(), Domain::position);
}

PortProbabilities port_probabilities(const BiphotonAmplitude& state,
                                     const FilterSet& fs) {
  return PhotonSimulator(state).port_probabilities(fs);
}

JointDistribution perturbed_position_distribution(const BiphotonAmplitude& state,
                                                  const BinaryMask& f,
                                                  const BinaryMask& g) {
  return PhotonSimulator(state).perturbed_position_distribution(f, g);
}

CoincidenceRecord sample_counts(const PortProbabilities& p, double mean_flux,
                                Rng& rng, const DetectorModel& detector) {
  if (!(mean_flux >= 0.0) || !std::isfinite(mean_flux)) {
    throw std::invalid_argument("mean flux must be finite and nonnegative");
  }
  CoincidenceRecord rec;
  rec.mean_flux = mean_flux;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double mean =
          mean_flux * detector.pair_efficiency * std::max(p.p[r][c], 0.0) +
          detector.dark_coincidences;
      if (mean > 0.0) {
        std::poisson_distribution<std::uint64_t> draw(mean);
        rec.counts[r][c] = draw(rng);
      }
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Correlation-width fit

namespace {

// Weighted least squares for y ~ sum_k c_k u^k, k < degree + 1.
Eigen::VectorXd polyfit(const std::vector<double>& u, const std::vector<double>& y,
                        const std::vector<double>& w, int degree) {
  const auto m = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd a(m, degree + 1);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      a(i, k) = sw * p;
      p *= u[static_cast<std::size_t>(i)];
    }
    b[i] = sw * y[static_cast<std::size_t>(i)];
  }
  return a.colPivHouseholderQr().solve(b);
}

double polyval(const Eigen::VectorXd& c, double u) {
  double v = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) v = v * u + c[k];
  return v;
}

// Gaussian std of positive samples via iteratively reweighted log-parabola.
double gaussian_sigma(const std::vector<double>& u, const std::vector<double>& r) {
  std::vector<double> uu;
  std::vector<double> ly;
  std::vector<double> w;
  const double peak = *std::max_element(r.begin(), r.end());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (r[i] > 0.02 * peak) {
      uu.push_back(u[i]);
      ly.push_back(std::log(r[i]));
      w.push_back(r[i] * r[i]);
    }
  }
  if (uu.size() < 4) return std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd c;
  for (int pass = 0; pass < 4; ++pass) {
    c = polyfit(uu, ly, w, 2);
    if (!(c[2] < 0.0)) return std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < uu.size(); ++i) {
      const double model = std::exp(polyval(c, uu[i]));
      w[i] = model * model;
    }
  }
  return std::sqrt(-1.0 / (2.0 * c[2]));
}

}  // namespace

double fit_correlation_width(const RealMatrix& joint, double dx,
                             double expected_sigma) {
  const auto n = static_cast<long>(joint.rows());
  if (joint.cols() != joint.rows()) throw ShapeMismatch("joint must be square");
  if (!(dx > 0.0) || !(expected_sigma > 0.0)) {
    throw std::invalid_argument("dx and expected_sigma must be positive");
  }
  const double w = expected_sigma / dx;  // in units of u = i - j
  const double core = std::max(3.0 * w, 2.0);
  const double flank = std::max(7.0 * w, core + 4.0);

  double weighted = 0.0;
  double weight = 0.0;
  for (long s = n / 2; s <= 3 * n / 2 - 2; ++s) {
    std::vector<double> us;
    std::vector<double> vs;
    for (long i = std::max(0L, s - n + 1); i <= std::min(n - 1, s); ++i) {
      us.push_back(static_cast<double>(2 * i - s));
      vs.push_back(joint(i, s - i));
    }
    const auto peak_at = static_cast<std::size_t>(
        std::max_element(vs.begin(), vs.end()) - vs.begin());
    const double c = us[peak_at];

    std::vector<double> cu, cv, fu, fv;
    for (std::size_t k = 0; k < us.size(); ++k) {
      const double d = std::abs(us[k] - c);
      if (d <= core) {
        cu.push_back(us[k] - c);
        cv.push_back(vs[k]);
      } else if (d <= flank) {
        fu.push_back(us[k] - c);
        fv.push_back(vs[k]);
      }
    }
    if (cu.size() < 4 || fu.size() < 3) continue;
    const std::vector<double> ones(fu.size(), 1.0);
    const Eigen::VectorXd base =
        polyfit(fu, fv, ones, fu.size() >= 6 ? 2 : 1);
    std::vector<double> resid(cu.size());
    double mass = 0.0;
    for (std::size_t k = 0; k < cu.size(); ++k) {
      resid[k] = cv[k] - polyval(base, cu[k]);
      mass += std::max(resid[k], 0.0);
    }
    const double sigma = gaussian_sigma(cu, resid);
    if (!std::isfinite(sigma) || !(mass > 0.0)) continue;
    weighted += mass * sigma;
    weight += mass;
  }
  if (!(weight > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return weighted / weight * dx;
}

}  // namespace eprcs
