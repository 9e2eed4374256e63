#include <doctest.h>

#include <cmath>

#include "eprcs/grid_transform.hpp"
#include "eprcs/photon_sim.hpp"
#include "test_support.hpp"

using namespace eprcs;

namespace {

FilterSet uniform_filters(std::size_t n, bool momentum_open, bool position_open) {
  const BinaryMask km = momentum_open ? BinaryMask::ones(n) : BinaryMask::zeros(n);
  const BinaryMask xm = position_open ? BinaryMask::ones(n) : BinaryMask::zeros(n);
  return {km, km, xm, xm};
}

Eigen::VectorXd port_vector(const BinaryMask& m, Port port) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = port == Port::transmit ? m[i] : 1.0 - m[i];
  return v;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// Density-matrix oracle: Kraus operator (U^H (x) U^H) diag(f (x) g) (U (x) U)
// per momentum combo, then position projectors on the diagonal.
PortProbabilities oracle_ports(const Eigen::MatrixXcd& rho, const GridSpec& grid,
                               const FilterSet& fs) {
  const GridTransform t(grid);
  const Eigen::MatrixXcd u = t.matrix();
  const Eigen::MatrixXcd uu = kron(u, u);
  PortProbabilities out;
  const double trace = rho.trace().real();
  for (std::size_t mc = 0; mc < 4; ++mc) {
    const Eigen::VectorXd f = port_vector(fs.momentum_signal, combo_signal(mc));
    const Eigen::VectorXd g = port_vector(fs.momentum_idler, combo_idler(mc));
    Eigen::VectorXd fg(f.size() * g.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
      for (Eigen::Index j = 0; j < g.size(); ++j) fg[i * g.size() + j] = f[i] * g[j];
    const Eigen::MatrixXcd k = uu.adjoint() * fg.cast<Complex>().asDiagonal() * uu;
    const Eigen::MatrixXcd after = k * rho * k.adjoint();
    for (std::size_t xc = 0; xc < 4; ++xc) {
      const Eigen::VectorXd b1 = port_vector(fs.position_signal, combo_signal(xc));
      const Eigen::VectorXd b2 = port_vector(fs.position_idler, combo_idler(xc));
      double p = 0.0;
      for (Eigen::Index i = 0; i < b1.size(); ++i)
        for (Eigen::Index j = 0; j < b2.size(); ++j) {
          const Eigen::Index a = i * b2.size() + j;
          p += b1[i] * b2[j] * after(a, a).real();
        }
      out.p[xc][mc] = p / trace;
    }
  }
  return out;
}

Eigen::VectorXcd flatten(const ComplexMatrix& m) {
  Eigen::VectorXcd v(m.size());
  for (Eigen::Index k = 0; k < m.size(); ++k) v[k] = m.data()[k];
  return v;
}

BinaryMask random_mask(std::size_t n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> e(n);
  for (auto& v : e) v = coin(rng);
  return BinaryMask(e);
}

}  // namespace

TEST_CASE("port probabilities of trivial filters") {
  const SpdcParams p{1.0, 4e-4, 0.03};
  const BiphotonAmplitude s = build_state(p, balanced_grid(p, 16));
  const PortProbabilities open = port_probabilities(s, uniform_filters(16, true, true));
  CHECK(open.p[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(open.total() == doctest::Approx(1.0).epsilon(1e-12));

  const PortProbabilities closed = port_probabilities(s, uniform_filters(16, false, true));
  double rr = 0.0;
  for (std::size_t x = 0; x < 4; ++x) rr += closed.p[x][3];
  CHECK(rr == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("probability conservation over random filter sets") {
  const SpdcParams p{1.0, 4e-4, 0.05};
  const BiphotonAmplitude s = build_state(p, balanced_grid(p, 64));
  const PhotonSimulator sim(s);
  const SensingPlan plan = plan_sensing(64, 100, 31);
  for (std::size_t i = 0; i < 100; ++i) {
    const PortProbabilities pp = sim.port_probabilities(filter_set(plan, i));
    CHECK(std::abs(pp.total() - 1.0) <= 1e-10);
    for (const auto& row : pp.p)
      for (double v : row) CHECK(v >= -1e-15);
  }
}

TEST_CASE("port probabilities match the density-matrix oracle, mixtures included") {
  const std::size_t n = 4;
  const GridSpec grid = fft_grid(n, 0.3, 0.05, -0.2);
  std::mt19937_64 rng(41);
  auto random_state = [&] {
    ComplexMatrix psi(4, 4);
    std::normal_distribution<double> g;
    for (Eigen::Index k = 0; k < psi.size(); ++k) psi.data()[k] = Complex(g(rng), g(rng));
    psi /= std::sqrt(psi.cwiseAbs2().sum());
    return BiphotonAmplitude{psi / grid.dx, grid};
  };
  const BiphotonAmplitude s1 = random_state();
  const BiphotonAmplitude s2 = random_state();
  const Eigen::VectorXcd v1 = flatten(s1.values);
  const Eigen::VectorXcd v2 = flatten(s2.values);
  const double alpha = 0.3;
  const Eigen::MatrixXcd rho1 = v1 * v1.adjoint() / v1.squaredNorm();
  const Eigen::MatrixXcd rho2 = v2 * v2.adjoint() / v2.squaredNorm();
  const Eigen::MatrixXcd mix = alpha * rho1 + (1 - alpha) * rho2;

  Rng mask_rng(9);
  for (int t = 0; t < 20; ++t) {
    const FilterSet fs{random_mask(n, mask_rng), random_mask(n, mask_rng),
                       random_mask(n, mask_rng), random_mask(n, mask_rng)};
    const PortProbabilities p1 = port_probabilities(s1, fs);
    const PortProbabilities p2 = port_probabilities(s2, fs);
    const PortProbabilities o1 = oracle_ports(rho1, grid, fs);
    const PortProbabilities om = oracle_ports(mix, grid, fs);
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(p1.p[x][k] == doctest::Approx(o1.p[x][k]).epsilon(1e-12));
        CHECK(alpha * p1.p[x][k] + (1 - alpha) * p2.p[x][k] ==
              doctest::Approx(om.p[x][k]).epsilon(1e-12));
      }
  }
}

TEST_CASE("perturbed position distribution with open masks is the exact joint") {
  const SpdcParams p{1.0, 4e-4, 0.05};
  const BiphotonAmplitude s = build_state(p, balanced_grid(p, 32));
  const JointDistribution d =
      perturbed_position_distribution(s, BinaryMask::ones(32), BinaryMask::ones(32));
  CHECK((d.values - position_joint(s).values).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ensemble filtering keeps the correlation width") {
  // Two pixels per correlation width so the ridge is resolved.
  const double sm = sigma_minus(1.0, 4e-4);
  const SpdcParams p{1.0, 4e-4, 4 * sm};
  const GridSpec g = fft_grid(64, sm / std::sqrt(2.0));
  const BiphotonAmplitude s = build_state(p, g);
  const PhotonSimulator sim(s);
  const SensingPlan plan = plan_sensing(64, 51, 8);
  RealMatrix mean = RealMatrix::Zero(64, 64);
  for (std::size_t i = 1; i <= 50; ++i) {
    const FilterSet fs = filter_set(plan, i);
    mean += sim.perturbed_position_distribution(fs.momentum_signal, fs.momentum_idler).values;
  }
  mean /= 50.0;
  const double expected = std::sqrt(2.0) * sm;
  const double w0 = fit_correlation_width(position_joint(s).values, g.dx, expected);
  const double w1 = fit_correlation_width(mean, g.dx, expected);
  CHECK(w0 == doctest::Approx(expected).epsilon(0.1));
  CHECK(w1 == doctest::Approx(w0).epsilon(0.1));
}

TEST_CASE("sample_counts statistics") {
  PortProbabilities single;
  single.p[0][0] = 1.0;
  Rng rng(3);
  const CoincidenceRecord zero = sample_counts(single, 0.0, rng);
  CHECK(zero.total() == 0);
  const CoincidenceRecord big = sample_counts(single, 1e6, rng);
  CHECK(std::abs(static_cast<double>(big.counts[0][0]) - 1e6) <= 5 * 1000.0);
  CHECK(big.total() == big.counts[0][0]);

  PortProbabilities p;
  double w = 0.0;
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t k = 0; k < 4; ++k) w += (p.p[x][k] = 1.0 + x + 2.0 * k);
  for (auto& row : p.p)
    for (double& v : row) v /= w;
  const double flux = 50.0;
  const int draws = 10000;
  std::array<std::array<double, 4>, 4> sum{};
  for (int t = 0; t < draws; ++t) {
    const CoincidenceRecord r = sample_counts(p, flux, rng);
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t k = 0; k < 4; ++k) sum[x][k] += static_cast<double>(r.counts[x][k]);
  }
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t k = 0; k < 4; ++k) {
      const double mean = flux * p.p[x][k];
      const double se = std::sqrt(mean / draws);
      CHECK(std::abs(sum[x][k] / draws - mean) <= 3 * se);
    }
  CHECK_THROWS_AS(sample_counts(p, -1.0, rng), std::invalid_argument);
}

TEST_CASE("detector model scales and offsets the expected counts") {
  PortProbabilities single;
  single.p[1][2] = 1.0;
  Rng rng(12);
  const DetectorModel lossy{0.25, 0.0};
  double sum = 0.0;
  for (int t = 0; t < 2000; ++t) sum += sample_counts(single, 400.0, rng, lossy).total();
  CHECK(sum / 2000 == doctest::Approx(100.0).epsilon(0.02));
  const DetectorModel dark{1.0, 0.5};
  double dark_sum = 0.0;
  for (int t = 0; t < 2000; ++t) dark_sum += sample_counts(single, 0.0, rng, dark).total();
  CHECK(dark_sum / 2000 == doctest::Approx(8.0).epsilon(0.05));
}
