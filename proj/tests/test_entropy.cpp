#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "eprcs/entropy.hpp"
#include "eprcs/errors.hpp"

using namespace eprcs;

namespace {

const GridSpec kGrid4 = fft_grid(4, 1.0);

JointDistribution dist(RealMatrix w, Domain d = Domain::position,
                       const GridSpec& g = kGrid4) {
  return JointDistribution::from_weights(std::move(w), g, d);
}

RealMatrix diagonal(std::size_t n, bool anti = false) {
  RealMatrix m = RealMatrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, anti ? n - 1 - i : i) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("entropy worked examples") {
  const JointDistribution diag = dist(diagonal(16), Domain::position, fft_grid(16, 1.0));
  CHECK(conditional_entropy(diag) == doctest::Approx(0.0));
  CHECK(mutual_information(diag) == doctest::Approx(4.0));
  CHECK(shannon_entropy(diag.values) == doctest::Approx(4.0));

  const JointDistribution flat = dist(RealMatrix::Ones(16, 16), Domain::position, fft_grid(16, 1.0));
  CHECK(conditional_entropy(flat) == doctest::Approx(4.0));
  CHECK(mutual_information(flat) == doctest::Approx(0.0));
  CHECK(marginal_entropy(flat, Particle::signal) == doctest::Approx(4.0));

  RealMatrix blocks = RealMatrix::Zero(4, 4);
  blocks.topLeftCorner(2, 2).setOnes();
  blocks.bottomRightCorner(2, 2).setOnes();
  const JointDistribution b = dist(blocks);
  CHECK(conditional_entropy(b) == doctest::Approx(1.0));
  CHECK(conditional_entropy(b, Particle::signal) == doctest::Approx(1.0));
  CHECK(mutual_information(b) == doctest::Approx(1.0));
}

TEST_CASE("conditioning is asymmetric when the marginals differ") {
  RealMatrix w = RealMatrix::Zero(4, 4);
  w(0, 0) = 1;
  w(1, 0) = 1;  // particle 2 pinned, particle 1 spread over two pixels
  const JointDistribution j = dist(w);
  CHECK(conditional_entropy(j, Particle::idler) == doctest::Approx(1.0));
  CHECK(conditional_entropy(j, Particle::signal) == doctest::Approx(0.0));
}

TEST_CASE("steering bound") {
  CHECK(steering_bound(2.0 * std::numbers::pi / 16 / 1.0, 1.0, 1) ==
        doctest::Approx(std::log2(16 * std::exp(1.0) / 2.0)));
  CHECK(steering_bound(0.0845, 4.645, 1) == doctest::Approx(4.443).epsilon(1e-3));
  CHECK(steering_bound(0.1, 0.2, 2) == doctest::Approx(2 * steering_bound(0.1, 0.2, 1)));
  const double pe = std::numbers::pi * std::exp(1.0);
  CHECK(steering_bound(pe, 1.0, 1) == doctest::Approx(0.0).scale(1.0));
  CHECK(steering_bound_vacuous(pe, 1.0));
  CHECK_FALSE(steering_bound_vacuous(0.1, 1.0));
}

TEST_CASE("threshold_normalize examples and contracts") {
  RealMatrix s = RealMatrix::Constant(4, 4, 0.03);
  s(1, 2) = 1.0;
  s(0, 0) = -0.2;
  const JointDistribution d = threshold_normalize(s, 0.05, kGrid4, Domain::momentum);
  CHECK(d.values(1, 2) == doctest::Approx(1.0));
  CHECK(d.values.sum() == doctest::Approx(1.0));
  CHECK(d.domain == Domain::momentum);

  const JointDistribution kept = threshold_normalize(s, 0.0, kGrid4, Domain::position);
  CHECK(kept.values(0, 0) == 0.0);  // negative clamped
  CHECK(kept.values(1, 2) == doctest::Approx(1.0 / (1.0 + 14 * 0.03)));

  s(2, 2) = 0.999;
  const JointDistribution top = threshold_normalize(s, 0.9995, kGrid4, Domain::position);
  CHECK(top.values(1, 2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(threshold_normalize(RealMatrix::Constant(4, 4, -1.0), 0.0, kGrid4, Domain::position),
                  AllZero);
  CHECK_THROWS_AS(threshold_normalize(RealMatrix::Zero(4, 4), 0.0, kGrid4, Domain::position), AllZero);
  CHECK_THROWS_AS(threshold_normalize(s, 1.0, kGrid4, Domain::position), std::invalid_argument);
  CHECK_THROWS_AS(threshold_normalize(s, -0.1, kGrid4, Domain::position), std::invalid_argument);
}

TEST_CASE("information inequalities on random distributions") {
  std::mt19937_64 rng(99);
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution sparse(0.3);
  for (int t = 0; t < 1000; ++t) {
    RealMatrix w(8, 8);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = sparse(rng) ? e(rng) : 0.0;
    if (w.sum() == 0.0) w(0, 0) = 1.0;
    const JointDistribution j = dist(w, Domain::position, fft_grid(8, 1.0));
    const double mi = mutual_information(j);
    CHECK(mi >= 0.0);
    CHECK(conditional_entropy(j) <= marginal_entropy(j, Particle::signal) + 1e-12);
    CHECK(conditional_entropy(j) >= 0.0);
    CHECK(mi == doctest::Approx(marginal_entropy(j, Particle::signal) - conditional_entropy(j))
                    .scale(1.0)
                    .epsilon(1e-12));
  }
}

TEST_CASE("steering witness on known states") {
  const SpdcParams p = SpdcParams::supplement();
  const GridSpec g = balanced_grid(p, 16);
  const BiphotonAmplitude s = build_state(p, g);
  const SteeringReport exact = steering_witness(position_joint(s), momentum_joint(s), 1);
  MESSAGE("exact: H(x|x)=" << exact.h_x_cond << " H(k|k)=" << exact.h_k_cond
                           << " bound=" << exact.bound);
  CHECK(exact.entangled);
  CHECK(exact.violation > 0.0);
  CHECK_FALSE(exact.vacuous);
  CHECK(exact.violation == doctest::Approx(exact.bound - exact.h_x_cond - exact.h_k_cond));

  const JointDistribution flat_x = dist(RealMatrix::Ones(16, 16), Domain::position, g);
  const JointDistribution flat_k = dist(RealMatrix::Ones(16, 16), Domain::momentum, g);
  const SteeringReport flat = steering_witness(flat_x, flat_k, 1);
  CHECK_FALSE(flat.entangled);
  CHECK(flat.h_x_cond + flat.h_k_cond == doctest::Approx(8.0));

  // Product of the true marginals: a separable surrogate.
  const Eigen::VectorXd mx = signal_marginal(position_joint(s));
  const Eigen::VectorXd mk = signal_marginal(momentum_joint(s));
  const SteeringReport product = steering_witness(dist(mx * mx.transpose(), Domain::position, g),
                                                  dist(mk * mk.transpose(), Domain::momentum, g), 1);
  CHECK_FALSE(product.entangled);

  const SteeringReport perfect = steering_witness(dist(diagonal(16), Domain::position, g),
                                                  dist(diagonal(16, true), Domain::momentum, g), 1);
  CHECK(perfect.h_x_cond + perfect.h_k_cond == doctest::Approx(0.0).scale(1.0));
  CHECK(perfect.entangled);

  const JointDistribution other = dist(RealMatrix::Ones(16, 16), Domain::momentum, fft_grid(16, 0.2));
  CHECK_THROWS_AS(steering_witness(flat_x, other, 1), ShapeMismatch);
}

TEST_CASE("report text carries values and provenance") {
  SteeringReport r;
  r.h_x_cond = 1.5;
  r.h_k_cond = 2.0;
  r.bound = 4.0;
  r.violation = 0.5;
  r.entangled = true;
  std::ostringstream os;
  write_report(os, r, {"abc123", 256, 4000.0, 0.02});
  const std::string text = os.str();
  for (const char* key : {"[steering]", "run_id", "abc123", "measurements", "256", "flux",
                          "threshold", "h_x_cond", "h_k_cond", "bound", "violation", "entangled"})
    CHECK_MESSAGE(text.find(key) != std::string::npos, key);
}

TEST_CASE("mse") {
  RealMatrix a = RealMatrix::Zero(2, 2);
  RealMatrix b = RealMatrix::Zero(2, 2);
  b(0, 0) = 2.0;
  CHECK(mse(a, b) == 1.0);
  CHECK(mse(a, a) == 0.0);
  CHECK_THROWS_AS(mse(a, RealMatrix::Zero(3, 3)), ShapeMismatch);
}
