#include <doctest.h>

#include <cmath>

#include "eprcs/errors.hpp"
#include "eprcs/measurement.hpp"
#include "test_support.hpp"

using namespace eprcs;

namespace {

BiphotonAmplitude supplement_state(std::size_t n) {
  const SpdcParams p = SpdcParams::supplement();
  return build_state(p, balanced_grid(p, n));
}

double inner(const std::vector<double>& row, const RealMatrix& m) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < m.size(); ++k) s += row[static_cast<std::size_t>(k)] * m.data()[k];
  return s;
}

// Swap TR and RT.
std::size_t swap_combo(std::size_t c) { return c == 1 ? 2 : (c == 2 ? 1 : c); }

}  // namespace

TEST_CASE("aggregate worked examples") {
  PortProbabilities p;
  p.p[0][0] = 1.0;
  Aggregate a = aggregate(p);
  CHECK(a.y_momentum == 1.0);
  CHECK(a.y_position == 1.0);

  for (auto& row : p.p) row.fill(1.0 / 16);
  a = aggregate(p);
  CHECK(a.y_momentum == doctest::Approx(0.0));
  CHECK(a.y_position == doctest::Approx(0.0));

  PortProbabilities tr;
  for (std::size_t x = 0; x < 4; ++x) tr.p[x][1] = 0.25;
  a = aggregate(tr);
  CHECK(a.y_momentum == -1.0);

  CoincidenceRecord r;
  r.counts[0][0] = 30;
  r.counts[3][1] = 10;
  a = aggregate(r);
  CHECK(a.total == 40);
  CHECK(a.y_momentum == doctest::Approx(0.5));  // (30 - 10) / 40
  CHECK(a.y_position == doctest::Approx(1.0));  // TT and RR rows both +1

  CHECK_THROWS_AS(aggregate(CoincidenceRecord{}), EmptyRecord);
}

TEST_CASE("exact momentum measurements are the sensing inner products") {
  const BiphotonAmplitude s = supplement_state(16);
  const SensingPlan plan = plan_sensing(16, 256, 5);
  const Acquisition acq = run_acquisition(s, plan, Flux::exact(), 1);
  CHECK(acq.records.empty());
  CHECK(acq.vectors.missing() == 0);
  const RealMatrix k = momentum_joint(s).values;
  for (std::size_t i = 0; i < plan.measurements(); ++i) {
    CHECK(acq.vectors.y_momentum[i] ==
          doctest::Approx(inner(plan.joint_row(Domain::momentum, i), k)).epsilon(1e-10));
  }
  CHECK(acq.vectors.y_momentum[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(acq.vectors.y_position[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("position measurements track the position joint on average") {
  // Momentum filtering first perturbs each row's position distribution, so
  // single rows deviate; the deviation averages out over random rows.
  const BiphotonAmplitude s = supplement_state(16);
  const SensingPlan plan = plan_sensing(16, 256, 17);
  const Acquisition acq = run_acquisition(s, plan, Flux::exact(), 1);
  const RealMatrix x = position_joint(s).values;
  double sum = 0.0;
  double sum2 = 0.0;
  const std::size_t m = plan.measurements() - 1;
  for (std::size_t i = 1; i <= m; ++i) {
    const double d = acq.vectors.y_position[i] - inner(plan.joint_row(Domain::position, i), x);
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / m;
  const double se = std::sqrt((sum2 / m - mean * mean) / m);
  CHECK(std::abs(mean) <= 3 * se);
}

TEST_CASE("measurements are bounded, deterministic, and seed dependent") {
  const BiphotonAmplitude s = supplement_state(16);
  const SensingPlan plan = plan_sensing(16, 128, 2);
  const Acquisition a = run_acquisition(s, plan, Flux{500.0}, 77);
  const Acquisition b = run_acquisition(s, plan, Flux{500.0}, 77);
  const Acquisition c = run_acquisition(s, plan, Flux{500.0}, 78);
  CHECK(a.vectors.y_momentum == b.vectors.y_momentum);
  CHECK(a.vectors.y_position == b.vectors.y_position);
  CHECK(a.vectors.y_momentum != c.vectors.y_momentum);
  for (std::size_t i = 0; i < plan.measurements(); ++i) {
    CHECK(std::abs(a.vectors.y_momentum[i]) <= 1.0);
    CHECK(std::abs(a.vectors.y_position[i]) <= 1.0);
    CHECK(a.vectors.totals[i] == a.records[i].total());
  }
}

TEST_CASE("finite flux converges to the exact values") {
  const BiphotonAmplitude s = supplement_state(16);
  const SensingPlan plan = plan_sensing(16, 32, 4);
  const Acquisition exact = run_acquisition(s, plan, Flux::exact(), 1);
  const double flux = 1e6;
  const Acquisition noisy = run_acquisition(s, plan, Flux{flux}, 3);
  for (std::size_t i = 0; i < plan.measurements(); ++i) {
    CHECK(std::abs(noisy.vectors.y_momentum[i] - exact.vectors.y_momentum[i]) <=
          5 / std::sqrt(flux));
    CHECK(std::abs(noisy.vectors.y_position[i] - exact.vectors.y_position[i]) <=
          5 / std::sqrt(flux));
  }
}

TEST_CASE("exchanging the particles leaves the symmetric state's data unchanged") {
  const BiphotonAmplitude s = supplement_state(16);
  const PhotonSimulator sim(s);
  const SensingPlan plan = plan_sensing(16, 40, 6);
  for (std::size_t i = 0; i < plan.measurements(); ++i) {
    const FilterSet fs = filter_set(plan, i);
    const FilterSet swapped{fs.momentum_idler, fs.momentum_signal, fs.position_idler,
                            fs.position_signal};
    const PortProbabilities p = sim.port_probabilities(fs);
    const PortProbabilities q = sim.port_probabilities(swapped);
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t k = 0; k < 4; ++k)
        CHECK(q.p[swap_combo(x)][swap_combo(k)] == doctest::Approx(p.p[x][k]).epsilon(1e-10));
    const Aggregate a = aggregate(p);
    const Aggregate b = aggregate(q);
    CHECK(a.y_momentum == doctest::Approx(b.y_momentum).epsilon(1e-10));
    CHECK(a.y_position == doctest::Approx(b.y_position).epsilon(1e-10));
  }
}

TEST_CASE("empty records are flagged, not fabricated") {
  const BiphotonAmplitude s = supplement_state(16);
  const SensingPlan plan = plan_sensing(16, 200, 8);
  const Acquisition acq = run_acquisition(s, plan, Flux{0.5}, 9);
  const std::size_t missing = acq.vectors.missing();
  CHECK(missing > 0);
  CHECK(missing < plan.measurements());
  CHECK(acq.vectors.compact(Domain::momentum).size() == plan.measurements() - missing);
  for (std::size_t i : acq.vectors.valid_rows()) CHECK(acq.vectors.totals[i] > 0);
  for (std::size_t i = 0; i < plan.measurements(); ++i)
    if (!acq.vectors.valid[i]) CHECK(acq.records[i].total() == 0);
}

TEST_CASE("acquisition contracts") {
  const BiphotonAmplitude s = supplement_state(16);
  CHECK_THROWS_AS(run_acquisition(s, plan_sensing(8, 4, 1), Flux::exact(), 1), ShapeMismatch);
  CHECK_THROWS_AS(run_acquisition(s, plan_sensing(16, 4, 1), Flux{-1.0}, 1),
                  std::invalid_argument);
}
