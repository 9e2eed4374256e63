#include "eprcs/measurement.hpp"

#include <algorithm>
#include <stdexcept>

#include "eprcs/errors.hpp"
#include "eprcs/rng.hpp"

namespace eprcs {

namespace {

constexpr double kComboSign[4] = {1.0, -1.0, -1.0, 1.0};  // TT TR RT RR

template <typename T>
Aggregate combine(const std::array<std::array<T, 4>, 4>& table) {
  double a[4] = {0, 0, 0, 0};  // momentum combos: column sums
  double b[4] = {0, 0, 0, 0};  // position combos: row sums
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto v = static_cast<double>(table[r][c]);
      a[c] += v;
      b[r] += v;
    }
  }
  double total = 0.0;
  double yk = 0.0;
  double yx = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    total += a[c];
    yk += kComboSign[c] * a[c];
    yx += kComboSign[c] * b[c];
  }
  if (!(total > 0.0)) throw EmptyRecord("record has no coincidences");
  return {yk / total, yx / total, 0};
}

}  // namespace

Aggregate aggregate(const CoincidenceRecord& record) {
  Aggregate out = combine(record.counts);
  out.total = record.total();
  return out;
}

Aggregate aggregate(const PortProbabilities& p) { return combine(p.p); }

std::size_t MeasurementVectors::missing() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 0));
}

std::vector<std::size_t> MeasurementVectors::valid_rows() const {
  std::vector<std::size_t> rows;
  rows.reserve(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (valid[i]) rows.push_back(i);
  }
  return rows;
}

std::vector<double> MeasurementVectors::compact(Domain d) const {
  const auto& y = d == Domain::momentum ? y_momentum : y_position;
  std::vector<double> out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (valid[i]) out.push_back(y[i]);
  }
  return out;
}

Acquisition run_acquisition(const BiphotonAmplitude& state,
                            const SensingPlan& plan, Flux flux,
                            std::uint64_t seed, const DetectorModel& detector) {
  if (plan.n() != state.grid.n) {
    throw ShapeMismatch("plan size does not match the state grid");
  }
  if (!flux.is_exact() && !(flux.mean >= 0.0)) {
    throw std::invalid_argument("mean flux must be nonnegative");
  }
  const PhotonSimulator sim(state);
  const std::size_t m = plan.measurements();

  Acquisition acq;
  auto& v = acq.vectors;
  v.y_momentum.assign(m, 0.0);
  v.y_position.assign(m, 0.0);
  v.totals.assign(m, 0);
  v.valid.assign(m, 0);
  if (!flux.is_exact()) acq.records.resize(m);

  for (std::size_t i = 0; i < m; ++i) {
    const PortProbabilities p = sim.port_probabilities(filter_set(plan, i));
    try {
      Aggregate agg;
      if (flux.is_exact()) {
        agg = aggregate(p);
      } else {
        Rng rng = make_stream(seed, {tag(Stream::acquisition), i});
        acq.records[i] = sample_counts(p, flux.mean, rng, detector);
        agg = aggregate(acq.records[i]);
      }
      v.y_momentum[i] = agg.y_momentum;
      v.y_position[i] = agg.y_position;
      v.totals[i] = agg.total;
      v.valid[i] = 1;
    } catch (const EmptyRecord&) {
      v.valid[i] = 0;
    }
  }
  return acq;
}

}  // namespace eprcs
