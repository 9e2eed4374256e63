#include "eprcs/random_filters.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "eprcs/errors.hpp"

namespace eprcs {

SigningVector::SigningVector(std::vector<std::int8_t> entries)
    : entries_(std::move(entries)) {
  for (auto v : entries_) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("signing vector entries must be +1 or -1");
    }
  }
}

SigningVector SigningVector::negated() const {
  std::vector<std::int8_t> out(entries_.size());
  std::transform(entries_.begin(), entries_.end(), out.begin(),
                 [](std::int8_t v) { return static_cast<std::int8_t>(-v); });
  return SigningVector(std::move(out));
}

BinaryMask::BinaryMask(std::vector<std::uint8_t> entries)
    : entries_(std::move(entries)) {
  for (auto v : entries_) {
    if (v > 1) throw std::invalid_argument("mask entries must be 0 or 1");
  }
}

BinaryMask BinaryMask::ones(std::size_t n) {
  return BinaryMask(std::vector<std::uint8_t>(n, 1));
}

BinaryMask BinaryMask::zeros(std::size_t n) {
  return BinaryMask(std::vector<std::uint8_t>(n, 0));
}

std::size_t BinaryMask::transmitted() const {
  return static_cast<std::size_t>(
      std::count(entries_.begin(), entries_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::complement() const {
  std::vector<std::uint8_t> out(entries_.size());
  std::transform(entries_.begin(), entries_.end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(1 - v); });
  return BinaryMask(std::move(out));
}

SigningVector hadamard_row(std::size_t n, std::size_t r) {
  if (!is_power_of_two(n)) {
    throw BadOrder("Hadamard order " + std::to_string(n) +
                   " is not a power of two");
  }
  if (r >= n) throw std::out_of_range("Hadamard row index out of range");
  std::vector<std::int8_t> row(n);
  for (std::size_t c = 0; c < n; ++c) {
    row[c] = (std::popcount(r & c) & 1) ? -1 : 1;
  }
  return SigningVector(std::move(row));
}

BinaryMask mask_from_signs(const SigningVector& s) {
  std::vector<std::uint8_t> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((s[i] + 1) / 2);
  }
  return BinaryMask(std::move(out));
}

void fwht(std::span<double> data) {
  const std::size_t len = data.size();
  if (!is_power_of_two(len)) {
    throw BadOrder("FWHT length " + std::to_string(len) +
                   " is not a power of two");
  }
  for (std::size_t h = 1; h < len; h *= 2) {
    for (std::size_t i = 0; i < len; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = data[j];
        const double b = data[j + h];
        data[j] = a + b;
        data[j + h] = a - b;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// SensingPlan

std::size_t SensingPlan::slot(Domain d, Particle p) {
  return (d == Domain::momentum ? 0 : 2) + static_cast<std::size_t>(p);
}

SensingPlan::SensingPlan(std::size_t n, std::uint64_t seed, RowPolicy policy,
                         std::array<std::vector<std::uint32_t>, 4> permutations,
                         std::array<std::vector<RowPair>, 2> rows)
    : n_(n),
      seed_(seed),
      policy_(policy),
      permutations_(std::move(permutations)),
      rows_(std::move(rows)) {
  if (!is_power_of_two(n_)) {
    throw BadOrder("plan size " + std::to_string(n_) +
                   " is not a power of two");
  }
  for (const auto& perm : permutations_) {
    if (perm.size() != n_) throw ShapeMismatch("permutation length != n");
    std::vector<bool> seen(n_, false);
    for (auto v : perm) {
      if (v >= n_ || seen[v]) {
        throw std::invalid_argument("permutation is not a bijection");
      }
      seen[v] = true;
    }
  }
  if (rows_[0].size() != rows_[1].size()) {
    throw ShapeMismatch("momentum and position row counts differ");
  }
  if (rows_[0].empty()) throw std::invalid_argument("empty plan");
  const std::size_t joint = n_ * n_;
  for (const auto& list : rows_) {
    for (const auto& r : list) {
      if (r.first >= n_ || r.second >= n_) {
        throw std::out_of_range("row index out of range");
      }
    }
    if (policy_ == RowPolicy::distinct) {
      if (list.size() > joint) throw TooManyRows("more rows than n^2");
      std::vector<bool> seen(joint, false);
      for (const auto& r : list) {
        const std::size_t key = r.first * n_ + r.second;
        if (seen[key]) {
          throw std::invalid_argument("distinct plan repeats a row pair");
        }
        seen[key] = true;
      }
    }
  }
}

const std::vector<std::uint32_t>& SensingPlan::permutation(Domain d,
                                                           Particle p) const {
  return permutations_[slot(d, p)];
}

const std::vector<RowPair>& SensingPlan::rows(Domain d) const {
  return rows_[d == Domain::momentum ? 0 : 1];
}

SigningVector SensingPlan::signing_vector(Domain d, Particle p,
                                          std::size_t i) const {
  const RowPair rp = rows(d).at(i);
  const std::uint32_t r = p == Particle::signal ? rp.first : rp.second;
  const auto& perm = permutation(d, p);
  std::vector<std::int8_t> out(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    out[j] = (std::popcount(static_cast<std::size_t>(r) & perm[j]) & 1) ? -1
                                                                         : 1;
  }
  return SigningVector(std::move(out));
}

std::vector<double> SensingPlan::joint_row(Domain d, std::size_t i) const {
  const SigningVector a = signing_vector(d, Particle::signal, i);
  const SigningVector b = signing_vector(d, Particle::idler, i);
  std::vector<double> out(n_ * n_);
  for (std::size_t j1 = 0; j1 < n_; ++j1) {
    for (std::size_t j2 = 0; j2 < n_; ++j2) {
      out[j1 * n_ + j2] = static_cast<double>(a[j1] * b[j2]);
    }
  }
  return out;
}

SensingPlan plan_sensing(std::size_t n, std::size_t measurements,
                         std::uint64_t seed, RowPolicy policy) {
  if (!is_power_of_two(n)) {
    throw BadOrder("plan size " + std::to_string(n) +
                   " is not a power of two");
  }
  if (measurements == 0) throw std::invalid_argument("empty plan");
  const std::size_t joint = n * n;
  if (policy == RowPolicy::distinct && measurements > joint) {
    throw TooManyRows("M = " + std::to_string(measurements) +
                      " exceeds n^2 = " + std::to_string(joint));
  }

  std::array<std::vector<std::uint32_t>, 4> perms;
  const Domain domains[] = {Domain::momentum, Domain::position};
  for (std::size_t s = 0; s < 4; ++s) {
    Rng rng = make_stream(seed, {tag(Stream::permutation), s});
    perms[s].resize(n);
    std::iota(perms[s].begin(), perms[s].end(), 0U);
    std::shuffle(perms[s].begin(), perms[s].end(), rng);
  }

  std::array<std::vector<RowPair>, 2> rows;
  for (std::size_t d = 0; d < 2; ++d) {
    Rng rng = make_stream(seed, {tag(Stream::rows), static_cast<std::uint64_t>(
                                                        domains[d])});
    auto& list = rows[d];
    list.reserve(measurements);
    auto to_pair = [n](std::size_t key) {
      return RowPair{static_cast<std::uint32_t>(key / n),
                     static_cast<std::uint32_t>(key % n)};
    };
    // First pass: the all-ones row, then the remaining pairs in random order.
    std::vector<std::size_t> keys(joint - 1);
    std::iota(keys.begin(), keys.end(), std::size_t{1});
    std::shuffle(keys.begin(), keys.end(), rng);
    list.push_back(to_pair(0));
    for (std::size_t k = 0; k < keys.size() && list.size() < measurements;
         ++k) {
      list.push_back(to_pair(keys[k]));
    }
    keys.resize(joint);
    while (list.size() < measurements) {
      std::iota(keys.begin(), keys.end(), std::size_t{0});
      std::shuffle(keys.begin(), keys.end(), rng);
      for (std::size_t k = 0; k < joint && list.size() < measurements; ++k) {
        list.push_back(to_pair(keys[k]));
      }
    }
  }
  return SensingPlan(n, seed, policy, std::move(perms), std::move(rows));
}

// ---------------------------------------------------------------------------
// Plan text format

namespace {

constexpr const char* kPlanMagic = "eprcs-sensing-plan";

std::string_view policy_name(RowPolicy p) {
  return p == RowPolicy::distinct ? "distinct" : "cycle";
}

void expect_token(std::istream& is, std::string_view want) {
  std::string got;
  if (!(is >> got) || got != want) {
    throw std::runtime_error("plan parse error: expected '" +
                             std::string(want) + "', got '" + got + "'");
  }
}

template <typename T>
T read_value(std::istream& is, std::string_view what) {
  T v{};
  if (!(is >> v)) {
    throw std::runtime_error("plan parse error reading " + std::string(what));
  }
  return v;
}

}  // namespace

void write_plan(std::ostream& os, const SensingPlan& plan) {
  os << kPlanMagic << " 1\n";
  os << "n " << plan.n() << "\n";
  os << "measurements " << plan.measurements() << "\n";
  os << "seed " << plan.seed() << "\n";
  os << "policy " << policy_name(plan.policy()) << "\n";
  for (Domain d : {Domain::momentum, Domain::position}) {
    for (Particle p : {Particle::signal, Particle::idler}) {
      os << "permutation " << to_string(d) << ' '
         << (p == Particle::signal ? "signal" : "idler");
      for (auto v : plan.permutation(d, p)) os << ' ' << v;
      os << "\n";
    }
  }
  for (Domain d : {Domain::momentum, Domain::position}) {
    os << "rows " << to_string(d) << "\n";
    for (const auto& r : plan.rows(d)) os << r.first << ' ' << r.second << "\n";
  }
}

SensingPlan read_plan(std::istream& is) {
  expect_token(is, kPlanMagic);
  if (read_value<int>(is, "version") != 1) {
    throw std::runtime_error("unsupported plan version");
  }
  expect_token(is, "n");
  const auto n = read_value<std::size_t>(is, "n");
  expect_token(is, "measurements");
  const auto m = read_value<std::size_t>(is, "measurements");
  expect_token(is, "seed");
  const auto seed = read_value<std::uint64_t>(is, "seed");
  expect_token(is, "policy");
  const auto policy_text = read_value<std::string>(is, "policy");
  RowPolicy policy;
  if (policy_text == "distinct") {
    policy = RowPolicy::distinct;
  } else if (policy_text == "cycle") {
    policy = RowPolicy::cycle;
  } else {
    throw std::runtime_error("unknown row policy " + policy_text);
  }
  std::array<std::vector<std::uint32_t>, 4> perms;
  const char* domain_names[] = {"momentum", "momentum", "position", "position"};
  const char* particle_names[] = {"signal", "idler", "signal", "idler"};
  for (std::size_t s = 0; s < 4; ++s) {
    expect_token(is, "permutation");
    expect_token(is, domain_names[s]);
    expect_token(is, particle_names[s]);
    perms[s].resize(n);
    for (auto& v : perms[s]) v = read_value<std::uint32_t>(is, "permutation");
  }
  std::array<std::vector<RowPair>, 2> rows;
  const char* row_names[] = {"momentum", "position"};
  for (std::size_t d = 0; d < 2; ++d) {
    expect_token(is, "rows");
    expect_token(is, row_names[d]);
    rows[d].resize(m);
    for (auto& r : rows[d]) {
      r.first = read_value<std::uint32_t>(is, "row");
      r.second = read_value<std::uint32_t>(is, "row");
    }
  }
  return SensingPlan(n, seed, policy, std::move(perms), std::move(rows));
}

// ---------------------------------------------------------------------------
// SensingOperator

SensingOperator::SensingOperator(const SensingPlan& plan, Domain domain)
    : n_(plan.n()),
      perm_signal_(plan.permutation(domain, Particle::signal)),
      perm_idler_(plan.permutation(domain, Particle::idler)),
      rows_(plan.rows(domain)) {}

SensingOperator::SensingOperator(const SensingPlan& plan, Domain domain,
                                 std::span<const std::size_t> keep_rows)
    : n_(plan.n()),
      perm_signal_(plan.permutation(domain, Particle::signal)),
      perm_idler_(plan.permutation(domain, Particle::idler)) {
  const auto& all = plan.rows(domain);
  rows_.reserve(keep_rows.size());
  for (auto i : keep_rows) rows_.push_back(all.at(i));
}

namespace {

// H Z H^T for an n x n row-major block.
void fwht_2d(std::vector<double>& z, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    fwht(std::span<double>(z.data() + r * n, n));
  }
  std::vector<double> column(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) column[r] = z[r * n + c];
    fwht(column);
    for (std::size_t r = 0; r < n; ++r) z[r * n + c] = column[r];
  }
}

}  // namespace

void SensingOperator::apply(std::span<const double> x,
                            std::span<double> out) const {
  if (x.size() != cols() || out.size() != rows()) {
    throw ShapeMismatch("sensing apply: shape mismatch");
  }
  std::vector<double> z(n_ * n_);
  for (std::size_t j1 = 0; j1 < n_; ++j1) {
    const std::size_t p1 = perm_signal_[j1];
    for (std::size_t j2 = 0; j2 < n_; ++j2) {
      z[p1 * n_ + perm_idler_[j2]] = x[j1 * n_ + j2];
    }
  }
  fwht_2d(z, n_);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    out[i] = z[rows_[i].first * n_ + rows_[i].second];
  }
}

void SensingOperator::adjoint(std::span<const double> y,
                              std::span<double> out) const {
  if (y.size() != rows() || out.size() != cols()) {
    throw ShapeMismatch("sensing adjoint: shape mismatch");
  }
  std::vector<double> w(n_ * n_, 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    w[rows_[i].first * n_ + rows_[i].second] += y[i];
  }
  fwht_2d(w, n_);
  for (std::size_t j1 = 0; j1 < n_; ++j1) {
    const std::size_t p1 = perm_signal_[j1];
    for (std::size_t j2 = 0; j2 < n_; ++j2) {
      out[j1 * n_ + j2] = w[p1 * n_ + perm_idler_[j2]];
    }
  }
}

std::vector<double> apply_sensing(const SensingPlan& plan, Domain domain,
                                  std::span<const double> signal) {
  SensingOperator op(plan, domain);
  if (signal.size() != op.cols()) {
    throw ShapeMismatch("signal length " + std::to_string(signal.size()) +
                        " != n^2 = " + std::to_string(op.cols()));
  }
  std::vector<double> out(op.rows());
  op.apply(signal, out);
  return out;
}

std::vector<double> apply_adjoint(const SensingPlan& plan, Domain domain,
                                  std::span<const double> y) {
  SensingOperator op(plan, domain);
  if (y.size() != op.rows()) {
    throw ShapeMismatch("measurement length " + std::to_string(y.size()) +
                        " != M = " + std::to_string(op.rows()));
  }
  std::vector<double> out(op.cols());
  op.adjoint(y, out);
  return out;
}

// ---------------------------------------------------------------------------
// Random-mask spectra

namespace {

struct PhaseTable {
  explicit PhaseTable(std::size_t len) : cos_(len), sin_(len) {
    for (std::size_t i = 0; i < len; ++i) {
      const double t =
          2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len);
      cos_[i] = std::cos(t);
      sin_[i] = std::sin(t);
    }
  }
  std::vector<double> cos_;
  std::vector<double> sin_;
};

SpectrumRatios ratios_with_table(std::span<const std::size_t> ones,
                                 std::size_t n, std::size_t oversample,
                                 const PhaseTable& table) {
  const std::size_t len = n * oversample;
  const double peak = static_cast<double>(ones.size()) *
                      static_cast<double>(ones.size());
  double offpeak = 0.0;
  for (std::size_t p = 1; p < len; ++p) {
    double re = 0.0;
    double im = 0.0;
    for (auto l : ones) {
      const std::size_t idx = (l * p) % len;
      re += table.cos_[idx];
      im -= table.sin_[idx];
    }
    offpeak += re * re + im * im;
  }
  offpeak /= static_cast<double>(len - 1);
  const double half = static_cast<double>(n) / 2.0;
  return {peak / (half * half), peak > 0.0 ? offpeak / peak : 0.0};
}

}  // namespace

SpectrumRatios spectrum_ratios(const BinaryMask& mask, std::size_t oversample) {
  if (mask.size() < 2 || oversample == 0) {
    throw std::invalid_argument("spectrum needs n >= 2 and oversample >= 1");
  }
  std::vector<std::size_t> ones;
  for (std::size_t l = 0; l < mask.size(); ++l) {
    if (mask[l]) ones.push_back(l);
  }
  if (ones.empty()) throw AllZero("mask rejects every pixel");
  return ratios_with_table(ones, mask.size(), oversample,
                           PhaseTable(mask.size() * oversample));
}

SpectrumCheck spectrum_model_check(std::size_t n, std::size_t trials, Rng& rng,
                                   std::size_t oversample) {
  if (!is_power_of_two(n)) {
    throw BadOrder("mask size " + std::to_string(n) + " is not a power of two");
  }
  if (trials == 0 || oversample == 0) {
    throw std::invalid_argument("spectrum check needs trials and oversample");
  }
  const PhaseTable table(n * oversample);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> ones;
  double peak_sum = 0.0;
  double offpeak_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    ones.clear();
    for (std::size_t l = 0; l < n; ++l) {
      if (coin(rng)) ones.push_back(l);
    }
    if (ones.empty()) continue;
    const SpectrumRatios r = ratios_with_table(ones, n, oversample, table);
    peak_sum += r.peak_ratio;
    offpeak_sum += r.offpeak_ratio;
    ++used;
  }
  if (used == 0) throw AllZero("every sampled mask was empty");
  return {peak_sum / static_cast<double>(used),
          offpeak_sum / static_cast<double>(used)};
}

}  // namespace eprcs
