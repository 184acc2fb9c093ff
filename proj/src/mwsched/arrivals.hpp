#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "mwsched/rng.hpp"

namespace mwsched {

struct ConstantSize {
  std::int64_t value = 1;
  friend bool operator==(const ConstantSize&, const ConstantSize&) = default;
};

// Support {1, 2, ...}, P(size = k) = q (1-q)^(k-1).
struct GeometricSize {
  double success_prob = 1.0;
  friend bool operator==(const GeometricSize&, const GeometricSize&) = default;
};

// P(size = k) = k^-(beta+1) / zeta(beta+1), k >= 1. Finite mean for beta > 1,
// infinite second moment for beta <= 2.
struct ZetaSize {
  double tail_index = 1.5;
  friend bool operator==(const ZetaSize&, const ZetaSize&) = default;
};

using SizeDistribution = std::variant<ConstantSize, GeometricSize, ZetaSize>;

// One file per slot with probability file_prob; the file's packet count is an
// independent draw from `size`.
struct ArrivalSpec {
  double file_prob = 1.0;
  SizeDistribution size = ConstantSize{1};

  // p = rate, unit-size files.
  static ArrivalSpec bernoulli(double rate) { return {rate, ConstantSize{1}}; }
  // Zeta-sized files with the file probability chosen to give `rate`.
  static ArrivalSpec zeta_with_rate(double rate, double tail_index);

  friend bool operator==(const ArrivalSpec&, const ArrivalSpec&) = default;
};

void validate_arrival(const ArrivalSpec& spec);

// Riemann zeta for s > 1: reverse partial sum to 1e5 plus an Euler-Maclaurin
// tail. Returns +inf for s <= 1.
double riemann_zeta(double s);

// sum_{k >= n} k^-s via Euler-Maclaurin, s > 1, n large.
double zeta_tail(double s, double n);

double size_moment(const SizeDistribution& size, double m);
double size_mean(const SizeDistribution& size);

// E[A^m] = p E[size^m]; +inf when the series diverges.
double moment(const ArrivalSpec& spec, double m);
double rate(const ArrivalSpec& spec);
bool is_heavy_tailed(const ArrivalSpec& spec);

// Returns a copy of `spec` whose file probability is rescaled to hit `rate`,
// keeping the size law. Throws if that needs p > 1.
ArrivalSpec with_rate(const ArrivalSpec& spec, double rate);

// Inverse-CDF table for one tail index, shared between samplers.
class ZetaTable {
 public:
  static constexpr std::int64_t kTableSize = 1'000'000;

  explicit ZetaTable(double tail_index);
  static std::shared_ptr<const ZetaTable> get(double tail_index);

  // Maps u in [0,1) to a size >= 1.
  std::int64_t invert(double u) const;
  double tail_index() const { return beta_; }
  // P(size > kTableSize).
  double table_tail() const { return tail_; }

 private:
  double beta_;
  double tail_;
  std::vector<double> cdf_;
};

// Immutable per-flow sampler; safe to share across replications.
class ArrivalSampler {
 public:
  explicit ArrivalSampler(const ArrivalSpec& spec);

  std::int64_t sample(Rng& rng) const;
  std::int64_t sample_size(Rng& rng) const;
  const ArrivalSpec& spec() const { return spec_; }

 private:
  ArrivalSpec spec_;
  std::shared_ptr<const ZetaTable> zeta_;
};

}  // namespace mwsched
