#include "mwsched/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include "mwsched/error.hpp"

namespace mwsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kZetaPartialTerms = 100'000;
constexpr std::int64_t kMaxSize = std::int64_t{1} << 62;

double geometric_moment(double q, double m) {
  if (q >= 1.0) return 1.0;
  // sum_k q (1-q)^(k-1) k^m, stopped once the terms are past their peak and
  // negligible against the running sum.
  const double r = 1.0 - q;
  double sum = 0.0;
  double geo = q;
  double prev = 0.0;
  for (std::int64_t k = 1;; ++k) {
    const double term = geo * std::pow(static_cast<double>(k), m);
    sum += term;
    if (term < prev && term <= 1e-18 * sum) break;
    if (geo < std::numeric_limits<double>::min()) break;
    prev = term;
    geo *= r;
  }
  return sum;
}

}  // namespace

ArrivalSpec ArrivalSpec::zeta_with_rate(double rate, double tail_index) {
  return with_rate(ArrivalSpec{1.0, ZetaSize{tail_index}}, rate);
}

void validate_arrival(const ArrivalSpec& spec) {
  if (!(spec.file_prob > 0.0 && spec.file_prob <= 1.0))
    throw Error(Errc::invalid_argument, "file_prob must lie in (0, 1]");
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantSize>) {
          if (d.value < 1) throw Error(Errc::invalid_argument, "constant size must be >= 1");
        } else if constexpr (std::is_same_v<T, GeometricSize>) {
          if (!(d.success_prob > 0.0 && d.success_prob <= 1.0))
            throw Error(Errc::invalid_argument, "geometric success_prob must lie in (0, 1]");
        } else {
          if (!(d.tail_index > 1.0) || !std::isfinite(d.tail_index))
            throw Error(Errc::invalid_argument, "zeta tail_index must be finite and > 1");
        }
      },
      spec.size);
}

double zeta_tail(double s, double n) {
  const double ns = std::pow(n, -s);
  return n * ns / (s - 1.0) + 0.5 * ns + s * ns / (12.0 * n) -
         s * (s + 1.0) * (s + 2.0) * ns / (720.0 * n * n * n);
}

double riemann_zeta(double s) {
  if (!(s > 1.0)) return kInf;
  double partial = 0.0;
  for (std::int64_t k = kZetaPartialTerms - 1; k >= 1; --k)
    partial += std::pow(static_cast<double>(k), -s);
  return partial + zeta_tail(s, static_cast<double>(kZetaPartialTerms));
}

double size_moment(const SizeDistribution& size, double m) {
  return std::visit(
      [m](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantSize>) {
          return std::pow(static_cast<double>(d.value), m);
        } else if constexpr (std::is_same_v<T, GeometricSize>) {
          return geometric_moment(d.success_prob, m);
        } else {
          if (m >= d.tail_index) return kInf;
          return riemann_zeta(d.tail_index + 1.0 - m) / riemann_zeta(d.tail_index + 1.0);
        }
      },
      size);
}

double size_mean(const SizeDistribution& size) { return size_moment(size, 1.0); }

double moment(const ArrivalSpec& spec, double m) {
  if (!(m > 0.0)) throw Error(Errc::invalid_argument, "moment order must be positive");
  const double s = size_moment(spec.size, m);
  return std::isinf(s) ? kInf : spec.file_prob * s;
}

double rate(const ArrivalSpec& spec) { return moment(spec, 1.0); }

bool is_heavy_tailed(const ArrivalSpec& spec) { return std::isinf(moment(spec, 2.0)); }

ArrivalSpec with_rate(const ArrivalSpec& spec, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw Error(Errc::invalid_argument, "rate must be positive and finite");
  ArrivalSpec out = spec;
  out.file_prob = rate / size_mean(spec.size);
  if (out.file_prob > 1.0)
    throw Error(Errc::invalid_argument,
                "rate " + std::to_string(rate) + " needs a file probability above 1 for this size law");
  return out;
}

ZetaTable::ZetaTable(double tail_index) : beta_(tail_index) {
  const double s = beta_ + 1.0;
  const double norm = riemann_zeta(s);
  cdf_.resize(kTableSize);
  long double acc = 0.0L;
  for (std::int64_t k = 1; k <= kTableSize; ++k) {
    acc += std::pow(static_cast<long double>(k), -static_cast<long double>(s));
    cdf_[k - 1] = static_cast<double>(acc / norm);
  }
  tail_ = zeta_tail(s, static_cast<double>(kTableSize + 1)) / norm;
}

std::shared_ptr<const ZetaTable> ZetaTable::get(double tail_index) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const ZetaTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[tail_index];
  if (!slot) slot = std::make_shared<const ZetaTable>(tail_index);
  return slot;
}

std::int64_t ZetaTable::invert(double u) const {
  if (u < cdf_.back()) {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::int64_t>(it - cdf_.begin()) + 1;
  }
  // Beyond the table: P(size > x) = tail * (K/x)^beta.
  const double survival = std::max(1.0 - u, 0x1.0p-60);
  const double x = static_cast<double>(kTableSize) * std::pow(tail_ / survival, 1.0 / beta_);
  if (!(x < static_cast<double>(kMaxSize))) return kMaxSize;
  return std::max<std::int64_t>(kTableSize + 1, static_cast<std::int64_t>(std::ceil(x)));
}

ArrivalSampler::ArrivalSampler(const ArrivalSpec& spec) : spec_(spec) {
  validate_arrival(spec_);
  if (const auto* z = std::get_if<ZetaSize>(&spec_.size)) zeta_ = ZetaTable::get(z->tail_index);
}

std::int64_t ArrivalSampler::sample_size(Rng& rng) const {
  if (const auto* c = std::get_if<ConstantSize>(&spec_.size)) return c->value;
  if (const auto* g = std::get_if<GeometricSize>(&spec_.size)) {
    if (g->success_prob >= 1.0) return 1;
    const double k = std::floor(std::log1p(-rng.uniform()) / std::log1p(-g->success_prob));
    return k >= static_cast<double>(kMaxSize) ? kMaxSize : static_cast<std::int64_t>(k) + 1;
  }
  return zeta_->invert(rng.uniform());
}

std::int64_t ArrivalSampler::sample(Rng& rng) const {
  if (spec_.file_prob < 1.0 && rng.uniform() >= spec_.file_prob) return 0;
  return sample_size(rng);
}

}  // namespace mwsched
