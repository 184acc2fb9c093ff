#include "mwsched/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "mwsched/error.hpp"

namespace mwsched {

namespace {

constexpr double kPivotEps = 1e-12;
constexpr std::size_t kMaxCoverSchedules = 10'000;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_rates(std::span<const double> rates, const NetworkSpec& network) {
  if (static_cast<int>(rates.size()) != network.num_flows)
    throw Error(Errc::invalid_argument, "need one rate per flow");
  for (double r : rates)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw Error(Errc::invalid_argument, "rates must be finite and nonnegative");
}

bool is_partition(const NetworkSpec& network) {
  FlowMask seen = 0;
  for (const Schedule& s : network.schedules) {
    if ((seen & s.mask()) != 0) return false;
    seen |= s.mask();
  }
  return seen == network.all_flows();
}

// Fluid rates for a partition: solve the F x F system directly.
Eigen::VectorXd solve_fluid(std::span<const double> rates, const NetworkSpec& network) {
  const int n = network.num_flows;
  const auto& parts = network.schedules;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  auto load = [&](Schedule s) {
    double sum = 0.0;
    for (int f : s.members()) sum += rates[f];
    return sum;
  };
  int row = 0;
  // Equal drift of every schedule's weight against the first one:
  //   sum_{s^1}(lambda - mu) = sum_{s^i}(lambda - mu).
  for (std::size_t i = 1; i < parts.size(); ++i, ++row) {
    for (int f : parts[0].members()) a(row, f) -= 1.0;
    for (int f : parts[i].members()) a(row, f) += 1.0;
    b(row) = load(parts[i]) - load(parts[0]);
  }
  // Work conservation: the schedules' common rates sum to one.
  for (const Schedule& s : parts) a(row, s.members().front()) = 1.0;
  b(row++) = 1.0;
  // Equal service inside a schedule.
  for (const Schedule& s : parts) {
    const auto members = s.members();
    for (std::size_t k = 1; k < members.size(); ++k, ++row) {
      a(row, members[k]) = 1.0;
      a(row, members[0]) = -1.0;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw Error(Errc::singular_system, "fluid system is singular");
  Eigen::VectorXd mu = lu.solve(b);
  if ((a * mu - b).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(Errc::singular_system, "fluid system residual above 1e-10");
  return mu;
}

}  // namespace

IntensitySolution traffic_intensity_lp(std::span<const double> rates, const NetworkSpec& network) {
  check_rates(rates, network);
  const int n = network.num_flows;
  const int m = static_cast<int>(network.schedules.size());

  // Dictionary x_B = b - A x_N, z = z0 + c.x_N. Labels 0..n-1 are the dual
  // variables y_f, n..n+m-1 the slacks of the schedule constraints.
  std::vector<double> A(static_cast<std::size_t>(m) * n, 0.0);
  std::vector<double> b(m, 1.0);
  std::vector<double> c(rates.begin(), rates.end());
  double z0 = 0.0;
  std::vector<int> basic(m);
  std::vector<int> nonbasic(n);
  for (int i = 0; i < m; ++i) {
    basic[i] = n + i;
    for (int f : network.schedules[i].members()) A[static_cast<std::size_t>(i) * n + f] = 1.0;
  }
  for (int j = 0; j < n; ++j) nonbasic[j] = j;
  auto at = [&](int i, int j) -> double& { return A[static_cast<std::size_t>(i) * n + j]; };

  for (;;) {
    // Bland: lowest-labelled improving variable enters.
    int e = -1;
    for (int j = 0; j < n; ++j)
      if (c[j] > kPivotEps && (e < 0 || nonbasic[j] < nonbasic[e])) e = j;
    if (e < 0) break;

    int l = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double coef = at(i, e);
      if (coef <= kPivotEps) continue;
      const double r = b[i] / coef;
      if (r < best - kPivotEps || (std::abs(r - best) <= kPivotEps && basic[i] < basic[l])) {
        best = r;
        l = i;
      }
    }
    if (l < 0) throw Error(Errc::internal, "traffic-intensity dual unbounded");

    const double piv = at(l, e);
    b[l] /= piv;
    for (int j = 0; j < n; ++j)
      if (j != e) at(l, j) /= piv;
    at(l, e) = 1.0 / piv;
    for (int i = 0; i < m; ++i) {
      if (i == l) continue;
      const double coef = at(i, e);
      if (coef == 0.0) continue;
      b[i] -= coef * b[l];
      for (int j = 0; j < n; ++j)
        if (j != e) at(i, j) -= coef * at(l, j);
      at(i, e) = -coef * at(l, e);
    }
    const double ce = c[e];
    z0 += ce * b[l];
    for (int j = 0; j < n; ++j)
      if (j != e) c[j] -= ce * at(l, j);
    c[e] = -ce * at(l, e);
    std::swap(basic[l], nonbasic[e]);
  }

  IntensitySolution out;
  out.rho = z0;
  out.zeta.assign(m, 0.0);
  for (int j = 0; j < n; ++j)
    if (nonbasic[j] >= n) out.zeta[nonbasic[j] - n] = std::max(0.0, -c[j]);
  return out;
}

double traffic_intensity(std::span<const double> rates, const NetworkSpec& network) {
  return traffic_intensity_lp(rates, network).rho;
}

int covering_number(const NetworkSpec& network) {
  if (network.schedules.size() > kMaxCoverSchedules)
    throw Error(Errc::instance_too_large, "covering number limited to 10^4 schedules");
  const FlowMask all = network.all_flows();

  // Schedules strictly inside another never help a minimum cover.
  std::vector<FlowMask> sets;
  for (const Schedule& s : network.schedules) {
    const bool dominated = std::any_of(network.schedules.begin(), network.schedules.end(), [&](Schedule o) {
      return o.mask() != s.mask() && (s.mask() & o.mask()) == s.mask();
    });
    if (!dominated) sets.push_back(s.mask());
  }

  int best = 0;
  for (FlowMask covered = 0; covered != all; ++best) {
    FlowMask pick = 0;
    for (FlowMask s : sets)
      if (std::popcount(s & ~covered) > std::popcount(pick & ~covered)) pick = s;
    covered |= pick;
  }

  int widest = 0;
  for (FlowMask s : sets) widest = std::max(widest, std::popcount(s));
  std::vector<std::vector<FlowMask>> containing(network.num_flows);
  for (FlowMask s : sets)
    for (FlowMask m = s; m != 0; m &= m - 1) containing[std::countr_zero(m)].push_back(s);

  auto search = [&](auto&& self, FlowMask covered, int depth) -> void {
    if (covered == all) {
      best = std::min(best, depth);
      return;
    }
    const int uncovered = std::popcount(all & ~covered);
    if (depth + (uncovered + widest - 1) / widest >= best) return;
    // Branch on the uncovered flow with the fewest options.
    int pivot = -1;
    for (FlowMask m = all & ~covered; m != 0; m &= m - 1) {
      const int f = std::countr_zero(m);
      if (pivot < 0 || containing[f].size() < containing[pivot].size()) pivot = f;
    }
    std::vector<FlowMask> options = containing[pivot];
    std::stable_sort(options.begin(), options.end(), [&](FlowMask x, FlowMask y) {
      return std::popcount(x & ~covered) > std::popcount(y & ~covered);
    });
    for (FlowMask s : options) self(self, covered | s, depth + 1);
  };
  search(search, 0, 0);
  return best;
}

int s_max(const NetworkSpec& network) {
  int best = 0;
  for (const Schedule& s : network.schedules) best = std::max(best, s.size());
  return best;
}

FluidSolution fluid_solve(std::span<const double> rates, const NetworkSpec& network) {
  check_rates(rates, network);
  if (!is_partition(network))
    throw Error(Errc::not_applicable, "fluid model needs schedules that partition the flows");
  const int n = network.num_flows;
  FluidSolution out;
  out.applicable = true;
  const Eigen::VectorXd mu = solve_fluid(rates, network);
  out.mu.assign(mu.data(), mu.data() + n);

  // mu_f is affine in rate_f; the threshold is its fixed point.
  std::vector<double> probe(rates.begin(), rates.end());
  for (int f = 0; f < n; ++f) {
    probe[f] = 0.0;
    const double at0 = solve_fluid(probe, network)(f);
    probe[f] = 1.0;
    const double slope = solve_fluid(probe, network)(f) - at0;
    probe[f] = rates[f];
    out.threshold.push_back(std::abs(1.0 - slope) < 1e-15 ? kNaN : at0 / (1.0 - slope));
    out.rate_unstable.push_back(rates[f] > out.mu[f]);
  }
  return out;
}

double compute_H(double rho, int k_star, double alpha, double moment) {
  if (!(rho < 1.0)) throw Error(Errc::rho_not_admissible, "moment bound needs rho < 1");
  if (std::isinf(moment)) throw Error(Errc::infinite_moment, "E[A^(alpha+1)] is infinite");
  if (k_star < 1 || !(alpha > 0.0) || !(moment >= 0.0) || !(rho >= 0.0))
    throw Error(Errc::invalid_argument, "need k* >= 1, alpha > 0, moment >= 0, rho >= 0");
  const double c = 2.0 * k_star / (1.0 - rho);
  if (alpha <= 1.0) return c * (moment + 1.0);
  const double k = std::pow(2.0, alpha - 1.0) * alpha * (moment + 1.0);
  return std::pow(c, alpha) * std::pow(k, alpha) + c * k;
}

BoundReport moment_bound(const NetworkSpec& network, const std::vector<ArrivalSpec>& arrivals,
                           std::span<const double> alphas, double rho) {
  if (static_cast<int>(arrivals.size()) != network.num_flows ||
      static_cast<int>(alphas.size()) != network.num_flows)
    throw Error(Errc::invalid_argument, "need one arrival spec and one exponent per flow");
  const int k_star = covering_number(network);
  BoundReport out;
  for (int f = 0; f < network.num_flows; ++f) {
    const double m = moment(arrivals[f], alphas[f] + 1.0);
    if (std::isinf(m))
      throw Error(Errc::infinite_moment,
                  "flow " + std::to_string(f) + " has E[A^(alpha+1)] = inf", f);
    const double h = compute_H(rho, k_star, alphas[f], m);
    out.per_flow_H.push_back(h);
    out.per_flow_K.push_back(alphas[f] > 1.0 ? std::pow(2.0, alphas[f] - 1.0) * alphas[f] * (m + 1.0)
                                             : kNaN);
    out.total += h;
  }
  return out;
}

double bernoulli_bound(double rho, int k_star, int s_max) {
  if (!(rho < 1.0)) throw Error(Errc::rho_not_admissible, "Bernoulli bound needs rho < 1");
  return 2.0 * k_star * s_max * (1.0 + rho) / (1.0 - rho);
}

const char* flow_class_name(FlowClass c) {
  switch (c) {
    case FlowClass::heavy_tail_unstable: return "HeavyTailUnstable";
    case FlowClass::conflict_unstable: return "ConflictUnstable";
    case FlowClass::rate_unstable: return "RateUnstable";
    case FlowClass::undetermined: return "Undetermined";
  }
  return "Undetermined";
}

StabilityReport classify_flows(const NetworkSpec& network, const std::vector<ArrivalSpec>& arrivals,
                               const PolicySpec& policy) {
  const int n = network.num_flows;
  if (static_cast<int>(arrivals.size()) != n)
    throw Error(Errc::invalid_argument, "need one arrival spec per flow");
  validate_policy(policy, n);

  StabilityReport report;
  report.network = network.name;
  report.policy = policy_name(policy);
  std::vector<double> rates;
  for (const ArrivalSpec& a : arrivals) rates.push_back(rate(a));
  report.rho = traffic_intensity(rates, network);
  report.admissible = report.rho < 1.0;
  report.k_star = covering_number(network);
  report.s_max = s_max(network);

  const bool max_weight = acts_as_max_weight(policy);
  FluidSolution fluid;
  if (is_partition(network)) fluid = fluid_solve(rates, network);
  report.fluid_applicable = fluid.applicable;

  std::vector<bool> heavy(n);
  for (int f = 0; f < n; ++f) heavy[f] = is_heavy_tailed(arrivals[f]);
  const bool any_heavy = std::find(heavy.begin(), heavy.end(), true) != heavy.end();

  for (int f = 0; f < n; ++f) {
    FlowReport fr;
    fr.id = f;
    fr.rate = rates[f];
    fr.heavy_tailed = heavy[f];
    bool conflicting = false;
    for (int g = 0; g < n && !conflicting; ++g)
      conflicting = g != f && heavy[g] && conflicts(network, FlowId{f}, FlowId{g});
    if (heavy[f])
      fr.cls = FlowClass::heavy_tail_unstable;
    else if (max_weight && conflicting)
      fr.cls = FlowClass::conflict_unstable;
    else if (max_weight && any_heavy && fluid.applicable && fluid.rate_unstable[f])
      fr.cls = FlowClass::rate_unstable;
    if (fluid.applicable) {
      fr.mu = fluid.mu[f];
      fr.threshold = fluid.threshold[f];
    }
    report.flows.push_back(fr);
  }

  if (std::holds_alternative<Priority>(policy)) {
    report.moment_bound_note = "no moment bound for priority scheduling";
  } else if (!report.admissible) {
    report.moment_bound_note = "inadmissible: rho >= 1";
  } else {
    const auto alphas = policy_exponents(policy, n);
    for (int f = 0; f < n; ++f) {
      const double m = moment(arrivals[f], alphas[f] + 1.0);
      if (std::isfinite(m)) report.flows[f].H = compute_H(report.rho, report.k_star, alphas[f], m);
    }
    try {
      report.moment_bound_total = moment_bound(network, arrivals, alphas, report.rho).total;
      for (int f = 0; f < n; ++f) report.flows[f].bounded = !heavy[f] && alphas[f] >= 1.0;
    } catch (const Error& e) {
      if (e.code() != Errc::infinite_moment) throw;
      report.moment_bound_note = e.what();
    }
    const bool bernoulli = std::all_of(arrivals.begin(), arrivals.end(), [](const ArrivalSpec& a) {
      const auto* c = std::get_if<ConstantSize>(&a.size);
      return c != nullptr && c->value == 1;
    });
    if (max_weight && bernoulli)
      report.bernoulli_bound = bernoulli_bound(report.rho, report.k_star, report.s_max);
  }
  return report;
}

}  // namespace mwsched
