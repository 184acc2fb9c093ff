#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwsched/arrivals.hpp"
#include "mwsched/model.hpp"
#include "mwsched/scheduling.hpp"

namespace mwsched {

// ---- traffic intensity -------------------------------------------------------

struct IntensitySolution {
  double rho = 0.0;
  std::vector<double> zeta;  // weight per schedule, sum equals rho
};

// min sum_s zeta_s subject to sum_s zeta_s s_f >= rate_f, zeta >= 0. Solved
// through its dual (max rate.y s.t. sum_{f in s} y_f <= 1) by a dictionary
// simplex with Bland's rule; zeta is read off the final reduced costs.
IntensitySolution traffic_intensity_lp(std::span<const double> rates, const NetworkSpec& network);
double traffic_intensity(std::span<const double> rates, const NetworkSpec& network);

// ---- structure ---------------------------------------------------------------

// Minimum number of schedules whose union is every flow. Exact branch and
// bound; more than 10^4 schedules throws InstanceTooLarge.
int covering_number(const NetworkSpec& network);

// Largest schedule.
int s_max(const NetworkSpec& network);

// ---- fluid model -------------------------------------------------------------

struct FluidSolution {
  bool applicable = false;
  std::vector<double> mu;          // fluid departure rate per flow
  std::vector<double> threshold;   // rate above which the flow overloads, others fixed
  std::vector<bool> rate_unstable; // rate_f > mu_f
};

// Schedules must partition the flows, otherwise NotApplicable. Solves the
// equal-drift / work-conservation / equal-service system for mu.
FluidSolution fluid_solve(std::span<const double> rates, const NetworkSpec& network);

// ---- moment bounds -----------------------------------------------------------

// Piecewise bound for one flow given rho, k*, its exponent and E[A^(alpha+1)].
double compute_H(double rho, int k_star, double alpha, double moment);

struct BoundReport {
  std::vector<double> per_flow_H;
  std::vector<double> per_flow_K;  // NaN where alpha <= 1
  double total = 0.0;
};

BoundReport moment_bound(const NetworkSpec& network, const std::vector<ArrivalSpec>& arrivals,
                           std::span<const double> alphas, double rho);

// Bound on sum E[Q_f] under Max-Weight with Bernoulli arrivals.
double bernoulli_bound(double rho, int k_star, int s_max);

// ---- classification ----------------------------------------------------------

enum class FlowClass { heavy_tail_unstable, conflict_unstable, rate_unstable, undetermined };

const char* flow_class_name(FlowClass c);

struct FlowReport {
  int id = 0;
  double rate = 0.0;
  bool heavy_tailed = false;
  FlowClass cls = FlowClass::undetermined;
  std::optional<double> mu;
  std::optional<double> threshold;
  std::optional<double> H;  // finite per-flow moment bound, if any
  // Light flow under Max-Weight-alpha whose whole moment bound is finite.
  bool bounded = false;
};

struct StabilityReport {
  std::string network;
  std::string policy;
  double rho = 0.0;
  bool admissible = false;
  int k_star = 0;
  int s_max = 0;
  bool fluid_applicable = false;
  std::vector<FlowReport> flows;
  std::optional<double> moment_bound_total;
  std::string moment_bound_note;  // why the total is missing
  std::optional<double> bernoulli_bound;
};

StabilityReport classify_flows(const NetworkSpec& network, const std::vector<ArrivalSpec>& arrivals,
                               const PolicySpec& policy);

}  // namespace mwsched
