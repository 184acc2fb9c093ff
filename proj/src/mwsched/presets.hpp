#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mwsched/arrivals.hpp"
#include "mwsched/model.hpp"

namespace mwsched {

struct Preset {
  NetworkSpec network;
  std::vector<ArrivalSpec> arrivals;
};

// Named topologies:
//   parallel<n> / parallel(n)  n queues, one server
//   fig1                       parallel(2); flow 0 heavy (zeta 1.5, p=0.1), flow 1 Bernoulli 0.3
//   fig2                       {0} vs {1,2}; flow 0 heavy
//   fig3                       {0,1} vs {2}; flow 0 heavy at rate 0.3, rates (0.3, 0.6, 0.3)
//   switch2x2                  2x2 switch, flow (1,1) heavy; flows ordered (1,1),(1,2),(2,1),(2,2)
//   switch<n> / switch(n)      n x n switch, all n! matchings, n <= 5; flow (i,j) -> i*n+j
//   ring6                      six-link ring under two-hop interference, flow 0 heavy
//   grid<n> / grid(n)          n x n node grid, one-hop interference, all maximal matchings
// Default arrivals are admissible.
Preset preset(std::string_view name);

std::vector<std::string> preset_names();

}  // namespace mwsched
