#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace mwsched {

// Numeric values are shared with mws_status in the C API header.
enum class Errc : int {
  invalid_argument = 1,
  empty_schedule = 2,
  flow_never_served = 3,
  flow_id_out_of_range = 4,
  too_many_flows = 5,
  unknown_preset = 6,
  preset_too_large = 7,
  invalid_horizon = 8,
  config_mismatch = 9,
  no_completed_files = 10,
  empty_histogram = 11,
  too_few_checkpoints = 12,
  instance_too_large = 13,
  not_applicable = 14,
  singular_system = 15,
  infinite_moment = 16,
  rho_not_admissible = 17,
  config_error = 18,
  io_error = 19,
  internal = 20,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<int> flow = std::nullopt)
      : std::runtime_error(what), code_(code), flow_(flow) {}

  Errc code() const noexcept { return code_; }
  // Offending flow, when the error is about a specific one.
  std::optional<int> flow() const noexcept { return flow_; }

 private:
  Errc code_;
  std::optional<int> flow_;
};

}  // namespace mwsched
