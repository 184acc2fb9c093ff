#include "mwsched/error.hpp"

namespace mwsched {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::empty_schedule: return "EmptySchedule";
    case Errc::flow_never_served: return "FlowNeverServed";
    case Errc::flow_id_out_of_range: return "FlowIdOutOfRange";
    case Errc::too_many_flows: return "TooManyFlows";
    case Errc::unknown_preset: return "UnknownPreset";
    case Errc::preset_too_large: return "PresetTooLarge";
    case Errc::invalid_horizon: return "InvalidHorizon";
    case Errc::config_mismatch: return "ConfigMismatch";
    case Errc::no_completed_files: return "NoCompletedFiles";
    case Errc::empty_histogram: return "EmptyHistogram";
    case Errc::too_few_checkpoints: return "TooFewCheckpoints";
    case Errc::instance_too_large: return "InstanceTooLarge";
    case Errc::not_applicable: return "NotApplicable";
    case Errc::singular_system: return "SingularSystem";
    case Errc::infinite_moment: return "InfiniteMoment";
    case Errc::rho_not_admissible: return "RhoNotAdmissible";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace mwsched
