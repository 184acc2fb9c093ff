// mwsched-cli: analyze | simulate | sweep. Talks to the library only through
// the C API.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwsched/mwsched.h"

namespace {

struct Failure {
  mws_status status;
  std::string message;
};

void check(mws_status s) {
  if (s != MWS_OK) throw Failure{s, mws_last_error_message()};
}

[[noreturn]] void config_failure(const std::string& message) { throw Failure{MWS_CONFIG_ERROR, message}; }

// Owns a string returned by the library.
std::string take(char* s) {
  std::string out(s ? s : "");
  mws_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Experiment = std::unique_ptr<mws_experiment, Deleter<mws_experiment, mws_experiment_free>>;
using Report = std::unique_ptr<mws_report, Deleter<mws_report, mws_report_free>>;
using Simulation = std::unique_ptr<mws_simulation, Deleter<mws_simulation, mws_simulation_free>>;
using Sweep = std::unique_ptr<mws_sweep, Deleter<mws_sweep, mws_sweep_free>>;

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) config_failure("empty entry in list '" + text + "'");
    out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) config_failure("not a number: '" + s + "'");
  return x;
}

// Integer slot counts, accepting forms like 1e7.
std::int64_t parse_count(const std::string& s) {
  const double x = parse_double(s);
  if (!std::isfinite(x) || x < 0 || x != std::floor(x) || x > 9.0e18)
    config_failure("not a nonnegative integer: '" + s + "'");
  return static_cast<std::int64_t>(x);
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s)) out.push_back(parse_double(item));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s)) {
    const std::int64_t v = parse_count(item);
    if (v > 1'000'000) config_failure("flow index too large: " + item);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{MWS_CONFIG_ERROR, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{MWS_IO_ERROR, "cannot write " + path.string()};
}

unsigned thread_cap() {
  const char* env = std::getenv("MWSCHED_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) config_failure("MWSCHED_THREADS must be a positive integer");
  return static_cast<unsigned>(n);
}

struct Options {
  std::string preset;
  std::string config;
  std::string rates;
  std::optional<double> rho;
  std::string policy;
  std::string alphas;
  std::string order;
  std::string heavy;
  std::string horizon;
  std::string warmup;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::string checkpoints;
  std::string collection;
  std::string out = ".";
  // sweep
  std::string sweep_rho;
  std::optional<int> sweep_flow;
  std::string sweep_values;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--preset", o.preset, "named scenario, e.g. fig1, parallel4, switch3, grid3");
  cmd->add_option("--config", o.config, "JSON experiment file");
  cmd->add_option("--rates", o.rates, "per-flow rates; with --rho only the direction is used");
  cmd->add_option("--rho", o.rho, "scale rates to this traffic intensity");
  cmd->add_option("--policy", o.policy, "mw | mwalpha | priority");
  cmd->add_option("--alphas", o.alphas, "per-flow exponents for mwalpha");
  cmd->add_option("--order", o.order, "flows by decreasing priority");
  cmd->add_option("--heavy", o.heavy, "flows given zeta(1.5) file sizes at the same rate");
  cmd->add_option("--horizon", o.horizon, "slots to simulate (1e7 accepted)");
  cmd->add_option("--warmup", o.warmup, "slots discarded before collecting statistics");
  cmd->add_option("--replications", o.replications, "independent replications");
  cmd->add_option("--seed", o.seed, "base seed; replication i uses seed + i");
  cmd->add_option("--checkpoints", o.checkpoints, "slots at which running means are recorded");
  cmd->add_option("--collection", o.collection, "fixed (after warmup) | cycles (from the first empty slot after it)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

Experiment build_experiment(const Options& o) {
  if (o.preset.empty() == o.config.empty()) config_failure("give exactly one of --preset or --config");
  mws_experiment* raw = nullptr;
  if (!o.preset.empty())
    check(mws_experiment_from_preset(o.preset.c_str(), &raw));
  else
    check(mws_experiment_from_json(read_file(o.config).c_str(), &raw));
  Experiment e(raw);

  if (!o.rates.empty()) {
    const auto r = parse_doubles(o.rates);
    check(mws_experiment_set_rates(e.get(), r.data(), r.size()));
  }
  if (!o.heavy.empty()) {
    const auto flows = parse_ints(o.heavy);
    check(mws_experiment_set_heavy(e.get(), flows.data(), flows.size(), 1.5));
  }
  if (o.rho) check(mws_experiment_scale_to_rho(e.get(), *o.rho));

  if (!o.policy.empty()) {
    if (o.policy == "mw" || o.policy == "maxweight") {
      check(mws_experiment_set_max_weight(e.get()));
    } else if (o.policy == "mwalpha") {
      if (o.alphas.empty()) config_failure("--policy mwalpha needs --alphas");
      const auto a = parse_doubles(o.alphas);
      check(mws_experiment_set_max_weight_alpha(e.get(), a.data(), a.size()));
    } else if (o.policy == "priority") {
      if (o.order.empty()) config_failure("--policy priority needs --order");
      const auto ord = parse_ints(o.order);
      check(mws_experiment_set_priority(e.get(), ord.data(), ord.size()));
    } else {
      config_failure("unknown policy '" + o.policy + "'");
    }
  } else if (!o.alphas.empty() || !o.order.empty()) {
    config_failure("--alphas/--order need --policy");
  }

  if (!o.horizon.empty() || !o.warmup.empty()) {
    const std::int64_t horizon = o.horizon.empty() ? mws_experiment_horizon(e.get()) : parse_count(o.horizon);
    const std::int64_t warmup = o.warmup.empty() ? -1 : parse_count(o.warmup);
    check(mws_experiment_set_horizon(e.get(), horizon, warmup));
  }
  if (o.replications || o.seed) {
    check(mws_experiment_set_replications(e.get(), o.replications.value_or(mws_experiment_replications(e.get())),
                                          o.seed.value_or(mws_experiment_base_seed(e.get()))));
  }
  if (!o.checkpoints.empty()) {
    std::vector<std::int64_t> slots;
    for (const auto& item : split(o.checkpoints)) slots.push_back(parse_count(item));
    check(mws_experiment_set_checkpoints(e.get(), slots.data(), slots.size()));
  }
  if (!o.collection.empty()) {
    if (o.collection != "fixed" && o.collection != "cycles") config_failure("--collection must be fixed or cycles");
    check(mws_experiment_set_cycle_start(e.get(), o.collection == "cycles"));
  }
  return e;
}

std::filesystem::path out_dir(const Options& o) {
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) throw Failure{MWS_IO_ERROR, "cannot create " + o.out + ": " + ec.message()};
  return o.out;
}

void cmd_analyze(const Options& o) {
  const Experiment e = build_experiment(o);
  mws_report* raw = nullptr;
  check(mws_analyze(e.get(), &raw));
  const Report r(raw);
  char* s = nullptr;
  check(mws_report_to_json(r.get(), &s));
  write_file(out_dir(o) / "report.json", take(s) + "\n");
  check(mws_report_to_text(r.get(), &s));
  std::cout << take(s);
}

void cmd_simulate(const Options& o) {
  const Experiment e = build_experiment(o);
  mws_simulation* raw = nullptr;
  check(mws_simulate(e.get(), thread_cap(), &raw));
  const Simulation sim(raw);
  const auto dir = out_dir(o);
  char* s = nullptr;
  check(mws_simulation_csv(sim.get(), &s));
  write_file(dir / "stats.csv", take(s));
  check(mws_simulation_checkpoints_json(sim.get(), &s));
  write_file(dir / "checkpoints.json", take(s) + "\n");
  check(mws_simulation_summary(sim.get(), &s));
  std::cout << take(s);
}

void cmd_sweep(const Options& o) {
  const Experiment e = build_experiment(o);
  mws_sweep* raw = nullptr;
  if (!o.sweep_rho.empty() == o.sweep_flow.has_value())
    config_failure("give either --sweep-rho or --sweep-flow with --sweep-values");
  if (!o.sweep_rho.empty()) {
    const auto v = parse_doubles(o.sweep_rho);
    check(mws_sweep_rho(e.get(), v.data(), v.size(), thread_cap(), &raw));
  } else {
    if (o.sweep_values.empty()) config_failure("--sweep-flow needs --sweep-values");
    const auto v = parse_doubles(o.sweep_values);
    check(mws_sweep_flow_rate(e.get(), *o.sweep_flow, v.data(), v.size(), thread_cap(), &raw));
  }
  const Sweep sw(raw);
  char* s = nullptr;
  check(mws_sweep_to_csv(sw.get(), &s));
  write_file(out_dir(o) / "sweep.csv", take(s));
  check(mws_sweep_summary(sw.get(), &s));
  std::cout << take(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-Weight scheduling: stability analysis and slotted-time simulation"};
  app.require_subcommand(1);
  Options o;
  auto* analyze = app.add_subcommand("analyze", "classify flows and evaluate moment bounds; writes report.json");
  auto* simulate = app.add_subcommand("simulate", "run replications; writes stats.csv and checkpoints.json");
  auto* sweep = app.add_subcommand("sweep", "simulate over a range of rho or one flow's rate; writes sweep.csv");
  for (auto* cmd : {analyze, simulate, sweep}) add_common(cmd, o);
  sweep->add_option("--sweep-rho", o.sweep_rho, "traffic intensities, all rates scaled together");
  sweep->add_option("--sweep-flow", o.sweep_flow, "flow whose rate is varied");
  sweep->add_option("--sweep-values", o.sweep_values, "rates for --sweep-flow");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed()) cmd_analyze(o);
    if (simulate->parsed()) cmd_simulate(o);
    if (sweep->parsed()) cmd_sweep(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << mws_status_name(f.status) << ": " << f.message << "\n";
    return mws_status_exit_code(f.status);
  }
  return 0;
}
