#include "mwsched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "mwsched/error.hpp"
#include "mwsched/presets.hpp"

namespace mwsched {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t as_slot_count(const Json& j, const char* key) {
  // Accept 1e7 as well as 10000000.
  const double x = j.at(key).get<double>();
  if (!std::isfinite(x) || x < 0 || x != std::floor(x) || x > 9.0e18)
    throw Error(Errc::config_error, std::string(key) + " must be a nonnegative integer");
  return static_cast<std::int64_t>(x);
}

std::string num(double x) { return format_number(x); }

template <typename T>
std::string join(const std::vector<T>& xs, const char* sep = ",") {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? sep : "") << xs[i];
  return os.str();
}

Json optional_number(const std::optional<double>& x) {
  return x && std::isfinite(*x) ? Json(*x) : Json(nullptr);
}

bool all_bernoulli(const std::vector<ArrivalSpec>& arrivals) {
  return std::all_of(arrivals.begin(), arrivals.end(), [](const ArrivalSpec& a) {
    const auto* c = std::get_if<ConstantSize>(&a.size);
    return c != nullptr && c->value == 1;
  });
}

// Checkpoint slots that a run of this horizon actually records.
std::vector<std::int64_t> reachable_checkpoints(const ExperimentConfig& config) {
  std::vector<std::int64_t> out;
  for (std::int64_t c : config.stats.checkpoints)
    if (c >= 1 && c <= config.horizon) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Per-replication CSV values for one flow, in header order after "flow".
std::vector<double> row_values(const SimStats& s, int f, const std::vector<std::int64_t>& ckpts) {
  std::vector<double> v;
  v.push_back(static_cast<double>(s.slots));
  v.push_back(s.mean_q(f));
  for (std::size_t i = 0; i < s.flows[f].exponents.size(); ++i) v.push_back(s.mean_q_pow(f, i));
  for (std::size_t i = 0; i < s.truncations.size(); ++i) v.push_back(s.mean_trunc_q(f, i));
  v.push_back(static_cast<double>(s.flows[f].files_completed));
  v.push_back(s.mean_delay(f));
  for (std::size_t i = 0; i < s.truncations.size(); ++i) v.push_back(s.mean_trunc_delay(f, i));
  v.push_back(s.mean_files_in_system(f));
  v.push_back(s.file_rate(f));
  try {
    v.push_back(basta_distance(s, FlowId{f}));
  } catch (const Error&) {
    v.push_back(kNaN);
  }
  for (std::int64_t slot : ckpts) {
    double value = kNaN;
    for (const Checkpoint& c : s.checkpoints)
      if (c.slot == slot) value = c.mean_q[f];
    v.push_back(value);
  }
  v.push_back(static_cast<double>(s.cycles));
  v.push_back(s.mean_cycle_length());
  return v;
}

std::optional<Trend> try_trend(const SimStats& s, int f) {
  try {
    return divergence_diagnostic(s, FlowId{f}).trend;
  } catch (const Error& e) {
    if (e.code() == Errc::too_few_checkpoints) return std::nullopt;
    throw;
  }
}

}  // namespace

std::vector<double> ExperimentConfig::rates() const {
  std::vector<double> out;
  for (const ArrivalSpec& a : arrivals) out.push_back(rate(a));
  return out;
}

ExperimentConfig config_from_preset(std::string_view name) {
  Preset p = preset(name);
  ExperimentConfig c;
  c.network = std::move(p.network);
  c.arrivals = std::move(p.arrivals);
  return c;
}

ExperimentConfig config_from_json(const Json& j) {
  try {
    ExperimentConfig c;
    if (j.contains("preset")) c = config_from_preset(j.at("preset").get<std::string>());
    if (j.contains("network")) {
      c.network = network_from_json(j.at("network"));
      c.arrivals.clear();
    }
    if (c.network.num_flows == 0) throw Error(Errc::config_error, "config needs 'preset' or 'network'");
    if (j.contains("arrivals")) {
      c.arrivals.clear();
      for (const Json& a : j.at("arrivals")) c.arrivals.push_back(arrival_from_json(a));
    }
    if (j.contains("policy")) c.policy = policy_from_json(j.at("policy"), c.network.num_flows);
    if (j.contains("horizon")) c.horizon = as_slot_count(j, "horizon");
    if (j.contains("warmup")) c.warmup = as_slot_count(j, "warmup");
    if (j.contains("replications")) c.replications = j.at("replications").get<int>();
    if (j.contains("seed")) c.base_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("checkpoints")) {
      c.stats.checkpoints.clear();
      for (const Json& x : j.at("checkpoints")) {
        const double v = x.get<double>();
        if (!(v >= 1) || v != std::floor(v)) throw Error(Errc::config_error, "checkpoints must be positive integers");
        c.stats.checkpoints.push_back(static_cast<std::int64_t>(v));
      }
    }
    if (j.contains("exponent_ladder"))
      c.stats.exponent_ladder = j.at("exponent_ladder").get<std::vector<double>>();
    if (j.contains("collection")) {
      const auto mode = j.at("collection").get<std::string>();
      if (mode != "fixed" && mode != "cycles")
        throw Error(Errc::config_error, "collection must be 'fixed' or 'cycles'");
      c.stats.cycle_start = mode == "cycles";
    }
    validate_config(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, std::string("malformed configuration: ") + e.what());
  }
}

Json config_to_json(const ExperimentConfig& c) {
  Json j = {{"network", network_to_json(c.network)},
            {"policy", policy_to_json(c.policy)},
            {"horizon", c.horizon},
            {"warmup", c.effective_warmup()},
            {"replications", c.replications},
            {"seed", c.base_seed},
            {"checkpoints", c.stats.checkpoints},
            {"exponent_ladder", c.stats.exponent_ladder},
            {"collection", c.stats.cycle_start ? "cycles" : "fixed"}};
  j["arrivals"] = Json::array();
  for (const ArrivalSpec& a : c.arrivals) j["arrivals"].push_back(arrival_to_json(a));
  return j;
}

void validate_config(const ExperimentConfig& c) {
  validate_network(c.network);
  if (static_cast<int>(c.arrivals.size()) != c.network.num_flows)
    throw Error(Errc::config_error, "need one arrival spec per flow (" +
                                        std::to_string(c.network.num_flows) + ")");
  for (const ArrivalSpec& a : c.arrivals) validate_arrival(a);
  validate_policy(c.policy, c.network.num_flows);
  if (c.replications < 1) throw Error(Errc::config_error, "replications must be >= 1");
  const std::int64_t w = c.effective_warmup();
  if (w < 0 || c.horizon <= w) throw Error(Errc::invalid_horizon, "need horizon > warmup >= 0");
  for (double e : c.stats.exponent_ladder)
    if (!(e > 0.0) || !std::isfinite(e)) throw Error(Errc::config_error, "exponent ladder entries must be positive");
}

void set_rates(ExperimentConfig& config, const std::vector<double>& rates) {
  if (rates.size() != config.arrivals.size())
    throw Error(Errc::invalid_argument, "need " + std::to_string(config.arrivals.size()) + " rates");
  for (std::size_t f = 0; f < rates.size(); ++f) config.arrivals[f] = with_rate(config.arrivals[f], rates[f]);
}

void make_heavy(ExperimentConfig& config, const std::vector<int>& flows, double tail_index) {
  for (int f : flows) {
    if (f < 0 || f >= config.network.num_flows)
      throw Error(Errc::flow_id_out_of_range, "no flow " + std::to_string(f), f);
    config.arrivals[f] = ArrivalSpec::zeta_with_rate(rate(config.arrivals[f]), tail_index);
  }
}

void scale_to_rho(ExperimentConfig& config, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(Errc::invalid_argument, "target rho must be positive");
  auto rates = config.rates();
  const double current = traffic_intensity(rates, config.network);
  for (double& r : rates) r *= rho / current;
  set_rates(config, rates);
}

StabilityReport analyze(const ExperimentConfig& config) {
  validate_config(config);
  return classify_flows(config.network, config.arrivals, config.policy);
}

Json report_to_json(const StabilityReport& r) {
  Json flows = Json::array();
  for (const FlowReport& f : r.flows) {
    flows.push_back({{"id", f.id},
                     {"class", flow_class_name(f.cls)},
                     {"rate", f.rate},
                     {"heavy_tailed", f.heavy_tailed},
                     {"mu", optional_number(f.mu)},
                     {"threshold", optional_number(f.threshold)},
                     {"H", optional_number(f.H)},
                     {"bounded", f.bounded}});
  }
  Json bounds = {{"moment_bound_total", optional_number(r.moment_bound_total)},
                 {"bernoulli", optional_number(r.bernoulli_bound)}};
  if (!r.moment_bound_note.empty()) bounds["note"] = r.moment_bound_note;
  return {{"name", r.network},
          {"policy", r.policy},
          {"rho", r.rho},
          {"admissible", r.admissible},
          {"k_star", r.k_star},
          {"s_max", r.s_max},
          {"fluid_applicable", r.fluid_applicable},
          {"flows", flows},
          {"bounds", bounds}};
}

std::string report_to_text(const StabilityReport& r) {
  std::ostringstream os;
  os << "network " << r.network << ", policy " << r.policy << "\n";
  os << "rho = " << std::setprecision(6) << r.rho << (r.admissible ? " (admissible)" : " (INADMISSIBLE)")
     << ", k* = " << r.k_star << ", S_max = " << r.s_max << "\n";
  if (!r.admissible) os << "traffic is outside the stability region; simulation will not reach steady state\n";
  os << std::left << std::setw(6) << "flow" << std::setw(10) << "rate" << std::setw(7) << "heavy"
     << std::setw(20) << "class" << std::setw(10) << "mu" << std::setw(11) << "threshold" << "H\n";
  auto opt = [](const std::optional<double>& x) { return x ? num(*x) : std::string("-"); };
  for (const FlowReport& f : r.flows) {
    std::ostringstream rate;
    rate << std::setprecision(4) << f.rate;
    std::ostringstream mu, th, h;
    if (f.mu) mu << std::setprecision(4) << *f.mu; else mu << "-";
    if (f.threshold) th << std::setprecision(4) << *f.threshold; else th << "-";
    if (f.H) h << std::setprecision(6) << *f.H; else h << "-";
    os << std::setw(6) << f.id << std::setw(10) << rate.str() << std::setw(7) << (f.heavy_tailed ? "yes" : "no")
       << std::setw(20) << flow_class_name(f.cls) << std::setw(10) << mu.str() << std::setw(11) << th.str()
       << h.str() << (f.bounded ? "  (finite mean bound)" : "") << "\n";
  }
  os << "moment bound total: " << opt(r.moment_bound_total);
  if (!r.moment_bound_note.empty()) os << " (" << r.moment_bound_note << ")";
  os << "\nBernoulli bound on sum E[Q]: " << opt(r.bernoulli_bound) << "\n";
  return os.str();
}

SimulationResult simulate(const ExperimentConfig& config, unsigned threads) {
  validate_config(config);
  const Simulation sim(config.network, config.arrivals, config.policy, config.stats);
  const int reps = config.replications;
  const std::int64_t warmup = config.effective_warmup();

  SimulationResult result;
  result.config = config;
  result.replications.resize(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < reps; i = next++) {
      try {
        result.replications[i] = sim.run(config.horizon, warmup, config.seed(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(reps));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const SimStats& s : result.replications) result.merged = merge(result.merged, s);
  return result;
}

std::string stats_csv_header(const StatsConfig& stats) {
  std::ostringstream os;
  os << "replication,seed,flow,T,mean_q,mean_q_alpha";
  for (double e : stats.exponent_ladder) os << ",mean_q_pow_" << num(e);
  for (std::int64_t m : stats.truncations) os << ",trunc_q_M" << m;
  os << ",files,mean_delay";
  for (std::int64_t m : stats.truncations) os << ",trunc_delay_M" << m;
  os << ",mean_L,p_hat,basta_dist";
  return os.str();
}

std::string simulation_csv(const SimulationResult& result) {
  const auto ckpts = reachable_checkpoints(result.config);
  std::ostringstream os;
  os << stats_csv_header(result.config.stats);
  for (std::int64_t c : ckpts) os << ",ckpt_" << c;
  os << ",cycles,mean_cycle_len\n";

  const int nf = result.config.network.num_flows;
  std::vector<std::vector<std::vector<double>>> values(nf);
  for (std::size_t r = 0; r < result.replications.size(); ++r) {
    const SimStats& s = result.replications[r];
    for (int f = 0; f < nf; ++f) {
      auto v = row_values(s, f, ckpts);
      os << r << "," << result.config.seed(static_cast<int>(r)) << "," << f;
      for (double x : v) os << "," << num(x);
      os << "\n";
      values[f].push_back(std::move(v));
    }
  }
  for (const char* kind : {"mean", "stderr"}) {
    for (int f = 0; f < nf; ++f) {
      os << kind << ",," << f;
      const std::size_t cols = values[f].front().size();
      for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> column;
        for (const auto& row : values[f]) column.push_back(row[c]);
        const MeanSe ms = mean_se(column);
        os << "," << num(kind[0] == 'm' ? ms.mean : ms.se);
      }
      os << "\n";
    }
  }
  return os.str();
}

Json checkpoints_json(const SimulationResult& result) {
  Json cps = Json::array();
  for (const Checkpoint& c : result.merged.checkpoints)
    cps.push_back({{"seed", c.replication}, {"slot", c.slot}, {"mean_q", c.mean_q}});
  Json diags = Json::array();
  for (int f = 0; f < result.config.network.num_flows; ++f) {
    Json d = {{"flow", f}};
    try {
      const Diagnostic dg = divergence_diagnostic(result.merged, FlowId{f});
      d["trend"] = trend_name(dg.trend);
      d["slots"] = dg.slots;
      d["means"] = dg.means;
      d["ratios"] = dg.ratios;
      d["overall"] = dg.overall;
      Json per = Json::array();
      for (const SimStats& s : result.replications)
        per.push_back(trend_name(divergence_diagnostic(s, FlowId{f}).trend));
      d["replication_trends"] = per;
    } catch (const Error& e) {
      if (e.code() != Errc::too_few_checkpoints) throw;
      d["trend"] = nullptr;
      d["error"] = e.what();
    }
    diags.push_back(d);
  }
  return {{"config", config_to_json(result.config)}, {"checkpoints", cps}, {"diagnostics", diags}};
}

std::string simulation_summary(const SimulationResult& result) {
  std::ostringstream os;
  const SimStats& m = result.merged;
  os << result.config.network.name << ", " << policy_name(result.config.policy) << ", "
     << result.replications.size() << " replication(s) x " << m.slots / result.replications.size()
     << " collected slots\n";
  os << std::left << std::setw(6) << "flow" << std::setw(24) << "mean_q (se)" << std::setw(14) << "mean_delay"
     << std::setw(12) << "little" << std::setw(12) << "basta" << "trend\n";
  for (int f = 0; f < m.num_flows(); ++f) {
    std::vector<double> qs;
    for (const SimStats& s : result.replications) qs.push_back(s.mean_q(f));
    const MeanSe ms = mean_se(qs);
    std::ostringstream q, d, little, basta;
    q << std::setprecision(5) << ms.mean << " (" << std::setprecision(2) << ms.se << ")";
    d << std::setprecision(5) << m.mean_delay(f);
    try {
      little << std::setprecision(3) << littles_law_residual(m, FlowId{f});
    } catch (const Error&) {
      little << "-";
    }
    try {
      basta << std::setprecision(3) << basta_distance(m, FlowId{f});
    } catch (const Error&) {
      basta << "-";
    }
    std::string trend = "-";
    if (auto t = try_trend(m, f)) {
      int diverging = 0;
      for (const SimStats& s : result.replications)
        if (try_trend(s, f) == Trend::diverging) ++diverging;
      trend = std::string(trend_name(*t)) + " (" + std::to_string(diverging) + "/" +
              std::to_string(result.replications.size()) + " reps diverging)";
    }
    os << std::setw(6) << f << std::setw(24) << q.str() << std::setw(14) << d.str() << std::setw(12)
       << little.str() << std::setw(12) << basta.str() << trend << "\n";
  }
  if (m.cycles > 0) os << "regeneration cycles: " << m.cycles << ", mean length " << m.mean_cycle_length() << "\n";
  return os.str();
}

SweepResult sweep(const ExperimentConfig& config, const SweepSpec& spec, unsigned threads) {
  validate_config(config);
  if (spec.values.empty()) throw Error(Errc::config_error, "sweep needs at least one value");
  if (spec.kind == SweepSpec::Kind::flow_rate && (spec.flow < 0 || spec.flow >= config.network.num_flows))
    throw Error(Errc::flow_id_out_of_range, "no flow " + std::to_string(spec.flow), spec.flow);

  SweepResult out;
  out.spec = spec;
  for (double v : spec.values) {
    ExperimentConfig c = config;
    if (spec.kind == SweepSpec::Kind::rho) {
      scale_to_rho(c, v);
    } else {
      auto rates = c.rates();
      rates[spec.flow] = v;
      set_rates(c, rates);
    }
    SweepPoint p;
    p.value = v;
    p.rho = traffic_intensity(c.rates(), c.network);
    p.result = simulate(c, threads);
    for (int f = 0; f < c.network.num_flows; ++f)
      p.trend.push_back(try_trend(p.result.merged, f).value_or(Trend::inconclusive));
    if (acts_as_max_weight(c.policy) && all_bernoulli(c.arrivals) && p.rho < 1.0)
      p.bernoulli_bound = bernoulli_bound(p.rho, covering_number(c.network), s_max(c.network));
    if (spec.kind == SweepSpec::Kind::flow_rate) {
      try {
        p.threshold = fluid_solve(c.rates(), c.network).threshold[spec.flow];
      } catch (const Error& e) {
        if (e.code() != Errc::not_applicable) throw;
      }
    }
    out.points.push_back(std::move(p));
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "point,sweep_kind,sweep_value,rho,flow,mean_q,mean_q_se,mean_q_alpha,mean_delay,trend,"
        "bernoulli_bound,fluid_threshold\n";
  const char* kind = result.spec.kind == SweepSpec::Kind::rho ? "rho" : "flow_rate";
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const SweepPoint& p = result.points[i];
    const SimStats& m = p.result.merged;
    const auto prefix = std::to_string(i) + "," + kind + "," + num(p.value) + "," + num(p.rho) + ",";
    const std::string tail = "," + (p.bernoulli_bound ? num(*p.bernoulli_bound) : std::string("nan")) + "," +
                             (p.threshold ? num(*p.threshold) : std::string("nan"));
    std::vector<double> totals(p.result.replications.size(), 0.0);
    for (int f = 0; f < m.num_flows(); ++f) {
      std::vector<double> qs;
      for (std::size_t r = 0; r < p.result.replications.size(); ++r) {
        qs.push_back(p.result.replications[r].mean_q(f));
        totals[r] += qs.back();
      }
      os << prefix << f << "," << num(m.mean_q(f)) << "," << num(mean_se(qs).se) << ","
         << num(m.mean_q_pow(f)) << "," << num(m.mean_delay(f)) << "," << trend_name(p.trend[f]) << tail << "\n";
    }
    double total = 0.0;
    for (int f = 0; f < m.num_flows(); ++f) total += m.mean_q(f);
    os << prefix << "total," << num(total) << "," << num(mean_se(totals).se) << ",nan,nan," << tail
       << "\n";
  }
  return os.str();
}

double loglog_slope(const SweepResult& result) {
  if (result.spec.kind != SweepSpec::Kind::rho || result.points.size() < 2)
    throw Error(Errc::invalid_argument, "log-log slope needs a rho sweep with two or more points");
  std::vector<double> xs, ys;
  for (const SweepPoint& p : result.points) {
    double total = 0.0;
    for (int f = 0; f < p.result.merged.num_flows(); ++f) total += p.result.merged.mean_q(f);
    xs.push_back(std::log(1.0 / (1.0 - p.rho)));
    ys.push_back(std::log(total));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

std::string sweep_summary(const SweepResult& result) {
  std::ostringstream os;
  const bool rho = result.spec.kind == SweepSpec::Kind::rho;
  os << (rho ? "rho sweep" : "rate sweep of flow " + std::to_string(result.spec.flow)) << "\n";
  os << std::left << std::setw(10) << "value" << std::setw(10) << "rho" << std::setw(14) << "sum mean_q"
     << std::setw(14) << "bound" << "trends\n";
  for (const SweepPoint& p : result.points) {
    double total = 0.0;
    std::vector<std::string> trends;
    for (int f = 0; f < p.result.merged.num_flows(); ++f) {
      total += p.result.merged.mean_q(f);
      trends.emplace_back(trend_name(p.trend[f]));
    }
    std::ostringstream v, r, t, b;
    v << std::setprecision(4) << p.value;
    r << std::setprecision(4) << p.rho;
    t << std::setprecision(5) << total;
    if (p.bernoulli_bound) b << std::setprecision(5) << *p.bernoulli_bound; else b << "-";
    os << std::setw(10) << v.str() << std::setw(10) << r.str() << std::setw(14) << t.str() << std::setw(14)
       << b.str() << join(trends, " ");
    if (p.threshold) os << "  (fluid threshold " << std::setprecision(4) << *p.threshold << ")";
    os << "\n";
  }
  if (rho && result.points.size() >= 2)
    os << "log-log slope of sum mean_q vs 1/(1-rho): " << std::setprecision(4) << loglog_slope(result) << "\n";
  return os.str();
}

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) return {kNaN, kNaN};
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x / n;
  if (xs.size() < 2) {
    out.se = kNaN;
    return out;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

}  // namespace mwsched
