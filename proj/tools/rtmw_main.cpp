#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rtmw/error.hpp"
#include "rtmw/explorer.hpp"

namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("RT_YASMIN_SEED");
  if (!env || !*env) return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw rtmw::UsageError(std::string("RT_YASMIN_SEED is not an unsigned integer: '") + env + "'");
  }
}

template <typename T, typename F>
std::vector<T> parse_list(const std::vector<std::string>& items, F parse, const char* what) {
  std::vector<T> out;
  for (const auto& s : items) {
    auto v = parse(s);
    if (!v) throw rtmw::UsageError(std::string("unknown ") + what + " '" + s + "'");
    out.push_back(*v);
  }
  return out;
}

std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time scheduling middleware explorer"};
  app.require_subcommand(1);

  std::string file;
  bool json = false;
  auto* validate = app.add_subcommand("validate", "Check a task-set document without running it");
  validate->add_option("file", file, "Task-set document")->required();
  validate->add_flag("--json", json, "Machine-readable diagnostics");

  std::string horizon;
  std::optional<std::uint64_t> seed;
  std::string version_mode = "both";
  rtmw::SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run the discrete-event simulator");
  simulate->add_option("file", file, "Task-set document")->required();
  simulate->add_option("--horizon", horizon, "Release horizon, e.g. 10s (default: one hyperperiod)");
  simulate->add_option("--seed", seed, "Seed (default: $RT_YASMIN_SEED or 0)");
  simulate->add_option("--trace", sim.trace_path, "Trace CSV output");
  simulate->add_option("--report", sim.report_path, "Report JSON output");
  simulate->add_option("--versions", version_mode, "cpu, gpu or both");

  std::vector<std::string> files;
  std::vector<std::string> policies;
  std::vector<std::string> preemptive;
  std::vector<std::string> modes;
  std::uint32_t repetitions = 1;
  std::string out_dir;
  auto* sweep = app.add_subcommand("sweep", "Simulate every point of a policy cross product");
  sweep->add_option("files", files, "Task-set documents (one scenario each)")->required();
  sweep->add_option("--policies", policies, "e.g. G-EDF,G-DM,P-EDF,P-DM")->delimiter(',');
  sweep->add_option("--preemptive", preemptive, "true,false")->delimiter(',');
  sweep->add_option("--versions", modes, "cpu,gpu,both")->delimiter(',');
  sweep->add_option("--repetitions", repetitions, "Runs per point, seeds seed..seed+n-1");
  sweep->add_option("--horizon", horizon, "Release horizon per run");
  sweep->add_option("--seed", seed, "Base seed (default: $RT_YASMIN_SEED or 0)");
  sweep->add_option("--out", out_dir, "Directory for sweep.csv (default: stdout)");

  std::string dag_out;
  auto* expand = app.add_subcommand("expand-sdf", "Expand the sdf section into a task graph");
  expand->add_option("file", file, "Document with an sdf section")->required();
  expand->add_option("--out", dag_out, "Expanded document (default: stdout)");

  rtmw::LatencyOptions lat;
  std::string policy = "G-EDF";
  auto* latency = app.add_subcommand("latency", "Measure wake-up latency on the real-time backend");
  latency->add_option("--threads", lat.threads, "Periodic threads");
  latency->add_option("--interval", lat.interval_us, "Activation interval in microseconds");
  latency->add_option("--loops", lat.loops, "Activations per thread");
  latency->add_option("--policy", policy, "G-EDF, P-RM, ...");
  latency->add_flag("--allow-oversubscription", lat.allow_oversubscription, "Run with fewer processors than threads");
  latency->add_flag("!--no-rt-priority", lat.realtime_priority, "Do not request SCHED_FIFO");
  latency->add_flag("!--no-mlock", lat.lock_memory, "Do not lock memory");
  latency->add_flag("!--no-pin", lat.pin_threads, "Do not pin threads");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::uint64_t seed_value = seed ? *seed : default_seed();
    std::optional<rtmw::Nanos> horizon_ns;
    if (!horizon.empty()) horizon_ns = rtmw::parse_duration(horizon);

    if (*validate) return rtmw::cmd_validate(file, std::cout, json);
    if (*simulate) {
      sim.horizon = horizon_ns;
      sim.seed = seed_value;
      auto vm = rtmw::parse_version_mode(version_mode);
      if (!vm) throw rtmw::UsageError("unknown version mode '" + version_mode + "'");
      sim.version_mode = *vm;
      return rtmw::cmd_simulate(file, sim, std::cout);
    }
    if (*sweep) {
      rtmw::SweepSpec spec;
      spec.policies = parse_list<rtmw::PolicyPoint>(policies, rtmw::parse_policy, "policy");
      spec.preemptive = parse_list<bool>(preemptive, parse_bool, "preemptive value");
      spec.version_modes = parse_list<rtmw::VersionMode>(modes, rtmw::parse_version_mode, "version mode");
      spec.repetitions = repetitions;
      spec.horizon = horizon_ns;
      spec.seed = seed_value;
      return rtmw::cmd_sweep(files, spec, out_dir, std::cout);
    }
    if (*expand) return rtmw::cmd_expand_sdf(file, dag_out, std::cout);
    if (*latency) {
      auto p = rtmw::parse_policy(policy);
      if (!p) throw rtmw::UsageError("unknown policy '" + policy + "'");
      lat.policy = *p;
      return rtmw::cmd_latency(lat, std::cout);
    }
  } catch (const rtmw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
