#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rtmw/document.hpp"
#include "rtmw/simulator.hpp"
#include "rtmw/trace.hpp"

namespace rtmw {

// Front-end commands. Each returns the process exit status and writes its
// human-readable output to `out`; errors are thrown as rtmw::Error.

struct ValidateResult {
  std::vector<Diagnostic> diagnostics;
  std::string summary;  // "OK, 4 tasks, ..." or "FAILED, n errors"
  bool ok() const;
};

ValidateResult validate_document(const TaskSetDocument& doc);
int cmd_validate(const std::string& path, std::ostream& out, bool json = false);

struct SimulateOptions {
  std::optional<Nanos> horizon;
  std::uint64_t seed = 0;
  std::string trace_path;
  std::string report_path;
  VersionMode version_mode = VersionMode::kBoth;
};

SimResult simulate_document(const TaskSetDocument& doc, const SimulateOptions& options);
int cmd_simulate(const std::string& path, const SimulateOptions& options, std::ostream& out);

std::string report_to_json(const RunReport& report);
void print_summary(const RunReport& report, std::ostream& out);

struct PolicyPoint {
  MappingScheme mapping = MappingScheme::kGlobal;
  PriorityAssignment priority = PriorityAssignment::kEDF;
};

// Parses "G-EDF", "P-DM", ... (case-insensitive).
std::optional<PolicyPoint> parse_policy(std::string_view s);
std::string policy_name(const PolicyPoint& p);

// Empty axes fall back to the document's own setting.
struct SweepSpec {
  std::vector<PolicyPoint> policies;
  std::vector<bool> preemptive;
  std::vector<VersionMode> version_modes;
  std::uint32_t repetitions = 1;
  std::optional<Nanos> horizon;
  std::uint64_t seed = 0;
};

struct SweepScenario {
  std::string name;
  TaskSetDocument document;
};

struct SweepRun {
  std::string scenario;
  std::string policy;
  bool preemptive = true;
  VersionMode version_mode = VersionMode::kBoth;
  std::uint32_t repetition = 0;
  RunReport report;
};

// Enumerates scenario x policy x preemptive x version mode x repetition in
// that nesting order. Throws ConfigError naming the first invalid point.
std::vector<SweepRun> run_sweep(const std::vector<SweepScenario>& scenarios, const SweepSpec& spec);

// Metric name/value pairs written for one run.
std::vector<std::pair<std::string, double>> run_metrics(const RunReport& report);

// Long format: scenario,policy,preemptive,version_mode,repetition,metric,value.
void write_sweep_csv(const std::vector<SweepRun>& runs, std::ostream& out);

// Fewest misses, then lowest mean response.
const SweepRun* best_run(const std::vector<SweepRun>& runs);

int cmd_sweep(const std::vector<std::string>& paths, const SweepSpec& spec, const std::string& out_dir,
              std::ostream& out);

int cmd_expand_sdf(const std::string& path, const std::string& out_path, std::ostream& out);

struct LatencyOptions {
  std::int64_t threads = 1;
  // Activation interval in microseconds.
  std::int64_t interval_us = 10'000;
  std::int64_t loops = 1'000;
  PolicyPoint policy;
  bool allow_oversubscription = false;
  bool realtime_priority = true;
  bool lock_memory = true;
  bool pin_threads = true;
};

struct LatencyReport {
  std::vector<Stats> per_thread;
  Stats pooled;
  std::vector<std::string> warnings;
};

// n periodic tasks with empty bodies on n workers; latency of a job is its
// start minus its theoretical release. Throws ConfigError when the host
// lacks processors and oversubscription is not allowed.
LatencyReport run_latency(const LatencyOptions& options);
void print_latency(const LatencyReport& report, std::ostream& out);
int cmd_latency(const LatencyOptions& options, std::ostream& out);

}  // namespace rtmw
