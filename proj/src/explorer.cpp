#include "rtmw/explorer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "rtmw/error.hpp"
#include "rtmw/realtime.hpp"

namespace rtmw {

using nlohmann::json;

namespace {

std::string_view severity_name(const Diagnostic& d) { return d.error() ? "error" : "warning"; }

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string us(double ns) { return fixed(ns / 1000.0, 1); }

json stats_json(const Stats& s) {
  return {{"count", s.count}, {"min_ns", s.min}, {"max_ns", s.max}, {"mean_ns", s.mean()}, {"total_ns", s.total}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
  if (!f) throw UsageError("write failed for '" + path + "'");
}

}  // namespace

bool ValidateResult::ok() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.error(); });
}

ValidateResult validate_document(const TaskSetDocument& doc) {
  ValidateResult r;
  std::unique_ptr<Middleware> mw;
  try {
    BuiltModel built = build_model(doc);
    r.diagnostics = std::move(built.diagnostics);
    auto more = built.middleware->validate();
    r.diagnostics.insert(r.diagnostics.end(), more.begin(), more.end());
    mw = std::move(built.middleware);
  } catch (const Error& e) {
    r.diagnostics.push_back({Diagnostic::Severity::kError, e.what()});
  }
  if (r.ok() && mw) {
    const TaskSet& ts = mw->task_set();
    r.summary = "OK, " + std::to_string(ts.tasks.size()) + " tasks, " + std::to_string(ts.channels.size()) + " channels";
    for (const auto& t : ts.tasks) {
      if (t.versions.size() > 1) r.summary += ", " + std::to_string(t.versions.size()) + " versions on task " + t.name;
    }
  } else {
    auto n = std::count_if(r.diagnostics.begin(), r.diagnostics.end(), [](const Diagnostic& d) { return d.error(); });
    r.summary = "FAILED, " + std::to_string(n) + (n == 1 ? " error" : " errors");
  }
  return r;
}

int cmd_validate(const std::string& path, std::ostream& out, bool as_json) {
  ValidateResult r;
  try {
    r = validate_document(load_document(path));
  } catch (const Error& e) {
    r.diagnostics.push_back({Diagnostic::Severity::kError, e.what()});
    r.summary = "FAILED, 1 error";
  }
  if (as_json) {
    json diags = json::array();
    for (const auto& d : r.diagnostics) diags.push_back({{"severity", severity_name(d)}, {"message", d.message}});
    out << json{{"ok", r.ok()}, {"summary", r.summary}, {"diagnostics", std::move(diags)}}.dump(2) << "\n";
  } else {
    for (const auto& d : r.diagnostics) out << severity_name(d) << ": " << d.message << "\n";
    out << r.summary << "\n";
  }
  return r.ok() ? 0 : 1;
}

SimResult simulate_document(const TaskSetDocument& doc, const SimulateOptions& options) {
  BuiltModel built = build_model(doc, options.version_mode);
  SimOptions so;
  so.horizon = options.horizon;
  so.seed = options.seed;
  SimResult result = run_simulation(*built.middleware, built.sim_model, so);
  for (const auto& d : built.diagnostics) result.report.warnings.push_back(d.message);
  return result;
}

std::string report_to_json(const RunReport& r) {
  json tasks = json::array();
  for (const auto& t : r.tasks) {
    tasks.push_back({{"name", t.name},
                     {"released", t.released},
                     {"completed", t.completed},
                     {"misses", t.misses},
                     {"response", stats_json(t.response)}});
  }
  const auto& o = r.overheads;
  json overheads = {{"get_task", stats_json(o.get_task)},
                    {"scheduling", stats_json(o.scheduling)},
                    {"release_overhead", stats_json(o.release_overhead)},
                    {"worker_lock_wait", stats_json(o.worker_lock_wait)},
                    {"scheduler_lock_wait", stats_json(o.scheduler_lock_wait)},
                    {"preemptions", o.preemptions},
                    {"context_switches", o.context_switches},
                    {"preemption_overhead_ns", o.preemption_overhead},
                    {"overruns", o.overruns}};
  json j = {{"policy", r.policy},
            {"horizon_ns", r.horizon},
            {"seed", r.seed},
            {"released", r.released},
            {"completed", r.completed},
            {"misses", r.misses},
            {"miss_ratio", r.miss_ratio()},
            {"truncated", r.truncated},
            {"response", stats_json(r.response())},
            {"tasks", std::move(tasks)},
            {"overheads", std::move(overheads)},
            {"warnings", r.warnings}};
  return j.dump(2) + "\n";
}

void print_summary(const RunReport& r, std::ostream& out) {
  out << "policy " << r.policy << "  horizon " << format_duration(r.horizon) << "  seed " << r.seed << "\n";
  std::size_t width = 4;
  for (const auto& t : r.tasks) width = std::max(width, t.name.size());
  auto row = [&](const std::string& name, std::uint64_t rel, std::uint64_t comp, std::uint64_t miss, const Stats& s) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << name << std::right << std::setw(9) << rel
        << std::setw(10) << comp << std::setw(8) << miss;
    if (s.count) {
      out << std::setw(12) << us(static_cast<double>(s.min)) << std::setw(12) << us(s.mean()) << std::setw(12)
          << us(static_cast<double>(s.max));
    } else {
      out << std::setw(12) << "-" << std::setw(12) << "-" << std::setw(12) << "-";
    }
    out << "\n";
  };
  out << std::left << std::setw(static_cast<int>(width) + 2) << "task" << std::right << std::setw(9) << "released"
      << std::setw(10) << "completed" << std::setw(8) << "misses" << std::setw(12) << "resp_min_us" << std::setw(12)
      << "resp_avg_us" << std::setw(12) << "resp_max_us" << "\n";
  for (const auto& t : r.tasks) row(t.name, t.released, t.completed, t.misses, t.response);
  row("total", r.released, r.completed, r.misses, r.response());
  if (r.truncated) out << r.truncated << " job(s) unfinished at the end of the run\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

int cmd_simulate(const std::string& path, const SimulateOptions& options, std::ostream& out) {
  SimResult result = simulate_document(load_document(path), options);
  if (!options.trace_path.empty()) {
    std::ostringstream csv;
    write_trace_csv(result.trace, csv);
    write_file(options.trace_path, csv.str());
  }
  if (!options.report_path.empty()) write_file(options.report_path, report_to_json(result.report));
  print_summary(result.report, out);
  return 0;
}

std::optional<PolicyPoint> parse_policy(std::string_view s) {
  if (s.size() < 3 || s[1] != '-') return std::nullopt;
  PolicyPoint p;
  switch (std::toupper(static_cast<unsigned char>(s[0]))) {
    case 'G':
      p.mapping = MappingScheme::kGlobal;
      break;
    case 'P':
      p.mapping = MappingScheme::kPartitioned;
      break;
    default:
      return std::nullopt;
  }
  auto prio = parse_priority(s.substr(2));
  if (!prio) return std::nullopt;
  p.priority = *prio;
  return p;
}

std::string policy_name(const PolicyPoint& p) {
  PolicyConfig c;
  c.mapping_scheme = p.mapping;
  c.priority_assignment = p.priority;
  return policy_label(c);
}

std::vector<SweepRun> run_sweep(const std::vector<SweepScenario>& scenarios, const SweepSpec& spec) {
  if (spec.repetitions == 0) throw ConfigError("repetitions must be at least 1");
  std::vector<SweepRun> runs;
  for (const auto& sc : scenarios) {
    const PolicyConfig& base = sc.document.config;
    auto policies = spec.policies;
    if (policies.empty()) policies.push_back({base.mapping_scheme, base.priority_assignment});
    auto preempt = spec.preemptive;
    if (preempt.empty()) preempt.push_back(base.preemptive);
    auto modes = spec.version_modes;
    if (modes.empty()) modes.push_back(VersionMode::kBoth);

    for (const auto& p : policies) {
      for (bool pre : preempt) {
        for (VersionMode vm : modes) {
          TaskSetDocument doc = sc.document;
          doc.config.mapping_scheme = p.mapping;
          doc.config.priority_assignment = p.priority;
          doc.config.preemptive = pre;
          for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) {
            SweepRun run;
            run.scenario = sc.name;
            run.policy = policy_name(p);
            run.preemptive = pre;
            run.version_mode = vm;
            run.repetition = rep;
            SimulateOptions so;
            so.horizon = spec.horizon;
            so.seed = spec.seed + rep;
            so.version_mode = vm;
            try {
              run.report = simulate_document(doc, so).report;
            } catch (const Error& e) {
              throw ConfigError("sweep point " + sc.name + " " + run.policy + (pre ? " preemptive " : " non-preemptive ") +
                                std::string(to_string(vm)) + ": " + e.what());
            }
            runs.push_back(std::move(run));
          }
        }
      }
    }
  }
  return runs;
}

std::vector<std::pair<std::string, double>> run_metrics(const RunReport& r) {
  Stats resp = r.response();
  auto d = [](auto v) { return static_cast<double>(v); };
  return {
      {"released", d(r.released)},
      {"completed", d(r.completed)},
      {"misses", d(r.misses)},
      {"miss_ratio", r.miss_ratio()},
      {"truncated", d(r.truncated)},
      {"response_min_ns", d(resp.min)},
      {"response_mean_ns", resp.mean()},
      {"response_max_ns", d(resp.max)},
      {"preemptions", d(r.overheads.preemptions)},
      {"overruns", d(r.overheads.overruns)},
  };
}

void write_sweep_csv(const std::vector<SweepRun>& runs, std::ostream& out) {
  out << "scenario,policy,preemptive,version_mode,repetition,metric,value\n";
  for (const auto& run : runs) {
    for (const auto& [metric, value] : run_metrics(run.report)) {
      out << run.scenario << ',' << run.policy << ',' << (run.preemptive ? "true" : "false") << ','
          << to_string(run.version_mode) << ',' << run.repetition << ',' << metric << ',';
      if (value == static_cast<double>(static_cast<std::int64_t>(value))) {
        out << static_cast<std::int64_t>(value);
      } else {
        out << fixed(value, 6);
      }
      out << '\n';
    }
  }
}

const SweepRun* best_run(const std::vector<SweepRun>& runs) {
  const SweepRun* best = nullptr;
  for (const auto& r : runs) {
    if (!best || r.report.misses < best->report.misses ||
        (r.report.misses == best->report.misses && r.report.response().mean() < best->report.response().mean())) {
      best = &r;
    }
  }
  return best;
}

int cmd_sweep(const std::vector<std::string>& paths, const SweepSpec& spec, const std::string& out_dir,
              std::ostream& out) {
  std::vector<SweepScenario> scenarios;
  for (const auto& p : paths) scenarios.push_back({std::filesystem::path(p).stem().string(), load_document(p)});
  auto runs = run_sweep(scenarios, spec);

  std::ostringstream csv;
  write_sweep_csv(runs, csv);
  if (out_dir.empty()) {
    out << csv.str();
  } else {
    std::filesystem::create_directories(out_dir);
    auto file = (std::filesystem::path(out_dir) / "sweep.csv").string();
    write_file(file, csv.str());
    out << runs.size() << " runs written to " << file << "\n";
  }
  if (const SweepRun* b = best_run(runs)) {
    (out_dir.empty() ? std::cerr : out) << "best: " << b->scenario << " " << b->policy << " "
                                         << (b->preemptive ? "preemptive" : "non-preemptive") << " "
                                         << to_string(b->version_mode) << " (misses " << b->report.misses
                                         << ", mean response " << us(b->report.response().mean()) << "us)\n";
  }
  return 0;
}

int cmd_expand_sdf(const std::string& path, const std::string& out_path, std::ostream& out) {
  TaskSetDocument doc = load_document(path);
  if (!doc.sdf) throw DocumentError("'" + path + "' has no sdf section");
  const SdfGraph& g = doc.sdf->graph;
  auto q = repetition_vector(g);
  for (std::size_t i = 0; i < q.size(); ++i) out << (i ? " " : "") << g.actors[i].name << ":" << q[i];
  out << "\n";
  DagExpansion dag = expand_sdf(g);
  out << dag.nodes.size() << " nodes, " << dag.edges.size() << " edges\n";
  for (const auto& e : dag.edges) {
    out << "  " << dag.nodes[e.src].name << " -> " << dag.nodes[e.dst].name << " (" << e.tokens << ")\n";
  }
  std::string text = serialize_document(expand_document_sdf(doc));
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
  }
  return 0;
}

LatencyReport run_latency(const LatencyOptions& o) {
  if (o.loops <= 0) throw UsageError("loops must be positive");
  if (o.threads <= 0) throw UsageError("threads must be positive");
  if (o.interval_us <= 0) throw UsageError("interval must be positive");

  PolicyConfig config;
  config.mapping_scheme = o.policy.mapping;
  config.priority_assignment = o.policy.priority;
  config.worker_count = static_cast<std::uint32_t>(o.threads);
  config.version_selection = VersionSelection::kEnergy;

  Middleware mw;
  mw.init(config);
  const Nanos interval = o.interval_us * kMicro;
  std::vector<TaskId> tasks;
  for (std::int64_t i = 0; i < o.threads; ++i) {
    TaskDescriptor d;
    d.name = "t" + std::to_string(i);
    d.kind = TaskKind::kPeriodic;
    d.period = interval;
    d.relative_deadline = interval;
    if (config.mapping_scheme != MappingScheme::kGlobal) d.virt_core_id = static_cast<std::uint32_t>(i);
    if (config.priority_assignment == PriorityAssignment::kUser) d.user_priority = i;
    TaskId t = mw.task_decl(std::move(d));
    mw.version_decl(t, [](JobContext&) {}, {}, EnergySelect{}, {"v1", kMicro});
    tasks.push_back(t);
  }

  RealtimeOptions ro;
  ro.allow_oversubscription = o.allow_oversubscription;
  ro.realtime_priority = o.realtime_priority;
  ro.lock_memory = o.lock_memory;
  ro.pin_threads = o.pin_threads;
  ro.release_horizon = interval * o.loops;
  if (!o.allow_oversubscription) {
    auto need = required_processors(config.worker_count, true);
    auto host = probe_host();
    if (host.cpus.size() < need) {
      throw ConfigError("insufficient processors: " + std::to_string(need) + " needed, " +
                        std::to_string(host.cpus.size()) + " available");
    }
  }
  RealtimeResult result = run_realtime(mw, interval * o.loops, ro);

  LatencyReport report;
  report.per_thread.resize(tasks.size());
  report.warnings = result.report.warnings;
  std::map<std::pair<std::int32_t, std::int64_t>, Nanos> release;
  for (const auto& e : result.trace.events) {
    if (e.kind == TraceKind::kReleaseTheoretical) release[{e.task, e.job_seq}] = e.timestamp;
  }
  for (const auto& e : result.trace.events) {
    if (e.kind != TraceKind::kJobStart) continue;
    auto it = release.find({e.task, e.job_seq});
    if (it == release.end() || e.task < 0 || static_cast<std::size_t>(e.task) >= tasks.size()) continue;
    Nanos lat = e.timestamp - it->second;
    report.per_thread[static_cast<std::size_t>(e.task)].add(lat);
    report.pooled.add(lat);
  }
  return report;
}

void print_latency(const LatencyReport& r, std::ostream& out) {
  auto triple = [&](const Stats& s) {
    out << "<" << s.min / kMicro << ", " << s.max / kMicro << ", " << static_cast<std::int64_t>(s.mean() / 1000.0)
        << "> us  (" << s.count << " activations)\n";
  };
  out << "wake-up latency <min, max, avg>\n";
  for (std::size_t i = 0; i < r.per_thread.size(); ++i) {
    out << "T" << i << ": ";
    triple(r.per_thread[i]);
  }
  out << "all: ";
  triple(r.pooled);
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

int cmd_latency(const LatencyOptions& options, std::ostream& out) {
  print_latency(run_latency(options), out);
  return 0;
}

}  // namespace rtmw
