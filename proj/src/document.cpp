#include "rtmw/document.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rtmw/error.hpp"
#include "rtmw/job_context.hpp"

namespace rtmw {

using nlohmann::json;

bool operator==(const SdfDoc& a, const SdfDoc& b) {
  if (a.instances != b.instances || a.graph.period != b.graph.period || a.graph.deadline != b.graph.deadline) {
    return false;
  }
  if (a.graph.actors.size() != b.graph.actors.size() || a.graph.edges.size() != b.graph.edges.size()) return false;
  for (std::size_t i = 0; i < a.graph.actors.size(); ++i) {
    if (a.graph.actors[i].name != b.graph.actors[i].name || a.graph.actors[i].wcet != b.graph.actors[i].wcet) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.graph.edges.size(); ++i) {
    const auto& x = a.graph.edges[i];
    const auto& y = b.graph.edges[i];
    if (x.src != y.src || x.dst != y.dst || x.produce != y.produce || x.consume != y.consume ||
        x.initial_tokens != y.initial_tokens) {
      return false;
    }
  }
  return true;
}

namespace {

// Object accessor that remembers which keys were read so the leftovers can be
// reported as unknown.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw DocumentError(path + ": " + what);
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  const json& need(const std::string& key) {
    const json* v = get(key);
    if (!v) fail(at(key), "missing required field");
    return *v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) Obj::fail(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) Obj::fail(path, "expected true or false");
  return v.get<bool>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) Obj::fail(path, "expected a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) {
    auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) Obj::fail(path, "integer out of range");
    return static_cast<std::int64_t>(u);
  }
  if (!v.is_number_integer()) Obj::fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  Obj::fail(path, "expected a non-negative integer");
}

std::uint32_t as_u32(const json& v, const std::string& path) {
  auto u = as_uint(v, path);
  if (u > std::numeric_limits<std::uint32_t>::max()) Obj::fail(path, "integer out of range");
  return static_cast<std::uint32_t>(u);
}

Nanos as_duration(const json& v, const std::string& path) {
  Nanos out = 0;
  if (v.is_string()) {
    try {
      out = parse_duration(v.get<std::string>());
    } catch (const DocumentError& e) {
      Obj::fail(path, e.what());
    }
  } else {
    out = as_int(v, path);
  }
  if (out < 0) Obj::fail(path, "duration must not be negative");
  return out;
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) Obj::fail(path, "expected an array");
  return v;
}

template <typename E>
E as_enum(const json& v, const std::string& path, std::optional<E> (*parse)(std::string_view)) {
  auto s = as_string(v, path);
  auto e = parse(s);
  if (!e) Obj::fail(path, "unknown value '" + s + "'");
  return *e;
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

PolicyConfig read_config(const json& j, const std::string& path) {
  Obj o(j, path);
  PolicyConfig c;
  if (auto* v = o.get("mapping_scheme")) c.mapping_scheme = as_enum(*v, o.at("mapping_scheme"), parse_mapping);
  if (auto* v = o.get("priority_assignment")) {
    c.priority_assignment = as_enum(*v, o.at("priority_assignment"), parse_priority);
  }
  if (auto* v = o.get("preemptive")) c.preemptive = as_bool(*v, o.at("preemptive"));
  if (auto* v = o.get("version_selection")) {
    c.version_selection = as_enum(*v, o.at("version_selection"), parse_selection);
  }
  if (auto* v = o.get("waiting_strategy")) c.waiting_strategy = as_enum(*v, o.at("waiting_strategy"), parse_waiting);
  if (auto* v = o.get("locking_strategy")) c.locking_strategy = as_enum(*v, o.at("locking_strategy"), parse_locking);
  if (auto* v = o.get("worker_count")) c.worker_count = as_u32(*v, o.at("worker_count"));
  if (auto* v = o.get("clock_source")) c.clock_source = as_enum(*v, o.at("clock_source"), parse_clock);
  if (auto* v = o.get("priority_inheritance")) c.priority_inheritance = as_bool(*v, o.at("priority_inheritance"));
  o.finish();
  return c;
}

SelectionDoc read_selection(const json& j, const std::string& path) {
  Obj o(j, path);
  SelectionDoc s;
  if (auto* v = o.get("execution_mode")) s.execution_mode = as_uint(*v, o.at("execution_mode"));
  if (auto* v = o.get("permission_mask")) s.permission_mask = as_uint(*v, o.at("permission_mask"));
  if (auto* v = o.get("battery")) s.battery = as_double(*v, o.at("battery"));
  if (auto* v = o.get("alpha")) s.alpha = as_double(*v, o.at("alpha"));
  o.finish();
  return s;
}

VersionSimDoc read_version_sim(const json& j, const std::string& path) {
  Obj o(j, path);
  VersionSimDoc s;
  if (auto* v = o.get("exec")) s.exec = as_duration(*v, o.at("exec"));
  if (auto* v = o.get("exec_range")) {
    const auto& a = as_array(*v, o.at("exec_range"));
    if (a.size() != 2) Obj::fail(o.at("exec_range"), "expected [min, max]");
    Nanos lo = as_duration(a[0], idx(o.at("exec_range"), 0));
    Nanos hi = as_duration(a[1], idx(o.at("exec_range"), 1));
    if (lo > hi) Obj::fail(o.at("exec_range"), "min exceeds max");
    s.exec_range = std::make_pair(lo, hi);
  }
  if (auto* v = o.get("ops")) {
    s.ops.emplace();
    const auto& a = as_array(*v, o.at("ops"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      Obj op(a[i], idx(o.at("ops"), i));
      SimOpDoc d;
      auto kind = as_string(op.need("kind"), op.at("kind"));
      if (kind == "push") {
        d.kind = SimChannelOp::Kind::kPush;
      } else if (kind == "pop") {
        d.kind = SimChannelOp::Kind::kPop;
      } else {
        Obj::fail(op.at("kind"), "expected push or pop");
      }
      d.channel = as_string(op.need("channel"), op.at("channel"));
      if (auto* x = op.get("at")) d.at = as_duration(*x, op.at("at"));
      if (auto* x = op.get("count")) d.count = as_u32(*x, op.at("count"));
      op.finish();
      s.ops->push_back(std::move(d));
    }
  }
  o.finish();
  return s;
}

VersionDoc read_version(const json& j, const std::string& path) {
  Obj o(j, path);
  VersionDoc v;
  if (auto* x = o.get("name")) v.name = as_string(*x, o.at("name"));
  v.wcet = as_duration(o.need("wcet"), o.at("wcet"));
  if (auto* x = o.get("energy_budget")) v.energy_budget = as_double(*x, o.at("energy_budget"));
  if (auto* x = o.get("energy_cost")) v.energy_cost = as_double(*x, o.at("energy_cost"));
  if (auto* x = o.get("exec_time")) v.exec_time = as_duration(*x, o.at("exec_time"));
  if (auto* x = o.get("mode_mask")) v.mode_mask = as_uint(*x, o.at("mode_mask"));
  if (auto* x = o.get("permission_mask")) v.permission_mask = as_uint(*x, o.at("permission_mask"));
  if (auto* x = o.get("user_rank")) v.user_rank = as_int(*x, o.at("user_rank"));
  if (auto* x = o.get("accelerators")) {
    const auto& a = as_array(*x, o.at("accelerators"));
    for (std::size_t i = 0; i < a.size(); ++i) v.accelerators.push_back(as_string(a[i], idx(o.at("accelerators"), i)));
  }
  if (auto* x = o.get("sim")) v.sim = read_version_sim(*x, o.at("sim"));
  o.finish();
  return v;
}

TaskDoc read_task(const json& j, const std::string& path) {
  Obj o(j, path);
  TaskDoc t;
  t.name = as_string(o.need("name"), o.at("name"));
  if (auto* x = o.get("kind")) t.kind = as_enum(*x, o.at("kind"), parse_task_kind);
  if (auto* x = o.get("period")) t.period = as_duration(*x, o.at("period"));
  if (auto* x = o.get("deadline")) {
    t.deadline = as_duration(*x, o.at("deadline"));
  } else {
    t.deadline = t.period;
  }
  if (auto* x = o.get("offset")) t.offset = as_duration(*x, o.at("offset"));
  if (auto* x = o.get("virt_core_id")) t.virt_core_id = as_u32(*x, o.at("virt_core_id"));
  if (auto* x = o.get("user_priority")) t.user_priority = as_int(*x, o.at("user_priority"));
  const auto& vs = as_array(o.need("versions"), o.at("versions"));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    t.versions.push_back(read_version(vs[i], idx(o.at("versions"), i)));
    if (t.versions.back().name.empty()) t.versions.back().name = "v" + std::to_string(i + 1);
  }
  o.finish();
  return t;
}

SdfDoc read_sdf(const json& j, const std::string& path) {
  Obj o(j, path);
  SdfDoc s;
  s.graph.period = as_duration(o.need("period"), o.at("period"));
  if (auto* x = o.get("deadline")) {
    s.graph.deadline = as_duration(*x, o.at("deadline"));
  } else {
    s.graph.deadline = s.graph.period;
  }
  if (auto* x = o.get("instances")) s.instances = as_u32(*x, o.at("instances"));
  if (s.instances == 0) Obj::fail(o.at("instances"), "must be at least 1");
  std::map<std::string, std::size_t> names;
  const auto& actors = as_array(o.need("actors"), o.at("actors"));
  for (std::size_t i = 0; i < actors.size(); ++i) {
    Obj a(actors[i], idx(o.at("actors"), i));
    SdfActor actor;
    actor.name = as_string(a.need("name"), a.at("name"));
    actor.wcet = as_duration(a.need("wcet"), a.at("wcet"));
    a.finish();
    if (!names.emplace(actor.name, i).second) Obj::fail(a.at("name"), "duplicate actor '" + actor.name + "'");
    s.graph.actors.push_back(std::move(actor));
  }
  auto actor_ref = [&](const json& v, const std::string& p) {
    auto n = as_string(v, p);
    auto it = names.find(n);
    if (it == names.end()) Obj::fail(p, "unknown actor '" + n + "'");
    return it->second;
  };
  if (auto* x = o.get("edges")) {
    const auto& edges = as_array(*x, o.at("edges"));
    for (std::size_t i = 0; i < edges.size(); ++i) {
      Obj e(edges[i], idx(o.at("edges"), i));
      SdfEdge edge;
      edge.src = actor_ref(e.need("src"), e.at("src"));
      edge.dst = actor_ref(e.need("dst"), e.at("dst"));
      if (auto* y = e.get("produce")) edge.produce = as_u32(*y, e.at("produce"));
      if (auto* y = e.get("consume")) edge.consume = as_u32(*y, e.at("consume"));
      if (auto* y = e.get("initial_tokens")) edge.initial_tokens = as_u32(*y, e.at("initial_tokens"));
      e.finish();
      s.graph.edges.push_back(edge);
    }
  }
  o.finish();
  return s;
}

TableDoc read_table(const json& j, const std::string& path) {
  Obj o(j, path);
  TableDoc t;
  t.period = as_duration(o.need("period"), o.at("period"));
  const auto& rows = as_array(o.need("rows"), o.at("rows"));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = as_array(rows[r], idx(o.at("rows"), r));
    auto& out = t.rows.emplace_back();
    for (std::size_t i = 0; i < row.size(); ++i) {
      Obj e(row[i], idx(idx(o.at("rows"), r), i));
      TableEntryDoc d;
      d.task = as_string(e.need("task"), e.at("task"));
      if (auto* x = e.get("version")) d.version = as_string(*x, e.at("version"));
      if (auto* x = e.get("offset")) d.offset = as_duration(*x, e.at("offset"));
      e.finish();
      out.push_back(std::move(d));
    }
  }
  o.finish();
  return t;
}

SimModelDoc read_sim_model(const json& j, const std::string& path) {
  Obj o(j, path);
  SimModelDoc m;
  if (auto* x = o.get("get_task_cost")) m.get_task_cost = as_duration(*x, o.at("get_task_cost"));
  if (auto* x = o.get("sched_scan_cost_per_task")) {
    m.sched_scan_cost_per_task = as_duration(*x, o.at("sched_scan_cost_per_task"));
  }
  if (auto* x = o.get("sort_cost_per_element")) m.sort_cost_per_element = as_duration(*x, o.at("sort_cost_per_element"));
  if (auto* x = o.get("context_switch_cost")) m.context_switch_cost = as_duration(*x, o.at("context_switch_cost"));
  if (auto* x = o.get("activations")) {
    const auto& a = as_array(*x, o.at("activations"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      Obj e(a[i], idx(o.at("activations"), i));
      ActivationDoc d;
      d.task = as_string(e.need("task"), e.at("task"));
      d.at = as_duration(e.need("at"), e.at("at"));
      e.finish();
      m.activations.push_back(std::move(d));
    }
  }
  if (auto* x = o.get("mode_changes")) {
    const auto& a = as_array(*x, o.at("mode_changes"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      Obj e(a[i], idx(o.at("mode_changes"), i));
      ModeChangeDoc d;
      d.at = as_duration(e.need("at"), e.at("at"));
      if (auto* y = e.get("execution_mode")) d.execution_mode = as_uint(*y, e.at("execution_mode"));
      if (auto* y = e.get("permission_mask")) d.permission_mask = as_uint(*y, e.at("permission_mask"));
      e.finish();
      m.mode_changes.push_back(std::move(d));
    }
  }
  o.finish();
  return m;
}

json dur(Nanos ns) { return format_duration(ns); }

json write_version(const VersionDoc& v) {
  json j = json::object();
  j["name"] = v.name;
  j["wcet"] = dur(v.wcet);
  if (v.energy_budget) j["energy_budget"] = *v.energy_budget;
  if (v.energy_cost) j["energy_cost"] = *v.energy_cost;
  if (v.exec_time) j["exec_time"] = dur(*v.exec_time);
  if (v.mode_mask) j["mode_mask"] = *v.mode_mask;
  if (v.permission_mask) j["permission_mask"] = *v.permission_mask;
  if (v.user_rank) j["user_rank"] = *v.user_rank;
  if (!v.accelerators.empty()) j["accelerators"] = v.accelerators;
  if (!v.sim.empty()) {
    json s = json::object();
    if (v.sim.exec) s["exec"] = dur(*v.sim.exec);
    if (v.sim.exec_range) s["exec_range"] = {dur(v.sim.exec_range->first), dur(v.sim.exec_range->second)};
    if (v.sim.ops) {
      json ops = json::array();
      for (const auto& op : *v.sim.ops) {
        ops.push_back({{"kind", op.kind == SimChannelOp::Kind::kPush ? "push" : "pop"},
                       {"channel", op.channel},
                       {"at", dur(op.at)},
                       {"count", op.count}});
      }
      s["ops"] = std::move(ops);
    }
    j["sim"] = std::move(s);
  }
  return j;
}

json write_document(const TaskSetDocument& d) {
  json j = json::object();
  const auto& c = d.config;
  j["config"] = {
      {"mapping_scheme", to_string(c.mapping_scheme)},
      {"priority_assignment", to_string(c.priority_assignment)},
      {"preemptive", c.preemptive},
      {"version_selection", to_string(c.version_selection)},
      {"waiting_strategy", to_string(c.waiting_strategy)},
      {"locking_strategy", to_string(c.locking_strategy)},
      {"worker_count", c.worker_count},
      {"clock_source", to_string(c.clock_source)},
      {"priority_inheritance", c.priority_inheritance},
  };
  json sel = {{"execution_mode", d.selection.execution_mode},
              {"permission_mask", d.selection.permission_mask},
              {"alpha", d.selection.alpha}};
  if (d.selection.battery) sel["battery"] = *d.selection.battery;
  j["selection"] = std::move(sel);
  j["accelerators"] = d.accelerators;

  json tasks = json::array();
  for (const auto& t : d.tasks) {
    json tj = {{"name", t.name}, {"kind", to_string(t.kind)}, {"deadline", dur(t.deadline)}};
    if (t.period) tj["period"] = dur(t.period);
    if (t.offset) tj["offset"] = dur(t.offset);
    if (t.virt_core_id) tj["virt_core_id"] = *t.virt_core_id;
    if (t.user_priority) tj["user_priority"] = *t.user_priority;
    json vs = json::array();
    for (const auto& v : t.versions) vs.push_back(write_version(v));
    tj["versions"] = std::move(vs);
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);

  json channels = json::array();
  for (const auto& ch : d.channels) {
    channels.push_back({{"name", ch.name}, {"element_size", ch.element_size}, {"capacity", ch.capacity}});
  }
  j["channels"] = std::move(channels);

  json conns = json::array();
  for (const auto& cn : d.connections) {
    conns.push_back({{"channel", cn.channel},
                     {"src", cn.src},
                     {"dst", cn.dst},
                     {"produce", cn.produce},
                     {"required_tokens", cn.required_tokens}});
  }
  j["connections"] = std::move(conns);

  if (d.sdf) {
    const auto& g = d.sdf->graph;
    json actors = json::array();
    for (const auto& a : g.actors) actors.push_back({{"name", a.name}, {"wcet", dur(a.wcet)}});
    json edges = json::array();
    for (const auto& e : g.edges) {
      edges.push_back({{"src", g.actors.at(e.src).name},
                       {"dst", g.actors.at(e.dst).name},
                       {"produce", e.produce},
                       {"consume", e.consume},
                       {"initial_tokens", e.initial_tokens}});
    }
    j["sdf"] = {{"period", dur(g.period)},
                {"deadline", dur(g.deadline)},
                {"instances", d.sdf->instances},
                {"actors", std::move(actors)},
                {"edges", std::move(edges)}};
  }
  if (d.table) {
    json rows = json::array();
    for (const auto& row : d.table->rows) {
      json r = json::array();
      for (const auto& e : row) {
        json ej = {{"task", e.task}, {"offset", dur(e.offset)}};
        if (!e.version.empty()) ej["version"] = e.version;
        r.push_back(std::move(ej));
      }
      rows.push_back(std::move(r));
    }
    j["table"] = {{"period", dur(d.table->period)}, {"rows", std::move(rows)}};
  }

  const auto& m = d.sim_model;
  json sm = {{"get_task_cost", dur(m.get_task_cost)},
             {"sched_scan_cost_per_task", dur(m.sched_scan_cost_per_task)},
             {"sort_cost_per_element", dur(m.sort_cost_per_element)},
             {"context_switch_cost", dur(m.context_switch_cost)}};
  if (!m.activations.empty()) {
    json a = json::array();
    for (const auto& x : m.activations) a.push_back({{"task", x.task}, {"at", dur(x.at)}});
    sm["activations"] = std::move(a);
  }
  if (!m.mode_changes.empty()) {
    json a = json::array();
    for (const auto& x : m.mode_changes) {
      json e = {{"at", dur(x.at)}};
      if (x.execution_mode) e["execution_mode"] = *x.execution_mode;
      if (x.permission_mask) e["permission_mask"] = *x.permission_mask;
      a.push_back(std::move(e));
    }
    sm["mode_changes"] = std::move(a);
  }
  j["sim_model"] = std::move(sm);
  return j;
}

}  // namespace

TaskSetDocument parse_document(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw DocumentError(std::string("invalid JSON: ") + e.what());
  }
  Obj o(root, "$");
  TaskSetDocument d;
  if (auto* v = o.get("config")) d.config = read_config(*v, o.at("config"));
  if (auto* v = o.get("selection")) d.selection = read_selection(*v, o.at("selection"));
  if (auto* v = o.get("accelerators")) {
    const auto& a = as_array(*v, o.at("accelerators"));
    for (std::size_t i = 0; i < a.size(); ++i) d.accelerators.push_back(as_string(a[i], idx(o.at("accelerators"), i)));
  }
  if (auto* v = o.get("tasks")) {
    const auto& a = as_array(*v, o.at("tasks"));
    for (std::size_t i = 0; i < a.size(); ++i) d.tasks.push_back(read_task(a[i], idx(o.at("tasks"), i)));
  }
  if (auto* v = o.get("channels")) {
    const auto& a = as_array(*v, o.at("channels"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      Obj c(a[i], idx(o.at("channels"), i));
      ChannelDoc ch;
      if (auto* x = c.get("name")) ch.name = as_string(*x, c.at("name"));
      if (auto* x = c.get("element_size")) ch.element_size = as_uint(*x, c.at("element_size"));
      if (auto* x = c.get("capacity")) ch.capacity = as_uint(*x, c.at("capacity"));
      c.finish();
      d.channels.push_back(std::move(ch));
    }
  }
  if (auto* v = o.get("connections")) {
    const auto& a = as_array(*v, o.at("connections"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      Obj c(a[i], idx(o.at("connections"), i));
      ConnectionDoc cn;
      cn.channel = as_string(c.need("channel"), c.at("channel"));
      cn.src = as_string(c.need("src"), c.at("src"));
      cn.dst = as_string(c.need("dst"), c.at("dst"));
      if (auto* x = c.get("produce")) cn.produce = as_u32(*x, c.at("produce"));
      if (auto* x = c.get("required_tokens")) cn.required_tokens = as_u32(*x, c.at("required_tokens"));
      c.finish();
      d.connections.push_back(std::move(cn));
    }
  }
  if (auto* v = o.get("sdf")) d.sdf = read_sdf(*v, o.at("sdf"));
  if (auto* v = o.get("table")) d.table = read_table(*v, o.at("table"));
  if (auto* v = o.get("sim_model")) d.sim_model = read_sim_model(*v, o.at("sim_model"));
  o.finish();
  return d;
}

TaskSetDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DocumentError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str());
}

std::string serialize_document(const TaskSetDocument& doc) { return write_document(doc).dump(2) + "\n"; }

std::string_view to_string(VersionMode mode) {
  switch (mode) {
    case VersionMode::kBoth:
      return "both";
    case VersionMode::kCpu:
      return "cpu";
    case VersionMode::kGpu:
      return "gpu";
  }
  return "?";
}

std::optional<VersionMode> parse_version_mode(std::string_view s) {
  if (s == "both") return VersionMode::kBoth;
  if (s == "cpu") return VersionMode::kCpu;
  if (s == "gpu") return VersionMode::kGpu;
  return std::nullopt;
}

TaskSetDocument expand_document_sdf(const TaskSetDocument& doc) {
  if (!doc.sdf) throw DocumentError("document has no sdf section");
  const SdfDoc& sdf = *doc.sdf;
  DagExpansion dag = expand_sdf(sdf.graph);

  TaskSetDocument out = doc;
  out.sdf.reset();
  std::vector<bool> has_input(dag.nodes.size(), false);
  for (const auto& e : dag.edges) has_input[e.dst] = true;

  const PolicyConfig& c = doc.config;
  auto make_version = [&](Nanos wcet) {
    VersionDoc v;
    v.name = "v1";
    v.wcet = wcet;
    switch (c.version_selection) {
      case VersionSelection::kEnergy:
        v.energy_budget = 0.0;
        break;
      case VersionSelection::kEnergyTime:
        v.energy_cost = 0.0;
        v.exec_time = wcet;
        break;
      case VersionSelection::kMode:
        v.mode_mask = ~ModeMask{0};
        break;
      case VersionSelection::kBitmask:
        v.permission_mask = ~ModeMask{0};
        break;
      case VersionSelection::kUser:
        v.user_rank = 0;
        break;
      case VersionSelection::kPreselected:
        break;
    }
    return v;
  };

  for (std::uint32_t k = 0; k < sdf.instances; ++k) {
    const std::string prefix = sdf.instances > 1 ? "p" + std::to_string(k) + "." : "";
    const std::uint32_t core = c.worker_count ? k % c.worker_count : 0;
    for (std::size_t n = 0; n < dag.nodes.size(); ++n) {
      TaskDoc t;
      t.name = prefix + dag.nodes[n].name;
      if (has_input[n]) {
        t.kind = TaskKind::kGraphNode;
      } else {
        t.kind = TaskKind::kPeriodic;
        t.period = sdf.graph.period;
      }
      t.deadline = sdf.graph.deadline;
      if (c.mapping_scheme != MappingScheme::kGlobal) t.virt_core_id = core;
      if (c.priority_assignment == PriorityAssignment::kUser) t.user_priority = 0;
      t.versions.push_back(make_version(sdf.graph.actors.at(dag.nodes[n].actor).wcet));
      out.tasks.push_back(std::move(t));
    }
    for (const auto& e : dag.edges) {
      ChannelDoc ch;
      ch.name = prefix + dag.nodes[e.src].name + "-" + dag.nodes[e.dst].name;
      ch.element_size = sizeof(std::int32_t);
      ch.capacity = e.tokens;
      ConnectionDoc cn;
      cn.channel = ch.name;
      cn.src = prefix + dag.nodes[e.src].name;
      cn.dst = prefix + dag.nodes[e.dst].name;
      cn.produce = e.tokens;
      cn.required_tokens = e.tokens;
      out.channels.push_back(std::move(ch));
      out.connections.push_back(std::move(cn));
    }
  }
  return out;
}

namespace {

bool keep_version(const VersionDoc& v, VersionMode mode) {
  switch (mode) {
    case VersionMode::kBoth:
      return true;
    case VersionMode::kCpu:
      return v.accelerators.empty();
    case VersionMode::kGpu:
      return !v.accelerators.empty();
  }
  return true;
}

VSelect make_props(const VersionDoc& v, const TaskDoc& t, VersionSelection method, const std::vector<VersionDoc>& kept) {
  const std::string who = "task '" + t.name + "' version '" + v.name + "'";
  auto need = [&](bool present, const char* field) {
    if (!present) {
      throw DocumentError(who + ": " + std::string(to_string(method)) + " selection needs '" + field + "'");
    }
  };
  switch (method) {
    case VersionSelection::kEnergy:
      need(v.energy_budget.has_value(), "energy_budget");
      return EnergySelect{*v.energy_budget, {}};
    case VersionSelection::kEnergyTime:
      need(v.energy_cost.has_value(), "energy_cost");
      return EnergyTimeSelect{*v.energy_cost, v.exec_time.value_or(v.wcet)};
    case VersionSelection::kMode:
      need(v.mode_mask.has_value(), "mode_mask");
      return ModeSelect{*v.mode_mask};
    case VersionSelection::kBitmask:
      need(v.permission_mask.has_value(), "permission_mask");
      return BitmaskSelect{*v.permission_mask};
    case VersionSelection::kUser: {
      need(v.user_rank.has_value(), "user_rank");
      // Ranks by declaration position among the kept versions.
      std::vector<std::int64_t> ranks;
      for (const auto& k : kept) ranks.push_back(k.user_rank.value_or(0));
      UserSelector sel = [ranks](const SelectionRequest& req) {
        const auto& versions = req.tasks->task(req.task).versions;
        VersionId best = req.candidates.front();
        std::int64_t best_rank = std::numeric_limits<std::int64_t>::max();
        for (VersionId c : req.candidates) {
          auto pos = static_cast<std::size_t>(std::find(versions.begin(), versions.end(), c) - versions.begin());
          std::int64_t r = pos < ranks.size() ? ranks[pos] : 0;
          if (r < best_rank) {
            best_rank = r;
            best = c;
          }
        }
        return best;
      };
      return UserSelect{std::move(sel)};
    }
    case VersionSelection::kPreselected:
      return std::monostate{};
  }
  return std::monostate{};
}

struct BodyPlan {
  std::vector<std::pair<ChannelId, std::uint32_t>> pops;
  std::vector<std::pair<ChannelId, std::uint32_t>> pushes;
  std::vector<std::size_t> element_sizes;  // by channel index
  Nanos exec = 0;
};

JobBody synthetic_body(std::shared_ptr<const BodyPlan> plan) {
  return [plan](JobContext& ctx) {
    std::vector<std::byte> buf;
    for (const auto& [ch, n] : plan->pops) {
      buf.assign(plan->element_sizes[ch.index()], std::byte{0});
      for (std::uint32_t i = 0; i < n; ++i) ctx.pop(ch, buf);
    }
    ctx.busy_wait(plan->exec);
    for (const auto& [ch, n] : plan->pushes) {
      buf.assign(plan->element_sizes[ch.index()], std::byte{0});
      for (std::uint32_t i = 0; i < n; ++i) ctx.push(ch, buf);
    }
  };
}

}  // namespace

BuiltModel build_model(const TaskSetDocument& source, VersionMode mode) {
  const TaskSetDocument doc =
      source.sdf && source.tasks.empty() ? expand_document_sdf(source) : source;

  BuiltModel out;
  out.middleware = std::make_unique<Middleware>();
  Middleware& mw = *out.middleware;
  mw.init(doc.config);
  const VersionSelection method = doc.config.version_selection;

  SelectionContext ctx;
  ctx.execution_mode = doc.selection.execution_mode;
  ctx.permission_mask = doc.selection.permission_mask;
  ctx.alpha = doc.selection.alpha;
  if (doc.selection.battery) {
    double level = *doc.selection.battery;
    ctx.battery_probe = [level] { return level; };
  }
  mw.set_selection_context(ctx);

  std::map<std::string, AccelId> accels;
  for (const auto& name : doc.accelerators) {
    if (accels.count(name)) throw DocumentError("accelerator '" + name + "' declared twice");
    accels[name] = mw.hwaccel_decl(name);
  }

  std::map<std::string, ChannelId> channels;
  for (std::size_t i = 0; i < doc.channels.size(); ++i) {
    const auto& ch = doc.channels[i];
    ChannelId id = mw.channel_decl(ch.element_size, ch.capacity, ch.name);
    channels[mw.task_set().channel(id).name] = id;
  }

  // Tasks first so connections can resolve names; versions after the
  // connections so synthetic bodies know their channels.
  std::map<std::string, TaskId> tasks;
  for (const auto& t : doc.tasks) {
    TaskDescriptor d;
    d.name = t.name;
    d.kind = t.kind;
    d.period = t.period;
    d.relative_deadline = t.deadline;
    d.release_offset = t.offset;
    d.virt_core_id = t.virt_core_id;
    d.user_priority = t.user_priority;
    try {
      tasks[t.name] = mw.task_decl(std::move(d));
    } catch (const ConfigError& e) {
      throw DocumentError(e.what());
    } catch (const UsageError& e) {
      throw DocumentError(e.what());
    }
  }

  auto task_ref = [&](const std::string& name, const std::string& where) {
    auto it = tasks.find(name);
    if (it == tasks.end()) throw DocumentError(where + ": unknown task '" + name + "'");
    return it->second;
  };
  auto channel_ref = [&](const std::string& name, const std::string& where) {
    auto it = channels.find(name);
    if (it == channels.end()) throw DocumentError(where + ": unknown channel '" + name + "'");
    return it->second;
  };

  for (std::size_t i = 0; i < doc.connections.size(); ++i) {
    const auto& cn = doc.connections[i];
    ChannelId ch = channel_ref(cn.channel, "connection " + std::to_string(i));
    const std::string where = "connection " + std::to_string(i) + " (channel '" + cn.channel + "', id " +
                              std::to_string(ch.value) + ")";
    TaskId src = task_ref(cn.src, where);
    TaskId dst = task_ref(cn.dst, where);
    try {
      mw.channel_connect(src, dst, ch, {cn.produce, cn.required_tokens});
    } catch (const UsageError& e) {
      throw DocumentError(where + ": " + e.what());
    }
  }

  const TaskSet& ts = mw.task_set();
  std::vector<std::size_t> element_sizes;
  for (const auto& c : ts.channels) element_sizes.push_back(c.element_size);

  for (const auto& t : doc.tasks) {
    TaskId tid = tasks.at(t.name);
    std::vector<VersionDoc> kept;
    for (const auto& v : t.versions) {
      if (keep_version(v, mode)) kept.push_back(v);
    }
    if (kept.empty()) {
      kept = t.versions;
      if (mode != VersionMode::kBoth && !t.versions.empty()) {
        out.diagnostics.push_back({Diagnostic::Severity::kWarning,
                                   "task '" + t.name + "': no " + std::string(to_string(mode)) +
                                       " version, keeping all versions"});
      }
    }
    for (const auto& v : kept) {
      auto plan = std::make_shared<BodyPlan>();
      plan->element_sizes = element_sizes;
      plan->exec = v.sim.exec.value_or(v.wcet);
      for (ChannelId c : ts.inputs(tid)) plan->pops.emplace_back(c, ts.channel(c).required_tokens);
      for (ChannelId c : ts.outputs(tid)) plan->pushes.emplace_back(c, ts.channel(c).produce);

      VersionOptions opts;
      opts.name = v.name;
      opts.wcet_estimate = v.wcet;
      VersionId vid;
      try {
        vid = mw.version_decl(tid, synthetic_body(plan), {}, make_props(v, t, method, kept), opts);
      } catch (const ConfigError& e) {
        throw DocumentError(e.what());
      } catch (const UsageError& e) {
        throw DocumentError(e.what());
      }
      for (const auto& a : v.accelerators) {
        auto it = accels.find(a);
        if (it == accels.end()) {
          throw DocumentError("task '" + t.name + "' version '" + v.name + "': unknown accelerator '" + a + "'");
        }
        mw.hwaccel_use(tid, vid, it->second);
      }

      if (!v.sim.empty()) {
        VersionSimModel& sm = out.sim_model.version_mut(vid);
        sm.exec = v.sim.exec;
        sm.exec_range = v.sim.exec_range;
        if (v.sim.ops) {
          std::vector<SimChannelOp> ops;
          for (const auto& op : *v.sim.ops) {
            ops.push_back({op.kind, channel_ref(op.channel, "task '" + t.name + "' version '" + v.name + "'"), op.at,
                           op.count});
          }
          sm.channel_ops = std::move(ops);
        }
      }
    }
  }

  const auto& m = doc.sim_model;
  out.sim_model.get_task_cost = m.get_task_cost;
  out.sim_model.sched_scan_cost_per_task = m.sched_scan_cost_per_task;
  out.sim_model.sort_cost_per_element = m.sort_cost_per_element;
  out.sim_model.context_switch_cost = m.context_switch_cost;
  for (const auto& a : m.activations) out.sim_model.activations.push_back({task_ref(a.task, "activation"), a.at});
  for (const auto& mc : m.mode_changes) {
    out.sim_model.mode_changes.push_back({mc.at, mc.execution_mode, mc.permission_mask});
  }

  if (doc.table) {
    ScheduleTable table;
    table.table_period = doc.table->period;
    for (const auto& row : doc.table->rows) {
      auto& r = table.rows.emplace_back();
      for (const auto& e : row) {
        TaskId tid = task_ref(e.task, "table");
        VersionId vid;
        const auto& versions = ts.task(tid).versions;
        if (e.version.empty()) {
          if (!versions.empty()) vid = versions.front();
        } else if (auto v = ts.find_version(tid, e.version)) {
          vid = *v;
        } else {
          throw DocumentError("table: task '" + e.task + "' has no version '" + e.version + "'");
        }
        r.push_back({tid, vid, e.offset});
      }
    }
    mw.set_schedule_table(std::move(table));
  }
  return out;
}

}  // namespace rtmw
