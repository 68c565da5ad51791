#include "rtmw/sdf.hpp"

#include <deque>
#include <map>
#include <numeric>
#include <optional>

#include "rtmw/error.hpp"

namespace rtmw {
namespace {

std::string edge_label(const SdfGraph& g, std::size_t i) {
  const SdfEdge& e = g.edges[i];
  return "edge " + std::to_string(i) + " (" + g.actors[e.src].name + " -> " + g.actors[e.dst].name +
         ", produce " + std::to_string(e.produce) + ", consume " + std::to_string(e.consume) + ")";
}

struct Ratio {
  std::uint64_t num = 1;
  std::uint64_t den = 1;
};

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw InconsistencyError("repetition vector overflows 64 bits");
  return r;
}

Ratio reduce(Ratio r) {
  std::uint64_t g = std::gcd(r.num, r.den);
  return {r.num / g, r.den / g};
}

void check_shape(const SdfGraph& g) {
  if (g.actors.empty()) throw InconsistencyError("SDF graph has no actors");
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const SdfEdge& e = g.edges[i];
    if (e.src >= g.actors.size() || e.dst >= g.actors.size()) {
      throw InconsistencyError("edge " + std::to_string(i) + " references an unknown actor");
    }
    if (e.produce == 0 || e.consume == 0) throw InconsistencyError(edge_label(g, i) + ": rates must be at least 1");
  }
}

}  // namespace

std::vector<std::uint64_t> repetition_vector(const SdfGraph& g) {
  check_shape(g);
  const std::size_t n = g.actors.size();
  std::vector<std::optional<Ratio>> rate(n);
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    incident[g.edges[i].src].push_back(i);
    incident[g.edges[i].dst].push_back(i);
  }

  std::vector<std::uint64_t> q(n, 0);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (rate[seed]) continue;
    // Propagate firing ratios over one connected component.
    std::vector<std::size_t> component{seed};
    rate[seed] = Ratio{1, 1};
    std::deque<std::size_t> work{seed};
    while (!work.empty()) {
      std::size_t a = work.front();
      work.pop_front();
      for (std::size_t ei : incident[a]) {
        const SdfEdge& e = g.edges[ei];
        // produce * q[src] == consume * q[dst]
        std::size_t other = e.src == a ? e.dst : e.src;
        Ratio r = *rate[a];
        Ratio want = e.src == a ? reduce({checked_mul(r.num, e.produce), checked_mul(r.den, e.consume)})
                                : reduce({checked_mul(r.num, e.consume), checked_mul(r.den, e.produce)});
        if (!rate[other]) {
          rate[other] = want;
          component.push_back(other);
          work.push_back(other);
        } else if (checked_mul(rate[other]->num, want.den) != checked_mul(want.num, rate[other]->den)) {
          throw InconsistencyError("inconsistent rates at " + edge_label(g, ei));
        }
      }
    }
    std::uint64_t den_lcm = 1;
    for (std::size_t a : component) {
      den_lcm = checked_mul(den_lcm / std::gcd(den_lcm, rate[a]->den), rate[a]->den);
    }
    std::uint64_t num_gcd = 0;
    for (std::size_t a : component) {
      q[a] = checked_mul(rate[a]->num, den_lcm / rate[a]->den);
      num_gcd = std::gcd(num_gcd, q[a]);
    }
    for (std::size_t a : component) q[a] /= num_gcd;
  }

  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const SdfEdge& e = g.edges[i];
    if (checked_mul(e.produce, q[e.src]) != checked_mul(e.consume, q[e.dst])) {
      throw InconsistencyError("inconsistent rates at " + edge_label(g, i));
    }
  }
  return q;
}

DagExpansion expand_sdf(const SdfGraph& g) {
  DagExpansion out;
  out.repetition = repetition_vector(g);
  const std::size_t n = g.actors.size();

  std::vector<std::size_t> first_node(n);
  for (std::size_t a = 0; a < n; ++a) {
    first_node[a] = out.nodes.size();
    for (std::uint64_t k = 0; k < out.repetition[a]; ++k) {
      out.nodes.push_back({g.actors[a].name + "#" + std::to_string(k), a, static_cast<std::uint32_t>(k)});
    }
  }

  // Token-level execution of one iteration; each token remembers the node
  // that produced it (nullopt for initial tokens).
  std::vector<std::deque<std::optional<std::size_t>>> fifo(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) fifo[i].assign(g.edges[i].initial_tokens, std::nullopt);
  std::vector<std::vector<std::size_t>> in_edges(n);
  std::vector<std::vector<std::size_t>> out_edges(n);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    out_edges[g.edges[i].src].push_back(i);
    in_edges[g.edges[i].dst].push_back(i);
  }

  std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> flow;
  std::vector<std::uint64_t> fired(n, 0);
  std::uint64_t remaining = 0;
  for (auto r : out.repetition) remaining += r;

  while (remaining > 0) {
    bool progress = false;
    for (std::size_t a = 0; a < n; ++a) {
      while (fired[a] < out.repetition[a]) {
        bool ready = true;
        for (std::size_t ei : in_edges[a]) {
          if (fifo[ei].size() < g.edges[ei].consume) ready = false;
        }
        if (!ready) break;
        const std::size_t node = first_node[a] + fired[a];
        for (std::size_t ei : in_edges[a]) {
          for (std::uint32_t t = 0; t < g.edges[ei].consume; ++t) {
            if (auto producer = fifo[ei].front()) ++flow[{*producer, node}];
            fifo[ei].pop_front();
          }
        }
        for (std::size_t ei : out_edges[a]) fifo[ei].insert(fifo[ei].end(), g.edges[ei].produce, node);
        ++fired[a];
        --remaining;
        progress = true;
      }
    }
    if (!progress) {
      std::string stuck;
      for (std::size_t a = 0; a < n; ++a) {
        if (fired[a] < out.repetition[a]) stuck += (stuck.empty() ? "" : ", ") + g.actors[a].name;
      }
      throw DeadlockError("SDF graph deadlocks: no fireable actor among " + stuck);
    }
  }

  for (const auto& [key, tokens] : flow) out.edges.push_back({key.first, key.second, tokens});
  return out;
}

}  // namespace rtmw
