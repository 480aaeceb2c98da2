#pragma once

// Lifetime algebra over time layers and the backward-dependence feasibility
// predicate. A layer lives from its own configuration rank until the next
// layer of the same DRR is configured (or forever, for the DRR's last layer).
// A backward dependence a -> b (a configured after b) is satisfiable only when
// b is still alive at a's configuration, i.e. end(b) > start(a).

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pdrplan/core_model.hpp"

namespace pdr {

struct Lifetime {
  int start = 0;
  int end = 0;  // == infinity sentinel for the last layer of a DRR
};

/// Lifetimes indexed by configuration rank. `infinity` is |TL| + 1.
struct LifetimeTable {
  std::vector<Lifetime> by_rank;  // [rank], rank 0 unused
  int infinity = 1;

  const Lifetime& operator[](int rank) const { return by_rank[rank]; }
  bool is_infinite(int v) const { return v >= infinity; }
};

inline LifetimeTable lifetimes(const LayerTable& table) {
  LifetimeTable lt;
  const int L = table.layer_count();
  lt.infinity = L + 1;
  lt.by_rank.assign(L + 1, {});
  for (int r = 1; r <= L; ++r) {
    const int next = table.next_in_drr(r);
    lt.by_rank[r] = {r, next ? next : lt.infinity};
  }
  return lt;
}

inline std::map<LayerRef, Lifetime> lifetimes(const Pst& pst) {
  const ConfigOrder co = config_order(pst);  // validates
  LayerTable table(pst);
  const LifetimeTable lt = lifetimes(table);
  std::map<LayerRef, Lifetime> out;
  for (int r = 1; r <= table.layer_count(); ++r) out[table.layer(r).ref] = lt[r];
  return out;
}

struct LayerDep {
  LayerRef from;
  LayerRef to;
  bool backward = false;
  friend bool operator==(const LayerDep&, const LayerDep&) = default;
};

struct LayerDepGraph {
  std::vector<LayerRef> vertices;  // rank order
  std::vector<LayerDep> edges;     // sorted by (from, to)
};

namespace detail {

/// Distinct inter-layer dependence pairs as (rank_from, rank_to), sorted.
inline std::vector<std::pair<int, int>> layer_dep_ranks(const LayerTable& table,
                                                        const TaskGraph& tg) {
  const int L = table.layer_count();
  std::vector<char> seen(static_cast<std::size_t>(L + 1) * (L + 1), 0);
  for (TaskId a = 1; a <= tg.size(); ++a) {
    const int ra = table.rank_of_task(a);
    if (!ra) continue;
    for (TaskId b : tg.closure_succ(a)) {
      const int rb = table.rank_of_task(b);
      if (rb && rb != ra) seen[static_cast<std::size_t>(ra) * (L + 1) + rb] = 1;
    }
  }
  std::vector<std::pair<int, int>> deps;
  for (int ra = 1; ra <= L; ++ra) {
    for (int rb = 1; rb <= L; ++rb) {
      if (seen[static_cast<std::size_t>(ra) * (L + 1) + rb]) deps.emplace_back(ra, rb);
    }
  }
  return deps;
}

}  // namespace detail

inline LayerDepGraph layer_dep_graph(const Pst& pst, const TaskGraph& tg) {
  config_order(pst);
  LayerTable table(pst);
  LayerDepGraph g;
  for (int r = 1; r <= table.layer_count(); ++r) g.vertices.push_back(table.layer(r).ref);
  for (auto [ra, rb] : detail::layer_dep_ranks(table, tg)) {
    g.edges.push_back({table.layer(ra).ref, table.layer(rb).ref, ra > rb});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const LayerDep& x, const LayerDep& y) {
    return std::tie(x.from, x.to) < std::tie(y.from, y.to);
  });
  return g;
}

struct FeasibilityResult {
  bool feasible = true;
  /// Lexicographically smallest violating backward pair (producer, consumer).
  std::optional<std::pair<LayerRef, LayerRef>> witness;
  explicit operator bool() const { return feasible; }
};

inline FeasibilityResult is_feasible(const LayerTable& table, const TaskGraph& tg) {
  const LifetimeTable lt = lifetimes(table);
  FeasibilityResult res;
  for (auto [ra, rb] : detail::layer_dep_ranks(table, tg)) {
    if (ra < rb) continue;  // forward
    if (lt[rb].end > lt[ra].start) continue;
    std::pair<LayerRef, LayerRef> w{table.layer(ra).ref, table.layer(rb).ref};
    if (!res.witness || w < *res.witness) res.witness = w;
    res.feasible = false;
  }
  return res;
}

inline FeasibilityResult is_feasible(const Pst& pst, const TaskGraph& tg) {
  config_order(pst);
  return is_feasible(LayerTable(pst), tg);
}

/// Lifetime bounds a layer receiving task k must satisfy, in ranks of the
/// P-ST without k: start < max_allowed_start and end > min_required_end.
struct InsertWindow {
  int max_allowed_start = 0;  // min end over layers holding a closure successor of k
  int min_required_end = 0;   // max start over layers holding a closure predecessor of k
  int infinity = 1;
  bool unbounded_start() const { return max_allowed_start >= infinity; }
};

inline InsertWindow lifetime_window_for_insert(const TaskGraph& tg, const LayerTable& table,
                                               const LifetimeTable& lt, TaskId k) {
  InsertWindow w{lt.infinity, 0, lt.infinity};
  for (TaskId s : tg.closure_succ(k)) {
    if (const int r = table.rank_of_task(s)) w.max_allowed_start = std::min(w.max_allowed_start, lt[r].end);
  }
  for (TaskId p : tg.closure_pred(k)) {
    if (const int r = table.rank_of_task(p)) w.min_required_end = std::max(w.min_required_end, lt[r].start);
  }
  return w;
}

inline InsertWindow lifetime_window_for_insert(const TaskGraph& tg, const Pst& pst_without_k,
                                               TaskId k) {
  if (pst_without_k.contains(k)) throw ContractError("task is still present in the P-ST");
  LayerTable table(pst_without_k);
  return lifetime_window_for_insert(tg, table, lifetimes(table), k);
}

/// Largest start rank among later-configured layers that feed the given layer
/// (0 when there is none), indexed by rank.
inline std::vector<int> latest_backward_producer(const LayerTable& table, const TaskGraph& tg) {
  std::vector<int> latest(table.layer_count() + 1, 0);
  for (auto [ra, rb] : detail::layer_dep_ranks(table, tg)) {
    if (ra > rb) latest[rb] = std::max(latest[rb], ra);
  }
  return latest;
}

/// Smallest permitted lifetime end of every layer: one past the latest
/// backward-dependent producer, else start + 1.
inline std::map<LayerRef, int> min_lifetime_constraints(const Pst& pst, const TaskGraph& tg) {
  config_order(pst);
  LayerTable table(pst);
  const auto latest = latest_backward_producer(table, tg);
  std::map<LayerRef, int> out;
  for (int r = 1; r <= table.layer_count(); ++r) {
    out[table.layer(r).ref] = (latest[r] ? latest[r] : r) + 1;
  }
  return out;
}

}  // namespace pdr
