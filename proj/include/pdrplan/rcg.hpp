#pragma once

// Reconfiguration constraint graph and its longest-path schedule.
//
// Vertices: one per task (weight = execution time) followed by one per time
// layer in configuration order (weight = configuration span). Edges:
//   Tg  task dependences
//   Cr  configuration order, as a chain over consecutive ranks
//   Ce  layer -> each of its tasks (configure before execute)
//   Ec  every task of a DRR's previous layer -> its next layer
// Tasks not placed in the P-ST keep their vertex and their Tg edges only.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "pdrplan/core_model.hpp"
#include "pdrplan/feasibility.hpp"
#include "pdrplan/floorplan.hpp"

namespace pdr {

enum class SpanMode { Sum, DrrArea };

inline const char* to_string(SpanMode m) { return m == SpanMode::Sum ? "sum" : "drr_area"; }

/// Sum of the member modules' configuration times.
inline Ticks layer_config_span(const LayerInfo& layer, const TaskGraph& tg) {
  Ticks s = 0;
  for (TaskId id : layer.tasks) s += tg.module(id).config;
  return s;
}

/// Configuration time of a whole DRR rectangle.
inline Ticks drr_area_span(const Rect& drr, const ChipSpec& chip) {
  return chip.clb_config * drr.w * drr.h;
}

/// Configuration span of every layer, indexed by rank.
inline std::vector<Ticks> layer_spans(const LayerTable& table, const TaskGraph& tg,
                                      const ChipSpec& chip, SpanMode mode,
                                      const Floorplan* fp = nullptr) {
  if (mode == SpanMode::DrrArea && !fp) {
    throw ContractError("drr_area spans require a floorplan");
  }
  std::vector<Ticks> spans(table.layer_count() + 1, 0);
  for (int r = 1; r <= table.layer_count(); ++r) {
    const LayerInfo& l = table.layer(r);
    spans[r] = mode == SpanMode::Sum ? layer_config_span(l, tg)
                                     : drr_area_span(fp->drr_rect.at(l.ref.drr), chip);
  }
  return spans;
}

inline std::vector<Ticks> layer_spans(const Pst& pst, const TaskGraph& tg, const ChipSpec& chip,
                                      SpanMode mode, const Floorplan* fp = nullptr) {
  return layer_spans(LayerTable(pst), tg, chip, mode, fp);
}

enum class EdgeKind : std::uint8_t { Tg, Cr, Ce, Ec };

struct RcgEdge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::Tg;
};

struct Rcg {
  int tasks = 0;   // vertices 0..tasks-1 hold task ids 1..tasks
  int layers = 0;  // vertices tasks..tasks+layers-1 hold ranks 1..layers
  std::vector<Ticks> weight;
  std::vector<std::vector<int>> succ, pred;
  std::vector<RcgEdge> edges;
  std::vector<LayerRef> layer_ref;  // [rank]
  std::vector<char> placed;         // [task id]

  int vertex_count() const { return tasks + layers; }
  int task_vertex(TaskId id) const { return id - 1; }
  int layer_vertex(int rank) const { return tasks + rank - 1; }
  bool is_layer(int v) const { return v >= tasks; }
  TaskId task_of(int v) const { return v + 1; }
  int rank_of(int v) const { return v - tasks + 1; }

  std::array<int, 4> edge_counts() const {
    std::array<int, 4> c{};
    for (const auto& e : edges) ++c[static_cast<int>(e.kind)];
    return c;
  }

  void add_edge(int u, int v, EdgeKind kind) {
    succ[u].push_back(v);
    pred[v].push_back(u);
    edges.push_back({u, v, kind});
  }
};

inline std::string describe_vertex(const Rcg& g, int v) {
  if (g.is_layer(v)) return "layer " + to_string(g.layer_ref[g.rank_of(v)]);
  return "task " + std::to_string(g.task_of(v));
}

inline Rcg build_rcg(const LayerTable& table, const TaskGraph& tg,
                     const std::vector<Ticks>& spans) {
  Rcg g;
  g.tasks = tg.size();
  g.layers = table.layer_count();
  const int V = g.vertex_count();
  g.weight.assign(V, 0);
  g.succ.assign(V, {});
  g.pred.assign(V, {});
  g.layer_ref.assign(g.layers + 1, {});
  g.placed.assign(g.tasks + 1, 0);
  for (TaskId id = 1; id <= g.tasks; ++id) {
    g.weight[g.task_vertex(id)] = tg.module(id).exec;
  }
  for (int r = 1; r <= g.layers; ++r) {
    g.weight[g.layer_vertex(r)] = spans.at(r);
    g.layer_ref[r] = table.layer(r).ref;
    for (TaskId id : table.layer(r).tasks) g.placed[id] = 1;
  }
  for (const auto& e : tg.edges()) g.add_edge(g.task_vertex(e.from), g.task_vertex(e.to), EdgeKind::Tg);
  for (int r = 1; r < g.layers; ++r) g.add_edge(g.layer_vertex(r), g.layer_vertex(r + 1), EdgeKind::Cr);
  for (int r = 1; r <= g.layers; ++r) {
    for (TaskId id : table.layer(r).tasks) g.add_edge(g.layer_vertex(r), g.task_vertex(id), EdgeKind::Ce);
  }
  for (int r = 1; r <= g.layers; ++r) {
    if (const int nx = table.next_in_drr(r)) {
      for (TaskId id : table.layer(r).tasks) g.add_edge(g.task_vertex(id), g.layer_vertex(nx), EdgeKind::Ec);
    }
  }
  return g;
}

inline Rcg build_rcg(const Pst& pst, const TaskGraph& tg, const std::vector<Ticks>& spans) {
  config_order(pst);
  return build_rcg(LayerTable(pst), tg, spans);
}

/// Topological order with ties broken by smallest vertex id; nullopt on a cycle.
inline std::optional<std::vector<int>> rcg_topo_order(const Rcg& g) {
  const int V = g.vertex_count();
  std::vector<int> indeg(V, 0);
  for (int v = 0; v < V; ++v) indeg[v] = static_cast<int>(g.pred[v].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < V; ++v) {
    if (!indeg[v]) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(V);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : g.succ[v]) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  if (static_cast<int>(order.size()) != V) return std::nullopt;
  return order;
}

inline bool is_acyclic(const Rcg& g) { return rcg_topo_order(g).has_value(); }

/// Some directed cycle, as a vertex list (empty when acyclic).
inline std::vector<int> find_cycle(const Rcg& g) {
  const int V = g.vertex_count();
  std::vector<char> color(V, 0);
  std::vector<int> parent(V, -1);
  for (int root = 0; root < V; ++root) {
    if (color[root]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < g.succ[v].size()) {
        const int w = g.succ[v][i++];
        if (color[w] == 1) {
          std::vector<int> cyc{w};
          for (int u = v; u != w; u = parent[u]) cyc.push_back(u);
          std::reverse(cyc.begin() + 1, cyc.end());
          return cyc;
        }
        if (!color[w]) {
          color[w] = 1;
          parent[w] = v;
          stack.push_back({w, 0});
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return {};
}

struct LongestPaths {
  std::vector<Ticks> fwd;  // heaviest path ending just before v
  std::vector<Ticks> rev;  // heaviest path starting just after v
  Ticks length = 0;        // max over placed tasks of fwd + weight
  std::vector<int> order;  // topological order used
};

inline LongestPaths longest_paths_fwd_rev(const Rcg& g) {
  auto order = rcg_topo_order(g);
  if (!order) throw InfeasibleError("reconfiguration constraint graph contains a cycle");
  const int V = g.vertex_count();
  LongestPaths lp;
  lp.fwd.assign(V, 0);
  lp.rev.assign(V, 0);
  for (int v : *order) {
    const Ticks f = lp.fwd[v] + g.weight[v];
    for (int w : g.succ[v]) lp.fwd[w] = std::max(lp.fwd[w], f);
  }
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    const int v = *it;
    Ticks best = 0;
    for (int w : g.succ[v]) best = std::max(best, lp.rev[w] + g.weight[w]);
    lp.rev[v] = best;
  }
  for (TaskId id = 1; id <= g.tasks; ++id) {
    if (g.placed[id]) {
      const int v = g.task_vertex(id);
      lp.length = std::max(lp.length, lp.fwd[v] + g.weight[v]);
    }
  }
  lp.order = std::move(*order);
  return lp;
}

struct Schedule {
  std::vector<Ticks> bc_layer;  // [rank]
  std::vector<Ticks> span;      // [rank]
  std::vector<Ticks> bt;        // [task id]
  std::vector<Ticks> bc_task;   // [task id]
  Ticks length = 0;
};

inline Schedule schedule(const Rcg& g) {
  if (!is_acyclic(g)) {
    std::string msg = "reconfiguration constraint graph contains a cycle:";
    for (int v : find_cycle(g)) msg += " " + describe_vertex(g, v);
    throw InfeasibleError(msg);
  }
  const LongestPaths lp = longest_paths_fwd_rev(g);
  Schedule s;
  s.bc_layer.assign(g.layers + 1, 0);
  s.span.assign(g.layers + 1, 0);
  s.bt.assign(g.tasks + 1, 0);
  s.bc_task.assign(g.tasks + 1, 0);
  for (int r = 1; r <= g.layers; ++r) {
    s.bc_layer[r] = lp.fwd[g.layer_vertex(r)];
    s.span[r] = g.weight[g.layer_vertex(r)];
  }
  for (TaskId id = 1; id <= g.tasks; ++id) {
    if (g.placed[id]) s.bt[id] = lp.fwd[g.task_vertex(id)];
  }
  for (int r = 1; r <= g.layers; ++r) {
    for (int v : g.succ[g.layer_vertex(r)]) {
      if (!g.is_layer(v)) s.bc_task[g.task_of(v)] = s.bc_layer[r];
    }
  }
  s.length = lp.length;
  return s;
}

inline std::string describe_witness(const std::pair<LayerRef, LayerRef>& w) {
  return "backward dependence from layer " + to_string(w.first) + " to layer " +
         to_string(w.second) + " without lifetime overlap";
}

/// Spans, RCG and schedule of a complete P-ST. An infeasible configuration
/// order is reported with its lifetime witness.
inline Schedule schedule_pst(const Pst& pst, const TaskGraph& tg, const ChipSpec& chip,
                             SpanMode mode, const Floorplan* fp = nullptr) {
  config_order(pst);
  const LayerTable table(pst);
  const auto feas = is_feasible(table, tg);
  if (!feas) throw InfeasibleError(describe_witness(*feas.witness));
  return schedule(build_rcg(table, tg, layer_spans(table, tg, chip, mode, fp)));
}

/// Checks the four scheduling constraints against a P-ST. Returns violations.
inline std::vector<std::string> verify_schedule(const Pst& pst, const TaskGraph& tg,
                                                const Schedule& s) {
  std::vector<std::string> out;
  const LayerTable table(pst);
  const int L = table.layer_count();
  if (static_cast<int>(s.bc_layer.size()) != L + 1 || static_cast<int>(s.bt.size()) != tg.size() + 1) {
    return {"schedule does not match the P-ST"};
  }
  auto end_of = [&](TaskId id) { return s.bt[id] + tg.module(id).exec; };
  for (const auto& e : tg.edges()) {
    if (!pst.contains(e.from) || !pst.contains(e.to)) continue;
    if (end_of(e.from) > s.bt[e.to]) {
      out.push_back("precedence " + std::to_string(e.from) + "->" + std::to_string(e.to) + " violated");
    }
  }
  for (int r = 1; r <= L; ++r) {
    for (TaskId id : table.layer(r).tasks) {
      if (s.bc_layer[r] + s.span[r] > s.bt[id]) {
        out.push_back("task " + std::to_string(id) + " starts before its layer is configured");
      }
    }
    if (s.bc_layer[r] < 0) out.push_back("layer " + to_string(table.layer(r).ref) + " starts before 0");
  }
  // Single configuration port: intervals pairwise disjoint.
  std::vector<int> by_start(L);
  for (int r = 1; r <= L; ++r) by_start[r - 1] = r;
  std::sort(by_start.begin(), by_start.end(), [&](int a, int b) {
    return std::pair(s.bc_layer[a], a) < std::pair(s.bc_layer[b], b);
  });
  for (int i = 1; i < L; ++i) {
    const int a = by_start[i - 1], b = by_start[i];
    if (s.bc_layer[a] + s.span[a] > s.bc_layer[b]) {
      out.push_back("configuration of layers " + to_string(table.layer(a).ref) + " and " +
                    to_string(table.layer(b).ref) + " overlap");
    }
  }
  for (int r = 1; r <= L; ++r) {
    const int nx = table.next_in_drr(r);
    if (!nx) continue;
    for (TaskId id : table.layer(r).tasks) {
      if (end_of(id) > s.bc_layer[nx]) {
        out.push_back("layer " + to_string(table.layer(nx).ref) + " reconfigured before task " +
                      std::to_string(id) + " finished");
      }
    }
  }
  Ticks T = 0;
  for (TaskId id : pst.ps) T = std::max(T, end_of(id));
  if (T != s.length) out.push_back("schedule length does not equal the latest task completion");
  return out;
}

}  // namespace pdr
