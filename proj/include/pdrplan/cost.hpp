#pragma once

// Area cost, communication cost and the weighted annealing objective, plus a
// one-call accurate evaluation of a complete P-ST.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "pdrplan/core_model.hpp"
#include "pdrplan/floorplan.hpp"
#include "pdrplan/rcg.hpp"

namespace pdr {

struct EdgeFactor {
  double alpha_d = 1.0;  // spatial (Manhattan distance) factor
  double beta_t = 0.0;   // temporal (idle gap) factor
  friend bool operator==(const EdgeFactor&, const EdgeFactor&) = default;
};

enum class EdgeClass { SameLayer = 0, SameDrr = 1, CrossDrr = 2 };

struct CostWeights {
  double alpha = 0.8;
  double beta = 0.15;
  double gamma = 0.05;
  double c1 = 1.0;
  std::array<EdgeFactor, 3> factors{{{1.0, 0.0}, {1.0, 1.5}, {3.0, 1.5}}};

  void check() const {
    if (alpha < 0 || beta < 0 || gamma < 0 || c1 < 0) throw ContractError("cost weights must be non-negative");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) throw ContractError("alpha + beta + gamma must equal 1");
    for (const auto& f : factors) {
      if (f.alpha_d < 0 || f.beta_t < 0) throw ContractError("edge factors must be non-negative");
    }
  }
  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

/// Penalty for exceeding the chip outline; zero iff Col <= Col0 and Row <= Row0.
inline double area_cost(int col, int row, const ChipSpec& chip, const CostWeights& w) {
  const double e_col = std::max(col - chip.cols, 0);
  const double e_row = std::max(row - chip.rows, 0);
  const double lambda = static_cast<double>(chip.rows) / chip.cols;
  return e_row + e_col * lambda + w.c1 * std::max(e_row, e_col * lambda);
}

inline EdgeClass edge_class(TaskId a, TaskId b, const Partition& part) {
  if (part.drr[a] != part.drr[b]) return EdgeClass::CrossDrr;
  return part.layer[a] == part.layer[b] ? EdgeClass::SameLayer : EdgeClass::SameDrr;
}

inline EdgeFactor edge_factor(TaskId a, TaskId b, const Partition& part, const CostWeights& w) {
  return w.factors[static_cast<int>(edge_class(a, b, part))];
}

/// Contribution of one dependence edge: comm * (alpha_d * distance + beta_t * gap_ms).
inline double edge_comm_cost(double comm, EdgeFactor f, double distance, double gap_ms) {
  return comm * (f.alpha_d * distance + f.beta_t * gap_ms);
}

struct CommCost {
  double total = 0.0;             // each edge once
  std::vector<double> per_task;   // [task id], each edge at both endpoints

  double per_task_sum() const {
    double s = 0.0;
    for (double v : per_task) s += v;
    return s;
  }
};

inline CommCost comm_cost(const TaskGraph& tg, const Partition& part, const Floorplan& fp,
                          const Schedule& s, const CostWeights& w) {
  CommCost cc;
  cc.per_task.assign(tg.size() + 1, 0.0);
  for (const auto& e : tg.edges()) {
    const Rect& a = fp.module_rect[e.from];
    const Rect& b = fp.module_rect[e.to];
    const double dist = std::abs(a.x - b.x) + std::abs(a.y - b.y);
    const Ticks gap = s.bt[e.to] - (s.bt[e.from] + tg.module(e.from).exec);
    const double v = edge_comm_cost(e.comm, edge_factor(e.from, e.to, part, w), dist, ticks_to_ms(gap));
    cc.total += v;
    cc.per_task[e.from] += v;
    cc.per_task[e.to] += v;
  }
  return cc;
}

/// Per-term scale of the objective; all must be positive.
struct Normalizers {
  double ac = 1.0;
  double t = 1.0;   // ms
  double cc = 1.0;
  friend bool operator==(const Normalizers&, const Normalizers&) = default;
};

inline double area_term(double ac, const CostWeights& w, const Normalizers& n) { return w.alpha * (ac / n.ac); }
inline double time_term(double t_ms, const CostWeights& w, const Normalizers& n) { return w.beta * (t_ms / n.t); }
inline double comm_term(double cc, const CostWeights& w, const Normalizers& n) { return w.gamma * (cc / n.cc); }

inline double combine_terms(double area, double time, double comm) { return (area + time) + comm; }

inline double objective(double ac, double t_ms, double cc, const CostWeights& w, const Normalizers& n) {
  if (!(n.ac > 0 && n.t > 0 && n.cc > 0)) throw ContractError("normalizers must be positive");
  return combine_terms(area_term(ac, w, n), time_term(t_ms, w, n), comm_term(cc, w, n));
}

struct EvalOptions {
  SpanMode span_mode = SpanMode::Sum;
  bool align = false;
};

struct Metrics {
  int cols = 0;
  int rows = 0;
  Ticks T = 0;
  double ac = 0.0;
  double cc = 0.0;
  double cc_per_task_sum = 0.0;
  double cost = 0.0;
  bool fits() const { return ac == 0.0; }
};

struct Evaluation {
  Floorplan fp;
  Schedule sched;
  CommCost comm;
  Metrics metrics;
};

/// Floorplan, schedule, costs and objective of a feasible P-ST.
inline Evaluation evaluate(const Pst& pst, const TaskGraph& tg, const ChipSpec& chip,
                           const EvalOptions& opt, const CostWeights& w, const Normalizers& n) {
  Evaluation ev;
  const LayerTable table(pst);
  ev.fp = evaluate_floorplan(pst, tg, chip, opt.align);
  const auto spans = layer_spans(table, tg, chip, opt.span_mode, &ev.fp);
  ev.sched = schedule(build_rcg(table, tg, spans));
  ev.comm = comm_cost(tg, pst.part, ev.fp, ev.sched, w);
  Metrics& m = ev.metrics;
  m.cols = ev.fp.cols;
  m.rows = ev.fp.rows;
  m.T = ev.sched.length;
  m.ac = area_cost(m.cols, m.rows, chip, w);
  m.cc = ev.comm.total;
  m.cc_per_task_sum = ev.comm.per_task_sum();
  m.cost = objective(m.ac, ticks_to_ms(m.T), m.cc, w, n);
  return ev;
}

namespace detail {

/// Reusable buffers for evaluate_metrics.
struct EvalScratch {
  std::vector<int> rank, qpos, layer_start, layer_drr, next_in_drr, prev_in_drr, last_of_drr;
  std::vector<int> by_layer_ps, cursor, x, y, lw, lh, dw, dh, dx, dy, drr_ps, drr_q, indeg, queue;
  std::vector<Ticks> span, fwd;
  std::vector<double> per_task;
};

/// Lower-left packing of items listed in PS order, with `qkey` giving their
/// relative QS order. Writes relative coordinates into x / y (indexed like
/// the item ids) and returns the envelope.
template <class W, class H, class Q>
Extent pack_in_ps_order(const int* ids, int m, W width, H height, Q qkey, int* x, int* y) {
  Extent e;
  for (int a = 0; a < m; ++a) {
    const int ia = ids[a];
    const int qa = qkey(ia);
    int v = 0;
    for (int b = 0; b < a; ++b) {
      const int ib = ids[b];
      if (qkey(ib) < qa) v = std::max(v, x[ib] + width(ib));
    }
    x[ia] = v;
    e.w = std::max(e.w, v + width(ia));
  }
  for (int a = m - 1; a >= 0; --a) {
    const int ia = ids[a];
    const int qa = qkey(ia);
    int v = 0;
    for (int b = a + 1; b < m; ++b) {
      const int ib = ids[b];
      if (qkey(ib) < qa) v = std::max(v, y[ib] + height(ib));
    }
    y[ia] = v;
    e.h = std::max(e.h, v + height(ia));
  }
  return e;
}

}  // namespace detail

/// Same metrics as evaluate() for a complete, feasible P-ST, computed on flat
/// buffers without building the floorplan, graph or schedule objects.
inline Metrics evaluate_metrics(const Pst& pst, const TaskGraph& tg, const ChipSpec& chip,
                                const EvalOptions& opt, const CostWeights& w, const Normalizers& n) {
  thread_local detail::EvalScratch s;
  const int nt = tg.size();
  const auto& part = pst.part;
  const int m = pst.size();

  // Layer blocks by configuration rank.
  s.rank.assign(nt + 1, 0);
  s.layer_start.clear();
  s.layer_drr.clear();
  s.layer_start.push_back(0);
  s.layer_drr.push_back(0);
  int ndrr = 0;
  for (int i = 0; i < m; ++i) {
    const TaskId id = pst.rs[i];
    if (i == 0 || part.drr[id] != part.drr[pst.rs[i - 1]] || part.layer[id] != part.layer[pst.rs[i - 1]]) {
      s.layer_start.push_back(i);
      s.layer_drr.push_back(part.drr[id]);
      ndrr = std::max(ndrr, part.drr[id]);
    }
    s.rank[id] = static_cast<int>(s.layer_start.size()) - 1;
  }
  const int L = static_cast<int>(s.layer_start.size()) - 1;
  s.layer_start.push_back(m);
  s.next_in_drr.assign(L + 2, 0);
  s.prev_in_drr.assign(L + 2, 0);
  s.last_of_drr.assign(ndrr + 1, 0);
  for (int r = 1; r <= L; ++r) {
    const int d = s.layer_drr[r];
    if (const int p = s.last_of_drr[d]) {
      s.prev_in_drr[r] = p;
      s.next_in_drr[p] = r;
    }
    s.last_of_drr[d] = r;
  }

  // Floorplan: layers, DRR envelopes, DRRs.
  s.qpos.assign(nt + 1, 0);
  for (int i = 0; i < m; ++i) s.qpos[pst.qs[i]] = i;
  s.by_layer_ps.assign(m, 0);
  s.cursor.assign(s.layer_start.begin(), s.layer_start.end());
  for (TaskId id : pst.ps) s.by_layer_ps[s.cursor[s.rank[id]]++] = id;
  s.x.assign(nt + 1, 0);
  s.y.assign(nt + 1, 0);
  s.dw.assign(ndrr + 1, 0);
  s.dh.assign(ndrr + 1, 0);
  auto mw = [&](int id) { return tg.module(id).width; };
  auto mh = [&](int id) { return tg.module(id).height; };
  auto mq = [&](int id) { return s.qpos[id]; };
  for (int r = 1; r <= L; ++r) {
    const int b = s.layer_start[r];
    const Extent e = detail::pack_in_ps_order(s.by_layer_ps.data() + b, s.layer_start[r + 1] - b, mw, mh, mq,
                                              s.x.data(), s.y.data());
    const int d = s.layer_drr[r];
    s.dw[d] = std::max(s.dw[d], e.w);
    s.dh[d] = std::max(s.dh[d], e.h);
  }
  for (int d = 1; d <= ndrr; ++d) s.dh[d] = aligned_height(s.dh[d], chip, opt.align);
  s.drr_ps.clear();
  for (TaskId id : pst.ps) {
    if (s.drr_ps.empty() || s.drr_ps.back() != part.drr[id]) s.drr_ps.push_back(part.drr[id]);
  }
  s.drr_q.assign(ndrr + 1, 0);
  int qi = 0;
  for (int i = 0; i < m; ++i) {
    if (i == 0 || part.drr[pst.qs[i]] != part.drr[pst.qs[i - 1]]) s.drr_q[part.drr[pst.qs[i]]] = qi++;
  }
  s.dx.assign(ndrr + 1, 0);
  s.dy.assign(ndrr + 1, 0);
  const Extent tot = detail::pack_in_ps_order(
      s.drr_ps.data(), static_cast<int>(s.drr_ps.size()), [&](int d) { return s.dw[d]; },
      [&](int d) { return s.dh[d]; }, [&](int d) { return s.drr_q[d]; }, s.dx.data(), s.dy.data());

  // Longest paths over the implicit constraint graph: tasks 1..nt, layers nt+r.
  s.span.assign(L + 1, 0);
  for (int r = 1; r <= L; ++r) {
    if (opt.span_mode == SpanMode::Sum) {
      for (int i = s.layer_start[r]; i < s.layer_start[r + 1]; ++i) s.span[r] += tg.module(pst.rs[i]).config;
    } else {
      const int d = s.layer_drr[r];
      s.span[r] = chip.clb_config * s.dw[d] * s.dh[d];
    }
  }
  const int V = nt + L + 1;
  s.indeg.assign(V, 0);
  s.fwd.assign(V, 0);
  for (TaskId id = 1; id <= nt; ++id) s.indeg[id] = static_cast<int>(tg.in_edges(id).size()) + 1;
  for (int r = 1; r <= L; ++r) {
    s.indeg[nt + r] = (r > 1 ? 1 : 0);
    if (const int p = s.prev_in_drr[r]) s.indeg[nt + r] += s.layer_start[p + 1] - s.layer_start[p];
  }
  s.queue.clear();
  for (int v = 1; v < V; ++v) {
    if (!s.indeg[v]) s.queue.push_back(v);
  }
  auto relax = [&](int to, Ticks f) {
    s.fwd[to] = std::max(s.fwd[to], f);
    if (--s.indeg[to] == 0) s.queue.push_back(to);
  };
  Ticks T = 0;
  for (std::size_t head = 0; head < s.queue.size(); ++head) {
    const int v = s.queue[head];
    if (v <= nt) {
      const Ticks f = s.fwd[v] + tg.module(v).exec;
      T = std::max(T, f);
      for (int e : tg.out_edges(v)) relax(tg.edges()[e].to, f);
      if (const int nx = s.next_in_drr[s.rank[v]]) relax(nt + nx, f);
    } else {
      const int r = v - nt;
      const Ticks f = s.fwd[v] + s.span[r];
      if (r < L) relax(v + 1, f);
      for (int i = s.layer_start[r]; i < s.layer_start[r + 1]; ++i) relax(pst.rs[i], f);
    }
  }
  if (static_cast<int>(s.queue.size()) != V - 1) throw InfeasibleError("reconfiguration constraint graph contains a cycle");

  // Costs, in the same order as comm_cost.
  Metrics out;
  out.cols = tot.w;
  out.rows = tot.h;
  out.T = T;
  out.ac = area_cost(out.cols, out.rows, chip, w);
  s.per_task.assign(nt + 1, 0.0);
  double total = 0.0;
  for (const auto& e : tg.edges()) {
    const int da = part.drr[e.from], db = part.drr[e.to];
    const int xa = s.dx[da] + s.x[e.from], ya = s.dy[da] + s.y[e.from];
    const int xb = s.dx[db] + s.x[e.to], yb = s.dy[db] + s.y[e.to];
    const double dist = std::abs(xa - xb) + std::abs(ya - yb);
    const Ticks gap = s.fwd[e.to] - (s.fwd[e.from] + tg.module(e.from).exec);
    const double v = edge_comm_cost(e.comm, edge_factor(e.from, e.to, part, w), dist, ticks_to_ms(gap));
    total += v;
    s.per_task[e.from] += v;
    s.per_task[e.to] += v;
  }
  out.cc = total;
  double pts = 0.0;
  for (double v : s.per_task) pts += v;
  out.cc_per_task_sum = pts;
  out.cost = objective(out.ac, ticks_to_ms(out.T), out.cc, w, n);
  return out;
}

}  // namespace pdr
