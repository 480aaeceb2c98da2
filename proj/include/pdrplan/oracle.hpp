#pragma once

// Brute-force reference implementations. Everything here is written from the
// definitions with its own graph, packing and sequence code, so agreement with
// the optimized modules is meaningful. Only plain data types are shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pdrplan/core_model.hpp"
#include "pdrplan/cost.hpp"
#include "pdrplan/iar.hpp"

namespace pdr::oracle {

struct SmallInstanceBudget {
  int max_n = 6;
  std::int64_t max_enumerations = 2'000'000;

  void check() const {
    if (max_n > 8) throw ContractError("oracle budget max_n must be at most 8");
  }
};

namespace detail {

/// Directed graph with adjacency lists and vertex weights.
struct Graph {
  std::vector<std::vector<int>> adj;
  std::vector<std::int64_t> wt;

  int add_vertex(std::int64_t w) {
    adj.emplace_back();
    wt.push_back(w);
    return static_cast<int>(wt.size()) - 1;
  }
  void edge(int a, int b) { adj[a].push_back(b); }
};

inline bool has_cycle(const Graph& g) {
  std::vector<int> state(g.adj.size(), 0);
  std::function<bool(int)> dfs = [&](int v) {
    state[v] = 1;
    for (int w : g.adj[v]) {
      if (state[w] == 1) return true;
      if (state[w] == 0 && dfs(w)) return true;
    }
    state[v] = 2;
    return false;
  };
  for (int v = 0; v < static_cast<int>(g.adj.size()); ++v) {
    if (state[v] == 0 && dfs(v)) return true;
  }
  return false;
}

/// Longest path into each vertex (own weight excluded) by repeated relaxation.
inline std::vector<std::int64_t> relax_longest(const Graph& g) {
  const int V = static_cast<int>(g.adj.size());
  std::vector<std::int64_t> d(V, 0);
  for (int iter = 0; iter <= V; ++iter) {
    bool changed = false;
    for (int a = 0; a < V; ++a) {
      for (int b : g.adj[a]) {
        if (d[a] + g.wt[a] > d[b]) {
          d[b] = d[a] + g.wt[a];
          changed = true;
        }
      }
    }
    if (!changed) return d;
  }
  throw ContractError("relaxation did not converge (cycle)");
}

/// A layer is identified by its (drr, index) label pair.
using Label = std::pair<int, int>;

/// Layer labels in the order their blocks first appear in RS.
inline std::vector<Label> rs_layer_order(const Pst& pst) {
  std::vector<Label> order;
  for (TaskId id : pst.rs) {
    const Label l{pst.part.drr[id], pst.part.layer[id]};
    if (std::find(order.begin(), order.end(), l) == order.end()) order.push_back(l);
  }
  return order;
}

struct BuiltRcg {
  Graph g;
  std::map<TaskId, int> task_v;
  std::map<Label, int> layer_v;
  std::vector<Label> order;
};

/// RCG with every configuration-order pair as an edge.
inline BuiltRcg build_full_rcg(const Pst& pst, const TaskGraph& tg, const std::map<Label, std::int64_t>& span) {
  BuiltRcg b;
  for (TaskId id = 1; id <= tg.size(); ++id) b.task_v[id] = b.g.add_vertex(tg.module(id).exec);
  b.order = rs_layer_order(pst);
  for (const Label& l : b.order) b.layer_v[l] = b.g.add_vertex(span.at(l));
  for (const auto& e : tg.edges()) b.g.edge(b.task_v[e.from], b.task_v[e.to]);
  for (std::size_t i = 0; i < b.order.size(); ++i) {
    for (std::size_t j = i + 1; j < b.order.size(); ++j) b.g.edge(b.layer_v[b.order[i]], b.layer_v[b.order[j]]);
  }
  for (TaskId id : pst.rs) {
    const Label l{pst.part.drr[id], pst.part.layer[id]};
    b.g.edge(b.layer_v[l], b.task_v[id]);
    const Label nx{l.first, l.second + 1};
    if (b.layer_v.count(nx)) b.g.edge(b.task_v[id], b.layer_v[nx]);
  }
  return b;
}

inline std::map<Label, std::int64_t> sum_spans(const Pst& pst, const TaskGraph& tg) {
  std::map<Label, std::int64_t> s;
  for (TaskId id : pst.rs) s[{pst.part.drr[id], pst.part.layer[id]}] += tg.module(id).config;
  return s;
}

/// Structural validity written directly from the block rules.
inline bool valid_structure(const Pst& pst) {
  const int m = pst.size();
  if (m == 0 || static_cast<int>(pst.qs.size()) != m || static_cast<int>(pst.rs.size()) != m) return false;
  auto contiguous = [&](const std::vector<TaskId>& seq, auto key) {
    std::map<decltype(key(0)), std::vector<int>> pos;
    for (int i = 0; i < m; ++i) pos[key(seq[i])].push_back(i);
    for (auto& [k, v] : pos) {
      if (v.back() - v.front() + 1 != static_cast<int>(v.size())) return false;
    }
    return true;
  };
  auto layer = [&](TaskId id) { return Label{pst.part.drr[id], pst.part.layer[id]}; };
  auto drr = [&](TaskId id) { return pst.part.drr[id]; };
  if (!contiguous(pst.ps, layer) || !contiguous(pst.qs, layer) || !contiguous(pst.rs, layer)) return false;
  if (!contiguous(pst.ps, drr) || !contiguous(pst.qs, drr)) return false;
  std::map<int, std::set<int>> layers;
  for (TaskId id : pst.ps) layers[drr(id)].insert(pst.part.layer[id]);
  int expect = 1;
  for (auto& [d, ls] : layers) {
    if (d != expect++) return false;
    int j = 1;
    for (int l : ls) {
      if (l != j++) return false;
    }
  }
  std::map<int, int> last;
  for (const Label& l : rs_layer_order(pst)) {
    if (last.count(l.first) && last[l.first] > l.second) return false;
    last[l.first] = l.second;
  }
  return true;
}

inline Pst brute_insert(const Pst& pst0, TaskId k, const InsertionPoint& pt, int new_drr) {
  Pst out = pst0;
  out.ps.insert(out.ps.begin() + pt.p, k);
  out.qs.insert(out.qs.begin() + pt.q, k);
  out.rs.insert(out.rs.begin() + pt.r, k);
  if (pt.choice.kind == ChoiceKind::NewDrr) {
    out.part.drr[k] = new_drr;
    out.part.layer[k] = 1;
  } else {
    if (pt.choice.kind == ChoiceKind::NewLayer) {
      for (TaskId id : pst0.ps) {
        if (out.part.drr[id] == pt.choice.drr && out.part.layer[id] >= pt.choice.layer) out.part.layer[id] += 1;
      }
    }
    out.part.drr[k] = pt.choice.drr;
    out.part.layer[k] = pt.choice.layer;
  }
  return out;
}

}  // namespace detail

/// Schedulability by cycle detection on the full constraint graph.
inline bool brute_feasibility(const Pst& pst, const TaskGraph& tg) {
  return !detail::has_cycle(detail::build_full_rcg(pst, tg, detail::sum_spans(pst, tg)).g);
}

/// Longest path (own weight excluded) into every vertex by enumerating every
/// path backwards from it. Exponential; capped by the budget.
inline std::vector<Ticks> brute_longest_path(const Rcg& rcg, const SmallInstanceBudget& budget = {}) {
  const int V = rcg.vertex_count();
  std::int64_t steps = 0;
  std::function<Ticks(int)> into = [&](int v) -> Ticks {
    if (++steps > budget.max_enumerations) throw OracleAbort("path enumeration budget exceeded");
    Ticks best = 0;
    for (int u : rcg.pred[v]) best = std::max(best, into(u) + rcg.weight[u]);
    return best;
  };
  std::vector<Ticks> lp(V);
  for (int v = 0; v < V; ++v) lp[v] = into(v);
  return lp;
}

/// Sequence-pair packing from the explicit horizontal and vertical
/// constraint graphs (left-of / below relations, pairwise).
inline std::vector<Rect> brute_pack(const std::vector<PackItem>& items, const std::vector<int>& ps,
                                    const std::vector<int>& qs) {
  const int m = static_cast<int>(items.size());
  auto index_in = [](const std::vector<int>& s, int id) {
    return static_cast<int>(std::find(s.begin(), s.end(), id) - s.begin());
  };
  detail::Graph hg, vg;
  for (const auto& it : items) {
    hg.add_vertex(it.w);
    vg.add_vertex(it.h);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const int pi = index_in(ps, items[i].id), pj = index_in(ps, items[j].id);
      const int qi = index_in(qs, items[i].id), qj = index_in(qs, items[j].id);
      if (pi < pj && qi < qj) hg.edge(i, j);  // i left of j
      if (pi > pj && qi < qj) vg.edge(i, j);  // i below j
    }
  }
  const auto x = detail::relax_longest(hg);
  const auto y = detail::relax_longest(vg);
  std::vector<Rect> out(m);
  for (int i = 0; i < m; ++i) {
    out[i] = {static_cast<int>(x[i]), static_cast<int>(y[i]), items[i].w, items[i].h};
  }
  return out;
}

/// Every (p, q, r, choice) whose inserted P-ST is structurally valid and whose
/// full constraint graph is acyclic. Sorted by key.
inline std::vector<InsertionPoint> brute_insertion_set(const Pst& pst0, TaskId k, const TaskGraph& tg,
                                                       const SmallInstanceBudget& budget = {}) {
  budget.check();
  if (tg.size() > budget.max_n) throw OracleAbort("instance larger than the oracle budget");
  const int m = pst0.size();
  std::map<int, int> layer_count;
  for (TaskId id : pst0.ps) layer_count[pst0.part.drr[id]] = std::max(layer_count[pst0.part.drr[id]], pst0.part.layer[id]);
  const int N = static_cast<int>(layer_count.size());

  std::vector<LayerChoice> choices{{ChoiceKind::NewDrr, 0, 0}};
  for (auto [d, l] : layer_count) {
    for (int j = 1; j <= l + 1; ++j) choices.push_back({ChoiceKind::NewLayer, d, j});
    for (int j = 1; j <= l; ++j) choices.push_back({ChoiceKind::Existing, d, j});
  }
  std::vector<InsertionPoint> out;
  std::int64_t count = 0;
  for (int p = 0; p <= m; ++p) {
    for (int q = 0; q <= m; ++q) {
      for (int r = 0; r <= m; ++r) {
        for (const auto& ch : choices) {
          if (++count > budget.max_enumerations) throw OracleAbort("insertion enumeration budget exceeded");
          const InsertionPoint pt{p, q, r, ch};
          const Pst cand = detail::brute_insert(pst0, k, pt, N + 1);
          if (detail::valid_structure(cand) && brute_feasibility(cand, tg)) out.push_back(pt);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct BruteEvaluation {
  int cols = 0;
  int rows = 0;
  Ticks T = 0;
  double ac = 0.0;
  double cc = 0.0;
  double cost = 0.0;
};

/// Floorplan, schedule and objective of a valid feasible P-ST from scratch.
inline BruteEvaluation brute_evaluate(const Pst& pst, const TaskGraph& tg, const ChipSpec& chip,
                                      const EvalOptions& opt, const CostWeights& w, const Normalizers& n) {
  using detail::Label;
  // Floorplan: each layer, then the DRR envelopes, then the DRRs.
  std::map<Label, std::vector<int>> lps, lqs;
  for (TaskId id : pst.ps) lps[{pst.part.drr[id], pst.part.layer[id]}].push_back(id);
  for (TaskId id : pst.qs) lqs[{pst.part.drr[id], pst.part.layer[id]}].push_back(id);
  std::map<TaskId, Rect> rel;
  std::map<int, std::pair<int, int>> env;
  for (auto& [l, seq] : lps) {
    std::vector<PackItem> items;
    for (int id : seq) items.push_back({id, tg.module(id).width, tg.module(id).height});
    const auto rects = brute_pack(items, seq, lqs[l]);
    auto& e = env[l.first];
    for (std::size_t i = 0; i < items.size(); ++i) {
      rel[items[i].id] = rects[i];
      e.first = std::max(e.first, rects[i].x + rects[i].w);
      e.second = std::max(e.second, rects[i].y + rects[i].h);
    }
  }
  std::vector<int> dps, dqs;
  for (TaskId id : pst.ps) {
    if (std::find(dps.begin(), dps.end(), pst.part.drr[id]) == dps.end()) dps.push_back(pst.part.drr[id]);
  }
  for (TaskId id : pst.qs) {
    if (std::find(dqs.begin(), dqs.end(), pst.part.drr[id]) == dqs.end()) dqs.push_back(pst.part.drr[id]);
  }
  std::vector<PackItem> ditems;
  for (auto& [d, e] : env) {
    int h = e.second;
    if (opt.align && chip.frame_rows > 0 && h % chip.frame_rows) h += chip.frame_rows - h % chip.frame_rows;
    ditems.push_back({d, e.first, h});
  }
  const auto drects = brute_pack(ditems, dps, dqs);
  std::map<int, Rect> drr_rect;
  BruteEvaluation ev;
  for (std::size_t i = 0; i < ditems.size(); ++i) {
    drr_rect[ditems[i].id] = drects[i];
    ev.cols = std::max(ev.cols, drects[i].x + drects[i].w);
    ev.rows = std::max(ev.rows, drects[i].y + drects[i].h);
  }
  std::map<TaskId, std::pair<int, int>> pos;
  for (auto& [id, r] : rel) {
    const Rect& d = drr_rect[pst.part.drr[id]];
    pos[id] = {d.x + r.x, d.y + r.y};
  }

  // Schedule.
  std::map<Label, std::int64_t> span;
  if (opt.span_mode == SpanMode::Sum) {
    span = detail::sum_spans(pst, tg);
  } else {
    for (TaskId id : pst.rs) {
      const Rect& d = drr_rect[pst.part.drr[id]];
      span[{pst.part.drr[id], pst.part.layer[id]}] = chip.clb_config * d.w * d.h;
    }
  }
  const auto b = detail::build_full_rcg(pst, tg, span);
  const auto lp = detail::relax_longest(b.g);
  std::map<TaskId, Ticks> bt;
  for (TaskId id : pst.ps) {
    bt[id] = lp[b.task_v.at(id)];
    ev.T = std::max(ev.T, bt[id] + tg.module(id).exec);
  }

  // Costs.
  const double e_col = std::max(ev.cols - chip.cols, 0);
  const double e_row = std::max(ev.rows - chip.rows, 0);
  const double lambda = static_cast<double>(chip.rows) / chip.cols;
  ev.ac = e_row + e_col * lambda + w.c1 * std::max(e_row, e_col * lambda);
  for (const auto& e : tg.edges()) {
    const auto [xi, yi] = pos[e.from];
    const auto [xj, yj] = pos[e.to];
    int cls = 2;
    if (pst.part.drr[e.from] == pst.part.drr[e.to]) cls = pst.part.layer[e.from] == pst.part.layer[e.to] ? 0 : 1;
    const double dist = std::abs(xi - xj) + std::abs(yi - yj);
    const double gap = static_cast<double>(bt[e.to] - (bt[e.from] + tg.module(e.from).exec)) / 1e6;
    ev.cc += e.comm * (w.factors[cls].alpha_d * dist + w.factors[cls].beta_t * gap);
  }
  const double t_ms = static_cast<double>(ev.T) / 1e6;
  ev.cost = (w.alpha * (ev.ac / n.ac) + w.beta * (t_ms / n.t)) + w.gamma * (ev.cc / n.cc);
  return ev;
}

struct BruteBest {
  InsertionPoint point;
  Pst pst;
  BruteEvaluation eval;
  int feasible = 0;
};

/// Exhaustive best insertion of k into pst0, ties broken by point order.
inline BruteBest brute_best_insertion(const Pst& pst0, TaskId k, const TaskGraph& tg, const ChipSpec& chip,
                                      const EvalOptions& opt, const CostWeights& w, const Normalizers& n,
                                      const SmallInstanceBudget& budget = {}) {
  const auto pts = brute_insertion_set(pst0, k, tg, budget);
  if (pts.empty()) throw OracleAbort("no feasible insertion point");
  std::map<int, int> drrs;
  for (TaskId id : pst0.ps) drrs[pst0.part.drr[id]] = 1;
  BruteBest best;
  best.feasible = static_cast<int>(pts.size());
  bool have = false;
  for (const auto& pt : pts) {
    Pst cand = detail::brute_insert(pst0, k, pt, static_cast<int>(drrs.size()) + 1);
    const auto ev = brute_evaluate(cand, tg, chip, opt, w, n);
    if (!have || ev.cost < best.eval.cost || (ev.cost == best.eval.cost && pt < best.point)) {
      best.point = pt;
      best.pst = std::move(cand);
      best.eval = ev;
      have = true;
    }
  }
  return best;
}

}  // namespace pdr::oracle
