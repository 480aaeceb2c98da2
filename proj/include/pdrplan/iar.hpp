#pragma once

// Insertion-after-Remove move.
//
// A task k is removed from a P-ST and re-inserted at an insertion point
// (p, q, r, choice): gaps p, q, r of PS, QS, RS (0 = before the first task)
// plus the target layer, which is a fresh layer in a fresh DRR, a fresh layer
// in an existing DRR, or an existing layer. Feasibility of a point depends on
// r and the choice only; lifetimes are compared in doubled ranks so a fresh
// layer configured after rank b gets the odd rank 2b + 1.
//
// Schedule length of every candidate is computed exactly from longest paths
// cached on the graph without k, so ranking all feasible points is cheap. The
// best few are then evaluated in full.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "pdrplan/core_model.hpp"
#include "pdrplan/cost.hpp"
#include "pdrplan/feasibility.hpp"
#include "pdrplan/floorplan.hpp"
#include "pdrplan/rcg.hpp"

namespace pdr {

enum class ChoiceKind : int { NewDrr = 1, NewLayer = 2, Existing = 3 };

inline const char* to_string(ChoiceKind k) {
  switch (k) {
    case ChoiceKind::NewDrr: return "new-drr";
    case ChoiceKind::NewLayer: return "new-layer";
    default: return "existing";
  }
}

/// Target of an insertion. NewDrr ignores drr/layer. NewLayer names the DRR
/// and the index the fresh layer receives; later layers of that DRR shift up.
struct LayerChoice {
  ChoiceKind kind = ChoiceKind::NewDrr;
  int drr = 0;
  int layer = 0;
  friend auto operator<=>(const LayerChoice&, const LayerChoice&) = default;
};

struct InsertionPoint {
  int p = 0;
  int q = 0;
  int r = 0;
  LayerChoice choice;

  auto key() const { return std::tuple(p, q, r, choice.kind, choice.drr, choice.layer); }
  friend bool operator==(const InsertionPoint& a, const InsertionPoint& b) { return a.key() == b.key(); }
  friend bool operator<(const InsertionPoint& a, const InsertionPoint& b) { return a.key() < b.key(); }
};

inline std::string to_string(const InsertionPoint& pt) {
  std::string s = "(" + std::to_string(pt.p) + "," + std::to_string(pt.q) + "," +
                  std::to_string(pt.r) + "," + to_string(pt.choice.kind);
  if (pt.choice.kind != ChoiceKind::NewDrr) {
    s += " " + to_string(LayerRef{pt.choice.drr, pt.choice.layer});
  }
  return s + ")";
}

/// Structural insertion of an absent task. The result is not validated.
inline Pst insert_task(const Pst& pst0, TaskId k, const InsertionPoint& pt) {
  if (pst0.contains(k)) throw ContractError("task " + std::to_string(k) + " is already placed");
  const int m = pst0.size();
  if (pt.p < 0 || pt.p > m || pt.q < 0 || pt.q > m || pt.r < 0 || pt.r > m) {
    throw ContractError("insertion gap out of range");
  }
  Pst out = pst0;
  out.ps.insert(out.ps.begin() + pt.p, k);
  out.qs.insert(out.qs.begin() + pt.q, k);
  out.rs.insert(out.rs.begin() + pt.r, k);
  auto& part = out.part;
  switch (pt.choice.kind) {
    case ChoiceKind::NewDrr:
      part.assign(k, {pst0.part.drr_count() + 1, 1});
      break;
    case ChoiceKind::NewLayer:
      for (TaskId id : pst0.ps) {
        if (part.drr[id] == pt.choice.drr && part.layer[id] >= pt.choice.layer) ++part.layer[id];
      }
      part.assign(k, {pt.choice.drr, pt.choice.layer});
      break;
    case ChoiceKind::Existing:
      part.assign(k, {pt.choice.drr, pt.choice.layer});
      break;
  }
  return out;
}

/// Deletes k from all sequences; an emptied layer or DRR disappears and the
/// remaining labels are compacted.
inline Pst remove_from_pst(const Pst& pst, TaskId k) {
  if (!pst.contains(k)) throw ContractError("task " + std::to_string(k) + " is not placed");
  Pst out = pst;
  const LayerRef l = pst.part.of(k);
  std::erase(out.ps, k);
  std::erase(out.qs, k);
  std::erase(out.rs, k);
  auto& part = out.part;
  part.assign(k, {0, 0});
  bool layer_empty = true, drr_empty = true;
  for (TaskId id : out.ps) {
    if (part.drr[id] == l.drr) {
      drr_empty = false;
      if (part.layer[id] == l.index) layer_empty = false;
    }
  }
  if (layer_empty) {
    for (TaskId id : out.ps) {
      if (part.drr[id] == l.drr && part.layer[id] > l.index) --part.layer[id];
    }
  }
  if (drr_empty) {
    for (TaskId id : out.ps) {
      if (part.drr[id] > l.drr) --part.drr[id];
    }
  }
  return out;
}

/// The point at which k sits in `pst`: inserting k at it into
/// remove_from_pst(pst, k) gives back `pst` up to DRR relabelling.
inline InsertionPoint locate_task(const Pst& pst, TaskId k) {
  if (!pst.contains(k)) throw ContractError("task " + std::to_string(k) + " is not placed");
  auto pos = [&](const std::vector<TaskId>& s) {
    return static_cast<int>(std::find(s.begin(), s.end(), k) - s.begin());
  };
  InsertionPoint pt{pos(pst.ps), pos(pst.qs), pos(pst.rs), {}};
  const LayerRef l = pst.part.of(k);
  int in_drr = 0, in_layer = 0;
  for (TaskId id : pst.ps) {
    if (pst.part.drr[id] == l.drr) {
      ++in_drr;
      if (pst.part.layer[id] == l.index) ++in_layer;
    }
  }
  if (in_drr == 1) {
    pt.choice = {ChoiceKind::NewDrr, 0, 0};
  } else if (in_layer == 1) {
    pt.choice = {ChoiceKind::NewLayer, l.drr, l.index};
  } else {
    pt.choice = {ChoiceKind::Existing, l.drr, l.index};
  }
  return pt;
}

/// Everything cached about the P-ST without k.
struct RemovalContext {
  const TaskGraph* tg = nullptr;
  ChipSpec chip;
  bool align = false;
  TaskId k = 0;

  Pst pst0;
  LayerTable table;
  LifetimeTable lt;
  std::vector<int> latest_bwd;  // [rank]
  InsertWindow window;
  std::vector<char> holds_succ;  // [rank] layer holds a closure successor of k

  std::vector<Ticks> span0;  // [rank], sum of member configuration times
  Rcg rcg0;
  LongestPaths lp0;
  Ticks T0 = 0;
  std::vector<Ticks> to_k;      // [vertex] heaviest path to k, ends excluded
  std::vector<Ticks> max_exit;  // [rank] latest completion among the layer's tasks

  Floorplan fp0;
  std::vector<Extent> drr_env;  // [drr] unaligned envelope of the DRR's layers
  std::vector<int> drr_ps, drr_qs;  // DRR block order in PS / QS
  std::vector<int> drr_qidx;        // [drr] position in drr_qs
  std::vector<std::vector<TaskId>> layer_ps;  // [rank] members in PS order
  std::vector<int> layer_qidx;      // [task] position within its layer's QS order
  std::vector<int> incident;        // k's edge indices, ascending
  std::vector<int> drr_psidx;       // [drr] position in drr_ps
  InsertionEnvelope drr_pack;       // DRR packing, heights aligned

  static constexpr Ticks kNoPath = std::numeric_limits<Ticks>::min();

  int m() const { return pst0.size(); }
  int layer_count() const { return table.layer_count(); }
  int drr_count() const { return table.drr_count(); }
};

inline RemovalContext make_context(Pst pst0, TaskId k, const TaskGraph& tg, const ChipSpec& chip,
                                   bool align, bool check = true) {
  RemovalContext c;
  c.tg = &tg;
  c.chip = chip;
  c.align = align;
  c.k = k;
  c.pst0 = std::move(pst0);
  if (check && c.pst0.size() > 0) config_order(c.pst0);
  c.table = LayerTable(c.pst0);
  const int L = c.table.layer_count();
  c.lt = lifetimes(c.table);
  c.latest_bwd = latest_backward_producer(c.table, tg);
  c.window = lifetime_window_for_insert(tg, c.table, c.lt, k);
  c.holds_succ.assign(L + 1, 0);
  for (TaskId s : tg.closure_succ(k)) {
    if (const int r = c.table.rank_of_task(s)) c.holds_succ[r] = 1;
  }

  c.span0 = layer_spans(c.table, tg, chip, SpanMode::Sum);
  c.rcg0 = build_rcg(c.table, tg, c.span0);
  c.lp0 = longest_paths_fwd_rev(c.rcg0);
  c.T0 = c.lp0.length;

  const int kv = c.rcg0.task_vertex(k);
  c.to_k.assign(c.rcg0.vertex_count(), RemovalContext::kNoPath);
  for (auto it = c.lp0.order.rbegin(); it != c.lp0.order.rend(); ++it) {
    const int v = *it;
    if (v == kv) continue;
    Ticks best = RemovalContext::kNoPath;
    for (int w : c.rcg0.succ[v]) {
      if (w == kv) {
        best = std::max<Ticks>(best, 0);
      } else if (c.to_k[w] != RemovalContext::kNoPath) {
        best = std::max(best, c.rcg0.weight[w] + c.to_k[w]);
      }
    }
    c.to_k[v] = best;
  }
  c.max_exit.assign(L + 1, 0);
  for (int r = 1; r <= L; ++r) {
    for (TaskId id : c.table.layer(r).tasks) {
      c.max_exit[r] = std::max(c.max_exit[r], c.lp0.fwd[c.rcg0.task_vertex(id)] + tg.module(id).exec);
    }
  }

  c.fp0 = evaluate_floorplan(c.pst0, tg, chip, align);
  c.drr_env.assign(c.table.drr_count() + 1, {});
  for (int r = 1; r <= L; ++r) {
    Extent& e = c.drr_env[c.table.layer(r).ref.drr];
    e.w = std::max(e.w, c.fp0.layer_extent[r].w);
    e.h = std::max(e.h, c.fp0.layer_extent[r].h);
  }
  c.drr_ps = drr_block_order(c.pst0.ps, c.pst0.part);
  c.drr_qs = drr_block_order(c.pst0.qs, c.pst0.part);
  c.drr_qidx.assign(c.table.drr_count() + 1, 0);
  for (int i = 0; i < static_cast<int>(c.drr_qs.size()); ++i) c.drr_qidx[c.drr_qs[i]] = i;
  c.layer_ps.assign(L + 1, {});
  for (TaskId id : c.pst0.ps) c.layer_ps[c.table.rank_of_task(id)].push_back(id);
  c.layer_qidx.assign(tg.size() + 1, 0);
  {
    std::vector<int> seen(L + 1, 0);
    for (TaskId id : c.pst0.qs) c.layer_qidx[id] = seen[c.table.rank_of_task(id)]++;
  }
  {
    const int N = c.table.drr_count();
    std::vector<int> w(N), h(N), q(N);
    c.drr_psidx.assign(N + 1, 0);
    for (int i = 0; i < N; ++i) {
      const int d = c.drr_ps[i];
      c.drr_psidx[d] = i;
      w[i] = c.drr_env[d].w;
      h[i] = aligned_height(c.drr_env[d].h, chip, align);
      q[i] = c.drr_qidx[d];
    }
    c.drr_pack.build(N, w.data(), h.data(), q.data());
  }
  c.incident = tg.out_edges(k);
  c.incident.insert(c.incident.end(), tg.in_edges(k).begin(), tg.in_edges(k).end());
  std::sort(c.incident.begin(), c.incident.end());
  return c;
}

/// Removes k from a feasible P-ST and caches the data needed to rank insertions.
inline RemovalContext remove_task(const Pst& pst, TaskId k, const TaskGraph& tg,
                                  const ChipSpec& chip, bool align = false, bool check = true) {
  return make_context(remove_from_pst(pst, k), k, tg, chip, align, check);
}

namespace detail {

inline constexpr int kStart = -1;
inline constexpr int kEnd = -2;

struct GapLabels {
  int drr_l, drr_r, rank_l, rank_r;
};

inline GapLabels gap_labels(const RemovalContext& c, const std::vector<TaskId>& seq, int g) {
  GapLabels o{kStart, kEnd, kStart, kEnd};
  if (g > 0) {
    o.drr_l = c.pst0.part.drr[seq[g - 1]];
    o.rank_l = c.table.rank_of_task(seq[g - 1]);
  }
  if (g < static_cast<int>(seq.size())) {
    o.drr_r = c.pst0.part.drr[seq[g]];
    o.rank_r = c.table.rank_of_task(seq[g]);
  }
  return o;
}

/// Whether a PS/QS gap admits the given kind of target.
inline bool spatial_gap_ok(const GapLabels& g, ChoiceKind kind, int drr, int rank) {
  switch (kind) {
    case ChoiceKind::NewDrr: return g.drr_l != g.drr_r;
    case ChoiceKind::NewLayer: return g.rank_l != g.rank_r && (g.drr_l == drr || g.drr_r == drr);
    default: return g.rank_l == rank || g.rank_r == rank;
  }
}

inline bool rs_gap_ok(const GapLabels& g, ChoiceKind kind, int rank) {
  if (kind == ChoiceKind::Existing) return g.rank_l == rank || g.rank_r == rank;
  return g.rank_l != g.rank_r;
}

/// Number of layers configured before an RS layer boundary gap.
inline int layers_before(const GapLabels& g) { return g.rank_l == kStart ? 0 : g.rank_l; }

/// DRR i's neighbours around a fresh layer configured after rank `before`.
inline std::pair<int, int> drr_neighbours(const RemovalContext& c, int drr, int before) {
  int prev = 0, next = 0;
  for (int r : c.table.drr_ranks(drr)) {
    if (r <= before) prev = r;
    else if (!next) next = r;
  }
  return {prev, next};
}

}  // namespace detail

/// Lifetime feasibility of a target chosen with RS gap `before` (fresh layers)
/// or target rank (existing layers), in doubled ranks.
inline bool target_feasible(const RemovalContext& c, ChoiceKind kind, int drr, int rank, int before) {
  const int mas = 2 * c.window.max_allowed_start;
  const int mre = 2 * c.window.min_required_end;
  const int inf = 2 * c.lt.infinity;
  if (kind == ChoiceKind::Existing) {
    return 2 * rank < mas && 2 * c.lt[rank].end > mre;
  }
  const int rho = 2 * before + 1;
  if (rho >= mas) return false;
  if (kind == ChoiceKind::NewDrr) return true;
  const auto [prev, next] = detail::drr_neighbours(c, drr, before);
  const int end = next ? 2 * next : inf;
  if (end <= mre) return false;
  if (prev && (c.holds_succ[prev] || rho <= 2 * c.latest_bwd[prev])) return false;
  return true;
}

/// Index a fresh layer in `drr` receives when configured after rank `before`.
inline int fresh_layer_index(const RemovalContext& c, int drr, int before) {
  int j = 1;
  for (int r : c.table.drr_ranks(drr)) {
    if (r <= before) ++j;
  }
  return j;
}

/// Structural admissibility and lifetime feasibility of a point.
inline bool is_feasible_point(const RemovalContext& c, const InsertionPoint& pt) {
  const int m = c.m();
  if (pt.p < 0 || pt.p > m || pt.q < 0 || pt.q > m || pt.r < 0 || pt.r > m) return false;
  const auto& ch = pt.choice;
  int rank = 0;
  if (ch.kind == ChoiceKind::NewDrr) {
    if (ch.drr != 0 || ch.layer != 0) return false;
  } else {
    if (ch.drr < 1 || ch.drr > c.drr_count()) return false;
    const int l = static_cast<int>(c.table.drr_ranks(ch.drr).size());
    if (ch.kind == ChoiceKind::Existing) {
      if (ch.layer < 1 || ch.layer > l) return false;
      rank = c.table.rank_of({ch.drr, ch.layer});
    }
  }
  const auto gp = detail::gap_labels(c, c.pst0.ps, pt.p);
  const auto gq = detail::gap_labels(c, c.pst0.qs, pt.q);
  const auto gr = detail::gap_labels(c, c.pst0.rs, pt.r);
  if (!detail::spatial_gap_ok(gp, ch.kind, ch.drr, rank)) return false;
  if (!detail::spatial_gap_ok(gq, ch.kind, ch.drr, rank)) return false;
  if (!detail::rs_gap_ok(gr, ch.kind, rank)) return false;
  const int before = detail::layers_before(gr);
  if (ch.kind == ChoiceKind::NewLayer && ch.layer != fresh_layer_index(c, ch.drr, before)) return false;
  return target_feasible(c, ch.kind, ch.drr, rank, before);
}

/// Exact schedule length (sum-mode spans) after inserting k at a target.
inline Ticks incremental_T(const RemovalContext& c, ChoiceKind kind, int drr, int rank, int before) {
  const TaskGraph& tg = *c.tg;
  const Rcg& g = c.rcg0;
  const auto& fwd = c.lp0.fwd;
  const auto& rev = c.lp0.rev;
  const int L = c.layer_count();
  const Ticks ck = tg.module(c.k).config;
  const Ticks tk = tg.module(c.k).exec;
  const int kv = g.task_vertex(c.k);

  Ticks lp_tl, c_tl, out_rest, via = RemovalContext::kNoPath;
  int next = 0;
  if (kind == ChoiceKind::Existing) {
    const int lv = g.layer_vertex(rank);
    lp_tl = fwd[lv];
    c_tl = c.span0[rank] + ck;
    out_rest = rev[lv];
    via = c.to_k[lv];
    next = c.table.next_in_drr(rank);
  } else {
    lp_tl = before ? fwd[g.layer_vertex(before)] + c.span0[before] : 0;
    c_tl = ck;
    const int succ = before < L ? before + 1 : 0;
    out_rest = 0;
    if (succ) {
      const int sv = g.layer_vertex(succ);
      out_rest = c.span0[succ] + rev[sv];
      if (c.to_k[sv] != RemovalContext::kNoPath) via = c.span0[succ] + c.to_k[sv];
    }
    if (kind == ChoiceKind::NewLayer) {
      const auto [prev, nx] = detail::drr_neighbours(c, drr, before);
      if (prev) lp_tl = std::max(lp_tl, c.max_exit[prev]);
      next = nx;
    }
  }
  const Ticks lp_k = std::max(fwd[kv], lp_tl + c_tl + std::max<Ticks>(0, via));
  Ticks lpr_k = rev[kv];
  if (next) lpr_k = std::max(lpr_k, c.span0[next] + rev[g.layer_vertex(next)]);
  return std::max({c.T0, lp_tl + c_tl + std::max(out_rest, tk + lpr_k), lp_k + tk + lpr_k});
}

inline Ticks incremental_T(const RemovalContext& c, const InsertionPoint& pt) {
  const auto gr = detail::gap_labels(c, c.pst0.rs, pt.r);
  const int rank = pt.choice.kind == ChoiceKind::Existing
                       ? c.table.rank_of({pt.choice.drr, pt.choice.layer})
                       : 0;
  return incremental_T(c, pt.choice.kind, pt.choice.drr, rank, detail::layers_before(gr));
}

/// All feasible insertion points, sorted by key.
inline std::vector<InsertionPoint> enumerate_insertion_points(const RemovalContext& c) {
  std::vector<InsertionPoint> out;
  const int m = c.m();
  auto emit = [&](ChoiceKind kind, int drr, int rank, auto layer_of_before) {
    std::vector<int> ps, qs;
    for (int g = 0; g <= m; ++g) {
      if (detail::spatial_gap_ok(detail::gap_labels(c, c.pst0.ps, g), kind, drr, rank)) ps.push_back(g);
      if (detail::spatial_gap_ok(detail::gap_labels(c, c.pst0.qs, g), kind, drr, rank)) qs.push_back(g);
    }
    for (int r = 0; r <= m; ++r) {
      const auto gr = detail::gap_labels(c, c.pst0.rs, r);
      if (!detail::rs_gap_ok(gr, kind, rank)) continue;
      const int before = detail::layers_before(gr);
      if (!target_feasible(c, kind, drr, rank, before)) continue;
      const LayerChoice ch{kind, drr, layer_of_before(before)};
      for (int p : ps) {
        for (int q : qs) out.push_back({p, q, r, ch});
      }
    }
  };
  emit(ChoiceKind::NewDrr, 0, 0, [](int) { return 0; });
  for (int d = 1; d <= c.drr_count(); ++d) {
    emit(ChoiceKind::NewLayer, d, 0, [&](int before) { return fresh_layer_index(c, d, before); });
  }
  for (int r = 1; r <= c.layer_count(); ++r) {
    const LayerRef ref = c.table.layer(r).ref;
    emit(ChoiceKind::Existing, ref.drr, r, [&](int) { return ref.index; });
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Rough evaluation
// ---------------------------------------------------------------------------

namespace detail {

/// Col x Row after DRR packing with the cached envelopes, DRR `grown` (if
/// non-zero) enlarged to `ext`, and, when `fresh` is set, an extra DRR of
/// extent `ext` at DRR-order positions (a, b).
inline std::pair<int, int> pack_drrs(const RemovalContext& c, int grown, Extent ext, bool fresh, int a, int b) {
  const int h = aligned_height(ext.h, c.chip, c.align);
  Extent e = c.drr_pack.base();
  if (fresh) {
    e = c.drr_pack.with(a, b, ext.w, h);
  } else if (grown) {
    const Extent& old = c.drr_env[grown];
    e = c.drr_pack.grown(c.drr_psidx[grown], ext.w, h, old.w, aligned_height(old.h, c.chip, c.align));
  }
  return {e.w, e.h};
}

/// Packing of the layer at `rank` without k, ready for insertion queries.
inline void layer_envelope(const RemovalContext& c, int rank, InsertionEnvelope& out) {
  thread_local std::vector<int> w, h, q;
  const auto& members = c.layer_ps[rank];
  const int s = static_cast<int>(members.size());
  w.resize(s);
  h.resize(s);
  q.resize(s);
  for (int i = 0; i < s; ++i) {
    const auto& mod = c.tg->module(members[i]);
    w[i] = mod.width;
    h[i] = mod.height;
    q[i] = c.layer_qidx[members[i]];
  }
  out.build(s, w.data(), h.data(), q.data());
}

/// For each gap g of seq, the number of DRR blocks that start before g.
inline std::vector<int> drr_prefix(const RemovalContext& c, const std::vector<TaskId>& seq) {
  std::vector<int> pre(seq.size() + 1, 0);
  int cnt = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i == 0 || c.pst0.part.drr[seq[i]] != c.pst0.part.drr[seq[i - 1]]) ++cnt;
    pre[i + 1] = cnt;
  }
  return pre;
}

/// For each gap g of seq, the number of members of the layer at `rank`
/// strictly before g.
inline std::vector<int> layer_prefix(const RemovalContext& c, const std::vector<TaskId>& seq, int rank) {
  std::vector<int> pre(seq.size() + 1, 0);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    pre[i + 1] = pre[i] + (c.table.rank_of_task(seq[i]) == rank ? 1 : 0);
  }
  return pre;
}

}  // namespace detail

/// Area cost of a new DRR placed at DRR-order positions (a, b) of PS / QS.
inline double area_new_drr(const RemovalContext& c, int a, int b, const CostWeights& w) {
  const auto& mod = c.tg->module(c.k);
  const auto [col, row] = detail::pack_drrs(c, 0, {mod.width, mod.height}, true, a, b);
  return area_cost(col, row, c.chip, w);
}

/// Area cost of growing DRR `drr` to envelope `grown`.
inline double area_grown_drr(const RemovalContext& c, int drr, Extent grown, const CostWeights& w) {
  const auto [col, row] = detail::pack_drrs(c, drr, grown, false, 0, 0);
  return area_cost(col, row, c.chip, w);
}

/// Envelope of the layer at `rank` with k inserted at relative positions
/// (a, b) of its PS / QS sub-sequences.
inline Extent layer_extent_with_k(const RemovalContext& c, int rank, int a, int b) {
  thread_local InsertionEnvelope env;
  detail::layer_envelope(c, rank, env);
  const auto& mod = c.tg->module(c.k);
  return env.with(a, b, mod.width, mod.height);
}

/// Envelope of DRR `drr` when one of its layers takes extent `e` (rank 0: a fresh layer).
inline Extent drr_env_with(const RemovalContext& c, int drr, int rank, Extent e) {
  Extent out = e;
  for (int r : c.table.drr_ranks(drr)) {
    if (r == rank) continue;
    out.w = std::max(out.w, c.fp0.layer_extent[r].w);
    out.h = std::max(out.h, c.fp0.layer_extent[r].h);
  }
  return out;
}

/// Communication estimate over k's edges with k at a placeholder position:
/// the target DRR's centre, or the chip centre for a new DRR. Neighbours use
/// their coordinates and start times without k.
inline double rough_comm(const RemovalContext& c, ChoiceKind kind, int drr, int rank,
                         const CostWeights& w) {
  const TaskGraph& tg = *c.tg;
  const TaskId k = c.k;
  double cx, cy;
  if (kind == ChoiceKind::NewDrr) {
    cx = c.chip.cols / 2.0;
    cy = c.chip.rows / 2.0;
  } else {
    const Rect& d = c.fp0.drr_rect[drr];
    cx = d.x + d.w / 2.0;
    cy = d.y + d.h / 2.0;
  }
  const Ticks lk = c.lp0.fwd[c.rcg0.task_vertex(k)];
  const Ticks tk = tg.module(k).exec;
  double total = 0.0;
  for (int e : c.incident) {
    const DepEdge& d = tg.edges()[e];
    const TaskId j = d.from == k ? d.to : d.from;
    EdgeClass cls = EdgeClass::CrossDrr;
    if (kind != ChoiceKind::NewDrr && c.pst0.part.drr[j] == drr) {
      cls = kind == ChoiceKind::Existing && c.table.rank_of_task(j) == rank ? EdgeClass::SameLayer
                                                                            : EdgeClass::SameDrr;
    }
    const Rect& rj = c.fp0.module_rect[j];
    const double dist = std::abs(cx - rj.x) + std::abs(cy - rj.y);
    const Ticks bj = c.lp0.fwd[c.rcg0.task_vertex(j)];
    const Ticks gap = d.from == k ? bj - (lk + tk) : lk - (bj + tg.module(j).exec);
    total += edge_comm_cost(d.comm, w.factors[static_cast<int>(cls)], dist,
                            ticks_to_ms(std::max<Ticks>(0, gap)));
  }
  return total;
}

/// Rough area cost of a point: exact Col x Row after inserting k, computed
/// from the layer / DRR envelopes without k.
inline double rough_area(const RemovalContext& c, const InsertionPoint& pt, const CostWeights& w) {
  const auto& ch = pt.choice;
  const auto& mod = c.tg->module(c.k);
  switch (ch.kind) {
    case ChoiceKind::NewDrr: {
      const auto pp = detail::drr_prefix(c, c.pst0.ps);
      const auto pq = detail::drr_prefix(c, c.pst0.qs);
      return area_new_drr(c, pp[pt.p], pq[pt.q], w);
    }
    case ChoiceKind::NewLayer:
      return area_grown_drr(c, ch.drr, drr_env_with(c, ch.drr, 0, {mod.width, mod.height}), w);
    default: {
      const int rank = c.table.rank_of({ch.drr, ch.layer});
      const auto pp = detail::layer_prefix(c, c.pst0.ps, rank);
      const auto pq = detail::layer_prefix(c, c.pst0.qs, rank);
      const Extent e = layer_extent_with_k(c, rank, pp[pt.p], pq[pt.q]);
      return area_grown_drr(c, ch.drr, drr_env_with(c, ch.drr, rank, e), w);
    }
  }
}

/// Rough objective of one feasible point.
inline double rough_cost(const RemovalContext& c, const InsertionPoint& pt, const CostWeights& w,
                         const Normalizers& n) {
  const int rank = pt.choice.kind == ChoiceKind::Existing
                       ? c.table.rank_of({pt.choice.drr, pt.choice.layer})
                       : 0;
  const double a = area_term(rough_area(c, pt, w), w, n);
  const double b = time_term(ticks_to_ms(incremental_T(c, pt)), w, n);
  const double cc = comm_term(rough_comm(c, pt.choice.kind, pt.choice.drr, rank, w), w, n);
  return combine_terms(a, b, cc);
}

struct ScoredPoint {
  InsertionPoint point;
  double cost = 0.0;
};

inline bool scored_less(const ScoredPoint& a, const ScoredPoint& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.point < b.point;
}

namespace detail {

struct SpatialTerm {
  double a;
  int p, q;
};

struct TemporalTerm {
  double b;
  int r;
  int layer;  // index stored in the choice
};

/// Bounded best-first set keyed by (cost, point).
class TopK {
 public:
  explicit TopK(int k) : k_(k) {}

  bool full() const { return static_cast<int>(heap_.size()) >= k_; }
  /// Worst retained cost; candidates strictly above it cannot enter.
  double bound() const { return full() ? heap_.front().cost : std::numeric_limits<double>::infinity(); }

  void offer(const ScoredPoint& s) {
    if (k_ <= 0) return;
    if (!full()) {
      heap_.push_back(s);
      std::push_heap(heap_.begin(), heap_.end(), scored_less);
    } else if (scored_less(s, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), scored_less);
      heap_.back() = s;
      std::push_heap(heap_.begin(), heap_.end(), scored_less);
    }
  }

  std::vector<ScoredPoint> take() {
    std::sort(heap_.begin(), heap_.end(), scored_less);
    return std::move(heap_);
  }

 private:
  int k_;
  std::vector<ScoredPoint> heap_;
};

/// Offers the cross product A x B (both sorted ascending) with cost
/// (a + b) + c, pruning on monotonicity in a and b.
inline void offer_group(TopK& top, std::vector<SpatialTerm>& A, std::vector<TemporalTerm>& B,
                        double c, ChoiceKind kind, int drr) {
  if (A.empty() || B.empty()) return;
  std::sort(A.begin(), A.end(), [](const SpatialTerm& x, const SpatialTerm& y) {
    return std::tie(x.a, x.p, x.q) < std::tie(y.a, y.p, y.q);
  });
  std::sort(B.begin(), B.end(), [](const TemporalTerm& x, const TemporalTerm& y) {
    return std::tie(x.b, x.r) < std::tie(y.b, y.r);
  });
  for (const auto& sa : A) {
    if (combine_terms(sa.a, B.front().b, c) > top.bound()) break;
    for (const auto& tb : B) {
      const double cost = combine_terms(sa.a, tb.b, c);
      if (cost > top.bound()) break;
      top.offer({{sa.p, sa.q, tb.r, {kind, drr, tb.layer}}, cost});
    }
  }
}

}  // namespace detail

/// The `limit` best feasible points by rough cost, ordered by (cost, point).
/// Identical to ranking every point with rough_cost, without touching most.
inline std::vector<ScoredPoint> rough_candidates(const RemovalContext& c, const CostWeights& w,
                                                 const Normalizers& n, int limit) {
  detail::TopK top(limit);
  const int m = c.m();
  const auto& mod = c.tg->module(c.k);

  // Gap labels once per sequence.
  std::vector<detail::GapLabels> gp(m + 1), gq(m + 1), gr(m + 1);
  for (int g = 0; g <= m; ++g) {
    gp[g] = detail::gap_labels(c, c.pst0.ps, g);
    gq[g] = detail::gap_labels(c, c.pst0.qs, g);
    gr[g] = detail::gap_labels(c, c.pst0.rs, g);
  }

  std::vector<detail::SpatialTerm> A;
  std::vector<detail::TemporalTerm> B;
  InsertionEnvelope lenv;

  // Fresh layer in a fresh DRR.
  {
    const auto pp = detail::drr_prefix(c, c.pst0.ps);
    const auto pq = detail::drr_prefix(c, c.pst0.qs);
    const int N = c.drr_count();
    std::vector<double> grid((N + 1) * (N + 1), -1.0);
    A.clear();
    for (int p = 0; p <= m; ++p) {
      if (!detail::spatial_gap_ok(gp[p], ChoiceKind::NewDrr, 0, 0)) continue;
      for (int q = 0; q <= m; ++q) {
        if (!detail::spatial_gap_ok(gq[q], ChoiceKind::NewDrr, 0, 0)) continue;
        double& v = grid[pp[p] * (N + 1) + pq[q]];
        if (v < 0) v = area_term(area_new_drr(c, pp[p], pq[q], w), w, n);
        A.push_back({v, p, q});
      }
    }
    B.clear();
    for (int r = 0; r <= m; ++r) {
      if (!detail::rs_gap_ok(gr[r], ChoiceKind::NewDrr, 0)) continue;
      const int before = detail::layers_before(gr[r]);
      if (!target_feasible(c, ChoiceKind::NewDrr, 0, 0, before)) continue;
      B.push_back({time_term(ticks_to_ms(incremental_T(c, ChoiceKind::NewDrr, 0, 0, before)), w, n), r, 0});
    }
    const double cc = comm_term(rough_comm(c, ChoiceKind::NewDrr, 0, 0, w), w, n);
    detail::offer_group(top, A, B, cc, ChoiceKind::NewDrr, 0);
  }

  // Fresh layer in an existing DRR.
  for (int d = 1; d <= c.drr_count(); ++d) {
    B.clear();
    for (int r = 0; r <= m; ++r) {
      if (!detail::rs_gap_ok(gr[r], ChoiceKind::NewLayer, 0)) continue;
      const int before = detail::layers_before(gr[r]);
      if (!target_feasible(c, ChoiceKind::NewLayer, d, 0, before)) continue;
      B.push_back({time_term(ticks_to_ms(incremental_T(c, ChoiceKind::NewLayer, d, 0, before)), w, n), r,
                   fresh_layer_index(c, d, before)});
    }
    if (B.empty()) continue;
    const double a = area_term(area_grown_drr(c, d, drr_env_with(c, d, 0, {mod.width, mod.height}), w), w, n);
    A.clear();
    for (int p = 0; p <= m; ++p) {
      if (!detail::spatial_gap_ok(gp[p], ChoiceKind::NewLayer, d, 0)) continue;
      for (int q = 0; q <= m; ++q) {
        if (detail::spatial_gap_ok(gq[q], ChoiceKind::NewLayer, d, 0)) A.push_back({a, p, q});
      }
    }
    const double cc = comm_term(rough_comm(c, ChoiceKind::NewLayer, d, 0, w), w, n);
    detail::offer_group(top, A, B, cc, ChoiceKind::NewLayer, d);
  }

  // Existing layer.
  for (int rank = 1; rank <= c.layer_count(); ++rank) {
    if (!target_feasible(c, ChoiceKind::Existing, 0, rank, 0)) continue;
    const LayerRef ref = c.table.layer(rank).ref;
    const double b = time_term(ticks_to_ms(incremental_T(c, ChoiceKind::Existing, ref.drr, rank, 0)), w, n);
    B.clear();
    for (int r = 0; r <= m; ++r) {
      if (detail::rs_gap_ok(gr[r], ChoiceKind::Existing, rank)) B.push_back({b, r, ref.index});
    }
    const auto pp = detail::layer_prefix(c, c.pst0.ps, rank);
    const auto pq = detail::layer_prefix(c, c.pst0.qs, rank);
    const int size = static_cast<int>(c.table.layer(rank).tasks.size());
    std::vector<double> grid((size + 1) * (size + 1), -1.0);
    detail::layer_envelope(c, rank, lenv);
    A.clear();
    for (int p = 0; p <= m; ++p) {
      if (!detail::spatial_gap_ok(gp[p], ChoiceKind::Existing, 0, rank)) continue;
      for (int q = 0; q <= m; ++q) {
        if (!detail::spatial_gap_ok(gq[q], ChoiceKind::Existing, 0, rank)) continue;
        double& v = grid[pp[p] * (size + 1) + pq[q]];
        if (v < 0) {
          const Extent e = lenv.with(pp[p], pq[q], mod.width, mod.height);
          v = area_term(area_grown_drr(c, ref.drr, drr_env_with(c, ref.drr, rank, e), w), w, n);
        }
        A.push_back({v, p, q});
      }
    }
    const double cc = comm_term(rough_comm(c, ChoiceKind::Existing, ref.drr, rank, w), w, n);
    detail::offer_group(top, A, B, cc, ChoiceKind::Existing, ref.drr);
  }
  return top.take();
}

struct Commit {
  Pst pst;
  InsertionPoint point;
  Metrics metrics;
  int candidates = 0;  // points evaluated accurately
};

/// Full evaluation of the best `cip_size` rough candidates; commits the best
/// by (cost, point).
inline Commit select_and_commit(const RemovalContext& c, const CostWeights& w, const Normalizers& n,
                                int cip_size, const EvalOptions& opt) {
  const auto cands = rough_candidates(c, w, n, std::max(cip_size, 1));
  if (cands.empty()) throw ContractError("no feasible insertion point");
  Commit best;
  bool have = false;
  for (const auto& s : cands) {
    Pst pst = insert_task(c.pst0, c.k, s.point);
    const Metrics mt = evaluate_metrics(pst, *c.tg, c.chip, opt, w, n);
    const bool better = !have || mt.cost < best.metrics.cost || (mt.cost == best.metrics.cost && s.point < best.point);
    if (better) {
      best.pst = std::move(pst);
      best.point = s.point;
      best.metrics = mt;
      have = true;
    }
  }
  best.candidates = static_cast<int>(cands.size());
  return best;
}

}  // namespace pdr
