#pragma once

// Hierarchical sequence-pair floorplanning: each time layer is packed from
// its PS/QS sub-sequences, a DRR is the envelope of its layers, and the DRRs
// are packed by their block order in PS/QS.

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pdrplan/core_model.hpp"

namespace pdr {

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  int right() const { return x + w; }
  int top() const { return y + h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Extent {
  int w = 0;
  int h = 0;
  friend bool operator==(const Extent&, const Extent&) = default;
};

struct PackItem {
  int id = 0;
  int w = 0;
  int h = 0;
};

/// Lower-left packing of a sequence pair. `a` is left of `b` when it precedes
/// `b` in both orders; `a` is below `b` when it follows `b` in PS but precedes
/// it in QS. Coordinates are weighted longest common subsequence lengths.
/// Returns one rect per item, in `items` order.
inline std::vector<Rect> pack_sequence_pair(std::span<const PackItem> items,
                                            std::span<const int> ps_order,
                                            std::span<const int> qs_order) {
  const int m = static_cast<int>(items.size());
  int max_id = 0;
  for (const auto& it : items) max_id = std::max(max_id, it.id);
  std::vector<int> slot(max_id + 1, -1);
  for (int i = 0; i < m; ++i) slot[items[i].id] = i;

  std::vector<int> order(m), qpos(m);
  for (int i = 0; i < m; ++i) order[i] = slot[ps_order[i]];
  for (int i = 0; i < m; ++i) qpos[slot[qs_order[i]]] = i;

  std::vector<Rect> out(m);
  for (int i = 0; i < m; ++i) {
    out[i].w = items[i].w;
    out[i].h = items[i].h;
  }
  for (int a = 0; a < m; ++a) {
    const int ia = order[a];
    int x = 0;
    for (int b = 0; b < a; ++b) {
      const int ib = order[b];
      if (qpos[ib] < qpos[ia]) x = std::max(x, out[ib].right());
    }
    out[ia].x = x;
  }
  for (int a = m - 1; a >= 0; --a) {
    const int ia = order[a];
    int y = 0;
    for (int b = a + 1; b < m; ++b) {
      const int ib = order[b];
      if (qpos[ib] < qpos[ia]) y = std::max(y, out[ib].top());
    }
    out[ia].y = y;
  }
  return out;
}

inline Extent envelope(std::span<const Rect> rects) {
  Extent e;
  for (const auto& r : rects) {
    e.w = std::max(e.w, r.right());
    e.h = std::max(e.h, r.top());
  }
  return e;
}

/// DRR height after optional rounding up to whole reconfigurable frames.
inline int aligned_height(int h, const ChipSpec& chip, bool align) {
  if (!align || chip.frame_rows <= 0 || h == 0) return h;
  return (h + chip.frame_rows - 1) / chip.frame_rows * chip.frame_rows;
}

/// Envelope of a packed sequence pair after inserting one extra item, for
/// every (PS gap, QS gap) in O(1) after O(s^2) setup. The insertion can only
/// lengthen paths through the new item, so each dimension is
/// max(old, before + own + after), with the before/after maxima read from
/// dominance tables.
class InsertionEnvelope {
 public:
  /// Items in PS order; q[i] is item i's position in QS order (a permutation).
  void build(int s, const int* w, const int* h, const int* q) {
    s_ = s;
    x_.assign(s, 0);
    y_.assign(s, 0);
    tx_.assign(s, 0);
    ty_.assign(s, 0);
    base_ = {};
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < a; ++b) {
        if (q[b] < q[a]) x_[a] = std::max(x_[a], x_[b] + w[b]);
      }
    }
    for (int a = s - 1; a >= 0; --a) {
      tx_[a] = w[a];
      for (int b = a + 1; b < s; ++b) {
        if (q[b] < q[a]) y_[a] = std::max(y_[a], y_[b] + h[b]);
        else tx_[a] = std::max(tx_[a], w[a] + tx_[b]);
      }
    }
    for (int a = 0; a < s; ++a) {
      ty_[a] = h[a];
      for (int b = 0; b < a; ++b) {
        if (q[b] > q[a]) ty_[a] = std::max(ty_[a], h[a] + ty_[b]);
      }
      base_.w = std::max(base_.w, x_[a] + w[a]);
      base_.h = std::max(base_.h, y_[a] + h[a]);
    }
    const int n = s + 1;
    left_.assign(n * n, 0);
    right_.assign(n * n, 0);
    below_.assign(n * n, 0);
    above_.assign(n * n, 0);
    // Seed item cells, then sweep to dominance maxima.
    for (int i = 0; i < s; ++i) {
      left_[(i + 1) * n + q[i] + 1] = x_[i] + w[i];
      right_[i * n + q[i]] = tx_[i];
      below_[i * n + q[i] + 1] = y_[i] + h[i];
      above_[(i + 1) * n + q[i]] = ty_[i];
    }
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        int& l = left_[a * n + b];
        if (a > 0) l = std::max(l, left_[(a - 1) * n + b]);
        if (b > 0) l = std::max(l, left_[a * n + b - 1]);
      }
    }
    for (int a = n - 1; a >= 0; --a) {
      for (int b = n - 1; b >= 0; --b) {
        int& r = right_[a * n + b];
        if (a + 1 < n) r = std::max(r, right_[(a + 1) * n + b]);
        if (b + 1 < n) r = std::max(r, right_[a * n + b + 1]);
      }
      for (int b = 0; b < n; ++b) {
        int& v = below_[a * n + b];
        if (a + 1 < n) v = std::max(v, below_[(a + 1) * n + b]);
        if (b > 0) v = std::max(v, below_[a * n + b - 1]);
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int b = n - 1; b >= 0; --b) {
        int& v = above_[a * n + b];
        if (a > 0) v = std::max(v, above_[(a - 1) * n + b]);
        if (b + 1 < n) v = std::max(v, above_[a * n + b + 1]);
      }
    }
  }

  int size() const { return s_; }
  Extent base() const { return base_; }

  /// Envelope with an item of size w x h inserted before PS index a and QS index b.
  Extent with(int a, int b, int w, int h) const {
    const int n = s_ + 1;
    const int i = a * n + b;
    return {std::max(base_.w, left_[i] + w + right_[i]), std::max(base_.h, below_[i] + h + above_[i])};
  }

  /// Envelope after item i (PS index) grows to at least its packed size in
  /// both dimensions, to w x h.
  Extent grown(int i, int w, int h, int w0, int h0) const {
    return {std::max(base_.w, x_[i] + w + (tx_[i] - w0)), std::max(base_.h, y_[i] + h + (ty_[i] - h0))};
  }

 private:
  int s_ = 0;
  Extent base_;
  std::vector<int> x_, y_, tx_, ty_;
  std::vector<int> left_, right_, below_, above_;
};

struct Floorplan {
  std::vector<Rect> module_rect;     // [task id], absolute chip coordinates
  std::vector<Rect> drr_rect;        // [drr]
  std::vector<Extent> layer_extent;  // [configuration rank]
  int cols = 0;
  int rows = 0;
};

/// DRR labels in block order of a sequence.
inline std::vector<int> drr_block_order(const std::vector<TaskId>& seq, const Partition& part) {
  std::vector<int> order;
  for (TaskId id : seq) {
    if (order.empty() || order.back() != part.drr[id]) order.push_back(part.drr[id]);
  }
  return order;
}

inline std::pair<int, int> totals(const Floorplan& fp) {
  int col = 0, row = 0;
  for (std::size_t d = 1; d < fp.drr_rect.size(); ++d) {
    col = std::max(col, fp.drr_rect[d].right());
    row = std::max(row, fp.drr_rect[d].top());
  }
  return {col, row};
}

inline Floorplan evaluate_floorplan(const Pst& pst, const TaskGraph& tg, const ChipSpec& chip,
                                    bool align) {
  const LayerTable table(pst);
  const int L = table.layer_count();
  const int N = table.drr_count();
  const int cap = static_cast<int>(pst.part.drr.size()) - 1;

  Floorplan fp;
  fp.module_rect.assign(cap + 1, {});
  fp.drr_rect.assign(N + 1, {});
  fp.layer_extent.assign(L + 1, {});

  // Per-layer sub-sequences in PS / QS order.
  std::vector<std::vector<int>> lps(L + 1), lqs(L + 1);
  for (TaskId id : pst.ps) lps[table.rank_of_task(id)].push_back(id);
  for (TaskId id : pst.qs) lqs[table.rank_of_task(id)].push_back(id);

  std::vector<PackItem> items;
  for (int r = 1; r <= L; ++r) {
    items.clear();
    for (TaskId id : lps[r]) items.push_back({id, tg.module(id).width, tg.module(id).height});
    const auto rects = pack_sequence_pair(items, lps[r], lqs[r]);
    for (std::size_t i = 0; i < items.size(); ++i) fp.module_rect[items[i].id] = rects[i];
    fp.layer_extent[r] = envelope(rects);
  }

  std::vector<PackItem> drr_items;
  for (int d = 1; d <= N; ++d) {
    Extent e;
    for (int r : table.drr_ranks(d)) {
      e.w = std::max(e.w, fp.layer_extent[r].w);
      e.h = std::max(e.h, fp.layer_extent[r].h);
    }
    drr_items.push_back({d, e.w, aligned_height(e.h, chip, align)});
  }
  const auto dps = drr_block_order(pst.ps, pst.part);
  const auto dqs = drr_block_order(pst.qs, pst.part);
  const auto drects = pack_sequence_pair(drr_items, dps, dqs);
  for (int d = 1; d <= N; ++d) fp.drr_rect[d] = drects[d - 1];

  for (TaskId id : pst.ps) {
    const Rect& dr = fp.drr_rect[pst.part.drr[id]];
    fp.module_rect[id].x += dr.x;
    fp.module_rect[id].y += dr.y;
  }
  std::tie(fp.cols, fp.rows) = totals(fp);
  return fp;
}

inline bool overlaps(const Rect& a, const Rect& b) {
  return a.x < b.right() && b.x < a.right() && a.y < b.top() && b.y < a.top();
}

/// Geometric soundness of a floorplan: module sizes, containment in the
/// owning DRR, disjointness within each layer and between DRRs, totals.
inline std::vector<std::string> verify_floorplan(const Pst& pst, const TaskGraph& tg, const Floorplan& fp) {
  std::vector<std::string> out;
  const auto& part = pst.part;
  const int N = part.drr_count();
  auto name = [](TaskId id) { return "m" + std::to_string(id); };
  for (TaskId id : pst.ps) {
    const Rect& r = fp.module_rect[id];
    const Rect& d = fp.drr_rect[part.drr[id]];
    if (r.w != tg.module(id).width || r.h != tg.module(id).height) out.push_back(name(id) + " has the wrong size");
    if (r.x < d.x || r.y < d.y || r.right() > d.right() || r.top() > d.top()) {
      out.push_back(name(id) + " lies outside DRR " + std::to_string(part.drr[id]));
    }
  }
  for (std::size_t i = 0; i < pst.ps.size(); ++i) {
    for (std::size_t j = i + 1; j < pst.ps.size(); ++j) {
      const TaskId a = pst.ps[i], b = pst.ps[j];
      if (part.of(a) == part.of(b) && overlaps(fp.module_rect[a], fp.module_rect[b])) {
        out.push_back(name(a) + " and " + name(b) + " overlap in layer " + to_string(part.of(a)));
      }
    }
  }
  for (int a = 1; a <= N; ++a) {
    const Rect& r = fp.drr_rect[a];
    if (r.right() > fp.cols || r.top() > fp.rows) out.push_back("DRR " + std::to_string(a) + " exceeds the totals");
    for (int b = a + 1; b <= N; ++b) {
      if (overlaps(r, fp.drr_rect[b])) {
        out.push_back("DRRs " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
      }
    }
  }
  return out;
}

}  // namespace pdr
