#pragma once

// Problem instance (chip, task graph) and the partitioned sequence triple
// that encodes a complete solution: spatial regions (DRRs), temporal layers,
// floorplan relations and configuration order.

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pdrplan/types.hpp"

namespace pdr {

struct ChipSpec {
  int cols = 117;
  int rows = 350;
  Ticks clb_config = 1300;  // 0.0013 ms per CLB
  int frame_rows = 50;      // 0 disables frame alignment

  void check() const {
    if (cols < 1 || rows < 1) throw InstanceError("chip must have at least one column and row");
    if (clb_config <= 0) throw InstanceError("clb configuration time must be positive");
    if (frame_rows < 0) throw InstanceError("frame_rows must be non-negative");
  }
};

/// A pre-synthesized rectangular task. Width counts CLB columns, height CLB rows.
struct TaskModule {
  int width = 1;
  int height = 1;
  Ticks exec = 1;
  Ticks config = 0;  // clb_config * width * height

  static TaskModule make(int width, int height, Ticks exec, const ChipSpec& chip) {
    return TaskModule{width, height, exec, chip.clb_config * width * height};
  }
};

struct DepEdge {
  TaskId from = 0;
  TaskId to = 0;
  double comm = 0.0;
};

/// Dependence DAG over task modules 1..n with a cached transitive closure.
class TaskGraph {
 public:
  TaskGraph() = default;

  TaskGraph(std::vector<TaskModule> modules, std::vector<DepEdge> edges)
      : modules_(std::move(modules)), edges_(std::move(edges)) {
    const int n = size();
    for (const auto& m : modules_) {
      if (m.width < 1 || m.height < 1) throw InstanceError("module dimensions must be >= 1");
      if (m.exec <= 0) throw InstanceError("execution time must be positive");
      if (m.config < 0) throw InstanceError("configuration time must be non-negative");
    }
    out_.assign(n + 1, {});
    in_.assign(n + 1, {});
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n + 1) * (n + 1), 0);
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
      const auto& d = edges_[e];
      if (d.from < 1 || d.from > n || d.to < 1 || d.to > n) {
        throw InstanceError("edge (" + std::to_string(d.from) + "," + std::to_string(d.to) +
                            ") references an unknown task");
      }
      if (d.from == d.to) throw InstanceError("self-loop on task " + std::to_string(d.from));
      auto& s = seen[static_cast<std::size_t>(d.from) * (n + 1) + d.to];
      if (s) {
        throw InstanceError("duplicate edge (" + std::to_string(d.from) + "," +
                            std::to_string(d.to) + ")");
      }
      s = 1;
      out_[d.from].push_back(e);
      in_[d.to].push_back(e);
    }
    build_topo_order();
    build_closure();
  }

  int size() const { return static_cast<int>(modules_.size()); }
  const TaskModule& module(TaskId id) const { return modules_[id - 1]; }
  const std::vector<TaskModule>& modules() const { return modules_; }
  const std::vector<DepEdge>& edges() const { return edges_; }
  /// Indices into edges() leaving / entering a task.
  const std::vector<int>& out_edges(TaskId id) const { return out_[id]; }
  const std::vector<int>& in_edges(TaskId id) const { return in_[id]; }

  /// Topological order, ties broken by smallest id.
  const std::vector<TaskId>& topo_order() const { return topo_; }

  /// True iff a non-empty path a -> b exists.
  bool reaches(TaskId a, TaskId b) const {
    return reach_[static_cast<std::size_t>(a) * (size() + 1) + b] != 0;
  }
  const std::vector<TaskId>& closure_succ(TaskId id) const { return csucc_[id]; }
  const std::vector<TaskId>& closure_pred(TaskId id) const { return cpred_[id]; }

  /// Closure edge set, sorted.
  std::vector<std::pair<TaskId, TaskId>> closure_edges() const {
    std::vector<std::pair<TaskId, TaskId>> out;
    for (TaskId a = 1; a <= size(); ++a) {
      for (TaskId b : csucc_[a]) out.emplace_back(a, b);
    }
    return out;
  }

 private:
  void build_topo_order() {
    const int n = size();
    std::vector<int> indeg(n + 1, 0);
    for (const auto& e : edges_) ++indeg[e.to];
    std::priority_queue<TaskId, std::vector<TaskId>, std::greater<>> ready;
    for (TaskId v = 1; v <= n; ++v) {
      if (indeg[v] == 0) ready.push(v);
    }
    topo_.clear();
    while (!ready.empty()) {
      TaskId v = ready.top();
      ready.pop();
      topo_.push_back(v);
      for (int e : out_[v]) {
        if (--indeg[edges_[e].to] == 0) ready.push(edges_[e].to);
      }
    }
    if (static_cast<int>(topo_.size()) != n) throw InstanceError("task graph contains a cycle");
  }

  void build_closure() {
    const int n = size();
    reach_.assign(static_cast<std::size_t>(n + 1) * (n + 1), 0);
    auto row = [&](TaskId a) { return reach_.data() + static_cast<std::size_t>(a) * (n + 1); };
    for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
      std::uint8_t* ra = row(*it);
      for (int e : out_[*it]) {
        const TaskId b = edges_[e].to;
        ra[b] = 1;
        const std::uint8_t* rb = row(b);
        for (int x = 1; x <= n; ++x) ra[x] |= rb[x];
      }
    }
    csucc_.assign(n + 1, {});
    cpred_.assign(n + 1, {});
    for (TaskId a = 1; a <= n; ++a) {
      for (TaskId b = 1; b <= n; ++b) {
        if (row(a)[b]) {
          csucc_[a].push_back(b);
          cpred_[b].push_back(a);
        }
      }
    }
  }

  std::vector<TaskModule> modules_;
  std::vector<DepEdge> edges_;
  std::vector<std::vector<int>> out_, in_;
  std::vector<TaskId> topo_;
  std::vector<std::uint8_t> reach_;
  std::vector<std::vector<TaskId>> csucc_, cpred_;
};

/// Transitive closure of a raw edge list over vertices 1..n.
/// Throws InstanceError when the edges contain a cycle.
inline std::vector<std::pair<TaskId, TaskId>> transitive_closure(
    int n, std::span<const std::pair<TaskId, TaskId>> edges) {
  std::vector<DepEdge> deps;
  deps.reserve(edges.size());
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n + 1) * (n + 1), 0);
  for (auto [a, b] : edges) {
    auto& s = seen[static_cast<std::size_t>(a) * (n + 1) + b];
    if (s) continue;
    s = 1;
    deps.push_back({a, b, 0.0});
  }
  std::vector<TaskModule> mods(n, TaskModule{1, 1, 1, 0});
  return TaskGraph(std::move(mods), std::move(deps)).closure_edges();
}

inline std::vector<std::pair<TaskId, TaskId>> transitive_closure(const TaskGraph& tg) {
  return tg.closure_edges();
}

/// Vertex-weighted (execution time) longest path of the task graph alone.
inline Ticks critical_path_time(const TaskGraph& tg) {
  std::vector<Ticks> finish(tg.size() + 1, 0);
  Ticks best = 0;
  for (TaskId v : tg.topo_order()) {
    Ticks start = 0;
    for (int e : tg.in_edges(v)) start = std::max(start, finish[tg.edges()[e].from]);
    finish[v] = start + tg.module(v).exec;
    best = std::max(best, finish[v]);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Partition and sequence triple
// ---------------------------------------------------------------------------

/// Time layer `index` (1-based) of DRR `drr` (1-based).
struct LayerRef {
  int drr = 0;
  int index = 0;
  friend auto operator<=>(const LayerRef&, const LayerRef&) = default;
};

inline std::string to_string(LayerRef l) {
  return "(" + std::to_string(l.drr) + "," + std::to_string(l.index) + ")";
}

/// Per-task DRR and layer labels; label 0 marks a task that is not placed.
struct Partition {
  std::vector<int> drr;    // [task id]
  std::vector<int> layer;  // [task id]

  explicit Partition(int n = 0) : drr(n + 1, 0), layer(n + 1, 0) {}

  LayerRef of(TaskId id) const { return {drr[id], layer[id]}; }
  void assign(TaskId id, LayerRef l) {
    drr[id] = l.drr;
    layer[id] = l.index;
  }
  int drr_count() const { return drr.empty() ? 0 : *std::max_element(drr.begin(), drr.end()); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Partitioned sequence triple. PS/QS give the nested floorplan relations,
/// RS the configuration order of the time layers.
struct Pst {
  std::vector<TaskId> ps, qs, rs;
  Partition part;

  int size() const { return static_cast<int>(ps.size()); }
  bool contains(TaskId id) const {
    return id >= 1 && id < static_cast<int>(part.drr.size()) && part.drr[id] != 0;
  }
  LayerRef layer_of(TaskId id) const { return part.of(id); }
  friend bool operator==(const Pst&, const Pst&) = default;
};

namespace detail {

inline std::string describe(LayerRef l) { return to_string(l); }
inline std::string describe(int drr) { return std::to_string(drr); }

inline bool same_task_set(const std::vector<TaskId>& a, const std::vector<TaskId>& b) {
  std::vector<TaskId> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

template <class Key>
void check_contiguous(const std::vector<TaskId>& seq, const Partition& part, Key key,
                      const char* what, const char* seq_name, std::vector<std::string>& out) {
  using K = decltype(key(part, TaskId{}));
  std::map<K, int> last_pos;
  std::map<K, bool> reported;
  for (int i = 0; i < static_cast<int>(seq.size()); ++i) {
    const K k = key(part, seq[i]);
    auto it = last_pos.find(k);
    if (it != last_pos.end() && it->second != i - 1 && !reported[k]) {
      std::ostringstream os;
      os << what << " " << describe(k) << " not contiguous in " << seq_name;
      out.push_back(os.str());
      reported[k] = true;
    }
    last_pos[k] = i;
  }
}

}  // namespace detail

/// Structural check independent of the task graph: the three sequences hold
/// the same placed tasks, labels are dense, blocks are contiguous and each
/// DRR's layers appear in increasing index order in RS.
inline std::vector<std::string> validate_structure(const Pst& pst) {
  std::vector<std::string> out;
  const auto& part = pst.part;
  const int cap = static_cast<int>(part.drr.size()) - 1;
  if (pst.ps.empty()) {
    out.push_back("sequences are empty");
    return out;
  }
  if (pst.qs.size() != pst.ps.size() || pst.rs.size() != pst.ps.size()) {
    out.push_back("sequence lengths differ");
    return out;
  }
  std::vector<int> count(cap + 1, 0);
  for (TaskId id : pst.ps) {
    if (id < 1 || id > cap) {
      out.push_back("task " + std::to_string(id) + " out of range");
      return out;
    }
    if (++count[id] > 1) {
      out.push_back("task " + std::to_string(id) + " repeated in PS");
      return out;
    }
  }
  if (!detail::same_task_set(pst.ps, pst.qs)) out.push_back("QS is not a permutation of PS");
  if (!detail::same_task_set(pst.ps, pst.rs)) out.push_back("RS is not a permutation of PS");
  if (!out.empty()) return out;

  for (TaskId id = 1; id <= cap; ++id) {
    const bool placed = part.drr[id] != 0;
    if (placed != (count[id] == 1)) {
      out.push_back("task " + std::to_string(id) + " partition label disagrees with sequences");
    } else if (placed && part.layer[id] < 1) {
      out.push_back("task " + std::to_string(id) + " has no layer");
    }
  }
  if (!out.empty()) return out;

  // Dense labels: DRRs 1..N, layers 1..l_i.
  std::map<int, std::vector<int>> layers_of_drr;
  for (TaskId id : pst.ps) layers_of_drr[part.drr[id]].push_back(part.layer[id]);
  int expect_drr = 1;
  for (auto& [d, ls] : layers_of_drr) {
    if (d != expect_drr++) {
      out.push_back("DRR labels are not dense 1..N");
      break;
    }
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    for (int j = 0; j < static_cast<int>(ls.size()); ++j) {
      if (ls[j] != j + 1) {
        out.push_back("layers of DRR " + std::to_string(d) + " are not indexed 1..l");
        break;
      }
    }
  }

  auto by_layer = [](const Partition& p, TaskId id) { return p.of(id); };
  auto by_drr = [](const Partition& p, TaskId id) { return p.drr[id]; };
  const std::size_t before = out.size();
  detail::check_contiguous(pst.ps, part, by_layer, "layer", "PS", out);
  detail::check_contiguous(pst.qs, part, by_layer, "layer", "QS", out);
  detail::check_contiguous(pst.rs, part, by_layer, "layer", "RS", out);
  detail::check_contiguous(pst.ps, part, by_drr, "DRR", "PS", out);
  detail::check_contiguous(pst.qs, part, by_drr, "DRR", "QS", out);
  if (out.size() != before) return out;

  // RS order within each DRR follows the layer index.
  std::map<int, int> last_index;
  LayerRef prev{};
  for (TaskId id : pst.rs) {
    const LayerRef l = part.of(id);
    if (l == prev) continue;
    prev = l;
    auto it = last_index.find(l.drr);
    if (it != last_index.end() && it->second >= l.index) {
      out.push_back("layers of DRR " + std::to_string(l.drr) +
                    " are not configured in index order");
    }
    last_index[l.drr] = l.index;
  }
  return out;
}

/// Full validation against an instance: every task 1..n placed exactly once.
inline std::vector<std::string> validate_pst(const Pst& pst, const TaskGraph& tg) {
  if (static_cast<int>(pst.part.drr.size()) != tg.size() + 1 || pst.size() != tg.size()) {
    return {"P-ST size does not match the task graph"};
  }
  return validate_structure(pst);
}

struct LayerInfo {
  LayerRef ref;
  std::vector<TaskId> tasks;  // RS order
};

/// Block index of a structurally valid P-ST. Layers are indexed by their
/// configuration rank 1..|TL| (position of the layer block in RS).
class LayerTable {
 public:
  LayerTable() = default;

  explicit LayerTable(const Pst& pst) {
    const int cap = static_cast<int>(pst.part.drr.size()) - 1;
    task_rank_.assign(cap + 1, 0);
    layers_.push_back({});  // rank 0 unused
    LayerRef prev{};
    for (TaskId id : pst.rs) {
      const LayerRef l = pst.part.of(id);
      if (l != prev || layers_.size() == 1) {
        layers_.push_back({l, {}});
        prev = l;
      }
      layers_.back().tasks.push_back(id);
      task_rank_[id] = static_cast<int>(layers_.size()) - 1;
    }
    int n_drr = 0;
    for (int r = 1; r < static_cast<int>(layers_.size()); ++r) {
      n_drr = std::max(n_drr, layers_[r].ref.drr);
    }
    drr_ranks_.assign(n_drr + 1, {});
    for (int r = 1; r < static_cast<int>(layers_.size()); ++r) {
      drr_ranks_[layers_[r].ref.drr].push_back(r);
    }
  }

  int layer_count() const { return static_cast<int>(layers_.size()) - 1; }
  int drr_count() const { return static_cast<int>(drr_ranks_.size()) - 1; }
  const LayerInfo& layer(int rank) const { return layers_[rank]; }
  int rank_of_task(TaskId id) const { return task_rank_[id]; }
  /// Ranks of a DRR's layers in index order (= increasing rank).
  const std::vector<int>& drr_ranks(int drr) const { return drr_ranks_[drr]; }
  int rank_of(LayerRef l) const { return drr_ranks_[l.drr][l.index - 1]; }
  int next_in_drr(int rank) const {
    const LayerRef l = layers_[rank].ref;
    const auto& rs = drr_ranks_[l.drr];
    return l.index < static_cast<int>(rs.size()) ? rs[l.index] : 0;
  }
  int prev_in_drr(int rank) const {
    const LayerRef l = layers_[rank].ref;
    return l.index > 1 ? drr_ranks_[l.drr][l.index - 2] : 0;
  }

 private:
  std::vector<LayerInfo> layers_;
  std::vector<int> task_rank_;
  std::vector<std::vector<int>> drr_ranks_;
};

struct ConfigOrder {
  std::map<LayerRef, int> rank;
  int at(LayerRef l) const { return rank.at(l); }
  int size() const { return static_cast<int>(rank.size()); }
};

/// Configuration rank of every layer. Throws ContractError on an invalid P-ST.
inline ConfigOrder config_order(const Pst& pst) {
  auto issues = validate_structure(pst);
  if (!issues.empty()) throw ContractError("invalid P-ST: " + issues.front());
  LayerTable table(pst);
  ConfigOrder co;
  for (int r = 1; r <= table.layer_count(); ++r) co.rank[table.layer(r).ref] = r;
  return co;
}

/// Relabels DRRs by first appearance in PS so that equal solutions compare equal.
inline Pst canonicalize(const Pst& pst) {
  Pst out = pst;
  std::map<int, int> relabel;
  for (TaskId id : pst.ps) {
    const int d = pst.part.drr[id];
    if (!relabel.count(d)) relabel.emplace(d, static_cast<int>(relabel.size()) + 1);
  }
  for (TaskId id : pst.ps) out.part.drr[id] = relabel[pst.part.drr[id]];
  return out;
}

}  // namespace pdr
