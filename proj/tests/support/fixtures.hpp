#pragma once

// Shared instances, builders and independent checkers for the test suites.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pdrplan/pdrplan.hpp"

namespace fx {

using namespace pdr;

inline std::string data_path(const std::string& file) { return std::string(PDRPLAN_DATA_DIR) + "/" + file; }

inline BenchmarkFile ten_module_file() { return load_benchmark(data_path("ten_module.json")); }
inline TaskGraph ten_module() { return ten_module_file().graph(); }

using Groups = std::vector<std::pair<int, std::vector<std::vector<int>>>>;

/// P-ST over ids 1..n from explicit sequences and {drr, layers} groups.
inline Pst make_pst(std::vector<int> ps, std::vector<int> qs, std::vector<int> rs, const Groups& groups, int n) {
  Pst p;
  p.ps = std::move(ps);
  p.qs = std::move(qs);
  p.rs = std::move(rs);
  p.part = Partition(n);
  for (const auto& [d, layers] : groups) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (int id : layers[l]) p.part.assign(id, {d, static_cast<int>(l) + 1});
    }
  }
  return p;
}

inline const Groups& ten_module_groups() {
  static const Groups g{{1, {{7, 8}}}, {2, {{1, 2}, {9, 10}}}, {3, {{3}, {5}}}, {4, {{6}, {4}}}};
  return g;
}

inline const std::vector<int> kTenPs{1, 2, 9, 10, 8, 7, 6, 4, 3, 5};
inline const std::vector<int> kTenQs{8, 7, 2, 1, 9, 10, 3, 5, 6, 4};

/// The feasible ten-module P-ST.
inline Pst feasible_ten() { return make_pst(kTenPs, kTenQs, {1, 2, 3, 5, 6, 4, 7, 8, 9, 10}, ten_module_groups(), 10); }

/// Same partition, infeasible configuration order.
inline Pst backward_ten() { return make_pst(kTenPs, kTenQs, {1, 2, 6, 3, 4, 5, 7, 8, 9, 10}, ten_module_groups(), 10); }

/// feasible_ten() with m8 removed.
inline Pst feasible_ten_without_8() {
  return make_pst({1, 2, 9, 10, 7, 6, 4, 3, 5}, {7, 2, 1, 9, 10, 3, 5, 6, 4}, {1, 2, 3, 5, 6, 4, 7, 9, 10},
                  {{1, {{7}}}, {2, {{1, 2}, {9, 10}}}, {3, {{3}, {5}}}, {4, {{6}, {4}}}}, 10);
}

inline TaskGraph graph_of(const std::vector<TaskModule>& mods, const std::vector<std::pair<int, int>>& edges,
                          double comm = 1.0) {
  std::vector<DepEdge> es;
  for (auto [a, b] : edges) es.push_back({a, b, comm});
  return TaskGraph(mods, es);
}

inline TaskModule module(int w, int h, double exec_ms, const ChipSpec& chip = {}) {
  return TaskModule::make(w, h, ms_to_ticks(exec_ms), chip);
}

/// Random DAG: each forward pair of a random permutation is an edge with probability p.
inline TaskGraph random_dag(int n, double p, std::mt19937_64& rng, const ChipSpec& chip = {}, int max_w = 30,
                            int max_h = 60) {
  std::uniform_int_distribution<int> w(1, max_w), h(1, max_h), t(1000, 60000);
  std::uniform_real_distribution<double> u(0, 1), comm(0, 30);
  std::vector<TaskModule> mods;
  for (int i = 0; i < n; ++i) mods.push_back(TaskModule::make(w(rng), h(rng), t(rng) * 1000, chip));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<DepEdge> es;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (u(rng) < p) es.push_back({order[a], order[b], std::round(comm(rng) * 8) / 8});
    }
  }
  std::shuffle(es.begin(), es.end(), rng);
  return TaskGraph(std::move(mods), std::move(es));
}

/// Uniformly random structurally valid P-ST over ids 1..n (not necessarily feasible).
inline Pst random_valid_pst(int n, std::mt19937_64& rng, int max_drrs = 4) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i + 1;
  std::shuffle(ids.begin(), ids.end(), rng);
  const int D = pick(1, std::min(n, max_drrs));
  std::vector<std::vector<int>> drr(D);
  for (int i = 0; i < n; ++i) drr[i < D ? i : pick(0, D - 1)].push_back(ids[i]);
  // layers[d][j] = tasks of layer j+1 of DRR d+1
  std::vector<std::vector<std::vector<int>>> layers(D);
  for (int d = 0; d < D; ++d) {
    auto& ts = drr[d];
    std::shuffle(ts.begin(), ts.end(), rng);
    const int l = pick(1, static_cast<int>(ts.size()));
    layers[d].assign(l, {});
    for (std::size_t i = 0; i < ts.size(); ++i) layers[d][static_cast<int>(i) < l ? i : pick(0, l - 1)].push_back(ts[i]);
  }
  Pst p;
  p.part = Partition(n);
  for (int d = 0; d < D; ++d) {
    for (std::size_t j = 0; j < layers[d].size(); ++j) {
      for (int id : layers[d][j]) p.part.assign(id, {d + 1, static_cast<int>(j) + 1});
    }
  }
  auto spatial = [&] {
    std::vector<int> seq;
    std::vector<int> dorder(D);
    for (int d = 0; d < D; ++d) dorder[d] = d;
    std::shuffle(dorder.begin(), dorder.end(), rng);
    for (int d : dorder) {
      std::vector<int> lorder(layers[d].size());
      for (std::size_t j = 0; j < lorder.size(); ++j) lorder[j] = static_cast<int>(j);
      std::shuffle(lorder.begin(), lorder.end(), rng);
      for (int j : lorder) {
        auto ts = layers[d][j];
        std::shuffle(ts.begin(), ts.end(), rng);
        seq.insert(seq.end(), ts.begin(), ts.end());
      }
    }
    return seq;
  };
  p.ps = spatial();
  p.qs = spatial();
  std::vector<std::size_t> next(D, 0);
  int remaining = 0;
  for (auto& l : layers) remaining += static_cast<int>(l.size());
  while (remaining--) {
    std::vector<int> open;
    for (int d = 0; d < D; ++d) {
      if (next[d] < layers[d].size()) open.push_back(d);
    }
    const int d = open[pick(0, static_cast<int>(open.size()) - 1)];
    auto ts = layers[d][next[d]++];
    std::shuffle(ts.begin(), ts.end(), rng);
    p.rs.insert(p.rs.end(), ts.begin(), ts.end());
  }
  return p;
}

/// Random feasible P-ST reached by random (not best) feasible insertions.
inline Pst random_feasible_pst(const TaskGraph& tg, std::mt19937_64& rng, int steps, const ChipSpec& chip = {}) {
  Pst cur = initial_solution(tg);
  for (int s = 0; s < steps; ++s) {
    const TaskId k = std::uniform_int_distribution<int>(1, tg.size())(rng);
    const RemovalContext ctx = remove_task(cur, k, tg, chip);
    const auto pts = enumerate_insertion_points(ctx);
    cur = insert_task(ctx.pst0, k, pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)]);
  }
  return cur;
}

/// Transitive closure by breadth-first search from every vertex.
inline std::set<std::pair<int, int>> bfs_closure(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n + 1);
  for (auto [a, b] : edges) adj[a].push_back(b);
  std::set<std::pair<int, int>> out;
  for (int s = 1; s <= n; ++s) {
    std::vector<char> seen(n + 1, 0);
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          out.insert({s, w});
          q.push(w);
        }
      }
    }
  }
  return out;
}

inline std::vector<std::pair<int, int>> edge_pairs(const TaskGraph& tg) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : tg.edges()) out.emplace_back(e.from, e.to);
  return out;
}

}  // namespace fx
