#pragma once

// Simulated annealing over feasible P-STs with the Insertion-after-Remove move.

#include <algorithm>
#include <chrono>
#include <exception>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "pdrplan/core_model.hpp"
#include "pdrplan/cost.hpp"
#include "pdrplan/iar.hpp"

namespace pdr {

/// Seeded 64-bit generator with platform-independent derived draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for restart `index` of a run seeded with `seed`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

struct SAConfig {
  double t_start = 2000.0;
  double t_end = 0.01;
  double cooling = 0.98;
  int iters_per_temp = 0;  // 0 selects the size-dependent default
  std::uint64_t seed = 1;
  int cip_size = 15;
  int norm_samples = 100;  // random-walk states averaged for the normalizers
  CostWeights weights;
  SpanMode span_mode = SpanMode::Sum;
  bool align = false;

  void check() const {
    if (!(cooling > 0.0 && cooling < 1.0)) throw ContractError("cooling ratio must lie in (0, 1)");
    if (!(t_end > 0.0) || t_end > t_start) throw ContractError("need 0 < t_end <= t_start");
    if (iters_per_temp < 0) throw ContractError("iters_per_temp must be non-negative");
    if (cip_size < 1) throw ContractError("cip_size must be at least 1");
    if (norm_samples < 0) throw ContractError("norm_samples must be non-negative");
    weights.check();
  }

  int iterations_for(int n) const {
    if (iters_per_temp > 0) return iters_per_temp;
    return n < 50 ? 50 : std::max(50, (n + 1) / 2);
  }

  EvalOptions eval_options() const { return {span_mode, align}; }
};

struct TraceSample {
  double temperature = 0.0;
  double cost = 0.0;
  double T_ms = 0.0;
  double ac = 0.0;
  double cc = 0.0;
  int accepted = 0;
};

struct SAResult {
  Pst best_pst;
  Metrics best;
  Pst final_pst;
  Metrics final_metrics;
  Normalizers norms;
  std::vector<TraceSample> trace;
  std::int64_t moves = 0;
  std::int64_t accepted = 0;
  double wall_ms = 0.0;
};

/// Every task in its own layer of a single DRR, configured in topological order.
inline Pst initial_solution(const TaskGraph& tg) {
  Pst pst;
  pst.ps = tg.topo_order();
  pst.qs = pst.ps;
  pst.rs = pst.ps;
  pst.part = Partition(tg.size());
  int j = 0;
  for (TaskId id : pst.rs) pst.part.assign(id, {1, ++j});
  return pst;
}

/// Outline-fitting solutions first, then lower cost.
inline bool better_solution(const Metrics& a, const Metrics& b) {
  if (a.fits() != b.fits()) return a.fits();
  return a.cost < b.cost;
}

struct MoveResult {
  Pst pst;
  Metrics metrics;
  TaskId task = 0;
  InsertionPoint point;
};

/// One IAR move: remove a uniformly chosen task and commit its best insertion.
inline MoveResult iar_move(const Pst& pst, const TaskGraph& tg, const ChipSpec& chip, const SAConfig& cfg,
                           const Normalizers& norms, Rng& rng) {
  const TaskId k = static_cast<TaskId>(rng.below(static_cast<std::uint64_t>(tg.size()))) + 1;
  // Every state reached here was produced by a feasible insertion.
  const RemovalContext ctx = remove_task(pst, k, tg, chip, cfg.align, false);
  Commit c = select_and_commit(ctx, cfg.weights, norms, cfg.cip_size, cfg.eval_options());
  return {std::move(c.pst), c.metrics, k, c.point};
}

/// Averages of AC, T and CC over a random walk of always-accepted moves from
/// `start`. Zero averages fall back to 1.
inline Normalizers estimate_normalizers(const Pst& start, const TaskGraph& tg, const ChipSpec& chip,
                                        const SAConfig& cfg, Rng& rng) {
  Normalizers unit;
  double ac = 0, t = 0, cc = 0;
  Pst cur = start;
  for (int i = 0; i < cfg.norm_samples; ++i) {
    MoveResult mv = iar_move(cur, tg, chip, cfg, unit, rng);
    ac += mv.metrics.ac;
    t += ticks_to_ms(mv.metrics.T);
    cc += mv.metrics.cc;
    cur = std::move(mv.pst);
  }
  Normalizers n;
  if (cfg.norm_samples > 0) {
    const double s = cfg.norm_samples;
    n.ac = ac / s;
    n.t = t / s;
    n.cc = cc / s;
  }
  if (!(n.ac > 0)) n.ac = 1.0;
  if (!(n.t > 0)) n.t = 1.0;
  if (!(n.cc > 0)) n.cc = 1.0;
  return n;
}

inline SAResult anneal(const TaskGraph& tg, const ChipSpec& chip, const SAConfig& cfg) {
  cfg.check();
  chip.check();
  const auto t0 = std::chrono::steady_clock::now();
  SAResult res;
  const Pst init = initial_solution(tg);
  Rng warm(stream_seed(cfg.seed, 0));
  Rng rng(stream_seed(cfg.seed, 1));

  res.norms = estimate_normalizers(init, tg, chip, cfg, warm);
  Pst cur = init;
  Metrics cur_m = evaluate_metrics(cur, tg, chip, cfg.eval_options(), cfg.weights, res.norms);
  res.best_pst = cur;
  res.best = cur_m;

  const int iters = cfg.iterations_for(tg.size());
  for (double tau = cfg.t_start; tau >= cfg.t_end; tau *= cfg.cooling) {
    TraceSample sample{tau, 0, 0, 0, 0, 0};
    for (int i = 0; i < iters; ++i) {
      MoveResult mv = iar_move(cur, tg, chip, cfg, res.norms, rng);
      ++res.moves;
      const double delta = mv.metrics.cost - cur_m.cost;
      const bool accept = delta <= 0.0 || rng.uniform() < std::exp(-delta / tau);
      if (!accept) continue;
      ++res.accepted;
      ++sample.accepted;
      cur = std::move(mv.pst);
      cur_m = mv.metrics;
      if (better_solution(cur_m, res.best)) {
        res.best = cur_m;
        res.best_pst = cur;
      }
    }
    sample.cost = cur_m.cost;
    sample.T_ms = ticks_to_ms(cur_m.T);
    sample.ac = cur_m.ac;
    sample.cc = cur_m.cc;
    res.trace.push_back(sample);
    if (cfg.t_start == cfg.t_end) break;
  }
  res.final_pst = cur;
  res.final_metrics = cur_m;
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// Independent runs with per-restart seeds derived from cfg.seed, spread over
/// up to `threads` worker threads. Results are in restart order.
inline std::vector<SAResult> anneal_restarts(const TaskGraph& tg, const ChipSpec& chip, const SAConfig& cfg,
                                             int restarts, int threads = 0) {
  if (restarts < 1) throw ContractError("restart count must be at least 1");
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, restarts);
  std::vector<SAResult> out(restarts);
  std::vector<std::exception_ptr> errors(restarts);
  auto run = [&](int id) {
    SAConfig c = cfg;
    c.seed = restarts == 1 ? cfg.seed : stream_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(id));
    try {
      out[id] = anneal(tg, chip, c);
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };
  if (threads == 1) {
    for (int i = 0; i < restarts; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int i = t; i < restarts; i += threads) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Index of the best result by (fits outline, cost), first on ties.
inline int best_result(const std::vector<SAResult>& rs) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(rs.size()); ++i) {
    if (better_solution(rs[i].best, rs[best].best)) best = i;
  }
  return best;
}

}  // namespace pdr
