#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace pdr;

namespace {

SAConfig quick(std::uint64_t seed) {
  SAConfig c;
  c.seed = seed;
  c.t_start = 50;
  c.t_end = 1;
  c.cooling = 0.8;
  c.iters_per_temp = 20;
  c.norm_samples = 20;
  return c;
}

}  // namespace

TEST(Anneal, InitialSolutionOfChain) {
  const auto tg = fx::graph_of({fx::module(1, 1, 1), fx::module(1, 1, 1), fx::module(1, 1, 1)}, {{1, 2}, {2, 3}});
  const Pst p = initial_solution(tg);
  EXPECT_EQ(p.ps, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(p.qs, p.ps);
  EXPECT_EQ(p.rs, p.ps);
  EXPECT_EQ(p.part.drr_count(), 1);
  EXPECT_EQ(LayerTable(p).layer_count(), 3);
}

TEST(Anneal, InitialSolutionIsFeasible) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 30);
    const auto tg = fx::random_dag(n, 0.3, rng);
    const Pst p = initial_solution(tg);
    EXPECT_TRUE(validate_pst(p, tg).empty());
    EXPECT_TRUE(is_feasible(p, tg));
  }
}

TEST(Anneal, InitialTenModuleScheduleIsSerialAndBeatenByAnnealing) {
  const auto tg = fx::ten_module();
  const ChipSpec chip;
  const Pst p = initial_solution(tg);
  Ticks serial = 0;
  for (TaskId id = 1; id <= 10; ++id) serial += tg.module(id).config + tg.module(id).exec;
  EXPECT_EQ(schedule_pst(p, tg, chip, SpanMode::Sum).length, serial);
  const auto r = anneal(tg, chip, quick(3));
  EXPECT_LE(r.best.T, serial);
  EXPECT_LT(r.best.T, serial);
}

TEST(Anneal, SingleTemperatureIsOneGreedyMove) {
  const auto tg = fx::ten_module();
  const ChipSpec chip;
  SAConfig cfg;
  cfg.seed = 9;
  cfg.t_start = cfg.t_end = 1.0;
  cfg.iters_per_temp = 1;
  cfg.norm_samples = 0;
  const auto r = anneal(tg, chip, cfg);
  EXPECT_EQ(r.moves, 1);
  ASSERT_EQ(r.trace.size(), 1u);

  Rng rng(stream_seed(cfg.seed, 1));
  const Pst init = initial_solution(tg);
  const Metrics m0 = evaluate_metrics(init, tg, chip, {}, cfg.weights, Normalizers{});
  const MoveResult mv = iar_move(init, tg, chip, cfg, Normalizers{}, rng);
  const double delta = mv.metrics.cost - m0.cost;
  const bool accept = delta <= 0 || rng.uniform() < std::exp(-delta / 1.0);
  EXPECT_EQ(r.final_pst, accept ? mv.pst : init);
  EXPECT_EQ(r.accepted, accept ? 1 : 0);
}

TEST(Anneal, SameSeedSameResult) {
  const auto tg = fx::ten_module();
  const auto a = anneal(tg, ChipSpec{}, quick(5));
  const auto b = anneal(tg, ChipSpec{}, quick(5));
  EXPECT_EQ(a.best_pst, b.best_pst);
  EXPECT_EQ(a.final_pst, b.final_pst);
  EXPECT_EQ(a.best.cost, b.best.cost);
  EXPECT_EQ(a.norms, b.norms);
  EXPECT_EQ(a.moves, b.moves);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].cost, b.trace[i].cost);
  const auto c = anneal(tg, ChipSpec{}, quick(6));
  EXPECT_FALSE(c.best_pst == a.best_pst && c.trace.size() == a.trace.size() && c.final_pst == a.final_pst &&
               c.norms == a.norms);
}

TEST(Anneal, BestIsConsistentAndNoWorseThanVisitedStates) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 5; ++trial) {
    const auto tg = fx::random_dag(12, 0.2, rng);
    const ChipSpec chip;
    const auto cfg = quick(100 + trial);
    const auto r = anneal(tg, chip, cfg);
    const auto m = evaluate_metrics(r.best_pst, tg, chip, cfg.eval_options(), cfg.weights, r.norms);
    EXPECT_EQ(m.cost, r.best.cost);
    EXPECT_EQ(m.T, r.best.T);
    EXPECT_TRUE(is_feasible(r.best_pst, tg));
    EXPECT_TRUE(is_feasible(r.final_pst, tg));
    // Every circuit fits this chip, so the best cost bounds every sampled state.
    ASSERT_TRUE(r.best.fits());
    for (const auto& s : r.trace) EXPECT_LE(r.best.cost, s.cost);
    EXPECT_LE(r.best.cost, r.final_metrics.cost);
  }
}

TEST(Anneal, EveryMoveKeepsTheStateFeasible) {
  std::mt19937_64 gen(73);
  const ChipSpec chip;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + static_cast<int>(gen() % 20);
    const auto tg = fx::random_dag(n, 0.25, gen);
    SAConfig cfg;
    Rng rng(trial);
    Pst cur = initial_solution(tg);
    for (int i = 0; i < 200; ++i) {
      auto mv = iar_move(cur, tg, chip, cfg, Normalizers{}, rng);
      ASSERT_TRUE(validate_pst(mv.pst, tg).empty());
      ASSERT_TRUE(is_feasible(mv.pst, tg));
      if (n <= 12) {
        ASSERT_TRUE(oracle::brute_feasibility(mv.pst, tg));
      }
      cur = std::move(mv.pst);
    }
  }
}

TEST(Anneal, BetterSolutionPrefersFittingOutline) {
  Metrics fits, over;
  fits.cost = 10.0;
  over.ac = 1.0;
  over.cost = 0.5;
  EXPECT_TRUE(better_solution(fits, over));
  EXPECT_FALSE(better_solution(over, fits));
  Metrics cheaper = fits;
  cheaper.cost = 9.0;
  EXPECT_TRUE(better_solution(cheaper, fits));
}

TEST(Anneal, ConfigIsChecked) {
  SAConfig c;
  c.cooling = 1.0;
  EXPECT_THROW(c.check(), ContractError);
  c = SAConfig{};
  c.t_end = 3000;
  EXPECT_THROW(c.check(), ContractError);
  c = SAConfig{};
  c.cip_size = 0;
  EXPECT_THROW(c.check(), ContractError);
  EXPECT_EQ(SAConfig{}.iterations_for(10), 50);
  EXPECT_EQ(SAConfig{}.iterations_for(49), 50);
  EXPECT_EQ(SAConfig{}.iterations_for(150), 75);
  EXPECT_EQ(SAConfig{}.iterations_for(151), 76);
}

TEST(Anneal, RestartsAreIndependentOfThreadCount) {
  const auto tg = fx::ten_module();
  const auto one = anneal_restarts(tg, ChipSpec{}, quick(7), 3, 1);
  const auto many = anneal_restarts(tg, ChipSpec{}, quick(7), 3, 3);
  ASSERT_EQ(one.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(one[i].best_pst, many[i].best_pst);
  EXPECT_EQ(best_result(one), best_result(many));
  const auto single = anneal_restarts(tg, ChipSpec{}, quick(7), 1, 1);
  EXPECT_EQ(single[0].best_pst, anneal(tg, ChipSpec{}, quick(7)).best_pst);
}

TEST(Anneal, MetropolisAcceptanceFrequency) {
  // The acceptance rule compares a uniform draw against exp(-delta / tau).
  Rng rng(74);
  const double p = std::exp(-0.7);
  int hits = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) hits += rng.uniform() < p;
  const double sigma = std::sqrt(p * (1 - p) / N);
  EXPECT_NEAR(static_cast<double>(hits) / N, p, 5 * sigma);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
}
