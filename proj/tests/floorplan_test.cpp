#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace pdr;

namespace {

std::vector<Rect> pack(const std::vector<PackItem>& items, const std::vector<int>& ps, const std::vector<int>& qs) {
  return pack_sequence_pair(items, ps, qs);
}

}  // namespace

TEST(Floorplan, SingleItemAtOrigin) {
  const auto r = pack({{1, 4, 6}}, {1}, {1});
  EXPECT_EQ(r[0], (Rect{0, 0, 4, 6}));
}

TEST(Floorplan, SameOrderMeansLeftOf) {
  const auto r = pack({{1, 2, 3}, {2, 2, 3}}, {1, 2}, {1, 2});
  EXPECT_EQ(r[0], (Rect{0, 0, 2, 3}));
  EXPECT_EQ(r[1], (Rect{2, 0, 2, 3}));
}

TEST(Floorplan, CrossedOrderMeansBelow) {
  // PS = <b a>, QS = <a b>: a is below b.
  const auto r = pack({{1, 2, 3}, {2, 2, 3}}, {2, 1}, {1, 2});
  EXPECT_EQ(r[0], (Rect{0, 0, 2, 3}));
  EXPECT_EQ(r[1], (Rect{0, 3, 2, 3}));
}

TEST(Floorplan, OneModule) {
  const auto tg = fx::graph_of({fx::module(10, 20, 1.0)}, {});
  const Pst p = fx::make_pst({1}, {1}, {1}, {{1, {{1}}}}, 1);
  const auto fp = evaluate_floorplan(p, tg, ChipSpec{}, false);
  EXPECT_EQ(fp.module_rect[1], (Rect{0, 0, 10, 20}));
  EXPECT_EQ(fp.cols, 10);
  EXPECT_EQ(fp.rows, 20);
  EXPECT_EQ(totals(fp), std::pair(10, 20));
}

TEST(Floorplan, DrrIsTheEnvelopeOfItsLayers) {
  const auto tg = fx::graph_of({fx::module(5, 8, 1.0), fx::module(7, 3, 1.0)}, {});
  const Pst p = fx::make_pst({1, 2}, {1, 2}, {1, 2}, {{1, {{1}, {2}}}}, 2);
  const auto fp = evaluate_floorplan(p, tg, ChipSpec{}, false);
  EXPECT_EQ(fp.drr_rect[1], (Rect{0, 0, 7, 8}));
  EXPECT_EQ(fp.layer_extent[1], (Extent{5, 8}));
  EXPECT_EQ(fp.layer_extent[2], (Extent{7, 3}));
}

TEST(Floorplan, FrameAlignmentRoundsHeightUp) {
  const auto tg = fx::graph_of({fx::module(10, 60, 1.0)}, {});
  const Pst p = fx::make_pst({1}, {1}, {1}, {{1, {{1}}}}, 1);
  const auto fp = evaluate_floorplan(p, tg, ChipSpec{}, true);
  EXPECT_EQ(fp.drr_rect[1].h, 100);
  EXPECT_EQ(fp.drr_rect[1].w, 10);
  EXPECT_EQ(evaluate_floorplan(p, tg, ChipSpec{}, false).drr_rect[1].h, 60);
  EXPECT_EQ(aligned_height(50, ChipSpec{}, true), 50);
  ChipSpec off;
  off.frame_rows = 0;
  EXPECT_EQ(aligned_height(60, off, true), 60);
}

TEST(Floorplan, TwoDrrsSideBySide) {
  const auto tg = fx::graph_of({fx::module(10, 20, 1.0), fx::module(5, 5, 1.0)}, {});
  const Pst p = fx::make_pst({1, 2}, {1, 2}, {1, 2}, {{1, {{1}}}, {2, {{2}}}}, 2);
  const auto fp = evaluate_floorplan(p, tg, ChipSpec{}, false);
  EXPECT_EQ(totals(fp), std::pair(15, 20));
  EXPECT_EQ(fp.module_rect[2], (Rect{10, 0, 5, 5}));
}

TEST(Floorplan, EmptyPlanHasZeroTotals) {
  EXPECT_EQ(totals(Floorplan{}), std::pair(0, 0));
}

TEST(Floorplan, TenModuleFloorplanIsSound) {
  const auto tg = fx::ten_module();
  const auto fp = evaluate_floorplan(fx::feasible_ten(), tg, ChipSpec{}, false);
  EXPECT_TRUE(verify_floorplan(fx::feasible_ten(), tg, fp).empty());
  EXPECT_EQ(fp.drr_rect.size(), 5u);
}

TEST(Floorplan, RandomFloorplansAreSound) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const auto tg = fx::random_dag(n, 0.1, rng);
    const Pst p = fx::random_valid_pst(n, rng, 5);
    for (bool align : {false, true}) {
      const auto fp = evaluate_floorplan(p, tg, ChipSpec{}, align);
      ASSERT_TRUE(verify_floorplan(p, tg, fp).empty());
      if (align) {
        for (std::size_t d = 1; d < fp.drr_rect.size(); ++d) ASSERT_EQ(fp.drr_rect[d].h % 50, 0);
      }
    }
  }
}

TEST(Floorplan, PackingMatchesConstraintGraphOracle) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 5);
    std::vector<PackItem> items;
    std::vector<int> ps, qs;
    for (int i = 0; i < m; ++i) {
      items.push_back({i + 1, 1 + static_cast<int>(rng() % 9), 1 + static_cast<int>(rng() % 9)});
      ps.push_back(i + 1);
    }
    qs = ps;
    std::shuffle(ps.begin(), ps.end(), rng);
    std::shuffle(qs.begin(), qs.end(), rng);
    ASSERT_EQ(pack(items, ps, qs), oracle::brute_pack(items, ps, qs));
  }
}

TEST(Floorplan, RelabelledIdsGiveTheSamePlan) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    const auto tg = fx::random_dag(n, 0.0, rng);
    const Pst p = fx::random_valid_pst(n, rng);
    std::vector<int> perm(n + 1);
    for (int i = 0; i <= n; ++i) perm[i] = i;
    std::shuffle(perm.begin() + 1, perm.end(), rng);
    std::vector<TaskModule> mods(n);
    for (int id = 1; id <= n; ++id) mods[perm[id] - 1] = tg.module(id);
    const TaskGraph tg2(mods, {});
    Pst p2;
    p2.part = Partition(n);
    for (TaskId id : p.ps) p2.ps.push_back(perm[id]);
    for (TaskId id : p.qs) p2.qs.push_back(perm[id]);
    for (TaskId id : p.rs) p2.rs.push_back(perm[id]);
    for (int id = 1; id <= n; ++id) p2.part.assign(perm[id], p.part.of(id));
    const auto a = evaluate_floorplan(p, tg, ChipSpec{}, false);
    const auto b = evaluate_floorplan(p2, tg2, ChipSpec{}, false);
    EXPECT_EQ(a.cols, b.cols);
    EXPECT_EQ(a.rows, b.rows);
    for (int id = 1; id <= n; ++id) EXPECT_EQ(a.module_rect[id], b.module_rect[perm[id]]);
  }
}

TEST(Floorplan, InsertionEnvelopeMatchesRepacking) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 500; ++trial) {
    const int s = static_cast<int>(rng() % 7);
    std::vector<PackItem> items;
    std::vector<int> ps, qs;
    for (int i = 0; i < s; ++i) {
      items.push_back({i + 1, 1 + static_cast<int>(rng() % 9), 1 + static_cast<int>(rng() % 9)});
      ps.push_back(i + 1);
    }
    qs = ps;
    std::shuffle(ps.begin(), ps.end(), rng);
    std::shuffle(qs.begin(), qs.end(), rng);
    std::vector<int> w(s), h(s), q(s);
    for (int i = 0; i < s; ++i) {
      w[i] = items[ps[i] - 1].w;
      h[i] = items[ps[i] - 1].h;
      q[i] = static_cast<int>(std::find(qs.begin(), qs.end(), ps[i]) - qs.begin());
    }
    InsertionEnvelope env;
    env.build(s, w.data(), h.data(), q.data());
    const int nw = 1 + static_cast<int>(rng() % 9), nh = 1 + static_cast<int>(rng() % 9);
    for (int a = 0; a <= s; ++a) {
      for (int b = 0; b <= s; ++b) {
        auto items2 = items;
        items2.push_back({s + 1, nw, nh});
        auto ps2 = ps, qs2 = qs;
        ps2.insert(ps2.begin() + a, s + 1);
        qs2.insert(qs2.begin() + b, s + 1);
        const Extent want = envelope(pack(items2, ps2, qs2));
        ASSERT_EQ(env.with(a, b, nw, nh), want);
      }
    }
  }
}
