#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"

using namespace pdr;

namespace {

int count_of(const std::string& s, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

std::string expect_schema_error(const std::string& text) {
  try {
    parse_benchmark(text, "t.json");
  } catch (const SchemaError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no schema error for: " << text;
  return {};
}

const char* kTiny = R"({"format":"pdrplan-benchmark/1","name":"tiny",
  "chip":{"cols":117,"rows":350,"clb_config_ms":0.0013,"frame_rows":50},
  "modules":[{"id":1,"w":2,"h":3,"exec_ms":1.5}],"edges":[]})";

SAConfig quick() {
  SAConfig c;
  c.t_start = 20;
  c.t_end = 1;
  c.cooling = 0.7;
  c.iters_per_temp = 10;
  c.norm_samples = 10;
  return c;
}

}  // namespace

TEST(BenchIo, TenModuleFixtureRoundTripsByteExactly) {
  const std::string text = read_text(fx::data_path("ten_module.json"));
  const auto b = parse_benchmark(text);
  EXPECT_EQ(dump_benchmark(b), text);
  EXPECT_EQ(b.modules.size(), 10u);
  EXPECT_EQ(b.edges.size(), 10u);
  int canonical = 0;
  for (const auto& e : b.edges) canonical += !e.reconstructed;
  EXPECT_EQ(canonical, 4) << "only the edges named in the source are unmarked";
}

TEST(BenchIo, EdgelessBenchmarkLoads) {
  const auto b = parse_benchmark(kTiny);
  EXPECT_EQ(b.graph().size(), 1);
  EXPECT_TRUE(b.edges.empty());
  EXPECT_EQ(parse_benchmark(dump_benchmark(b)), b);
}

TEST(BenchIo, DuplicateIdIsRejected) {
  std::string t = kTiny;
  t.replace(t.find("[{\"id\":1"), 1, "[{\"id\":1,\"w\":1,\"h\":1,\"exec_ms\":1},");
  const auto msg = expect_schema_error(t);
  EXPECT_NE(msg.find("/modules/1/id"), std::string::npos) << msg;
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(BenchIo, SchemaDiagnosticsNameTheField) {
  std::string t = kTiny;
  t.replace(t.find("\"w\":2"), 5, "\"w\":0");
  EXPECT_NE(expect_schema_error(t).find("t.json: /modules/0/w: value 0 out of range"), std::string::npos);

  t = kTiny;
  t.replace(t.find("\"edges\":[]"), 10, "\"edges\":[{\"from\":1,\"to\":2,\"comm\":1}]");
  EXPECT_NE(expect_schema_error(t).find("/edges/0/to"), std::string::npos);

  t = kTiny;
  t.replace(t.find("\"name\""), 6, "\"nmae\"");
  EXPECT_NE(expect_schema_error(t).find("unknown field"), std::string::npos);

  t = kTiny;
  t.replace(t.find("benchmark/1"), 11, "benchmark/9");
  EXPECT_NE(expect_schema_error(t).find("/format"), std::string::npos);
}

TEST(BenchIo, MalformedJsonReportsLineAndColumn) {
  const std::string t = "{\n  \"format\": \"x\",\n  oops\n}";
  const auto msg = expect_schema_error(t);
  EXPECT_EQ(msg.rfind("t.json:3:", 0), 0u) << msg;
}

TEST(BenchIo, CyclicBenchmarkIsRejected) {
  BenchmarkFile b = parse_benchmark(kTiny);
  b.modules.push_back({2, 1, 1, 1.0});
  b.edges = {{1, 2, 1.0, false}, {2, 1, 1.0, false}};
  EXPECT_THROW(parse_benchmark(dump_benchmark(b)), SchemaError);
}

TEST(BenchIo, GeneratedValuesStayInRange) {
  GenSpec g = *preset("t10-1");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    g.seed = seed;
    const auto b = generate(g);
    ASSERT_EQ(b.modules.size(), 10u);
    EXPECT_EQ(b.edges.size(), 10u);
    for (const auto& m : b.modules) {
      EXPECT_GE(m.exec_ms, 40.0);
      EXPECT_LE(m.exec_ms, 55.0);
      EXPECT_GE(m.w, g.w_lo);
      EXPECT_LE(m.w, g.w_hi);
      EXPECT_GE(m.h, g.h_lo);
      EXPECT_LE(m.h, g.h_hi);
    }
    for (const auto& e : b.edges) {
      EXPECT_GE(e.comm, 20.0);
      EXPECT_LE(e.comm, 30.0);
    }
    EXPECT_NO_THROW(b.graph());
    EXPECT_EQ(parse_benchmark(dump_benchmark(b)), b);
  }
}

TEST(BenchIo, ZeroDensityMeansNoEdges) {
  GenSpec g;
  g.edge_density = 0;
  EXPECT_TRUE(generate(g).edges.empty());
}

TEST(BenchIo, GenerationIsDeterministic) {
  GenSpec g = *preset("t50-2");
  g.seed = 77;
  EXPECT_EQ(dump_benchmark(generate(g)), dump_benchmark(generate(g)));
  GenSpec h = g;
  h.seed = 78;
  EXPECT_NE(dump_benchmark(generate(g)), dump_benchmark(generate(h)));
}

TEST(BenchIo, PresetTable) {
  EXPECT_EQ(preset_specs().size(), 9u);
  EXPECT_EQ(preset("t30-1")->edge_count(), 51);
  EXPECT_EQ(preset("t50-3")->edge_count(), 78);
  EXPECT_FALSE(preset("t70-1"));
  GenSpec bad;
  bad.n = 3;
  bad.edge_density = 2;  // 6 edges > 3 acyclic pairs
  EXPECT_THROW(generate(bad), ContractError);
}

TEST(BenchIo, PstFilesRoundTrip) {
  const Pst p = fx::feasible_ten();
  EXPECT_EQ(parse_pst(dump_pst(p), 10), p);
  EXPECT_EQ(load_pst(fx::data_path("ten_module_feasible.pst.json"), 10), p);
  EXPECT_EQ(load_pst(fx::data_path("ten_module_backward.pst.json"), 10), fx::backward_ten());
}

TEST(BenchIo, ConfigOverridesArePartial) {
  SAConfig c;
  const ojson j = ojson::parse(R"({"cooling":0.9,"weights":{"c1":2,"factors":{"cross_drr":{"alpha_d":4}}}})");
  apply_config(detail::Field(j, ""), c);
  EXPECT_EQ(c.cooling, 0.9);
  EXPECT_EQ(c.t_start, 2000.0);
  EXPECT_EQ(c.weights.c1, 2.0);
  EXPECT_EQ(c.weights.factors[2].alpha_d, 4.0);
  EXPECT_EQ(c.weights.factors[2].beta_t, 1.5);
  SAConfig d;
  apply_config(detail::Field(config_to_json(c), ""), d);
  EXPECT_EQ(config_to_json(d), config_to_json(c));
  const ojson bad = ojson::parse(R"({"weights":{"alpha":0.5}})");
  EXPECT_THROW(apply_config(detail::Field(bad, ""), d), SchemaError);
}

TEST(BenchIo, SolutionFilesVerify) {
  const auto b = fx::ten_module_file();
  const auto tg = b.graph();
  RunInfo run;
  run.config = quick();
  const auto r = anneal(tg, b.chip(), run.config);
  run.norms = r.norms;
  const std::string text = dump_solution(b, tg, b.chip(), r.best_pst, run);
  const auto s = parse_solution(text, 10);
  EXPECT_EQ(s.pst, r.best_pst);
  EXPECT_TRUE(validate_solution(b, s).empty());
  const ojson j = ojson::parse(text);
  EXPECT_EQ(j["metrics"]["T_ms"].get<double>(), ticks_to_ms(r.best.T));
  EXPECT_EQ(j["metrics"]["cost"].get<double>(), r.best.cost);
  EXPECT_EQ(j["layers"].size(), static_cast<std::size_t>(LayerTable(r.best_pst).layer_count()));
}

TEST(BenchIo, TamperedSolutionFailsValidation) {
  const auto b = fx::ten_module_file();
  const auto tg = b.graph();
  RunInfo run;
  const std::string text = dump_solution(b, tg, b.chip(), fx::feasible_ten(), run);
  ASSERT_TRUE(validate_solution(b, parse_solution(text, 10)).empty());

  ojson j = ojson::parse(text);
  j["tasks"][3]["bt_ms"] = j["tasks"][3]["bt_ms"].get<double>() + 0.5;
  auto issues = validate_solution(b, parse_solution(j.dump(), 10));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].find("/tasks/3/bt_ms"), std::string::npos);

  j = ojson::parse(text);
  j["pst"]["rs"] = {1, 2, 6, 3, 4, 5, 7, 8, 9, 10};
  j["pst"]["partition"] = ojson::parse(dump_pst(fx::backward_ten()))["pst"]["partition"];
  issues = validate_solution(b, parse_solution(j.dump(), 10));
  ASSERT_FALSE(issues.empty());
  EXPECT_NE(issues[0].find("infeasible"), std::string::npos);

  BenchmarkFile other = b;
  other.modules[0].exec_ms += 1;
  EXPECT_FALSE(validate_solution(other, parse_solution(text, 10)).empty());
}

TEST(BenchIo, FloorplanSvgOfOneModule) {
  const auto tg = fx::graph_of({fx::module(10, 20, 1.0)}, {});
  const Pst p = fx::make_pst({1}, {1}, {1}, {{1, {{1}}}}, 1);
  const auto svg = render_floorplan_svg(p, ChipSpec{}, evaluate_floorplan(p, tg, ChipSpec{}, false));
  EXPECT_EQ(count_of(svg, "class=\"drr\""), 1);
  EXPECT_EQ(count_of(svg, "class=\"module\""), 1);
}

TEST(BenchIo, FloorplanSvgShowsResidentLayers) {
  const auto tg = fx::ten_module();
  const Pst p = fx::feasible_ten();
  const auto fp = evaluate_floorplan(p, tg, ChipSpec{}, false);
  // After rank 1 only DRR 2 holds a layer (m1, m2).
  const auto first = render_floorplan_svg(p, ChipSpec{}, fp, 1);
  EXPECT_EQ(count_of(first, "class=\"module\""), 2);
  EXPECT_EQ(count_of(first, "class=\"drr\""), 4);
  // Finally: {7,8}, {9,10}, {5}, {4}.
  EXPECT_EQ(count_of(render_floorplan_svg(p, ChipSpec{}, fp), "class=\"module\""), 6);
}

TEST(BenchIo, GanttHasOneConfigBarPerLayer) {
  const auto tg = fx::ten_module();
  const Pst p = fx::feasible_ten();
  const auto s = schedule_pst(p, tg, ChipSpec{}, SpanMode::Sum);
  const auto svg = render_gantt_svg(p, tg, s);
  EXPECT_EQ(count_of(svg, "class=\"config\""), 7);
  EXPECT_EQ(count_of(svg, "class=\"exec\""), 10);
  EXPECT_TRUE(verify_schedule(p, tg, s).empty()) << "configuration bars are disjoint";
}

TEST(BenchIo, HashTracksContent) {
  auto b = fx::ten_module_file();
  const auto h = benchmark_hash(b);
  EXPECT_EQ(h.size(), 16u);
  b.name += "x";
  EXPECT_NE(benchmark_hash(b), h);
}

TEST(BenchIo, MissingFileIsAnIoError) {
  EXPECT_THROW(read_text("/nonexistent/nowhere.json"), IoError);
}
