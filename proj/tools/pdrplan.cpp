// pdrplan command-line tool: generate benchmarks, optimize, validate,
// schedule explicit P-STs, render SVGs and run brute-force cross-checks.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdrplan/pdrplan.hpp"

namespace {

using namespace pdr;

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kIo = 3 };

/// Failure that maps to a specific exit code and category.
struct CliFailure {
  int code;
  std::string category;
  std::string message;
};

std::string num(double v) { return ojson(v).dump(); }

struct Loaded {
  BenchmarkFile file;
  TaskGraph tg;
  ChipSpec chip;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.file = load_benchmark(path);
  l.tg = l.file.graph();
  l.chip = l.file.chip();
  return l;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

// --- gen ---------------------------------------------------------------------

struct GenOpts {
  std::string preset, name, out;
  int n = 10;
  double density = 1.0;
  std::vector<double> exec{40, 55}, comm{20, 30};
  std::vector<int> w{5, 40}, h{10, 120};
  std::uint64_t seed = 1;
  bool list = false;
};

int run_gen(const GenOpts& o, const CLI::App& app) {
  if (o.list) {
    for (const auto& g : preset_specs()) {
      std::cout << g.name << "  n=" << g.n << " edges=" << g.edge_count() << " exec=(" << g.exec_lo << ","
                << g.exec_hi << ") comm=(" << g.comm_lo << "," << g.comm_hi << ")\n";
    }
    return kOk;
  }
  GenSpec g;
  if (!o.preset.empty()) {
    auto p = preset(o.preset);
    if (!p) throw CliFailure{kUsage, "usage", "unknown preset " + o.preset};
    g = *p;
  }
  if (app.count("--n")) g.n = o.n;
  if (app.count("--density")) g.edge_density = o.density;
  if (app.count("--exec")) g.exec_lo = o.exec[0], g.exec_hi = o.exec[1];
  if (app.count("--comm")) g.comm_lo = o.comm[0], g.comm_hi = o.comm[1];
  if (app.count("--width")) g.w_lo = o.w[0], g.w_hi = o.w[1];
  if (app.count("--height")) g.h_lo = o.h[0], g.h_hi = o.h[1];
  g.seed = o.seed;
  if (!o.name.empty()) g.name = o.name;
  write_or_print(o.out, dump_benchmark(generate(g)));
  return kOk;
}

// --- optimize ----------------------------------------------------------------

struct OptOpts {
  std::vector<std::string> benchmarks;
  std::string out, out_dir, config, span_mode;
  std::uint64_t seed = 1;
  int restarts = 1, threads = 0;
  bool align = false, quiet = false;
  double t_start = 0, t_end = 0, cooling = 0;
  int iters = -1, cip = 0, norm_samples = -1;
};

SAConfig build_config(const OptOpts& o, const CLI::App& app) {
  SAConfig cfg;
  if (!o.config.empty()) load_config(o.config, cfg);
  if (app.count("--t-start")) cfg.t_start = o.t_start;
  if (app.count("--t-end")) cfg.t_end = o.t_end;
  if (app.count("--cooling")) cfg.cooling = o.cooling;
  if (app.count("--iters")) cfg.iters_per_temp = o.iters;
  if (app.count("--cip")) cfg.cip_size = o.cip;
  if (app.count("--norm-samples")) cfg.norm_samples = o.norm_samples;
  if (!o.span_mode.empty()) cfg.span_mode = o.span_mode == "drr_area" ? SpanMode::DrrArea : SpanMode::Sum;
  if (o.align) cfg.align = true;
  cfg.seed = o.seed;
  cfg.check();
  return cfg;
}

int run_optimize(const OptOpts& o, const CLI::App& app) {
  if (o.benchmarks.size() > 1 && !o.out.empty()) {
    throw CliFailure{kUsage, "usage", "--output takes a single benchmark; use --out-dir for several"};
  }
  const SAConfig cfg = build_config(o, app);
  std::printf("%-16s %4s %12s %4s %14s %10s %8s\n", "benchmark", "n", "T(ms)", "N", "CC", "runtime(s)", "success");
  for (const auto& path : o.benchmarks) {
    const Loaded b = load(path);
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = anneal_restarts(b.tg, b.chip, cfg, o.restarts, o.threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int best = best_result(results);
    int succ = 0;
    for (const auto& r : results) succ += r.best.fits() ? 1 : 0;
    RunInfo run;
    run.seed = o.seed;
    run.restarts = o.restarts;
    run.best_restart = best;
    run.restart_seed = o.restarts == 1 ? o.seed : stream_seed(o.seed, 1000 + static_cast<std::uint64_t>(best));
    run.config = cfg;
    run.norms = results[best].norms;
    const ojson sol = solution_to_json(b.file, b.tg, b.chip, results[best].best_pst, run);
    std::string target = o.out;
    if (target.empty() && !o.out_dir.empty()) {
      target = (std::filesystem::path(o.out_dir) / (b.file.name + ".solution.json")).string();
    }
    if (!target.empty()) write_text(target, detail::dump(sol));
    const auto& m = sol["metrics"];
    std::printf("%-16s %4d %12s %4d %14s %10.2f %5d/%-3d\n", b.file.name.c_str(), b.tg.size(),
                m["T_ms"].dump().c_str(), m["drr_count"].get<int>(), m["CC"].dump().c_str(), secs, succ,
                o.restarts);
    if (!o.quiet && target.empty()) std::cout << detail::dump(sol);
  }
  return kOk;
}

// --- validate ----------------------------------------------------------------

int run_validate(const std::string& bench, const std::string& solution) {
  const Loaded b = load(bench);
  const SolutionFile s = load_solution(solution, b.tg.size());
  const auto issues = validate_solution(b.file, s);
  if (issues.empty()) {
    std::cout << "ok: " << solution << " re-verifies against " << bench << "\n";
    return kOk;
  }
  for (const auto& i : issues) std::cerr << "validation: " << i << "\n";
  std::cerr << "error[validation]: " << issues.size() << " problem(s), first: " << issues.front() << "\n";
  return kFail;
}

// --- schedule ----------------------------------------------------------------

int run_schedule(const std::string& bench, const std::string& pst_path, const std::string& span_mode, bool align,
                 const std::string& out) {
  const Loaded b = load(bench);
  const Pst pst = load_pst(pst_path, b.tg.size());
  const auto issues = validate_pst(pst, b.tg);
  if (!issues.empty()) throw CliFailure{kFail, "invalid-pst", issues.front()};
  const auto feas = is_feasible(pst, b.tg);
  if (!feas) throw CliFailure{kFail, "infeasible", describe_witness(*feas.witness)};
  const SpanMode mode = span_mode == "drr_area" ? SpanMode::DrrArea : SpanMode::Sum;
  const Floorplan fp = evaluate_floorplan(pst, b.tg, b.chip, align);
  const Schedule s = schedule_pst(pst, b.tg, b.chip, mode, &fp);
  const LayerTable table(pst);
  ojson j;
  j["span_mode"] = to_string(mode);
  j["T_ms"] = ticks_to_ms(s.length);
  j["layers"] = ojson::array();
  for (int r = 1; r <= table.layer_count(); ++r) {
    const auto ref = table.layer(r).ref;
    j["layers"].push_back({{"drr", ref.drr},
                           {"layer", ref.index},
                           {"co", r},
                           {"bc_ms", ticks_to_ms(s.bc_layer[r])},
                           {"span_ms", ticks_to_ms(s.span[r])},
                           {"tasks", table.layer(r).tasks}});
  }
  j["tasks"] = ojson::array();
  for (TaskId id = 1; id <= b.tg.size(); ++id) {
    j["tasks"].push_back({{"id", id},
                          {"bt_ms", ticks_to_ms(s.bt[id])},
                          {"end_ms", ticks_to_ms(s.bt[id] + b.tg.module(id).exec)}});
  }
  write_or_print(out, detail::dump(j));
  return kOk;
}

// --- render ------------------------------------------------------------------

int run_render(const std::string& bench, const std::string& solution, const std::string& floorplan,
               const std::string& gantt, int rank) {
  const Loaded b = load(bench);
  const SolutionFile s = load_solution(solution, b.tg.size());
  const auto issues = validate_pst(s.pst, b.tg);
  if (!issues.empty()) throw CliFailure{kFail, "invalid-pst", issues.front()};
  const Evaluation ev =
      evaluate(s.pst, b.tg, b.chip, s.run.config.eval_options(), s.run.config.weights, s.run.norms);
  if (floorplan.empty() && gantt.empty()) throw CliFailure{kUsage, "usage", "give --floorplan and/or --gantt"};
  if (!floorplan.empty()) write_text(floorplan, render_floorplan_svg(s.pst, b.chip, ev.fp, rank));
  if (!gantt.empty()) write_text(gantt, render_gantt_svg(s.pst, b.tg, ev.sched));
  return kOk;
}

// --- oracle ------------------------------------------------------------------

int run_oracle(const std::string& bench, const std::string& pst_path) {
  const Loaded b = load(bench);
  const Pst pst = pst_path.empty() ? initial_solution(b.tg) : load_pst(pst_path, b.tg.size());
  const auto issues = validate_pst(pst, b.tg);
  if (!issues.empty()) throw CliFailure{kFail, "invalid-pst", issues.front()};
  int disagreements = 0;
  auto report = [&](const std::string& what, bool ok, const std::string& detail) {
    std::cout << (ok ? "agree    " : "DISAGREE ") << what << ": " << detail << "\n";
    disagreements += ok ? 0 : 1;
  };
  const bool lib = static_cast<bool>(is_feasible(pst, b.tg));
  const bool brute = oracle::brute_feasibility(pst, b.tg);
  report("feasibility", lib == brute, std::string("library ") + (lib ? "feasible" : "infeasible") + ", brute " +
                                          (brute ? "feasible" : "infeasible"));
  if (!lib || !brute) return disagreements ? kFail : kOk;

  const SAConfig cfg;
  const Normalizers n;
  const auto ev = evaluate(pst, b.tg, b.chip, cfg.eval_options(), cfg.weights, n);
  const auto bev = oracle::brute_evaluate(pst, b.tg, b.chip, cfg.eval_options(), cfg.weights, n);
  report("schedule length", ev.metrics.T == bev.T,
         "library " + num(ticks_to_ms(ev.metrics.T)) + " ms, brute " + num(ticks_to_ms(bev.T)) + " ms");
  report("outline", ev.metrics.cols == bev.cols && ev.metrics.rows == bev.rows,
         std::to_string(ev.metrics.cols) + "x" + std::to_string(ev.metrics.rows) + " vs " +
             std::to_string(bev.cols) + "x" + std::to_string(bev.rows));
  report("cost", ev.metrics.cost == bev.cost, num(ev.metrics.cost) + " vs " + num(bev.cost));

  for (TaskId k = 1; k <= b.tg.size(); ++k) {
    const RemovalContext ctx = remove_task(pst, k, b.tg, b.chip, cfg.align);
    const auto pts = enumerate_insertion_points(ctx);
    const auto bpts = oracle::brute_insertion_set(ctx.pst0, k, b.tg);
    report("insertion points of m" + std::to_string(k), pts == bpts,
           std::to_string(pts.size()) + " enumerated, " + std::to_string(bpts.size()) + " brute force");
    if (pts.empty()) continue;
    const Commit c = select_and_commit(ctx, cfg.weights, n, static_cast<int>(pts.size()), cfg.eval_options());
    const auto best = oracle::brute_best_insertion(ctx.pst0, k, b.tg, b.chip, cfg.eval_options(), cfg.weights, n);
    report("best insertion of m" + std::to_string(k), c.metrics.cost == best.eval.cost,
           to_string(c.point) + " cost " + num(c.metrics.cost) + ", brute " + to_string(best.point) + " cost " +
               num(best.eval.cost));
  }
  std::cout << disagreements << " disagreement(s)\n";
  return disagreements ? kFail : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint partitioning, scheduling and floorplanning for partially reconfigurable FPGAs"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "Generate a random benchmark");
  g->add_option("--preset", gen.preset, "Benchmark class, e.g. t10-1 (see --list)");
  g->add_flag("--list", gen.list, "List the presets");
  g->add_option("--n", gen.n, "Module count")->check(CLI::PositiveNumber);
  g->add_option("--density", gen.density, "Edges per module");
  g->add_option("--exec", gen.exec, "Execution time range in ms")->expected(2);
  g->add_option("--comm", gen.comm, "Communication weight range")->expected(2);
  g->add_option("--width", gen.w, "Module width range in CLB columns")->expected(2);
  g->add_option("--height", gen.h, "Module height range in CLB rows")->expected(2);
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--name", gen.name, "Benchmark name");
  g->add_option("-o,--output", gen.out, "Output file (default stdout)");

  OptOpts opt;
  auto* o = app.add_subcommand("optimize", "Anneal one or more benchmarks");
  o->add_option("benchmarks", opt.benchmarks, "Benchmark files")->required();
  o->add_option("-o,--output", opt.out, "Solution file (single benchmark)");
  o->add_option("--out-dir", opt.out_dir, "Directory for <name>.solution.json files");
  o->add_option("--seed", opt.seed, "Master seed");
  o->add_option("--restarts", opt.restarts, "Independent annealing runs")->check(CLI::PositiveNumber);
  o->add_option("--threads", opt.threads, "Worker threads (0: hardware concurrency)");
  o->add_flag("--align", opt.align, "Round DRR heights up to whole frames");
  o->add_option("--config", opt.config, "JSON file overriding annealer settings");
  o->add_option("--span-mode", opt.span_mode, "Layer configuration span model")
      ->check(CLI::IsMember({"sum", "drr_area"}));
  o->add_option("--t-start", opt.t_start, "Initial temperature");
  o->add_option("--t-end", opt.t_end, "Final temperature");
  o->add_option("--cooling", opt.cooling, "Cooling ratio");
  o->add_option("--iters", opt.iters, "Moves per temperature (0: size default)");
  o->add_option("--cip", opt.cip, "Candidates evaluated exactly per move");
  o->add_option("--norm-samples", opt.norm_samples, "Random-walk states for the normalizers");
  o->add_flag("-q,--quiet", opt.quiet, "Print only the summary table");

  std::string v_bench, v_sol;
  auto* v = app.add_subcommand("validate", "Re-verify a solution file against its benchmark");
  v->add_option("benchmark", v_bench)->required();
  v->add_option("solution", v_sol)->required();

  std::string s_bench, s_pst, s_mode = "sum", s_out;
  bool s_align = false;
  auto* s = app.add_subcommand("schedule", "Schedule an explicit P-ST or report why it is infeasible");
  s->add_option("benchmark", s_bench)->required();
  s->add_option("pst", s_pst)->required();
  s->add_option("--span-mode", s_mode)->check(CLI::IsMember({"sum", "drr_area"}));
  s->add_flag("--align", s_align, "Frame-aligned DRR heights (affects drr_area spans)");
  s->add_option("-o,--output", s_out, "Output file (default stdout)");

  std::string r_bench, r_sol, r_fp, r_gantt;
  int r_rank = 0;
  auto* r = app.add_subcommand("render", "Write floorplan and timeline SVGs for a solution");
  r->add_option("benchmark", r_bench)->required();
  r->add_option("solution", r_sol)->required();
  r->add_option("--floorplan", r_fp, "Floorplan SVG output");
  r->add_option("--gantt", r_gantt, "Timeline SVG output");
  r->add_option("--rank", r_rank, "Show layers resident after this configuration rank (0: last)");

  std::string x_bench, x_pst;
  auto* x = app.add_subcommand("oracle", "Cross-check the library against brute force on a small benchmark");
  x->add_option("benchmark", x_bench)->required();
  x->add_option("--pst", x_pst, "P-ST file (default: the annealer's initial solution)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return run_gen(gen, *g);
    if (*o) return run_optimize(opt, *o);
    if (*v) return run_validate(v_bench, v_sol);
    if (*s) return run_schedule(s_bench, s_pst, s_mode, s_align, s_out);
    if (*r) return run_render(r_bench, r_sol, r_fp, r_gantt, r_rank);
    if (*x) return run_oracle(x_bench, x_pst);
  } catch (const CliFailure& f) {
    std::cerr << "error[" << f.category << "]: " << f.message << "\n";
    return f.code;
  } catch (const IoError& e) {
    std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
    return kIo;
  } catch (const SchemaError& e) {
    std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
    return kIo;
  } catch (const InstanceError& e) {
    std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
    return kIo;
  } catch (const ContractError& e) {
    std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
    return kUsage;
  } catch (const pdr::Error& e) {
    std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
