#pragma once

// Benchmark, P-ST and solution files (JSON), seeded benchmark generation and
// SVG rendering of floorplans and schedules.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdrplan/anneal.hpp"
#include "pdrplan/core_model.hpp"
#include "pdrplan/cost.hpp"
#include "pdrplan/feasibility.hpp"
#include "pdrplan/floorplan.hpp"
#include "pdrplan/rcg.hpp"

namespace pdr {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kBenchmarkFormat = "pdrplan-benchmark/1";
inline constexpr const char* kSolutionFormat = "pdrplan-solution/1";
inline constexpr const char* kPstFormat = "pdrplan-pst/1";
inline constexpr const char* kConfigFormat = "pdrplan-config/1";

// ---------------------------------------------------------------------------
// Schema helpers
// ---------------------------------------------------------------------------

namespace detail {

/// A JSON node together with its JSON-pointer path, for field diagnostics.
class Field {
 public:
  Field(const ojson& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const ojson& json() const { return *j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SchemaError((path_.empty() ? std::string("/") : path_) + ": " + msg);
  }

  void expect_object() const {
    if (!j_->is_object()) fail("expected an object");
  }
  void expect_array() const {
    if (!j_->is_array()) fail("expected an array");
  }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Field at(const char* key) const {
    expect_object();
    if (!j_->contains(key)) fail(std::string("missing field \"") + key + "\"");
    return Field((*j_)[key], path_ + "/" + key);
  }

  std::optional<Field> opt(const char* key) const {
    expect_object();
    if (!j_->contains(key)) return std::nullopt;
    return Field((*j_)[key], path_ + "/" + key);
  }

  std::size_t size() const {
    expect_array();
    return j_->size();
  }

  Field operator[](std::size_t i) const { return Field((*j_)[i], path_ + "/" + std::to_string(i)); }

  void only_keys(std::initializer_list<const char*> keys) const {
    expect_object();
    for (const auto& item : j_->items()) {
      bool known = false;
      for (const char* k : keys) known = known || item.key() == k;
      if (!known) fail("unknown field \"" + item.key() + "\"");
    }
  }

  long long as_int(long long lo = std::numeric_limits<long long>::min(),
                   long long hi = std::numeric_limits<long long>::max()) const {
    if (!j_->is_number_integer()) fail("expected an integer");
    const long long v = j_->get<long long>();
    if (v < lo || v > hi) fail("value " + std::to_string(v) + " out of range");
    return v;
  }

  std::uint64_t as_u64() const {
    if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<long long>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return j_->get<std::uint64_t>();
  }

  double as_number() const {
    if (!j_->is_number()) fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double as_positive() const {
    const double v = as_number();
    if (!(v > 0)) fail("expected a positive number");
    return v;
  }

  double as_non_negative() const {
    const double v = as_number();
    if (v < 0) fail("expected a non-negative number");
    return v;
  }

  bool as_bool() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::string as_string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  void expect_format(const char* format) const {
    const std::string f = at("format").as_string();
    if (f != format) at("format").fail("expected \"" + std::string(format) + "\", got \"" + f + "\"");
  }

 private:
  const ojson* j_;
  std::string path_;
};

/// Parses JSON text, converting syntax errors to line:column diagnostics.
inline ojson parse_json(const std::string& text, const std::string& source) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

/// Runs `fn`, prefixing schema diagnostics with the source name.
template <class Fn>
auto with_source(const std::string& source, Fn fn) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    if (what.rfind(source + ":", 0) == 0) throw;
    throw SchemaError(source + ": " + what);
  }
}

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Read failure on a path.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// Benchmark files
// ---------------------------------------------------------------------------

struct ModuleSpec {
  int id = 0;
  int w = 1;
  int h = 1;
  double exec_ms = 1.0;
  friend bool operator==(const ModuleSpec&, const ModuleSpec&) = default;
};

struct EdgeSpec {
  int from = 0;
  int to = 0;
  double comm = 0.0;
  bool reconstructed = false;  // not taken from a primary source
  friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

struct BenchmarkFile {
  std::string name;
  std::string notes;
  int cols = 117;
  int rows = 350;
  double clb_config_ms = 0.0013;
  int frame_rows = 50;
  std::vector<ModuleSpec> modules;  // sorted by id after loading
  std::vector<EdgeSpec> edges;      // file order is kept; it fixes summation order
  friend bool operator==(const BenchmarkFile&, const BenchmarkFile&) = default;

  ChipSpec chip() const {
    ChipSpec c;
    c.cols = cols;
    c.rows = rows;
    c.clb_config = ms_to_ticks(clb_config_ms);
    c.frame_rows = frame_rows;
    c.check();
    return c;
  }

  /// Task graph over ids 1..n. Throws InstanceError on bad ids or cycles.
  TaskGraph graph() const {
    const ChipSpec c = chip();
    const int n = static_cast<int>(modules.size());
    std::vector<TaskModule> mods(n);
    std::vector<int> seen(n + 1, 0);
    for (const auto& m : modules) {
      if (m.id < 1 || m.id > n) {
        throw InstanceError("module id " + std::to_string(m.id) + " outside 1.." + std::to_string(n));
      }
      if (seen[m.id]++) throw InstanceError("duplicate module id " + std::to_string(m.id));
      if (!(m.exec_ms > 0)) throw InstanceError("module " + std::to_string(m.id) + " needs exec_ms > 0");
      const Ticks exec = ms_to_ticks(m.exec_ms);
      if (exec <= 0) throw InstanceError("module " + std::to_string(m.id) + " execution time rounds to zero");
      mods[m.id - 1] = TaskModule::make(m.w, m.h, exec, c);
    }
    std::vector<DepEdge> es;
    es.reserve(edges.size());
    for (const auto& e : edges) es.push_back({e.from, e.to, e.comm});
    return TaskGraph(std::move(mods), std::move(es));
  }
};

inline ojson to_json(const BenchmarkFile& b) {
  ojson j;
  j["format"] = kBenchmarkFormat;
  j["name"] = b.name;
  if (!b.notes.empty()) j["notes"] = b.notes;
  j["chip"] = {{"cols", b.cols}, {"rows", b.rows}, {"clb_config_ms", b.clb_config_ms}, {"frame_rows", b.frame_rows}};
  auto mods = b.modules;
  std::sort(mods.begin(), mods.end(), [](const ModuleSpec& x, const ModuleSpec& y) { return x.id < y.id; });
  j["modules"] = ojson::array();
  for (const auto& m : mods) j["modules"].push_back({{"id", m.id}, {"w", m.w}, {"h", m.h}, {"exec_ms", m.exec_ms}});
  j["edges"] = ojson::array();
  for (const auto& e : b.edges) {
    ojson je = {{"from", e.from}, {"to", e.to}, {"comm", e.comm}};
    if (e.reconstructed) je["reconstructed"] = true;
    j["edges"].push_back(std::move(je));
  }
  return j;
}

inline BenchmarkFile benchmark_from_json(const ojson& j) {
  const detail::Field root(j, "");
  root.only_keys({"format", "name", "notes", "chip", "modules", "edges"});
  root.expect_format(kBenchmarkFormat);
  BenchmarkFile b;
  b.name = root.at("name").as_string();
  if (auto n = root.opt("notes")) b.notes = n->as_string();
  const auto chip = root.at("chip");
  chip.only_keys({"cols", "rows", "clb_config_ms", "frame_rows"});
  b.cols = static_cast<int>(chip.at("cols").as_int(1, 1 << 20));
  b.rows = static_cast<int>(chip.at("rows").as_int(1, 1 << 20));
  b.clb_config_ms = chip.at("clb_config_ms").as_positive();
  if (ms_to_ticks(b.clb_config_ms) <= 0) chip.at("clb_config_ms").fail("rounds to zero nanoseconds");
  b.frame_rows = static_cast<int>(chip.at("frame_rows").as_int(0, 1 << 20));

  const auto mods = root.at("modules");
  std::set<int> ids;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    const auto m = mods[i];
    m.only_keys({"id", "w", "h", "exec_ms"});
    ModuleSpec s;
    s.id = static_cast<int>(m.at("id").as_int(1, 1 << 24));
    s.w = static_cast<int>(m.at("w").as_int(1, 1 << 20));
    s.h = static_cast<int>(m.at("h").as_int(1, 1 << 20));
    s.exec_ms = m.at("exec_ms").as_positive();
    if (ms_to_ticks(s.exec_ms) <= 0) m.at("exec_ms").fail("rounds to zero nanoseconds");
    if (!ids.insert(s.id).second) m.at("id").fail("duplicate module id " + std::to_string(s.id));
    b.modules.push_back(s);
  }
  const int n = static_cast<int>(b.modules.size());
  for (std::size_t i = 0; i < mods.size(); ++i) {
    if (b.modules[i].id > n) mods[i].at("id").fail("module ids must be exactly 1.." + std::to_string(n));
  }
  std::sort(b.modules.begin(), b.modules.end(), [](const ModuleSpec& x, const ModuleSpec& y) { return x.id < y.id; });

  const auto edges = root.at("edges");
  std::set<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto e = edges[i];
    e.only_keys({"from", "to", "comm", "reconstructed"});
    EdgeSpec s;
    s.from = static_cast<int>(e.at("from").as_int());
    s.to = static_cast<int>(e.at("to").as_int());
    s.comm = e.at("comm").as_non_negative();
    if (auto r = e.opt("reconstructed")) s.reconstructed = r->as_bool();
    if (!ids.count(s.from)) e.at("from").fail("unknown module " + std::to_string(s.from));
    if (!ids.count(s.to)) e.at("to").fail("unknown module " + std::to_string(s.to));
    if (s.from == s.to) e.fail("self-loop on module " + std::to_string(s.from));
    if (!pairs.insert({s.from, s.to}).second) e.fail("duplicate edge");
    b.edges.push_back(s);
  }
  // Surfaces cycles as schema errors at load time.
  try {
    (void)b.graph();
  } catch (const InstanceError& ex) {
    root.fail(ex.what());
  }
  return b;
}

inline BenchmarkFile parse_benchmark(const std::string& text, const std::string& source = "<benchmark>") {
  return detail::with_source(source, [&] { return benchmark_from_json(detail::parse_json(text, source)); });
}

inline std::string dump_benchmark(const BenchmarkFile& b) { return detail::dump(to_json(b)); }

inline BenchmarkFile load_benchmark(const std::string& path) { return parse_benchmark(read_text(path), path); }

inline void save_benchmark(const std::string& path, const BenchmarkFile& b) { write_text(path, dump_benchmark(b)); }

/// Hash of the canonical serialization.
inline std::string benchmark_hash(const BenchmarkFile& b) { return hex64(fnv1a64(dump_benchmark(b))); }

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GenSpec {
  std::string name = "generated";
  int n = 10;
  double edge_density = 1.0;  // edges per module
  double exec_lo = 40, exec_hi = 55;  // ms
  double comm_lo = 20, comm_hi = 30;
  int w_lo = 5, w_hi = 40;
  int h_lo = 10, h_hi = 120;
  std::uint64_t seed = 1;
  int cols = 117;
  int rows = 350;
  double clb_config_ms = 0.0013;
  int frame_rows = 50;

  int edge_count() const { return static_cast<int>(std::llround(edge_density * n)); }

  void check() const {
    if (n < 1) throw ContractError("generator needs n >= 1");
    if (!(edge_density >= 0)) throw ContractError("edge density must be non-negative");
    if (edge_count() > static_cast<long long>(n) * (n - 1) / 2) {
      throw ContractError("edge density exceeds the number of acyclic pairs");
    }
    if (!(exec_lo > 0) || exec_hi < exec_lo) throw ContractError("exec range must be positive and non-empty");
    if (!(comm_lo >= 0) || comm_hi < comm_lo) throw ContractError("comm range must be non-negative and non-empty");
    if (w_lo < 1 || w_hi < w_lo || h_lo < 1 || h_hi < h_lo) throw ContractError("dimension ranges must be >= 1 and non-empty");
  }
};

namespace detail {

inline double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

inline double uniform_in(Rng& rng, double lo, double hi) {
  // Clamped: rounding may step past an end that is not a multiple of 0.001.
  return std::clamp(round3(lo + (hi - lo) * rng.uniform()), lo, hi);
}

}  // namespace detail

/// Random benchmark: uniform module sizes and times, and edge_count()
/// distinct edges, each from the earlier to the later module of a random
/// permutation, so the graph is acyclic by construction.
inline BenchmarkFile generate(const GenSpec& g) {
  g.check();
  Rng rng(g.seed);
  BenchmarkFile b;
  b.name = g.name;
  b.cols = g.cols;
  b.rows = g.rows;
  b.clb_config_ms = g.clb_config_ms;
  b.frame_rows = g.frame_rows;
  for (int id = 1; id <= g.n; ++id) {
    ModuleSpec m;
    m.id = id;
    m.w = g.w_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(g.w_hi - g.w_lo + 1)));
    m.h = g.h_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(g.h_hi - g.h_lo + 1)));
    m.exec_ms = detail::uniform_in(rng, g.exec_lo, g.exec_hi);
    if (!(m.exec_ms > 0)) m.exec_ms = g.exec_hi;
    b.modules.push_back(m);
  }
  std::vector<int> order(g.n);
  for (int i = 0; i < g.n; ++i) order[i] = i + 1;
  for (int i = g.n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
  }
  std::set<std::pair<int, int>> chosen;
  const int E = g.edge_count();
  while (static_cast<int>(chosen.size()) < E) {
    int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.n)));
    int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.n)));
    if (a == c) continue;
    if (a > c) std::swap(a, c);
    chosen.insert({order[a], order[c]});
  }
  for (auto [from, to] : chosen) {
    b.edges.push_back({from, to, detail::uniform_in(rng, g.comm_lo, g.comm_hi), false});
  }
  return b;
}

/// Benchmark classes t10-1 .. t50-3 with the published sizes, edge counts
/// and time ranges.
inline std::vector<GenSpec> preset_specs() {
  struct Row {
    const char* name;
    int n, edges;
    double elo, ehi, clo, chi;
  };
  static const Row rows[] = {
      {"t10-1", 10, 10, 40, 55, 20, 30},    {"t10-2", 10, 12, 40, 55, 20, 30},
      {"t10-3", 10, 8, 40, 55, 20, 30},     {"t30-1", 30, 51, 30, 350, 60, 610},
      {"t30-2", 30, 72, 40, 60, 20, 30},    {"t30-3", 30, 71, 40, 60, 20, 30},
      {"t50-1", 50, 33, 40, 60, 20, 30},    {"t50-2", 50, 51, 20, 180, 50, 350},
      {"t50-3", 50, 78, 40, 60, 20, 30},
  };
  std::vector<GenSpec> out;
  for (const auto& r : rows) {
    GenSpec g;
    g.name = r.name;
    g.n = r.n;
    g.edge_density = static_cast<double>(r.edges) / r.n;
    g.exec_lo = r.elo;
    g.exec_hi = r.ehi;
    g.comm_lo = r.clo;
    g.comm_hi = r.chi;
    out.push_back(g);
  }
  return out;
}

inline std::optional<GenSpec> preset(const std::string& name) {
  for (auto& g : preset_specs()) {
    if (g.name == name) return g;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// P-ST files
// ---------------------------------------------------------------------------

inline ojson pst_to_json(const Pst& pst) {
  ojson j;
  j["ps"] = pst.ps;
  j["qs"] = pst.qs;
  j["rs"] = pst.rs;
  const int N = pst.part.drr_count();
  std::vector<std::vector<std::vector<int>>> groups(N + 1);
  for (TaskId id : pst.ps) {
    auto& g = groups[pst.part.drr[id]];
    const int l = pst.part.layer[id];
    if (static_cast<int>(g.size()) < l) g.resize(l);
    g[l - 1].push_back(id);
  }
  j["partition"] = ojson::array();
  for (int d = 1; d <= N; ++d) j["partition"].push_back({{"drr", d}, {"layers", groups[d]}});
  return j;
}

/// P-ST over ids 1..n. Structure is not validated here.
inline Pst pst_from_json(const detail::Field& f, int n) {
  f.only_keys({"ps", "qs", "rs", "partition"});
  Pst pst;
  auto seq = [&](const char* key) {
    const auto a = f.at(key);
    std::vector<TaskId> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(static_cast<TaskId>(a[i].as_int(1, n)));
    return out;
  };
  pst.ps = seq("ps");
  pst.qs = seq("qs");
  pst.rs = seq("rs");
  pst.part = Partition(n);
  const auto parts = f.at("partition");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto d = parts[i];
    d.only_keys({"drr", "layers"});
    const int drr = static_cast<int>(d.at("drr").as_int(1, n));
    const auto layers = d.at("layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto members = layers[l];
      for (std::size_t k = 0; k < members.size(); ++k) {
        const TaskId id = static_cast<TaskId>(members[k].as_int(1, n));
        if (pst.part.drr[id] != 0) members[k].fail("task " + std::to_string(id) + " assigned twice");
        pst.part.assign(id, {drr, static_cast<int>(l) + 1});
      }
    }
  }
  return pst;
}

inline std::string dump_pst(const Pst& pst) {
  ojson j;
  j["format"] = kPstFormat;
  j["pst"] = pst_to_json(pst);
  return detail::dump(j);
}

inline Pst parse_pst(const std::string& text, int n, const std::string& source = "<pst>") {
  return detail::with_source(source, [&] {
    const ojson j = detail::parse_json(text, source);
    const detail::Field root(j, "");
    root.only_keys({"format", "pst"});
    root.expect_format(kPstFormat);
    return pst_from_json(root.at("pst"), n);
  });
}

inline Pst load_pst(const std::string& path, int n) { return parse_pst(read_text(path), n, path); }

// ---------------------------------------------------------------------------
// Annealer configuration
// ---------------------------------------------------------------------------

inline ojson config_to_json(const SAConfig& c) {
  const char* names[] = {"same_layer", "same_drr", "cross_drr"};
  ojson f;
  for (int i = 0; i < 3; ++i) {
    f[names[i]] = {{"alpha_d", c.weights.factors[i].alpha_d}, {"beta_t", c.weights.factors[i].beta_t}};
  }
  ojson j;
  j["t_start"] = c.t_start;
  j["t_end"] = c.t_end;
  j["cooling"] = c.cooling;
  j["iters_per_temp"] = c.iters_per_temp;
  j["cip_size"] = c.cip_size;
  j["norm_samples"] = c.norm_samples;
  j["span_mode"] = to_string(c.span_mode);
  j["align"] = c.align;
  j["weights"] = {{"alpha", c.weights.alpha},
                  {"beta", c.weights.beta},
                  {"gamma", c.weights.gamma},
                  {"c1", c.weights.c1},
                  {"factors", f}};
  return j;
}

/// Overrides the fields present in `f`; absent fields keep their values.
inline void apply_config(const detail::Field& f, SAConfig& c) {
  f.only_keys({"format", "t_start", "t_end", "cooling", "iters_per_temp", "cip_size", "norm_samples", "span_mode",
               "align", "weights"});
  if (f.has("format")) f.expect_format(kConfigFormat);
  if (auto v = f.opt("t_start")) c.t_start = v->as_positive();
  if (auto v = f.opt("t_end")) c.t_end = v->as_positive();
  if (auto v = f.opt("cooling")) c.cooling = v->as_positive();
  if (auto v = f.opt("iters_per_temp")) c.iters_per_temp = static_cast<int>(v->as_int(0, 1 << 30));
  if (auto v = f.opt("cip_size")) c.cip_size = static_cast<int>(v->as_int(1, 1 << 30));
  if (auto v = f.opt("norm_samples")) c.norm_samples = static_cast<int>(v->as_int(0, 1 << 30));
  if (auto v = f.opt("span_mode")) {
    const std::string s = v->as_string();
    if (s == "sum") c.span_mode = SpanMode::Sum;
    else if (s == "drr_area") c.span_mode = SpanMode::DrrArea;
    else v->fail("expected \"sum\" or \"drr_area\"");
  }
  if (auto v = f.opt("align")) c.align = v->as_bool();
  if (auto w = f.opt("weights")) {
    w->only_keys({"alpha", "beta", "gamma", "c1", "factors"});
    if (auto v = w->opt("alpha")) c.weights.alpha = v->as_non_negative();
    if (auto v = w->opt("beta")) c.weights.beta = v->as_non_negative();
    if (auto v = w->opt("gamma")) c.weights.gamma = v->as_non_negative();
    if (auto v = w->opt("c1")) c.weights.c1 = v->as_non_negative();
    if (auto fs = w->opt("factors")) {
      fs->only_keys({"same_layer", "same_drr", "cross_drr"});
      const char* names[] = {"same_layer", "same_drr", "cross_drr"};
      for (int i = 0; i < 3; ++i) {
        if (auto e = fs->opt(names[i])) {
          e->only_keys({"alpha_d", "beta_t"});
          if (auto v = e->opt("alpha_d")) c.weights.factors[i].alpha_d = v->as_non_negative();
          if (auto v = e->opt("beta_t")) c.weights.factors[i].beta_t = v->as_non_negative();
        }
      }
    }
  }
  try {
    c.check();
  } catch (const ContractError& e) {
    f.fail(e.what());
  }
}

inline void load_config(const std::string& path, SAConfig& c) {
  detail::with_source(path, [&] {
    const ojson j = detail::parse_json(read_text(path), path);
    apply_config(detail::Field(j, ""), c);
    return 0;
  });
}

// ---------------------------------------------------------------------------
// Solution files
// ---------------------------------------------------------------------------

struct RunInfo {
  std::uint64_t seed = 1;     // seed given by the user
  int restarts = 1;
  int best_restart = 0;
  std::uint64_t restart_seed = 1;  // seed of the reported run
  SAConfig config;
  Normalizers norms;
};

/// Everything recorded in a solution file, built from (benchmark, P-ST, run).
inline ojson solution_to_json(const BenchmarkFile& b, const TaskGraph& tg, const ChipSpec& chip, const Pst& pst,
                              const RunInfo& run) {
  const Evaluation ev = evaluate(pst, tg, chip, run.config.eval_options(), run.config.weights, run.norms);
  const LayerTable table(pst);
  const Metrics& m = ev.metrics;
  ojson j;
  j["format"] = kSolutionFormat;
  j["benchmark"] = {{"name", b.name}, {"hash", benchmark_hash(b)}};
  j["pst"] = pst_to_json(pst);
  j["tasks"] = ojson::array();
  for (TaskId id = 1; id <= tg.size(); ++id) {
    const Rect& r = ev.fp.module_rect[id];
    j["tasks"].push_back({{"id", id},
                          {"drr", pst.part.drr[id]},
                          {"layer", pst.part.layer[id]},
                          {"x", r.x},
                          {"y", r.y},
                          {"w", r.w},
                          {"h", r.h},
                          {"bc_ms", ticks_to_ms(ev.sched.bc_task[id])},
                          {"bt_ms", ticks_to_ms(ev.sched.bt[id])}});
  }
  j["layers"] = ojson::array();
  for (int r = 1; r <= table.layer_count(); ++r) {
    const LayerRef ref = table.layer(r).ref;
    j["layers"].push_back({{"drr", ref.drr},
                           {"layer", ref.index},
                           {"co", r},
                           {"bc_ms", ticks_to_ms(ev.sched.bc_layer[r])},
                           {"span_ms", ticks_to_ms(ev.sched.span[r])}});
  }
  j["drrs"] = ojson::array();
  for (int d = 1; d <= table.drr_count(); ++d) {
    const Rect& r = ev.fp.drr_rect[d];
    j["drrs"].push_back({{"drr", d}, {"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
  }
  j["totals"] = {{"cols", m.cols}, {"rows", m.rows}};
  j["metrics"] = {{"T_ms", ticks_to_ms(m.T)},
                  {"AC", m.ac},
                  {"CC", m.cc},
                  {"CC_per_task_sum", m.cc_per_task_sum},
                  {"cost", m.cost},
                  {"feasible", true},
                  {"success", m.fits()},
                  {"drr_count", table.drr_count()}};
  j["run"] = {{"seed", run.seed},
              {"restarts", run.restarts},
              {"best_restart", run.best_restart},
              {"restart_seed", run.restart_seed},
              {"config", config_to_json(run.config)},
              {"normalizers", {{"ac", run.norms.ac}, {"t_ms", run.norms.t}, {"cc", run.norms.cc}}}};
  return j;
}

inline std::string dump_solution(const BenchmarkFile& b, const TaskGraph& tg, const ChipSpec& chip, const Pst& pst,
                                 const RunInfo& run) {
  return detail::dump(solution_to_json(b, tg, chip, pst, run));
}

/// The inputs a solution file records: enough to regenerate all of it.
struct SolutionFile {
  ojson raw;
  std::string benchmark_name;
  std::string benchmark_hash;
  Pst pst;
  RunInfo run;
};

inline SolutionFile parse_solution(const std::string& text, int n, const std::string& source = "<solution>") {
  return detail::with_source(source, [&] {
    SolutionFile s;
    s.raw = detail::parse_json(text, source);
    const detail::Field root(s.raw, "");
    root.only_keys({"format", "benchmark", "pst", "tasks", "layers", "drrs", "totals", "metrics", "run"});
    root.expect_format(kSolutionFormat);
    const auto bench = root.at("benchmark");
    bench.only_keys({"name", "hash"});
    s.benchmark_name = bench.at("name").as_string();
    s.benchmark_hash = bench.at("hash").as_string();
    s.pst = pst_from_json(root.at("pst"), n);
    const auto run = root.at("run");
    run.only_keys({"seed", "restarts", "best_restart", "restart_seed", "config", "normalizers"});
    s.run.seed = run.at("seed").as_u64();
    s.run.restarts = static_cast<int>(run.at("restarts").as_int(1, 1 << 20));
    s.run.best_restart = static_cast<int>(run.at("best_restart").as_int(0, s.run.restarts - 1));
    s.run.restart_seed = run.at("restart_seed").as_u64();
    apply_config(run.at("config"), s.run.config);
    const auto nm = run.at("normalizers");
    nm.only_keys({"ac", "t_ms", "cc"});
    s.run.norms = {nm.at("ac").as_positive(), nm.at("t_ms").as_positive(), nm.at("cc").as_positive()};
    (void)root.at("tasks");
    (void)root.at("metrics");
    return s;
  });
}

inline SolutionFile load_solution(const std::string& path, int n) { return parse_solution(read_text(path), n, path); }

/// Re-derives everything in a solution file from its benchmark and P-ST.
/// Returns human-readable problems; empty means the file verifies exactly.
inline std::vector<std::string> validate_solution(const BenchmarkFile& b, const SolutionFile& s) {
  std::vector<std::string> out;
  const TaskGraph tg = b.graph();
  const ChipSpec chip = b.chip();
  if (s.benchmark_hash != benchmark_hash(b)) out.push_back("benchmark hash mismatch: solution is for another benchmark");
  if (s.benchmark_name != b.name) out.push_back("benchmark name mismatch");
  auto issues = validate_pst(s.pst, tg);
  if (!issues.empty()) {
    for (auto& i : issues) out.push_back("P-ST: " + i);
    return out;
  }
  const auto feas = is_feasible(s.pst, tg);
  if (!feas) {
    out.push_back("P-ST is infeasible: " + describe_witness(*feas.witness));
    return out;
  }
  const Evaluation ev = evaluate(s.pst, tg, chip, s.run.config.eval_options(), s.run.config.weights, s.run.norms);
  for (auto& v : verify_schedule(s.pst, tg, ev.sched)) out.push_back("schedule: " + v);
  for (auto& v : verify_floorplan(s.pst, tg, ev.fp)) out.push_back("floorplan: " + v);
  if (s.run.config.align && chip.frame_rows > 0) {
    for (int d = 1; d < static_cast<int>(ev.fp.drr_rect.size()); ++d) {
      if (ev.fp.drr_rect[d].h % chip.frame_rows) out.push_back("DRR " + std::to_string(d) + " height is not frame aligned");
    }
  }
  const ojson expect = solution_to_json(b, tg, chip, s.pst, s.run);
  const ojson patch = ojson::diff(s.raw, expect);
  for (const auto& op : patch) {
    const std::string path = op.value("path", "");
    std::string msg = "field " + path + " differs";
    if (op.contains("value")) msg += " (expected " + op["value"].dump() + ")";
    out.push_back(msg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

inline const char* palette(int i) {
  static const char* colors[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                 "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
  return colors[(i - 1 + 10) % 10];
}

}  // namespace detail

/// Chip outline, DRR outlines and, per DRR, the modules of the layer
/// resident after configuration rank `rank` (0 or out of range: the last).
inline std::string render_floorplan_svg(const Pst& pst, const ChipSpec& chip, const Floorplan& fp,
                                        int rank = 0) {
  const LayerTable table(pst);
  const int L = table.layer_count();
  if (rank <= 0 || rank > L) rank = L;
  const double s = 4.0;
  const int W = std::max(chip.cols, fp.cols), H = std::max(chip.rows, fp.rows);
  auto X = [&](double x) { return detail::fmt(x * s); };
  auto Y = [&](double y, double h) { return detail::fmt((H - y - h) * s); };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(W * s) << "\" height=\""
    << detail::fmt(H * s) << "\">\n";
  o << "<rect class=\"chip\" x=\"0\" y=\"" << Y(0, chip.rows) << "\" width=\"" << X(chip.cols) << "\" height=\""
    << detail::fmt(chip.rows * s) << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4\"/>\n";
  for (int d = 1; d <= table.drr_count(); ++d) {
    const Rect& r = fp.drr_rect[d];
    o << "<rect class=\"drr\" x=\"" << X(r.x) << "\" y=\"" << Y(r.y, r.h) << "\" width=\"" << X(r.w)
      << "\" height=\"" << detail::fmt(r.h * s) << "\" fill=\"none\" stroke=\"#000\" stroke-width=\"2\"/>\n";
    int live = 0;
    for (int rr : table.drr_ranks(d)) {
      if (rr <= rank) live = rr;
    }
    if (!live) continue;
    for (TaskId id : table.layer(live).tasks) {
      const Rect& m = fp.module_rect[id];
      o << "<rect class=\"module\" x=\"" << X(m.x) << "\" y=\"" << Y(m.y, m.h) << "\" width=\"" << X(m.w)
        << "\" height=\"" << detail::fmt(m.h * s) << "\" fill=\"" << detail::palette(d)
        << "\" fill-opacity=\"0.6\" stroke=\"#333\"/>\n";
      o << "<text x=\"" << X(m.x + m.w / 2.0) << "\" y=\"" << Y(m.y + m.h / 2.0, 0)
        << "\" font-size=\"12\" text-anchor=\"middle\">m" << id << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

/// Timeline: one lane of configuration bars (one per layer) followed by one
/// execution lane per task, on a shared millisecond axis.
inline std::string render_gantt_svg(const Pst& pst, const TaskGraph& tg, const Schedule& sched) {
  const LayerTable table(pst);
  const double T = std::max(ticks_to_ms(sched.length), 1e-9);
  const double left = 60, width = 800, lane = 18;
  const int lanes = 1 + tg.size();
  auto X = [&](Ticks t) { return detail::fmt(left + width * ticks_to_ms(t) / T); };
  auto Wd = [&](Ticks t) { return detail::fmt(width * ticks_to_ms(t) / T); };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(left + width + 20) << "\" height=\""
    << detail::fmt(lane * (lanes + 2)) << "\">\n";
  o << "<text x=\"2\" y=\"" << detail::fmt(lane * 0.75) << "\" font-size=\"11\">config</text>\n";
  for (int r = 1; r <= table.layer_count(); ++r) {
    o << "<rect class=\"config\" x=\"" << X(sched.bc_layer[r]) << "\" y=\"2\" width=\"" << Wd(sched.span[r])
      << "\" height=\"" << detail::fmt(lane - 4) << "\" fill=\"" << detail::palette(table.layer(r).ref.drr)
      << "\" stroke=\"#000\"><title>layer " << to_string(table.layer(r).ref) << "</title></rect>\n";
  }
  for (TaskId id = 1; id <= tg.size(); ++id) {
    const double y = lane * id;
    o << "<text x=\"2\" y=\"" << detail::fmt(y + lane * 0.75) << "\" font-size=\"11\">m" << id << "</text>\n";
    o << "<rect class=\"exec\" x=\"" << X(sched.bt[id]) << "\" y=\"" << detail::fmt(y + 2) << "\" width=\""
      << Wd(tg.module(id).exec) << "\" height=\"" << detail::fmt(lane - 4) << "\" fill=\""
      << detail::palette(pst.part.drr[id]) << "\"/>\n";
  }
  const double axis_y = lane * (lanes + 0.5);
  o << "<line x1=\"" << left << "\" y1=\"" << detail::fmt(axis_y) << "\" x2=\"" << left + width << "\" y2=\""
    << detail::fmt(axis_y) << "\" stroke=\"#000\"/>\n";
  o << "<text x=\"" << left + width << "\" y=\"" << detail::fmt(axis_y + lane) << "\" font-size=\"11\" "
    << "text-anchor=\"end\">" << detail::fmt(T) << " ms</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace pdr
