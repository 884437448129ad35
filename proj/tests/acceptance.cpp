#include "autoda/analysis.hpp"
#include "autoda/attack.hpp"
#include "autoda/compiler.hpp"
#include "autoda/controller.hpp"
#include "autoda/generator.hpp"
#include "autoda/interpreter.hpp"
#include "autoda/oracle.hpp"
#include "autoda/parallel.hpp"
#include "autoda/program_text.hpp"
#include "autoda/reference.hpp"
#include "autoda/report.hpp"
#include "autoda/search.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace autoda;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool same_bits(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_bits(a[i], b[i])) return false;
  return true;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Operand values: mostly Gaussian, sometimes zeros, signed zeros,
// infinities, NaN, tiny or huge magnitudes.
double draw_value(Rng &rng) {
  switch (rng.below(16)) {
    case 0: return 0.0;
    case 1: return -0.0;
    case 2: return rng.below(2) ? INFINITY : -INFINITY;
    case 3: return std::numeric_limits<double>::quiet_NaN();
    case 4: return rng.gaussian() * 1e-300;
    case 5: return rng.gaussian() * 1e300;
    default: return rng.gaussian();
  }
}

Vector draw_vector(std::size_t dim, Rng &rng) {
  Vector v(dim);
  for (auto &x : v) x = draw_value(rng);
  return v;
}

// Direct arithmetic for each row of the operation table.
Value expected(OpCode op, const std::vector<Value> &in) {
  auto s = [&](std::size_t i) { return std::get<double>(in[i]); };
  auto v = [&](std::size_t i) -> const Vector & { return std::get<Vector>(in[i]); };
  switch (op) {
    case OpCode::add_ss: return s(0) + s(1);
    case OpCode::sub_ss: return s(0) - s(1);
    case OpCode::mul_ss: return s(0) * s(1);
    case OpCode::div_ss: return s(0) / s(1);
    case OpCode::add_vv: {
      Vector r(v(0).size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = v(0)[i] + v(1)[i];
      return r;
    }
    case OpCode::sub_vv: {
      Vector r(v(0).size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = v(0)[i] - v(1)[i];
      return r;
    }
    case OpCode::mul_vs: {
      Vector r(v(0).size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = v(0)[i] * s(1);
      return r;
    }
    case OpCode::div_vs: {
      Vector r(v(0).size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = v(0)[i] / s(1);
      return r;
    }
    case OpCode::dot_vv: {
      double acc = 0.0;
      for (std::size_t i = 0; i < v(0).size(); ++i) acc += v(0)[i] * v(1)[i];
      return acc;
    }
    case OpCode::norm_v: {
      double acc = 0.0;
      for (double x : v(0)) acc += x * x;
      return std::sqrt(acc);
    }
  }
  return 0.0;
}

bool same_value(const Value &a, const Value &b) {
  if (a.index() != b.index()) return false;
  if (a.index() == 0) return same_bits(std::get<double>(a), std::get<double>(b));
  return same_bits(std::get<Vector>(a), std::get<Vector>(b));
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = Rng::stream(1, {1});
  const int cases = 100000;
  int mismatches = 0, program_mismatches = 0;
  const std::string header = "param s0 = 0\nparam s1 = 0\ninput v2\ninput v3\ninput v4\n";
  std::vector<TacProgram> single(all_ops.size());
  for (std::size_t k = 0; k < all_ops.size(); ++k) {
    const auto &info = op_info(all_ops[k]);
    const std::string a = info.params[0] == Kind::scalar ? "s0" : "v2";
    const std::string b = info.params[1] == Kind::scalar ? "s1" : "v3";
    const std::string dest = fmt::format("{}5", kind_prefix(info.result));
    const std::string args = info.arity == 1 ? a : a + "," + b;
    // A vector result is returned directly; a scalar result is spread over x.
    std::string body = fmt::format("{} = {}({})\n", dest, info.name, args);
    body += info.result == Kind::vector ? "return v5\n" : "v6 = MUL(v4,s5)\nreturn v6\n";
    single[k] = compile(parse_program(header + body));
  }
  for (int c = 0; c < cases; ++c) {
    const std::size_t k = c % all_ops.size();
    const OpCode op = all_ops[k];
    const auto &info = op_info(op);
    const std::size_t dim = 1 + rng.below(16);
    std::vector<Value> in;
    for (unsigned i = 0; i < info.arity; ++i)
      in.push_back(info.params[i] == Kind::scalar ? Value{draw_value(rng)} : Value{draw_vector(dim, rng)});
    const Value want = expected(op, in);
    if (!same_value(eval_op(op, in), want)) ++mismatches;

    // The same case through the compiled program path.
    Vector hyper{0.0, 0.0}, x0(dim, 0.0), x(dim, 0.0), ones(dim, 1.0);
    if (info.params[0] == Kind::scalar) hyper[0] = std::get<double>(in[0]);
    else x0 = std::get<Vector>(in[0]);
    if (info.arity == 2) {
      if (info.params[1] == Kind::scalar) hyper[1] = std::get<double>(in[1]);
      else x = std::get<Vector>(in[1]);
    }
    const auto got = run_tac(single[k], hyper, x0, x, ones);
    Vector want_vec;
    if (info.result == Kind::vector) {
      want_vec = std::get<Vector>(want);
    } else {
      want_vec.assign(dim, 0.0);
      for (auto &w : want_vec) w = 1.0 * std::get<double>(want);
    }
    if (!same_bits(got, want_vec)) ++program_mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && program_mismatches == 0 && secs < 10.0,
          fmt::format("{} cases, {} op mismatches, {} program-path mismatches, {:.2f} s (limit 10 s)", cases, mismatches,
                      program_mismatches, secs)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  GenConfig cfg;
  cfg.max_len = 20;
  Rng rng = Rng::stream(2, {1});
  const int programs = 10000;
  int mismatches = 0, slot_failures = 0, mapping_failures = 0;
  for (int i = 0; i < programs; ++i) {
    const auto p = gen_random(cfg, rng);
    const auto t = compile(p);
    if (!check_slots(t).ok) ++slot_failures;
    if (!check_slot_mapping(p, t).ok) ++mapping_failures;
    for (int k = 0; k < 5; ++k) {
      Vector h{rng.gaussian()}, x0(8), x(8), n(8);
      rng.gaussian(x0);
      rng.gaussian(x);
      rng.gaussian(n);
      if (!same_bits(run_ssa(p, h, x0, x, n), run_tac(t, h, x0, x, n))) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && slot_failures == 0 && mapping_failures == 0 && secs < 60.0,
          fmt::format("{} programs x 5 tuples, {} mismatches, {} read-before-write, {} slot-mapping failures, {:.1f} s "
                      "(limit 60 s)",
                      programs, mismatches, slot_failures, mapping_failures, secs)};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  SearchConfig cfg;
  cfg.seed = 3;
  cfg.chunk = 8192;
  CandidateStream stream(cfg, default_workers());
  const std::uint64_t target = 10'000'000;
  while (stream.counters().generated < target) (void)stream.next();
  const auto c = stream.counters();
  const double n = static_cast<double>(c.generated);
  const double survived = c.evaluated / n, inputs = c.failed_inputs / n, dist = c.failed_distance / n;
  const double secs = seconds_since(t0);
  return {survived < 0.01 && inputs >= 0.25 && inputs <= 0.70 && secs < 600.0,
          fmt::format("{} programs: survived {:.4f}% (< 1%), inputs-check failures {:.3f}% (in [25%, 70%]), "
                      "distance-test failures {:.3f}%, {:.0f} s (limit 600 s)",
                      c.generated, 100 * survived, 100 * inputs, 100 * dist, secs)};
}

Outcome criterion4() {
  ControllerConfig cfg;
  bool ok = true;
  std::string why;
  auto windows = [&](bool k, double lo, bool lo_closed, double hi, bool hi_closed) {
    AttackState st;
    st.p = cfg.target;
    st.hyper = {1.0};
    st.adaptive = {true};
    double worst_lo = INFINITY, worst_hi = -INFINITY;
    for (int w = 0; w < 200; ++w) {
      const double before = st.hyper[0];
      for (int i = 0; i < 10; ++i) controller_step(st, k, cfg);
      const double r = st.hyper[0] / before;
      worst_lo = std::min(worst_lo, r);
      worst_hi = std::max(worst_hi, r);
      // Closed endpoints allow rounding of the ten multiplications.
      const bool in = (lo_closed ? r >= lo * (1 - 1e-12) : r > lo) && (hi_closed ? r <= hi * (1 + 1e-12) : r < hi);
      if (!in && ok) why += fmt::format("; first violation k={} window {} ratio {:.17g}", k, w, r);
      ok = ok && in;
    }
    return std::pair{worst_lo, worst_hi};
  };
  const auto fail = windows(false, 0.5, true, 1.0, false);
  const auto succ = windows(true, 1.0, false, 1.5, true);

  double drift = 0.0;
  Vector s{0.37};
  for (int i = 0; i < 1000; ++i) {
    const double before = s[0];
    scale_hyperparams(cfg.target, s, {true}, cfg);
    drift = std::max(drift, std::abs(s[0] - before) / before);
  }
  const bool fixed = drift <= 1e-12;
  const bool anchors = controller_f(0.0, cfg) == 0.5 && controller_f(0.25, cfg) == 1.0 && controller_f(1.0, cfg) == 1.5;
  return {ok && fixed && anchors,
          fmt::format("k=0 ten-step factors in [{:.17g}, {:.17g}], k=1 in [{:.17g}, {:.17g}] (closed ends +-1e-12 rel); fixed-point drift {:.1e} "
                      "(<= 1e-12); anchors f(0)={}, f(0.25)={}, f(1)={} exact{}",
                      fail.first, fail.second, succ.first, succ.second, drift, controller_f(0.0, cfg),
                      controller_f(0.25, cfg), controller_f(1.0, cfg), why)};
}

// x0 at distance 1 from the boundary, start at distance 4 from x0 on the
// adversarial side, 5000 queries.
std::vector<double> convergence_ratios(const DecisionOracle &oracle, const std::function<Vector(Rng &)> &make_x0,
                                       std::vector<double> *optimal) {
  const auto program = compile(boundary_program());
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng = Rng::stream(seed, {5});
    const Vector x0 = make_x0(rng);
    Vector x1;
    do {
      Vector dir(oracle.dim());
      rng.gaussian(dir);
      const double len = kernel::norm(dir.data(), dir.size());
      x1 = x0;
      for (std::size_t i = 0; i < dir.size(); ++i) x1[i] += 4.0 * dir[i] / len;
    } while (oracle.decide_offline(x1) != Decision::adversarial);
    AttackConfig cfg;
    cfg.query_budget = 5000;
    const StartPoint start{x1, 0, false};
    const auto log = attack(program, oracle, x0, start, cfg, rng);
    ratios.push_back(distortion_ratio(log));
    if (optimal) optimal->push_back(*oracle.optimal_distance(x0) / log.initial_distance);
  }
  return ratios;
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t dim = 16;
  HalfspaceOracle half(Vector(dim, 1.0 / std::sqrt(static_cast<double>(dim))), 0.0);
  // Random x0 moved to distance 1 on the benign side.
  const auto half_x0 = [&](Rng &rng) {
    Vector x(dim);
    rng.gaussian(x);
    const auto &w = half.normal();
    const double s = kernel::dot(w.data(), x.data(), dim) + 1.0;
    for (std::size_t i = 0; i < dim; ++i) x[i] -= s * w[i];
    return x;
  };
  const auto hr = convergence_ratios(half, half_x0, nullptr);
  const double hm = median(hr);

  SphereOracle sphere(Vector(dim, 0.0), 3.0, Side::outside);
  const auto sphere_x0 = [&](Rng &rng) {
    Vector x(dim);
    rng.gaussian(x);
    const double len = kernel::norm(x.data(), dim);
    for (auto &v : x) v *= 2.0 / len;
    return x;
  };
  std::vector<double> opt;
  const auto sr = convergence_ratios(sphere, sphere_x0, &opt);
  const double sm = median(sr), so = median(opt);
  const double secs = seconds_since(t0);
  return {hm <= 0.30 && sm <= 1.2 * so && secs < 120.0,
          fmt::format("halfspace median ratio {:.4f} (<= 0.30, optimum 0.25); sphere median ratio {:.4f} (<= 1.2 x "
                      "optimum {:.4f} = {:.4f}); {:.1f} s (limit 120 s)",
                      hm, sm, so, 1.2 * so, secs)};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  SearchConfig cfg;
  cfg.seed = 1;
  auto oracle = make_oracle(cfg.oracle, cfg.dim);
  const auto res = run_search(cfg, *oracle);
  if (!res.error.empty() || res.ranked.empty()) return {false, "search produced no records: " + res.error};
  const double best = res.ranked.front().stage2_ratio;

  // Boundary on the same stage-2 examples, starts and noise streams.
  auto ref_oracle = make_oracle(cfg.oracle, cfg.dim);
  const auto pool = search_example_pool(cfg, *ref_oracle);
  const auto set = prepare_stage2(cfg, *ref_oracle, pool, cfg.query_budget);
  const auto ref = stage2_eval(compile(boundary_program()), *ref_oracle, *set, cfg, default_workers());
  const double secs = seconds_since(t0);
  return {best <= 2.0 * ref.mean_ratio && best < 1.0,
          fmt::format("{} queries, {} batches, best stage-2 ratio {:.4f}; Boundary {:.4f}; need <= {:.4f} and < 1; "
                      "{:.0f} s",
                      res.queries, res.batches, best, ref.mean_ratio, 2.0 * ref.mean_ratio, secs)};
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  int monotone = 0;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SearchConfig cfg;
    cfg.seed = seed;
    auto oracle = make_oracle(cfg.oracle, cfg.dim);
    const auto r = run_ablation(cfg, *oracle, 100000, 1);
    bool ok = true;
    rows += fmt::format("\n    seed {}:", seed);
    for (std::size_t i = 0; i < r.size(); ++i) {
      rows += fmt::format(" {}={:.4f}", r[i].name, r[i].best());
      if (i && r[i].best() > r[i - 1].best()) ok = false;
    }
    rows += ok ? " non-increasing" : " not monotone";
    monotone += ok;
  }
  const double secs = seconds_since(t0);
  return {monotone >= 4,
          fmt::format("{} of 5 seeds non-increasing (need >= 4); {:.0f} s{}", monotone, secs, rows)};
}

bool run_cli(const std::string &args) {
  const std::string cmd = std::string(AUTODA_CLI) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> problems;

  // Attack runs: every query is charged, starting-point search included.
  auto oracle = make_oracle("halfspace:axis=0;b=0", 16);
  const auto program = compile(boundary_program());
  const auto pool = make_example_pool(*oracle, 20, 1.0, Rng::stream(8, {1}));
  std::size_t by_budget = 0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    oracle->reset_queries();
    AttackConfig cfg;
    cfg.query_budget = 200 + 150 * k;
    Rng rng = Rng::stream(8, {2, k});
    const auto log = attack(program, *oracle, pool[k], *oracle->fallback(pool[k]), cfg, rng);
    std::uint64_t last = log.start_queries;
    for (const auto &u : log.updates) last = std::max(last, u.q);
    if (oracle->queries() != log.queries) problems.push_back(fmt::format("attack {}: counter != logged queries", k));
    if (last > log.queries) problems.push_back(fmt::format("attack {}: update after the last query", k));
    if (log.iterations < 10 * cfg.query_budget) {
      ++by_budget;
      if (log.queries != cfg.query_budget) problems.push_back(fmt::format("attack {}: ended early", k));
    }
  }

  // Search: the oracle counter equals the reported total.
  SearchConfig scfg;
  scfg.query_budget = 400000;
  scfg.seed = 8;
  auto soracle = make_oracle(scfg.oracle, scfg.dim);
  const auto sres = run_search(scfg, *soracle);
  if (soracle->queries() != sres.queries) problems.push_back("search: counter != reported queries");
  if (sres.queries > scfg.query_budget) problems.push_back("search: budget exceeded");

  // Byte-identical outputs across worker counts, through the CLI.
  const fs::path root = fs::temp_directory_path() / "autoda_acceptance_c8";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string prog = (root / "boundary.ssa").string();
  write_file(prog, boundary_program_text());
  for (int w : {1, 3}) {
    const auto dir = root / fmt::format("search_w{}", w);
    if (!run_cli(fmt::format("search --budget 400000 --seed 8 --workers {} --out {}", w, dir.string())))
      problems.push_back(fmt::format("search CLI failed with {} workers", w));
    const auto bdir = root / fmt::format("bench_w{}", w);
    if (!run_cli(fmt::format("bench --program boundary={} --oracle 'halfspace:axis=0;b=0' --dim 16 --budget 3000 "
                             "--seed 8 --workers {} --out {}",
                             prog, w, bdir.string())))
      problems.push_back(fmt::format("bench CLI failed with {} workers", w));
  }
  auto same_file = [&](const fs::path &a, const fs::path &b) {
    if (!fs::exists(a) || !fs::exists(b)) {
      problems.push_back("missing " + a.filename().string());
      return;
    }
    if (read_file(a.string()) != read_file(b.string())) problems.push_back(a.filename().string() + " differs");
  };
  same_file(root / "search_w1" / "results.jsonl", root / "search_w3" / "results.jsonl");
  same_file(root / "bench_w1" / "curve_boundary.csv", root / "bench_w3" / "curve_boundary.csv");
  const bool nonempty = fs::exists(root / "search_w1" / "results.jsonl") &&
                        !read_file((root / "search_w1" / "results.jsonl").string()).empty();
  if (!nonempty) problems.push_back("results.jsonl is empty");
  fs::remove_all(root);

  const double secs = seconds_since(t0);
  std::string detail = fmt::format("{} attacks ({} ended by budget), search {} of {} queries; results.jsonl and "
                                   "curve CSV compared for 1 vs 3 workers; {:.0f} s",
                                   pool.size(), by_budget, sres.queries, scfg.query_budget, secs);
  for (const auto &p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}

int main(int argc, char **argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("criterion {}: {}  {}\n", id, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
