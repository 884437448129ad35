#include "autoda/analysis.hpp"
#include "autoda/attack.hpp"
#include "autoda/compiler.hpp"
#include "autoda/config.hpp"
#include "autoda/error.hpp"
#include "autoda/generator.hpp"
#include "autoda/program_text.hpp"
#include "autoda/report.hpp"
#include "autoda/search.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace autoda;

namespace {

enum Exit { ok = 0, invalid = 1, runtime = 2 };

void emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-")
    std::fwrite(text.data(), 1, text.size(), stdout);
  else
    write_file(path, text);
}

struct GenOpts {
  std::uint64_t seed = 0;
  std::size_t count = 1;
  GenConfig gen;
  bool no_predefined = false;
  bool filter = false;
  std::string out;
};

int run_gen(const GenOpts &o) {
  GenConfig g = o.gen;
  g.seed = o.seed;
  g.predefined = !o.no_predefined;
  g.validate();
  DistanceTest dtest;
  std::vector<SsaProgram> out;
  for (std::uint64_t i = 0; out.size() < o.count; ++i) {
    // Same stream layout as the search, so `gen --seed S` shows its candidates.
    Rng rng = Rng::stream(o.seed, {1, i});
    auto p = gen_random(g, rng);
    if (o.filter && (!inputs_check(p).pass || !dtest(p))) continue;
    out.push_back(std::move(p));
  }
  emit(o.out, format_programs(out));
  return ok;
}

int run_check(const std::string &path, bool require_hyper, std::size_t max_len) {
  const auto programs = parse_programs(read_file(path));
  DistanceTest dtest;
  bool all = true;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    const auto &p = programs[i];
    std::string status;
    try {
      p.validate(max_len);
      const auto ic = inputs_check(p, require_hyper);
      if (!ic.pass)
        status = "fail inputs_check: " + ic.reason;
      else if (!dtest(p))
        status = "fail distance_test";
      else
        status = "pass";
    } catch (const ProgramError &e) {
      status = std::string("invalid: ") + e.what();
    }
    if (status != "pass") all = false;
    const auto dead = dead_instructions(p);
    fmt::print("program {}: {} ({} instructions, {} dead)\n", i + 1, status, p.body.size(), dead.size());
  }
  return all ? ok : invalid;
}

int run_compile(const std::string &path, const std::string &out) {
  const auto p = parse_program(read_file(path));
  const auto tac = compile(p);
  const std::string summary =
      fmt::format("slots: {} scalar, {} vector; ops: {}\n", tac.n_scalar_slots, tac.n_vector_slots, tac.body.size());
  emit(out, format_tac(tac));
  // Keep stdout parseable as TAC when the program goes there.
  std::fputs(summary.c_str(), out.empty() || out == "-" ? stderr : stdout);
  return ok;
}

TacProgram load_program(const std::string &path, bool tac) {
  const auto text = read_file(path);
  return tac ? parse_tac(text) : compile(parse_program(text));
}

struct AttackOpts {
  std::string program;
  bool tac = false;
  std::string oracle;
  std::size_t dim = 0;
  std::uint64_t budget = 1000;
  std::uint64_t seed = 0;
  bool no_adapt = false;
  std::optional<double> epsilon;
  std::string x0_file;
  std::string fallback_file;
  std::string log;
};

int run_attack(const AttackOpts &o) {
  const auto program = load_program(o.program, o.tac);
  auto oracle = make_oracle(o.oracle, o.dim);
  Vector x0;
  if (!o.x0_file.empty()) {
    auto v = load_vectors(o.x0_file, oracle->dim());
    if (v.empty()) throw ConfigError("no example in " + o.x0_file);
    x0 = v.front();
  } else {
    x0 = make_example_pool(*oracle, 1, 1.0, Rng::stream(o.seed, {7})).front();
  }
  if (oracle->decide_offline(x0) == Decision::adversarial) throw ConfigError("x0 is already adversarial");
  Vector fallback;
  if (!o.fallback_file.empty()) {
    auto v = load_vectors(o.fallback_file, oracle->dim());
    if (v.empty()) throw ConfigError("no vector in " + o.fallback_file);
    fallback = v.front();
  } else {
    fallback = fallback_for(*oracle, x0, Rng::stream(o.seed, {7, 1}));
  }
  AttackConfig cfg;
  cfg.query_budget = o.budget;
  cfg.adapt = !o.no_adapt;
  Rng rng = Rng::stream(o.seed, {7, 2});
  const auto log = attack(program, *oracle, x0, fallback, cfg, rng);
  emit(o.log, format_runlog(log, o.epsilon));
  if (!o.log.empty() && o.log != "-") {
    fmt::print("queries: {}, d0: {}, final: {}", log.queries, format_double(log.initial_distance),
               format_double(log.final_distance));
    if (log.found_start) fmt::print(", ratio: {}", format_double(distortion_ratio(log)));
    fmt::print("\n");
  }
  return log.error.empty() ? ok : runtime;
}

struct SearchOpts {
  std::string config;
  std::string out = "search_out";
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;
  bool print_config = false;
};

int run_search_cmd(const SearchOpts &o) {
  SearchConfig cfg;
  if (!o.config.empty()) {
    auto kv = KeyValues::load(o.config);
    cfg = search_config(kv);
    kv.reject_unused();
  }
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  if (o.budget) cfg.query_budget = *o.budget;
  if (o.print_config) {
    std::fputs(format_search_config(cfg).c_str(), stdout);
    return ok;
  }
  cfg.validate();

  fs::create_directories(o.out);
  const auto progress = (fs::path(o.out) / "progress.jsonl").string();
  write_file(progress, "");
  std::string streamed;
  auto res = run_search(cfg, [&](const SearchRecord &r) {
    streamed += format_record(r) + "\n";
    write_file(progress, streamed);
  });

  std::string results;
  for (const auto &r : res.ranked) results += format_record(r) + "\n";
  write_file((fs::path(o.out) / "results.jsonl").string(), results);
  write_file((fs::path(o.out) / "stats.json").string(), format_stats(res, cfg));
  for (std::size_t i = 0; i < std::min(cfg.top_k, res.ranked.size()); ++i)
    write_file((fs::path(o.out) / fmt::format("top_{:02}.ssa", i + 1)).string(), res.ranked[i].program);
  std::fputs(format_stats(res, cfg).c_str(), stdout);
  return res.error.empty() ? ok : runtime;
}

struct BenchOpts {
  std::string config;
  std::vector<std::string> programs;
  std::string oracle;
  std::size_t dim = 0;
  std::string examples;
  std::string out = "bench_out";
  std::optional<std::uint64_t> budget, seed;
  std::optional<double> epsilon;
  std::optional<std::size_t> workers;
  std::string aggregation;
  bool tac = false;
};

int run_bench(BenchOpts o) {
  BenchConfig cfg;
  if (!o.config.empty()) {
    auto kv = KeyValues::load(o.config);
    cfg = bench_config(kv);
    if (o.oracle.empty()) o.oracle = kv.get("oracle", std::string());
    if (o.dim == 0) o.dim = static_cast<std::size_t>(kv.get("dim", std::uint64_t{0}));
    if (o.examples.empty()) o.examples = kv.get("examples", std::string());
    kv.reject_unused();
  }
  if (o.budget) cfg.budget = *o.budget;
  if (o.seed) cfg.seed = *o.seed;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.aggregation.empty()) cfg.aggregation = parse_aggregation(o.aggregation);
  if (o.oracle.empty()) throw ConfigError("no oracle given (--oracle or 'oracle' in the config)");
  if (o.programs.empty()) throw ConfigError("no programs given (--program name=file)");

  auto oracle = make_oracle(o.oracle, o.dim);
  std::vector<NamedProgram> programs;
  for (const auto &spec : o.programs) {
    const auto eq = spec.find('=');
    std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    programs.push_back({name, load_program(path, o.tac)});
  }
  const auto examples = o.examples.empty()
                            ? make_example_pool(*oracle, cfg.n_examples, cfg.pool_scale, Rng::stream(cfg.seed, {8}))
                            : load_vectors(o.examples, oracle->dim());
  const auto res = benchmark(programs, *oracle, examples, cfg);
  save_bench(o.out, res, cfg);
  emit_reports(o.out);
  for (auto k : res.excluded) fmt::print(stderr, "example {} excluded: already adversarial\n", k);
  std::fputs(read_file((fs::path(o.out) / "summary.json").string()).c_str(), stdout);
  return ok;
}

struct AblationOpts {
  std::string config;
  std::size_t programs = 100000;
  std::size_t keep = 200;
  std::size_t examples = 5;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
};

int run_ablation_cmd(const AblationOpts &o) {
  SearchConfig cfg;
  if (!o.config.empty()) {
    auto kv = KeyValues::load(o.config);
    cfg = search_config(kv);
    kv.reject_unused();
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  auto oracle = make_oracle(cfg.oracle, cfg.dim);
  const auto res = run_ablation(cfg, *oracle, o.programs, o.keep, o.examples);
  nlohmann::json j = nlohmann::json::array();
  for (const auto &r : res) {
    j.push_back({{"subset", r.name},
                 {"best", r.best()},
                 {"generated", r.counters.generated},
                 {"evaluated", r.counters.evaluated},
                 {"top", r.top}});
    fmt::print("{:<16} best {:.6f}  generated {}\n", r.name, r.best(), r.counters.generated);
  }
  if (!o.out.empty()) write_file(o.out, j.dump(2) + "\n");
  return ok;
}

}

int main(int argc, char **argv) {
  CLI::App app{"Random search for decision-based attack programs"};
  app.require_subcommand(1);

  GenOpts gen;
  auto *g = app.add_subcommand("gen", "Generate random SSA programs");
  g->add_option("--seed", gen.seed);
  g->add_option("-n,--count", gen.count)->check(CLI::PositiveNumber);
  g->add_option("--max-len", gen.gen.max_len);
  g->add_option("--hyperparams", gen.gen.n_hyperparams);
  g->add_option("--init", gen.gen.hyperparam_init);
  g->add_option("--bias", gen.gen.unused_bias, "weight of not-yet-used values");
  g->add_flag("--no-predefined", gen.no_predefined);
  g->add_flag("--filter", gen.filter, "emit only programs passing both filters");
  g->add_option("-o,--out", gen.out);

  std::string check_file;
  bool check_optional_hyper = false;
  std::size_t check_max_len = 20;
  auto *c = app.add_subcommand("check", "Validate programs and run the inputs check and distance test");
  c->add_option("file", check_file)->required();
  c->add_flag("--allow-unused-hyperparams", check_optional_hyper);
  c->add_option("--max-len", check_max_len);

  std::string compile_in, compile_out;
  auto *cc = app.add_subcommand("compile", "Compile an SSA program to TAC");
  cc->add_option("file", compile_in)->required();
  cc->add_option("-o,--out", compile_out);

  AttackOpts at;
  auto *a = app.add_subcommand("attack", "Run the random-walk attack once");
  a->add_option("--program", at.program)->required();
  a->add_flag("--tac", at.tac, "program file is TAC");
  a->add_option("--oracle", at.oracle)->required();
  a->add_option("--dim", at.dim);
  a->add_option("--budget", at.budget);
  a->add_option("--seed", at.seed);
  a->add_flag("--no-adapt", at.no_adapt);
  a->add_option("--epsilon", at.epsilon);
  a->add_option("--x0", at.x0_file, "file whose first vector is the example");
  a->add_option("--fallback", at.fallback_file, "file whose first vector is an adversarial point");
  a->add_option("--log", at.log, "run log destination (default stdout)");

  SearchOpts so;
  auto *s = app.add_subcommand("search", "Two-stage program search");
  s->add_option("--config", so.config);
  s->add_option("--out", so.out);
  s->add_option("--workers", so.workers);
  s->add_option("--seed", so.seed);
  s->add_option("--budget", so.budget);
  s->add_flag("--print-config", so.print_config, "print the effective config and exit");

  BenchOpts bo;
  auto *b = app.add_subcommand("bench", "Benchmark programs on a set of examples");
  b->add_option("--config", bo.config);
  b->add_option("--program", bo.programs, "name=file, repeatable");
  b->add_flag("--tac", bo.tac, "program files are TAC");
  b->add_option("--oracle", bo.oracle);
  b->add_option("--dim", bo.dim);
  b->add_option("--examples", bo.examples);
  b->add_option("--out", bo.out);
  b->add_option("--budget", bo.budget);
  b->add_option("--seed", bo.seed);
  b->add_option("--epsilon", bo.epsilon);
  b->add_option("--workers", bo.workers);
  b->add_option("--aggregation", bo.aggregation)->check(CLI::IsMember({"median", "mean"}));

  std::string report_dir, report_agg;
  auto *r = app.add_subcommand("report", "Regenerate curves and summary from saved run logs");
  r->add_option("dir", report_dir)->required();
  r->add_option("--aggregation", report_agg)->check(CLI::IsMember({"median", "mean"}));

  AblationOpts ab;
  auto *ablation = app.add_subcommand("ablation", "Best stage-1 ratios per technique subset");
  ablation->add_option("--config", ab.config);
  ablation->add_option("--programs", ab.programs);
  ablation->add_option("--keep", ab.keep);
  ablation->add_option("--examples", ab.examples);
  ablation->add_option("--seed", ab.seed);
  ablation->add_option("--workers", ab.workers);
  ablation->add_option("--out", ab.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? ok : invalid;
  }

  try {
    if (*g) return run_gen(gen);
    if (*c) return run_check(check_file, !check_optional_hyper, check_max_len);
    if (*cc) return run_compile(compile_in, compile_out);
    if (*a) return run_attack(at);
    if (*s) return run_search_cmd(so);
    if (*b) return run_bench(bo);
    if (*r) {
      emit_reports(report_dir, report_agg.empty() ? std::nullopt : std::optional(parse_aggregation(report_agg)));
      return ok;
    }
    if (*ablation) return run_ablation_cmd(ab);
  } catch (const ProgramError &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return invalid;
  } catch (const ConfigError &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return invalid;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return runtime;
  }
  return ok;
}
