#include "autoda/search.hpp"

#include "autoda/analysis.hpp"
#include "autoda/compiler.hpp"
#include "autoda/error.hpp"
#include "autoda/parallel.hpp"
#include "autoda/program_text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace autoda {

namespace {

// Top-level stream tags; every random draw of a search derives from
// (seed, tag, ...).
enum Stream : std::uint64_t {
  gen_stream = 1,
  pool_stream = 2,
  stage2_stream = 3,
  batch_stream = 4,
  ablation_stream = 5,
};

std::size_t resolve_workers(std::size_t w) { return w ? w : default_workers(); }

AttackConfig stage_config(const SearchConfig &cfg, std::uint64_t iters, bool adapt) {
  AttackConfig a;
  a.query_budget = iters;
  a.max_iterations = iters;
  a.adapt = adapt;
  a.controller = cfg.controller;
  a.start = cfg.start;
  return a;
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json counters_json(const FilterCounters &c) {
  return {{"generated", c.generated},
          {"failed_inputs", c.failed_inputs},
          {"failed_distance", c.failed_distance},
          {"evaluated", c.evaluated}};
}

}

std::vector<std::pair<std::string, Techniques>> ablation_ladder() {
  Techniques t{false, false, false, false};
  std::vector<std::pair<std::string, Techniques>> out;
  out.emplace_back("base", t);
  t.predefined = true;
  out.emplace_back("+predefined", t);
  t.inputs_check = true;
  out.emplace_back("+inputs_check", t);
  t.distance_test = true;
  out.emplace_back("+distance_test", t);
  t.compact = true;
  out.emplace_back("+compact", t);
  return out;
}

void SearchConfig::validate() const {
  check(batch_size >= 1, "batch_size must be at least 1");
  check(stage1_iters >= 1, "stage1_iters must be at least 1");
  check(stage2_iters > stage1_iters, "stage2_iters must exceed stage1_iters");
  check(n_stage2_examples >= 1, "n_stage2_examples must be at least 1");
  check(dim >= 1, "dim must be at least 1");
  check(distance_cases >= 1 && distance_dim >= 1, "distance test needs at least one case of dimension >= 1");
  check(pool_size >= n_stage2_examples, "pool_size must be at least n_stage2_examples");
  check(pool_scale > 0.0, "pool_scale must be positive");
  check(chunk >= 1, "chunk must be at least 1");
  check(start.noise_scale > 0.0, "start noise scale must be positive");
  effective_gen().validate();
  controller.validate();
}

GenConfig SearchConfig::effective_gen() const {
  GenConfig g = gen;
  g.seed = seed;
  g.predefined = techniques.predefined;
  if (!techniques.compact) g.unused_bias = 1.0;
  return g;
}

CandidateStream::CandidateStream(const SearchConfig &cfg, std::size_t workers)
    : gen_(cfg.effective_gen()),
      tech_(cfg.techniques),
      require_hyper_(cfg.require_hyperparams),
      seed_(cfg.seed),
      workers_(resolve_workers(workers)),
      chunk_(cfg.chunk),
      dtest_(cfg.distance_cases, cfg.distance_dim) {}

void CandidateStream::refill() {
  base_ += buf_.size();
  buf_.assign(chunk_, {});
  pos_ = 0;
  const std::size_t per = (chunk_ + workers_ - 1) / workers_;
  parallel_for(workers_, workers_, [&](std::size_t w) {
    SsaMachine machine(dtest_.dim());
    const std::size_t end = std::min(chunk_, (w + 1) * per);
    for (std::size_t j = w * per; j < end; ++j) {
      Slot &s = buf_[j];
      const std::uint64_t index = base_ + j;
      Rng rng = Rng::stream(seed_, {gen_stream, index});
      SsaProgram p = gen_random(gen_, rng);
      if (tech_.inputs_check && !inputs_check(p, require_hyper_).pass) {
        s.outcome = Outcome::failed_inputs;
        continue;
      }
      // SSA and TAC execution agree bitwise, so only survivors get compiled.
      if (tech_.distance_test && !dtest_(p, machine)) {
        s.outcome = Outcome::failed_distance;
        continue;
      }
      s.outcome = Outcome::survived;
      TacProgram tac = compile(p);
      s.cand = {index, std::move(p), std::move(tac)};
    }
  });
}

Candidate CandidateStream::next() {
  for (;;) {
    if (pos_ == buf_.size()) refill();
    Slot &s = buf_[pos_++];
    ++counters_.generated;
    switch (s.outcome) {
      case Outcome::failed_inputs: ++counters_.failed_inputs; break;
      case Outcome::failed_distance: ++counters_.failed_distance; break;
      case Outcome::survived: ++counters_.evaluated; return std::move(s.cand);
    }
  }
}

std::vector<Vector> make_example_pool(const DecisionOracle &oracle, std::size_t n, double scale, Rng rng) {
  std::vector<Vector> pool;
  const std::size_t dim = oracle.dim();
  const std::size_t max_draws = 1000 * std::max<std::size_t>(n, 1);
  Vector x(dim);
  for (std::size_t draws = 0; pool.size() < n; ++draws) {
    if (draws == max_draws) throw Error("could not draw enough benign examples for the pool");
    rng.gaussian(x);
    for (auto &v : x) v *= scale;
    if (oracle.decide_offline(x) == Decision::benign) pool.push_back(x);
  }
  return pool;
}

Vector fallback_for(const DecisionOracle &oracle, std::span<const double> x0, Rng rng) {
  if (auto f = oracle.fallback(x0)) return *f;
  // Widening Gaussian shells around x0.
  Vector x(x0.size());
  for (int level = 0; level < 20; ++level) {
    const double scale = std::ldexp(1.0, level);
    for (int t = 0; t < 100; ++t) {
      rng.gaussian(x);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + scale * x[i];
      if (oracle.decide_offline(x) == Decision::adversarial) return x;
    }
  }
  throw Error("no adversarial fallback found for example");
}

std::optional<Stage2Set> prepare_stage2(const SearchConfig &cfg, const DecisionOracle &oracle,
                                        const std::vector<Vector> &pool, std::uint64_t query_cap) {
  Stage2Set set;
  for (std::size_t j = 0; j < cfg.n_stage2_examples; ++j) {
    const Vector &x0 = pool[j];
    Vector fb = fallback_for(oracle, x0, Rng::stream(cfg.seed, {stage2_stream, j, 0}));
    Rng rng = Rng::stream(cfg.seed, {stage2_stream, j, 1});
    auto start = find_start(oracle, x0, fb, rng, cfg.start, query_cap - set.start_queries);
    if (!start) return std::nullopt;
    set.start_queries += start->queries;
    start->queries = 0;  // charged once here, not per evaluated program
    set.examples.push_back(x0);
    set.starts.push_back(std::move(*start));
  }
  return set;
}

Stage1Result stage1_batch(const std::vector<TacProgram> &programs, const DecisionOracle &oracle,
                          std::span<const double> x0, const StartPoint &start, const Rng &noise,
                          const SearchConfig &cfg, std::size_t workers) {
  const AttackConfig acfg = stage_config(cfg, cfg.stage1_iters, false);
  std::vector<RunLog> logs(programs.size());
  parallel_for(programs.size(), resolve_workers(workers), [&](std::size_t i) {
    Rng rng = noise;
    logs[i] = attack(programs[i], oracle, x0, start, acfg, rng);
  });
  Stage1Result r;
  for (const auto &log : logs) {
    if (!log.error.empty()) throw OracleError(log.error);
    r.queries += log.queries - log.start_queries;
    r.ratios.push_back(distortion_ratio(log));
  }
  return r;
}

Stage2Result stage2_eval(const TacProgram &program, const DecisionOracle &oracle, const Stage2Set &set,
                         const SearchConfig &cfg, std::size_t workers) {
  const AttackConfig acfg = stage_config(cfg, cfg.stage2_iters, cfg.stage2_adapt);
  std::vector<RunLog> logs(set.examples.size());
  parallel_for(logs.size(), resolve_workers(workers), [&](std::size_t j) {
    Rng rng = Rng::stream(cfg.seed, {stage2_stream, j, 2});
    logs[j] = attack(program, oracle, set.examples[j], set.starts[j], acfg, rng);
  });
  Stage2Result r;
  for (const auto &log : logs) {
    if (!log.error.empty()) throw OracleError(log.error);
    r.queries += log.queries - log.start_queries;
    r.ratios.push_back(distortion_ratio(log));
  }
  r.mean_ratio = std::accumulate(r.ratios.begin(), r.ratios.end(), 0.0) / static_cast<double>(r.ratios.size());
  return r;
}

std::vector<Vector> search_example_pool(const SearchConfig &cfg, const DecisionOracle &oracle) {
  return make_example_pool(oracle, cfg.pool_size, cfg.pool_scale, Rng::stream(cfg.seed, {pool_stream}));
}

SearchResult run_search(const SearchConfig &cfg, const std::function<void(const SearchRecord &)> &on_record) {
  auto oracle = make_oracle(cfg.oracle, cfg.dim);
  return run_search(cfg, *oracle, on_record);
}

SearchResult run_search(const SearchConfig &cfg, const DecisionOracle &oracle,
                        const std::function<void(const SearchRecord &)> &on_record) {
  cfg.validate();
  check(oracle.dim() == cfg.dim, "oracle dimension does not match search dim");
  const std::size_t workers = resolve_workers(cfg.workers);
  const std::uint64_t budget = cfg.query_budget;
  const std::uint64_t stage1_worst = cfg.batch_size * cfg.stage1_iters + cfg.start.max_tries + 1;
  const std::uint64_t stage2_worst = cfg.n_stage2_examples * cfg.stage2_iters;

  SearchResult res;
  CandidateStream stream(cfg, workers);
  const auto pool = search_example_pool(cfg, oracle);

  try {
    auto s2 = prepare_stage2(cfg, oracle, pool, budget);
    if (!s2) {
      res.queries = res.start_queries = budget;
    } else {
      res.queries = res.start_queries = s2->start_queries;
      for (std::uint64_t b = 0; budget - res.queries >= stage1_worst; ++b) {
        std::vector<Candidate> batch;
        batch.reserve(cfg.batch_size);
        while (batch.size() < cfg.batch_size) batch.push_back(stream.next());

        Rng brng = Rng::stream(cfg.seed, {batch_stream, b});
        const Vector &x0 = pool[brng.below(pool.size())];
        const Vector fb = fallback_for(oracle, x0, brng.split(1));
        Rng srng = brng.split(2);
        auto start = find_start(oracle, x0, fb, srng, cfg.start, budget - res.queries);
        res.batches = b + 1;
        if (!start) {
          res.queries = budget;
          break;
        }
        res.queries += start->queries;
        res.start_queries += start->queries;
        start->queries = 0;

        std::vector<TacProgram> tacs;
        tacs.reserve(batch.size());
        for (const auto &c : batch) tacs.push_back(c.tac);
        const auto s1 = stage1_batch(tacs, oracle, x0, *start, brng.split(3), cfg, workers);
        res.queries += s1.queries;
        const std::size_t w =
            static_cast<std::size_t>(std::min_element(s1.ratios.begin(), s1.ratios.end()) - s1.ratios.begin());

        if (budget - res.queries < stage2_worst) break;
        const auto s2r = stage2_eval(batch[w].tac, oracle, *s2, cfg, workers);
        res.queries += s2r.queries;

        SearchRecord rec;
        rec.batch = b;
        rec.candidate = batch[w].index;
        rec.program = format_program(batch[w].program);
        rec.stage1_ratio = s1.ratios[w];
        rec.stage2_ratio = s2r.mean_ratio;
        rec.stage2_ratios = s2r.ratios;
        rec.queries_at = res.queries;
        rec.counters = stream.counters();
        if (on_record) on_record(rec);
        res.ranked.push_back(std::move(rec));
      }
    }
  } catch (const OracleError &e) {
    res.error = e.what();
  }
  res.counters = stream.counters();
  std::stable_sort(res.ranked.begin(), res.ranked.end(),
                   [](const SearchRecord &a, const SearchRecord &b) { return a.stage2_ratio < b.stage2_ratio; });
  return res;
}

std::string format_record(const SearchRecord &r) {
  nlohmann::json j = {
      {"batch", r.batch},
      {"candidate", r.candidate},
      {"stage1_ratio", number(r.stage1_ratio)},
      {"stage2_ratio", number(r.stage2_ratio)},
      {"stage2_ratios", nlohmann::json::array()},
      {"inputs_check", "pass"},
      {"distance_test", "pass"},
      {"queries_at", r.queries_at},
      {"counters", counters_json(r.counters)},
      {"program", r.program},
  };
  for (double v : r.stage2_ratios) j["stage2_ratios"].push_back(number(v));
  return j.dump();
}

std::string format_stats(const SearchResult &r, const SearchConfig &cfg) {
  const auto &c = r.counters;
  auto frac = [&](std::uint64_t k) {
    return c.generated ? static_cast<double>(k) / static_cast<double>(c.generated) : 0.0;
  };
  nlohmann::json j = {
      {"counters", counters_json(c)},
      {"fractions",
       {{"failed_inputs", frac(c.failed_inputs)},
        {"failed_distance", frac(c.failed_distance)},
        {"survived", frac(c.evaluated)}}},
      {"query_budget", cfg.query_budget},
      {"queries", r.queries},
      {"start_queries", r.start_queries},
      {"batches", r.batches},
      {"records", r.ranked.size()},
      {"best_stage2_ratio", r.ranked.empty() ? nlohmann::json(nullptr) : number(r.ranked.front().stage2_ratio)},
      {"seed", cfg.seed},
  };
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump(2) + "\n";
}

std::vector<AblationResult> run_ablation(const SearchConfig &cfg, const DecisionOracle &oracle,
                                         std::size_t n_programs, std::size_t keep, std::size_t n_examples) {
  cfg.validate();
  check(n_examples >= 1, "ablation needs at least one example");
  const std::size_t workers = resolve_workers(cfg.workers);
  const auto pool =
      make_example_pool(oracle, n_examples, cfg.pool_scale, Rng::stream(cfg.seed, {ablation_stream, 0}));
  std::vector<StartPoint> starts;
  std::vector<Rng> noise;
  for (std::size_t e = 0; e < n_examples; ++e) {
    const Vector fb = fallback_for(oracle, pool[e], Rng::stream(cfg.seed, {ablation_stream, 1, e}));
    Rng srng = Rng::stream(cfg.seed, {ablation_stream, 2, e});
    auto start = find_start(oracle, pool[e], fb, srng, cfg.start);
    start->queries = 0;
    starts.push_back(std::move(*start));
    noise.push_back(Rng::stream(cfg.seed, {ablation_stream, 3, e}));
  }

  std::vector<AblationResult> out;
  for (const auto &[name, tech] : ablation_ladder()) {
    SearchConfig c = cfg;
    c.techniques = tech;
    CandidateStream stream(c, workers);
    AblationResult r{name, tech, {}, {}};
    std::vector<TacProgram> batch;
    std::vector<double> mean;
    for (std::size_t done = 0; done < n_programs;) {
      const std::size_t m = std::min(n_programs - done, cfg.chunk);
      batch.clear();
      for (std::size_t i = 0; i < m; ++i) batch.push_back(stream.next().tac);
      mean.assign(m, 0.0);
      for (std::size_t e = 0; e < n_examples; ++e) {
        const auto s1 = stage1_batch(batch, oracle, pool[e], starts[e], noise[e], c, workers);
        for (std::size_t i = 0; i < m; ++i) mean[i] += s1.ratios[i];
      }
      for (auto &v : mean) v /= static_cast<double>(n_examples);
      r.top.insert(r.top.end(), mean.begin(), mean.end());
      std::sort(r.top.begin(), r.top.end());
      if (r.top.size() > keep) r.top.resize(keep);
      done += m;
    }
    r.counters = stream.counters();
    out.push_back(std::move(r));
  }
  return out;
}

}
