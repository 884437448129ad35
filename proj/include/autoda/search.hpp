#ifndef AUTODA_SEARCH_HPP
#define AUTODA_SEARCH_HPP

#include "autoda/attack.hpp"
#include "autoda/controller.hpp"
#include "autoda/dsl.hpp"
#include "autoda/generator.hpp"
#include "autoda/oracle.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace autoda {

/// The four pruning techniques. Turning all of them off gives plain random
/// sampling of valid programs.
struct Techniques {
  bool predefined = true;
  bool inputs_check = true;
  bool distance_test = true;
  bool compact = true;  // unused_bias from GenConfig; 1 when off

  friend bool operator==(const Techniques &, const Techniques &) = default;
};

/// Ablation ladder: base, +predefined, +inputs_check, +distance_test, +compact.
std::vector<std::pair<std::string, Techniques>> ablation_ladder();

struct SearchConfig {
  std::size_t batch_size = 150;
  std::uint64_t stage1_iters = 100;
  std::uint64_t stage2_iters = 10000;
  std::size_t n_stage2_examples = 10;
  std::uint64_t query_budget = 5'000'000;
  GenConfig gen;
  ControllerConfig controller;
  StartConfig start;
  std::string oracle = "halfspace:axis=0;b=0";
  std::size_t dim = 16;
  std::size_t workers = 0;  // 0: hardware concurrency
  std::uint64_t seed = 0;
  Techniques techniques;
  bool require_hyperparams = true;  // inputs check also demands live hyperparameters
  bool stage2_adapt = true;
  std::size_t distance_cases = 10;
  std::size_t distance_dim = 32;
  std::size_t pool_size = 100;  // synthetic benign examples
  double pool_scale = 1.0;      // std-dev of the example pool
  std::size_t chunk = 2048;     // candidates generated per parallel round
  std::size_t top_k = 10;

  void validate() const;
  /// GenConfig with the technique switches applied.
  GenConfig effective_gen() const;
};

struct FilterCounters {
  std::uint64_t generated = 0;
  std::uint64_t failed_inputs = 0;
  std::uint64_t failed_distance = 0;
  std::uint64_t evaluated = 0;

  friend bool operator==(const FilterCounters &, const FilterCounters &) = default;
};

/// A program that passed the enabled filters.
struct Candidate {
  std::uint64_t index = 0;  // position in the generation sequence
  SsaProgram program;
  TacProgram tac;
};

/// Generates and filters programs in index order. Candidate i depends only
/// on (seed, i), and counters cover exactly the candidates handed out so
/// far plus the failures before them, so results do not depend on the
/// number of workers.
class CandidateStream {
 public:
  CandidateStream(const SearchConfig &cfg, std::size_t workers);

  Candidate next();
  const FilterCounters &counters() const { return counters_; }

 private:
  enum class Outcome : std::uint8_t { failed_inputs, failed_distance, survived };
  struct Slot {
    Outcome outcome = Outcome::survived;
    Candidate cand;
  };

  void refill();

  GenConfig gen_;
  Techniques tech_;
  bool require_hyper_;
  std::uint64_t seed_;
  std::size_t workers_;
  std::size_t chunk_;
  DistanceTest dtest_;
  std::vector<Slot> buf_;
  std::size_t pos_ = 0;
  std::uint64_t base_ = 0;
  FilterCounters counters_;
};

/// Synthetic benign examples: Gaussian points screened with uncharged
/// oracle decisions.
std::vector<Vector> make_example_pool(const DecisionOracle &oracle, std::size_t n, double scale, Rng rng);

/// The example pool run_search draws from for `cfg`.
std::vector<Vector> search_example_pool(const SearchConfig &cfg, const DecisionOracle &oracle);

/// Adversarial point for `x0`: the oracle's analytic fallback, or a random
/// search with uncharged decisions. Throws Error when nothing is found.
Vector fallback_for(const DecisionOracle &oracle, std::span<const double> x0, Rng rng);

/// Examples, fallbacks and starting points fixed for a whole search so
/// stage-2 scores are comparable.
struct Stage2Set {
  std::vector<Vector> examples;
  std::vector<StartPoint> starts;
  std::uint64_t start_queries = 0;
};

/// Draws the stage-2 examples and their starting points; charged queries
/// are reported in start_queries. Empty when `query_cap` runs out.
std::optional<Stage2Set> prepare_stage2(const SearchConfig &cfg, const DecisionOracle &oracle,
                                        const std::vector<Vector> &pool, std::uint64_t query_cap);

struct Stage1Result {
  std::vector<double> ratios;
  std::uint64_t queries = 0;
};

/// Runs every program from one shared start, adaptation off, each with a
/// copy of the same noise stream.
Stage1Result stage1_batch(const std::vector<TacProgram> &programs, const DecisionOracle &oracle,
                          std::span<const double> x0, const StartPoint &start, const Rng &noise,
                          const SearchConfig &cfg, std::size_t workers);

struct Stage2Result {
  double mean_ratio = 0.0;
  std::vector<double> ratios;
  std::uint64_t queries = 0;
};

Stage2Result stage2_eval(const TacProgram &program, const DecisionOracle &oracle, const Stage2Set &set,
                         const SearchConfig &cfg, std::size_t workers);

struct SearchRecord {
  std::uint64_t batch = 0;
  std::uint64_t candidate = 0;  // generation index of the winner
  std::string program;
  double stage1_ratio = 0.0;
  double stage2_ratio = 0.0;
  std::vector<double> stage2_ratios;
  std::uint64_t queries_at = 0;  // cumulative oracle queries when recorded
  FilterCounters counters;       // snapshot when recorded
};

struct SearchResult {
  std::vector<SearchRecord> ranked;  // stage-2 ratio ascending
  FilterCounters counters;
  std::uint64_t queries = 0;
  std::uint64_t batches = 0;
  std::uint64_t start_queries = 0;
  std::string error;  // set when an oracle failure aborted the search
};

/// Two-stage batched search. `on_record` sees every batch winner as soon as
/// its stage-2 score is known.
SearchResult run_search(const SearchConfig &cfg,
                        const std::function<void(const SearchRecord &)> &on_record = {});
SearchResult run_search(const SearchConfig &cfg, const DecisionOracle &oracle,
                        const std::function<void(const SearchRecord &)> &on_record = {});

std::string format_record(const SearchRecord &r);
std::string format_stats(const SearchResult &r, const SearchConfig &cfg);

struct AblationResult {
  std::string name;
  Techniques techniques;
  FilterCounters counters;
  std::vector<double> top;  // best stage-1 ratios, ascending
  double best() const { return top.empty() ? 1.0 : top.front(); }
};

/// Evaluates `n_programs` filtered programs per technique subset with
/// stage-1 settings on `n_examples` fixed examples (shared starts and noise
/// streams) and keeps the `keep` best mean ratios. No query budget applies.
std::vector<AblationResult> run_ablation(const SearchConfig &cfg, const DecisionOracle &oracle,
                                         std::size_t n_programs, std::size_t keep = 200,
                                         std::size_t n_examples = 5);

}

#endif //AUTODA_SEARCH_HPP
