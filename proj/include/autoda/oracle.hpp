#ifndef AUTODA_ORACLE_HPP
#define AUTODA_ORACLE_HPP

#include "autoda/interpreter.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autoda {

enum class Decision : std::uint8_t { benign, adversarial };

/// Black-box label function for the untargeted setting. Immutable after
/// construction apart from the query counter, so one oracle may be shared by
/// concurrent attack runs.
class DecisionOracle {
 public:
  explicit DecisionOracle(std::size_t dim) : dim_(dim) {}
  virtual ~DecisionOracle() = default;

  DecisionOracle(const DecisionOracle &) = delete;
  DecisionOracle &operator=(const DecisionOracle &) = delete;

  std::size_t dim() const { return dim_; }

  /// One charged query.
  Decision query(std::span<const double> x) const;

  /// Label without charging a query. Only for benchmark setup (screening
  /// examples, picking fallbacks), never inside an attack.
  Decision decide_offline(std::span<const double> x) const;

  std::uint64_t queries() const { return queries_.load(std::memory_order_relaxed); }
  void reset_queries() { queries_.store(0, std::memory_order_relaxed); }

  /// Distance from a benign x0 to the closest adversarial point, when known
  /// in closed form.
  virtual std::optional<double> optimal_distance(std::span<const double> x0) const;

  /// Some adversarial point, when one can be constructed analytically.
  virtual std::optional<Vector> fallback(std::span<const double> x0) const;

  virtual std::string describe() const = 0;

 protected:
  virtual bool is_adversarial(std::span<const double> x) const = 0;

 private:
  void check_dim(std::span<const double> x) const;

  std::size_t dim_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

/// Adversarial iff w·x + b > 0.
class HalfspaceOracle final : public DecisionOracle {
 public:
  HalfspaceOracle(Vector w, double b);

  std::optional<double> optimal_distance(std::span<const double> x0) const override;
  std::optional<Vector> fallback(std::span<const double> x0) const override;
  std::string describe() const override;

  const Vector &normal() const { return w_; }
  double offset() const { return b_; }

 protected:
  bool is_adversarial(std::span<const double> x) const override;

 private:
  double score(std::span<const double> x) const;

  Vector w_;
  double b_;
  double norm_;
};

enum class Side : std::uint8_t { inside, outside };

/// Adversarial iff x lies strictly on `adversarial` side of the sphere.
class SphereOracle final : public DecisionOracle {
 public:
  SphereOracle(Vector center, double radius, Side adversarial);

  std::optional<double> optimal_distance(std::span<const double> x0) const override;
  std::optional<Vector> fallback(std::span<const double> x0) const override;
  std::string describe() const override;

 protected:
  bool is_adversarial(std::span<const double> x) const override;

 private:
  Vector center_;
  double radius_;
  Side side_;
};

/// Alternating affine maps and ReLU, argmax over the final scores.
/// Adversarial iff the predicted label differs from `benign_label`.
class MlpOracle final : public DecisionOracle {
 public:
  struct Layer {
    std::size_t rows = 0;  // outputs
    std::size_t cols = 0;  // inputs
    Vector weights;        // row-major rows x cols
    Vector bias;           // rows
  };

  MlpOracle(std::vector<Layer> layers, std::size_t benign_label);

  /// argmax of the class scores; ties go to the lowest index.
  std::size_t label(std::span<const double> x) const;
  std::string describe() const override;
  const std::vector<Layer> &layers() const { return layers_; }

 protected:
  bool is_adversarial(std::span<const double> x) const override;

 private:
  std::vector<Layer> layers_;
  std::size_t benign_;
};

/// Weight file: `layers: k`, then per layer `rows cols`, rows*cols row-major
/// weights and a bias row of `rows` values. Whitespace separated.
std::vector<MlpOracle::Layer> parse_mlp(std::string_view text);
std::string format_mlp(const std::vector<MlpOracle::Layer> &layers);
std::unique_ptr<MlpOracle> load_mlp(const std::string &path, std::size_t benign_label);

/// `halfspace:w=1,0;b=0` (or `axis=i` for a unit normal), `sphere:c=0,0;r=1;adv=outside`,
/// `mlp:path=FILE;benign=0`. A one-element list is broadcast to `dim`; with
/// dim 0 the dimension is taken from the spec.
std::unique_ptr<DecisionOracle> make_oracle(std::string_view spec, std::size_t dim = 0);

}

#endif //AUTODA_ORACLE_HPP
