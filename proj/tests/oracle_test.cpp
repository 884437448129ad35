#include "autoda/error.hpp"
#include "autoda/oracle.hpp"
#include "autoda/rng.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

using namespace autoda;

TEST(Oracle, HalfspaceDecisions) {
  HalfspaceOracle o({1, 0}, 0.0);
  const Vector in{0.5, 0}, out{-0.5, 3}, on{0, 1};
  EXPECT_EQ(o.query(in), Decision::adversarial);
  EXPECT_EQ(o.query(out), Decision::benign);
  EXPECT_EQ(o.query(on), Decision::benign);  // strict inequality
  EXPECT_EQ(o.queries(), 3u);
  EXPECT_EQ(o.decide_offline(in), Decision::adversarial);
  EXPECT_EQ(o.queries(), 3u);
}

TEST(Oracle, SphereDecisions) {
  SphereOracle outside({0, 0}, 1.0, Side::outside);
  EXPECT_EQ(outside.query(Vector{0.5, 0}), Decision::benign);
  EXPECT_EQ(outside.query(Vector{2, 0}), Decision::adversarial);
  SphereOracle inside({0, 0}, 1.0, Side::inside);
  EXPECT_EQ(inside.query(Vector{0.5, 0}), Decision::adversarial);
  EXPECT_EQ(inside.query(Vector{1, 0}), Decision::benign);
}

TEST(Oracle, OptimalDistances) {
  HalfspaceOracle h({1, 0}, 0.0);
  EXPECT_DOUBLE_EQ(*h.optimal_distance(Vector{-1, 0}), 1.0);
  HalfspaceOracle scaled({3, 4}, -5.0);
  EXPECT_DOUBLE_EQ(*scaled.optimal_distance(Vector{0, 0}), 1.0);
  SphereOracle s({0, 0}, 3.0, Side::outside);
  EXPECT_DOUBLE_EQ(*s.optimal_distance(Vector{1, 0}), 2.0);
}

TEST(Oracle, FallbacksAreAdversarial) {
  Rng rng(4);
  HalfspaceOracle h({1, -2, 0.5}, 0.3);
  SphereOracle out({1, 1, 1}, 2.0, Side::outside), in({0, 0, 0}, 0.5, Side::inside);
  for (int i = 0; i < 1000; ++i) {
    Vector x0(3);
    rng.gaussian(x0);
    for (const DecisionOracle *o : {static_cast<const DecisionOracle *>(&h), static_cast<const DecisionOracle *>(&out),
                                    static_cast<const DecisionOracle *>(&in)}) {
      if (o->decide_offline(x0) == Decision::adversarial) continue;
      const auto fb = o->fallback(x0);
      ASSERT_TRUE(fb);
      ASSERT_EQ(o->decide_offline(*fb), Decision::adversarial) << o->describe();
    }
  }
}

TEST(Oracle, MlpAgreesWithHalfspace) {
  // Class 1 scores w·x + b and class 0 scores 0, so the label flips exactly
  // where the halfspace does.
  const Vector w{0.7, -1.3, 2.0};
  const double b = 0.4;
  const auto layers = parse_mlp("layers: 1\n2 3\n0 0 0\n0.7 -1.3 2.0\n0 0.4\n");
  MlpOracle mlp(layers, 0);
  HalfspaceOracle h(w, b);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    Vector x(3);
    rng.gaussian(x);
    ASSERT_EQ(mlp.query(x), h.query(x));
  }
}

TEST(Oracle, MlpHiddenLayerAndArgmax) {
  // Identity weights: the label is the argmax of the input itself.
  const auto layers = parse_mlp("layers: 2\n3 3\n1 0 0 0 1 0 0 0 1\n0 0 0\n3 3\n1 0 0 0 1 0 0 0 1\n0 0 0\n");
  MlpOracle mlp(layers, 1);
  EXPECT_EQ(mlp.label(Vector{0.1, 0.9, 0.3}), 1u);
  EXPECT_EQ(mlp.label(Vector{2, 0.9, 0.3}), 0u);
  EXPECT_EQ(mlp.label(Vector{0.5, 0.5, 0.1}), 0u);  // tie goes to the lower index
  EXPECT_EQ(mlp.label(Vector{-1, -2, -3}), 0u);     // ReLU zeros all scores
  EXPECT_EQ(mlp.query(Vector{0.1, 0.9, 0.3}), Decision::benign);
  EXPECT_EQ(mlp.query(Vector{0.1, 0.2, 0.3}), Decision::adversarial);
  EXPECT_EQ(parse_mlp(format_mlp(layers)).size(), 2u);
  EXPECT_EQ(parse_mlp(format_mlp(layers))[1].weights, layers[1].weights);
}

TEST(Oracle, MlpFileErrors) {
  const std::string good = "layers: 1\n2 2\n1 0 0 1\n0 0\n";
  EXPECT_NO_THROW(parse_mlp(good));
  try {
    parse_mlp("layers: 1\n2 2\n1 0 0");
    FAIL();
  } catch (const OracleError &e) {
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos) << e.what();
  }
  try {
    parse_mlp("layers: 1\n2 2\n1 0 x 1\n0 0\n");
    FAIL();
  } catch (const OracleError &e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 18"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_mlp(good + "7\n"), OracleError);
  EXPECT_THROW(parse_mlp("layers: 2\n2 2\n1 0 0 1\n0 0\n3 3\n1 0 0 0 1 0 0 0 1\n0 0 0\n"), OracleError);
  EXPECT_THROW(MlpOracle(parse_mlp(good), 2), OracleError);
}

TEST(Oracle, LoadMlpFromFile) {
  const auto path = (std::filesystem::temp_directory_path() / "autoda_oracle_test.mlp").string();
  std::ofstream(path) << "layers: 1\n2 2\n1 0 0 1\n0 0\n";
  auto o = make_oracle("mlp:path=" + path + ";benign=0");
  EXPECT_EQ(o->dim(), 2u);
  EXPECT_EQ(o->query(Vector{1, 0.5}), Decision::benign);
  EXPECT_EQ(o->query(Vector{0.5, 1}), Decision::adversarial);
  std::filesystem::remove(path);
  EXPECT_THROW(make_oracle("mlp:path=" + path), Error);
}

TEST(Oracle, CounterIsThreadSafe) {
  HalfspaceOracle o({1, 0}, 0.0);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      const Vector x{0.1, 0.2};
      for (int i = 0; i < 25000; ++i) (void)o.query(x);
    });
  threads.clear();
  EXPECT_EQ(o.queries(), 100000u);
  o.reset_queries();
  EXPECT_EQ(o.queries(), 0u);
}

TEST(Oracle, DimensionMismatch) {
  HalfspaceOracle o({1, 0}, 0.0);
  EXPECT_THROW((void)o.query(Vector{1, 2, 3}), OracleError);
}

TEST(Oracle, SpecStrings) {
  auto h = make_oracle("halfspace:w=1,0;b=0");
  EXPECT_EQ(h->dim(), 2u);
  auto axis = make_oracle("halfspace:axis=2;b=-1", 4);
  EXPECT_EQ(axis->dim(), 4u);
  EXPECT_EQ(axis->query(Vector{0, 0, 2, 0}), Decision::adversarial);
  auto bcast = make_oracle("sphere:c=0;r=2;adv=outside", 5);
  EXPECT_EQ(bcast->dim(), 5u);
  EXPECT_DOUBLE_EQ(*bcast->optimal_distance(Vector(5, 0.0)), 2.0);
  EXPECT_THROW(make_oracle("cube:r=1", 2), ConfigError);
  EXPECT_THROW(make_oracle("halfspace:w=1,0;b=0;q=1"), ConfigError);
  EXPECT_THROW(make_oracle("halfspace:w=1,0", 3), ConfigError);
  EXPECT_THROW(make_oracle("halfspace:axis=0"), ConfigError);
  EXPECT_THROW(make_oracle("sphere:c=0,0;r=x"), ConfigError);
  EXPECT_THROW(make_oracle("sphere:c=0,0;r=1;adv=left"), ConfigError);
  EXPECT_THROW(make_oracle("halfspace:w=0,0;b=0"), OracleError);
}
