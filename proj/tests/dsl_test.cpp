#include "autoda/error.hpp"
#include "autoda/generator.hpp"
#include "autoda/interpreter.hpp"
#include "autoda/program_text.hpp"
#include "autoda/reference.hpp"
#include "autoda/rng.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <set>

using namespace autoda;

namespace {

const char *sub_program = "param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = SUB(v1,v2)\nreturn v4\n";

double as_scalar(const Value &v) { return std::get<double>(v); }
const Vector &as_vector(const Value &v) { return std::get<Vector>(v); }

}

TEST(Ops, TableHasTenSignatures) {
  std::set<std::string_view> names;
  for (auto op : all_ops) names.insert(op_info(op).name);
  EXPECT_EQ(names.size(), 10u);
  for (auto op : {OpCode::add_ss, OpCode::sub_ss, OpCode::mul_ss, OpCode::div_ss, OpCode::dot_vv, OpCode::norm_v})
    EXPECT_EQ(op_info(op).result, Kind::scalar) << op_info(op).name;
  for (auto op : vector_result_ops) EXPECT_EQ(op_info(op).result, Kind::vector) << op_info(op).name;
  EXPECT_EQ(op_info(OpCode::norm_v).arity, 1u);
  EXPECT_EQ(op_info(OpCode::mul_vs).params[0], Kind::vector);
  EXPECT_EQ(op_info(OpCode::mul_vs).params[1], Kind::scalar);
}

TEST(Ops, WorkedExamples) {
  std::vector<Value> a{1.5, 2.5};
  EXPECT_EQ(as_scalar(eval_op(OpCode::add_ss, a)), 4.0);
  std::vector<Value> n{Vector{3.0, 4.0}};
  EXPECT_EQ(as_scalar(eval_op(OpCode::norm_v, n)), 5.0);
  std::vector<Value> d{Vector{1, 2, 3}, Vector{4, 5, 6}};
  EXPECT_EQ(as_scalar(eval_op(OpCode::dot_vv, d)), 32.0);
  std::vector<Value> q{Vector{2.0, 4.0}, 2.0};
  EXPECT_EQ(as_vector(eval_op(OpCode::div_vs, q)), (Vector{1.0, 2.0}));
}

TEST(Ops, DivisionFollowsIeee) {
  std::vector<Value> a{1.0, 0.0};
  EXPECT_EQ(as_scalar(eval_op(OpCode::div_ss, a)), INFINITY);
  std::vector<Value> z{0.0, 0.0};
  EXPECT_TRUE(std::isnan(as_scalar(eval_op(OpCode::div_ss, z))));
  std::vector<Value> v{Vector{-1.0, 0.0}, 0.0};
  const auto r = as_vector(eval_op(OpCode::div_vs, v));
  EXPECT_EQ(r[0], -INFINITY);
  EXPECT_TRUE(std::isnan(r[1]));
}

TEST(Ops, MismatchIsStructuralError) {
  std::vector<Value> kinds{Vector{1.0}, 2.0};
  EXPECT_THROW(eval_op(OpCode::add_vv, kinds), ProgramError);
  std::vector<Value> dims{Vector{1.0, 2.0}, Vector{1.0}};
  EXPECT_THROW(eval_op(OpCode::sub_vv, dims), ProgramError);
  std::vector<Value> arity{1.0};
  EXPECT_THROW(eval_op(OpCode::mul_ss, arity), ProgramError);
}

TEST(Interpreter, SubExample) {
  auto p = parse_program(sub_program);
  const Vector x0{1, 1}, x{0, 1}, n{0, 0};
  EXPECT_EQ(run_ssa(p, p.initial_hyper_values(), x0, x, n), (Vector{1, 0}));
}

TEST(Interpreter, PredefinedReturnsUnitDirection) {
  ProgramBuilder b(1, 0.01);
  emit_predefined(b);
  auto p = std::move(b).finish();
  EXPECT_EQ(run_ssa(p, p.initial_hyper_values(), Vector{2, 0}, Vector{0, 0}, Vector{0, 0}), (Vector{1, 0}));
}

TEST(Interpreter, PredefinedValues) {
  ProgramBuilder b(1, 0.01);
  const auto pd = emit_predefined(b);
  const auto &body = b.program().body;
  ASSERT_EQ(body.size(), 3u);
  EXPECT_EQ(body[0].op, OpCode::sub_vv);
  EXPECT_EQ(body[0].args[0], b.x0());
  EXPECT_EQ(body[0].args[1], b.x());
  EXPECT_EQ(body[1].op, OpCode::norm_v);
  EXPECT_EQ(body[1].args[0], pd.v);
  EXPECT_EQ(body[2].op, OpCode::div_vs);
  EXPECT_EQ(body[2].args[0], pd.v);
  EXPECT_EQ(body[2].args[1], pd.d);

  // v, d and u on x0=[0,3], x=[0,0].
  SsaProgram p = b.program();
  p.return_id = pd.v;
  p.body.resize(1);
  EXPECT_EQ(run_ssa(p, Vector{0.01}, Vector{0, 3}, Vector{0, 0}, Vector{0, 0}), (Vector{0, 3}));
  p = std::move(b).finish();
  EXPECT_EQ(run_ssa(p, Vector{0.01}, Vector{0, 3}, Vector{0, 0}, Vector{0, 0}), (Vector{0, 1}));
}

TEST(Interpreter, Purity) {
  const auto p = boundary_program();
  Rng rng(11);
  Vector x0(16), x(16), n(16);
  rng.gaussian(x0);
  rng.gaussian(x);
  rng.gaussian(n);
  SsaMachine m(16);
  const auto a = run_ssa(p, p.initial_hyper_values(), x0, x, n);
  auto view = m.run(p, p.initial_hyper_values(), x0, x, n);
  const Vector b(view.begin(), view.end());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i]), std::bit_cast<std::uint64_t>(b[i]));
}

TEST(Text, UntypedMnemonicsResolve) {
  auto p = parse_program(
      "param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = SUB(v1,v2)\ns5 = DOT(v4,v3)\nv6 = MUL(v4,s5)\nreturn v6\n");
  EXPECT_EQ(p.body[0].op, OpCode::sub_vv);
  EXPECT_EQ(p.body[1].op, OpCode::dot_vv);
  EXPECT_EQ(p.body[2].op, OpCode::mul_vs);
  auto typed = parse_program(
      "param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = SUB.VV(v1,v2)\ns5 = DOT.VV(v4,v3)\nv6 = MUL.VS(v4,s5)\nreturn v6\n");
  EXPECT_EQ(p, typed);
}

TEST(Text, KindMismatchNamesInstruction) {
  try {
    parse_program("param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = ADD(v1,s0)\nreturn v4\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("kind mismatch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("v4 = ADD(v1,s0)"), std::string::npos) << e.what();
  }
}

TEST(Text, UseBeforeDefinition) {
  try {
    parse_program("param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = SUB(v1,v5)\nv5 = SUB(v1,v2)\nreturn v5\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("before"), std::string::npos) << e.what();
  }
}

TEST(Text, SyntaxErrorsCarryLineNumbers) {
  auto line_of = [](const char *text) {
    try {
      parse_program(text);
    } catch (const ParseError &e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = SUB(v1 v2)\nreturn v4\n"), 5u);
  EXPECT_EQ(line_of("param s0 = abc\ninput v1\ninput v2\ninput v3\nv4 = SUB(v1,v2)\nreturn v4\n"), 1u);
  EXPECT_EQ(line_of("param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = FOO(v1,v2)\nreturn v4\n"), 5u);
  EXPECT_EQ(line_of("param s0 = 0.01\ninput v1\ninput v2\nv4 = SUB(v1,v2)\nreturn v4\n"), 4u);
  EXPECT_EQ(line_of("param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = SUB(v1,v2)\n"), 5u);
  EXPECT_EQ(line_of("param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = SUB(v1,v2)\ns5 = NORM(v4)\nreturn s5\n"), 7u);
}

TEST(Text, SsaRejectsRedefinitionTacAccepts) {
  const char *text = "param s0 = 0.01\ninput v1\ninput v2\ninput v3\nv1 = ADD(v1,v2)\nreturn v1\n";
  EXPECT_THROW(parse_program(text), ParseError);
  const auto tac = parse_tac(text);
  EXPECT_EQ(tac.body.size(), 1u);
  EXPECT_EQ(run_tac(tac, Vector{0.01}, Vector{1, 2}, Vector{3, 4}, Vector{0, 0}), (Vector{4, 6}));
}

TEST(Text, RoundTripGenerated) {
  GenConfig cfg;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    Rng rng = Rng::stream(5, {i});
    const auto p = gen_random(cfg, rng);
    const auto text = format_program(p);
    const auto q = parse_program(text);
    ASSERT_EQ(p, q) << text;
    ASSERT_EQ(format_program(q), text);
  }
}

TEST(Text, RoundTripBoundaryAndFixedMarker) {
  const auto text = boundary_program_text();
  const auto p = parse_program(text);
  EXPECT_FALSE(p.hyperparams[0].fixed);
  EXPECT_TRUE(p.hyperparams[1].fixed);
  EXPECT_TRUE(p.hyperparams[2].fixed);
  EXPECT_EQ(parse_program(format_program(p)), p);
  EXPECT_EQ(p.hyperparams[2].init, std::sqrt(1.0 + 0.01 * 0.01));
}

TEST(Text, FloatsRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 5e-324, 123456789.123456789, -0.0}) {
    SsaProgram p = parse_program(sub_program);
    p.hyperparams[0].init = v;
    const auto q = parse_program(format_program(p));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(q.hyperparams[0].init), std::bit_cast<std::uint64_t>(v));
  }
}

TEST(Text, MultipleProgramsWithSeparators) {
  const std::string two = std::string(sub_program) + "---\n" + boundary_program_text();
  const auto ps = parse_programs(two);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[1], boundary_program());
  EXPECT_EQ(parse_programs(format_programs(ps)), ps);
  try {
    parse_programs(std::string(sub_program) + "---\nparam s0 = 0.01\ninput v1\ninput v2\ninput v3\nv4 = ADD(v1,s0)\nreturn v4\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 12u);  // line numbers count from the top of the file
  }
}

TEST(Validate, RejectsBrokenPrograms) {
  auto p = parse_program(sub_program);
  auto q = p;
  q.return_id = q.inputs[0];
  EXPECT_THROW(q.validate(), ProgramError);
  q = p;
  q.body[0].args[1] = {9, Kind::vector};
  EXPECT_THROW(q.validate(), ProgramError);
  q = p;
  q.body[0].dest = {2, Kind::vector};
  EXPECT_THROW(q.validate(), ProgramError);
  EXPECT_THROW(p.validate(0), ProgramError);
  EXPECT_NO_THROW(p.validate(1));
}

TEST(Rng, PhiloxKnownAnswers) {
  // Reference vectors for Philox4x32-10.
  using B = std::array<std::uint32_t, 4>;
  EXPECT_EQ(Rng::philox({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Rng::philox({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Rng::philox({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  Rng a = Rng::stream(1, {2, 3}), b = Rng::stream(1, {2, 3}), c = Rng::stream(1, {2, 4});
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    seen.insert(x);
    seen.insert(z);
  }
  EXPECT_EQ(seen.size(), 200u);
}

TEST(Rng, SplitLeavesParentUntouched) {
  Rng a(7), b(7);
  (void)a.split(3)();
  EXPECT_EQ(a(), b());
  EXPECT_EQ(a.split(3)(), b.split(3)());
  EXPECT_NE(a.split(3)(), a.split(4)());
}

TEST(Rng, GaussianMoments) {
  Rng r(42);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = r.gaussian();
    s += g;
    s2 += g * g;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Rng, BelowIsInRangeAndCoversAll) {
  Rng r(9);
  std::array<int, 7> hits{};
  for (int i = 0; i < 7000; ++i) {
    const auto k = r.below(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}
