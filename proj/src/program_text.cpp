#include "autoda/program_text.hpp"

#include "autoda/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace autoda {

namespace {

struct Ref {
  std::uint32_t index;
  Kind kind;
};

enum class LineKind { param, input, instr, ret };

struct Line {
  std::size_t number;
  LineKind kind;
  Ref dest{};
  double value = 0.0;
  bool fixed = false;
  std::string mnemonic;
  std::vector<Ref> args;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t number) : s_(text), number_(number) {}

  [[noreturn]] void fail(const std::string &what) const { throw ParseError(number_, what); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ == s_.size();
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }

  std::string_view word() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '_'))
      ++pos_;
    return s_.substr(start, pos_ - start);
  }

  Ref ref() {
    auto w = word();
    if (w.size() < 2 || (w[0] != 's' && w[0] != 'v')) fail("expected a value id like s0 or v1, got '" + std::string(w) + "'");
    std::uint32_t idx = 0;
    auto [p, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), idx);
    if (ec != std::errc() || p != w.data() + w.size()) fail("malformed value id '" + std::string(w) + "'");
    return {idx, w[0] == 's' ? Kind::scalar : Kind::vector};
  }

  double number() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    auto tok = s_.substr(start, pos_ - start);
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("malformed number '" + std::string(tok) + "'");
    return v;
  }

 private:
  std::string_view s_;
  std::size_t number_;
  std::size_t pos_ = 0;
};

std::vector<Line> lex(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;

    LineParser lp(raw, number);
    Line line;
    line.number = number;
    line.kind = LineKind::instr;
    auto first = lp.word();
    if (first == "param") {
      line.kind = LineKind::param;
      line.dest = lp.ref();
      lp.expect('=');
      line.value = lp.number();
      if (!lp.at_end()) {
        if (lp.word() != "fixed") lp.fail("unexpected text after param value");
        line.fixed = true;
      }
    } else if (first == "input") {
      line.kind = LineKind::input;
      line.dest = lp.ref();
    } else if (first == "return") {
      line.kind = LineKind::ret;
      line.dest = lp.ref();
    } else {
      LineParser again(raw, number);
      line.dest = again.ref();
      again.expect('=');
      line.mnemonic = std::string(again.word());
      if (line.mnemonic.empty()) again.fail("expected an operation mnemonic");
      again.expect('(');
      line.args.push_back(again.ref());
      while (again.accept(',')) line.args.push_back(again.ref());
      again.expect(')');
      if (!again.at_end()) again.fail("unexpected text after instruction");
      lp = again;
    }
    if (!lp.at_end()) lp.fail("unexpected trailing text");
    out.push_back(std::move(line));
  }
  return out;
}

std::string ref_name(Ref r) { return fmt::format("{}{}", kind_prefix(r.kind), r.index); }

// Shared walk over the header/body/return structure. `define` and `use` are
// called in program order so SSA and TAC can apply their own scoping rules.
template <class OnParam, class OnInput, class OnInstr, class OnReturn>
void walk(const std::vector<Line> &lines, OnParam on_param, OnInput on_input, OnInstr on_instr,
          OnReturn on_return) {
  enum { params, inputs, body, done } stage = params;
  std::size_t n_inputs = 0;
  for (const auto &line : lines) {
    switch (line.kind) {
      case LineKind::param:
        if (stage != params) throw ParseError(line.number, "param lines must come first");
        if (line.dest.kind != Kind::scalar) throw ParseError(line.number, "hyperparameters must be scalars");
        on_param(line);
        break;
      case LineKind::input:
        if (stage > inputs) throw ParseError(line.number, "input lines must precede instructions");
        stage = inputs;
        if (line.dest.kind != Kind::vector) throw ParseError(line.number, "inputs must be vectors");
        if (++n_inputs > 3) throw ParseError(line.number, "exactly three inputs (x0, x, n) are required");
        on_input(line, n_inputs - 1);
        break;
      case LineKind::instr:
        if (stage == done) throw ParseError(line.number, "instruction after return");
        if (n_inputs != 3) throw ParseError(line.number, "exactly three inputs (x0, x, n) are required");
        stage = body;
        on_instr(line);
        break;
      case LineKind::ret:
        if (stage != body) throw ParseError(line.number, "return must follow the instructions");
        stage = done;
        on_return(line);
        break;
    }
  }
  if (stage != done) throw ParseError(lines.empty() ? 1 : lines.back().number, "missing return line");
}

OpCode resolve(const Line &line) {
  std::vector<Kind> kinds;
  for (auto a : line.args) kinds.push_back(a.kind);
  auto op = resolve_op(line.mnemonic, kinds);
  if (!op) {
    std::string sig;
    for (auto a : line.args) sig += (sig.empty() ? "" : ",") + ref_name(a);
    throw ParseError(line.number, fmt::format("kind mismatch: no {} operation takes ({}) in '{} = {}({})'",
                                              line.mnemonic, sig, ref_name(line.dest), line.mnemonic, sig));
  }
  if (op_info(*op).result != line.dest.kind)
    throw ParseError(line.number, fmt::format("kind mismatch: {} produces a {} but '{}' is a {}",
                                              op_info(*op).name,
                                              op_info(*op).result == Kind::scalar ? "scalar" : "vector",
                                              ref_name(line.dest),
                                              line.dest.kind == Kind::scalar ? "scalar" : "vector"));
  return *op;
}

std::string format_instr(std::string_view dest, OpCode op, const std::vector<std::string> &args) {
  std::string s = fmt::format("{} = {}(", dest, op_info(op).mnemonic);
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
  return s + ")\n";
}

}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

SsaProgram parse_program(std::string_view text) {
  const auto lines = lex(text);
  SsaProgram p;
  std::vector<signed char> defined;
  std::int64_t last = -1;
  auto define = [&](const Line &line) {
    const auto idx = line.dest.index;
    if (idx < defined.size() && defined[idx] >= 0)
      throw ParseError(line.number, ref_name(line.dest) + " is already defined (SSA values are assigned once)");
    if (static_cast<std::int64_t>(idx) <= last)
      throw ParseError(line.number, ref_name(line.dest) + " is defined out of index order");
    last = idx;
    if (defined.size() <= idx) defined.resize(idx + 1, -1);
    defined[idx] = static_cast<signed char>(line.dest.kind);
  };
  auto use = [&](const Line &line, Ref r) {
    if (r.index >= defined.size() || defined[r.index] < 0)
      throw ParseError(line.number, ref_name(r) + " is used before it is defined");
    if (defined[r.index] != static_cast<signed char>(r.kind))
      throw ParseError(line.number, "kind mismatch: " + ref_name(r) + " is defined with the other kind");
  };

  walk(
      lines,
      [&](const Line &l) {
        define(l);
        p.hyperparams.push_back({{l.dest.index, Kind::scalar}, l.value, l.fixed});
      },
      [&](const Line &l, std::size_t i) {
        define(l);
        p.inputs[i] = {l.dest.index, Kind::vector};
      },
      [&](const Line &l) {
        for (auto a : l.args) use(l, a);
        const auto op = resolve(l);
        define(l);
        SsaInstr ins{{l.dest.index, l.dest.kind}, op, {}};
        for (std::size_t i = 0; i < l.args.size(); ++i) ins.args[i] = {l.args[i].index, l.args[i].kind};
        p.body.push_back(ins);
      },
      [&](const Line &l) {
        use(l, l.dest);
        p.return_id = {l.dest.index, l.dest.kind};
        if (l.dest.kind != Kind::vector) throw ParseError(l.number, "return value must be a vector");
        if (p.return_id != p.body.back().dest)
          throw ParseError(l.number, "return value must be the last instruction's result");
      });
  p.validate();
  return p;
}

std::string format_program(const SsaProgram &p) {
  std::string out;
  for (const auto &h : p.hyperparams)
    out += fmt::format("param {} = {}{}\n", to_string(h.id), format_double(h.init), h.fixed ? " fixed" : "");
  for (auto in : p.inputs) out += fmt::format("input {}\n", to_string(in));
  for (const auto &ins : p.body) {
    std::vector<std::string> args;
    for (auto a : ins.operands()) args.push_back(to_string(a));
    out += format_instr(to_string(ins.dest), ins.op, args);
  }
  out += fmt::format("return {}\n", to_string(p.return_id));
  return out;
}

TacProgram parse_tac(std::string_view text) {
  const auto lines = lex(text);
  TacProgram p;
  auto grow = [&](Ref r) {
    auto &n = r.kind == Kind::scalar ? p.n_scalar_slots : p.n_vector_slots;
    n = std::max(n, r.index + 1);
  };
  auto slot = [](Ref r) { return Slot{r.index, r.kind}; };
  walk(
      lines,
      [&](const Line &l) {
        grow(l.dest);
        p.hyperparams.push_back({slot(l.dest), l.value, l.fixed});
      },
      [&](const Line &l, std::size_t i) {
        grow(l.dest);
        p.inputs[i] = slot(l.dest);
      },
      [&](const Line &l) {
        const auto op = resolve(l);
        grow(l.dest);
        TacInstr ins{slot(l.dest), op, {}};
        for (std::size_t i = 0; i < l.args.size(); ++i) {
          grow(l.args[i]);
          ins.args[i] = slot(l.args[i]);
        }
        p.body.push_back(ins);
      },
      [&](const Line &l) {
        if (l.dest.kind != Kind::vector) throw ParseError(l.number, "return value must be a vector");
        grow(l.dest);
        p.return_slot = slot(l.dest);
      });
  p.validate();
  return p;
}

std::string format_tac(const TacProgram &p) {
  auto name = [](Slot s) { return fmt::format("{}{}", kind_prefix(s.kind), s.index); };
  std::string out;
  for (const auto &h : p.hyperparams)
    out += fmt::format("param {} = {}{}\n", name(h.slot), format_double(h.init), h.fixed ? " fixed" : "");
  for (auto in : p.inputs) out += fmt::format("input {}\n", name(in));
  for (const auto &ins : p.body) {
    std::vector<std::string> args;
    for (auto a : ins.operands()) args.push_back(name(a));
    out += format_instr(name(ins.dest), ins.op, args);
  }
  out += fmt::format("return {}\n", name(p.return_slot));
  return out;
}

std::vector<SsaProgram> parse_programs(std::string_view text) {
  std::vector<SsaProgram> out;
  std::string chunk;
  std::size_t chunk_start = 0, number = 0;
  auto flush = [&] {
    if (trim(chunk).empty()) return;
    try {
      out.push_back(parse_program(chunk));
    } catch (const ParseError &e) {
      throw ParseError(chunk_start + e.line(), std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
    }
  };
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line) == "---") {
      flush();
      chunk.clear();
      chunk_start = number;
      continue;
    }
    chunk += line;
    chunk += '\n';
  }
  flush();
  return out;
}

std::string format_programs(const std::vector<SsaProgram> &programs) {
  std::string out;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    if (i) out += "---\n";
    out += format_program(programs[i]);
  }
  return out;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path);
}

}
