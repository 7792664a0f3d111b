//===--- dfyc.cpp - Batch driver for the verification toolchain ----------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Subcommands:
//   parse    syntax-check a program            (exit 0 ok / 1 bad)
//   run      interpret, printing Main's frame  (0 ok / 2 fail / 3 timeout)
//   compile  emit the compiled program         (pretty or s-expression)
//   vcg      emit the generated conditions
//   check    judge the conditions              (0 valid / 4 refuted / 5 ?)
//   difftest compare interpreter vs. compiled  (0 iff no mismatch)
//
// Usage errors exit 64, unreadable/unparsable inputs 65, internal
// compilation or condition-generation errors 70.
//
//===----------------------------------------------------------------------===//

#include "dfy/compiler.hpp"
#include "dfy/frontend.hpp"
#include "dfy/semantics.hpp"
#include "dfy/simrel.hpp"
#include "dfy/targetlang.hpp"
#include "dfy/vccheck.hpp"
#include "dfy/vcg.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;
constexpr int kExitInternal = 70;

bool read_file(const std::string &path, std::string &out) {
  std::ifstream f(path);
  if (!f)
    return false;
  std::ostringstream ss;
  ss << f.rdbuf();
  out = ss.str();
  return true;
}

int load_program(const std::string &path, dfy::Program &out) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitParse;
  }
  auto p = dfy::parse_program(text);
  if (!p.ok()) {
    std::cerr << path << ": " << p.error().to_string() << "\n";
    return kExitParse;
  }
  out = std::move(p.value());
  return 0;
}

void write_output(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  f << text;
}

std::string show_value(const dfy::State &st, const dfy::Value &v) {
  using namespace dfy;
  if (const auto *i = std::get_if<IntV>(&v.v))
    return i->i.str();
  if (const auto *b = std::get_if<BoolV>(&v.v))
    return b->b ? "true" : "false";
  if (const auto *s = std::get_if<StrV>(&v.v))
    return "\"" + s->s + "\"";
  const auto &a = std::get<ArrV>(v.v);
  std::string out = "[";
  if (a.loc < st.heap.size()) {
    const auto &hv = st.heap[a.loc];
    for (size_t i = 0; i < hv.elems.size(); ++i)
      out += (i ? ", " : "") + show_value(st, hv.elems[i]);
  }
  return out + "]";
}

dfy::Mutation mutation_by_name(const std::string &n) {
  using M = dfy::Mutation;
  if (n == "none")
    return M::None;
  if (n == "op-flip")
    return M::OpFlip;
  if (n == "no-arg-reverse")
    return M::NoArgReverse;
  if (n == "drop-return-handler")
    return M::DropReturnHandler;
  if (n == "wrong-tuple-component")
    return M::WrongTupleComponent;
  if (n == "no-clock-decrement")
    return M::NoClockDecrement;
  throw CLI::ValidationError("unknown mutation '" + n + "'");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"dfyc: interpret, compile, and verify imperative programs"};
  app.require_subcommand(1);

  std::string in_path, out_path;

  // parse
  auto *cmd_parse = app.add_subcommand("parse", "syntax-check a program");
  cmd_parse->add_option("file", in_path, "input program")->required();

  // run
  uint64_t fuel = 1u << 16;
  auto *cmd_run = app.add_subcommand("run", "interpret a program's Main");
  cmd_run->add_option("file", in_path, "input program")->required();
  cmd_run->add_option("--fuel", fuel, "clock budget");

  // compile
  std::string emit = "pretty";
  auto *cmd_compile = app.add_subcommand("compile", "compile a program");
  cmd_compile->add_option("file", in_path, "input program")->required();
  cmd_compile->add_option("--emit", emit, "pretty|sexp")
      ->check(CLI::IsMember({"pretty", "sexp"}));
  cmd_compile->add_option("-o,--output", out_path, "output file");

  // vcg
  auto *cmd_vcg = app.add_subcommand("vcg", "generate conditions");
  cmd_vcg->add_option("file", in_path, "input program")->required();
  cmd_vcg->add_option("-o,--output", out_path, "output file");

  // check
  std::string budget_ints = "-8..8";
  size_t budget_states = 300;
  std::string solver_cmd;
  unsigned solver_timeout = 10;
  auto *cmd_check = app.add_subcommand("check", "judge the conditions");
  cmd_check->add_option("file", in_path, "input program")->required();
  cmd_check->add_option("--budget-ints", budget_ints,
                        "integer interval LO..HI for the falsifier");
  cmd_check->add_option("--budget-states", budget_states,
                        "entry states sampled per condition");
  cmd_check->add_option("--smt-solver", solver_cmd,
                        "external solver command (reads an SMT-LIB file)");
  cmd_check->add_option("--timeout", solver_timeout,
                        "per-query solver timeout in seconds");

  // difftest
  size_t trials = 50;
  uint64_t seed = 1;
  std::string mutation_name = "none";
  auto *cmd_diff = app.add_subcommand(
      "difftest", "compare the interpreter against compiled code");
  cmd_diff->add_option("path", in_path, "program file or directory")
      ->required();
  cmd_diff->add_option("--fuel", fuel, "clock budget per trial");
  cmd_diff->add_option("--trials", trials, "trials per method");
  cmd_diff->add_option("--seed", seed, "random seed");
  cmd_diff->add_option("--mutation", mutation_name,
                       "compile with a deliberate defect")
      ->check(CLI::IsMember({"none", "op-flip", "no-arg-reverse",
                             "drop-return-handler", "wrong-tuple-component",
                             "no-clock-decrement"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  using namespace dfy;

  if (cmd_parse->parsed()) {
    Program p;
    if (load_program(in_path, p) != 0)
      return 1;
    return 0;
  }

  if (cmd_run->parsed()) {
    Program p;
    if (int rc = load_program(in_path, p))
      return rc;
    Program np = normalize(p);
    const Member *mem = member_lookup(np, "Main");
    const auto *main_m = mem ? std::get_if<Method>(mem) : nullptr;
    if (!main_m || !main_m->ins.empty()) {
      std::cerr << "error: no method Main without in-parameters\n";
      return kExitInternal;
    }
    State st;
    st.clock = fuel;
    std::vector<std::string> lhss;
    for (const auto &[n, ty] : main_m->outs) {
      lhss.push_back(n);
      st.locals.emplace_back(n, std::nullopt);
    }
    Env env{&np};
    Stmt call{MetCallStmt{lhss, "Main", {}}};
    StmtResult r = evaluate_stmt(st, env, call);
    if (r == StmtResult::Fail) {
      std::cerr << "run: failed\n";
      return 2;
    }
    if (r == StmtResult::Timeout) {
      std::cerr << "run: out of fuel\n";
      return 3;
    }
    for (const auto &[n, v] : st.locals)
      std::cout << n << " = " << (v ? show_value(st, *v) : "?") << "\n";
    return 0;
  }

  if (cmd_compile->parsed()) {
    Program p;
    if (int rc = load_program(in_path, p))
      return rc;
    auto decs = compile(normalize(p));
    if (!decs.ok()) {
      std::cerr << "compile: " << decs.error() << "\n";
      return kExitInternal;
    }
    write_output(out_path, emit == "sexp" ? print_tdecs_sexp(decs.value())
                                          : print_tdecs(decs.value()));
    return 0;
  }

  if (cmd_vcg->parsed()) {
    Program p;
    if (int rc = load_program(in_path, p))
      return rc;
    auto vcs = program_vcg(p);
    if (!vcs.ok()) {
      std::cerr << "vcg: " << vcs.error() << "\n";
      return kExitInternal;
    }
    write_output(out_path, print_vcs(vcs.value()));
    return 0;
  }

  if (cmd_check->parsed()) {
    Program p;
    if (int rc = load_program(in_path, p))
      return rc;
    CheckOpts opts;
    opts.solver_cmd = solver_cmd;
    opts.solver_timeout_secs = solver_timeout;
    opts.budget.states_max = budget_states;
    auto dots = budget_ints.find("..");
    if (dots == std::string::npos) {
      std::cerr << "error: --budget-ints expects LO..HI\n";
      return kExitUsage;
    }
    try {
      opts.budget.int_lo = std::stol(budget_ints.substr(0, dots));
      opts.budget.int_hi = std::stol(budget_ints.substr(dots + 2));
    } catch (...) {
      std::cerr << "error: --budget-ints expects LO..HI\n";
      return kExitUsage;
    }
    auto results = check_program(p, opts);
    bool any_cex = false, any_unknown = false;
    for (const auto &mc : results) {
      const char *v = mc.vcg_error ? "rejected"
                      : mc.verdict == CheckVerdict::BoundedValid
                          ? (opts.solver_cmd.empty() ? "bounded-valid"
                                                     : "valid")
                      : mc.verdict == CheckVerdict::Counterexample
                          ? "counterexample"
                          : "unknown";
      std::cout << mc.method << ": " << v;
      if (!mc.detail.empty())
        std::cout << " (" << mc.detail << ")";
      std::cout << "\n";
      if (mc.verdict == CheckVerdict::Counterexample)
        any_cex = true;
      else if (mc.verdict == CheckVerdict::Unknown)
        any_unknown = true;
    }
    if (any_cex)
      return 4;
    if (any_unknown)
      return 5;
    return 0;
  }

  if (cmd_diff->parsed()) {
    std::vector<std::string> files;
    std::error_code ec;
    if (std::filesystem::is_directory(in_path, ec)) {
      for (const auto &e : std::filesystem::directory_iterator(in_path))
        if (e.path().extension() == ".sexp")
          files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(in_path);
    }
    if (files.empty()) {
      std::cerr << "error: no .sexp programs under " << in_path << "\n";
      return kExitUsage;
    }
    Mutation mut = mutation_by_name(mutation_name);
    bool any_mismatch = false;
    for (const auto &f : files) {
      Program p;
      if (int rc = load_program(f, p))
        return rc;
      DiffReport rep = difftest_program(p, fuel, trials, seed, mut);
      std::cout << "== " << f << "\n" << format_report(rep);
      if (rep.any_mismatch())
        any_mismatch = true;
    }
    return any_mismatch ? 1 : 0;
  }

  return kExitUsage;
}
