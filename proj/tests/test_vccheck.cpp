#include "dfy/vccheck.hpp"

#include "dfy/frontend.hpp"
#include "dfy/passes.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dfy;

namespace {

std::string slurp(const std::filesystem::path &p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Program parse_ok(const std::string &text) {
  auto r = parse_program(text);
  if (!r.ok())
    FAIL("parse error: " << r.error().to_string());
  return r.value();
}

ExpPtr exp_ok(const std::string &text) {
  auto r = parse_exp_text(text);
  REQUIRE(r.ok());
  return r.value();
}

VcVal eval_closed(const std::string &text, const Budget &b = {}) {
  Program p;
  State st;
  Env env{&p};
  return eval_vc(st, env, *exp_ok(text), b);
}

/// An SMT solver command, if one is installed; empty otherwise.
std::string find_solver() {
  for (const char *cand : {"z3 -in", "z3", "cvc5"}) {
    std::string probe =
        std::string("command -v ") + (cand[0] == 'z' ? "z3" : "cvc5") +
        " >/dev/null 2>&1";
    if (std::system(probe.c_str()) == 0)
      return cand[0] == 'z' ? "z3" : "cvc5 --lang smt2";
  }
  return "";
}

} // namespace

//===----------------------------------------------------------------------===//
// Bounded evaluation
//===----------------------------------------------------------------------===//

TEST_CASE("closed conditions evaluate to definite truth values") {
  CHECK(eval_closed("(== (+ 1 2) 3)") == VcVal::True);
  CHECK(eval_closed("(< 2 1)") == VcVal::False);
  CHECK(eval_closed("(==> false (== (div 1 0) 0))") == VcVal::True);
  // A genuine evaluation failure is neither true nor false.
  CHECK(eval_closed("(== (div 1 0) 0)") == VcVal::Unknown);
}

TEST_CASE("quantifiers over integers are checked on the budget interval") {
  Budget b;
  b.int_lo = -8;
  b.int_hi = 8;
  CHECK(eval_closed("(forall (k int) (<= (* k 0) 0))", b) == VcVal::True);
  CHECK(eval_closed("(forall (k int) (< k 8))", b) == VcVal::False);
  // True on the interval but not beyond it: bounded checking accepts it.
  CHECK(eval_closed("(forall (k int) (< k 9))", b) == VcVal::True);
  CHECK(eval_closed("(forall (p bool) (or p (not p)))", b) == VcVal::True);
}

TEST_CASE("quantifiers over arrays enumerate small candidate arrays") {
  Budget b;
  b.arr_len_max = 2;
  CHECK(eval_closed("(forall (a (array int)) (<= 0 (len a)))", b) ==
        VcVal::True);
  CHECK(eval_closed("(forall (a (array int)) (< (len a) 2))", b) ==
        VcVal::False);
}

TEST_CASE("let and setprev work inside conditions") {
  CHECK(eval_closed("(let ((t 4)) (== (* t t) 16))") == VcVal::True);
  CHECK(eval_closed("(setprev (== (prev 1) 1))") == VcVal::True);
}

TEST_CASE("the work budget turns runaway conditions into unknowns") {
  Budget tiny;
  tiny.work_max = 50;
  tiny.int_lo = -8;
  tiny.int_hi = 8;
  CHECK(eval_closed("(forall (i int) (forall (j int) (forall (k int) "
                    "(<= (* i (* j k)) (* i (* j k))))))",
                    tiny) == VcVal::Unknown);
}

//===----------------------------------------------------------------------===//
// Falsifier
//===----------------------------------------------------------------------===//

TEST_CASE("the falsifier finds assignments refuting invalid conditions") {
  Program p;
  Budget b;
  auto r = falsify(p, {{"v0", DType::int_type()}},
                   *exp_ok("(forall (v0 int) (< v0 5))"), b, 1);
  REQUIRE(r.verdict == CheckVerdict::Counterexample);
  CHECK(r.detail.find("v0 =") != std::string::npos);
}

TEST_CASE("the falsifier accepts conditions that hold on all sampled states") {
  Program p;
  Budget b;
  auto r = falsify(p, {{"v0", DType::int_type()}},
                   *exp_ok("(forall (v0 int) (<= 0 (* v0 v0)))"), b, 1);
  CHECK(r.verdict == CheckVerdict::BoundedValid);
}

TEST_CASE("reported counterexamples replay to false") {
  // The falsifier's claim is checked independently: the specific value it
  // reports must itself refute the body.
  Program p;
  Budget b;
  ExpPtr cond = exp_ok("(forall (v0 int) (!= (* v0 v0) 4))");
  auto r = falsify(p, {{"v0", DType::int_type()}}, *cond, b, 7);
  REQUIRE(r.verdict == CheckVerdict::Counterexample);
  // Extract the reported integer and replay it.
  auto pos = r.detail.find("v0 = ");
  REQUIRE(pos != std::string::npos);
  long v = std::stol(r.detail.substr(pos + 5));
  CHECK((v == 2 || v == -2));
  State st;
  st.locals.emplace_back("v0", val_int(v));
  st.locals_old = st.locals;
  Env env{&p};
  CHECK(eval_vc(st, env, *exp_ok("(!= (* v0 v0) 4)"), b) == VcVal::False);
}

//===----------------------------------------------------------------------===//
// Whole-program checking
//===----------------------------------------------------------------------===//

TEST_CASE("a correct program checks out as bounded-valid") {
  Program p = parse_ok(slurp(DFY_SOURCE_DIR "/corpus/mccarthy91.sexp"));
  CheckOpts opts;
  opts.budget.int_lo = -150;
  opts.budget.int_hi = 150;
  opts.budget.states_max = 200;
  auto rs = check_program(p, opts);
  REQUIRE(!rs.empty());
  for (const auto &mc : rs) {
    INFO(mc.method << ": " << mc.detail);
    CHECK(mc.verdict == CheckVerdict::BoundedValid);
  }
}

TEST_CASE("broken specifications are rejected") {
  for (const char *rel :
       {"tests/fixtures/m91_wrong_ensures.sexp",
        "tests/fixtures/sumton_bad_decreases.sexp",
        "tests/fixtures/swap_missing_modifies.sexp"}) {
    INFO(rel);
    Program p = parse_ok(slurp(std::string(DFY_SOURCE_DIR) + "/" + rel));
    CheckOpts opts;
    opts.budget.int_lo = -150;
    opts.budget.int_hi = 150;
    opts.budget.states_max = 400;
    auto rs = check_program(p, opts);
    bool rejected = false;
    for (const auto &mc : rs)
      if (mc.verdict == CheckVerdict::Counterexample)
        rejected = true;
    CHECK(rejected);
  }
}

//===----------------------------------------------------------------------===//
// SMT emission and solving
//===----------------------------------------------------------------------===//

TEST_CASE("emitted scripts negate the condition over declared constants") {
  auto r = smt_emit(*exp_ok("(forall (n int) (==> (<= 0 n) (<= 0 (* n n))))"));
  REQUIRE(r.ok());
  const std::string &s = r.value();
  CHECK(s.find("(declare-const n Int)") != std::string::npos);
  CHECK(s.find("(assert (not ") != std::string::npos);
  CHECK(s.find("(check-sat)") != std::string::npos);
}

TEST_CASE("heap and string conditions are outside the solver fragment") {
  CHECK(!smt_emit(*exp_ok("(forall (a (array int)) (<= 0 (len a)))")).ok());
  CHECK(!smt_emit(*exp_ok("(forall (s string) (== s s))")).ok());
  CHECK(!smt_emit(*exp_ok("(forallheap (a) true)")).ok());
}

TEST_CASE("let-bound and quantified names are renamed apart in scripts") {
  auto r = smt_emit(
      *exp_ok("(forall (n int) (let ((n (+ n 1))) (forall (n int) (<= n n))))"));
  REQUIRE(r.ok());
  CHECK(r.value().find("n!") != std::string::npos);
}

TEST_CASE("a missing solver yields unknown rather than a wrong verdict") {
  auto script = smt_emit(*exp_ok("(forall (n int) (== n n))"));
  REQUIRE(script.ok());
  SmtResult r = smt_check("definitely-no-such-solver-binary", script.value(), 2);
  CHECK(r.verdict == SmtVerdict::Unknown);
}

TEST_CASE("solver and falsifier agree on a suite of known conditions") {
  std::string solver = find_solver();
  if (solver.empty())
    SKIP("no SMT solver installed");

  const char *valid[] = {
      "(forall (n int) (<= n (+ n 1)))",
      "(forall (n int) (==> (< 100 n) (== (- (+ n 11) 10) (+ n 1))))",
      "(forall (i int) (forall (j int) (== (+ i j) (+ j i))))",
      "(forall (n int) (or (== (mod n 2) 0) (== (mod n 2) 1)))",
      "(forall (p bool) (or p (not p)))",
  };
  const char *invalid[] = {
      "(forall (n int) (< n 1000000))",
      "(forall (n int) (== (* n n) n))",
      "(forall (i int) (forall (j int) (== (- i j) (- j i))))",
      "(forall (p bool) p)",
  };
  Budget b;
  b.int_lo = -2000000;
  b.int_hi = 2000000;
  Program empty;
  for (const char *t : valid) {
    INFO(t);
    auto script = smt_emit(*exp_ok(t));
    REQUIRE(script.ok());
    CHECK(smt_check(solver, script.value(), 10).verdict == SmtVerdict::Valid);
  }
  for (const char *t : invalid) {
    INFO(t);
    auto script = smt_emit(*exp_ok(t));
    REQUIRE(script.ok());
    CHECK(smt_check(solver, script.value(), 10).verdict == SmtVerdict::Invalid);
    // The falsifier, given a generous interval, agrees.
    ExpPtr cond = exp_ok(t);
    const auto *f = std::get_if<ForallExp>(&cond->node);
    REQUIRE(f != nullptr);
    auto r = falsify(empty, {{f->bound, f->ty}}, *cond, b, 5);
    CHECK(r.verdict == CheckVerdict::Counterexample);
  }
}
