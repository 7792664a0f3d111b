#include "dfy/compiler.hpp"

#include "dfy/frontend.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace dfy;

namespace {

Program parse_ok(const std::string &text) {
  auto r = parse_program(text);
  if (!r.ok())
    FAIL("parse error: " << r.error().to_string());
  return normalize(r.value());
}

std::vector<TDec> compile_ok(const Program &p, Mutation mut = Mutation::None,
                             bool with_main = true) {
  auto r = compile(p, mut, with_main);
  REQUIRE(r.ok());
  return r.value();
}

std::string pretty(const std::vector<TDec> &decs) { return print_tdecs(decs); }

const char *kSub2 =
    "(program"
    "  (method Sub2 (ins (a int) (b int)) (outs (r int))"
    "    (requires) (ensures) (decreases) (modifies)"
    "    (body (assign ((r (- a b))))))"
    "  (method Main (ins) (outs (r int))"
    "    (requires) (ensures) (decreases) (modifies)"
    "    (body (metcall (r) Sub2 (10 3)))))";

BigInt run_main(const std::vector<TDec> &decs) {
  TStore st;
  st.clock = 1u << 20;
  auto [env, res] = t_evaluate_decs(st, nullptr, decs);
  REQUIRE(res.kind == TResKind::Val);
  const TVal *v = env_lookup(env, "main_result");
  REQUIRE(v != nullptr);
  return std::get<VIntV>(v->v).i;
}

} // namespace

TEST_CASE("compiled programs declare the return exception and handlers") {
  std::string out = pretty(compile_ok(parse_ok(kSub2)));
  CHECK(out.find("exception Return") != std::string::npos);
  CHECK(out.find("raise Return") != std::string::npos);
  CHECK(out.find("handle Return") != std::string::npos);
  CHECK(out.find("fun dfy_Sub2") != std::string::npos);
  CHECK(out.find("(dfy_Main ())") != std::string::npos);
}

TEST_CASE("compiled methods hold their locals in references") {
  std::string out = pretty(compile_ok(parse_ok(kSub2)));
  CHECK(out.find("ref (") != std::string::npos);
  CHECK(out.find("!v") != std::string::npos);
}

TEST_CASE("compiled calls apply arguments so they evaluate left to right") {
  // The spine carries the arguments reversed; under argument-before-function
  // application this restores source order. Sub2(10, 3) must give 7, which
  // distinguishes the argument-to-parameter pairing.
  std::vector<TDec> decs = compile_ok(parse_ok(kSub2));
  CHECK(run_main(decs) == 7);
  std::string out = pretty(decs);
  CHECK(out.find("((dfy_Sub2 3) 10)") != std::string::npos);
}

TEST_CASE("loops become local tail-recursive functions") {
  Program p = parse_ok(
      "(program (method Main (ins) (outs (s int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (then (assign ((s 0)))"
      "    (dec ((i int 0))"
      "      (while (< i 10) (invariants) (decreases (- 10 i)) (modifies)"
      "        (assign ((s (+ s i)) (i (+ i 1))))))))))");
  std::vector<TDec> decs = compile_ok(p);
  CHECK(run_main(decs) == 45);
  std::string out = pretty(decs);
  CHECK(out.find("fun ") != std::string::npos); // the loop function
}

TEST_CASE("arrays compile to length and storage pairs") {
  Program p = parse_ok(
      "(program (method Main (ins) (outs (n int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (dec ((a (array int)))"
      "    (then (assign ((a (alloc int 4))))"
      "      (then (assign (((sel a 2) 9)))"
      "        (assign ((n (+ (len a) (sel a 2)))))))))))");
  std::vector<TDec> decs = compile_ok(p);
  CHECK(run_main(decs) == 13);
  std::string out = pretty(decs);
  CHECK(out.find("#1 ") != std::string::npos); // length component
  CHECK(out.find("#2 ") != std::string::npos); // storage component
}

TEST_CASE("asserts are stripped before compilation") {
  Program with = parse_ok(
      "(program (method Main (ins) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (then (assert false) (assign ((r 1)))))))");
  Program without = parse_ok(
      "(program (method Main (ins) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (then (skip) (assign ((r 1)))))))");
  CHECK(pretty(compile_ok(with)) == pretty(compile_ok(without)));
  CHECK(run_main(compile_ok(with)) == 1);
}

TEST_CASE("functions compile to pure definitions") {
  Program p = parse_ok(
      "(program"
      "  (function double (ins (k int)) int (* k 2))"
      "  (method Main (ins) (outs (r int))"
      "    (requires) (ensures) (decreases) (modifies)"
      "    (body (assign ((r (call double 21)))))))");
  std::vector<TDec> decs = compile_ok(p);
  CHECK(run_main(decs) == 42);
  CHECK(pretty(decs).find("fun dfy_double") != std::string::npos);
}

TEST_CASE("short-circuit connectives compile to conditionals") {
  Program p = parse_ok(
      "(program (method Main (ins) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (if (and false (== (div 1 0) 0))"
      "            (assign ((r 1))) (assign ((r 2)))))))");
  // If And compiled to a strict primitive, the division by zero would crash.
  CHECK(run_main(compile_ok(p)) == 2);
}

TEST_CASE("every mutation changes the compiled code") {
  // Uses addition (the flipped operator) and an array (for the tuple
  // projection) so every code-level mutation has something to bite on.
  Program p = parse_ok(
      "(program (method Main (ins) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (dec ((a (array int)))"
      "    (then (assign ((a (alloc int 4))))"
      "      (then (metcall (r) Add2 (1 2))"
      "        (assign ((r (+ r (len a))))))))))"
      "  (method Add2 (ins (x int) (y int)) (outs (s int))"
      "    (requires) (ensures) (decreases) (modifies)"
      "    (body (assign ((s (+ x y)))))))");
  std::string base = pretty(compile_ok(p, Mutation::None, false));
  for (Mutation mut :
       {Mutation::OpFlip, Mutation::NoArgReverse, Mutation::DropReturnHandler,
        Mutation::WrongTupleComponent}) {
    auto r = compile(p, mut, false);
    REQUIRE(r.ok());
    CHECK(pretty(r.value()) != base);
  }
  // The clock mutation changes the runtime configuration, not the code.
  auto r = compile(p, Mutation::NoClockDecrement, false);
  REQUIRE(r.ok());
  CHECK(pretty(r.value()) == base);
}

TEST_CASE("specific mutations have their advertised effect") {
  Program p = parse_ok(kSub2);
  std::string dropped =
      pretty(compile_ok(p, Mutation::DropReturnHandler, false));
  CHECK(dropped.find("handle Return") == std::string::npos);

  std::string noreverse = pretty(compile_ok(p, Mutation::NoArgReverse, false));
  CHECK(noreverse.find("((dfy_Sub2 10) 3)") != std::string::npos);

  // Addition is the operator the flip targets.
  Program add = parse_ok(
      "(program (method Main (ins) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (assign ((r (+ 40 2)))))))");
  std::string flipped = pretty(compile_ok(add, Mutation::OpFlip, false));
  CHECK(flipped.find("(40 - 2)") != std::string::npos);

  Program arr = parse_ok(
      "(program (method Main (ins) (outs (n int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (dec ((a (array int)))"
      "    (then (assign ((a (alloc int 4)))) (assign ((n (len a)))))))))");
  std::string wrong =
      pretty(compile_ok(arr, Mutation::WrongTupleComponent, false));
  CHECK(wrong != pretty(compile_ok(arr, Mutation::None, false)));
}

TEST_CASE("compiling a whole corpus program succeeds") {
  // Smoke check on a mutually recursive pair.
  Program p = parse_ok(
      "(program"
      "  (method Even (ins (n int)) (outs (b bool))"
      "    (requires (<= 0 n)) (ensures) (decreases n) (modifies)"
      "    (body (if (== n 0) (assign ((b true)))"
      "              (metcall (b) Odd ((- n 1))))))"
      "  (method Odd (ins (n int)) (outs (b bool))"
      "    (requires (<= 0 n)) (ensures) (decreases n) (modifies)"
      "    (body (if (== n 0) (assign ((b false)))"
      "              (metcall (b) Even ((- n 1))))))"
      "  (method Main (ins) (outs (r int))"
      "    (requires) (ensures) (decreases) (modifies)"
      "    (body (dec ((b bool))"
      "      (then (metcall (b) Even (9))"
      "            (if b (assign ((r 1))) (assign ((r 0)))))))))");
  CHECK(run_main(compile_ok(p)) == 0);
}
