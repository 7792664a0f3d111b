#include "dfy/targetlang.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace dfy;

namespace {

TRes eval(TExpPtr e, uint64_t fuel = 100000) {
  TStore st;
  st.clock = fuel;
  return t_evaluate(st, nullptr, std::move(e));
}

TVal val_of(TExpPtr e, uint64_t fuel = 100000) {
  TRes r = eval(std::move(e), fuel);
  REQUIRE(r.kind == TResKind::Val);
  return r.val;
}

} // namespace

TEST_CASE("literals and tuples evaluate to themselves") {
  CHECK(std::get<VIntV>(val_of(t_int(-7)).v).i == -7);
  CHECK(std::get<VBoolV>(val_of(t_bool(true)).v).b);
  CHECK(std::get<VStrV>(val_of(t_str("hi")).v).s == "hi");
  TVal t = val_of(t_tuple({t_int(1), t_bool(false)}));
  const auto &tt = std::get<VTupleV>(t.v);
  REQUIRE(tt.vs.size() == 2);
  CHECK(std::get<VIntV>(tt.vs[0].v).i == 1);
  TVal p = val_of(t_proj(1, t_tuple({t_int(1), t_int(2)})));
  CHECK(std::get<VIntV>(p.v).i == 2);
}

TEST_CASE("application evaluates the argument before the function") {
  // r starts at 0. The function position increments r and returns the
  // identity; the argument position reads r. Under argument-first
  // (right-to-left) evaluation the call yields 0.
  TExpPtr e = t_let(
      "r", t_ref(t_int(0)),
      t_app(t_seq(t_assign(t_var("r"), t_int(1)), t_fun("x", t_var("x"))),
            t_deref(t_var("r"))));
  CHECK(std::get<VIntV>(val_of(e).v).i == 0);
}

TEST_CASE("assignment evaluates its right-hand side before the location") {
  // Both sides touch the same cell: rhs reads 0 if it runs first.
  TExpPtr e = t_let(
      "r", t_ref(t_int(0)),
      t_seq(t_assign(t_seq(t_assign(t_var("r"), t_int(5)), t_var("r")),
                     t_deref(t_var("r"))),
            t_deref(t_var("r"))));
  CHECK(std::get<VIntV>(val_of(e).v).i == 0);
}

TEST_CASE("each application consumes one clock tick") {
  TExpPtr id = t_fun("x", t_var("x"));
  TExpPtr one_app = t_app(id, t_int(1));
  TStore st;
  st.clock = 5;
  REQUIRE(t_evaluate(st, nullptr, one_app).kind == TResKind::Val);
  CHECK(st.clock == 4);

  TStore st0;
  st0.clock = 0;
  CHECK(t_evaluate(st0, nullptr, one_app).kind == TResKind::Timeout);
}

TEST_CASE("deep tail recursion runs in constant stack") {
  // loop n = if n == 0 then 42 else loop (n - 1), applied at 100000.
  TLetrec lr;
  lr.defs.push_back(
      {"loop", "n",
       t_if(t_prim(BinOpKind::Eq, t_var("n"), t_int(0)), t_int(42),
            t_app(t_var("loop"), t_prim(BinOpKind::Sub, t_var("n"), t_int(1))))});
  lr.scope = t_app(t_var("loop"), t_int(100000));
  TVal v = val_of(mk_t(std::move(lr)), 1u << 20);
  CHECK(std::get<VIntV>(v.v).i == 42);
}

TEST_CASE("mutually recursive definitions see each other") {
  TLetrec lr;
  lr.defs.push_back(
      {"even", "n",
       t_if(t_prim(BinOpKind::Eq, t_var("n"), t_int(0)), t_bool(true),
            t_app(t_var("odd"), t_prim(BinOpKind::Sub, t_var("n"), t_int(1))))});
  lr.defs.push_back(
      {"odd", "n",
       t_if(t_prim(BinOpKind::Eq, t_var("n"), t_int(0)), t_bool(false),
            t_app(t_var("even"), t_prim(BinOpKind::Sub, t_var("n"), t_int(1))))});
  lr.scope = t_app(t_var("even"), t_int(101));
  TVal v = val_of(mk_t(std::move(lr)));
  CHECK(!std::get<VBoolV>(v.v).b);
}

TEST_CASE("primitive division and modulo are Euclidean") {
  CHECK(std::get<VIntV>(val_of(t_prim(BinOpKind::Div, t_int(-7), t_int(2))).v)
            .i == -4);
  CHECK(std::get<VIntV>(val_of(t_prim(BinOpKind::Mod, t_int(-7), t_int(2))).v)
            .i == 1);
  CHECK(std::get<VIntV>(val_of(t_prim(BinOpKind::Div, t_int(7), t_int(-2))).v)
            .i == -3);
  CHECK(eval(t_prim(BinOpKind::Div, t_int(1), t_int(0))).kind ==
        TResKind::Crash);
}

TEST_CASE("boolean connectives are not primitives") {
  // And/Or/Imp must be compiled to conditionals; as primitives they crash.
  CHECK(eval(t_prim(BinOpKind::And, t_bool(true), t_bool(true))).kind ==
        TResKind::Crash);
  CHECK(eval(t_prim(BinOpKind::Or, t_bool(false), t_bool(true))).kind ==
        TResKind::Crash);
  CHECK(eval(t_prim(BinOpKind::Imp, t_bool(false), t_bool(true))).kind ==
        TResKind::Crash);
}

TEST_CASE("type confusion crashes instead of failing silently") {
  CHECK(eval(t_prim(BinOpKind::Add, t_int(1), t_bool(true))).kind ==
        TResKind::Crash);
  CHECK(eval(t_app(t_int(3), t_int(1))).kind == TResKind::Crash);
  CHECK(eval(t_deref(t_int(3))).kind == TResKind::Crash);
  CHECK(eval(t_if(t_int(1), t_int(2), t_int(3))).kind == TResKind::Crash);
  CHECK(eval(t_var("unbound")).kind == TResKind::Crash);
  CHECK(eval(t_proj(5, t_tuple({t_int(1)}))).kind == TResKind::Crash);
}

TEST_CASE("raise propagates until a matching handler catches it") {
  TExpPtr caught = mk_t(THandle{t_raise("Return"), "Return", t_int(9)});
  CHECK(std::get<VIntV>(val_of(caught).v).i == 9);

  TExpPtr other = mk_t(THandle{t_raise("Break"), "Return", t_int(9)});
  TRes r = eval(other);
  REQUIRE(r.kind == TResKind::Raise);
  CHECK(r.exn == "Break");

  // The handler body is skipped entirely when nothing is raised.
  TExpPtr quiet = mk_t(THandle{t_int(1), "Return", t_raise("Boom")});
  CHECK(std::get<VIntV>(val_of(quiet).v).i == 1);

  // An exception aborts the rest of a sequence.
  TExpPtr mid = mk_t(THandle{t_seq(t_raise("Return"), t_int(0)), "Return",
                             t_int(7)});
  CHECK(std::get<VIntV>(val_of(mid).v).i == 7);
}

TEST_CASE("references and arrays read back what was written") {
  TExpPtr e = t_let("r", t_ref(t_int(1)),
                    t_seq(t_assign(t_var("r"), t_int(2)), t_deref(t_var("r"))));
  CHECK(std::get<VIntV>(val_of(e).v).i == 2);

  TExpPtr arr = t_let(
      "a", mk_t(TArrAlloc{t_int(3), t_int(0)}),
      t_seq(mk_t(TArrUpd{t_var("a"), t_int(1), t_int(5)}),
            mk_t(TArrSub{t_var("a"), t_int(1)})));
  CHECK(std::get<VIntV>(val_of(arr).v).i == 5);

  // Out-of-bounds access crashes.
  TExpPtr oob = t_let("a", mk_t(TArrAlloc{t_int(2), t_int(0)}),
                      mk_t(TArrSub{t_var("a"), t_int(2)}));
  CHECK(eval(oob).kind == TResKind::Crash);
  TExpPtr neg = mk_t(TArrAlloc{t_int(-1), t_int(0)});
  CHECK(eval(neg).kind == TResKind::Crash);
}

TEST_CASE("runaway recursion is stopped by the guards") {
  // Non-tail self-application recursion exhausts the depth guard (the fuel
  // is large enough that the clock alone would not stop it in time).
  TLetrec lr;
  lr.defs.push_back(
      {"f", "n",
       t_prim(BinOpKind::Add, t_app(t_var("f"), t_var("n")), t_int(1))});
  lr.scope = t_app(t_var("f"), t_int(0));
  TStore st;
  st.clock = 1u << 30;
  TRes r = t_evaluate(st, nullptr, mk_t(std::move(lr)));
  CHECK(r.kind == TResKind::Crash);
  CHECK(st.depth == 0); // the guard unwound cleanly
}

TEST_CASE("evaluating declarations extends the environment in order") {
  std::vector<TDec> decs;
  decs.push_back(DExn{"Return"});
  decs.push_back(DLet{"x", t_int(10)});
  decs.push_back(DLet{"y", t_prim(BinOpKind::Add, t_var("x"), t_int(5))});
  TStore st;
  st.clock = 1000;
  auto [env, res] = t_evaluate_decs(st, nullptr, decs);
  REQUIRE(res.kind == TResKind::Val);
  const TVal *y = env_lookup(env, "y");
  REQUIRE(y != nullptr);
  CHECK(std::get<VIntV>(y->v).i == 15);
}
