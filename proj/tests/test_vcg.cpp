#include "dfy/vcg.hpp"

#include "dfy/frontend.hpp"
#include "dfy/passes.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
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

Program load(const char *rel) {
  return parse_ok(slurp(std::string(DFY_SOURCE_DIR) + "/" + rel));
}

/// Count expression nodes satisfying a predicate, recursing everywhere.
size_t count_nodes(const Exp &e, const std::function<bool(const Exp &)> &pred) {
  size_t n = pred(e) ? 1 : 0;
  auto sub = [&](const ExpPtr &p) { n += count_nodes(*p, pred); };
  std::visit(
      [&](const auto &x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, UnOp>)
          sub(x.operand);
        else if constexpr (std::is_same_v<T, BinOp>) {
          sub(x.lhs);
          sub(x.rhs);
        } else if constexpr (std::is_same_v<T, Ite>) {
          sub(x.cond);
          sub(x.thn);
          sub(x.els);
        } else if constexpr (std::is_same_v<T, ArrLen>)
          sub(x.arr);
        else if constexpr (std::is_same_v<T, ArrSel>) {
          sub(x.arr);
          sub(x.idx);
        } else if constexpr (std::is_same_v<T, FunCall>) {
          for (const auto &a : x.args)
            sub(a);
        } else if constexpr (std::is_same_v<T, ForallExp>)
          sub(x.body);
        else if constexpr (std::is_same_v<T, LetExp>) {
          for (const auto &[nm, rhs] : x.binds)
            sub(rhs);
          sub(x.body);
        } else if constexpr (std::is_same_v<T, OldExp>)
          sub(x.e);
        else if constexpr (std::is_same_v<T, OldHeapExp>)
          sub(x.e);
        else if constexpr (std::is_same_v<T, PrevExp>)
          sub(x.e);
        else if constexpr (std::is_same_v<T, PrevHeapExp>)
          sub(x.e);
        else if constexpr (std::is_same_v<T, SetPrevExp>)
          sub(x.e);
        else if constexpr (std::is_same_v<T, ForallHeapExp>)
          sub(x.body);
      },
      e.node);
  return n;
}

size_t count_in_all(const std::vector<ExpPtr> &conds,
                    const std::function<bool(const Exp &)> &pred) {
  size_t n = 0;
  for (const auto &c : conds)
    n += count_nodes(*c, pred);
  return n;
}

std::vector<ExpPtr> conds_of(const Program &raw, const std::string &method) {
  Program prepared = freshen_program(normalize(raw));
  auto r = method_vcg(prepared, method);
  if (!r.ok())
    FAIL("condition generation failed: " << r.error());
  return r.value();
}

} // namespace

//===----------------------------------------------------------------------===//
// Type checking of condition sublanguage
//===----------------------------------------------------------------------===//

TEST_CASE("get_types computes the types of well-formed expressions") {
  TypeEnv ls = {{"n", DType::int_type()},
                {"p", DType::bool_type()},
                {"a", DType::array_of(DType::int_type())}};
  auto exp = [](const char *t) {
    auto r = parse_exp_text(t);
    REQUIRE(r.ok());
    return r.value();
  };
  auto r = get_types(ls, {exp("(+ n 1)"), exp("(and p (< n (len a)))"),
                          exp("(sel a n)"), exp("(old a)")});
  REQUIRE(r.ok());
  REQUIRE(r.value().size() == 4);
  CHECK(r.value()[0].kind == DType::Kind::Int);
  CHECK(r.value()[1].kind == DType::Kind::Bool);
  CHECK(r.value()[2].kind == DType::Kind::Int);
  CHECK(r.value()[3].kind == DType::Kind::Arr);

  CHECK(!get_types(ls, {exp("(+ n p)")}).ok());
  CHECK(!get_types(ls, {exp("missing")}).ok());
  CHECK(!get_types(ls, {exp("(sel n 0)")}).ok());
}

//===----------------------------------------------------------------------===//
// Call graph levels
//===----------------------------------------------------------------------===//

TEST_CASE("call levels order methods by who calls whom") {
  Program p = parse_ok(
      "(program"
      "  (method Leaf (ins) (outs) (requires) (ensures) (decreases)"
      "    (modifies) (body (skip)))"
      "  (method Even (ins (n int)) (outs (b bool))"
      "    (requires) (ensures) (decreases n) (modifies)"
      "    (body (metcall (b) Odd ((- n 1)))))"
      "  (method Odd (ins (n int)) (outs (b bool))"
      "    (requires) (ensures) (decreases n) (modifies)"
      "    (body (metcall (b) Even ((- n 1)))))"
      "  (method Top (ins) (outs) (requires) (ensures) (decreases)"
      "    (modifies) (body (then (metcall () Leaf ())"
      "                           (dec ((b bool)) (metcall (b) Even (3)))))))");
  auto levels = method_levels(p);
  CHECK(levels.at("Leaf") == levels.at("Even"));  // both are bottom groups
  CHECK(levels.at("Even") == levels.at("Odd"));   // one mutual group
  CHECK(levels.at("Top") > levels.at("Even"));    // caller sits above
}

TEST_CASE("self-recursion stays within one level") {
  Program p = load("corpus/mccarthy91.sexp");
  auto levels = method_levels(p);
  CHECK(levels.at("Main") > levels.at("M"));
}

//===----------------------------------------------------------------------===//
// Statement rules, checked structurally
//===----------------------------------------------------------------------===//

TEST_CASE("assignment substitutes through a parallel let") {
  // b := a + a + a against postcondition b > 0 becomes
  // let b = a + a + a in b > 0.
  auto stmt = [](const char *t) {
    auto s = parse_sexp(t);
    REQUIRE(s.ok());
    auto r = frontend_detail::parse_stmt(*s.value());
    REQUIRE(r.ok());
    return r.value();
  };
  auto exp = [](const char *t) {
    auto r = parse_exp_text(t);
    REQUIRE(r.ok());
    return r.value();
  };
  TypeEnv ls = {{"a", DType::int_type()}, {"b", DType::int_type()}};
  auto r = stmt_vcg({}, "", *stmt("(then (assign ((b (+ (+ a a) a)))) (return))"),
                    {exp("(> b 0)")}, {exp("(> b 0)")}, {}, {}, ls);
  REQUIRE(r.ok());
  REQUIRE(r.value().size() == 1);
  const auto *let = std::get_if<LetExp>(&r.value()[0]->node);
  REQUIRE(let != nullptr);
  REQUIRE(let->binds.size() == 1);
  CHECK(let->binds[0].first == "b");
  CHECK(exp_equal(let->binds[0].second, exp("(+ (+ a a) a)")));
  CHECK(exp_equal(let->body, exp("(> b 0)")));
}

TEST_CASE("a conditional merges both branches into one condition") {
  auto stmt = [](const char *t) {
    auto s = parse_sexp(t);
    REQUIRE(s.ok());
    auto r = frontend_detail::parse_stmt(*s.value());
    REQUIRE(r.ok());
    return r.value();
  };
  auto exp = [](const char *t) {
    auto r = parse_exp_text(t);
    REQUIRE(r.ok());
    return r.value();
  };
  TypeEnv ls = {{"x", DType::int_type()}};
  auto r = stmt_vcg({}, "",
                    *stmt("(then (if (< x 0) (assign ((x (neg x)))) (skip)) "
                          "(return))"),
                    {exp("(<= 0 x)")}, {exp("(<= 0 x)")}, {}, {}, ls);
  REQUIRE(r.ok());
  REQUIRE(r.value().size() == 1);
  CHECK(std::holds_alternative<Ite>(r.value()[0]->node));
}

TEST_CASE("reading an uninitialized declaration is rejected") {
  Program p = parse_ok(
      "(program (method M (ins) (outs (r int))"
      "  (requires) (ensures (== r r)) (decreases) (modifies)"
      "  (body (dec ((t int)) (assign ((r t)))))))");
  Program prepared = freshen_program(normalize(p));
  auto r = method_vcg(prepared, "M");
  CHECK(!r.ok());
}

TEST_CASE("updating an array outside the modifies clause is rejected") {
  Program p = load("tests/fixtures/swap_missing_modifies.sexp");
  Program prepared = freshen_program(normalize(p));
  auto r = method_vcg(prepared, "Swap");
  REQUIRE(!r.ok());
  CHECK(r.error().find("modifies") != std::string::npos);
}

TEST_CASE("assigning to a variable listed in modifies is rejected") {
  Program p = load("tests/fixtures/swap_assign_to_mods.sexp");
  Program prepared = freshen_program(normalize(p));
  auto r = method_vcg(prepared, "Swap");
  CHECK(!r.ok());
}

TEST_CASE("unknown methods and malformed clauses are rejected") {
  Program p = freshen_program(normalize(parse_ok(
      "(program (method M (ins) (outs) (requires) (ensures) (decreases)"
      " (modifies) (body (skip))))")));
  CHECK(!method_vcg(p, "NoSuch").ok());

  Program bad_req = parse_ok(
      "(program (method M (ins (n int)) (outs) (requires (+ n 1)) (ensures)"
      " (decreases) (modifies) (body (skip))))");
  CHECK(!method_vcg(freshen_program(normalize(bad_req)), "M").ok());

  Program bad_dec = parse_ok(
      "(program (method M (ins (n int)) (outs) (requires) (ensures)"
      " (decreases (< n 1)) (modifies) (body (skip))))");
  CHECK(!method_vcg(freshen_program(normalize(bad_dec)), "M").ok());

  Program bad_mod = parse_ok(
      "(program (method M (ins (n int)) (outs) (requires) (ensures)"
      " (decreases) (modifies n) (body (skip))))");
  CHECK(!method_vcg(freshen_program(normalize(bad_mod)), "M").ok());
}

//===----------------------------------------------------------------------===//
// Shape of the generated conditions on the flagship programs
//===----------------------------------------------------------------------===//

TEST_CASE("the recursive call condition carries the precondition as a let") {
  auto conds = conds_of(load("corpus/mccarthy91.sexp"), "M");
  // Somewhere in M's conditions there is a let whose body is literally true:
  // the callee has no requires, but the argument binding is still recorded.
  size_t pre_lets = count_in_all(conds, [](const Exp &e) {
    const auto *l = std::get_if<LetExp>(&e.node);
    if (!l)
      return false;
    const auto *b = std::get_if<BoolLit>(&l->body->node);
    return b && b->value;
  });
  CHECK(pre_lets >= 1);
}

TEST_CASE("the recursive call condition compares against the entry measure") {
  auto conds = conds_of(load("corpus/mccarthy91.sexp"), "M");
  // A strict comparison whose right side reads the entry snapshot.
  size_t dec_checks = count_in_all(conds, [](const Exp &e) {
    const auto *b = std::get_if<BinOp>(&e.node);
    return b && b->op == BinOpKind::Lt &&
           std::holds_alternative<OldExp>(b->rhs->node);
  });
  CHECK(dec_checks >= 1);
}

TEST_CASE("the call's continuation is quantified over the fresh result") {
  auto conds = conds_of(load("corpus/mccarthy91.sexp"), "M");
  // Beyond the leading quantifier over the in-parameter (v-named), there is
  // an inner quantifier over a generated d-named result placeholder.
  size_t inner_foralls = count_in_all(conds, [](const Exp &e) {
    const auto *f = std::get_if<ForallExp>(&e.node);
    return f && !f->bound.empty() && f->bound[0] == 'd';
  });
  CHECK(inner_foralls >= 1);
}

TEST_CASE("each array update opens its own snapshot-and-havoc frame") {
  auto conds = conds_of(load("corpus/swap.sexp"), "Swap");
  size_t setprevs = count_in_all(conds, [](const Exp &e) {
    return std::holds_alternative<SetPrevExp>(e.node);
  });
  size_t havocs = count_in_all(conds, [](const Exp &e) {
    return std::holds_alternative<ForallHeapExp>(e.node);
  });
  // Two updates, one frame each; frames nest, so both appear at least twice
  // across the condition set.
  CHECK(setprevs >= 2);
  CHECK(havocs >= 2);
}

//===----------------------------------------------------------------------===//
// Whole-program generation
//===----------------------------------------------------------------------===//

TEST_CASE("every corpus method yields closed boolean conditions") {
  for (const auto &e :
       std::filesystem::directory_iterator(DFY_SOURCE_DIR "/corpus")) {
    if (e.path().extension() != ".sexp")
      continue;
    INFO(e.path().string());
    Program p = parse_ok(slurp(e.path()));
    auto r = program_vcg(p);
    REQUIRE(r.ok());
    for (const auto &[name, conds] : r.value())
      for (const auto &c : conds) {
        INFO(name);
        CHECK(free_vars(*c).empty());
      }
  }
}

TEST_CASE("serialized conditions parse back as S-expressions") {
  Program p = load("corpus/mccarthy91.sexp");
  auto r = program_vcg(p);
  REQUIRE(r.ok());
  std::string out = print_vcs(r.value());
  auto parsed = parse_sexps(out);
  REQUIRE(parsed.ok());
  REQUIRE(parsed.value().size() == r.value().size());
  for (const auto &rec : parsed.value()) {
    REQUIRE(rec->is_list());
    CHECK(rec->list()[0]->atom().text == "vc");
  }
}

TEST_CASE("calls to lower-level methods carry no measure comparison") {
  Program p = parse_ok(
      "(program"
      "  (method Leaf (ins (n int)) (outs (r int))"
      "    (requires) (ensures) (decreases) (modifies)"
      "    (body (assign ((r n)))))"
      "  (method Top (ins (n int)) (outs (r int))"
      "    (requires) (ensures) (decreases) (modifies)"
      "    (body (metcall (r) Leaf (n)))))");
  auto conds = conds_of(p, "Top");
  size_t dec_checks = count_in_all(conds, [](const Exp &e) {
    const auto *b = std::get_if<BinOp>(&e.node);
    return b && b->op == BinOpKind::Lt &&
           std::holds_alternative<OldExp>(b->rhs->node);
  });
  CHECK(dec_checks == 0);
}
