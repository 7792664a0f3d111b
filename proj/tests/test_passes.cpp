#include "dfy/passes.hpp"

#include "dfy/frontend.hpp"
#include "dfy/semantics.hpp"

#include <catch2/catch_amalgamated.hpp>

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

std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto &e :
       std::filesystem::directory_iterator(DFY_SOURCE_DIR "/corpus"))
    if (e.path().extension() == ".sexp")
      out.push_back(e.path());
  std::sort(out.begin(), out.end());
  REQUIRE(out.size() >= 15);
  return out;
}

Program parse_ok(const std::string &text) {
  auto r = parse_program(text);
  if (!r.ok())
    FAIL("parse error: " << r.error().to_string());
  return r.value();
}

bool no_shadow_program(const Program &p) {
  for (const auto &m : p.members) {
    const auto *mt = std::get_if<Method>(&m);
    if (!mt)
      continue;
    std::set<std::string> declared;
    for (const auto &[n, ty] : mt->ins)
      declared.insert(n);
    for (const auto &[n, ty] : mt->outs)
      declared.insert(n);
    if (!no_shadow(declared, *mt->body))
      return false;
  }
  return true;
}

} // namespace

TEST_CASE("assert removal replaces every assert with skip") {
  Program p = parse_ok(
      "(program (method M (ins (n int)) (outs) (requires) (ensures) "
      "(decreases) (modifies) (body "
      "(then (assert (< 0 n)) (if (> n 1) (assert false) (skip))))))");
  Program q = remove_assert(p);
  std::string printed = print_program(q);
  CHECK(printed.find("assert") == std::string::npos);
  // Everything else is untouched.
  Program expect = parse_ok(
      "(program (method M (ins (n int)) (outs) (requires) (ensures) "
      "(decreases) (modifies) (body "
      "(then (skip) (if (> n 1) (skip) (skip))))))");
  CHECK(program_equal(q, expect));
}

TEST_CASE("assert removal cannot turn success into failure") {
  Program p = parse_ok(
      "(program (method Main (ins) (outs (r int)) (requires) (ensures) "
      "(decreases) (modifies) (body "
      "(then (then (assert false) (assign ((r 1)))) (return)))))");
  auto [st1, r1] = evaluate_program(1000, p);
  CHECK(r1 == StmtResult::Fail);
  auto [st2, r2] = evaluate_program(1000, remove_assert(p));
  CHECK(r2 == StmtResult::Cont);
  CHECK(value_equal(locals_find(st2.locals, "r")->value(), val_int(1)));
}

TEST_CASE("renaming makes every corpus program fresh and shadow-free") {
  for (const auto &path : corpus_files()) {
    INFO(path.string());
    Program p = normalize(parse_ok(slurp(path)));
    Program f = freshen_program(p);
    CHECK(is_fresh_program(f));
    CHECK(no_shadow_program(f));
  }
}

TEST_CASE("renaming resolves deliberate shadowing correctly") {
  // The inner declaration of n shadows the in-parameter; after renaming the
  // two must be distinct and the behavior unchanged.
  Program p = parse_ok(
      "(program (method Main (ins) (outs (r int)) (requires) (ensures) "
      "(decreases) (modifies) (body (then "
      "(dec ((n int 1)) (then (dec ((n int 2)) (assign ((r n)))) "
      "(assign ((r (+ r n)))))) (return)))))");
  CHECK(!is_fresh_program(p));
  Program f = freshen_program(p);
  CHECK(is_fresh_program(f));
  CHECK(no_shadow_program(f));
  auto [st1, r1] = evaluate_program(1000, p);
  auto [st2, r2] = evaluate_program(1000, f);
  REQUIRE(r1 == StmtResult::Cont);
  REQUIRE(r2 == StmtResult::Cont);
  // r = 2 (inner n) + 1 (outer n) either way; the freshened out-parameter
  // has a new name, so look it up through the signature.
  const std::string &out2 = std::get<Method>(f.members[0]).outs[0].first;
  CHECK(value_equal(locals_find(st1.locals, "r")->value(), val_int(3)));
  CHECK(value_equal(locals_find(st2.locals, out2)->value(), val_int(3)));
}

TEST_CASE("renaming respects let and forall binders") {
  Program p = parse_ok(
      "(program (method M (ins (x int)) (outs (r int)) "
      "(requires (forall (x int) (<= x x))) "
      "(ensures (== r (let ((x 5)) (+ x (old x))))) "
      "(decreases) (modifies) (body (then (assign ((r (+ x 5)))) "
      "(return)))))");
  Program f = freshen_program(normalize(p));
  CHECK(is_fresh_program(f));
  // The in-parameter, the quantified variable, and the let-bound variable
  // all received distinct names.
  const auto &m = std::get<Method>(f.members[0]);
  const auto *q = std::get_if<ForallExp>(&m.requires_[0]->node);
  REQUIRE(q != nullptr);
  CHECK(q->bound != m.ins[0].first);
}

TEST_CASE("renaming twice is as good as once") {
  for (const auto &path : corpus_files()) {
    Program p = normalize(parse_ok(slurp(path)));
    Program f1 = freshen_program(p);
    Program f2 = freshen_program(f1);
    CHECK(is_fresh_program(f2));
    CHECK(no_shadow_program(f2));
  }
}

TEST_CASE("renaming preserves program behavior") {
  for (const auto &path : corpus_files()) {
    INFO(path.string());
    Program p = normalize(parse_ok(slurp(path)));
    if (!member_lookup(p, "Main"))
      continue;
    Program f = freshen_program(remove_assert(p));
    auto [st1, r1] = evaluate_program(200000, p);
    auto [st2, r2] = evaluate_program(200000, f);
    if (r1 == StmtResult::Fail) {
      // Removed asserts may only ever help.
      CHECK((r2 == StmtResult::Fail || r2 == StmtResult::Cont));
      continue;
    }
    REQUIRE(r1 == r2);
    // Out values of Main agree positionally (renaming changes the names).
    const auto &m1 = std::get<Method>(*member_lookup(p, "Main"));
    const auto &m2 = std::get<Method>(*member_lookup(f, "Main"));
    REQUIRE(m1.outs.size() == m2.outs.size());
    for (size_t i = 0; i < m1.outs.size(); ++i) {
      const auto *v1 = locals_find(st1.locals, m1.outs[i].first);
      const auto *v2 = locals_find(st2.locals, m2.outs[i].first);
      REQUIRE(v1 != nullptr);
      REQUIRE(v2 != nullptr);
      REQUIRE(v1->has_value() == v2->has_value());
      if (v1->has_value() && !std::get_if<ArrV>(&(*v1)->v))
        CHECK(value_equal(**v1, **v2));
    }
  }
}
