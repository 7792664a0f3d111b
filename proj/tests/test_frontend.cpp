#include "dfy/frontend.hpp"

#include "support/gen.hpp"

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

ExpPtr exp_ok(const std::string &text) {
  auto r = parse_exp_text(text);
  REQUIRE(r.ok());
  return r.value();
}

} // namespace

TEST_CASE("every corpus program survives a print/parse round trip") {
  for (const auto &path : corpus_files()) {
    INFO(path.string());
    Program p = parse_ok(slurp(path));
    std::string printed = print_program(p);
    Program back = parse_ok(printed);
    CHECK(program_equal(p, back));
    CHECK(print_program(back) == printed);
  }
}

TEST_CASE("random well-formed programs survive a print/parse round trip") {
  std::mt19937_64 rng(411);
  for (int i = 0; i < 1000; ++i) {
    Program p = testgen::random_program(rng);
    std::string printed = print_program(p);
    INFO(printed);
    Program back = parse_ok(printed);
    CHECK(program_equal(p, back));
  }
}

TEST_CASE("expression forms parse to the expected nodes") {
  CHECK(std::holds_alternative<IntLit>(exp_ok("-42")->node));
  CHECK(std::holds_alternative<BoolLit>(exp_ok("true")->node));
  CHECK(std::holds_alternative<StrLit>(exp_ok("\"hi\"")->node));
  CHECK(std::holds_alternative<Var>(exp_ok("count")->node));
  CHECK(std::holds_alternative<Ite>(exp_ok("(ite p 1 2)")->node));
  CHECK(std::holds_alternative<ArrLen>(exp_ok("(len a)")->node));
  CHECK(std::holds_alternative<ArrSel>(exp_ok("(sel a 0)")->node));
  CHECK(std::holds_alternative<FunCall>(exp_ok("(call f 1 2)")->node));
  CHECK(std::holds_alternative<ForallExp>(
      exp_ok("(forall (k int) (<= 0 k))")->node));
  CHECK(std::holds_alternative<LetExp>(exp_ok("(let ((t 1)) t)")->node));
  CHECK(std::holds_alternative<OldExp>(exp_ok("(old x)")->node));
  CHECK(std::holds_alternative<OldHeapExp>(exp_ok("(oldheap x)")->node));
  CHECK(std::holds_alternative<PrevExp>(exp_ok("(prev x)")->node));
  CHECK(std::holds_alternative<PrevHeapExp>(exp_ok("(prevheap x)")->node));
  CHECK(std::holds_alternative<SetPrevExp>(exp_ok("(setprev x)")->node));
  CHECK(std::holds_alternative<ForallHeapExp>(
      exp_ok("(forallheap (a b) true)")->node));
  CHECK(std::holds_alternative<BinOp>(exp_ok("(==> p q)")->node));
}

TEST_CASE("malformed input is rejected with a diagnostic") {
  CHECK(!parse_program("(method M)").ok());
  CHECK(!parse_program("(program (method))").ok());
  CHECK(!parse_exp_text("(ite p 1)").ok());
  CHECK(!parse_exp_text("(forall (x unknown-type) true)").ok());
  CHECK(!parse_exp_text("(nosuchtag 1 2)").ok());
  CHECK(!parse_exp_text("(call 12 x)").ok());
  auto r = parse_program("(program (function f (ins) int (+ 1)))");
  REQUIRE(!r.ok());
  CHECK(!r.error().message.empty());
}

namespace {

Program one_method(const std::string &header_and_body) {
  return parse_ok("(program " + header_and_body + ")");
}

const Method &first_method(const Program &p) {
  return std::get<Method>(p.members.at(0));
}

} // namespace

TEST_CASE("normalization appends a return unless the body already ends in one") {
  Program p = one_method("(method M (ins) (outs) (requires) (ensures) "
                         "(decreases) (modifies) (body (skip)))");
  Program n = normalize(p);
  const Stmt &body = *first_method(n).body;
  const auto *t = std::get_if<ThenStmt>(&body.node);
  REQUIRE(t != nullptr);
  CHECK(std::holds_alternative<SkipStmt>(t->s1->node));
  CHECK(std::holds_alternative<ReturnStmt>(t->s2->node));

  Program already = one_method(
      "(method M (ins) (outs) (requires) (ensures) (decreases) (modifies) "
      "(body (then (skip) (return))))");
  Program n2 = normalize(already);
  CHECK(program_equal(n2, already));
}

TEST_CASE("normalization wraps bare in-parameters of ensures in old") {
  Program p = one_method(
      "(method M (ins (n int)) (outs (r int)) (requires) "
      "(ensures (== r (+ n 1))) (decreases) (modifies) (body (return)))");
  Program n = normalize(p);
  ExpPtr expected = exp_ok("(== r (+ (old n) 1))");
  REQUIRE(first_method(n).ensures.size() == 1);
  CHECK(exp_equal(first_method(n).ensures[0], expected));
}

TEST_CASE("normalization wraps in-parameters under explicit old too") {
  Program p = one_method(
      "(method Swap (ins (a (array int)) (i int) (j int)) (outs) (requires) "
      "(ensures (== (sel a i) (old (sel a j)))) (decreases) (modifies a) "
      "(body (return)))");
  Program n = normalize(p);
  // Wrapping inside an old region changes nothing semantically: the entry
  // snapshot is set, not swapped, so nested old is idempotent.
  ExpPtr expected =
      exp_ok("(== (sel (old a) (old i)) (old (sel (old a) (old j))))");
  CHECK(exp_equal(first_method(n).ensures[0], expected));
}

TEST_CASE("normalization is idempotent") {
  for (const auto &path : corpus_files()) {
    INFO(path.string());
    Program p = parse_ok(slurp(path));
    Program n1 = normalize(p);
    Program n2 = normalize(n1);
    CHECK(program_equal(n1, n2));
  }
}

TEST_CASE("requires clauses are not old-wrapped") {
  Program p = one_method(
      "(method M (ins (n int)) (outs) (requires (<= 0 n)) (ensures) "
      "(decreases) (modifies) (body (return)))");
  Program n = normalize(p);
  CHECK(exp_equal(first_method(n).requires_[0], exp_ok("(<= 0 n)")));
}
