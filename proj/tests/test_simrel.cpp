#include "dfy/simrel.hpp"

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

const Method &method_of(const Program &p, const std::string &name) {
  const Member *m = member_lookup(p, name);
  REQUIRE(m != nullptr);
  return std::get<Method>(*m);
}

} // namespace

TEST_CASE("base values relate exactly") {
  LocMap m;
  CHECK(val_rel(m, val_int(5), tv_int(5)));
  CHECK(!val_rel(m, val_int(5), tv_int(6)));
  CHECK(!val_rel(m, val_int(5), tv_bool(true)));
  CHECK(val_rel(m, val_bool(true), tv_bool(true)));
  CHECK(val_rel(m, val_str("a"), tv_str("a")));
  CHECK(!val_rel(m, val_str("a"), tv_str("b")));
}

TEST_CASE("arrays relate through the location map") {
  LocMap m;
  Value arr = val_arr(2, 0, DType::int_type());
  TVal pair = TVal{VTupleV{{tv_int(2), tv_loc(7)}}};
  CHECK(!val_rel(m, arr, pair)); // unmapped location
  m[0] = 7;
  CHECK(val_rel(m, arr, pair));
  CHECK(!val_rel(m, arr, TVal{VTupleV{{tv_int(3), tv_loc(7)}}})); // wrong len
  CHECK(!val_rel(m, arr, tv_int(2))); // not a pair at all
}

TEST_CASE("heap relation compares mapped cells elementwise") {
  LocMap m;
  m[0] = 0;
  Heap heap;
  heap.push_back(HeapValue{{val_int(1), val_int(2)}, DType::int_type()});
  TStore store;
  store.cells.push_back(ArrCell{{tv_int(1), tv_int(2)}});
  CHECK(array_rel(m, heap, store));

  std::get<ArrCell>(store.cells[0]).vs[1] = tv_int(9);
  CHECK(!array_rel(m, heap, store));

  std::get<ArrCell>(store.cells[0]).vs.pop_back();
  CHECK(!array_rel(m, heap, store));
}

TEST_CASE("matching runs are reported as matches") {
  Program p = parse_ok(
      "(program (method AbsDiff (ins (a int) (b int)) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (if (< a b) (assign ((r (- b a)))) (assign ((r (- a b))))))))");
  const Method &m = method_of(p, "AbsDiff");
  for (long a : {-3, 0, 5})
    for (long b : {-2, 0, 7}) {
      auto t = difftest_method(p, m, {arg_int(a), arg_int(b)}, 10000);
      INFO(a << " " << b << " " << t.detail);
      CHECK(t.verdict == Verdict::Match);
    }
}

TEST_CASE("array arguments and results stay related") {
  Program p = parse_ok(
      "(program (method Rev (ins (a (array int))) (outs (b (array int)))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (then (assign ((b (alloc int (len a)))))"
      "    (dec ((i int 0))"
      "      (while (< i (len a)) (invariants) (decreases (- (len a) i))"
      "             (modifies b)"
      "        (assign (((sel b i) (sel a (- (- (len a) 1) i)))"
      "                 (i (+ i 1))))))))))");
  const Method &m = method_of(p, "Rev");
  auto t = difftest_method(
      p, m,
      {arg_array(DType::int_type(),
                 {arg_int(1), arg_int(2), arg_int(3), arg_int(4)})},
      100000);
  INFO(t.detail);
  CHECK(t.verdict == Verdict::Match);
}

TEST_CASE("a failing source run is reported as a source failure") {
  // Division by zero fails in the source; asserts are stripped from the
  // target, so the distinction matters and is surfaced explicitly.
  Program p = parse_ok(
      "(program (method Bad (ins (n int)) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (assign ((r (div n 0)))))))");
  auto t = difftest_method(p, method_of(p, "Bad"), {arg_int(1)}, 10000);
  CHECK(t.verdict == Verdict::SourceFail);
}

TEST_CASE("an exhausted source clock is reported as a source timeout") {
  Program p = parse_ok(
      "(program (method Loop (ins (n int)) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (dec ((i int 0))"
      "    (while (< i n) (invariants) (decreases (- n i)) (modifies)"
      "      (assign ((i (+ i 1)))))))))");
  auto t = difftest_method(p, method_of(p, "Loop"), {arg_int(1000000)}, 10);
  CHECK(t.verdict == Verdict::SourceTimeout);
}

TEST_CASE("compiler mutations surface as mismatches") {
  Program p = parse_ok(
      "(program (method Add2 (ins (x int) (y int)) (outs (s int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (assign ((s (+ x y)))))))");
  const Method &m = method_of(p, "Add2");
  auto ok = difftest_method(p, m, {arg_int(2), arg_int(3)}, 10000);
  CHECK(ok.verdict == Verdict::Match);
  auto flipped =
      difftest_method(p, m, {arg_int(2), arg_int(3)}, 10000, Mutation::OpFlip);
  CHECK(flipped.verdict == Verdict::Mismatch);

  // The argument-order mutation bites at internal call sites, so test it
  // through a wrapper that calls a non-commutative method.
  Program sub = parse_ok(
      "(program"
      "  (method Sub2 (ins (x int) (y int)) (outs (s int))"
      "    (requires) (ensures) (decreases) (modifies)"
      "    (body (assign ((s (- x y))))))"
      "  (method Wrap (ins (x int) (y int)) (outs (s int))"
      "    (requires) (ensures) (decreases) (modifies)"
      "    (body (metcall (s) Sub2 (x y)))))");
  auto swapped = difftest_method(sub, method_of(sub, "Wrap"),
                                 {arg_int(10), arg_int(3)}, 10000,
                                 Mutation::NoArgReverse);
  CHECK(swapped.verdict == Verdict::Mismatch);
}

TEST_CASE("whole-program testing is deterministic in the seed") {
  Program p = parse_ok(
      "(program (method Triple (ins (n int)) (outs (r int))"
      "  (requires) (ensures) (decreases) (modifies)"
      "  (body (assign ((r (* 3 n)))))))");
  DiffReport r1 = difftest_program(p, 10000, 20, 99);
  DiffReport r2 = difftest_program(p, 10000, 20, 99);
  REQUIRE(r1.methods.size() == 1);
  CHECK(!r1.any_mismatch());
  CHECK(r1.methods[0].matches == 20);
  CHECK(r1.methods[0].matches == r2.methods[0].matches);
  CHECK(format_report(r1) == format_report(r2));
  auto j = report_to_json(r1);
  REQUIRE(j.is_array());
  CHECK(j[0]["method"] == "Triple");
  CHECK(j[0]["matches"] == 20);
}

TEST_CASE("inputs violating the precondition are skipped") {
  // An unsatisfiable requires clause leaves nothing to test.
  Program p = parse_ok(
      "(program (method Never (ins (n int)) (outs (r int))"
      "  (requires false) (ensures) (decreases) (modifies)"
      "  (body (assign ((r n))))))");
  DiffReport r = difftest_program(p, 10000, 5, 3);
  REQUIRE(r.methods.size() == 1);
  CHECK(r.methods[0].skipped == 5);
  CHECK(r.methods[0].matches == 0);
}

TEST_CASE("requires evaluation is checked before a trial") {
  Program p = parse_ok(
      "(program (method Pos (ins (n int)) (outs (r int))"
      "  (requires (< 0 n)) (ensures) (decreases) (modifies)"
      "  (body (assign ((r n))))))");
  const Method &m = method_of(p, "Pos");
  CHECK(requires_hold(p, m, {val_int(3)}, {}));
  CHECK(!requires_hold(p, m, {val_int(-3)}, {}));
}
