#include "dfy/sexp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace dfy;

namespace {

bool sexp_eq(const SExp &a, const SExp &b) {
  if (a.is_atom() != b.is_atom())
    return false;
  if (a.is_atom())
    return a.atom().text == b.atom().text && a.atom().quoted == b.atom().quoted;
  const auto &xs = a.list();
  const auto &ys = b.list();
  if (xs.size() != ys.size())
    return false;
  for (size_t i = 0; i < xs.size(); ++i)
    if (!sexp_eq(*xs[i], *ys[i]))
      return false;
  return true;
}

SExpPtr random_sexp(std::mt19937_64 &rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 4);
  switch (pick(rng)) {
  case 0:
    return mk_atom("sym" + std::to_string(rng() % 100));
  case 1:
    return mk_atom(std::to_string((long)(rng() % 2001) - 1000));
  case 2: {
    static const char *strs[] = {"", "a b", "with\"quote", "back\\slash",
                                 "(parens)"};
    return mk_atom(strs[rng() % 5], /*quoted=*/true);
  }
  default: {
    std::vector<SExpPtr> items;
    size_t n = rng() % 4;
    for (size_t i = 0; i < n; ++i)
      items.push_back(random_sexp(rng, depth - 1));
    return mk_list(std::move(items));
  }
  }
}

} // namespace

TEST_CASE("atoms, lists, and nesting parse") {
  auto r = parse_sexp("(a (b 12) \"x y\")");
  REQUIRE(r.ok());
  const SExp &e = *r.value();
  REQUIRE(e.is_list());
  REQUIRE(e.list().size() == 3);
  CHECK(e.list()[0]->atom().text == "a");
  REQUIRE(e.list()[1]->is_list());
  CHECK(e.list()[1]->list()[1]->atom().text == "12");
  CHECK(e.list()[2]->atom().quoted);
  CHECK(e.list()[2]->atom().text == "x y");
}

TEST_CASE("comments and whitespace are skipped") {
  auto r = parse_sexp("; header\n( a ; mid\n  b )\n; trailer\n");
  REQUIRE(r.ok());
  REQUIRE(r.value()->is_list());
  CHECK(r.value()->list().size() == 2);
}

TEST_CASE("quoted atoms support escapes") {
  auto r = parse_sexp("\"a\\\"b\\\\c\"");
  REQUIRE(r.ok());
  CHECK(r.value()->atom().text == "a\"b\\c");
  CHECK(r.value()->atom().quoted);
}

TEST_CASE("printing quotes atoms that need it") {
  auto s = mk_list({mk_atom("x"), mk_atom("a b", true), mk_atom("", true)});
  std::string out = print_sexp_flat(*s);
  CHECK(out == "(x \"a b\" \"\")");
  auto back = parse_sexp(out);
  REQUIRE(back.ok());
  CHECK(sexp_eq(*s, *back.value()));
}

TEST_CASE("parse errors carry positions") {
  auto r = parse_sexp("(a\n  (b)");
  REQUIRE(!r.ok());
  CHECK(r.error().line >= 1);

  CHECK(!parse_sexp(")").ok());
  CHECK(!parse_sexp("(a) b").ok());
  CHECK(!parse_sexp("\"unterminated").ok());
  CHECK(!parse_sexp("").ok());
}

TEST_CASE("parse_sexps reads a whole file") {
  auto r = parse_sexps("(a) 7 \"s\" ; done\n");
  REQUIRE(r.ok());
  CHECK(r.value().size() == 3);
}

TEST_CASE("print then parse is the identity on random trees") {
  std::mt19937_64 rng(20240817);
  for (int i = 0; i < 2000; ++i) {
    SExpPtr s = random_sexp(rng, 4);
    for (int width : {0, 20, 80}) {
      std::string text =
          width == 0 ? print_sexp_flat(*s) : print_sexp(*s, width);
      auto back = parse_sexp(text);
      REQUIRE(back.ok());
      REQUIRE(sexp_eq(*s, *back.value()));
    }
  }
}

TEST_CASE("wide printing stays flat, narrow printing breaks lines") {
  auto s = parse_sexp("(outer (inner one two three) (more stuff here))");
  REQUIRE(s.ok());
  CHECK(print_sexp(*s.value(), 200).find('\n') == std::string::npos);
  CHECK(print_sexp(*s.value(), 20).find('\n') != std::string::npos);
}
