//===--- frontend.hpp - Program parser, printer, and normalizer -------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Concrete S-expression syntax for programs:
//
//   program ::= (program member*)
//   member  ::= (method NAME (ins bind*) (outs bind*) (requires exp*)
//                (ensures exp*) (decreases exp*) (modifies NAME*) (body stmt))
//             | (function NAME (ins bind*) TYPE exp)
//   bind    ::= (NAME TYPE)
//   TYPE    ::= int | bool | string | (array TYPE)
//   exp     ::= INTEGER | true | false | STRING | NAME
//             | (not exp) | (neg exp)
//             | (+|-|*|div|mod|<|<=|>|>=|==|!=|and|or|==> exp exp)
//             | (ite exp exp exp) | (len exp) | (sel exp exp)
//             | (call NAME exp*) | (forall (NAME TYPE) exp)
//             | (let ((NAME exp)*) exp)
//             | (old exp) | (oldheap exp) | (prev exp) | (prevheap exp)
//             | (setprev exp) | (forallheap (NAME*) exp)
//   stmt    ::= (skip) | (assert exp) | (then stmt stmt)
//             | (if exp stmt stmt)
//             | (dec ((NAME TYPE exp?)*) stmt)
//             | (assign ((lhs rhs)*))
//             | (while exp (invariants exp*) (decreases exp*)
//                (modifies NAME*) stmt)
//             | (return) | (metcall (NAME*) NAME (exp*))
//   lhs     ::= NAME | (sel exp exp)
//   rhs     ::= exp | (alloc TYPE exp)
//
// Normalization appends a final (return) to method bodies that do not end in
// one and wraps in-parameter reads inside ensures clauses with (old ...).
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp"
#include "dfy/sexp.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace dfy {

namespace frontend_detail {

using PR = Result<ExpPtr, ParseError>;

inline ParseError at(const SExp &s, std::string msg) {
  return ParseError{std::move(msg), s.line, s.col};
}

inline bool is_integer_atom(const std::string &t) {
  size_t i = (t.size() > 1 && t[0] == '-') ? 1 : 0;
  if (i >= t.size())
    return false;
  for (; i < t.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(t[i])))
      return false;
  return true;
}

inline bool is_name_atom(const SExp &s) {
  if (!s.is_atom() || s.atom().quoted)
    return false;
  const std::string &t = s.atom().text;
  return !t.empty() && !is_integer_atom(t) && t != "true" && t != "false";
}

inline Result<std::string, ParseError> parse_name(const SExp &s) {
  if (!is_name_atom(s))
    return Result<std::string, ParseError>::err(at(s, "expected a name"));
  return s.atom().text;
}

inline Result<DType, ParseError> parse_type(const SExp &s) {
  using R = Result<DType, ParseError>;
  if (s.is_atom() && !s.atom().quoted) {
    const std::string &t = s.atom().text;
    if (t == "int")
      return R(DType::int_type());
    if (t == "bool")
      return R(DType::bool_type());
    if (t == "string")
      return R(DType::str_type());
    return R::err(at(s, "unknown type '" + t + "'"));
  }
  if (s.is_list() && s.list().size() == 2 && s.list()[0]->is_atom() &&
      s.list()[0]->atom().text == "array" && !s.list()[0]->atom().quoted) {
    auto elem = parse_type(*s.list()[1]);
    if (!elem.ok())
      return elem;
    return R(DType::array_of(std::move(elem.value())));
  }
  return R::err(at(s, "expected a type: int, bool, string, or (array TYPE)"));
}

inline const std::map<std::string, BinOpKind> &binop_table() {
  static const std::map<std::string, BinOpKind> t = {
      {"+", BinOpKind::Add},   {"-", BinOpKind::Sub},
      {"*", BinOpKind::Mul},   {"div", BinOpKind::Div},
      {"mod", BinOpKind::Mod}, {"<", BinOpKind::Lt},
      {"<=", BinOpKind::Le},   {">", BinOpKind::Gt},
      {">=", BinOpKind::Ge},   {"==", BinOpKind::Eq},
      {"!=", BinOpKind::Neq},  {"and", BinOpKind::And},
      {"or", BinOpKind::Or},   {"==>", BinOpKind::Imp}};
  return t;
}

inline PR parse_exp(const SExp &s) {
  if (s.is_atom()) {
    const auto &a = s.atom();
    if (a.quoted)
      return PR(mk_str(a.text));
    if (a.text == "true")
      return PR(mk_bool(true));
    if (a.text == "false")
      return PR(mk_bool(false));
    if (is_integer_atom(a.text))
      return PR(mk_int(BigInt(a.text)));
    if (is_name_atom(s))
      return PR(mk_var(a.text));
    return PR::err(at(s, "expected an expression atom"));
  }
  const auto &xs = s.list();
  if (xs.empty() || !xs[0]->is_atom() || xs[0]->atom().quoted)
    return PR::err(at(s, "expected a tagged expression list"));
  const std::string &tag = xs[0]->atom().text;
  auto arity = [&](size_t n) -> bool { return xs.size() == n + 1; };
  auto sub = [&](size_t i) { return parse_exp(*xs[i]); };

  if (tag == "not" || tag == "neg") {
    if (!arity(1))
      return PR::err(at(s, "(" + tag + " exp) takes 1 argument"));
    auto e = sub(1);
    if (!e.ok())
      return e;
    return PR(
        mk_unop(tag == "not" ? UnOpKind::Not : UnOpKind::Neg, e.value()));
  }
  if (auto it = binop_table().find(tag); it != binop_table().end()) {
    if (!arity(2))
      return PR::err(at(s, "(" + tag + " exp exp) takes 2 arguments"));
    auto a = sub(1), b = sub(2);
    if (!a.ok())
      return a;
    if (!b.ok())
      return b;
    return PR(mk_binop(it->second, a.value(), b.value()));
  }
  if (tag == "ite") {
    if (!arity(3))
      return PR::err(at(s, "(ite exp exp exp) takes 3 arguments"));
    auto c = sub(1), t = sub(2), e = sub(3);
    if (!c.ok())
      return c;
    if (!t.ok())
      return t;
    if (!e.ok())
      return e;
    return PR(mk_ite(c.value(), t.value(), e.value()));
  }
  if (tag == "len") {
    if (!arity(1))
      return PR::err(at(s, "(len exp) takes 1 argument"));
    auto a = sub(1);
    if (!a.ok())
      return a;
    return PR(mk_len(a.value()));
  }
  if (tag == "sel") {
    if (!arity(2))
      return PR::err(at(s, "(sel exp exp) takes 2 arguments"));
    auto a = sub(1), i = sub(2);
    if (!a.ok())
      return a;
    if (!i.ok())
      return i;
    return PR(mk_sel(a.value(), i.value()));
  }
  if (tag == "call") {
    if (xs.size() < 2)
      return PR::err(at(s, "(call NAME exp*) needs a function name"));
    auto n = parse_name(*xs[1]);
    if (!n.ok())
      return PR::err(n.error());
    std::vector<ExpPtr> args;
    for (size_t i = 2; i < xs.size(); ++i) {
      auto a = parse_exp(*xs[i]);
      if (!a.ok())
        return a;
      args.push_back(std::move(a.value()));
    }
    return PR(mk_exp(FunCall{n.value(), std::move(args)}));
  }
  if (tag == "forall") {
    if (!arity(2))
      return PR::err(at(s, "(forall (NAME TYPE) exp) takes 2 arguments"));
    const SExp &bind = *xs[1];
    if (!bind.is_list() || bind.list().size() != 2)
      return PR::err(at(bind, "forall binder must be (NAME TYPE)"));
    auto n = parse_name(*bind.list()[0]);
    if (!n.ok())
      return PR::err(n.error());
    auto ty = parse_type(*bind.list()[1]);
    if (!ty.ok())
      return PR::err(ty.error());
    auto body = sub(2);
    if (!body.ok())
      return body;
    return PR(mk_forall(n.value(), ty.value(), body.value()));
  }
  if (tag == "let") {
    if (!arity(2))
      return PR::err(at(s, "(let ((NAME exp)*) exp) takes 2 arguments"));
    const SExp &bs = *xs[1];
    if (!bs.is_list())
      return PR::err(at(bs, "let bindings must be a list"));
    std::vector<std::pair<std::string, ExpPtr>> binds;
    std::set<std::string> seen;
    for (const auto &b : bs.list()) {
      if (!b->is_list() || b->list().size() != 2)
        return PR::err(at(*b, "let binding must be (NAME exp)"));
      auto n = parse_name(*b->list()[0]);
      if (!n.ok())
        return PR::err(n.error());
      if (!seen.insert(n.value()).second)
        return PR::err(at(*b, "duplicate let binding '" + n.value() + "'"));
      auto rhs = parse_exp(*b->list()[1]);
      if (!rhs.ok())
        return rhs;
      binds.emplace_back(n.value(), std::move(rhs.value()));
    }
    auto body = sub(2);
    if (!body.ok())
      return body;
    return PR(mk_let(std::move(binds), body.value()));
  }
  if (tag == "old" || tag == "oldheap" || tag == "prev" || tag == "prevheap" ||
      tag == "setprev") {
    if (!arity(1))
      return PR::err(at(s, "(" + tag + " exp) takes 1 argument"));
    auto e = sub(1);
    if (!e.ok())
      return e;
    if (tag == "old")
      return PR(mk_old(e.value()));
    if (tag == "oldheap")
      return PR(mk_exp(OldHeapExp{e.value()}));
    if (tag == "prev")
      return PR(mk_prev(e.value()));
    if (tag == "prevheap")
      return PR(mk_prev_heap(e.value()));
    return PR(mk_set_prev(e.value()));
  }
  if (tag == "forallheap") {
    if (!arity(2))
      return PR::err(at(s, "(forallheap (NAME*) exp) takes 2 arguments"));
    const SExp &hs = *xs[1];
    if (!hs.is_list())
      return PR::err(at(hs, "forallheap havoc set must be a list of names"));
    std::vector<std::string> havoc;
    for (const auto &h : hs.list()) {
      auto n = parse_name(*h);
      if (!n.ok())
        return PR::err(n.error());
      havoc.push_back(n.value());
    }
    auto body = sub(2);
    if (!body.ok())
      return body;
    return PR(mk_forall_heap(std::move(havoc), body.value()));
  }
  return PR::err(at(s, "unknown expression tag '" + tag + "'"));
}

using SR = Result<StmtPtr, ParseError>;

inline Result<Lhs, ParseError> parse_lhs(const SExp &s) {
  using R = Result<Lhs, ParseError>;
  if (s.is_atom()) {
    auto n = parse_name(s);
    if (!n.ok())
      return R::err(n.error());
    return R(Lhs{VarLhs{n.value()}});
  }
  if (s.is_list() && s.list().size() == 3 && s.list()[0]->is_atom() &&
      s.list()[0]->atom().text == "sel") {
    auto a = parse_exp(*s.list()[1]);
    if (!a.ok())
      return R::err(a.error());
    auto i = parse_exp(*s.list()[2]);
    if (!i.ok())
      return R::err(i.error());
    return R(Lhs{ArrSelLhs{a.value(), i.value()}});
  }
  return R::err(at(s, "expected NAME or (sel exp exp) as assignment target"));
}

inline Result<Rhs, ParseError> parse_rhs(const SExp &s) {
  using R = Result<Rhs, ParseError>;
  if (s.is_list() && !s.list().empty() && s.list()[0]->is_atom() &&
      s.list()[0]->atom().text == "alloc" && !s.list()[0]->atom().quoted) {
    if (s.list().size() != 3)
      return R::err(at(s, "(alloc TYPE exp) takes 2 arguments"));
    auto ty = parse_type(*s.list()[1]);
    if (!ty.ok())
      return R::err(ty.error());
    auto len = parse_exp(*s.list()[2]);
    if (!len.ok())
      return R::err(len.error());
    return R(Rhs{ArrAllocRhs{ty.value(), len.value()}});
  }
  auto e = parse_exp(s);
  if (!e.ok())
    return R::err(e.error());
  return R(Rhs{ExpRhs{e.value()}});
}

inline SR parse_stmt(const SExp &s) {
  if (!s.is_list() || s.list().empty() || !s.list()[0]->is_atom() ||
      s.list()[0]->atom().quoted)
    return SR::err(at(s, "expected a tagged statement list"));
  const auto &xs = s.list();
  const std::string &tag = xs[0]->atom().text;
  auto arity = [&](size_t n) -> bool { return xs.size() == n + 1; };

  if (tag == "skip") {
    if (!arity(0))
      return SR::err(at(s, "(skip) takes no arguments"));
    return SR(mk_skip());
  }
  if (tag == "return") {
    if (!arity(0))
      return SR::err(at(s, "(return) takes no arguments"));
    return SR(mk_return());
  }
  if (tag == "assert") {
    if (!arity(1))
      return SR::err(at(s, "(assert exp) takes 1 argument"));
    auto e = parse_exp(*xs[1]);
    if (!e.ok())
      return SR::err(e.error());
    return SR(mk_assert(e.value()));
  }
  if (tag == "then") {
    if (!arity(2))
      return SR::err(at(s, "(then stmt stmt) takes 2 arguments"));
    auto a = parse_stmt(*xs[1]);
    if (!a.ok())
      return a;
    auto b = parse_stmt(*xs[2]);
    if (!b.ok())
      return b;
    return SR(mk_then(a.value(), b.value()));
  }
  if (tag == "if") {
    if (!arity(3))
      return SR::err(at(s, "(if exp stmt stmt) takes 3 arguments"));
    auto g = parse_exp(*xs[1]);
    if (!g.ok())
      return SR::err(g.error());
    auto t = parse_stmt(*xs[2]);
    if (!t.ok())
      return t;
    auto e = parse_stmt(*xs[3]);
    if (!e.ok())
      return e;
    return SR(mk_if(g.value(), t.value(), e.value()));
  }
  if (tag == "dec") {
    if (!arity(2))
      return SR::err(at(s, "(dec ((NAME TYPE exp?)*) stmt) takes 2 arguments"));
    const SExp &bs = *xs[1];
    if (!bs.is_list())
      return SR::err(at(bs, "dec bindings must be a list"));
    std::vector<DecStmt::Bind> binds;
    for (const auto &b : bs.list()) {
      if (!b->is_list() || b->list().size() < 2 || b->list().size() > 3)
        return SR::err(at(*b, "dec binding must be (NAME TYPE exp?)"));
      auto n = parse_name(*b->list()[0]);
      if (!n.ok())
        return SR::err(n.error());
      auto ty = parse_type(*b->list()[1]);
      if (!ty.ok())
        return SR::err(ty.error());
      std::optional<ExpPtr> init;
      if (b->list().size() == 3) {
        auto e = parse_exp(*b->list()[2]);
        if (!e.ok())
          return SR::err(e.error());
        init = e.value();
      }
      binds.push_back(DecStmt::Bind{n.value(), ty.value(), std::move(init)});
    }
    auto scope = parse_stmt(*xs[2]);
    if (!scope.ok())
      return scope;
    return SR(mk_stmt(DecStmt{std::move(binds), scope.value()}));
  }
  if (tag == "assign") {
    if (!arity(1))
      return SR::err(at(s, "(assign ((lhs rhs)*)) takes 1 argument"));
    const SExp &ps = *xs[1];
    if (!ps.is_list())
      return SR::err(at(ps, "assign pairs must be a list"));
    std::vector<std::pair<Lhs, Rhs>> pairs;
    for (const auto &p : ps.list()) {
      if (!p->is_list() || p->list().size() != 2)
        return SR::err(at(*p, "assign pair must be (lhs rhs)"));
      auto l = parse_lhs(*p->list()[0]);
      if (!l.ok())
        return SR::err(l.error());
      auto r = parse_rhs(*p->list()[1]);
      if (!r.ok())
        return SR::err(r.error());
      pairs.emplace_back(std::move(l.value()), std::move(r.value()));
    }
    return SR(mk_stmt(AssignStmt{std::move(pairs)}));
  }
  if (tag == "while") {
    if (!arity(5))
      return SR::err(at(s, "(while exp (invariants exp*) (decreases exp*) "
                           "(modifies NAME*) stmt) takes 5 arguments"));
    auto g = parse_exp(*xs[1]);
    if (!g.ok())
      return SR::err(g.error());
    auto section = [&](const SExp &sec, const char *kw,
                       std::vector<ExpPtr> &out) -> std::optional<ParseError> {
      if (!sec.is_list() || sec.list().empty() || !sec.list()[0]->is_atom() ||
          sec.list()[0]->atom().text != kw)
        return at(sec, std::string("expected (") + kw + " exp*)");
      for (size_t i = 1; i < sec.list().size(); ++i) {
        auto e = parse_exp(*sec.list()[i]);
        if (!e.ok())
          return e.error();
        out.push_back(std::move(e.value()));
      }
      return std::nullopt;
    };
    std::vector<ExpPtr> invs, decrs;
    if (auto err = section(*xs[2], "invariants", invs))
      return SR::err(*err);
    if (auto err = section(*xs[3], "decreases", decrs))
      return SR::err(*err);
    const SExp &ms = *xs[4];
    if (!ms.is_list() || ms.list().empty() || !ms.list()[0]->is_atom() ||
        ms.list()[0]->atom().text != "modifies")
      return SR::err(at(ms, "expected (modifies NAME*)"));
    std::vector<std::string> mods;
    for (size_t i = 1; i < ms.list().size(); ++i) {
      auto n = parse_name(*ms.list()[i]);
      if (!n.ok())
        return SR::err(n.error());
      mods.push_back(n.value());
    }
    auto body = parse_stmt(*xs[5]);
    if (!body.ok())
      return body;
    return SR(mk_stmt(WhileStmt{g.value(), std::move(invs), std::move(decrs),
                                std::move(mods), body.value()}));
  }
  if (tag == "metcall") {
    if (!arity(3))
      return SR::err(at(s, "(metcall (NAME*) NAME (exp*)) takes 3 arguments"));
    const SExp &ls = *xs[1];
    if (!ls.is_list())
      return SR::err(at(ls, "metcall targets must be a list of names"));
    std::vector<std::string> lhss;
    for (const auto &l : ls.list()) {
      auto n = parse_name(*l);
      if (!n.ok())
        return SR::err(n.error());
      lhss.push_back(n.value());
    }
    auto m = parse_name(*xs[2]);
    if (!m.ok())
      return SR::err(m.error());
    const SExp &as = *xs[3];
    if (!as.is_list())
      return SR::err(at(as, "metcall arguments must be a list"));
    std::vector<ExpPtr> args;
    for (const auto &a : as.list()) {
      auto e = parse_exp(*a);
      if (!e.ok())
        return SR::err(e.error());
      args.push_back(std::move(e.value()));
    }
    return SR(
        mk_stmt(MetCallStmt{std::move(lhss), m.value(), std::move(args)}));
  }
  return SR::err(at(s, "unknown statement tag '" + tag + "'"));
}

inline Result<std::vector<TypedName>, ParseError>
parse_binds(const SExp &s, const char *kw) {
  using R = Result<std::vector<TypedName>, ParseError>;
  if (!s.is_list() || s.list().empty() || !s.list()[0]->is_atom() ||
      s.list()[0]->atom().text != kw)
    return R::err(at(s, std::string("expected (") + kw + " (NAME TYPE)*)"));
  std::vector<TypedName> out;
  for (size_t i = 1; i < s.list().size(); ++i) {
    const SExp &b = *s.list()[i];
    if (!b.is_list() || b.list().size() != 2)
      return R::err(at(b, "binder must be (NAME TYPE)"));
    auto n = parse_name(*b.list()[0]);
    if (!n.ok())
      return R::err(n.error());
    auto ty = parse_type(*b.list()[1]);
    if (!ty.ok())
      return R::err(ty.error());
    out.emplace_back(n.value(), ty.value());
  }
  return R(std::move(out));
}

inline Result<std::vector<ExpPtr>, ParseError> parse_exp_section(const SExp &s,
                                                                 const char *kw) {
  using R = Result<std::vector<ExpPtr>, ParseError>;
  if (!s.is_list() || s.list().empty() || !s.list()[0]->is_atom() ||
      s.list()[0]->atom().text != kw)
    return R::err(at(s, std::string("expected (") + kw + " exp*)"));
  std::vector<ExpPtr> out;
  for (size_t i = 1; i < s.list().size(); ++i) {
    auto e = parse_exp(*s.list()[i]);
    if (!e.ok())
      return R::err(e.error());
    out.push_back(std::move(e.value()));
  }
  return R(std::move(out));
}

inline Result<Member, ParseError> parse_member(const SExp &s) {
  using R = Result<Member, ParseError>;
  if (!s.is_list() || s.list().empty() || !s.list()[0]->is_atom())
    return R::err(at(s, "expected (method ...) or (function ...)"));
  const auto &xs = s.list();
  const std::string &tag = xs[0]->atom().text;
  if (tag == "method") {
    if (xs.size() != 9)
      return R::err(at(s, "(method NAME (ins ...) (outs ...) (requires ...) "
                           "(ensures ...) (decreases ...) (modifies ...) "
                           "(body stmt)) takes 8 arguments"));
    auto name = parse_name(*xs[1]);
    if (!name.ok())
      return R::err(name.error());
    auto ins = parse_binds(*xs[2], "ins");
    if (!ins.ok())
      return R::err(ins.error());
    auto outs = parse_binds(*xs[3], "outs");
    if (!outs.ok())
      return R::err(outs.error());
    auto reqs = parse_exp_section(*xs[4], "requires");
    if (!reqs.ok())
      return R::err(reqs.error());
    auto ens = parse_exp_section(*xs[5], "ensures");
    if (!ens.ok())
      return R::err(ens.error());
    auto decs = parse_exp_section(*xs[6], "decreases");
    if (!decs.ok())
      return R::err(decs.error());
    const SExp &ms = *xs[7];
    if (!ms.is_list() || ms.list().empty() || !ms.list()[0]->is_atom() ||
        ms.list()[0]->atom().text != "modifies")
      return R::err(at(ms, "expected (modifies NAME*)"));
    std::vector<std::string> mods;
    for (size_t i = 1; i < ms.list().size(); ++i) {
      auto n = parse_name(*ms.list()[i]);
      if (!n.ok())
        return R::err(n.error());
      mods.push_back(n.value());
    }
    const SExp &bd = *xs[8];
    if (!bd.is_list() || bd.list().size() != 2 || !bd.list()[0]->is_atom() ||
        bd.list()[0]->atom().text != "body")
      return R::err(at(bd, "expected (body stmt)"));
    auto body = parse_stmt(*bd.list()[1]);
    if (!body.ok())
      return R::err(body.error());
    return R(Member{Method{name.value(), std::move(ins.value()),
                           std::move(reqs.value()), std::move(ens.value()),
                           std::move(decs.value()), std::move(mods),
                           std::move(outs.value()), body.value()}});
  }
  if (tag == "function") {
    if (xs.size() != 5)
      return R::err(
          at(s, "(function NAME (ins ...) TYPE exp) takes 4 arguments"));
    auto name = parse_name(*xs[1]);
    if (!name.ok())
      return R::err(name.error());
    auto ins = parse_binds(*xs[2], "ins");
    if (!ins.ok())
      return R::err(ins.error());
    auto ty = parse_type(*xs[3]);
    if (!ty.ok())
      return R::err(ty.error());
    auto body = parse_exp(*xs[4]);
    if (!body.ok())
      return R::err(body.error());
    return R(Member{Function{name.value(), std::move(ins.value()), ty.value(),
                             body.value()}});
  }
  return R::err(at(s, "unknown member tag '" + tag + "'"));
}

} // namespace frontend_detail

inline Result<Program, ParseError> parse_program_sexp(const SExp &s) {
  using R = Result<Program, ParseError>;
  if (!s.is_list() || s.list().empty() || !s.list()[0]->is_atom() ||
      s.list()[0]->atom().text != "program")
    return R::err(frontend_detail::at(s, "expected (program member*)"));
  Program p;
  for (size_t i = 1; i < s.list().size(); ++i) {
    auto m = frontend_detail::parse_member(*s.list()[i]);
    if (!m.ok())
      return R::err(m.error());
    p.members.push_back(std::move(m.value()));
  }
  return R(std::move(p));
}

inline Result<Program, ParseError> parse_program(std::string_view text) {
  auto sx = parse_sexp(text);
  if (!sx.ok())
    return Result<Program, ParseError>::err(sx.error());
  return parse_program_sexp(*sx.value());
}

/// Parse a single expression from text (used for VC files and tests).
inline Result<ExpPtr, ParseError> parse_exp_text(std::string_view text) {
  auto sx = parse_sexp(text);
  if (!sx.ok())
    return Result<ExpPtr, ParseError>::err(sx.error());
  return frontend_detail::parse_exp(*sx.value());
}

//===----------------------------------------------------------------------===//
// Printing (AST -> SExp -> text)
//===----------------------------------------------------------------------===//

namespace frontend_detail {

inline SExpPtr type_to_sexp(const DType &t) {
  switch (t.kind) {
  case DType::Kind::Int:
    return mk_atom("int");
  case DType::Kind::Bool:
    return mk_atom("bool");
  case DType::Kind::Str:
    return mk_atom("string");
  case DType::Kind::Arr:
    return mk_list({mk_atom("array"), type_to_sexp(t.element())});
  }
  return mk_atom("int");
}

inline const char *binop_name(BinOpKind op) {
  switch (op) {
  case BinOpKind::Add:
    return "+";
  case BinOpKind::Sub:
    return "-";
  case BinOpKind::Mul:
    return "*";
  case BinOpKind::Div:
    return "div";
  case BinOpKind::Mod:
    return "mod";
  case BinOpKind::Lt:
    return "<";
  case BinOpKind::Le:
    return "<=";
  case BinOpKind::Gt:
    return ">";
  case BinOpKind::Ge:
    return ">=";
  case BinOpKind::Eq:
    return "==";
  case BinOpKind::Neq:
    return "!=";
  case BinOpKind::And:
    return "and";
  case BinOpKind::Or:
    return "or";
  case BinOpKind::Imp:
    return "==>";
  }
  return "?";
}

inline SExpPtr exp_to_sexp(const Exp &e) {
  struct V {
    SExpPtr operator()(const IntLit &x) const {
      return mk_atom(x.value.str());
    }
    SExpPtr operator()(const BoolLit &x) const {
      return mk_atom(x.value ? "true" : "false");
    }
    SExpPtr operator()(const StrLit &x) const {
      return mk_atom(x.value, /*quoted=*/true);
    }
    SExpPtr operator()(const Var &x) const { return mk_atom(x.name); }
    SExpPtr operator()(const UnOp &x) const {
      return mk_list({mk_atom(x.op == UnOpKind::Not ? "not" : "neg"),
                      exp_to_sexp(*x.operand)});
    }
    SExpPtr operator()(const BinOp &x) const {
      return mk_list({mk_atom(binop_name(x.op)), exp_to_sexp(*x.lhs),
                      exp_to_sexp(*x.rhs)});
    }
    SExpPtr operator()(const Ite &x) const {
      return mk_list({mk_atom("ite"), exp_to_sexp(*x.cond),
                      exp_to_sexp(*x.thn), exp_to_sexp(*x.els)});
    }
    SExpPtr operator()(const ArrLen &x) const {
      return mk_list({mk_atom("len"), exp_to_sexp(*x.arr)});
    }
    SExpPtr operator()(const ArrSel &x) const {
      return mk_list(
          {mk_atom("sel"), exp_to_sexp(*x.arr), exp_to_sexp(*x.idx)});
    }
    SExpPtr operator()(const FunCall &x) const {
      std::vector<SExpPtr> items = {mk_atom("call"), mk_atom(x.name)};
      for (const auto &a : x.args)
        items.push_back(exp_to_sexp(*a));
      return mk_list(std::move(items));
    }
    SExpPtr operator()(const ForallExp &x) const {
      return mk_list({mk_atom("forall"),
                      mk_list({mk_atom(x.bound), type_to_sexp(x.ty)}),
                      exp_to_sexp(*x.body)});
    }
    SExpPtr operator()(const LetExp &x) const {
      std::vector<SExpPtr> binds;
      for (const auto &[n, rhs] : x.binds)
        binds.push_back(mk_list({mk_atom(n), exp_to_sexp(*rhs)}));
      return mk_list({mk_atom("let"), mk_list(std::move(binds)),
                      exp_to_sexp(*x.body)});
    }
    SExpPtr operator()(const OldExp &x) const {
      return mk_list({mk_atom("old"), exp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const OldHeapExp &x) const {
      return mk_list({mk_atom("oldheap"), exp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const PrevExp &x) const {
      return mk_list({mk_atom("prev"), exp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const PrevHeapExp &x) const {
      return mk_list({mk_atom("prevheap"), exp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const SetPrevExp &x) const {
      return mk_list({mk_atom("setprev"), exp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const ForallHeapExp &x) const {
      std::vector<SExpPtr> havoc;
      for (const auto &n : x.havoc)
        havoc.push_back(mk_atom(n));
      return mk_list({mk_atom("forallheap"), mk_list(std::move(havoc)),
                      exp_to_sexp(*x.body)});
    }
  };
  return std::visit(V{}, e.node);
}

inline SExpPtr lhs_to_sexp(const Lhs &l) {
  if (const auto *v = std::get_if<VarLhs>(&l))
    return mk_atom(v->name);
  const auto &s = std::get<ArrSelLhs>(l);
  return mk_list({mk_atom("sel"), exp_to_sexp(*s.arr), exp_to_sexp(*s.idx)});
}

inline SExpPtr rhs_to_sexp(const Rhs &r) {
  if (const auto *e = std::get_if<ExpRhs>(&r))
    return exp_to_sexp(*e->e);
  const auto &a = std::get<ArrAllocRhs>(r);
  return mk_list(
      {mk_atom("alloc"), type_to_sexp(a.elem_ty), exp_to_sexp(*a.len)});
}

inline SExpPtr stmt_to_sexp(const Stmt &s) {
  struct V {
    SExpPtr operator()(const SkipStmt &) const {
      return mk_list({mk_atom("skip")});
    }
    SExpPtr operator()(const ReturnStmt &) const {
      return mk_list({mk_atom("return")});
    }
    SExpPtr operator()(const AssertStmt &x) const {
      return mk_list({mk_atom("assert"), exp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const ThenStmt &x) const {
      return mk_list({mk_atom("then"), stmt_to_sexp(*x.s1),
                      stmt_to_sexp(*x.s2)});
    }
    SExpPtr operator()(const IfStmt &x) const {
      return mk_list({mk_atom("if"), exp_to_sexp(*x.guard),
                      stmt_to_sexp(*x.thn), stmt_to_sexp(*x.els)});
    }
    SExpPtr operator()(const DecStmt &x) const {
      std::vector<SExpPtr> binds;
      for (const auto &b : x.binds) {
        std::vector<SExpPtr> items = {mk_atom(b.name), type_to_sexp(b.ty)};
        if (b.init)
          items.push_back(exp_to_sexp(**b.init));
        binds.push_back(mk_list(std::move(items)));
      }
      return mk_list(
          {mk_atom("dec"), mk_list(std::move(binds)), stmt_to_sexp(*x.scope)});
    }
    SExpPtr operator()(const AssignStmt &x) const {
      std::vector<SExpPtr> pairs;
      for (const auto &[l, r] : x.pairs)
        pairs.push_back(mk_list({lhs_to_sexp(l), rhs_to_sexp(r)}));
      return mk_list({mk_atom("assign"), mk_list(std::move(pairs))});
    }
    SExpPtr operator()(const WhileStmt &x) const {
      std::vector<SExpPtr> invs = {mk_atom("invariants")};
      for (const auto &e : x.invariants)
        invs.push_back(exp_to_sexp(*e));
      std::vector<SExpPtr> decs = {mk_atom("decreases")};
      for (const auto &e : x.decreases)
        decs.push_back(exp_to_sexp(*e));
      std::vector<SExpPtr> mods = {mk_atom("modifies")};
      for (const auto &n : x.modifies)
        mods.push_back(mk_atom(n));
      return mk_list({mk_atom("while"), exp_to_sexp(*x.guard),
                      mk_list(std::move(invs)), mk_list(std::move(decs)),
                      mk_list(std::move(mods)), stmt_to_sexp(*x.body)});
    }
    SExpPtr operator()(const MetCallStmt &x) const {
      std::vector<SExpPtr> lhss;
      for (const auto &n : x.lhss)
        lhss.push_back(mk_atom(n));
      std::vector<SExpPtr> args;
      for (const auto &a : x.args)
        args.push_back(exp_to_sexp(*a));
      return mk_list({mk_atom("metcall"), mk_list(std::move(lhss)),
                      mk_atom(x.method), mk_list(std::move(args))});
    }
  };
  return std::visit(V{}, s.node);
}

inline SExpPtr binds_to_sexp(const char *kw,
                             const std::vector<TypedName> &binds) {
  std::vector<SExpPtr> items = {mk_atom(kw)};
  for (const auto &[n, ty] : binds)
    items.push_back(mk_list({mk_atom(n), type_to_sexp(ty)}));
  return mk_list(std::move(items));
}

inline SExpPtr exp_section_to_sexp(const char *kw,
                                   const std::vector<ExpPtr> &es) {
  std::vector<SExpPtr> items = {mk_atom(kw)};
  for (const auto &e : es)
    items.push_back(exp_to_sexp(*e));
  return mk_list(std::move(items));
}

inline SExpPtr member_to_sexp(const Member &m) {
  if (const auto *f = std::get_if<Function>(&m))
    return mk_list({mk_atom("function"), mk_atom(f->name),
                    binds_to_sexp("ins", f->ins), type_to_sexp(f->res_ty),
                    exp_to_sexp(*f->body)});
  const auto &mt = std::get<Method>(m);
  std::vector<SExpPtr> mods = {mk_atom("modifies")};
  for (const auto &n : mt.modifies)
    mods.push_back(mk_atom(n));
  return mk_list({mk_atom("method"), mk_atom(mt.name),
                  binds_to_sexp("ins", mt.ins), binds_to_sexp("outs", mt.outs),
                  exp_section_to_sexp("requires", mt.requires_),
                  exp_section_to_sexp("ensures", mt.ensures),
                  exp_section_to_sexp("decreases", mt.decreases),
                  mk_list(std::move(mods)),
                  mk_list({mk_atom("body"), stmt_to_sexp(*mt.body)})});
}

} // namespace frontend_detail

inline SExpPtr program_to_sexp(const Program &p) {
  std::vector<SExpPtr> items = {mk_atom("program")};
  for (const auto &m : p.members)
    items.push_back(frontend_detail::member_to_sexp(m));
  return mk_list(std::move(items));
}

inline std::string print_program(const Program &p) {
  return print_sexp(*program_to_sexp(p)) + "\n";
}

inline std::string print_exp(const Exp &e) {
  return print_sexp_flat(*frontend_detail::exp_to_sexp(e));
}

inline std::string print_stmt(const Stmt &s) {
  return print_sexp(*frontend_detail::stmt_to_sexp(s));
}

//===----------------------------------------------------------------------===//
// Normalization
//===----------------------------------------------------------------------===//

namespace frontend_detail {

inline bool ends_in_return(const Stmt &s) {
  if (std::holds_alternative<ReturnStmt>(s.node))
    return true;
  if (const auto *t = std::get_if<ThenStmt>(&s.node))
    return ends_in_return(*t->s2);
  return false;
}

/// Wrap reads of in-parameters in Old within an ensures clause. Bare Var(x)
/// with x an in-parameter (and not rebound) becomes Old(Var x); an existing
/// Old(Var x) is kept as is, which makes the transformation idempotent.
inline ExpPtr old_wrap(const ExpPtr &e, const std::set<std::string> &ins,
                       std::set<std::string> bound) {
  struct V {
    const ExpPtr &self;
    const std::set<std::string> &ins;
    std::set<std::string> &bound;
    ExpPtr operator()(const IntLit &) const { return self; }
    ExpPtr operator()(const BoolLit &) const { return self; }
    ExpPtr operator()(const StrLit &) const { return self; }
    ExpPtr operator()(const Var &x) const {
      if (ins.count(x.name) && !bound.count(x.name))
        return mk_old(self);
      return self;
    }
    ExpPtr operator()(const UnOp &x) const {
      return mk_unop(x.op, old_wrap(x.operand, ins, bound));
    }
    ExpPtr operator()(const BinOp &x) const {
      return mk_binop(x.op, old_wrap(x.lhs, ins, bound),
                      old_wrap(x.rhs, ins, bound));
    }
    ExpPtr operator()(const Ite &x) const {
      return mk_ite(old_wrap(x.cond, ins, bound), old_wrap(x.thn, ins, bound),
                    old_wrap(x.els, ins, bound));
    }
    ExpPtr operator()(const ArrLen &x) const {
      return mk_len(old_wrap(x.arr, ins, bound));
    }
    ExpPtr operator()(const ArrSel &x) const {
      return mk_sel(old_wrap(x.arr, ins, bound), old_wrap(x.idx, ins, bound));
    }
    ExpPtr operator()(const FunCall &x) const {
      std::vector<ExpPtr> args;
      for (const auto &a : x.args)
        args.push_back(old_wrap(a, ins, bound));
      return mk_exp(FunCall{x.name, std::move(args)});
    }
    ExpPtr operator()(const ForallExp &x) const {
      auto inner = bound;
      inner.insert(x.bound);
      return mk_forall(x.bound, x.ty, old_wrap(x.body, ins, inner));
    }
    ExpPtr operator()(const LetExp &x) const {
      std::vector<std::pair<std::string, ExpPtr>> binds;
      for (const auto &[n, rhs] : x.binds)
        binds.emplace_back(n, old_wrap(rhs, ins, bound));
      auto inner = bound;
      for (const auto &[n, rhs] : x.binds)
        inner.insert(n);
      return mk_let(std::move(binds), old_wrap(x.body, ins, inner));
    }
    ExpPtr operator()(const OldExp &x) const {
      // Old(Var x) is already in normalized form; descending further would
      // rewrap x on each pass.
      if (std::holds_alternative<Var>(x.e->node))
        return self;
      return mk_old(old_wrap(x.e, ins, bound));
    }
    ExpPtr operator()(const OldHeapExp &x) const {
      return mk_exp(OldHeapExp{old_wrap(x.e, ins, bound)});
    }
    ExpPtr operator()(const PrevExp &x) const {
      return mk_prev(old_wrap(x.e, ins, bound));
    }
    ExpPtr operator()(const PrevHeapExp &x) const {
      return mk_prev_heap(old_wrap(x.e, ins, bound));
    }
    ExpPtr operator()(const SetPrevExp &x) const {
      return mk_set_prev(old_wrap(x.e, ins, bound));
    }
    ExpPtr operator()(const ForallHeapExp &x) const {
      return mk_forall_heap(x.havoc, old_wrap(x.body, ins, bound));
    }
  };
  return std::visit(V{e, ins, bound}, e->node);
}

} // namespace frontend_detail

/// Insert a trailing Return where missing and wrap in-parameter reads in
/// ensures clauses with Old.
inline Program normalize(const Program &p) {
  Program out;
  for (const auto &m : p.members) {
    if (const auto *f = std::get_if<Function>(&m)) {
      out.members.push_back(*f);
      continue;
    }
    Method mt = std::get<Method>(m);
    if (!frontend_detail::ends_in_return(*mt.body))
      mt.body = mk_then(mt.body, mk_return());
    std::set<std::string> ins;
    for (const auto &[n, ty] : mt.ins)
      ins.insert(n);
    for (auto &e : mt.ensures)
      e = frontend_detail::old_wrap(e, ins, {});
    out.members.push_back(std::move(mt));
  }
  return out;
}

} // namespace dfy
