//===--- targetlang.hpp - ML-style core language and interpreter -------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// MLCore: an untyped call-by-value language with curried functions,
// references, arrays, tuples, and named exceptions. Application spines and
// tuple components evaluate RIGHT to LEFT. The interpreter is fuel-based
// (one tick per application) and iterates on tail positions, so compiled
// loops run in constant host stack.
//
// Ill-typed steps produce RCrash rather than aborting; the compiler is only
// expected to avoid crashes on runs whose source counterpart does not fail.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp" // BigInt, BinOpKind, euclid reuse via semantics
#include "dfy/semantics.hpp"
#include "dfy/sexp.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dfy {

//===----------------------------------------------------------------------===//
// Syntax
//===----------------------------------------------------------------------===//

struct TExp;
using TExpPtr = std::shared_ptr<const TExp>;

struct TInt {
  BigInt i;
};
struct TBool {
  bool b = false;
};
struct TStr {
  std::string s;
};
struct TUnit {};
struct TVar {
  std::string name;
};
struct TApp {
  TExpPtr fn, arg;
};
struct TFun {
  std::string param;
  TExpPtr body;
};
struct TLetrecDef {
  std::string fname;
  std::string param;
  TExpPtr body;
};
struct TLetrec {
  std::vector<TLetrecDef> defs;
  TExpPtr scope;
};
struct TLet {
  std::string name;
  TExpPtr rhs, body;
};
struct TIf {
  TExpPtr c, t, e;
};
struct TSeq {
  TExpPtr e1, e2;
};
struct TRef {
  TExpPtr e;
};
struct TDeref {
  TExpPtr e;
};
struct TAssignE {
  TExpPtr lhs, rhs;
};
struct TArrAlloc {
  TExpPtr len, init;
};
struct TArrSub {
  TExpPtr arr, idx;
};
struct TArrUpd {
  TExpPtr arr, idx, v;
};
struct TTuple {
  std::vector<TExpPtr> es;
};
struct TProj {
  size_t i = 0;
  TExpPtr e;
};
struct TRaise {
  std::string exn;
};
struct THandle {
  TExpPtr e;
  std::string exn;
  TExpPtr handler;
};
struct TPrim {
  BinOpKind op; // And/Or/Imp are never valid here (compiled to TIf)
  TExpPtr e1, e2;
};
struct TPrimNeg {
  TExpPtr e;
};
struct TPrimNot {
  TExpPtr e;
};

struct TExp {
  using Node =
      std::variant<TInt, TBool, TStr, TUnit, TVar, TApp, TFun, TLetrec, TLet,
                   TIf, TSeq, TRef, TDeref, TAssignE, TArrAlloc, TArrSub,
                   TArrUpd, TTuple, TProj, TRaise, THandle, TPrim, TPrimNeg,
                   TPrimNot>;
  Node node;
};

template <typename T> TExpPtr mk_t(T node) {
  return std::make_shared<const TExp>(TExp{TExp::Node{std::move(node)}});
}

inline TExpPtr t_int(BigInt i) { return mk_t(TInt{std::move(i)}); }
inline TExpPtr t_int(long i) { return mk_t(TInt{BigInt(i)}); }
inline TExpPtr t_bool(bool b) { return mk_t(TBool{b}); }
inline TExpPtr t_str(std::string s) { return mk_t(TStr{std::move(s)}); }
inline TExpPtr t_unit() { return mk_t(TUnit{}); }
inline TExpPtr t_var(std::string n) { return mk_t(TVar{std::move(n)}); }
inline TExpPtr t_app(TExpPtr f, TExpPtr a) {
  return mk_t(TApp{std::move(f), std::move(a)});
}
inline TExpPtr t_fun(std::string p, TExpPtr b) {
  return mk_t(TFun{std::move(p), std::move(b)});
}
inline TExpPtr t_let(std::string n, TExpPtr r, TExpPtr b) {
  return mk_t(TLet{std::move(n), std::move(r), std::move(b)});
}
inline TExpPtr t_if(TExpPtr c, TExpPtr t, TExpPtr e) {
  return mk_t(TIf{std::move(c), std::move(t), std::move(e)});
}
inline TExpPtr t_seq(TExpPtr a, TExpPtr b) {
  return mk_t(TSeq{std::move(a), std::move(b)});
}
inline TExpPtr t_ref(TExpPtr e) { return mk_t(TRef{std::move(e)}); }
inline TExpPtr t_deref(TExpPtr e) { return mk_t(TDeref{std::move(e)}); }
inline TExpPtr t_assign(TExpPtr l, TExpPtr r) {
  return mk_t(TAssignE{std::move(l), std::move(r)});
}
inline TExpPtr t_tuple(std::vector<TExpPtr> es) {
  return mk_t(TTuple{std::move(es)});
}
inline TExpPtr t_proj(size_t i, TExpPtr e) {
  return mk_t(TProj{i, std::move(e)});
}
inline TExpPtr t_raise(std::string exn) { return mk_t(TRaise{std::move(exn)}); }
inline TExpPtr t_prim(BinOpKind op, TExpPtr a, TExpPtr b) {
  return mk_t(TPrim{op, std::move(a), std::move(b)});
}

/// Top-level declarations.
struct DExn {
  std::string name;
};
struct DLetrec {
  std::vector<TLetrecDef> defs;
};
struct DLet {
  std::string name;
  TExpPtr e;
};
using TDec = std::variant<DExn, DLetrec, DLet>;

//===----------------------------------------------------------------------===//
// Values, store, environments
//===----------------------------------------------------------------------===//

struct TVal;

struct TEnvNode;
using TEnv = std::shared_ptr<const TEnvNode>;

struct VUnitV {};
struct VIntV {
  BigInt i;
};
struct VBoolV {
  bool b = false;
};
struct VStrV {
  std::string s;
};
struct VLocV {
  size_t loc = 0;
};
struct VTupleV {
  std::vector<TVal> vs;
};
struct VClosureV {
  TEnv env;
  std::string param;
  TExpPtr body;
};
struct VRecClosureV {
  TEnv env; // environment outside the recursive group
  std::shared_ptr<const std::vector<TLetrecDef>> defs;
  size_t which = 0;
};
struct VExnV {
  std::string exn;
};

struct TVal {
  std::variant<VIntV, VBoolV, VStrV, VUnitV, VLocV, VTupleV, VClosureV,
               VRecClosureV, VExnV>
      v;
};

inline TVal tv_int(BigInt i) { return TVal{VIntV{std::move(i)}}; }
inline TVal tv_int(long i) { return TVal{VIntV{BigInt(i)}}; }
inline TVal tv_bool(bool b) { return TVal{VBoolV{b}}; }
inline TVal tv_str(std::string s) { return TVal{VStrV{std::move(s)}}; }
inline TVal tv_unit() { return TVal{VUnitV{}}; }
inline TVal tv_loc(size_t l) { return TVal{VLocV{l}}; }

struct TEnvNode {
  std::string name;
  TVal val;
  TEnv next;
};

inline TEnv env_cons(std::string name, TVal val, TEnv next) {
  return std::make_shared<const TEnvNode>(
      TEnvNode{std::move(name), std::move(val), std::move(next)});
}

inline const TVal *env_lookup(const TEnv &env, const std::string &n) {
  for (const TEnvNode *p = env.get(); p; p = p->next.get())
    if (p->name == n)
      return &p->val;
  return nullptr;
}

struct RefCell {
  TVal v;
};
struct ArrCell {
  std::vector<TVal> vs;
};
using TCell = std::variant<RefCell, ArrCell>;

struct TStore {
  std::vector<TCell> cells;
  uint64_t clock = 0;
  // Hard cap on applications, independent of the clock; keeps mutated
  // interpreters (which may skip clock ticks) terminating.
  uint64_t app_cap = 1ull << 26;
  // Non-tail evaluation depth; bounded so runaway recursion in mutated
  // programs crashes cleanly instead of overflowing the native stack.
  uint32_t depth = 0;
  uint32_t depth_cap = 4000;
  // Cap on store size (cells and per-array length); bounds the memory a
  // runaway mutated program can allocate before it crashes.
  uint64_t cells_cap = 1ull << 21;
};

enum class TResKind { Val, Raise, Timeout, Crash };

struct TRes {
  TResKind kind = TResKind::Crash;
  TVal val;        // for Val
  std::string exn; // for Raise
};

inline TRes t_ok(TVal v) { return TRes{TResKind::Val, std::move(v), {}}; }
inline TRes t_raise_res(std::string exn) {
  return TRes{TResKind::Raise, {}, std::move(exn)};
}
inline TRes t_timeout() { return TRes{TResKind::Timeout, {}, {}}; }
inline TRes t_crash() { return TRes{TResKind::Crash, {}, {}}; }

/// Structural equality on first-order values; closures are not comparable.
inline bool tval_equal(const TVal &a, const TVal &b, bool &comparable) {
  comparable = true;
  if (a.v.index() != b.v.index()) {
    return false;
  }
  if (const auto *i = std::get_if<VIntV>(&a.v))
    return i->i == std::get<VIntV>(b.v).i;
  if (const auto *x = std::get_if<VBoolV>(&a.v))
    return x->b == std::get<VBoolV>(b.v).b;
  if (const auto *s = std::get_if<VStrV>(&a.v))
    return s->s == std::get<VStrV>(b.v).s;
  if (std::holds_alternative<VUnitV>(a.v))
    return true;
  if (const auto *l = std::get_if<VLocV>(&a.v))
    return l->loc == std::get<VLocV>(b.v).loc;
  if (const auto *t = std::get_if<VTupleV>(&a.v)) {
    const auto &u = std::get<VTupleV>(b.v);
    if (t->vs.size() != u.vs.size())
      return false;
    for (size_t i = 0; i < t->vs.size(); ++i) {
      bool c;
      bool eq = tval_equal(t->vs[i], u.vs[i], c);
      if (!c) {
        comparable = false;
        return false;
      }
      if (!eq)
        return false;
    }
    return true;
  }
  if (const auto *e = std::get_if<VExnV>(&a.v))
    return e->exn == std::get<VExnV>(b.v).exn;
  comparable = false;
  return false;
}

//===----------------------------------------------------------------------===//
// Evaluation
//===----------------------------------------------------------------------===//

struct TEvalOpts {
  bool tick_clock = true; // false simulates a compiler/runtime clock bug
};

inline TRes t_evaluate(TStore &st, TEnv env, TExpPtr e,
                       const TEvalOpts &opts = {});

namespace tl_detail {

inline TRes apply_prim(BinOpKind op, const TVal &a, const TVal &b) {
  switch (op) {
  case BinOpKind::Add:
  case BinOpKind::Sub:
  case BinOpKind::Mul:
  case BinOpKind::Div:
  case BinOpKind::Mod: {
    const auto *x = std::get_if<VIntV>(&a.v);
    const auto *y = std::get_if<VIntV>(&b.v);
    if (!x || !y)
      return t_crash();
    switch (op) {
    case BinOpKind::Add:
      return t_ok(tv_int(x->i + y->i));
    case BinOpKind::Sub:
      return t_ok(tv_int(x->i - y->i));
    case BinOpKind::Mul:
      return t_ok(tv_int(x->i * y->i));
    default: {
      if (y->i == 0)
        return t_crash();
      BigInt q, r;
      euclid_divmod(x->i, y->i, q, r);
      return t_ok(tv_int(op == BinOpKind::Div ? q : r));
    }
    }
  }
  case BinOpKind::Lt:
  case BinOpKind::Le:
  case BinOpKind::Gt:
  case BinOpKind::Ge: {
    const auto *x = std::get_if<VIntV>(&a.v);
    const auto *y = std::get_if<VIntV>(&b.v);
    if (!x || !y)
      return t_crash();
    switch (op) {
    case BinOpKind::Lt:
      return t_ok(tv_bool(x->i < y->i));
    case BinOpKind::Le:
      return t_ok(tv_bool(x->i <= y->i));
    case BinOpKind::Gt:
      return t_ok(tv_bool(x->i > y->i));
    default:
      return t_ok(tv_bool(x->i >= y->i));
    }
  }
  case BinOpKind::Eq:
  case BinOpKind::Neq: {
    bool comparable;
    bool eq = tval_equal(a, b, comparable);
    if (!comparable)
      return t_crash();
    return t_ok(tv_bool(op == BinOpKind::Eq ? eq : !eq));
  }
  default:
    return t_crash(); // And/Or/Imp are compiled to TIf
  }
}

} // namespace tl_detail

inline TRes t_evaluate(TStore &st, TEnv env, TExpPtr e, const TEvalOpts &opts) {
  if (st.depth >= st.depth_cap)
    return t_crash();
  ++st.depth;
  struct DepthGuard {
    TStore &st;
    ~DepthGuard() { --st.depth; }
  } guard{st};
  // Iterative on tail positions; `env`/`e` are the current frame.
  for (;;) {
    const TExp::Node &n = e->node;
    switch (n.index()) {
    case 0: // TInt
      return t_ok(tv_int(std::get<TInt>(n).i));
    case 1: // TBool
      return t_ok(tv_bool(std::get<TBool>(n).b));
    case 2: // TStr
      return t_ok(tv_str(std::get<TStr>(n).s));
    case 3: // TUnit
      return t_ok(tv_unit());
    case 4: { // TVar
      const TVal *v = env_lookup(env, std::get<TVar>(n).name);
      if (!v)
        return t_crash();
      return t_ok(*v);
    }
    case 5: { // TApp — argument first (right-to-left), then the function.
      const auto &app = std::get<TApp>(n);
      TRes arg = t_evaluate(st, env, app.arg, opts);
      if (arg.kind != TResKind::Val)
        return arg;
      TRes fn = t_evaluate(st, env, app.fn, opts);
      if (fn.kind != TResKind::Val)
        return fn;
      if (st.app_cap == 0)
        return t_timeout();
      st.app_cap -= 1;
      if (opts.tick_clock) {
        if (st.clock == 0)
          return t_timeout();
        st.clock -= 1;
      }
      if (const auto *cl = std::get_if<VClosureV>(&fn.val.v)) {
        env = env_cons(cl->param, std::move(arg.val), cl->env);
        e = cl->body;
        continue; // tail call
      }
      if (const auto *rc = std::get_if<VRecClosureV>(&fn.val.v)) {
        TEnv callee = rc->env;
        for (size_t i = 0; i < rc->defs->size(); ++i)
          callee = env_cons((*rc->defs)[i].fname,
                            TVal{VRecClosureV{rc->env, rc->defs, i}}, callee);
        const TLetrecDef &d = (*rc->defs)[rc->which];
        env = env_cons(d.param, std::move(arg.val), callee);
        e = d.body;
        continue; // tail call
      }
      return t_crash();
    }
    case 6: { // TFun
      const auto &f = std::get<TFun>(n);
      return t_ok(TVal{VClosureV{env, f.param, f.body}});
    }
    case 7: { // TLetrec
      const auto &lr = std::get<TLetrec>(n);
      auto defs = std::make_shared<const std::vector<TLetrecDef>>(lr.defs);
      TEnv outer = env;
      for (size_t i = 0; i < defs->size(); ++i)
        env = env_cons((*defs)[i].fname, TVal{VRecClosureV{outer, defs, i}},
                       env);
      e = lr.scope;
      continue;
    }
    case 8: { // TLet
      const auto &l = std::get<TLet>(n);
      TRes r = t_evaluate(st, env, l.rhs, opts);
      if (r.kind != TResKind::Val)
        return r;
      env = env_cons(l.name, std::move(r.val), env);
      e = l.body;
      continue;
    }
    case 9: { // TIf
      const auto &i = std::get<TIf>(n);
      TRes c = t_evaluate(st, env, i.c, opts);
      if (c.kind != TResKind::Val)
        return c;
      const auto *b = std::get_if<VBoolV>(&c.val.v);
      if (!b)
        return t_crash();
      e = b->b ? i.t : i.e;
      continue;
    }
    case 10: { // TSeq
      const auto &s = std::get<TSeq>(n);
      TRes r = t_evaluate(st, env, s.e1, opts);
      if (r.kind != TResKind::Val)
        return r;
      e = s.e2;
      continue;
    }
    case 11: { // TRef
      TRes r = t_evaluate(st, env, std::get<TRef>(n).e, opts);
      if (r.kind != TResKind::Val)
        return r;
      if (st.cells.size() >= st.cells_cap)
        return t_crash();
      st.cells.push_back(RefCell{std::move(r.val)});
      return t_ok(tv_loc(st.cells.size() - 1));
    }
    case 12: { // TDeref
      TRes r = t_evaluate(st, env, std::get<TDeref>(n).e, opts);
      if (r.kind != TResKind::Val)
        return r;
      const auto *l = std::get_if<VLocV>(&r.val.v);
      if (!l || l->loc >= st.cells.size())
        return t_crash();
      const auto *cell = std::get_if<RefCell>(&st.cells[l->loc]);
      if (!cell)
        return t_crash();
      return t_ok(cell->v);
    }
    case 13: { // TAssignE — rhs first, then lhs location.
      const auto &a = std::get<TAssignE>(n);
      TRes rv = t_evaluate(st, env, a.rhs, opts);
      if (rv.kind != TResKind::Val)
        return rv;
      TRes lv = t_evaluate(st, env, a.lhs, opts);
      if (lv.kind != TResKind::Val)
        return lv;
      const auto *l = std::get_if<VLocV>(&lv.val.v);
      if (!l || l->loc >= st.cells.size())
        return t_crash();
      auto *cell = std::get_if<RefCell>(&st.cells[l->loc]);
      if (!cell)
        return t_crash();
      cell->v = std::move(rv.val);
      return t_ok(tv_unit());
    }
    case 14: { // TArrAlloc — init first, then the length.
      const auto &a = std::get<TArrAlloc>(n);
      TRes iv = t_evaluate(st, env, a.init, opts);
      if (iv.kind != TResKind::Val)
        return iv;
      TRes lv = t_evaluate(st, env, a.len, opts);
      if (lv.kind != TResKind::Val)
        return lv;
      const auto *len = std::get_if<VIntV>(&lv.val.v);
      if (!len || len->i < 0)
        return t_crash();
      if (st.cells.size() >= st.cells_cap || len->i > BigInt(st.cells_cap))
        return t_crash();
      st.cells.push_back(
          ArrCell{std::vector<TVal>(len->i.convert_to<size_t>(), iv.val)});
      return t_ok(tv_loc(st.cells.size() - 1));
    }
    case 15: { // TArrSub — index first, then the array.
      const auto &a = std::get<TArrSub>(n);
      TRes iv = t_evaluate(st, env, a.idx, opts);
      if (iv.kind != TResKind::Val)
        return iv;
      TRes av = t_evaluate(st, env, a.arr, opts);
      if (av.kind != TResKind::Val)
        return av;
      const auto *l = std::get_if<VLocV>(&av.val.v);
      const auto *i = std::get_if<VIntV>(&iv.val.v);
      if (!l || !i || l->loc >= st.cells.size())
        return t_crash();
      const auto *cell = std::get_if<ArrCell>(&st.cells[l->loc]);
      if (!cell || i->i < 0 || i->i >= BigInt(cell->vs.size()))
        return t_crash();
      return t_ok(cell->vs[i->i.convert_to<size_t>()]);
    }
    case 16: { // TArrUpd — value, index, array (right-to-left).
      const auto &a = std::get<TArrUpd>(n);
      TRes vv = t_evaluate(st, env, a.v, opts);
      if (vv.kind != TResKind::Val)
        return vv;
      TRes iv = t_evaluate(st, env, a.idx, opts);
      if (iv.kind != TResKind::Val)
        return iv;
      TRes av = t_evaluate(st, env, a.arr, opts);
      if (av.kind != TResKind::Val)
        return av;
      const auto *l = std::get_if<VLocV>(&av.val.v);
      const auto *i = std::get_if<VIntV>(&iv.val.v);
      if (!l || !i || l->loc >= st.cells.size())
        return t_crash();
      auto *cell = std::get_if<ArrCell>(&st.cells[l->loc]);
      if (!cell || i->i < 0 || i->i >= BigInt(cell->vs.size()))
        return t_crash();
      cell->vs[i->i.convert_to<size_t>()] = std::move(vv.val);
      return t_ok(tv_unit());
    }
    case 17: { // TTuple — components right to left.
      const auto &t = std::get<TTuple>(n);
      std::vector<TVal> vs(t.es.size());
      for (size_t i = t.es.size(); i-- > 0;) {
        TRes r = t_evaluate(st, env, t.es[i], opts);
        if (r.kind != TResKind::Val)
          return r;
        vs[i] = std::move(r.val);
      }
      return t_ok(TVal{VTupleV{std::move(vs)}});
    }
    case 18: { // TProj
      const auto &p = std::get<TProj>(n);
      TRes r = t_evaluate(st, env, p.e, opts);
      if (r.kind != TResKind::Val)
        return r;
      const auto *t = std::get_if<VTupleV>(&r.val.v);
      if (!t || p.i >= t->vs.size())
        return t_crash();
      return t_ok(t->vs[p.i]);
    }
    case 19: // TRaise
      return t_raise_res(std::get<TRaise>(n).exn);
    case 20: { // THandle
      const auto &h = std::get<THandle>(n);
      TRes r = t_evaluate(st, env, h.e, opts);
      if (r.kind == TResKind::Raise && r.exn == h.exn) {
        e = h.handler;
        continue;
      }
      return r;
    }
    case 21: { // TPrim — right operand first.
      const auto &p = std::get<TPrim>(n);
      TRes b = t_evaluate(st, env, p.e2, opts);
      if (b.kind != TResKind::Val)
        return b;
      TRes a = t_evaluate(st, env, p.e1, opts);
      if (a.kind != TResKind::Val)
        return a;
      return tl_detail::apply_prim(p.op, a.val, b.val);
    }
    case 22: { // TPrimNeg
      TRes r = t_evaluate(st, env, std::get<TPrimNeg>(n).e, opts);
      if (r.kind != TResKind::Val)
        return r;
      const auto *i = std::get_if<VIntV>(&r.val.v);
      if (!i)
        return t_crash();
      return t_ok(tv_int(-i->i));
    }
    case 23: { // TPrimNot
      TRes r = t_evaluate(st, env, std::get<TPrimNot>(n).e, opts);
      if (r.kind != TResKind::Val)
        return r;
      const auto *b = std::get_if<VBoolV>(&r.val.v);
      if (!b)
        return t_crash();
      return t_ok(tv_bool(!b->b));
    }
    }
    return t_crash();
  }
}

/// Process top-level declarations, threading the store and extending env.
/// Returns the extended environment plus the result of the last evaluation
/// (RVal VUnit for an empty or declaration-only prefix).
inline std::pair<TEnv, TRes> t_evaluate_decs(TStore &st, TEnv env,
                                             const std::vector<TDec> &decs,
                                             const TEvalOpts &opts = {}) {
  TRes last = t_ok(tv_unit());
  for (const auto &d : decs) {
    if (std::holds_alternative<DExn>(d)) {
      continue; // declarations only introduce the name
    }
    if (const auto *lr = std::get_if<DLetrec>(&d)) {
      auto defs = std::make_shared<const std::vector<TLetrecDef>>(lr->defs);
      TEnv outer = env;
      for (size_t i = 0; i < defs->size(); ++i)
        env = env_cons((*defs)[i].fname, TVal{VRecClosureV{outer, defs, i}},
                       env);
      continue;
    }
    const auto &dl = std::get<DLet>(d);
    TRes r = t_evaluate(st, env, dl.e, opts);
    if (r.kind != TResKind::Val)
      return {env, r};
    env = env_cons(dl.name, r.val, env);
    last = std::move(r);
  }
  return {env, last};
}

//===----------------------------------------------------------------------===//
// Pretty printer (SML-like, for human inspection)
//===----------------------------------------------------------------------===//

namespace tl_detail {

inline void pp(const TExp &e, std::string &out, int indent);

inline void pp_indent(std::string &out, int n) { out.append(n, ' '); }

inline const char *prim_name(BinOpKind op) {
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
    return "=";
  case BinOpKind::Neq:
    return "<>";
  default:
    return "?";
  }
}

inline void pp(const TExp &e, std::string &out, int indent) {
  struct V {
    std::string &out;
    int ind;
    void operator()(const TInt &x) const { out += x.i.str(); }
    void operator()(const TBool &x) const { out += x.b ? "true" : "false"; }
    void operator()(const TStr &x) const {
      out += '"';
      for (char c : x.s) {
        if (c == '"' || c == '\\')
          out += '\\';
        out += c;
      }
      out += '"';
    }
    void operator()(const TUnit &) const { out += "()"; }
    void operator()(const TVar &x) const { out += x.name; }
    void operator()(const TApp &x) const {
      out += '(';
      pp(*x.fn, out, ind);
      out += ' ';
      pp(*x.arg, out, ind);
      out += ')';
    }
    void operator()(const TFun &x) const {
      out += "(fn " + x.param + " => ";
      pp(*x.body, out, ind);
      out += ')';
    }
    void operator()(const TLetrec &x) const {
      out += "let\n";
      for (size_t i = 0; i < x.defs.size(); ++i) {
        pp_indent(out, ind + 2);
        out += (i == 0 ? "fun " : "and ") + x.defs[i].fname + " " +
               x.defs[i].param + " =\n";
        pp_indent(out, ind + 4);
        pp(*x.defs[i].body, out, ind + 4);
        out += '\n';
      }
      pp_indent(out, ind);
      out += "in\n";
      pp_indent(out, ind + 2);
      pp(*x.scope, out, ind + 2);
      out += '\n';
      pp_indent(out, ind);
      out += "end";
    }
    void operator()(const TLet &x) const {
      out += "let val " + x.name + " = ";
      pp(*x.rhs, out, ind + 2);
      out += " in\n";
      pp_indent(out, ind + 2);
      pp(*x.body, out, ind + 2);
      out += '\n';
      pp_indent(out, ind);
      out += "end";
    }
    void operator()(const TIf &x) const {
      out += "if ";
      pp(*x.c, out, ind);
      out += " then\n";
      pp_indent(out, ind + 2);
      pp(*x.t, out, ind + 2);
      out += '\n';
      pp_indent(out, ind);
      out += "else\n";
      pp_indent(out, ind + 2);
      pp(*x.e, out, ind + 2);
    }
    void operator()(const TSeq &x) const {
      out += '(';
      pp(*x.e1, out, ind);
      out += ";\n";
      pp_indent(out, ind + 1);
      pp(*x.e2, out, ind + 1);
      out += ')';
    }
    void operator()(const TRef &x) const {
      out += "ref (";
      pp(*x.e, out, ind);
      out += ')';
    }
    void operator()(const TDeref &x) const {
      out += '!';
      pp(*x.e, out, ind);
    }
    void operator()(const TAssignE &x) const {
      pp(*x.lhs, out, ind);
      out += " := ";
      pp(*x.rhs, out, ind);
    }
    void operator()(const TArrAlloc &x) const {
      out += "Array.array (";
      pp(*x.len, out, ind);
      out += ", ";
      pp(*x.init, out, ind);
      out += ')';
    }
    void operator()(const TArrSub &x) const {
      out += "Array.sub (";
      pp(*x.arr, out, ind);
      out += ", ";
      pp(*x.idx, out, ind);
      out += ')';
    }
    void operator()(const TArrUpd &x) const {
      out += "Array.update (";
      pp(*x.arr, out, ind);
      out += ", ";
      pp(*x.idx, out, ind);
      out += ", ";
      pp(*x.v, out, ind);
      out += ')';
    }
    void operator()(const TTuple &x) const {
      out += '(';
      for (size_t i = 0; i < x.es.size(); ++i) {
        if (i)
          out += ", ";
        pp(*x.es[i], out, ind);
      }
      out += ')';
    }
    void operator()(const TProj &x) const {
      out += '#' + std::to_string(x.i + 1) + " (";
      pp(*x.e, out, ind);
      out += ')';
    }
    void operator()(const TRaise &x) const { out += "raise " + x.exn; }
    void operator()(const THandle &x) const {
      out += '(';
      pp(*x.e, out, ind);
      out += ")\nhandle " + x.exn + " => ";
      pp(*x.handler, out, ind);
    }
    void operator()(const TPrim &x) const {
      out += '(';
      pp(*x.e1, out, ind);
      out += ' ';
      out += prim_name(x.op);
      out += ' ';
      pp(*x.e2, out, ind);
      out += ')';
    }
    void operator()(const TPrimNeg &x) const {
      out += "~(";
      pp(*x.e, out, ind);
      out += ')';
    }
    void operator()(const TPrimNot &x) const {
      out += "not (";
      pp(*x.e, out, ind);
      out += ')';
    }
  };
  std::visit(V{out, indent}, e.node);
}

} // namespace tl_detail

inline std::string print_texp(const TExp &e) {
  std::string out;
  tl_detail::pp(e, out, 0);
  return out;
}

inline std::string print_tdecs(const std::vector<TDec> &decs) {
  std::string out;
  for (const auto &d : decs) {
    if (const auto *ex = std::get_if<DExn>(&d)) {
      out += "exception " + ex->name + ";\n\n";
    } else if (const auto *lr = std::get_if<DLetrec>(&d)) {
      for (size_t i = 0; i < lr->defs.size(); ++i) {
        out += (i == 0 ? "fun " : "and ") + lr->defs[i].fname + " " +
               lr->defs[i].param + " =\n  ";
        tl_detail::pp(*lr->defs[i].body, out, 2);
        out += '\n';
      }
      out += '\n';
    } else {
      const auto &dl = std::get<DLet>(d);
      out += "val " + dl.name + " = ";
      tl_detail::pp(*dl.e, out, 2);
      out += ";\n\n";
    }
  }
  return out;
}

//===----------------------------------------------------------------------===//
// Structural S-expression dump (for `compile --emit sexp`)
//===----------------------------------------------------------------------===//

namespace tl_detail {

inline SExpPtr texp_to_sexp(const TExp &e) {
  struct V {
    SExpPtr operator()(const TInt &x) const {
      return mk_list({mk_atom("int"), mk_atom(x.i.str())});
    }
    SExpPtr operator()(const TBool &x) const {
      return mk_list({mk_atom("bool"), mk_atom(x.b ? "true" : "false")});
    }
    SExpPtr operator()(const TStr &x) const {
      return mk_list({mk_atom("str"), mk_atom(x.s, true)});
    }
    SExpPtr operator()(const TUnit &) const {
      return mk_list({mk_atom("unit")});
    }
    SExpPtr operator()(const TVar &x) const {
      return mk_list({mk_atom("var"), mk_atom(x.name)});
    }
    SExpPtr operator()(const TApp &x) const {
      return mk_list({mk_atom("app"), texp_to_sexp(*x.fn),
                      texp_to_sexp(*x.arg)});
    }
    SExpPtr operator()(const TFun &x) const {
      return mk_list({mk_atom("fun"), mk_atom(x.param), texp_to_sexp(*x.body)});
    }
    SExpPtr operator()(const TLetrec &x) const {
      std::vector<SExpPtr> defs;
      for (const auto &d : x.defs)
        defs.push_back(mk_list(
            {mk_atom(d.fname), mk_atom(d.param), texp_to_sexp(*d.body)}));
      return mk_list({mk_atom("letrec"), mk_list(std::move(defs)),
                      texp_to_sexp(*x.scope)});
    }
    SExpPtr operator()(const TLet &x) const {
      return mk_list({mk_atom("let"), mk_atom(x.name), texp_to_sexp(*x.rhs),
                      texp_to_sexp(*x.body)});
    }
    SExpPtr operator()(const TIf &x) const {
      return mk_list({mk_atom("if"), texp_to_sexp(*x.c), texp_to_sexp(*x.t),
                      texp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const TSeq &x) const {
      return mk_list(
          {mk_atom("seq"), texp_to_sexp(*x.e1), texp_to_sexp(*x.e2)});
    }
    SExpPtr operator()(const TRef &x) const {
      return mk_list({mk_atom("ref"), texp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const TDeref &x) const {
      return mk_list({mk_atom("deref"), texp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const TAssignE &x) const {
      return mk_list(
          {mk_atom("assign"), texp_to_sexp(*x.lhs), texp_to_sexp(*x.rhs)});
    }
    SExpPtr operator()(const TArrAlloc &x) const {
      return mk_list(
          {mk_atom("arralloc"), texp_to_sexp(*x.len), texp_to_sexp(*x.init)});
    }
    SExpPtr operator()(const TArrSub &x) const {
      return mk_list(
          {mk_atom("arrsub"), texp_to_sexp(*x.arr), texp_to_sexp(*x.idx)});
    }
    SExpPtr operator()(const TArrUpd &x) const {
      return mk_list({mk_atom("arrupd"), texp_to_sexp(*x.arr),
                      texp_to_sexp(*x.idx), texp_to_sexp(*x.v)});
    }
    SExpPtr operator()(const TTuple &x) const {
      std::vector<SExpPtr> items = {mk_atom("tuple")};
      for (const auto &c : x.es)
        items.push_back(texp_to_sexp(*c));
      return mk_list(std::move(items));
    }
    SExpPtr operator()(const TProj &x) const {
      return mk_list({mk_atom("proj"), mk_atom(std::to_string(x.i)),
                      texp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const TRaise &x) const {
      return mk_list({mk_atom("raise"), mk_atom(x.exn)});
    }
    SExpPtr operator()(const THandle &x) const {
      return mk_list({mk_atom("handle"), texp_to_sexp(*x.e), mk_atom(x.exn),
                      texp_to_sexp(*x.handler)});
    }
    SExpPtr operator()(const TPrim &x) const {
      return mk_list({mk_atom("prim"), mk_atom(prim_name(x.op)),
                      texp_to_sexp(*x.e1), texp_to_sexp(*x.e2)});
    }
    SExpPtr operator()(const TPrimNeg &x) const {
      return mk_list({mk_atom("neg"), texp_to_sexp(*x.e)});
    }
    SExpPtr operator()(const TPrimNot &x) const {
      return mk_list({mk_atom("not"), texp_to_sexp(*x.e)});
    }
  };
  return std::visit(V{}, e.node);
}

} // namespace tl_detail

inline std::string print_tdecs_sexp(const std::vector<TDec> &decs) {
  std::vector<SExpPtr> items = {mk_atom("decs")};
  for (const auto &d : decs) {
    if (const auto *ex = std::get_if<DExn>(&d)) {
      items.push_back(mk_list({mk_atom("exception"), mk_atom(ex->name)}));
    } else if (const auto *lr = std::get_if<DLetrec>(&d)) {
      std::vector<SExpPtr> defs = {mk_atom("letrec")};
      for (const auto &df : lr->defs)
        defs.push_back(mk_list({mk_atom(df.fname), mk_atom(df.param),
                                tl_detail::texp_to_sexp(*df.body)}));
      items.push_back(mk_list(std::move(defs)));
    } else {
      const auto &dl = std::get<DLet>(d);
      items.push_back(mk_list({mk_atom("let"), mk_atom(dl.name),
                               tl_detail::texp_to_sexp(*dl.e)}));
    }
  }
  return print_sexp(*mk_list(std::move(items))) + "\n";
}

} // namespace dfy
