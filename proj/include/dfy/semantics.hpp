//===--- semantics.hpp - Fuel-based definitional interpreter ----------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Big-step evaluation written as a total function over a clock (fuel). The
// state has six parts besides the clock: the locals association list, the
// heap, a snapshot of both taken at method entry (serving old-expressions),
// and a second snapshot pair used only by verification conditions
// (Prev/PrevHeap/SetPrev).
//
// Expression evaluation changes nothing but the clock. Statement evaluation
// threads the full state. Quantifiers have no meaning here; they are given a
// bounded one in vccheck.hpp.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dfy {

//===----------------------------------------------------------------------===//
// Values, results, state
//===----------------------------------------------------------------------===//

struct Value;

struct IntV {
  BigInt i;
};
struct BoolV {
  bool b = false;
};
struct StrV {
  std::string s;
};
/// Array values carry their length, heap location, and element type; the
/// contents live on the heap.
struct ArrV {
  uint64_t len = 0;
  uint64_t loc = 0;
  DType elem_ty;
};

struct Value {
  std::variant<IntV, BoolV, StrV, ArrV> v;
};

inline Value val_int(BigInt i) { return Value{IntV{std::move(i)}}; }
inline Value val_int(long i) { return Value{IntV{BigInt(i)}}; }
inline Value val_bool(bool b) { return Value{BoolV{b}}; }
inline Value val_str(std::string s) { return Value{StrV{std::move(s)}}; }
inline Value val_arr(uint64_t len, uint64_t loc, DType elem) {
  return Value{ArrV{len, loc, std::move(elem)}};
}

inline bool value_equal(const Value &a, const Value &b) {
  if (a.v.index() != b.v.index())
    return false;
  if (const auto *i = std::get_if<IntV>(&a.v))
    return i->i == std::get<IntV>(b.v).i;
  if (const auto *x = std::get_if<BoolV>(&a.v))
    return x->b == std::get<BoolV>(b.v).b;
  if (const auto *s = std::get_if<StrV>(&a.v))
    return s->s == std::get<StrV>(b.v).s;
  const auto &x = std::get<ArrV>(a.v);
  const auto &y = std::get<ArrV>(b.v);
  return x.len == y.len && x.loc == y.loc && x.elem_ty == y.elem_ty;
}

/// Runtime type of a value (arrays report their element type).
inline bool value_has_type(const Value &v, const DType &t) {
  switch (t.kind) {
  case DType::Kind::Int:
    return std::holds_alternative<IntV>(v.v);
  case DType::Kind::Bool:
    return std::holds_alternative<BoolV>(v.v);
  case DType::Kind::Str:
    return std::holds_alternative<StrV>(v.v);
  case DType::Kind::Arr: {
    const auto *a = std::get_if<ArrV>(&v.v);
    return a && a->elem_ty == t.element();
  }
  }
  return false;
}

struct HeapValue {
  std::vector<Value> elems;
  DType elem_ty;
};

enum class Err { Fail, Timeout };

/// Expression outcome: a value or an error.
struct ExpResult {
  std::variant<Value, Err> r;
  bool is_val() const { return r.index() == 0; }
  bool is_err() const { return r.index() == 1; }
  const Value &val() const { return std::get<Value>(r); }
  Err err() const { return std::get<Err>(r); }
};

inline ExpResult rval(Value v) { return ExpResult{std::move(v)}; }
inline ExpResult rerr(Err e) { return ExpResult{e}; }
inline ExpResult rfail() { return rerr(Err::Fail); }
inline ExpResult rtimeout() { return rerr(Err::Timeout); }

/// Statement outcome: continue, return, or stop with an error.
enum class StmtResult { Cont, Ret, Fail, Timeout };

inline StmtResult stop_of(Err e) {
  return e == Err::Fail ? StmtResult::Fail : StmtResult::Timeout;
}

using Locals = std::vector<std::pair<std::string, std::optional<Value>>>;
using Heap = std::vector<HeapValue>;

struct State {
  uint64_t clock = 0;
  Locals locals;
  Heap heap;
  Locals locals_old;
  Heap heap_old;
  Locals locals_prev;
  Heap heap_prev;
};

inline std::optional<Value> *locals_find(Locals &ls, const std::string &n) {
  for (auto &[name, v] : ls)
    if (name == n)
      return &v;
  return nullptr;
}

inline const std::optional<Value> *locals_find(const Locals &ls,
                                               const std::string &n) {
  for (const auto &[name, v] : ls)
    if (name == n)
      return &v;
  return nullptr;
}

struct Env {
  const Program *prog = nullptr;
};

//===----------------------------------------------------------------------===//
// Primitive operations
//===----------------------------------------------------------------------===//

inline std::optional<Value> do_uop(UnOpKind op, const Value &v) {
  if (op == UnOpKind::Not) {
    if (const auto *b = std::get_if<BoolV>(&v.v))
      return val_bool(!b->b);
    return std::nullopt;
  }
  if (const auto *i = std::get_if<IntV>(&v.v))
    return val_int(-i->i);
  return std::nullopt;
}

/// Euclidean division: remainder always in [0, |b|).
inline void euclid_divmod(const BigInt &a, const BigInt &b, BigInt &q,
                          BigInt &r) {
  q = a / b; // truncating
  r = a % b;
  if (r < 0) {
    if (b > 0) {
      q -= 1;
      r += b;
    } else {
      q += 1;
      r -= b;
    }
  }
}

/// Non-short-circuit binary operators. Boolean connectives are handled by the
/// evaluator and absent here; Eq/Neq require same-kind operands (arrays
/// compare by location).
inline std::optional<Value> do_binop(BinOpKind op, const Value &a,
                                     const Value &b) {
  switch (op) {
  case BinOpKind::Add:
  case BinOpKind::Sub:
  case BinOpKind::Mul:
  case BinOpKind::Div:
  case BinOpKind::Mod: {
    const auto *x = std::get_if<IntV>(&a.v);
    const auto *y = std::get_if<IntV>(&b.v);
    if (!x || !y)
      return std::nullopt;
    switch (op) {
    case BinOpKind::Add:
      return val_int(x->i + y->i);
    case BinOpKind::Sub:
      return val_int(x->i - y->i);
    case BinOpKind::Mul:
      return val_int(x->i * y->i);
    default: {
      if (y->i == 0)
        return std::nullopt;
      BigInt q, r;
      euclid_divmod(x->i, y->i, q, r);
      return val_int(op == BinOpKind::Div ? q : r);
    }
    }
  }
  case BinOpKind::Lt:
  case BinOpKind::Le:
  case BinOpKind::Gt:
  case BinOpKind::Ge: {
    const auto *x = std::get_if<IntV>(&a.v);
    const auto *y = std::get_if<IntV>(&b.v);
    if (!x || !y)
      return std::nullopt;
    switch (op) {
    case BinOpKind::Lt:
      return val_bool(x->i < y->i);
    case BinOpKind::Le:
      return val_bool(x->i <= y->i);
    case BinOpKind::Gt:
      return val_bool(x->i > y->i);
    default:
      return val_bool(x->i >= y->i);
    }
  }
  case BinOpKind::Eq:
  case BinOpKind::Neq: {
    if (a.v.index() != b.v.index())
      return std::nullopt;
    bool eq;
    if (const auto *x = std::get_if<ArrV>(&a.v))
      eq = x->loc == std::get<ArrV>(b.v).loc; // reference equality
    else
      eq = value_equal(a, b);
    return val_bool(op == BinOpKind::Eq ? eq : !eq);
  }
  case BinOpKind::And:
  case BinOpKind::Or:
  case BinOpKind::Imp:
    return std::nullopt; // short-circuit; handled in evaluate_exp
  }
  return std::nullopt;
}

inline Value default_value(const DType &t) {
  switch (t.kind) {
  case DType::Kind::Int:
    return val_int(0);
  case DType::Kind::Bool:
    return val_bool(false);
  case DType::Kind::Str:
    return val_str("");
  case DType::Kind::Arr:
    // Zero-length array; its location is never dereferenced.
    return val_arr(0, 0, t.element());
  }
  return val_int(0);
}

//===----------------------------------------------------------------------===//
// Expression evaluation
//===----------------------------------------------------------------------===//

inline ExpResult evaluate_exp(State &st, const Env &env, const Exp &e);

namespace sem_detail {

inline ExpResult eval_bool(State &st, const Env &env, const Exp &e,
                           bool &out) {
  auto r = evaluate_exp(st, env, e);
  if (r.is_err())
    return r;
  const auto *b = std::get_if<BoolV>(&r.val().v);
  if (!b)
    return rfail();
  out = b->b;
  return r;
}

} // namespace sem_detail

inline ExpResult evaluate_exp(State &st, const Env &env, const Exp &e) {
  struct V {
    State &st;
    const Env &env;
    ExpResult operator()(const IntLit &x) const { return rval(val_int(x.value)); }
    ExpResult operator()(const BoolLit &x) const {
      return rval(val_bool(x.value));
    }
    ExpResult operator()(const StrLit &x) const {
      return rval(val_str(x.value));
    }
    ExpResult operator()(const Var &x) const {
      const auto *slot = locals_find(st.locals, x.name);
      if (!slot || !slot->has_value())
        return rfail();
      return rval(**slot);
    }
    ExpResult operator()(const UnOp &x) const {
      auto r = evaluate_exp(st, env, *x.operand);
      if (r.is_err())
        return r;
      auto v = do_uop(x.op, r.val());
      if (!v)
        return rfail();
      return rval(std::move(*v));
    }
    ExpResult operator()(const BinOp &x) const {
      if (x.op == BinOpKind::And || x.op == BinOpKind::Or ||
          x.op == BinOpKind::Imp) {
        bool lhs;
        auto r = sem_detail::eval_bool(st, env, *x.lhs, lhs);
        if (r.is_err())
          return r;
        if (x.op == BinOpKind::And && !lhs)
          return rval(val_bool(false));
        if (x.op == BinOpKind::Or && lhs)
          return rval(val_bool(true));
        if (x.op == BinOpKind::Imp && !lhs)
          return rval(val_bool(true));
        bool rhs;
        auto r2 = sem_detail::eval_bool(st, env, *x.rhs, rhs);
        if (r2.is_err())
          return r2;
        return rval(val_bool(rhs));
      }
      auto a = evaluate_exp(st, env, *x.lhs);
      if (a.is_err())
        return a;
      auto b = evaluate_exp(st, env, *x.rhs);
      if (b.is_err())
        return b;
      auto v = do_binop(x.op, a.val(), b.val());
      if (!v)
        return rfail();
      return rval(std::move(*v));
    }
    ExpResult operator()(const Ite &x) const {
      bool c;
      auto r = sem_detail::eval_bool(st, env, *x.cond, c);
      if (r.is_err())
        return r;
      return evaluate_exp(st, env, c ? *x.thn : *x.els);
    }
    ExpResult operator()(const ArrLen &x) const {
      auto r = evaluate_exp(st, env, *x.arr);
      if (r.is_err())
        return r;
      const auto *a = std::get_if<ArrV>(&r.val().v);
      if (!a)
        return rfail();
      return rval(val_int(BigInt(a->len)));
    }
    ExpResult operator()(const ArrSel &x) const {
      auto ra = evaluate_exp(st, env, *x.arr);
      if (ra.is_err())
        return ra;
      const auto *a = std::get_if<ArrV>(&ra.val().v);
      if (!a)
        return rfail();
      auto ri = evaluate_exp(st, env, *x.idx);
      if (ri.is_err())
        return ri;
      const auto *i = std::get_if<IntV>(&ri.val().v);
      if (!i)
        return rfail();
      if (i->i < 0 || i->i >= BigInt(a->len))
        return rfail();
      if (a->loc >= st.heap.size())
        return rfail();
      const auto &cell = st.heap[a->loc];
      uint64_t idx = i->i.convert_to<uint64_t>();
      if (idx >= cell.elems.size())
        return rfail();
      return rval(cell.elems[idx]);
    }
    ExpResult operator()(const FunCall &x) const {
      const Member *m = member_lookup(*env.prog, x.name);
      if (!m)
        return rfail();
      const auto *f = std::get_if<Function>(m);
      if (!f)
        return rfail();
      if (x.args.size() != f->ins.size())
        return rfail();
      std::vector<Value> args;
      for (const auto &a : x.args) {
        auto r = evaluate_exp(st, env, *a);
        if (r.is_err())
          return r;
        args.push_back(r.val());
      }
      if (st.clock == 0)
        return rtimeout();
      st.clock -= 1;
      // The function body sees exactly its parameters.
      Locals saved = std::move(st.locals);
      st.locals.clear();
      for (size_t i = 0; i < args.size(); ++i)
        st.locals.emplace_back(f->ins[i].first, std::move(args[i]));
      auto r = evaluate_exp(st, env, *f->body);
      st.locals = std::move(saved);
      return r;
    }
    ExpResult operator()(const ForallExp &) const { return rfail(); }
    ExpResult operator()(const LetExp &x) const {
      std::vector<Value> vals;
      for (const auto &[n, rhs] : x.binds) {
        auto r = evaluate_exp(st, env, *rhs);
        if (r.is_err())
          return r;
        vals.push_back(r.val());
      }
      size_t added = x.binds.size();
      for (size_t i = added; i-- > 0;)
        st.locals.insert(st.locals.begin(),
                         {x.binds[i].first, std::move(vals[i])});
      auto r = evaluate_exp(st, env, *x.body);
      st.locals.erase(st.locals.begin(), st.locals.begin() + added);
      return r;
    }
    ExpResult operator()(const OldExp &x) const {
      // Set (not swap) so that nested Old is idempotent.
      Locals saved_l = std::move(st.locals);
      Heap saved_h = std::move(st.heap);
      st.locals = st.locals_old;
      st.heap = st.heap_old;
      auto r = evaluate_exp(st, env, *x.e);
      st.locals = std::move(saved_l);
      st.heap = std::move(saved_h);
      return r;
    }
    ExpResult operator()(const OldHeapExp &x) const {
      Heap saved_h = std::move(st.heap);
      st.heap = st.heap_old;
      auto r = evaluate_exp(st, env, *x.e);
      st.heap = std::move(saved_h);
      return r;
    }
    ExpResult operator()(const PrevExp &x) const {
      Locals saved_l = std::move(st.locals);
      Heap saved_h = std::move(st.heap);
      st.locals = st.locals_prev;
      st.heap = st.heap_prev;
      auto r = evaluate_exp(st, env, *x.e);
      st.locals = std::move(saved_l);
      st.heap = std::move(saved_h);
      return r;
    }
    ExpResult operator()(const PrevHeapExp &x) const {
      Heap saved_h = std::move(st.heap);
      st.heap = st.heap_prev;
      auto r = evaluate_exp(st, env, *x.e);
      st.heap = std::move(saved_h);
      return r;
    }
    ExpResult operator()(const SetPrevExp &x) const {
      Locals saved_l = std::move(st.locals_prev);
      Heap saved_h = std::move(st.heap_prev);
      st.locals_prev = st.locals;
      st.heap_prev = st.heap;
      auto r = evaluate_exp(st, env, *x.e);
      st.locals_prev = std::move(saved_l);
      st.heap_prev = std::move(saved_h);
      return r;
    }
    ExpResult operator()(const ForallHeapExp &) const { return rfail(); }
  };
  return std::visit(V{st, env}, e.node);
}

//===----------------------------------------------------------------------===//
// Statement evaluation
//===----------------------------------------------------------------------===//

inline StmtResult evaluate_stmt(State &st, const Env &env, const Stmt &s);

namespace sem_detail {

inline StmtResult do_assign(State &st, const Env &env, const AssignStmt &s) {
  // Phase 1: evaluate all right-hand sides left to right.
  std::vector<Value> vals;
  for (const auto &[lhs, rhs] : s.pairs) {
    if (const auto *er = std::get_if<ExpRhs>(&rhs)) {
      auto r = evaluate_exp(st, env, *er->e);
      if (r.is_err())
        return stop_of(r.err());
      vals.push_back(r.val());
    } else {
      const auto &al = std::get<ArrAllocRhs>(rhs);
      auto r = evaluate_exp(st, env, *al.len);
      if (r.is_err())
        return stop_of(r.err());
      const auto *n = std::get_if<IntV>(&r.val().v);
      if (!n || n->i < 0)
        return StmtResult::Fail;
      uint64_t len = n->i.convert_to<uint64_t>();
      uint64_t loc = st.heap.size();
      st.heap.push_back(HeapValue{
          std::vector<Value>(len, default_value(al.elem_ty)), al.elem_ty});
      vals.push_back(val_arr(len, loc, al.elem_ty));
    }
  }
  // Phase 2: perform the writes left to right.
  for (size_t k = 0; k < s.pairs.size(); ++k) {
    const Lhs &lhs = s.pairs[k].first;
    if (const auto *v = std::get_if<VarLhs>(&lhs)) {
      auto *slot = locals_find(st.locals, v->name);
      if (!slot)
        return StmtResult::Fail;
      *slot = vals[k];
    } else {
      const auto &sel = std::get<ArrSelLhs>(lhs);
      auto ra = evaluate_exp(st, env, *sel.arr);
      if (ra.is_err())
        return stop_of(ra.err());
      const auto *a = std::get_if<ArrV>(&ra.val().v);
      if (!a)
        return StmtResult::Fail;
      auto ri = evaluate_exp(st, env, *sel.idx);
      if (ri.is_err())
        return stop_of(ri.err());
      const auto *i = std::get_if<IntV>(&ri.val().v);
      if (!i)
        return StmtResult::Fail;
      if (i->i < 0 || i->i >= BigInt(a->len) || a->loc >= st.heap.size())
        return StmtResult::Fail;
      auto &cell = st.heap[a->loc];
      if (!value_has_type(vals[k], cell.elem_ty))
        return StmtResult::Fail;
      cell.elems[i->i.convert_to<uint64_t>()] = vals[k];
    }
  }
  return StmtResult::Cont;
}

inline StmtResult do_metcall(State &st, const Env &env, const MetCallStmt &s) {
  // Step 1: look the method up.
  const Member *mem = member_lookup(*env.prog, s.method);
  if (!mem)
    return StmtResult::Fail;
  const auto *m = std::get_if<Method>(mem);
  if (!m)
    return StmtResult::Fail;
  if (s.args.size() != m->ins.size() || s.lhss.size() != m->outs.size())
    return StmtResult::Fail;
  // Step 2: evaluate the arguments in the caller.
  std::vector<Value> args;
  for (const auto &a : s.args) {
    auto r = evaluate_exp(st, env, *a);
    if (r.is_err())
      return stop_of(r.err());
    args.push_back(r.val());
  }
  // Step 3: in- and out-parameter names must be pairwise distinct.
  std::set<std::string> names;
  for (const auto &[n, ty] : m->ins)
    if (!names.insert(n).second)
      return StmtResult::Fail;
  for (const auto &[n, ty] : m->outs)
    if (!names.insert(n).second)
      return StmtResult::Fail;
  // Step 4: replace the locals with initialized ins and uninitialized outs.
  Locals saved_locals = std::move(st.locals);
  Locals saved_locals_old = std::move(st.locals_old);
  Heap saved_heap_old = std::move(st.heap_old);
  st.locals.clear();
  for (size_t i = 0; i < args.size(); ++i)
    st.locals.emplace_back(m->ins[i].first, std::move(args[i]));
  for (const auto &[n, ty] : m->outs)
    st.locals.emplace_back(n, std::nullopt);
  // Step 5: snapshot the entry state for old-expressions.
  st.locals_old = st.locals;
  st.heap_old = st.heap;
  auto restore = [&]() {
    st.locals = std::move(saved_locals);
    st.locals_old = std::move(saved_locals_old);
    st.heap_old = std::move(saved_heap_old);
  };
  // Step 6: clock check and decrement.
  if (st.clock == 0) {
    restore();
    return StmtResult::Timeout;
  }
  st.clock -= 1;
  // Step 7: evaluate the body, expecting a return.
  StmtResult r = evaluate_stmt(st, env, *m->body);
  if (r == StmtResult::Cont)
    r = StmtResult::Fail; // body fell through without return
  if (r != StmtResult::Ret) {
    restore();
    return r;
  }
  // Step 8: read the out-parameter values in the callee.
  std::vector<Value> outs;
  for (const auto &[n, ty] : m->outs) {
    const auto *slot = locals_find(st.locals, n);
    if (!slot || !slot->has_value()) {
      restore();
      return StmtResult::Fail;
    }
    outs.push_back(**slot);
  }
  // Step 9: restore the caller's locals and old-snapshot (heap persists).
  restore();
  // Step 10: assign the out values to the caller's targets in order.
  for (size_t i = 0; i < s.lhss.size(); ++i) {
    auto *slot = locals_find(st.locals, s.lhss[i]);
    if (!slot)
      return StmtResult::Fail;
    *slot = std::move(outs[i]);
  }
  return StmtResult::Cont;
}

} // namespace sem_detail

inline StmtResult evaluate_stmt(State &st, const Env &env, const Stmt &s) {
  struct V {
    State &st;
    const Env &env;
    StmtResult operator()(const SkipStmt &) const { return StmtResult::Cont; }
    StmtResult operator()(const ReturnStmt &) const { return StmtResult::Ret; }
    StmtResult operator()(const AssertStmt &x) const {
      bool b;
      auto r = sem_detail::eval_bool(st, env, *x.e, b);
      if (r.is_err())
        return stop_of(r.err());
      return b ? StmtResult::Cont : StmtResult::Fail;
    }
    StmtResult operator()(const ThenStmt &x) const {
      auto r = evaluate_stmt(st, env, *x.s1);
      if (r != StmtResult::Cont)
        return r;
      return evaluate_stmt(st, env, *x.s2);
    }
    StmtResult operator()(const IfStmt &x) const {
      bool g;
      auto r = sem_detail::eval_bool(st, env, *x.guard, g);
      if (r.is_err())
        return stop_of(r.err());
      return evaluate_stmt(st, env, g ? *x.thn : *x.els);
    }
    StmtResult operator()(const DecStmt &x) const {
      // Initializers first, left to right, before any binding takes effect.
      std::vector<std::optional<Value>> inits;
      for (const auto &b : x.binds) {
        if (b.init) {
          auto r = evaluate_exp(st, env, **b.init);
          if (r.is_err())
            return stop_of(r.err());
          inits.push_back(r.val());
        } else {
          inits.push_back(std::nullopt);
        }
      }
      for (size_t i = x.binds.size(); i-- > 0;)
        st.locals.insert(st.locals.begin(),
                         {x.binds[i].name, std::move(inits[i])});
      auto r = evaluate_stmt(st, env, *x.scope);
      st.locals.erase(st.locals.begin(), st.locals.begin() + x.binds.size());
      return r;
    }
    StmtResult operator()(const AssignStmt &x) const {
      return sem_detail::do_assign(st, env, x);
    }
    StmtResult operator()(const WhileStmt &x) const {
      for (;;) {
        if (st.clock == 0)
          return StmtResult::Timeout;
        st.clock -= 1;
        bool g;
        auto r = sem_detail::eval_bool(st, env, *x.guard, g);
        if (r.is_err())
          return stop_of(r.err());
        if (!g)
          return StmtResult::Cont;
        auto br = evaluate_stmt(st, env, *x.body);
        if (br != StmtResult::Cont)
          return br;
      }
    }
    StmtResult operator()(const MetCallStmt &x) const {
      return sem_detail::do_metcall(st, env, x);
    }
  };
  return std::visit(V{st, env}, s.node);
}

//===----------------------------------------------------------------------===//
// Program evaluation
//===----------------------------------------------------------------------===//

inline bool member_names_distinct(const Program &p) {
  std::set<std::string> seen;
  for (const auto &m : p.members)
    if (!seen.insert(member_name(m)).second)
      return false;
  return true;
}

inline std::pair<State, StmtResult> evaluate_program(uint64_t fuel,
                                                     const Program &p) {
  State st;
  st.clock = fuel;
  if (!member_names_distinct(p))
    return {std::move(st), StmtResult::Fail};
  // Synthesize a caller frame holding Main's out-parameters so the call has
  // somewhere to land its results.
  std::vector<std::string> lhss;
  if (const Member *m = member_lookup(p, "Main"))
    if (const auto *mm = std::get_if<Method>(m))
      for (const auto &[n, ty] : mm->outs) {
        lhss.push_back(n);
        st.locals.emplace_back(n, std::nullopt);
      }
  Env env{&p};
  Stmt call{MetCallStmt{std::move(lhss), "Main", {}}};
  auto r = evaluate_stmt(st, env, call);
  return {std::move(st), r};
}

} // namespace dfy
