//===--- vccheck.hpp - Bounded falsification and solver-backed checking ---===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Two ways to judge generated conditions:
//
//  * A bounded falsifier: quantifiers range over finite domains drawn from a
//    budget (integer interval, short arrays over a small element pool, a
//    handful of heap variants). A refuted condition comes with the concrete
//    entry state; exhausting the budget is reported as such, never as
//    validity.
//
//  * An SMT-LIB printer for the heap-free fragment plus a driver that hands
//    the query to an external solver: unsat means the condition is valid,
//    sat yields a model, anything else is unknown.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp"
#include "dfy/frontend.hpp"
#include "dfy/semantics.hpp"
#include "dfy/vcg.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unistd.h>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace dfy {

struct Budget {
  long int_lo = -8;
  long int_hi = 8;
  size_t arr_len_max = 3;
  size_t heap_variants_max = 12;
  size_t states_max = 300;
  uint64_t work_max = 8'000'000; // evaluation-step cap per condition
};

//===----------------------------------------------------------------------===//
// Bounded evaluation of conditions
//===----------------------------------------------------------------------===//

enum class VcVal { True, False, Unknown };

namespace vcc_detail {

struct EvalUnknown {};
struct EvalFail {
  std::string why;
};

class VcEval {
public:
  VcEval(State &st, const Env &env, const Budget &b)
      : st_(st), env_(env), b_(b) {}

  Value eval(const Exp &e) {
    if (++work_ > b_.work_max)
      throw EvalUnknown{};
    struct V {
      VcEval &g;
      Value operator()(const IntLit &x) const { return val_int(x.value); }
      Value operator()(const BoolLit &x) const { return val_bool(x.value); }
      Value operator()(const StrLit &x) const { return val_str(x.value); }
      Value operator()(const Var &x) const {
        const auto *v = locals_find(g.st_.locals, x.name);
        if (!v || !v->has_value())
          throw EvalFail{"unbound or uninitialized '" + x.name + "'"};
        return **v;
      }
      Value operator()(const UnOp &x) const {
        auto r = do_uop(x.op, g.eval(*x.operand));
        if (!r)
          throw EvalFail{"ill-typed unary operation"};
        return *r;
      }
      Value operator()(const BinOp &x) const {
        // Short-circuit connectives.
        if (x.op == BinOpKind::And || x.op == BinOpKind::Or ||
            x.op == BinOpKind::Imp) {
          Value l = g.eval(*x.lhs);
          const auto *lb = std::get_if<BoolV>(&l.v);
          if (!lb)
            throw EvalFail{"connective on a non-boolean"};
          if (x.op == BinOpKind::And && !lb->b)
            return val_bool(false);
          if (x.op == BinOpKind::Or && lb->b)
            return val_bool(true);
          if (x.op == BinOpKind::Imp && !lb->b)
            return val_bool(true);
          Value r = g.eval(*x.rhs);
          if (!std::holds_alternative<BoolV>(r.v))
            throw EvalFail{"connective on a non-boolean"};
          return r;
        }
        Value l = g.eval(*x.lhs);
        Value r = g.eval(*x.rhs);
        auto res = do_binop(x.op, l, r);
        if (!res)
          throw EvalFail{"ill-typed binary operation"};
        return *res;
      }
      Value operator()(const Ite &x) const {
        Value c = g.eval(*x.cond);
        const auto *b = std::get_if<BoolV>(&c.v);
        if (!b)
          throw EvalFail{"non-boolean ite condition"};
        return g.eval(b->b ? *x.thn : *x.els);
      }
      Value operator()(const ArrLen &x) const {
        Value a = g.eval(*x.arr);
        const auto *av = std::get_if<ArrV>(&a.v);
        if (!av)
          throw EvalFail{"len of a non-array"};
        return val_int((long)av->len);
      }
      Value operator()(const ArrSel &x) const {
        Value a = g.eval(*x.arr);
        Value i = g.eval(*x.idx);
        const auto *av = std::get_if<ArrV>(&a.v);
        const auto *iv = std::get_if<IntV>(&i.v);
        if (!av || !iv)
          throw EvalFail{"ill-typed selection"};
        if (iv->i < 0 || iv->i >= av->len || av->loc >= g.st_.heap.size())
          throw EvalFail{"index out of bounds"};
        return g.st_.heap[av->loc].elems[(size_t)iv->i];
      }
      Value operator()(const FunCall &x) const {
        // Delegate to the plain evaluator (function bodies are plain
        // expressions).
        std::vector<Value> args;
        for (const auto &a : x.args)
          args.push_back(g.eval(*a));
        const Member *mem = member_lookup(*g.env_.prog, x.name);
        const auto *f = mem ? std::get_if<Function>(mem) : nullptr;
        if (!f || f->ins.size() != args.size())
          throw EvalFail{"bad function call '" + x.name + "'"};
        State sub;
        sub.clock = 1u << 16;
        sub.heap = g.st_.heap;
        for (size_t i = 0; i < args.size(); ++i)
          sub.locals.emplace_back(f->ins[i].first, args[i]);
        sub.locals_old = sub.locals;
        sub.heap_old = sub.heap;
        auto r = evaluate_exp(sub, g.env_, *f->body);
        if (!r.is_val())
          throw EvalFail{"function call failed"};
        return r.val();
      }
      Value operator()(const ForallExp &x) const { return g.forall(x); }
      Value operator()(const LetExp &x) const {
        std::vector<Value> vals;
        for (const auto &[n, rhs] : x.binds)
          vals.push_back(g.eval(*rhs));
        for (size_t i = x.binds.size(); i-- > 0;)
          g.st_.locals.insert(g.st_.locals.begin(),
                              {x.binds[i].first, std::move(vals[i])});
        Value r = g.eval(*x.body);
        g.st_.locals.erase(g.st_.locals.begin(),
                           g.st_.locals.begin() + (long)x.binds.size());
        return r;
      }
      Value operator()(const OldExp &x) const {
        return g.under(g.st_.locals_old, g.st_.heap_old, true, true, *x.e);
      }
      Value operator()(const OldHeapExp &x) const {
        return g.under(g.st_.locals_old, g.st_.heap_old, false, true, *x.e);
      }
      Value operator()(const PrevExp &x) const {
        return g.under(g.st_.locals_prev, g.st_.heap_prev, true, true, *x.e);
      }
      Value operator()(const PrevHeapExp &x) const {
        return g.under(g.st_.locals_prev, g.st_.heap_prev, false, true, *x.e);
      }
      Value operator()(const SetPrevExp &x) const {
        Locals saved_lp = g.st_.locals_prev;
        Heap saved_hp = g.st_.heap_prev;
        g.st_.locals_prev = g.st_.locals;
        g.st_.heap_prev = g.st_.heap;
        Value r = g.eval(*x.e);
        g.st_.locals_prev = std::move(saved_lp);
        g.st_.heap_prev = std::move(saved_hp);
        return r;
      }
      Value operator()(const ForallHeapExp &x) const {
        return g.forall_heap(x);
      }
    };
    return std::visit(V{*this}, e.node);
  }

private:
  Value under(const Locals &ls, const Heap &h, bool swap_locals,
              bool swap_heap, const Exp &e) {
    Locals saved_l;
    Heap saved_h;
    if (swap_locals) {
      saved_l = st_.locals;
      st_.locals = ls;
    }
    if (swap_heap) {
      saved_h = st_.heap;
      st_.heap = h;
    }
    Value r;
    try {
      r = eval(e);
    } catch (...) {
      if (swap_locals)
        st_.locals = std::move(saved_l);
      if (swap_heap)
        st_.heap = std::move(saved_h);
      throw;
    }
    if (swap_locals)
      st_.locals = std::move(saved_l);
    if (swap_heap)
      st_.heap = std::move(saved_h);
    return r;
  }

  static const std::vector<Value> &elem_pool(const DType &t) {
    static const std::vector<Value> ints = {val_int(-2), val_int(-1),
                                            val_int(0), val_int(1),
                                            val_int(2)};
    static const std::vector<Value> bools = {val_bool(false), val_bool(true)};
    static const std::vector<Value> strs = {val_str(""), val_str("a")};
    switch (t.kind) {
    case DType::Kind::Int:
      return ints;
    case DType::Kind::Bool:
      return bools;
    case DType::Kind::Str:
      return strs;
    case DType::Kind::Arr:
      throw EvalUnknown{}; // nested array domains are out of budget
    }
    return ints;
  }

  bool check_all(const ForallExp &x, const Value &v) {
    st_.locals.insert(st_.locals.begin(), {x.bound, v});
    Value r;
    try {
      r = eval(*x.body);
    } catch (...) {
      st_.locals.erase(st_.locals.begin());
      throw;
    }
    st_.locals.erase(st_.locals.begin());
    const auto *b = std::get_if<BoolV>(&r.v);
    if (!b)
      throw EvalFail{"non-boolean quantifier body"};
    return b->b;
  }

  Value forall(const ForallExp &x) {
    switch (x.ty.kind) {
    case DType::Kind::Int:
      for (long i = b_.int_lo; i <= b_.int_hi; ++i)
        if (!check_all(x, val_int(i)))
          return val_bool(false);
      return val_bool(true);
    case DType::Kind::Bool:
      for (bool v : {false, true})
        if (!check_all(x, val_bool(v)))
          return val_bool(false);
      return val_bool(true);
    case DType::Kind::Str:
      for (const auto &s : elem_pool(DType::str_type()))
        if (!check_all(x, s))
          return val_bool(false);
      return val_bool(true);
    case DType::Kind::Arr: {
      // Enumerate short arrays over the element pool, each materialized as
      // a fresh allocation and discarded afterwards.
      const DType elem = x.ty.element();
      const auto &pool = elem_pool(elem);
      for (size_t len = 0; len <= b_.arr_len_max; ++len) {
        std::vector<size_t> odo(len, 0);
        for (;;) {
          std::vector<Value> elems;
          for (size_t i = 0; i < len; ++i)
            elems.push_back(pool[odo[i]]);
          uint64_t loc = st_.heap.size();
          st_.heap.push_back(HeapValue{std::move(elems), elem});
          bool ok;
          try {
            ok = check_all(x, val_arr(len, loc, elem));
          } catch (...) {
            st_.heap.resize(loc);
            throw;
          }
          st_.heap.resize(loc);
          if (!ok)
            return val_bool(false);
          // Advance the odometer.
          size_t k = 0;
          while (k < len && ++odo[k] == pool.size())
            odo[k++] = 0;
          if (k == len)
            break;
          if (len == 0)
            break;
        }
        if (len == 0)
          continue;
      }
      return val_bool(true);
    }
    }
    throw EvalUnknown{};
  }

  Value forall_heap(const ForallHeapExp &x) {
    // Collect the havocked array cells (lengths are preserved).
    struct Target {
      uint64_t loc;
      size_t len;
      DType elem;
    };
    std::vector<Target> targets;
    for (const auto &n : x.havoc) {
      const auto *v = locals_find(st_.locals, n);
      if (!v || !v->has_value())
        throw EvalFail{"havoc of unbound '" + n + "'"};
      const auto *a = std::get_if<ArrV>(&(*v)->v);
      if (!a)
        throw EvalFail{"havoc of a non-array"};
      if (a->loc >= st_.heap.size())
        throw EvalFail{"havoc of a dangling array"};
      targets.push_back({a->loc, (size_t)a->len, a->elem_ty});
    }

    Heap saved = st_.heap;
    auto run_body = [&]() -> bool {
      Value r;
      try {
        r = eval(*x.body);
      } catch (...) {
        st_.heap = saved;
        throw;
      }
      const auto *b = std::get_if<BoolV>(&r.v);
      if (!b) {
        st_.heap = saved;
        throw EvalFail{"non-boolean heap-quantifier body"};
      }
      return b->b;
    };

    // Variant 0: the unchanged heap.
    if (!run_body()) {
      st_.heap = saved;
      return val_bool(false);
    }
    // Then single-cell writes drawn from the element pool, in order, up to
    // the variant budget.
    size_t used = 1;
    for (const auto &t : targets) {
      const auto &pool = elem_pool(t.elem);
      for (size_t i = 0; i < t.len && used < b_.heap_variants_max; ++i) {
        for (const auto &pv : pool) {
          if (used >= b_.heap_variants_max)
            break;
          st_.heap = saved;
          st_.heap[t.loc].elems[i] = pv;
          ++used;
          if (!run_body()) {
            st_.heap = saved;
            return val_bool(false);
          }
        }
      }
    }
    st_.heap = saved;
    return val_bool(true);
  }

  State &st_;
  const Env &env_;
  const Budget &b_;
  uint64_t work_ = 0;
};

} // namespace vcc_detail

/// Evaluate a condition in a given state with bounded quantifier domains.
inline VcVal eval_vc(State &st, const Env &env, const Exp &e,
                     const Budget &b) {
  try {
    vcc_detail::VcEval g(st, env, b);
    Value v = g.eval(e);
    const auto *bv = std::get_if<BoolV>(&v.v);
    if (!bv)
      return VcVal::Unknown;
    return bv->b ? VcVal::True : VcVal::False;
  } catch (const vcc_detail::EvalUnknown &) {
    return VcVal::Unknown;
  } catch (const vcc_detail::EvalFail &) {
    // A failing evaluation (out-of-bounds read, unbound name) refutes
    // nothing by itself; treat it as out of budget.
    return VcVal::Unknown;
  }
}

//===----------------------------------------------------------------------===//
// Falsifier
//===----------------------------------------------------------------------===//

enum class CheckVerdict { BoundedValid, Counterexample, Unknown };

struct CheckResult {
  CheckVerdict verdict = CheckVerdict::BoundedValid;
  std::string detail; // counterexample description or reason
};

namespace vcc_detail {

inline std::string show_value(const State &st, const Value &v) {
  if (const auto *i = std::get_if<IntV>(&v.v))
    return i->i.str();
  if (const auto *b = std::get_if<BoolV>(&v.v))
    return b->b ? "true" : "false";
  if (const auto *s = std::get_if<StrV>(&v.v))
    return "\"" + s->s + "\"";
  const auto &a = std::get<ArrV>(v.v);
  std::string out = "[";
  if (a.loc < st.heap.size())
    for (size_t i = 0; i < st.heap[a.loc].elems.size(); ++i)
      out += (i ? " " : "") + show_value(st, st.heap[a.loc].elems[i]);
  return out + "]";
}

inline Value sample_value(std::mt19937_64 &rng, const DType &ty,
                          const Budget &b, Heap &heap, int corner) {
  switch (ty.kind) {
  case DType::Kind::Int: {
    // The first few states per condition probe the corners.
    static const long corner_vals[] = {0, 1, -1};
    if (corner >= 0 && corner < 3)
      return val_int(corner_vals[corner]);
    if (corner == 3)
      return val_int(b.int_lo);
    if (corner == 4)
      return val_int(b.int_hi);
    // Bias toward a tiny pool so that independently sampled values (a key
    // and an array cell, say) coincide often enough to matter.
    std::uniform_int_distribution<int> bias(0, 3);
    if (bias(rng) == 0) {
      std::uniform_int_distribution<long> pool(-2, 2);
      return val_int(pool(rng));
    }
    std::uniform_int_distribution<long> d(b.int_lo, b.int_hi);
    return val_int(d(rng));
  }
  case DType::Kind::Bool: {
    if (corner >= 0)
      return val_bool(corner % 2 == 1);
    std::uniform_int_distribution<int> d(0, 1);
    return val_bool(d(rng) == 1);
  }
  case DType::Kind::Str: {
    static const char *pool[] = {"", "a", "b"};
    if (corner >= 0)
      return val_str(pool[corner % 3]);
    std::uniform_int_distribution<size_t> d(0, 2);
    return val_str(pool[d(rng)]);
  }
  case DType::Kind::Arr: {
    size_t len;
    if (corner >= 0) {
      len = (size_t)corner % (b.arr_len_max + 1);
    } else {
      std::uniform_int_distribution<size_t> d(0, b.arr_len_max);
      len = d(rng);
    }
    std::vector<Value> elems;
    for (size_t i = 0; i < len; ++i)
      elems.push_back(sample_value(rng, ty.element(), b, heap, -1));
    uint64_t loc = heap.size();
    heap.push_back(HeapValue{std::move(elems), ty.element()});
    return val_arr(len, loc, ty.element());
  }
  }
  return val_int(0);
}

} // namespace vcc_detail

/// Sample entry states for a condition's leading binders (the method's
/// in-parameters) and evaluate the remainder; any false instance is a real
/// counterexample of the condition.
inline CheckResult falsify(const Program &prepared,
                           const std::vector<TypedName> &ins, const Exp &cond,
                           const Budget &b, uint64_t seed) {
  // Peel the leading quantifiers that close over the in-parameters; they
  // are sampled rather than enumerated, and feed both the entry snapshot
  // and the current state.
  const Exp *body = &cond;
  std::vector<TypedName> peeled;
  while (peeled.size() < ins.size()) {
    const auto *f = std::get_if<ForallExp>(&body->node);
    if (!f || f->bound != ins[peeled.size()].first)
      break;
    peeled.emplace_back(f->bound, f->ty);
    body = f->body.get();
  }

  std::mt19937_64 rng(seed);
  Env env{&prepared};
  size_t unknowns = 0;
  for (size_t s = 0; s < b.states_max; ++s) {
    State st;
    int corner = s < 5 ? (int)s : -1;
    for (const auto &[n, ty] : peeled)
      st.locals.emplace_back(
          n, vcc_detail::sample_value(rng, ty, b, st.heap, corner));
    // Entry-consistent snapshots: at the method boundary the old state and
    // the current state coincide.
    st.locals_old = st.locals;
    st.heap_old = st.heap;
    st.locals_prev = st.locals;
    st.heap_prev = st.heap;
    VcVal r = eval_vc(st, env, *body, b);
    if (r == VcVal::False) {
      std::string d = "falsified with";
      for (const auto &[n, v] : st.locals)
        d += " " + n + " = " + (v ? vcc_detail::show_value(st, *v) : "?");
      return {CheckVerdict::Counterexample, d};
    }
    if (r == VcVal::Unknown)
      ++unknowns;
  }
  if (unknowns == b.states_max)
    return {CheckVerdict::Unknown, "every sampled state exceeded the budget"};
  return {CheckVerdict::BoundedValid,
          std::to_string(b.states_max - unknowns) + " states checked"};
}

//===----------------------------------------------------------------------===//
// SMT-LIB emission (heap-free fragment)
//===----------------------------------------------------------------------===//

namespace vcc_detail {

struct SmtFail {
  std::string why;
};

class SmtPrinter {
public:
  std::string translate(const Exp &cond) {
    // not(forall xs. phi) becomes free constants plus (assert (not phi)).
    const Exp *body = &cond;
    std::vector<std::pair<std::string, DType>> consts;
    while (const auto *f = std::get_if<ForallExp>(&body->node)) {
      consts.emplace_back(f->bound, f->ty);
      body = f->body.get();
    }
    std::map<std::string, std::string> scope;
    for (auto &[n, ty] : consts) {
      if (ty.kind == DType::Kind::Arr || ty.kind == DType::Kind::Str)
        throw SmtFail{"arrays and strings are outside the solver fragment"};
      scope[n] = n;
    }
    entry_ = scope;
    std::string phi = term(*body, scope);
    std::string out = "(set-logic ALL)\n";
    for (const auto &[n, ty] : consts)
      out += "(declare-const " + n +
             (ty.kind == DType::Kind::Int ? " Int" : " Bool") + ")\n";
    out += "(assert (not " + phi + "))\n(check-sat)\n(get-model)\n";
    return out;
  }

private:
  std::string fresh(const std::string &base) {
    return base + "!" + std::to_string(counter_++);
  }

  std::string term(const Exp &e, std::map<std::string, std::string> scope) {
    struct V {
      SmtPrinter &g;
      const std::map<std::string, std::string> &scope;
      std::string operator()(const IntLit &x) const {
        if (x.value < 0)
          return "(- " + BigInt(-x.value).str() + ")";
        return x.value.str();
      }
      std::string operator()(const BoolLit &x) const {
        return x.value ? "true" : "false";
      }
      std::string operator()(const StrLit &) const {
        throw SmtFail{"strings are outside the solver fragment"};
      }
      std::string operator()(const Var &x) const {
        auto it = scope.find(x.name);
        if (it == scope.end())
          throw SmtFail{"unbound '" + x.name + "'"};
        return it->second;
      }
      std::string operator()(const UnOp &x) const {
        std::string a = g.term(*x.operand, scope);
        return std::string("(") + (x.op == UnOpKind::Not ? "not" : "-") +
               " " + a + ")";
      }
      std::string operator()(const BinOp &x) const {
        static const char *names[] = {"+",  "-",  "*",  "div", "mod",
                                      "<",  "<=", ">",  ">=",  "=",
                                      "neq", "and", "or", "=>"};
        std::string a = g.term(*x.lhs, scope);
        std::string b = g.term(*x.rhs, scope);
        if (x.op == BinOpKind::Neq)
          return "(not (= " + a + " " + b + "))";
        return "(" + std::string(names[(int)x.op]) + " " + a + " " + b + ")";
      }
      std::string operator()(const Ite &x) const {
        return "(ite " + g.term(*x.cond, scope) + " " +
               g.term(*x.thn, scope) + " " + g.term(*x.els, scope) + ")";
      }
      std::string operator()(const ArrLen &) const {
        throw SmtFail{"arrays are outside the solver fragment"};
      }
      std::string operator()(const ArrSel &) const {
        throw SmtFail{"arrays are outside the solver fragment"};
      }
      std::string operator()(const FunCall &) const {
        throw SmtFail{"function calls are outside the solver fragment"};
      }
      std::string operator()(const ForallExp &x) const {
        if (x.ty.kind == DType::Kind::Arr || x.ty.kind == DType::Kind::Str)
          throw SmtFail{"arrays and strings are outside the solver fragment"};
        std::string n = g.fresh(x.bound);
        auto inner = scope;
        inner[x.bound] = n;
        return "(forall ((" + n +
               (x.ty.kind == DType::Kind::Int ? " Int" : " Bool") + ")) " +
               g.term(*x.body, inner) + ")";
      }
      std::string operator()(const LetExp &x) const {
        if (x.binds.empty())
          return g.term(*x.body, scope);
        std::string binds;
        auto inner = scope;
        for (const auto &[n, rhs] : x.binds) {
          std::string fn = g.fresh(n);
          binds += "(" + fn + " " + g.term(*rhs, scope) + ") ";
          inner[n] = fn; // SMT let is parallel, and so is ours
        }
        return "(let (" + binds + ") " + g.term(*x.body, inner) + ")";
      }
      std::string operator()(const OldExp &x) const {
        // The entry state: variables revert to the outermost constants.
        return g.term(*x.e, g.entry_);
      }
      std::string operator()(const OldHeapExp &x) const {
        return g.term(*x.e, scope); // no heap in this fragment
      }
      std::string operator()(const PrevExp &) const {
        throw SmtFail{"heap snapshots are outside the solver fragment"};
      }
      std::string operator()(const PrevHeapExp &) const {
        throw SmtFail{"heap snapshots are outside the solver fragment"};
      }
      std::string operator()(const SetPrevExp &) const {
        throw SmtFail{"heap snapshots are outside the solver fragment"};
      }
      std::string operator()(const ForallHeapExp &) const {
        throw SmtFail{"heap quantifiers are outside the solver fragment"};
      }
    };
    return std::visit(V{*this, scope}, e.node);
  }

  std::map<std::string, std::string> entry_;
  unsigned long counter_ = 0;
};

} // namespace vcc_detail

/// Print one condition as an SMT-LIB script asserting its negation; the
/// condition must lie in the heap-free fragment.
inline Result<std::string> smt_emit(const Exp &cond) {
  using R = Result<std::string>;
  try {
    vcc_detail::SmtPrinter p;
    return R(p.translate(cond));
  } catch (const vcc_detail::SmtFail &f) {
    return R::err("smt_emit: " + f.why);
  }
}

enum class SmtVerdict { Valid, Invalid, Unknown };

struct SmtResult {
  SmtVerdict verdict = SmtVerdict::Unknown;
  std::string model; // solver output past the status line
};

/// Run `<solver_cmd> <file>` on the script; unsat means the condition is
/// valid. A missing or failing solver yields Unknown.
inline SmtResult smt_check(const std::string &solver_cmd,
                           const std::string &script, unsigned timeout_secs) {
  SmtResult out;
  std::string path = "/tmp/vc_" + std::to_string(::getpid()) + "_" +
                     std::to_string(rand()) + ".smt2";
  {
    std::ofstream f(path);
    f << script;
  }
  std::string cmd = "timeout " + std::to_string(timeout_secs) + " " +
                    solver_cmd + " " + path + " 2>/dev/null";
  FILE *pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    std::remove(path.c_str());
    return out;
  }
  std::string text;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0)
    text.append(buf, n);
  ::pclose(pipe);
  std::remove(path.c_str());
  std::istringstream iss(text);
  std::string status;
  std::getline(iss, status);
  if (status == "unsat") {
    out.verdict = SmtVerdict::Valid;
  } else if (status == "sat") {
    out.verdict = SmtVerdict::Invalid;
    out.model = text.substr(status.size());
  }
  return out;
}

//===----------------------------------------------------------------------===//
// Whole-program checking
//===----------------------------------------------------------------------===//

struct MethodCheck {
  std::string method;
  CheckVerdict verdict = CheckVerdict::BoundedValid;
  std::string detail;
  bool vcg_error = false; // condition generation itself rejected the method
};

struct CheckOpts {
  Budget budget;
  uint64_t seed = 1;
  std::string solver_cmd; // empty: falsifier only
  unsigned solver_timeout_secs = 10;
};

/// Check every method: generate its conditions and judge each one, with the
/// solver when available and the bounded falsifier otherwise (and as the
/// fallback for conditions outside the solver fragment).
inline std::vector<MethodCheck> check_program(const Program &raw,
                                              const CheckOpts &opts) {
  std::vector<MethodCheck> out;
  if (!member_names_distinct(raw)) {
    out.push_back(
        {"", CheckVerdict::Unknown, "member names are not distinct", true});
    return out;
  }
  Program prepared = freshen_program(normalize(raw));
  for (const auto &mem : prepared.members) {
    const auto *m = std::get_if<Method>(&mem);
    if (!m)
      continue;
    MethodCheck mc;
    mc.method = m->name;
    auto conds = method_vcg(prepared, m->name);
    if (!conds.ok()) {
      mc.vcg_error = true;
      mc.verdict = CheckVerdict::Counterexample;
      mc.detail = conds.error();
      out.push_back(std::move(mc));
      continue;
    }
    size_t idx = 0;
    bool any_unknown = false;
    for (const auto &c : conds.value()) {
      ++idx;
      bool settled = false;
      if (!opts.solver_cmd.empty()) {
        auto script = smt_emit(*c);
        if (script.ok()) {
          SmtResult sr = smt_check(opts.solver_cmd, script.value(),
                                   opts.solver_timeout_secs);
          if (sr.verdict == SmtVerdict::Valid) {
            settled = true;
          } else if (sr.verdict == SmtVerdict::Invalid) {
            mc.verdict = CheckVerdict::Counterexample;
            mc.detail = "condition " + std::to_string(idx) +
                        " refuted by the solver" + sr.model;
            settled = true;
          }
        }
      }
      if (settled) {
        if (mc.verdict == CheckVerdict::Counterexample)
          break;
        continue;
      }
      CheckResult fr =
          falsify(prepared, m->ins, *c, opts.budget, opts.seed + idx);
      if (fr.verdict == CheckVerdict::Counterexample) {
        mc.verdict = CheckVerdict::Counterexample;
        mc.detail = "condition " + std::to_string(idx) + " " + fr.detail;
        break;
      }
      if (fr.verdict == CheckVerdict::Unknown)
        any_unknown = true;
    }
    if (mc.verdict != CheckVerdict::Counterexample && any_unknown) {
      mc.verdict = CheckVerdict::Unknown;
      if (mc.detail.empty())
        mc.detail = "some conditions exceeded the budget";
    }
    out.push_back(std::move(mc));
  }
  return out;
}

} // namespace dfy
