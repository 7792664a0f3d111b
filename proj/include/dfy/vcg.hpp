//===--- vcg.hpp - Weakest-precondition condition generator -------------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// stmt_vcg computes, for a statement and a list of postconditions, the list
// of conditions (interpreted conjunctively) that must hold before it:
//
//   Return      -> the method's ensures
//   Skip        -> post
//   Assert e    -> e :: post
//   Assign      -> one condition Let (targets := rhss) (conj post)
//   array write -> bounds plus a SetPrev/ForallHeap frame over the array
//   allocation  -> 0 <= len plus a fresh-array quantifier frame
//   While       -> invariants on entry, inductiveness with a lexicographic
//                  decreases check against Let-bound snapshots, and the exit
//                  implication, both closed over the locals the body assigns
//   call        -> callee precondition, a same-level decreases comparison
//                  against the caller's entry measure, and the callee ensures
//                  implying the continuation, closed over the call's targets
//
// method_vcg closes each condition over the typed in-parameters under the
// method's requires; program_vcg assembles all methods using call-graph
// levels (SCCs of the call graph in reverse topological order).
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp"
#include "dfy/frontend.hpp"
#include "dfy/passes.hpp"
#include "dfy/result.hpp"
#include "dfy/semantics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfy {

using TypeEnv = std::vector<TypedName>; // lookup = first match

namespace vcg_detail {

struct VcgFail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const DType *tenv_lookup(const TypeEnv &ls, const std::string &n) {
  for (const auto &[name, ty] : ls)
    if (name == n)
      return &ty;
  return nullptr;
}

inline std::string type_str(const DType &t) {
  switch (t.kind) {
  case DType::Kind::Int:
    return "int";
  case DType::Kind::Bool:
    return "bool";
  case DType::Kind::Str:
    return "string";
  case DType::Kind::Arr:
    return "(array " + type_str(t.element()) + ")";
  }
  return "?";
}

inline DType type_of(const TypeEnv &ls, const Exp &e) {
  struct V {
    const TypeEnv &ls;
    DType operator()(const IntLit &) const { return DType::int_type(); }
    DType operator()(const BoolLit &) const { return DType::bool_type(); }
    DType operator()(const StrLit &) const { return DType::str_type(); }
    DType operator()(const Var &x) const {
      const DType *t = tenv_lookup(ls, x.name);
      if (!t)
        throw VcgFail("get_types: unbound variable '" + x.name + "'");
      return *t;
    }
    DType operator()(const UnOp &x) const {
      DType t = type_of(ls, *x.operand);
      if (x.op == UnOpKind::Not) {
        if (t.kind != DType::Kind::Bool)
          throw VcgFail("get_types: 'not' needs a bool operand");
        return t;
      }
      if (t.kind != DType::Kind::Int)
        throw VcgFail("get_types: 'neg' needs an int operand");
      return t;
    }
    DType operator()(const BinOp &x) const {
      DType a = type_of(ls, *x.lhs);
      DType b = type_of(ls, *x.rhs);
      switch (x.op) {
      case BinOpKind::Add:
      case BinOpKind::Sub:
      case BinOpKind::Mul:
      case BinOpKind::Div:
      case BinOpKind::Mod:
        if (a.kind != DType::Kind::Int || b.kind != DType::Kind::Int)
          throw VcgFail("get_types: arithmetic needs int operands");
        return DType::int_type();
      case BinOpKind::Lt:
      case BinOpKind::Le:
      case BinOpKind::Gt:
      case BinOpKind::Ge:
        if (a.kind != DType::Kind::Int || b.kind != DType::Kind::Int)
          throw VcgFail("get_types: comparison needs int operands");
        return DType::bool_type();
      case BinOpKind::Eq:
      case BinOpKind::Neq:
        if (!(a == b))
          throw VcgFail("get_types: equality needs same-type operands");
        return DType::bool_type();
      case BinOpKind::And:
      case BinOpKind::Or:
      case BinOpKind::Imp:
        if (a.kind != DType::Kind::Bool || b.kind != DType::Kind::Bool)
          throw VcgFail("get_types: connective needs bool operands");
        return DType::bool_type();
      }
      throw VcgFail("get_types: unknown operator");
    }
    DType operator()(const Ite &x) const {
      if (type_of(ls, *x.cond).kind != DType::Kind::Bool)
        throw VcgFail("get_types: ite condition must be bool");
      DType t = type_of(ls, *x.thn);
      DType e = type_of(ls, *x.els);
      if (!(t == e))
        throw VcgFail("get_types: ite branches must have the same type");
      return t;
    }
    DType operator()(const ArrLen &x) const {
      if (type_of(ls, *x.arr).kind != DType::Kind::Arr)
        throw VcgFail("get_types: len needs an array");
      return DType::int_type();
    }
    DType operator()(const ArrSel &x) const {
      DType a = type_of(ls, *x.arr);
      if (a.kind != DType::Kind::Arr)
        throw VcgFail("get_types: sel needs an array");
      if (type_of(ls, *x.idx).kind != DType::Kind::Int)
        throw VcgFail("get_types: array index must be int");
      return a.element();
    }
    DType operator()(const FunCall &x) const {
      throw VcgFail("unsupported: function call '" + x.name +
                    "' in a verification context");
    }
    DType operator()(const ForallExp &x) const {
      TypeEnv inner = ls;
      inner.insert(inner.begin(), {x.bound, x.ty});
      if (type_of(inner, *x.body).kind != DType::Kind::Bool)
        throw VcgFail("get_types: quantifier body must be bool");
      return DType::bool_type();
    }
    DType operator()(const LetExp &x) const {
      TypeEnv inner = ls;
      for (size_t i = x.binds.size(); i-- > 0;)
        inner.insert(inner.begin(),
                     {x.binds[i].first, type_of(ls, *x.binds[i].second)});
      return type_of(inner, *x.body);
    }
    DType operator()(const OldExp &x) const { return type_of(ls, *x.e); }
    DType operator()(const OldHeapExp &x) const { return type_of(ls, *x.e); }
    DType operator()(const PrevExp &x) const { return type_of(ls, *x.e); }
    DType operator()(const PrevHeapExp &x) const { return type_of(ls, *x.e); }
    DType operator()(const SetPrevExp &x) const { return type_of(ls, *x.e); }
    DType operator()(const ForallHeapExp &x) const {
      for (const auto &n : x.havoc) {
        const DType *t = tenv_lookup(ls, n);
        if (!t || t->kind != DType::Kind::Arr)
          throw VcgFail("get_types: forallheap havoc name '" + n +
                        "' is not a declared array");
      }
      if (type_of(ls, *x.body).kind != DType::Kind::Bool)
        throw VcgFail("get_types: forallheap body must be bool");
      return DType::bool_type();
    }
  };
  return std::visit(V{ls}, e.node);
}

} // namespace vcg_detail

/// Synthesize the type of each expression under the locals typing.
inline Result<std::vector<DType>> get_types(const TypeEnv &ls,
                                            const std::vector<ExpPtr> &es) {
  using R = Result<std::vector<DType>>;
  try {
    std::vector<DType> out;
    for (const auto &e : es)
      out.push_back(vcg_detail::type_of(ls, *e));
    return R(std::move(out));
  } catch (const vcg_detail::VcgFail &f) {
    return R::err(f.what());
  }
}

//===----------------------------------------------------------------------===//
// Call-graph levels
//===----------------------------------------------------------------------===//

namespace vcg_detail {

inline void collect_calls(const Stmt &s, std::set<std::string> &out) {
  struct V {
    std::set<std::string> &out;
    void operator()(const SkipStmt &) const {}
    void operator()(const ReturnStmt &) const {}
    void operator()(const AssertStmt &) const {}
    void operator()(const AssignStmt &) const {}
    void operator()(const ThenStmt &x) const {
      collect_calls(*x.s1, out);
      collect_calls(*x.s2, out);
    }
    void operator()(const IfStmt &x) const {
      collect_calls(*x.thn, out);
      collect_calls(*x.els, out);
    }
    void operator()(const DecStmt &x) const { collect_calls(*x.scope, out); }
    void operator()(const WhileStmt &x) const { collect_calls(*x.body, out); }
    void operator()(const MetCallStmt &x) const { out.insert(x.method); }
  };
  std::visit(V{out}, s.node);
}

struct Tarjan {
  const std::vector<std::string> &names;
  const std::vector<std::vector<size_t>> &adj;
  std::vector<int> index, low, comp;
  std::vector<bool> on_stack;
  std::vector<size_t> stack;
  int next_index = 0, next_comp = 0;
  std::vector<std::vector<size_t>> comps; // in completion order

  Tarjan(const std::vector<std::string> &ns,
         const std::vector<std::vector<size_t>> &a)
      : names(ns), adj(a), index(ns.size(), -1), low(ns.size(), 0),
        comp(ns.size(), -1), on_stack(ns.size(), false) {}

  void dfs(size_t v) {
    index[v] = low[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
    for (size_t w : adj[v]) {
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<size_t> c;
      for (;;) {
        size_t w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = next_comp;
        c.push_back(w);
        if (w == v)
          break;
      }
      comps.push_back(std::move(c));
      ++next_comp;
    }
  }
};

} // namespace vcg_detail

/// Level per method: strongly connected components of the call graph share a
/// level, and a callee outside the caller's component has a strictly lower
/// level.
inline std::map<std::string, size_t> method_levels(const Program &p) {
  std::vector<std::string> names;
  std::map<std::string, size_t> index_of;
  for (const auto &m : p.members)
    if (std::holds_alternative<Method>(m)) {
      index_of.emplace(member_name(m), names.size());
      names.push_back(member_name(m));
    }
  std::vector<std::vector<size_t>> adj(names.size());
  for (const auto &m : p.members) {
    const auto *mt = std::get_if<Method>(&m);
    if (!mt)
      continue;
    std::set<std::string> callees;
    vcg_detail::collect_calls(*mt->body, callees);
    for (const auto &c : callees) {
      auto it = index_of.find(c);
      if (it != index_of.end())
        adj[index_of[mt->name]].push_back(it->second);
    }
  }
  vcg_detail::Tarjan t(names, adj);
  for (size_t v = 0; v < names.size(); ++v)
    if (t.index[v] < 0)
      t.dfs(v);
  // Tarjan completes components in reverse topological order: a component is
  // finished only after everything it reaches. Level = 1 + max callee level.
  std::vector<size_t> comp_level(t.comps.size(), 0);
  for (size_t ci = 0; ci < t.comps.size(); ++ci) {
    size_t lvl = 0;
    for (size_t v : t.comps[ci])
      for (size_t w : adj[v])
        if ((size_t)t.comp[w] != ci)
          lvl = std::max(lvl, comp_level[t.comp[w]] + 1);
    comp_level[ci] = lvl;
  }
  std::map<std::string, size_t> out;
  for (size_t v = 0; v < names.size(); ++v)
    out[names[v]] = comp_level[t.comp[v]];
  return out;
}

//===----------------------------------------------------------------------===//
// stmt_vcg
//===----------------------------------------------------------------------===//

struct MethodInfo {
  std::vector<TypedName> ins;
  std::vector<TypedName> outs;
  std::vector<ExpPtr> reqs;
  std::vector<ExpPtr> ens;
  std::vector<ExpPtr> decreases;
  std::vector<std::string> mods;
  size_t level = 0;
};

namespace vcg_detail {

class Vcg {
public:
  Vcg(const std::map<std::string, MethodInfo> &methods, std::string caller,
      std::vector<ExpPtr> ens, std::vector<ExpPtr> decs,
      std::vector<std::string> mods)
      : methods_(methods), caller_(std::move(caller)), ens_(std::move(ens)),
        decs_(std::move(decs)), mods_(std::move(mods)) {}

  std::string fresh() { return "d" + std::to_string(counter_++); }

  void require_bool(const TypeEnv &ls, const Exp &e, const char *what) {
    if (type_of(ls, e).kind != DType::Kind::Bool)
      throw VcgFail(std::string("stmt_vcg: ") + what + " must be boolean");
  }

  /// Strict lexicographic comparison news < olds with the non-negativity
  /// side conditions folded in by the callers.
  static ExpPtr lex_lt(const std::vector<ExpPtr> &news,
                       const std::vector<ExpPtr> &olds) {
    ExpPtr cur = mk_lt(news.back(), olds.back());
    for (size_t i = news.size() - 1; i-- > 0;)
      cur = mk_or(mk_lt(news[i], olds[i]),
                  mk_and(mk_eq(news[i], olds[i]), std::move(cur)));
    return cur;
  }

  static std::vector<ExpPtr> nonneg(const std::vector<ExpPtr> &olds,
                                    const std::vector<ExpPtr> &news) {
    std::vector<ExpPtr> out;
    for (const auto &o : olds)
      out.push_back(mk_le(mk_int(0), o));
    for (const auto &n : news)
      out.push_back(mk_le(mk_int(0), n));
    return out;
  }

  static ExpPtr forall_close(const std::vector<TypedName> &binders,
                             ExpPtr body) {
    for (size_t i = binders.size(); i-- > 0;)
      body = mk_forall(binders[i].first, binders[i].second, std::move(body));
    return body;
  }

  /// An expression denoting the default element value of a type; nested
  /// arrays have no such expression.
  static ExpPtr default_exp(const DType &t) {
    switch (t.kind) {
    case DType::Kind::Int:
      return mk_int(0);
    case DType::Kind::Bool:
      return mk_bool(false);
    case DType::Kind::Str:
      return mk_str("");
    case DType::Kind::Arr:
      throw VcgFail("stmt_vcg: unsupported: allocation of an array whose "
                    "elements are arrays");
    }
    return mk_int(0);
  }

  /// Instantiating a callee clause at a call site: the callee's entry state
  /// is the caller's state at the call, so Old/OldHeap wrappers are dropped.
  static ExpPtr strip_entry_old(const ExpPtr &e) {
    struct V {
      const ExpPtr &self;
      ExpPtr operator()(const IntLit &) const { return self; }
      ExpPtr operator()(const BoolLit &) const { return self; }
      ExpPtr operator()(const StrLit &) const { return self; }
      ExpPtr operator()(const Var &) const { return self; }
      ExpPtr operator()(const UnOp &x) const {
        return mk_unop(x.op, strip_entry_old(x.operand));
      }
      ExpPtr operator()(const BinOp &x) const {
        return mk_binop(x.op, strip_entry_old(x.lhs), strip_entry_old(x.rhs));
      }
      ExpPtr operator()(const Ite &x) const {
        return mk_ite(strip_entry_old(x.cond), strip_entry_old(x.thn),
                      strip_entry_old(x.els));
      }
      ExpPtr operator()(const ArrLen &x) const {
        return mk_len(strip_entry_old(x.arr));
      }
      ExpPtr operator()(const ArrSel &x) const {
        return mk_sel(strip_entry_old(x.arr), strip_entry_old(x.idx));
      }
      ExpPtr operator()(const FunCall &x) const {
        std::vector<ExpPtr> args;
        for (const auto &a : x.args)
          args.push_back(strip_entry_old(a));
        return mk_exp(FunCall{x.name, std::move(args)});
      }
      ExpPtr operator()(const ForallExp &x) const {
        return mk_forall(x.bound, x.ty, strip_entry_old(x.body));
      }
      ExpPtr operator()(const LetExp &x) const {
        std::vector<std::pair<std::string, ExpPtr>> binds;
        for (const auto &[n, rhs] : x.binds)
          binds.emplace_back(n, strip_entry_old(rhs));
        return mk_let(std::move(binds), strip_entry_old(x.body));
      }
      ExpPtr operator()(const OldExp &x) const {
        return strip_entry_old(x.e);
      }
      ExpPtr operator()(const OldHeapExp &x) const {
        return strip_entry_old(x.e);
      }
      ExpPtr operator()(const PrevExp &x) const {
        return mk_prev(strip_entry_old(x.e));
      }
      ExpPtr operator()(const PrevHeapExp &x) const {
        return mk_prev_heap(strip_entry_old(x.e));
      }
      ExpPtr operator()(const SetPrevExp &x) const {
        return mk_set_prev(strip_entry_old(x.e));
      }
      ExpPtr operator()(const ForallHeapExp &x) const {
        return mk_forall_heap(x.havoc, strip_entry_old(x.body));
      }
    };
    return std::visit(V{e}, e->node);
  }

  std::vector<ExpPtr> stmt(const Stmt &s, std::vector<ExpPtr> post,
                           const TypeEnv &ls,
                           const std::vector<std::string> &mods) {
    struct V {
      Vcg &g;
      std::vector<ExpPtr> &post;
      const TypeEnv &ls;
      const std::vector<std::string> &mods;

      std::vector<ExpPtr> operator()(const ReturnStmt &) const {
        return g.ens_;
      }
      std::vector<ExpPtr> operator()(const SkipStmt &) const {
        return std::move(post);
      }
      std::vector<ExpPtr> operator()(const AssertStmt &x) const {
        g.require_bool(ls, *x.e, "assert condition");
        std::vector<ExpPtr> out = {x.e};
        for (auto &p : post)
          out.push_back(std::move(p));
        return out;
      }
      std::vector<ExpPtr> operator()(const ThenStmt &x) const {
        // Allocation: Then(a := alloc, rest) frames the fresh array.
        if (const auto *as = std::get_if<AssignStmt>(&x.s1->node)) {
          if (as->pairs.size() == 1) {
            const auto *vl = std::get_if<VarLhs>(&as->pairs[0].first);
            const auto *al = std::get_if<ArrAllocRhs>(&as->pairs[0].second);
            if (vl && al)
              return g.alloc_rule(*vl, *al, *x.s2, std::move(post), ls, mods);
          }
        }
        std::vector<ExpPtr> mid = g.stmt(*x.s2, std::move(post), ls, mods);
        return g.stmt(*x.s1, std::move(mid), ls, mods);
      }
      std::vector<ExpPtr> operator()(const IfStmt &x) const {
        g.require_bool(ls, *x.guard, "if guard");
        std::vector<ExpPtr> wp_t = g.stmt(*x.thn, post, ls, mods);
        std::vector<ExpPtr> wp_e = g.stmt(*x.els, std::move(post), ls, mods);
        return {mk_ite(x.guard, conj(wp_t), conj(wp_e))};
      }
      std::vector<ExpPtr> operator()(const DecStmt &x) const {
        return g.dec_rule(x, std::move(post), ls, mods);
      }
      std::vector<ExpPtr> operator()(const AssignStmt &x) const {
        return g.assign_rule(x, std::move(post), ls, mods);
      }
      std::vector<ExpPtr> operator()(const WhileStmt &x) const {
        return g.while_rule(x, std::move(post), ls, mods);
      }
      std::vector<ExpPtr> operator()(const MetCallStmt &x) const {
        return g.call_rule(x, std::move(post), ls, mods);
      }
    };
    return std::visit(V{*this, post, ls, mods}, s.node);
  }

private:
  std::vector<ExpPtr> dec_rule(const DecStmt &x, std::vector<ExpPtr> post,
                               const TypeEnv &ls,
                               const std::vector<std::string> &mods) {
    TypeEnv inner = ls;
    std::vector<std::pair<std::string, ExpPtr>> init_binds;
    std::vector<std::string> uninit;
    for (const auto &b : x.binds) {
      if (b.init) {
        DType ti = type_of(ls, **b.init);
        if (!(ti == b.ty))
          throw VcgFail("stmt_vcg:Dec: initializer type mismatch for '" +
                        b.name + "'");
        init_binds.emplace_back(b.name, *b.init);
      } else {
        uninit.push_back(b.name);
      }
    }
    for (size_t i = x.binds.size(); i-- > 0;)
      inner.insert(inner.begin(), {x.binds[i].name, x.binds[i].ty});
    std::vector<ExpPtr> conds = stmt(*x.scope, std::move(post), inner, mods);
    std::vector<ExpPtr> out;
    for (auto &c : conds) {
      auto fv = free_vars(*c);
      for (const auto &u : uninit)
        if (fv.count(u))
          throw VcgFail("stmt_vcg:Dec: possibly uninitialized local '" + u +
                        "' is read");
      if (init_binds.empty())
        out.push_back(std::move(c));
      else
        out.push_back(mk_let(init_binds, std::move(c)));
    }
    return out;
  }

  std::vector<ExpPtr> assign_rule(const AssignStmt &x, std::vector<ExpPtr> post,
                                  const TypeEnv &ls,
                                  const std::vector<std::string> &mods) {
    // Array update: a single pair (sel a idx) := e.
    if (x.pairs.size() == 1) {
      if (const auto *sel = std::get_if<ArrSelLhs>(&x.pairs[0].first)) {
        const auto *er = std::get_if<ExpRhs>(&x.pairs[0].second);
        if (!er)
          throw VcgFail("stmt_vcg:Assign: unsupported allocation target");
        const auto *av = std::get_if<Var>(&sel->arr->node);
        if (!av)
          throw VcgFail("stmt_vcg:Assign: unsupported: array update through a "
                        "non-variable expression");
        return update_rule(av->name, sel->idx, er->e, std::move(post), ls,
                           mods);
      }
    }
    // Plain parallel assignment of variables.
    std::vector<std::pair<std::string, ExpPtr>> binds;
    std::set<std::string> targets;
    for (const auto &[l, r] : x.pairs) {
      const auto *vl = std::get_if<VarLhs>(&l);
      if (!vl)
        throw VcgFail(
            "stmt_vcg:Assign: unsupported: array update in a multiple "
            "assignment");
      const auto *er = std::get_if<ExpRhs>(&r);
      if (!er)
        throw VcgFail("stmt_vcg:Assign: unsupported: allocation outside a "
                      "statement sequence");
      if (!targets.insert(vl->name).second)
        throw VcgFail("stmt_vcg:Assign: variables not distinct");
      if (std::find(mods.begin(), mods.end(), vl->name) != mods.end())
        throw VcgFail("stmt_vcg:Assign: assigning to mods variable '" +
                      vl->name + "'");
      const DType *lt = tenv_lookup(ls, vl->name);
      if (!lt)
        throw VcgFail("stmt_vcg:Assign: assignment to undeclared '" +
                      vl->name + "'");
      DType rt = type_of(ls, *er->e);
      if (!(rt == *lt))
        throw VcgFail("stmt_vcg:Assign: type mismatch assigning to '" +
                      vl->name + "'");
      binds.emplace_back(vl->name, er->e);
    }
    return {mk_let(std::move(binds), conj(post))};
  }

  std::vector<ExpPtr> update_rule(const std::string &arr, const ExpPtr &idx,
                                  const ExpPtr &rhs, std::vector<ExpPtr> post,
                                  const TypeEnv &ls,
                                  const std::vector<std::string> &mods) {
    if (std::find(mods.begin(), mods.end(), arr) == mods.end())
      throw VcgFail("stmt_vcg:Assign: array '" + arr +
                    "' is not part of the modifies clause");
    const DType *at = tenv_lookup(ls, arr);
    if (!at || at->kind != DType::Kind::Arr)
      throw VcgFail("stmt_vcg:Assign: '" + arr + "' is not a declared array");
    if (type_of(ls, *idx).kind != DType::Kind::Int)
      throw VcgFail("stmt_vcg:Assign: array index must be int");
    if (!(type_of(ls, *rhs) == at->element()))
      throw VcgFail("stmt_vcg:Assign: element type mismatch updating '" + arr +
                    "'");
    ExpPtr a = mk_var(arr);
    std::string i = fresh();
    // After the update: the written cell holds the (pre-state) rhs and every
    // other in-bounds cell keeps its previous content.
    ExpPtr cell = mk_eq(mk_sel(a, mk_prev(idx)), mk_prev(rhs));
    ExpPtr frame = mk_forall(
        i, DType::int_type(),
        mk_imp(mk_and(mk_binop(BinOpKind::Neq, mk_var(i), mk_prev(idx)),
                      mk_and(mk_le(mk_int(0), mk_var(i)),
                             mk_lt(mk_var(i), mk_len(a)))),
               mk_eq(mk_sel(a, mk_var(i)),
                     mk_prev_heap(mk_sel(a, mk_var(i))))));
    ExpPtr wrapped = mk_set_prev(mk_forall_heap(
        {arr}, mk_imp(mk_and(std::move(cell), std::move(frame)), conj(post))));
    return {mk_le(mk_int(0), idx), mk_lt(idx, mk_len(a)), std::move(wrapped)};
  }

  std::vector<ExpPtr> alloc_rule(const VarLhs &vl, const ArrAllocRhs &al,
                                 const Stmt &rest, std::vector<ExpPtr> post,
                                 const TypeEnv &ls,
                                 const std::vector<std::string> &mods) {
    if (type_of(ls, *al.len).kind != DType::Kind::Int)
      throw VcgFail("stmt_vcg:Assign: allocation length must be int");
    const DType *lt = tenv_lookup(ls, vl.name);
    DType arr_ty = DType::array_of(al.elem_ty);
    if (!lt)
      throw VcgFail("stmt_vcg:Assign: assignment to undeclared '" + vl.name +
                    "'");
    if (!(*lt == arr_ty))
      throw VcgFail("stmt_vcg:Assign: type mismatch allocating into '" +
                    vl.name + "'");
    // The freshly allocated array may be written by the continuation.
    std::vector<std::string> inner_mods = mods;
    if (std::find(inner_mods.begin(), inner_mods.end(), vl.name) ==
        inner_mods.end())
      inner_mods.push_back(vl.name);
    std::vector<ExpPtr> wp_rest = stmt(rest, std::move(post), ls, inner_mods);

    ExpPtr a = mk_var(vl.name);
    std::string x = fresh();
    std::string i = fresh();
    ExpPtr len_eq = mk_eq(mk_len(a), mk_prev(al.len));
    ExpPtr dflt = default_exp(al.elem_ty);
    ExpPtr cells = mk_let(
        {{x, mk_prev(dflt)}},
        mk_forall(i, DType::int_type(),
                  mk_imp(mk_and(mk_le(mk_int(0), mk_var(i)),
                                mk_lt(mk_var(i), mk_len(a))),
                         mk_eq(mk_sel(a, mk_var(i)), mk_var(x)))));
    ExpPtr body = mk_imp(mk_and(std::move(len_eq), std::move(cells)),
                         conj(wp_rest));
    ExpPtr wrapped = mk_set_prev(mk_forall_heap(
        {}, mk_forall(vl.name, arr_ty, std::move(body))));
    return {mk_le(mk_int(0), al.len), std::move(wrapped)};
  }

  std::vector<ExpPtr> while_rule(const WhileStmt &x, std::vector<ExpPtr> post,
                                 const TypeEnv &ls,
                                 const std::vector<std::string> &mods) {
    for (const auto &w : x.modifies)
      if (std::find(mods.begin(), mods.end(), w) == mods.end())
        throw VcgFail("stmt_vcg:While: loop modifies '" + w +
                      "' is not in the enclosing modifies");
    require_bool(ls, *x.guard, "while guard");
    for (const auto &inv : x.invariants)
      require_bool(ls, *inv, "loop invariant");
    if (x.decreases.empty())
      throw VcgFail("stmt_vcg:While: a decreases clause is required");
    for (const auto &d : x.decreases)
      if (type_of(ls, *d).kind != DType::Kind::Int)
        throw VcgFail("stmt_vcg:While: decreases expressions must be int");

    // Locals the body can change; the inductive and exit conditions are
    // closed over them.
    std::set<std::string> assigned = assigned_locals(*x.body);
    std::vector<TypedName> closure;
    for (const auto &[n, ty] : ls)
      if (assigned.count(n)) {
        closure.emplace_back(n, ty);
        assigned.erase(n);
      }
    if (!assigned.empty())
      throw VcgFail("stmt_vcg:While: body assigns undeclared '" +
                    *assigned.begin() + "'");

    // Snapshot names for the measures at the head of the iteration.
    std::vector<std::pair<std::string, ExpPtr>> snaps;
    std::vector<ExpPtr> snap_vars;
    TypeEnv body_ls = ls;
    for (const auto &d : x.decreases) {
      std::string s = fresh();
      snaps.emplace_back(s, d);
      snap_vars.push_back(mk_var(s));
      body_ls.insert(body_ls.begin(), {s, DType::int_type()});
    }
    std::vector<ExpPtr> body_post = x.invariants;
    body_post.push_back(lex_lt(x.decreases, snap_vars));
    for (auto &n : nonneg(snap_vars, x.decreases))
      body_post.push_back(std::move(n));
    std::vector<ExpPtr> body_conds =
        stmt(*x.body, std::move(body_post), body_ls, mods);

    ExpPtr inv_c = conj(x.invariants);
    ExpPtr inductive = forall_close(
        closure, mk_imp(mk_and(x.guard, inv_c),
                        mk_let(snaps, conj(body_conds))));
    ExpPtr exit = forall_close(
        closure,
        mk_imp(mk_and(mk_unop(UnOpKind::Not, x.guard), inv_c), conj(post)));

    std::vector<ExpPtr> out = x.invariants; // must hold on entry
    out.push_back(std::move(inductive));
    out.push_back(std::move(exit));
    return out;
  }

  std::vector<ExpPtr> call_rule(const MetCallStmt &x, std::vector<ExpPtr> post,
                                const TypeEnv &ls,
                                const std::vector<std::string> &mods) {
    auto it = methods_.find(x.method);
    if (it == methods_.end())
      throw VcgFail("stmt_vcg:MetCall: unknown method '" + x.method + "'");
    const MethodInfo &f = it->second;
    if (x.args.size() != f.ins.size())
      throw VcgFail("stmt_vcg:MetCall: argument count mismatch calling '" +
                    x.method + "'");
    if (x.lhss.size() != f.outs.size())
      throw VcgFail("stmt_vcg:MetCall: target count mismatch calling '" +
                    x.method + "'");
    std::set<std::string> distinct(x.lhss.begin(), x.lhss.end());
    if (distinct.size() != x.lhss.size())
      throw VcgFail("stmt_vcg:MetCall: variables not distinct");
    std::vector<TypedName> lhs_typed;
    for (size_t i = 0; i < x.lhss.size(); ++i) {
      if (std::find(mods.begin(), mods.end(), x.lhss[i]) != mods.end())
        throw VcgFail("stmt_vcg:MetCall: assigning to mods variable '" +
                      x.lhss[i] + "'");
      const DType *lt = tenv_lookup(ls, x.lhss[i]);
      if (!lt)
        throw VcgFail("stmt_vcg:MetCall: assignment to undeclared '" +
                      x.lhss[i] + "'");
      if (!(*lt == f.outs[i].second))
        throw VcgFail("stmt_vcg:MetCall: out-parameter type mismatch for '" +
                      x.lhss[i] + "'");
      lhs_typed.emplace_back(x.lhss[i], *lt);
    }
    std::vector<std::pair<std::string, ExpPtr>> in_binds;
    for (size_t i = 0; i < x.args.size(); ++i) {
      DType at = type_of(ls, *x.args[i]);
      if (!(at == f.ins[i].second))
        throw VcgFail("stmt_vcg:MetCall: argument type mismatch calling '" +
                      x.method + "'");
      in_binds.emplace_back(f.ins[i].first, x.args[i]);
    }
    // The callee's modifies names, translated through the argument list;
    // each must be a variable the caller itself may modify.
    std::vector<std::string> callee_mods;
    for (const auto &mname : f.mods) {
      const ExpPtr *arg = nullptr;
      for (size_t i = 0; i < f.ins.size(); ++i)
        if (f.ins[i].first == mname)
          arg = &x.args[i];
      if (!arg)
        throw VcgFail("stmt_vcg:MetCall: callee modifies '" + mname +
                      "' is not an in-parameter");
      const auto *v = std::get_if<Var>(&(*arg)->node);
      if (!v)
        throw VcgFail("stmt_vcg:MetCall: modifies argument for '" + mname +
                      "' must be a variable");
      if (std::find(mods.begin(), mods.end(), v->name) == mods.end())
        throw VcgFail("stmt_vcg:MetCall: caller may not modify '" + v->name +
                      "'");
      callee_mods.push_back(v->name);
    }

    std::vector<ExpPtr> out;
    // Callee precondition under the argument binding (a trivially true
    // clause is still emitted, bound the same way).
    {
      std::vector<ExpPtr> stripped;
      for (const auto &r : f.reqs)
        stripped.push_back(strip_entry_old(r));
      out.push_back(mk_let(in_binds, conj(stripped)));
    }
    // Same-level calls must shrink the caller's entry measure.
    if (f.level == methods_.at(caller_).level) {
      if (decs_.empty() || f.decreases.empty())
        throw VcgFail("stmt_vcg:MetCall: recursive call without a decreases "
                      "clause");
      if (decs_.size() != f.decreases.size())
        throw VcgFail(
            "stmt_vcg:MetCall: decreases lists have different lengths");
      std::vector<ExpPtr> news, olds;
      for (const auto &d : f.decreases)
        news.push_back(mk_let(in_binds, strip_entry_old(d)));
      for (const auto &d : decs_)
        olds.push_back(mk_old(d));
      ExpPtr cond = lex_lt(news, olds);
      for (auto &n : nonneg(olds, news))
        cond = mk_and(std::move(cond), std::move(n));
      out.push_back(std::move(cond));
    }
    // Callee ensures imply the continuation, closed over fresh stand-ins
    // for the targets (quantifying the target names themselves would
    // capture their uses in this call's own arguments).
    std::vector<TypedName> closure;
    std::vector<std::pair<std::string, ExpPtr>> rebind;
    std::vector<std::pair<std::string, ExpPtr>> ens_binds = in_binds;
    for (size_t i = 0; i < f.outs.size(); ++i) {
      std::string fn = fresh();
      closure.emplace_back(fn, lhs_typed[i].second);
      rebind.emplace_back(x.lhss[i], mk_var(fn));
      ens_binds.emplace_back(f.outs[i].first, mk_var(fn));
    }
    ExpPtr continuation = conj(post);
    if (!callee_mods.empty())
      continuation = mk_set_prev(
          mk_forall_heap(callee_mods, std::move(continuation)));
    if (!rebind.empty())
      continuation = mk_let(std::move(rebind), std::move(continuation));
    std::vector<ExpPtr> ens_stripped;
    for (const auto &e : f.ens)
      ens_stripped.push_back(strip_entry_old(e));
    ExpPtr antecedent = mk_let(std::move(ens_binds), conj(ens_stripped));
    out.push_back(forall_close(
        closure, mk_imp(std::move(antecedent), std::move(continuation))));
    return out;
  }

  const std::map<std::string, MethodInfo> &methods_;
  std::string caller_;
  std::vector<ExpPtr> ens_;
  std::vector<ExpPtr> decs_;
  std::vector<std::string> mods_;
  unsigned long counter_ = 0;

public:
  const std::vector<std::string> &mods() const { return mods_; }
};

/// Rotate statement sequences to the right so that an allocation always
/// heads its continuation: Then(Then(a,b),c) becomes Then(a,Then(b,c)).
inline StmtPtr right_normalize(const StmtPtr &s) {
  struct V {
    const StmtPtr &self;
    StmtPtr operator()(const ThenStmt &x) const {
      StmtPtr s1 = right_normalize(x.s1);
      StmtPtr s2 = right_normalize(x.s2);
      while (const auto *inner = std::get_if<ThenStmt>(&s1->node)) {
        s2 = mk_then(inner->s2, s2);
        s1 = inner->s1;
      }
      return mk_then(s1, s2);
    }
    StmtPtr operator()(const IfStmt &x) const {
      return mk_if(x.guard, right_normalize(x.thn), right_normalize(x.els));
    }
    StmtPtr operator()(const DecStmt &x) const {
      return mk_stmt(DecStmt{x.binds, right_normalize(x.scope)});
    }
    StmtPtr operator()(const WhileStmt &x) const {
      return mk_stmt(WhileStmt{x.guard, x.invariants, x.decreases, x.modifies,
                               right_normalize(x.body)});
    }
    StmtPtr operator()(const SkipStmt &) const { return self; }
    StmtPtr operator()(const AssertStmt &) const { return self; }
    StmtPtr operator()(const AssignStmt &) const { return self; }
    StmtPtr operator()(const ReturnStmt &) const { return self; }
    StmtPtr operator()(const MetCallStmt &) const { return self; }
  };
  return std::visit(V{s}, s->node);
}

inline std::map<std::string, MethodInfo> method_infos(const Program &p) {
  auto levels = method_levels(p);
  std::map<std::string, MethodInfo> out;
  for (const auto &m : p.members) {
    const auto *mt = std::get_if<Method>(&m);
    if (!mt)
      continue;
    MethodInfo info;
    info.ins = mt->ins;
    info.outs = mt->outs;
    info.reqs = mt->requires_;
    info.ens = mt->ensures;
    info.decreases = mt->decreases;
    info.mods = mt->modifies;
    info.level = levels.at(mt->name);
    out.emplace(mt->name, std::move(info));
  }
  return out;
}

} // namespace vcg_detail

/// The wp-relation driver for one statement; exposed mainly for tests.
/// `methods` must contain the caller under `caller`.
inline Result<std::vector<ExpPtr>>
stmt_vcg(const std::map<std::string, MethodInfo> &methods,
         const std::string &caller, const Stmt &s, std::vector<ExpPtr> post,
         std::vector<ExpPtr> ens, std::vector<ExpPtr> decs,
         std::vector<std::string> mods, TypeEnv ls) {
  using R = Result<std::vector<ExpPtr>>;
  try {
    vcg_detail::Vcg g(methods, caller, std::move(ens), std::move(decs), mods);
    return R(g.stmt(*vcg_detail::right_normalize(
                        std::make_shared<const Stmt>(s)),
                    std::move(post), ls, mods));
  } catch (const vcg_detail::VcgFail &f) {
    return R::err(f.what());
  }
}

/// Conditions for one method, each closed over the typed in-parameters under
/// the method's requires. The program must already be normalized and
/// freshened.
inline Result<std::vector<ExpPtr>> method_vcg(const Program &p,
                                              const std::string &name) {
  using R = Result<std::vector<ExpPtr>>;
  try {
    auto methods = vcg_detail::method_infos(p);
    auto it = methods.find(name);
    if (it == methods.end())
      return R::err("method_vcg: unknown method '" + name + "'");
    const Member *mem = member_lookup(p, name);
    const Method &m = std::get<Method>(*mem);
    const MethodInfo &info = it->second;

    TypeEnv ls;
    for (const auto &b : m.ins)
      ls.push_back(b);
    for (const auto &b : m.outs)
      ls.push_back(b);
    // Clause well-formedness.
    for (const auto &r : m.requires_)
      if (vcg_detail::type_of(ls, *r).kind != DType::Kind::Bool)
        throw vcg_detail::VcgFail("method_vcg: requires must be boolean");
    for (const auto &e : m.ensures)
      if (vcg_detail::type_of(ls, *e).kind != DType::Kind::Bool)
        throw vcg_detail::VcgFail("method_vcg: ensures must be boolean");
    for (const auto &d : m.decreases)
      if (vcg_detail::type_of(ls, *d).kind != DType::Kind::Int)
        throw vcg_detail::VcgFail("method_vcg: decreases must be int");
    for (const auto &mod : m.modifies) {
      const DType *t = vcg_detail::tenv_lookup(ls, mod);
      if (!t || t->kind != DType::Kind::Arr)
        throw vcg_detail::VcgFail("method_vcg: modifies '" + mod +
                                  "' is not a declared array parameter");
    }

    vcg_detail::Vcg g(methods, name, m.ensures, m.decreases, m.modifies);
    std::vector<ExpPtr> conds =
        g.stmt(*vcg_detail::right_normalize(m.body), {mk_bool(false)}, ls,
               m.modifies);

    std::vector<ExpPtr> out;
    for (auto &c : conds) {
      ExpPtr body = c;
      if (!m.requires_.empty())
        body = mk_imp(conj(m.requires_), std::move(body));
      ExpPtr closed = vcg_detail::Vcg::forall_close(m.ins, std::move(body));
      auto fv = free_vars(*closed);
      if (!fv.empty())
        throw vcg_detail::VcgFail(
            "method_vcg: condition mentions unbound '" + *fv.begin() +
            "' (is an out-parameter assigned on every path?)");
      if (vcg_detail::type_of({}, *closed).kind != DType::Kind::Bool)
        throw vcg_detail::VcgFail("method_vcg: generated condition is not "
                                  "boolean");
      out.push_back(std::move(closed));
    }
    return R(std::move(out));
  } catch (const vcg_detail::VcgFail &f) {
    return R::err(f.what());
  }
}

/// Conditions for every method of the program. When `prepare` is set the
/// program is normalized and freshened first (idempotent on prepared input).
inline Result<std::vector<std::pair<std::string, std::vector<ExpPtr>>>>
program_vcg(const Program &p, bool prepare = true) {
  using R = Result<std::vector<std::pair<std::string, std::vector<ExpPtr>>>>;
  if (!member_names_distinct(p))
    return R::err("program_vcg: member names are not distinct");
  Program prepared = prepare ? freshen_program(normalize(p)) : p;
  std::vector<std::pair<std::string, std::vector<ExpPtr>>> out;
  for (const auto &m : prepared.members) {
    if (!std::holds_alternative<Method>(m))
      continue; // functions carry no conditions
    auto r = method_vcg(prepared, member_name(m));
    if (!r.ok())
      return R::err(member_name(m) + ": " + r.error());
    out.emplace_back(member_name(m), std::move(r.value()));
  }
  return R(std::move(out));
}

/// Serialize conditions as one (vc NAME exp*) record per method.
inline std::string
print_vcs(const std::vector<std::pair<std::string, std::vector<ExpPtr>>> &vcs) {
  std::string out;
  for (const auto &[name, conds] : vcs) {
    std::vector<SExpPtr> items = {mk_atom("vc"), mk_atom(name)};
    for (const auto &c : conds)
      items.push_back(frontend_detail::exp_to_sexp(*c));
    out += print_sexp(*mk_list(std::move(items))) + "\n";
  }
  return out;
}

} // namespace dfy
