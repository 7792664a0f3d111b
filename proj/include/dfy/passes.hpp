//===--- passes.hpp - Source-to-source passes --------------------------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// remove_assert rewrites every Assert to Skip. freshen_program alpha-renames
// every binder (parameters, Dec, Let, Forall) to a globally unique name of
// the form v<counter>, leaving member names untouched. is_fresh_program and
// no_shadow are the checkers the compiler relies on.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace dfy {

//===----------------------------------------------------------------------===//
// remove_assert
//===----------------------------------------------------------------------===//

namespace pass_detail {

inline StmtPtr remove_assert_stmt(const StmtPtr &s) {
  struct V {
    const StmtPtr &self;
    StmtPtr operator()(const SkipStmt &) const { return self; }
    StmtPtr operator()(const ReturnStmt &) const { return self; }
    StmtPtr operator()(const AssertStmt &) const { return mk_skip(); }
    StmtPtr operator()(const ThenStmt &x) const {
      return mk_then(remove_assert_stmt(x.s1), remove_assert_stmt(x.s2));
    }
    StmtPtr operator()(const IfStmt &x) const {
      return mk_if(x.guard, remove_assert_stmt(x.thn),
                   remove_assert_stmt(x.els));
    }
    StmtPtr operator()(const DecStmt &x) const {
      return mk_stmt(DecStmt{x.binds, remove_assert_stmt(x.scope)});
    }
    StmtPtr operator()(const AssignStmt &) const { return self; }
    StmtPtr operator()(const WhileStmt &x) const {
      return mk_stmt(WhileStmt{x.guard, x.invariants, x.decreases, x.modifies,
                               remove_assert_stmt(x.body)});
    }
    StmtPtr operator()(const MetCallStmt &) const { return self; }
  };
  return std::visit(V{s}, s->node);
}

} // namespace pass_detail

inline Program remove_assert(const Program &p) {
  Program out;
  for (const auto &m : p.members) {
    if (const auto *f = std::get_if<Function>(&m)) {
      out.members.push_back(*f);
      continue;
    }
    Method mt = std::get<Method>(m);
    mt.body = pass_detail::remove_assert_stmt(mt.body);
    out.members.push_back(std::move(mt));
  }
  return out;
}

//===----------------------------------------------------------------------===//
// freshen_program
//===----------------------------------------------------------------------===//

namespace pass_detail {

class Freshener {
public:
  using NameEnv = std::map<std::string, std::string>;

  std::string fresh() { return "v" + std::to_string(counter_++); }

  std::string lookup(const NameEnv &env, const std::string &n) const {
    auto it = env.find(n);
    return it == env.end() ? n : it->second;
  }

  ExpPtr exp(const NameEnv &env, const ExpPtr &e) {
    struct V {
      Freshener &fr;
      const NameEnv &env;
      const ExpPtr &self;
      ExpPtr operator()(const IntLit &) const { return self; }
      ExpPtr operator()(const BoolLit &) const { return self; }
      ExpPtr operator()(const StrLit &) const { return self; }
      ExpPtr operator()(const Var &x) const {
        return mk_var(fr.lookup(env, x.name));
      }
      ExpPtr operator()(const UnOp &x) const {
        return mk_unop(x.op, fr.exp(env, x.operand));
      }
      ExpPtr operator()(const BinOp &x) const {
        return mk_binop(x.op, fr.exp(env, x.lhs), fr.exp(env, x.rhs));
      }
      ExpPtr operator()(const Ite &x) const {
        return mk_ite(fr.exp(env, x.cond), fr.exp(env, x.thn),
                      fr.exp(env, x.els));
      }
      ExpPtr operator()(const ArrLen &x) const {
        return mk_len(fr.exp(env, x.arr));
      }
      ExpPtr operator()(const ArrSel &x) const {
        return mk_sel(fr.exp(env, x.arr), fr.exp(env, x.idx));
      }
      ExpPtr operator()(const FunCall &x) const {
        std::vector<ExpPtr> args;
        for (const auto &a : x.args)
          args.push_back(fr.exp(env, a));
        return mk_exp(FunCall{x.name, std::move(args)});
      }
      ExpPtr operator()(const ForallExp &x) const {
        NameEnv inner = env;
        std::string nn = fr.fresh();
        inner[x.bound] = nn;
        return mk_forall(nn, x.ty, fr.exp(inner, x.body));
      }
      ExpPtr operator()(const LetExp &x) const {
        std::vector<std::pair<std::string, ExpPtr>> binds;
        NameEnv inner = env;
        for (const auto &[n, rhs] : x.binds) {
          std::string nn = fr.fresh();
          binds.emplace_back(nn, fr.exp(env, rhs));
          inner[n] = nn;
        }
        return mk_let(std::move(binds), fr.exp(inner, x.body));
      }
      ExpPtr operator()(const OldExp &x) const {
        return mk_old(fr.exp(env, x.e));
      }
      ExpPtr operator()(const OldHeapExp &x) const {
        return mk_exp(OldHeapExp{fr.exp(env, x.e)});
      }
      ExpPtr operator()(const PrevExp &x) const {
        return mk_prev(fr.exp(env, x.e));
      }
      ExpPtr operator()(const PrevHeapExp &x) const {
        return mk_prev_heap(fr.exp(env, x.e));
      }
      ExpPtr operator()(const SetPrevExp &x) const {
        return mk_set_prev(fr.exp(env, x.e));
      }
      ExpPtr operator()(const ForallHeapExp &x) const {
        std::vector<std::string> havoc;
        for (const auto &n : x.havoc)
          havoc.push_back(fr.lookup(env, n)); // references, not binders
        return mk_forall_heap(std::move(havoc), fr.exp(env, x.body));
      }
    };
    return std::visit(V{*this, env, e}, e->node);
  }

  StmtPtr stmt(const NameEnv &env, const StmtPtr &s) {
    struct V {
      Freshener &fr;
      const NameEnv &env;
      const StmtPtr &self;
      StmtPtr operator()(const SkipStmt &) const { return self; }
      StmtPtr operator()(const ReturnStmt &) const { return self; }
      StmtPtr operator()(const AssertStmt &x) const {
        return mk_assert(fr.exp(env, x.e));
      }
      StmtPtr operator()(const ThenStmt &x) const {
        return mk_then(fr.stmt(env, x.s1), fr.stmt(env, x.s2));
      }
      StmtPtr operator()(const IfStmt &x) const {
        return mk_if(fr.exp(env, x.guard), fr.stmt(env, x.thn),
                     fr.stmt(env, x.els));
      }
      StmtPtr operator()(const DecStmt &x) const {
        std::vector<DecStmt::Bind> binds;
        NameEnv inner = env;
        for (const auto &b : x.binds) {
          std::string nn = fr.fresh();
          std::optional<ExpPtr> init;
          if (b.init)
            init = fr.exp(env, *b.init); // initializers see the outer scope
          binds.push_back(DecStmt::Bind{nn, b.ty, std::move(init)});
          inner[b.name] = nn;
        }
        return mk_stmt(DecStmt{std::move(binds), fr.stmt(inner, x.scope)});
      }
      StmtPtr operator()(const AssignStmt &x) const {
        std::vector<std::pair<Lhs, Rhs>> pairs;
        for (const auto &[l, r] : x.pairs) {
          Lhs nl = l;
          if (const auto *v = std::get_if<VarLhs>(&l))
            nl = VarLhs{fr.lookup(env, v->name)};
          else {
            const auto &sel = std::get<ArrSelLhs>(l);
            nl = ArrSelLhs{fr.exp(env, sel.arr), fr.exp(env, sel.idx)};
          }
          Rhs nr = r;
          if (const auto *er = std::get_if<ExpRhs>(&r))
            nr = ExpRhs{fr.exp(env, er->e)};
          else {
            const auto &al = std::get<ArrAllocRhs>(r);
            nr = ArrAllocRhs{al.elem_ty, fr.exp(env, al.len)};
          }
          pairs.emplace_back(std::move(nl), std::move(nr));
        }
        return mk_stmt(AssignStmt{std::move(pairs)});
      }
      StmtPtr operator()(const WhileStmt &x) const {
        std::vector<ExpPtr> invs, decs;
        for (const auto &e : x.invariants)
          invs.push_back(fr.exp(env, e));
        for (const auto &e : x.decreases)
          decs.push_back(fr.exp(env, e));
        std::vector<std::string> mods;
        for (const auto &n : x.modifies)
          mods.push_back(fr.lookup(env, n));
        return mk_stmt(WhileStmt{fr.exp(env, x.guard), std::move(invs),
                                 std::move(decs), std::move(mods),
                                 fr.stmt(env, x.body)});
      }
      StmtPtr operator()(const MetCallStmt &x) const {
        std::vector<std::string> lhss;
        for (const auto &n : x.lhss)
          lhss.push_back(fr.lookup(env, n));
        std::vector<ExpPtr> args;
        for (const auto &a : x.args)
          args.push_back(fr.exp(env, a));
        return mk_stmt(MetCallStmt{std::move(lhss), x.method, std::move(args)});
      }
    };
    return std::visit(V{*this, env, s}, s->node);
  }

private:
  unsigned long counter_ = 0;
};

} // namespace pass_detail

inline Program freshen_program(const Program &p) {
  pass_detail::Freshener fr;
  Program out;
  for (const auto &m : p.members) {
    pass_detail::Freshener::NameEnv env;
    if (const auto *f = std::get_if<Function>(&m)) {
      Function nf = *f;
      for (auto &[n, ty] : nf.ins) {
        std::string nn = fr.fresh();
        env[n] = nn;
        n = nn;
      }
      nf.body = fr.exp(env, nf.body);
      out.members.push_back(std::move(nf));
      continue;
    }
    Method mt = std::get<Method>(m);
    for (auto &[n, ty] : mt.ins) {
      std::string nn = fr.fresh();
      env[n] = nn;
      n = nn;
    }
    for (auto &[n, ty] : mt.outs) {
      std::string nn = fr.fresh();
      env[n] = nn;
      n = nn;
    }
    for (auto &e : mt.requires_)
      e = fr.exp(env, e);
    for (auto &e : mt.ensures)
      e = fr.exp(env, e);
    for (auto &e : mt.decreases)
      e = fr.exp(env, e);
    for (auto &n : mt.modifies)
      n = fr.lookup(env, n);
    mt.body = fr.stmt(env, mt.body);
    out.members.push_back(std::move(mt));
  }
  return out;
}

//===----------------------------------------------------------------------===//
// Checkers
//===----------------------------------------------------------------------===//

namespace pass_detail {

inline void collect_exp_binders(const Exp &e, std::vector<std::string> &out) {
  struct V {
    std::vector<std::string> &out;
    void operator()(const IntLit &) const {}
    void operator()(const BoolLit &) const {}
    void operator()(const StrLit &) const {}
    void operator()(const Var &) const {}
    void operator()(const UnOp &x) const { collect_exp_binders(*x.operand, out); }
    void operator()(const BinOp &x) const {
      collect_exp_binders(*x.lhs, out);
      collect_exp_binders(*x.rhs, out);
    }
    void operator()(const Ite &x) const {
      collect_exp_binders(*x.cond, out);
      collect_exp_binders(*x.thn, out);
      collect_exp_binders(*x.els, out);
    }
    void operator()(const ArrLen &x) const { collect_exp_binders(*x.arr, out); }
    void operator()(const ArrSel &x) const {
      collect_exp_binders(*x.arr, out);
      collect_exp_binders(*x.idx, out);
    }
    void operator()(const FunCall &x) const {
      for (const auto &a : x.args)
        collect_exp_binders(*a, out);
    }
    void operator()(const ForallExp &x) const {
      out.push_back(x.bound);
      collect_exp_binders(*x.body, out);
    }
    void operator()(const LetExp &x) const {
      for (const auto &[n, rhs] : x.binds) {
        out.push_back(n);
        collect_exp_binders(*rhs, out);
      }
      collect_exp_binders(*x.body, out);
    }
    void operator()(const OldExp &x) const { collect_exp_binders(*x.e, out); }
    void operator()(const OldHeapExp &x) const {
      collect_exp_binders(*x.e, out);
    }
    void operator()(const PrevExp &x) const { collect_exp_binders(*x.e, out); }
    void operator()(const PrevHeapExp &x) const {
      collect_exp_binders(*x.e, out);
    }
    void operator()(const SetPrevExp &x) const {
      collect_exp_binders(*x.e, out);
    }
    void operator()(const ForallHeapExp &x) const {
      collect_exp_binders(*x.body, out);
    }
  };
  std::visit(V{out}, e.node);
}

inline void collect_stmt_binders(const Stmt &s, std::vector<std::string> &out) {
  struct V {
    std::vector<std::string> &out;
    void operator()(const SkipStmt &) const {}
    void operator()(const ReturnStmt &) const {}
    void operator()(const AssertStmt &x) const {
      collect_exp_binders(*x.e, out);
    }
    void operator()(const ThenStmt &x) const {
      collect_stmt_binders(*x.s1, out);
      collect_stmt_binders(*x.s2, out);
    }
    void operator()(const IfStmt &x) const {
      collect_exp_binders(*x.guard, out);
      collect_stmt_binders(*x.thn, out);
      collect_stmt_binders(*x.els, out);
    }
    void operator()(const DecStmt &x) const {
      for (const auto &b : x.binds) {
        out.push_back(b.name);
        if (b.init)
          collect_exp_binders(**b.init, out);
      }
      collect_stmt_binders(*x.scope, out);
    }
    void operator()(const AssignStmt &x) const {
      for (const auto &[l, r] : x.pairs) {
        if (const auto *sel = std::get_if<ArrSelLhs>(&l)) {
          collect_exp_binders(*sel->arr, out);
          collect_exp_binders(*sel->idx, out);
        }
        if (const auto *er = std::get_if<ExpRhs>(&r))
          collect_exp_binders(*er->e, out);
        else
          collect_exp_binders(*std::get<ArrAllocRhs>(r).len, out);
      }
    }
    void operator()(const WhileStmt &x) const {
      collect_exp_binders(*x.guard, out);
      for (const auto &e : x.invariants)
        collect_exp_binders(*e, out);
      for (const auto &e : x.decreases)
        collect_exp_binders(*e, out);
      collect_stmt_binders(*x.body, out);
    }
    void operator()(const MetCallStmt &x) const {
      for (const auto &a : x.args)
        collect_exp_binders(*a, out);
    }
  };
  std::visit(V{out}, s.node);
}

} // namespace pass_detail

/// All binders across the program start with "v" and are pairwise distinct.
inline bool is_fresh_program(const Program &p) {
  std::vector<std::string> binders;
  for (const auto &m : p.members) {
    if (const auto *f = std::get_if<Function>(&m)) {
      for (const auto &[n, ty] : f->ins)
        binders.push_back(n);
      pass_detail::collect_exp_binders(*f->body, binders);
      continue;
    }
    const auto &mt = std::get<Method>(m);
    for (const auto &[n, ty] : mt.ins)
      binders.push_back(n);
    for (const auto &[n, ty] : mt.outs)
      binders.push_back(n);
    for (const auto &e : mt.requires_)
      pass_detail::collect_exp_binders(*e, binders);
    for (const auto &e : mt.ensures)
      pass_detail::collect_exp_binders(*e, binders);
    for (const auto &e : mt.decreases)
      pass_detail::collect_exp_binders(*e, binders);
    pass_detail::collect_stmt_binders(*mt.body, binders);
  }
  std::set<std::string> seen;
  for (const auto &n : binders) {
    if (n.empty() || n[0] != 'v')
      return false;
    if (!seen.insert(n).second)
      return false;
  }
  return true;
}

namespace pass_detail {

inline bool no_shadow_rec(std::set<std::string> &declared, const Stmt &s) {
  struct V {
    std::set<std::string> &declared;
    bool operator()(const SkipStmt &) const { return true; }
    bool operator()(const ReturnStmt &) const { return true; }
    bool operator()(const AssertStmt &) const { return true; }
    bool operator()(const AssignStmt &) const { return true; }
    bool operator()(const MetCallStmt &) const { return true; }
    bool operator()(const ThenStmt &x) const {
      return no_shadow_rec(declared, *x.s1) && no_shadow_rec(declared, *x.s2);
    }
    bool operator()(const IfStmt &x) const {
      return no_shadow_rec(declared, *x.thn) && no_shadow_rec(declared, *x.els);
    }
    bool operator()(const DecStmt &x) const {
      std::vector<std::string> added;
      for (const auto &b : x.binds) {
        if (declared.count(b.name))
          return false;
        declared.insert(b.name);
        added.push_back(b.name);
      }
      bool ok = no_shadow_rec(declared, *x.scope);
      for (const auto &n : added)
        declared.erase(n);
      return ok;
    }
    bool operator()(const WhileStmt &x) const {
      return no_shadow_rec(declared, *x.body);
    }
  };
  return std::visit(V{declared}, s.node);
}

} // namespace pass_detail

/// No Dec inside s rebinds a name in `declared` or one bound by an enclosing
/// Dec within s.
inline bool no_shadow(const std::set<std::string> &declared, const Stmt &s) {
  std::set<std::string> d = declared;
  return pass_detail::no_shadow_rec(d, s);
}

} // namespace dfy
