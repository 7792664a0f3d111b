//===--- ast.hpp - Dafny-subset abstract syntax ----------------------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Types, expressions, statements, and program members for the imperative
// Dafny subset, plus the small syntactic utilities (conjunction building,
// assigned-locals analysis, member lookup, free variables) shared by the
// interpreter, compiler, and VC generator.
//
// All nodes are immutable after construction; subtrees are shared through
// shared_ptr<const T> and are safe to use across threads.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dfy {

using BigInt = boost::multiprecision::cpp_int;

//===----------------------------------------------------------------------===//
// Types
//===----------------------------------------------------------------------===//

/// Dafny-subset types: int, bool, string, and (arbitrarily nested) arrays.
struct DType {
  enum class Kind { Int, Bool, Str, Arr };
  Kind kind = Kind::Int;
  std::shared_ptr<const DType> elem; // set iff kind == Arr

  static DType int_type() { return DType{Kind::Int, nullptr}; }
  static DType bool_type() { return DType{Kind::Bool, nullptr}; }
  static DType str_type() { return DType{Kind::Str, nullptr}; }
  static DType array_of(DType e) {
    return DType{Kind::Arr, std::make_shared<const DType>(std::move(e))};
  }

  bool is_array() const { return kind == Kind::Arr; }
  const DType &element() const { return *elem; }

  friend bool operator==(const DType &a, const DType &b) {
    if (a.kind != b.kind)
      return false;
    if (a.kind != Kind::Arr)
      return true;
    return *a.elem == *b.elem;
  }
  friend bool operator!=(const DType &a, const DType &b) { return !(a == b); }
};

//===----------------------------------------------------------------------===//
// Expressions
//===----------------------------------------------------------------------===//

enum class UnOpKind { Not, Neg };

enum class BinOpKind {
  Add,
  Sub,
  Mul,
  Div, // Euclidean
  Mod, // Euclidean, remainder in [0, |rhs|)
  Lt,
  Le,
  Gt,
  Ge,
  Eq,
  Neq,
  And, // short-circuit
  Or,  // short-circuit
  Imp  // short-circuit: false antecedent skips the consequent
};

struct Exp;
using ExpPtr = std::shared_ptr<const Exp>;

struct IntLit {
  BigInt value;
};
struct BoolLit {
  bool value = false;
};
struct StrLit {
  std::string value;
};
struct Var {
  std::string name;
};
struct UnOp {
  UnOpKind op;
  ExpPtr operand;
};
struct BinOp {
  BinOpKind op;
  ExpPtr lhs, rhs;
};
struct Ite {
  ExpPtr cond, thn, els;
};
struct ArrLen {
  ExpPtr arr;
};
struct ArrSel {
  ExpPtr arr, idx;
};
struct FunCall {
  std::string name;
  std::vector<ExpPtr> args;
};
/// Universal quantifier over a single typed variable. Not executable by the
/// base interpreter; given bounded meaning by the VC checker.
struct ForallExp {
  std::string bound;
  DType ty;
  ExpPtr body;
};
/// Simultaneous (parallel) let; bound names within one Let are distinct.
struct LetExp {
  std::vector<std::pair<std::string, ExpPtr>> binds;
  ExpPtr body;
};
/// Evaluate against the locals/heap snapshot taken at method entry.
struct OldExp {
  ExpPtr e;
};
struct OldHeapExp {
  ExpPtr e;
};
/// Verification-only: evaluate against the snapshot taken by SetPrev.
struct PrevExp {
  ExpPtr e;
};
struct PrevHeapExp {
  ExpPtr e;
};
struct SetPrevExp {
  ExpPtr e;
};
/// Verification-only: quantify over heaps agreeing with the current one
/// outside the named (havoced) arrays.
struct ForallHeapExp {
  std::vector<std::string> havoc;
  ExpPtr body;
};

struct Exp {
  using Node =
      std::variant<IntLit, BoolLit, StrLit, Var, UnOp, BinOp, Ite, ArrLen,
                   ArrSel, FunCall, ForallExp, LetExp, OldExp, OldHeapExp,
                   PrevExp, PrevHeapExp, SetPrevExp, ForallHeapExp>;
  Node node;
};

template <typename T> ExpPtr mk_exp(T node) {
  return std::make_shared<const Exp>(Exp{Exp::Node{std::move(node)}});
}

inline ExpPtr mk_int(BigInt v) { return mk_exp(IntLit{std::move(v)}); }
inline ExpPtr mk_int(long v) { return mk_exp(IntLit{BigInt(v)}); }
inline ExpPtr mk_bool(bool b) { return mk_exp(BoolLit{b}); }
inline ExpPtr mk_str(std::string s) { return mk_exp(StrLit{std::move(s)}); }
inline ExpPtr mk_var(std::string n) { return mk_exp(Var{std::move(n)}); }
inline ExpPtr mk_unop(UnOpKind op, ExpPtr e) {
  return mk_exp(UnOp{op, std::move(e)});
}
inline ExpPtr mk_binop(BinOpKind op, ExpPtr a, ExpPtr b) {
  return mk_exp(BinOp{op, std::move(a), std::move(b)});
}
inline ExpPtr mk_and(ExpPtr a, ExpPtr b) {
  return mk_binop(BinOpKind::And, std::move(a), std::move(b));
}
inline ExpPtr mk_or(ExpPtr a, ExpPtr b) {
  return mk_binop(BinOpKind::Or, std::move(a), std::move(b));
}
inline ExpPtr mk_imp(ExpPtr a, ExpPtr b) {
  return mk_binop(BinOpKind::Imp, std::move(a), std::move(b));
}
inline ExpPtr mk_eq(ExpPtr a, ExpPtr b) {
  return mk_binop(BinOpKind::Eq, std::move(a), std::move(b));
}
inline ExpPtr mk_le(ExpPtr a, ExpPtr b) {
  return mk_binop(BinOpKind::Le, std::move(a), std::move(b));
}
inline ExpPtr mk_lt(ExpPtr a, ExpPtr b) {
  return mk_binop(BinOpKind::Lt, std::move(a), std::move(b));
}
inline ExpPtr mk_ite(ExpPtr c, ExpPtr t, ExpPtr e) {
  return mk_exp(Ite{std::move(c), std::move(t), std::move(e)});
}
inline ExpPtr mk_len(ExpPtr a) { return mk_exp(ArrLen{std::move(a)}); }
inline ExpPtr mk_sel(ExpPtr a, ExpPtr i) {
  return mk_exp(ArrSel{std::move(a), std::move(i)});
}
inline ExpPtr mk_old(ExpPtr e) { return mk_exp(OldExp{std::move(e)}); }
inline ExpPtr mk_prev(ExpPtr e) { return mk_exp(PrevExp{std::move(e)}); }
inline ExpPtr mk_prev_heap(ExpPtr e) {
  return mk_exp(PrevHeapExp{std::move(e)});
}
inline ExpPtr mk_set_prev(ExpPtr e) { return mk_exp(SetPrevExp{std::move(e)}); }
inline ExpPtr mk_forall(std::string x, DType ty, ExpPtr body) {
  return mk_exp(ForallExp{std::move(x), std::move(ty), std::move(body)});
}
inline ExpPtr mk_forall_heap(std::vector<std::string> havoc, ExpPtr body) {
  return mk_exp(ForallHeapExp{std::move(havoc), std::move(body)});
}
inline ExpPtr mk_let(std::vector<std::pair<std::string, ExpPtr>> binds,
                     ExpPtr body) {
  return mk_exp(LetExp{std::move(binds), std::move(body)});
}

//===----------------------------------------------------------------------===//
// Statements
//===----------------------------------------------------------------------===//

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

/// Assignment targets: a variable or an array cell.
struct VarLhs {
  std::string name;
};
struct ArrSelLhs {
  ExpPtr arr, idx;
};
using Lhs = std::variant<VarLhs, ArrSelLhs>;

/// Assignment sources: an expression or an array allocation (default-filled;
/// no initializer).
struct ExpRhs {
  ExpPtr e;
};
struct ArrAllocRhs {
  DType elem_ty;
  ExpPtr len;
};
using Rhs = std::variant<ExpRhs, ArrAllocRhs>;

struct SkipStmt {};
struct AssertStmt {
  ExpPtr e;
};
struct ThenStmt {
  StmtPtr s1, s2;
};
struct IfStmt {
  ExpPtr guard;
  StmtPtr thn, els;
};
/// Local declarations; initializers are evaluated left to right before any
/// binding takes effect, and the bindings are popped after the scope.
struct DecStmt {
  struct Bind {
    std::string name;
    DType ty;
    std::optional<ExpPtr> init;
  };
  std::vector<Bind> binds;
  StmtPtr scope;
};
/// Parallel assignment: all right-hand sides first, then writes left to right.
struct AssignStmt {
  std::vector<std::pair<Lhs, Rhs>> pairs;
};
/// While with its verification annotations carried in the syntax.
struct WhileStmt {
  ExpPtr guard;
  std::vector<ExpPtr> invariants;
  std::vector<ExpPtr> decreases;
  std::vector<std::string> modifies;
  StmtPtr body;
};
struct ReturnStmt {};
struct MetCallStmt {
  std::vector<std::string> lhss;
  std::string method;
  std::vector<ExpPtr> args;
};

struct Stmt {
  using Node = std::variant<SkipStmt, AssertStmt, ThenStmt, IfStmt, DecStmt,
                            AssignStmt, WhileStmt, ReturnStmt, MetCallStmt>;
  Node node;
};

template <typename T> StmtPtr mk_stmt(T node) {
  return std::make_shared<const Stmt>(Stmt{Stmt::Node{std::move(node)}});
}

inline StmtPtr mk_skip() { return mk_stmt(SkipStmt{}); }
inline StmtPtr mk_return() { return mk_stmt(ReturnStmt{}); }
inline StmtPtr mk_assert(ExpPtr e) { return mk_stmt(AssertStmt{std::move(e)}); }
inline StmtPtr mk_then(StmtPtr a, StmtPtr b) {
  return mk_stmt(ThenStmt{std::move(a), std::move(b)});
}
inline StmtPtr mk_if(ExpPtr g, StmtPtr t, StmtPtr e) {
  return mk_stmt(IfStmt{std::move(g), std::move(t), std::move(e)});
}

//===----------------------------------------------------------------------===//
// Members and programs
//===----------------------------------------------------------------------===//

using TypedName = std::pair<std::string, DType>;

struct Method {
  std::string name;
  std::vector<TypedName> ins;
  std::vector<ExpPtr> requires_;
  std::vector<ExpPtr> ensures;
  std::vector<ExpPtr> decreases;
  std::vector<std::string> modifies;
  std::vector<TypedName> outs;
  StmtPtr body;
};

struct Function {
  std::string name;
  std::vector<TypedName> ins;
  DType res_ty;
  ExpPtr body;
};

using Member = std::variant<Method, Function>;

struct Program {
  std::vector<Member> members;
};

inline const std::string &member_name(const Member &m) {
  return std::visit([](const auto &x) -> const std::string & { return x.name; },
                    m);
}

/// First member with the given name, or null. Duplicates resolve to the
/// first occurrence; distinctness itself is checked at evaluation time.
inline const Member *member_lookup(const Program &p, const std::string &name) {
  for (const auto &m : p.members)
    if (member_name(m) == name)
      return &m;
  return nullptr;
}

//===----------------------------------------------------------------------===//
// Structural equality
//===----------------------------------------------------------------------===//

bool exp_equal(const Exp &a, const Exp &b);
bool stmt_equal(const Stmt &a, const Stmt &b);

inline bool exp_equal(const ExpPtr &a, const ExpPtr &b) {
  if (a == b)
    return true;
  if (!a || !b)
    return false;
  return exp_equal(*a, *b);
}

inline bool exps_equal(const std::vector<ExpPtr> &a,
                       const std::vector<ExpPtr> &b) {
  if (a.size() != b.size())
    return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!exp_equal(a[i], b[i]))
      return false;
  return true;
}

inline bool exp_equal(const Exp &a, const Exp &b) {
  if (a.node.index() != b.node.index())
    return false;
  struct Eq {
    const Exp::Node &other;
    bool operator()(const IntLit &x) const {
      return x.value == std::get<IntLit>(other).value;
    }
    bool operator()(const BoolLit &x) const {
      return x.value == std::get<BoolLit>(other).value;
    }
    bool operator()(const StrLit &x) const {
      return x.value == std::get<StrLit>(other).value;
    }
    bool operator()(const Var &x) const {
      return x.name == std::get<Var>(other).name;
    }
    bool operator()(const UnOp &x) const {
      const auto &y = std::get<UnOp>(other);
      return x.op == y.op && exp_equal(x.operand, y.operand);
    }
    bool operator()(const BinOp &x) const {
      const auto &y = std::get<BinOp>(other);
      return x.op == y.op && exp_equal(x.lhs, y.lhs) && exp_equal(x.rhs, y.rhs);
    }
    bool operator()(const Ite &x) const {
      const auto &y = std::get<Ite>(other);
      return exp_equal(x.cond, y.cond) && exp_equal(x.thn, y.thn) &&
             exp_equal(x.els, y.els);
    }
    bool operator()(const ArrLen &x) const {
      return exp_equal(x.arr, std::get<ArrLen>(other).arr);
    }
    bool operator()(const ArrSel &x) const {
      const auto &y = std::get<ArrSel>(other);
      return exp_equal(x.arr, y.arr) && exp_equal(x.idx, y.idx);
    }
    bool operator()(const FunCall &x) const {
      const auto &y = std::get<FunCall>(other);
      return x.name == y.name && exps_equal(x.args, y.args);
    }
    bool operator()(const ForallExp &x) const {
      const auto &y = std::get<ForallExp>(other);
      return x.bound == y.bound && x.ty == y.ty && exp_equal(x.body, y.body);
    }
    bool operator()(const LetExp &x) const {
      const auto &y = std::get<LetExp>(other);
      if (x.binds.size() != y.binds.size())
        return false;
      for (size_t i = 0; i < x.binds.size(); ++i)
        if (x.binds[i].first != y.binds[i].first ||
            !exp_equal(x.binds[i].second, y.binds[i].second))
          return false;
      return exp_equal(x.body, y.body);
    }
    bool operator()(const OldExp &x) const {
      return exp_equal(x.e, std::get<OldExp>(other).e);
    }
    bool operator()(const OldHeapExp &x) const {
      return exp_equal(x.e, std::get<OldHeapExp>(other).e);
    }
    bool operator()(const PrevExp &x) const {
      return exp_equal(x.e, std::get<PrevExp>(other).e);
    }
    bool operator()(const PrevHeapExp &x) const {
      return exp_equal(x.e, std::get<PrevHeapExp>(other).e);
    }
    bool operator()(const SetPrevExp &x) const {
      return exp_equal(x.e, std::get<SetPrevExp>(other).e);
    }
    bool operator()(const ForallHeapExp &x) const {
      const auto &y = std::get<ForallHeapExp>(other);
      return x.havoc == y.havoc && exp_equal(x.body, y.body);
    }
  };
  return std::visit(Eq{b.node}, a.node);
}

inline bool stmt_equal(const StmtPtr &a, const StmtPtr &b) {
  if (a == b)
    return true;
  if (!a || !b)
    return false;
  return stmt_equal(*a, *b);
}

inline bool lhs_equal(const Lhs &a, const Lhs &b) {
  if (a.index() != b.index())
    return false;
  if (const auto *v = std::get_if<VarLhs>(&a))
    return v->name == std::get<VarLhs>(b).name;
  const auto &x = std::get<ArrSelLhs>(a);
  const auto &y = std::get<ArrSelLhs>(b);
  return exp_equal(x.arr, y.arr) && exp_equal(x.idx, y.idx);
}

inline bool rhs_equal(const Rhs &a, const Rhs &b) {
  if (a.index() != b.index())
    return false;
  if (const auto *e = std::get_if<ExpRhs>(&a))
    return exp_equal(e->e, std::get<ExpRhs>(b).e);
  const auto &x = std::get<ArrAllocRhs>(a);
  const auto &y = std::get<ArrAllocRhs>(b);
  return x.elem_ty == y.elem_ty && exp_equal(x.len, y.len);
}

inline bool stmt_equal(const Stmt &a, const Stmt &b) {
  if (a.node.index() != b.node.index())
    return false;
  struct Eq {
    const Stmt::Node &other;
    bool operator()(const SkipStmt &) const { return true; }
    bool operator()(const ReturnStmt &) const { return true; }
    bool operator()(const AssertStmt &x) const {
      return exp_equal(x.e, std::get<AssertStmt>(other).e);
    }
    bool operator()(const ThenStmt &x) const {
      const auto &y = std::get<ThenStmt>(other);
      return stmt_equal(x.s1, y.s1) && stmt_equal(x.s2, y.s2);
    }
    bool operator()(const IfStmt &x) const {
      const auto &y = std::get<IfStmt>(other);
      return exp_equal(x.guard, y.guard) && stmt_equal(x.thn, y.thn) &&
             stmt_equal(x.els, y.els);
    }
    bool operator()(const DecStmt &x) const {
      const auto &y = std::get<DecStmt>(other);
      if (x.binds.size() != y.binds.size())
        return false;
      for (size_t i = 0; i < x.binds.size(); ++i) {
        const auto &bx = x.binds[i];
        const auto &by = y.binds[i];
        if (bx.name != by.name || !(bx.ty == by.ty) ||
            bx.init.has_value() != by.init.has_value())
          return false;
        if (bx.init && !exp_equal(*bx.init, *by.init))
          return false;
      }
      return stmt_equal(x.scope, y.scope);
    }
    bool operator()(const AssignStmt &x) const {
      const auto &y = std::get<AssignStmt>(other);
      if (x.pairs.size() != y.pairs.size())
        return false;
      for (size_t i = 0; i < x.pairs.size(); ++i)
        if (!lhs_equal(x.pairs[i].first, y.pairs[i].first) ||
            !rhs_equal(x.pairs[i].second, y.pairs[i].second))
          return false;
      return true;
    }
    bool operator()(const WhileStmt &x) const {
      const auto &y = std::get<WhileStmt>(other);
      return exp_equal(x.guard, y.guard) &&
             exps_equal(x.invariants, y.invariants) &&
             exps_equal(x.decreases, y.decreases) && x.modifies == y.modifies &&
             stmt_equal(x.body, y.body);
    }
    bool operator()(const MetCallStmt &x) const {
      const auto &y = std::get<MetCallStmt>(other);
      return x.lhss == y.lhss && x.method == y.method &&
             exps_equal(x.args, y.args);
    }
  };
  return std::visit(Eq{b.node}, a.node);
}

inline bool typed_names_equal(const std::vector<TypedName> &a,
                              const std::vector<TypedName> &b) {
  if (a.size() != b.size())
    return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].first != b[i].first || !(a[i].second == b[i].second))
      return false;
  return true;
}

inline bool member_equal(const Member &a, const Member &b) {
  if (a.index() != b.index())
    return false;
  if (const auto *f = std::get_if<Function>(&a)) {
    const auto &g = std::get<Function>(b);
    return f->name == g.name && typed_names_equal(f->ins, g.ins) &&
           f->res_ty == g.res_ty && exp_equal(f->body, g.body);
  }
  const auto &x = std::get<Method>(a);
  const auto &y = std::get<Method>(b);
  return x.name == y.name && typed_names_equal(x.ins, y.ins) &&
         exps_equal(x.requires_, y.requires_) &&
         exps_equal(x.ensures, y.ensures) &&
         exps_equal(x.decreases, y.decreases) && x.modifies == y.modifies &&
         typed_names_equal(x.outs, y.outs) && stmt_equal(x.body, y.body);
}

inline bool program_equal(const Program &a, const Program &b) {
  if (a.members.size() != b.members.size())
    return false;
  for (size_t i = 0; i < a.members.size(); ++i)
    if (!member_equal(a.members[i], b.members[i]))
      return false;
  return true;
}

//===----------------------------------------------------------------------===//
// Syntactic utilities
//===----------------------------------------------------------------------===//

/// Right-nested conjunction: [] -> true, [e] -> e, [e1,e2,e3] ->
/// And(e1, And(e2, e3)).
inline ExpPtr conj(const std::vector<ExpPtr> &es) {
  if (es.empty())
    return mk_bool(true);
  ExpPtr acc = es.back();
  for (size_t i = es.size() - 1; i-- > 0;)
    acc = mk_and(es[i], acc);
  return acc;
}

namespace detail {
inline void assigned_locals_rec(const Stmt &s, std::set<std::string> &shadowed,
                                std::set<std::string> &out) {
  struct V {
    std::set<std::string> &shadowed;
    std::set<std::string> &out;
    void operator()(const SkipStmt &) {}
    void operator()(const ReturnStmt &) {}
    void operator()(const AssertStmt &) {}
    void operator()(const ThenStmt &s) {
      assigned_locals_rec(*s.s1, shadowed, out);
      assigned_locals_rec(*s.s2, shadowed, out);
    }
    void operator()(const IfStmt &s) {
      assigned_locals_rec(*s.thn, shadowed, out);
      assigned_locals_rec(*s.els, shadowed, out);
    }
    void operator()(const DecStmt &s) {
      std::vector<std::string> added;
      for (const auto &b : s.binds)
        if (shadowed.insert(b.name).second)
          added.push_back(b.name);
      assigned_locals_rec(*s.scope, shadowed, out);
      for (const auto &n : added)
        shadowed.erase(n);
    }
    void operator()(const AssignStmt &s) {
      for (const auto &[lhs, rhs] : s.pairs)
        if (const auto *v = std::get_if<VarLhs>(&lhs))
          if (!shadowed.count(v->name))
            out.insert(v->name);
    }
    void operator()(const WhileStmt &s) {
      assigned_locals_rec(*s.body, shadowed, out);
    }
    void operator()(const MetCallStmt &s) {
      for (const auto &n : s.lhss)
        if (!shadowed.count(n))
          out.insert(n);
    }
  };
  std::visit(V{shadowed, out}, s.node);
}
} // namespace detail

/// Variables assigned (as VarLhs or method-call targets) anywhere inside s,
/// excluding names rebound by a Dec inside s.
inline std::set<std::string> assigned_locals(const Stmt &s) {
  std::set<std::string> shadowed, out;
  detail::assigned_locals_rec(s, shadowed, out);
  return out;
}

namespace detail {
inline void free_vars_rec(const Exp &e, std::set<std::string> &bound,
                          std::set<std::string> &out) {
  struct V {
    std::set<std::string> &bound;
    std::set<std::string> &out;
    void operator()(const IntLit &) {}
    void operator()(const BoolLit &) {}
    void operator()(const StrLit &) {}
    void operator()(const Var &v) {
      if (!bound.count(v.name))
        out.insert(v.name);
    }
    void operator()(const UnOp &x) { free_vars_rec(*x.operand, bound, out); }
    void operator()(const BinOp &x) {
      free_vars_rec(*x.lhs, bound, out);
      free_vars_rec(*x.rhs, bound, out);
    }
    void operator()(const Ite &x) {
      free_vars_rec(*x.cond, bound, out);
      free_vars_rec(*x.thn, bound, out);
      free_vars_rec(*x.els, bound, out);
    }
    void operator()(const ArrLen &x) { free_vars_rec(*x.arr, bound, out); }
    void operator()(const ArrSel &x) {
      free_vars_rec(*x.arr, bound, out);
      free_vars_rec(*x.idx, bound, out);
    }
    void operator()(const FunCall &x) {
      for (const auto &a : x.args)
        free_vars_rec(*a, bound, out);
    }
    void operator()(const ForallExp &x) {
      bool added = bound.insert(x.bound).second;
      free_vars_rec(*x.body, bound, out);
      if (added)
        bound.erase(x.bound);
    }
    void operator()(const LetExp &x) {
      for (const auto &[n, rhs] : x.binds)
        free_vars_rec(*rhs, bound, out);
      std::vector<std::string> added;
      for (const auto &[n, rhs] : x.binds)
        if (bound.insert(n).second)
          added.push_back(n);
      free_vars_rec(*x.body, bound, out);
      for (const auto &n : added)
        bound.erase(n);
    }
    void operator()(const OldExp &x) { free_vars_rec(*x.e, bound, out); }
    void operator()(const OldHeapExp &x) { free_vars_rec(*x.e, bound, out); }
    void operator()(const PrevExp &x) { free_vars_rec(*x.e, bound, out); }
    void operator()(const PrevHeapExp &x) { free_vars_rec(*x.e, bound, out); }
    void operator()(const SetPrevExp &x) { free_vars_rec(*x.e, bound, out); }
    void operator()(const ForallHeapExp &x) {
      // Havoc names reference arrays in the current locals.
      for (const auto &n : x.havoc)
        if (!bound.count(n))
          out.insert(n);
      free_vars_rec(*x.body, bound, out);
    }
  };
  std::visit(V{bound, out}, e.node);
}
} // namespace detail

inline std::set<std::string> free_vars(const Exp &e) {
  std::set<std::string> bound, out;
  detail::free_vars_rec(e, bound, out);
  return out;
}

} // namespace dfy
