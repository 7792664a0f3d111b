//===--- compiler.hpp - Source-to-MLCore compiler ----------------------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Compilation schemes:
//   - variables become references (reads are dereferences),
//   - arrays become (length, array) tuples,
//   - while loops become local tail-recursive functions,
//   - return raises the Return exception; method bodies are wrapped in a
//     handler that reads out the out-parameters,
//   - methods become one mutually recursive group of curried functions named
//     dfy_<name> with parameters in REVERSED order (the target language
//     evaluates application spines right to left, so reversed parameters
//     restore source argument evaluation order),
//   - out-parameters: none -> unit, one -> bare value, two or more -> tuple.
//
// The pipeline runs remove_assert and freshen_program internally; generated
// temporaries t0, t1, ... cannot collide with freshened v-names.
//
// A set of deliberate mutations is built in for harness sensitivity testing.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp"
#include "dfy/passes.hpp"
#include "dfy/result.hpp"
#include "dfy/targetlang.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace dfy {

enum class Mutation {
  None,
  OpFlip,              // Add compiles to Sub
  NoArgReverse,        // call sites apply arguments in source order
  DropReturnHandler,   // method bodies lose their Return handler
  WrongTupleComponent, // array length reads the array component
  NoClockDecrement     // interpreter-side: applications do not tick the clock
};

namespace compiler_detail {

struct CompileFail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Compiler {
public:
  explicit Compiler(Mutation mut) : mut_(mut) {}

  TExpPtr exp(const Exp &e) {
    struct V {
      Compiler &c;
      TExpPtr operator()(const IntLit &x) const { return t_int(x.value); }
      TExpPtr operator()(const BoolLit &x) const { return t_bool(x.value); }
      TExpPtr operator()(const StrLit &x) const { return t_str(x.value); }
      TExpPtr operator()(const Var &x) const {
        return t_deref(t_var(x.name));
      }
      TExpPtr operator()(const UnOp &x) const {
        auto e = c.exp(*x.operand);
        if (x.op == UnOpKind::Not)
          return mk_t(TPrimNot{std::move(e)});
        return mk_t(TPrimNeg{std::move(e)});
      }
      TExpPtr operator()(const BinOp &x) const {
        auto a = c.exp(*x.lhs);
        // Short-circuit connectives become conditionals.
        if (x.op == BinOpKind::And)
          return t_if(std::move(a), c.exp(*x.rhs), t_bool(false));
        if (x.op == BinOpKind::Or)
          return t_if(std::move(a), t_bool(true), c.exp(*x.rhs));
        if (x.op == BinOpKind::Imp)
          return t_if(std::move(a), c.exp(*x.rhs), t_bool(true));
        BinOpKind op = x.op;
        if (c.mut_ == Mutation::OpFlip && op == BinOpKind::Add)
          op = BinOpKind::Sub;
        return t_prim(op, std::move(a), c.exp(*x.rhs));
      }
      TExpPtr operator()(const Ite &x) const {
        return t_if(c.exp(*x.cond), c.exp(*x.thn), c.exp(*x.els));
      }
      TExpPtr operator()(const ArrLen &x) const {
        size_t comp = c.mut_ == Mutation::WrongTupleComponent ? 1 : 0;
        return t_proj(comp, c.exp(*x.arr));
      }
      TExpPtr operator()(const ArrSel &x) const {
        return mk_t(TArrSub{t_proj(1, c.exp(*x.arr)), c.exp(*x.idx)});
      }
      TExpPtr operator()(const FunCall &x) const {
        std::vector<TExpPtr> args;
        for (const auto &a : x.args)
          args.push_back(c.exp(*a));
        return c.call_spine("dfy_" + x.name, std::move(args));
      }
      TExpPtr operator()(const ForallExp &) const {
        throw CompileFail("cannot compile a forall expression");
      }
      TExpPtr operator()(const LetExp &x) const {
        // Names are globally unique post-freshen, so the parallel let can be
        // emitted as a sequential chain of reference bindings.
        std::vector<std::pair<std::string, TExpPtr>> binds;
        for (const auto &[n, rhs] : x.binds)
          binds.emplace_back(n, t_ref(c.exp(*rhs)));
        TExpPtr body = c.exp(*x.body);
        for (size_t i = binds.size(); i-- > 0;)
          body = t_let(binds[i].first, std::move(binds[i].second),
                       std::move(body));
        return body;
      }
      TExpPtr operator()(const OldExp &) const {
        throw CompileFail("cannot compile an old expression");
      }
      TExpPtr operator()(const OldHeapExp &) const {
        throw CompileFail("cannot compile an oldheap expression");
      }
      TExpPtr operator()(const PrevExp &) const {
        throw CompileFail("cannot compile a prev expression");
      }
      TExpPtr operator()(const PrevHeapExp &) const {
        throw CompileFail("cannot compile a prevheap expression");
      }
      TExpPtr operator()(const SetPrevExp &) const {
        throw CompileFail("cannot compile a setprev expression");
      }
      TExpPtr operator()(const ForallHeapExp &) const {
        throw CompileFail("cannot compile a forallheap expression");
      }
    };
    return std::visit(V{*this}, e.node);
  }

  /// Curried application with arguments applied in reverse, so that the
  /// outermost application (evaluated first) carries the first argument.
  TExpPtr call_spine(std::string fname, std::vector<TExpPtr> args) {
    TExpPtr cur = t_var(std::move(fname));
    if (args.empty())
      return t_app(std::move(cur), t_unit());
    if (mut_ == Mutation::NoArgReverse) {
      for (size_t i = 0; i < args.size(); ++i)
        cur = t_app(std::move(cur), std::move(args[i]));
      return cur;
    }
    for (size_t i = args.size(); i-- > 0;)
      cur = t_app(std::move(cur), std::move(args[i]));
    return cur;
  }

  std::string tmp() { return "t" + std::to_string(tmp_counter_++); }

  /// Array allocation as a (length, array) tuple, evaluating the length once.
  TExpPtr alloc_exp(const ArrAllocRhs &a) {
    std::string tl = tmp();
    TExpPtr dflt = default_exp(a.elem_ty);
    return t_let(tl, exp(*a.len),
                 t_tuple({t_var(tl), mk_t(TArrAlloc{t_var(tl), dflt})}));
  }

  TExpPtr default_exp(const DType &t) {
    switch (t.kind) {
    case DType::Kind::Int:
      return t_int(0);
    case DType::Kind::Bool:
      return t_bool(false);
    case DType::Kind::Str:
      return t_str("");
    case DType::Kind::Arr:
      // Zero-length array paired with length 0.
      return t_tuple({t_int(0), mk_t(TArrAlloc{t_int(0),
                                               default_exp(t.element())})});
    }
    return t_int(0);
  }

  TExpPtr stmt(const Stmt &s) {
    struct V {
      Compiler &c;
      TExpPtr operator()(const SkipStmt &) const { return t_unit(); }
      TExpPtr operator()(const ReturnStmt &) const {
        return t_raise("Return");
      }
      TExpPtr operator()(const AssertStmt &) const {
        throw CompileFail("assert must be removed before compilation");
      }
      TExpPtr operator()(const ThenStmt &x) const {
        return t_seq(c.stmt(*x.s1), c.stmt(*x.s2));
      }
      TExpPtr operator()(const IfStmt &x) const {
        return t_if(c.exp(*x.guard), c.stmt(*x.thn), c.stmt(*x.els));
      }
      TExpPtr operator()(const DecStmt &x) const {
        // Post-freshen, initializers cannot reference the new names, so a
        // straight TLet chain preserves initialize-before-bind order.
        TExpPtr body = c.stmt(*x.scope);
        for (size_t i = x.binds.size(); i-- > 0;) {
          const auto &b = x.binds[i];
          TExpPtr init = b.init ? c.exp(**b.init) : t_int(0);
          body = t_let(b.name, t_ref(std::move(init)), std::move(body));
        }
        return body;
      }
      TExpPtr operator()(const AssignStmt &x) const {
        // Phase 1: bind every right-hand side to a temporary, left to right.
        std::vector<std::string> temps;
        std::vector<TExpPtr> rhss;
        for (const auto &[l, r] : x.pairs) {
          temps.push_back(c.tmp());
          if (const auto *er = std::get_if<ExpRhs>(&r))
            rhss.push_back(c.exp(*er->e));
          else
            rhss.push_back(c.alloc_exp(std::get<ArrAllocRhs>(r)));
        }
        // Phase 2: the writes, left to right.
        TExpPtr body = t_unit();
        for (size_t i = x.pairs.size(); i-- > 0;) {
          const Lhs &l = x.pairs[i].first;
          TExpPtr write;
          if (const auto *v = std::get_if<VarLhs>(&l)) {
            write = t_assign(t_var(v->name), t_var(temps[i]));
          } else {
            const auto &sel = std::get<ArrSelLhs>(l);
            write = mk_t(TArrUpd{t_proj(1, c.exp(*sel.arr)), c.exp(*sel.idx),
                                 t_var(temps[i])});
          }
          body = t_seq(std::move(write), std::move(body));
        }
        for (size_t i = x.pairs.size(); i-- > 0;)
          body = t_let(temps[i], std::move(rhss[i]), std::move(body));
        return body;
      }
      TExpPtr operator()(const WhileStmt &x) const {
        std::string loop = c.tmp();
        TExpPtr body = t_if(c.exp(*x.guard),
                            t_seq(c.stmt(*x.body),
                                  t_app(t_var(loop), t_unit())),
                            t_unit());
        return mk_t(TLetrec{{TLetrecDef{loop, "u", std::move(body)}},
                            t_app(t_var(loop), t_unit())});
      }
      TExpPtr operator()(const MetCallStmt &x) const {
        std::vector<TExpPtr> args;
        for (const auto &a : x.args)
          args.push_back(c.exp(*a));
        TExpPtr call = c.call_spine("dfy_" + x.method, std::move(args));
        if (x.lhss.empty())
          return t_seq(std::move(call), t_unit());
        std::string t = c.tmp();
        if (x.lhss.size() == 1)
          return t_let(t, std::move(call),
                       t_assign(t_var(x.lhss[0]), t_var(t)));
        // Destructure the result tuple into temporaries, then assign.
        std::vector<std::string> temps;
        for (size_t i = 0; i < x.lhss.size(); ++i)
          temps.push_back(c.tmp());
        TExpPtr body = t_unit();
        for (size_t i = x.lhss.size(); i-- > 0;)
          body = t_seq(t_assign(t_var(x.lhss[i]), t_var(temps[i])),
                       std::move(body));
        for (size_t i = x.lhss.size(); i-- > 0;)
          body = t_let(temps[i], t_proj(i, t_var(t)), std::move(body));
        return t_let(t, std::move(call), std::move(body));
      }
    };
    return std::visit(V{*this}, s.node);
  }

  TLetrecDef method(const Method &m) {
    tmp_counter_ = 0;
    // Result expression read by the Return handler.
    TExpPtr result;
    if (m.outs.empty()) {
      result = t_unit();
    } else if (m.outs.size() == 1) {
      result = t_deref(t_var(m.outs[0].first));
    } else {
      std::vector<TExpPtr> comps;
      for (const auto &[n, ty] : m.outs)
        comps.push_back(t_deref(t_var(n)));
      result = t_tuple(std::move(comps));
    }
    TExpPtr body = stmt(*m.body);
    if (mut_ == Mutation::DropReturnHandler)
      body = t_seq(std::move(body), std::move(result));
    else
      body = mk_t(THandle{std::move(body), "Return", std::move(result)});
    // Out-parameters live in fresh references.
    for (size_t i = m.outs.size(); i-- > 0;)
      body = t_let(m.outs[i].first, t_ref(t_int(0)), std::move(body));
    // In-parameters are rebound as references over the bare argument values.
    for (size_t i = m.ins.size(); i-- > 0;)
      body = t_let(m.ins[i].first, t_ref(t_var(m.ins[i].first)),
                   std::move(body));
    // Curried formals in reversed order; a parameterless method takes unit.
    std::string first_param = m.ins.empty() ? "u" : m.ins.back().first;
    for (size_t i = 0; i + 1 < m.ins.size(); ++i)
      body = mk_t(TFun{m.ins[i].first, std::move(body)});
    // Note: loop above wraps ins[0..n-2] innermost-first; ins[n-1] is the
    // outer TLetrecDef parameter. Wrapping order: ins[0] becomes the
    // innermost function, so the spine dfy_f a_n ... a_1 binds a_i to ins[i].
    return TLetrecDef{"dfy_" + m.name, first_param, std::move(body)};
  }

  TLetrecDef function(const Function &f) {
    tmp_counter_ = 0;
    TExpPtr body = exp(*f.body);
    for (size_t i = f.ins.size(); i-- > 0;)
      body = t_let(f.ins[i].first, t_ref(t_var(f.ins[i].first)),
                   std::move(body));
    std::string first_param = f.ins.empty() ? "u" : f.ins.back().first;
    for (size_t i = 0; i + 1 < f.ins.size(); ++i)
      body = mk_t(TFun{f.ins[i].first, std::move(body)});
    return TLetrecDef{"dfy_" + f.name, first_param, std::move(body)};
  }

private:
  Mutation mut_;
  unsigned long tmp_counter_ = 0;
};

} // namespace compiler_detail

/// Compile a program to a declaration list: the Return exception, one
/// mutually recursive group containing every member, and (optionally) an
/// entry that applies dfy_Main to unit.
inline Result<std::vector<TDec>> compile(const Program &p,
                                         Mutation mut = Mutation::None,
                                         bool with_main_entry = true) {
  using R = Result<std::vector<TDec>>;
  Program prepared = freshen_program(remove_assert(p));
  compiler_detail::Compiler c(mut);
  std::vector<TDec> out;
  out.push_back(DExn{"Return"});
  DLetrec group;
  bool has_main = false;
  try {
    for (const auto &m : prepared.members) {
      if (const auto *f = std::get_if<Function>(&m)) {
        group.defs.push_back(c.function(*f));
      } else {
        const auto &mt = std::get<Method>(m);
        if (mt.name == "Main")
          has_main = true;
        group.defs.push_back(c.method(mt));
      }
    }
  } catch (const compiler_detail::CompileFail &e) {
    return R::err(e.what());
  }
  out.push_back(std::move(group));
  if (with_main_entry && has_main)
    out.push_back(DLet{"main_result", t_app(t_var("dfy_Main"), t_unit())});
  return R(std::move(out));
}

/// Compile a single expression (must be executable). Exposed for tests.
inline Result<TExpPtr> compile_exp(const Exp &e,
                                   Mutation mut = Mutation::None) {
  try {
    compiler_detail::Compiler c(mut);
    return Result<TExpPtr>(c.exp(e));
  } catch (const compiler_detail::CompileFail &ex) {
    return Result<TExpPtr>::err(ex.what());
  }
}

/// Compile a single statement. Exposed for tests.
inline Result<TExpPtr> compile_stmt(const Stmt &s,
                                    Mutation mut = Mutation::None) {
  try {
    compiler_detail::Compiler c(mut);
    return Result<TExpPtr>(c.stmt(s));
  } catch (const compiler_detail::CompileFail &ex) {
    return Result<TExpPtr>::err(ex.what());
  }
}

} // namespace dfy
