//===--- simrel.hpp - Differential testing of source vs. compiled code ---===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Runs each method of a program twice on the same randomly generated
// arguments: once under the source interpreter and once compiled and run
// under the target-language interpreter. The two results are related value
// by value, with arrays related through a location map (source heap address
// to target store index), and the final heaps compared cell by cell.
//
// Verdicts per trial:
//   Match          both sides agree on outputs and on the final heap
//   SourceFail     the source run failed (uninformative for comparison)
//   SourceTimeout  the source run ran out of fuel; the target, given the
//                  same fuel, must not produce a value
//   Mismatch       any disagreement, including target crashes and raises
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/ast.hpp"
#include "dfy/compiler.hpp"
#include "dfy/frontend.hpp"
#include "dfy/semantics.hpp"
#include "dfy/targetlang.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace dfy {

/// Source heap address -> target store index (injective).
using LocMap = std::map<uint64_t, size_t>;

//===----------------------------------------------------------------------===//
// Value and heap relations
//===----------------------------------------------------------------------===//

inline bool val_rel(const LocMap &m, const Value &dv, const TVal &tv) {
  if (const auto *i = std::get_if<IntV>(&dv.v)) {
    const auto *ti = std::get_if<VIntV>(&tv.v);
    return ti && ti->i == i->i;
  }
  if (const auto *b = std::get_if<BoolV>(&dv.v)) {
    const auto *tb = std::get_if<VBoolV>(&tv.v);
    return tb && tb->b == b->b;
  }
  if (const auto *s = std::get_if<StrV>(&dv.v)) {
    const auto *ts = std::get_if<VStrV>(&tv.v);
    return ts && ts->s == s->s;
  }
  const auto &a = std::get<ArrV>(dv.v);
  const auto *tt = std::get_if<VTupleV>(&tv.v);
  if (!tt || tt->vs.size() != 2)
    return false;
  const auto *tl = std::get_if<VIntV>(&tt->vs[0].v);
  const auto *tp = std::get_if<VLocV>(&tt->vs[1].v);
  if (!tl || !tp || tl->i != a.len)
    return false;
  auto it = m.find(a.loc);
  return it != m.end() && it->second == tp->loc;
}

/// Every mapped source array must line up with a target array cell of the
/// same length and related contents.
inline bool array_rel(const LocMap &m, const Heap &heap, const TStore &store) {
  for (const auto &[dloc, tidx] : m) {
    if (dloc >= heap.size() || tidx >= store.cells.size())
      return false;
    const auto *cell = std::get_if<ArrCell>(&store.cells[tidx]);
    if (!cell)
      return false;
    const HeapValue &hv = heap[dloc];
    if (hv.elems.size() != cell->vs.size())
      return false;
    for (size_t i = 0; i < hv.elems.size(); ++i)
      if (!val_rel(m, hv.elems[i], cell->vs[i]))
        return false;
  }
  return true;
}

//===----------------------------------------------------------------------===//
// Generated arguments
//===----------------------------------------------------------------------===//

/// A closed argument value, independent of either heap; materialized into a
/// source heap and a target store before a trial.
struct ArgVal {
  struct ArrayArg {
    DType elem_ty;
    std::vector<ArgVal> elems;
  };
  std::variant<BigInt, bool, std::string, ArrayArg> v;
};

inline ArgVal arg_int(BigInt i) { return ArgVal{std::move(i)}; }
inline ArgVal arg_int(long i) { return ArgVal{BigInt(i)}; }
inline ArgVal arg_bool(bool b) { return ArgVal{b}; }
inline ArgVal arg_str(std::string s) { return ArgVal{std::move(s)}; }
inline ArgVal arg_array(DType elem_ty, std::vector<ArgVal> elems) {
  return ArgVal{ArgVal::ArrayArg{std::move(elem_ty), std::move(elems)}};
}

struct GenOpts {
  long int_lo = -100;
  long int_hi = 100;
  size_t arr_len_max = 8;
};

inline ArgVal generate_arg(std::mt19937_64 &rng, const DType &ty,
                           const GenOpts &opts = {}) {
  switch (ty.kind) {
  case DType::Kind::Int: {
    // Bias toward the corners that expose off-by-one behavior.
    std::uniform_int_distribution<int> pick(0, 9);
    if (pick(rng) == 0) {
      static const long corners[] = {0, 1, -1, 2, -2, 100, -100, 101, 99};
      std::uniform_int_distribution<size_t> c(0, std::size(corners) - 1);
      return arg_int(corners[c(rng)]);
    }
    std::uniform_int_distribution<long> d(opts.int_lo, opts.int_hi);
    return arg_int(d(rng));
  }
  case DType::Kind::Bool: {
    std::uniform_int_distribution<int> d(0, 1);
    return arg_bool(d(rng) == 1);
  }
  case DType::Kind::Str: {
    static const char *pool[] = {"", "a", "b", "ab", "hello", "x y"};
    std::uniform_int_distribution<size_t> d(0, std::size(pool) - 1);
    return arg_str(pool[d(rng)]);
  }
  case DType::Kind::Arr: {
    std::uniform_int_distribution<size_t> d(0, opts.arr_len_max);
    size_t n = d(rng);
    std::vector<ArgVal> elems;
    for (size_t i = 0; i < n; ++i)
      elems.push_back(generate_arg(rng, ty.element(), opts));
    return arg_array(ty.element(), std::move(elems));
  }
  }
  return arg_int(0);
}

namespace simrel_detail {

/// Materialize into the source heap, returning the source value.
inline Value materialize_src(Heap &heap, const ArgVal &a, const DType &ty) {
  if (const auto *i = std::get_if<BigInt>(&a.v))
    return val_int(*i);
  if (const auto *b = std::get_if<bool>(&a.v))
    return val_bool(*b);
  if (const auto *s = std::get_if<std::string>(&a.v))
    return val_str(*s);
  const auto &arr = std::get<ArgVal::ArrayArg>(a.v);
  std::vector<Value> elems;
  for (const auto &e : arr.elems)
    elems.push_back(materialize_src(heap, e, arr.elem_ty));
  uint64_t loc = heap.size();
  heap.push_back(HeapValue{std::move(elems), arr.elem_ty});
  return val_arr(arr.elems.size(), loc, arr.elem_ty);
}

/// Materialize into the target store, returning the target value and
/// recording fresh array locations in the map alongside `src_loc_of`, the
/// source location the same traversal produced.
inline TVal materialize_tgt(TStore &store, const ArgVal &a) {
  if (const auto *i = std::get_if<BigInt>(&a.v))
    return tv_int(*i);
  if (const auto *b = std::get_if<bool>(&a.v))
    return tv_bool(*b);
  if (const auto *s = std::get_if<std::string>(&a.v))
    return tv_str(*s);
  const auto &arr = std::get<ArgVal::ArrayArg>(a.v);
  std::vector<TVal> elems;
  for (const auto &e : arr.elems)
    elems.push_back(materialize_tgt(store, e));
  size_t idx = store.cells.size();
  store.cells.push_back(ArrCell{std::move(elems)});
  return TVal{VTupleV{{tv_int((long)arr.elems.size()), tv_loc(idx)}}};
}

/// Record the correspondence the twin materializations induce.
inline void record_locs_deep(LocMap &m, const Heap &heap, const Value &dv,
                             const TStore &store, const TVal &tv) {
  const auto *a = std::get_if<ArrV>(&dv.v);
  if (!a)
    return;
  const auto &tt = std::get<VTupleV>(tv.v);
  size_t tloc = std::get<VLocV>(tt.vs[1].v).loc;
  m[a->loc] = tloc;
  const auto &hv = heap[a->loc];
  const auto &cell = std::get<ArrCell>(store.cells[tloc]);
  for (size_t i = 0; i < hv.elems.size() && i < cell.vs.size(); ++i)
    record_locs_deep(m, heap, hv.elems[i], store, cell.vs[i]);
}

} // namespace simrel_detail

//===----------------------------------------------------------------------===//
// Running one method in a frame (source side)
//===----------------------------------------------------------------------===//

struct FrameRun {
  State st;                    // final state (heap, snapshots intact)
  StmtResult result;           // Ret on normal completion
  std::vector<std::optional<Value>> outs; // one per out-parameter
};

/// Run a method body directly in its own frame. `st` supplies the heap and
/// the clock; locals and the entry snapshots are set up here. The body must
/// come from a normalized program (it ends in Return).
inline FrameRun run_method_frame(const Program &p, const Method &m,
                                 const std::vector<Value> &args, State st) {
  st.locals.clear();
  for (size_t i = 0; i < m.ins.size(); ++i)
    st.locals.emplace_back(m.ins[i].first, args[i]);
  for (const auto &[n, ty] : m.outs)
    st.locals.emplace_back(n, std::nullopt);
  st.locals_old = st.locals;
  st.heap_old = st.heap;
  Env env{&p};
  StmtResult r = evaluate_stmt(st, env, *m.body);
  FrameRun out;
  out.result = r;
  for (const auto &[n, ty] : m.outs) {
    const auto *v = locals_find(st.locals, n);
    out.outs.push_back(v ? *v : std::nullopt);
  }
  out.st = std::move(st);
  return out;
}

/// Evaluate the method's requires clauses in an entry frame over the given
/// heap. Returns false when any clause fails to evaluate to true (including
/// clauses the plain evaluator cannot handle, such as quantifiers).
inline bool requires_hold(const Program &p, const Method &m,
                          const std::vector<Value> &args, const Heap &heap) {
  State st;
  st.clock = 1u << 20;
  st.heap = heap;
  for (size_t i = 0; i < m.ins.size(); ++i)
    st.locals.emplace_back(m.ins[i].first, args[i]);
  st.locals_old = st.locals;
  st.heap_old = st.heap;
  Env env{&p};
  for (const auto &r : m.requires_) {
    auto res = evaluate_exp(st, env, *r);
    if (!res.is_val())
      return false;
    const auto *b = std::get_if<BoolV>(&res.val().v);
    if (!b || !b->b)
      return false;
  }
  return true;
}

//===----------------------------------------------------------------------===//
// One differential trial
//===----------------------------------------------------------------------===//

enum class Verdict { Match, SourceFail, SourceTimeout, Mismatch };

struct TrialResult {
  Verdict verdict = Verdict::Match;
  std::string detail; // set for Mismatch
};

namespace simrel_detail {

inline const char *tres_name(TResKind k) {
  switch (k) {
  case TResKind::Val:
    return "value";
  case TResKind::Raise:
    return "uncaught exception";
  case TResKind::Timeout:
    return "timeout";
  case TResKind::Crash:
    return "crash";
  }
  return "?";
}

struct TargetRun {
  TRes res;
  TStore store;
  bool setup_ok = true;
  std::string setup_err;
};

inline TargetRun run_target(const std::vector<TDec> &decs,
                            const std::string &method,
                            const std::vector<ArgVal> &args, uint64_t fuel,
                            const TEvalOpts &opts) {
  TargetRun tr;
  tr.store.clock = fuel;
  auto [env, dres] = t_evaluate_decs(tr.store, nullptr, decs, opts);
  if (dres.kind != TResKind::Val) {
    tr.setup_ok = false;
    tr.setup_err = std::string("declaration evaluation produced a ") +
                   tres_name(dres.kind);
    return tr;
  }
  if (!env_lookup(env, "dfy_" + method)) {
    tr.setup_ok = false;
    tr.setup_err = "compiled method dfy_" + method + " not found";
    return tr;
  }
  // Inject the argument values through the environment and build the
  // application spine; outermost application carries the first argument so
  // right-to-left evaluation visits arguments in source order.
  std::vector<TVal> tvals;
  for (const auto &a : args)
    tvals.push_back(materialize_tgt(tr.store, a));
  TEnv callenv = env;
  std::vector<std::string> names;
  for (size_t i = 0; i < args.size(); ++i) {
    names.push_back("$arg" + std::to_string(i));
    callenv = env_cons(names.back(), tvals[i], callenv);
  }
  TExpPtr spine = t_var("dfy_" + method);
  if (args.empty())
    spine = t_app(spine, t_unit());
  else
    for (size_t i = args.size(); i-- > 0;)
      spine = t_app(spine, t_var(names[i]));
  tr.res = t_evaluate(tr.store, callenv, spine, opts);
  return tr;
}

} // namespace simrel_detail

/// Run `method` on `args` under both semantics and relate the results.
/// The program should be normalized; the same arguments are materialized
/// into both heaps.
inline TrialResult difftest_method(const Program &p, const Method &m,
                                   const std::vector<ArgVal> &args,
                                   uint64_t fuel,
                                   Mutation mut = Mutation::None) {
  TrialResult out;

  // --- source side ---
  State st;
  st.clock = fuel;
  std::vector<Value> srcvals;
  for (size_t i = 0; i < args.size(); ++i)
    srcvals.push_back(
        simrel_detail::materialize_src(st.heap, args[i], m.ins[i].second));
  size_t src_base = st.heap.size();
  FrameRun src = run_method_frame(p, m, srcvals, std::move(st));

  // --- target side ---
  auto compiled = compile(p, mut, /*with_main_entry=*/false);
  if (!compiled.ok()) {
    out.verdict = Verdict::Mismatch;
    out.detail = "compilation failed: " + compiled.error();
    return out;
  }
  TEvalOpts opts;
  opts.tick_clock = (mut != Mutation::NoClockDecrement);
  uint64_t tgt_fuel = std::max<uint64_t>(1ull << 20, fuel * 64);
  if (src.result == StmtResult::Timeout)
    tgt_fuel = fuel; // divergence agreement: same budget, no value allowed

  simrel_detail::TargetRun tgt = simrel_detail::run_target(
      compiled.value(), m.name, args, tgt_fuel, opts);
  if (!tgt.setup_ok) {
    out.verdict = Verdict::Mismatch;
    out.detail = tgt.setup_err;
    return out;
  }

  if (src.result == StmtResult::Fail) {
    out.verdict = Verdict::SourceFail;
    return out;
  }
  if (src.result == StmtResult::Timeout) {
    if (tgt.res.kind == TResKind::Val) {
      out.verdict = Verdict::Mismatch;
      out.detail = "source ran out of fuel but the compiled code finished";
    } else {
      out.verdict = Verdict::SourceTimeout;
    }
    return out;
  }
  if (src.result != StmtResult::Ret) {
    out.verdict = Verdict::SourceFail;
    return out;
  }
  if (tgt.res.kind != TResKind::Val) {
    out.verdict = Verdict::Mismatch;
    out.detail = std::string("source finished but the compiled code ") +
                 "produced a " + simrel_detail::tres_name(tgt.res.kind);
    return out;
  }

  // --- relate results ---
  // Arguments were materialized in the same order on both sides; extend the
  // map with arrays both sides allocated during the run, again in order.
  LocMap m_rel;
  {
    // Recover the argument pairing by re-materializing into scratch stores;
    // allocation order is deterministic.
    Heap scratch_heap;
    TStore scratch_store;
    for (size_t i = 0; i < args.size(); ++i) {
      Value dv = simrel_detail::materialize_src(scratch_heap, args[i],
                                                m.ins[i].second);
      TVal tv = simrel_detail::materialize_tgt(scratch_store, args[i]);
      simrel_detail::record_locs_deep(m_rel, scratch_heap, dv, scratch_store,
                                      tv);
    }
  }
  size_t tgt_base = 0;
  for (const auto &[dloc, tloc] : m_rel)
    tgt_base = std::max(tgt_base, tloc + 1);
  // Pair post-entry allocations in order.
  std::vector<size_t> new_tgt_arrays;
  for (size_t i = tgt_base; i < tgt.store.cells.size(); ++i)
    if (std::holds_alternative<ArrCell>(tgt.store.cells[i]))
      new_tgt_arrays.push_back(i);
  size_t new_src = src.st.heap.size() - src_base;
  if (new_src != new_tgt_arrays.size()) {
    out.verdict = Verdict::Mismatch;
    out.detail = "the two runs allocated different numbers of arrays";
    return out;
  }
  for (size_t i = 0; i < new_src; ++i)
    m_rel[src_base + i] = new_tgt_arrays[i];

  // Out-parameters.
  std::vector<TVal> tgt_outs;
  if (m.outs.size() == 1) {
    tgt_outs.push_back(tgt.res.val);
  } else if (m.outs.size() >= 2) {
    const auto *tt = std::get_if<VTupleV>(&tgt.res.val.v);
    if (!tt || tt->vs.size() != m.outs.size()) {
      out.verdict = Verdict::Mismatch;
      out.detail = "compiled code did not return one value per out-parameter";
      return out;
    }
    tgt_outs = tt->vs;
  }
  for (size_t i = 0; i < m.outs.size(); ++i) {
    if (!src.outs[i]) {
      out.verdict = Verdict::SourceFail; // uninitialized out on a Ret path
      return out;
    }
    if (!val_rel(m_rel, *src.outs[i], tgt_outs[i])) {
      out.verdict = Verdict::Mismatch;
      out.detail = "out-parameter '" + m.outs[i].first + "' differs";
      return out;
    }
  }
  if (!array_rel(m_rel, src.st.heap, tgt.store)) {
    out.verdict = Verdict::Mismatch;
    out.detail = "final heaps differ";
    return out;
  }
  out.verdict = Verdict::Match;
  return out;
}

//===----------------------------------------------------------------------===//
// Corpus driver
//===----------------------------------------------------------------------===//

struct MethodReport {
  std::string method;
  size_t trials = 0;
  size_t matches = 0;
  size_t source_fails = 0;
  size_t source_timeouts = 0;
  size_t skipped = 0; // no precondition-satisfying input found
  std::vector<std::string> mismatches;
};

struct DiffReport {
  std::vector<MethodReport> methods;
  bool any_mismatch() const {
    for (const auto &m : methods)
      if (!m.mismatches.empty())
        return true;
    return false;
  }
};

/// Differentially test every method of the program. Deterministic in `seed`.
inline DiffReport difftest_program(const Program &raw, uint64_t fuel,
                                   size_t trials, uint64_t seed,
                                   Mutation mut = Mutation::None) {
  Program p = normalize(raw);
  DiffReport report;
  for (const auto &mem : p.members) {
    const auto *m = std::get_if<Method>(&mem);
    if (!m)
      continue;
    MethodReport mr;
    mr.method = m->name;
    std::seed_seq sseq{seed, (uint64_t)std::hash<std::string>{}(m->name)};
    std::mt19937_64 rng(sseq);
    for (size_t t = 0; t < trials; ++t) {
      // Find an input satisfying the requires clauses.
      std::vector<ArgVal> args;
      bool found = false;
      for (int attempt = 0; attempt < 200 && !found; ++attempt) {
        args.clear();
        for (const auto &[n, ty] : m->ins)
          args.push_back(generate_arg(rng, ty));
        Heap h;
        std::vector<Value> vals;
        for (size_t i = 0; i < args.size(); ++i)
          vals.push_back(
              simrel_detail::materialize_src(h, args[i], m->ins[i].second));
        found = requires_hold(p, *m, vals, h);
      }
      if (!found) {
        ++mr.skipped;
        continue;
      }
      ++mr.trials;
      TrialResult r = difftest_method(p, *m, args, fuel, mut);
      switch (r.verdict) {
      case Verdict::Match:
        ++mr.matches;
        break;
      case Verdict::SourceFail:
        ++mr.source_fails;
        break;
      case Verdict::SourceTimeout:
        ++mr.source_timeouts;
        break;
      case Verdict::Mismatch:
        mr.mismatches.push_back("trial " + std::to_string(t) + ": " +
                                r.detail);
        break;
      }
    }
    report.methods.push_back(std::move(mr));
  }
  return report;
}

inline nlohmann::json report_to_json(const DiffReport &r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto &m : r.methods) {
    j.push_back({{"method", m.method},
                 {"trials", m.trials},
                 {"matches", m.matches},
                 {"source_fails", m.source_fails},
                 {"source_timeouts", m.source_timeouts},
                 {"skipped", m.skipped},
                 {"mismatches", m.mismatches}});
  }
  return j;
}

inline std::string format_report(const DiffReport &r) {
  std::string out;
  for (const auto &m : r.methods) {
    out += m.method + ": " + std::to_string(m.matches) + " match, " +
           std::to_string(m.source_fails) + " source-fail, " +
           std::to_string(m.source_timeouts) + " source-timeout, " +
           std::to_string(m.skipped) + " skipped, " +
           std::to_string(m.mismatches.size()) + " MISMATCH\n";
    for (const auto &d : m.mismatches)
      out += "  " + d + "\n";
  }
  return out;
}

} // namespace dfy
