// SPDX-License-Identifier: Apache-2.0
#include "pcat/semantics.hpp"

#include <sstream>

namespace pcat {

void Structure::validate() const {
  if (!host) throw SemanticsError("structure has no host");
  const Category& C = host->base();
  for (const auto& s : sg.sorts)
    if (!sorts.count(s)) throw SemanticsError("sort " + s + " is not interpreted");
  for (const auto& [s, o] : sorts)
    if (o < 0 || o >= C.object_count()) throw SemanticsError("sort " + s + " maps outside the base");
  for (const auto& [f, d] : sg.functions) {
    auto it = fns.find(f);
    if (it == fns.end()) throw SemanticsError("function " + f + " is not interpreted");
    std::vector<ObjId> args;
    for (const auto& a : d.args) args.push_back(sort_object(*this, a));
    auto dom = product_of(C, args);
    if (!dom) throw SemanticsError("no designated product for the arguments of " + f);
    if (C.dom(it->second) != *dom || C.cod(it->second) != sort_object(*this, d.result))
      throw SemanticsError("function " + f + " has the wrong domain or codomain: " + C.morphism_name(it->second));
  }
  for (const auto& [r, d] : sg.relations) {
    auto it = rels.find(r);
    if (it == rels.end()) throw SemanticsError("relation " + r + " is not interpreted");
    std::vector<ObjId> args;
    for (const auto& a : d.args) args.push_back(sort_object(*this, a));
    auto dom = product_of(C, args);
    if (!dom) throw SemanticsError("no designated product for the arguments of " + r);
    if (!host->contains(*dom, it->second)) throw SemanticsError("relation " + r + " is not in the fiber");
  }
}

ObjId sort_object(const Structure& S, const std::string& sort) {
  auto it = S.sorts.find(sort);
  if (it == S.sorts.end()) throw SemanticsError("sort " + sort + " is not interpreted");
  return it->second;
}

std::vector<ObjId> context_factors(const Structure& S, const Context& ctx) {
  std::vector<ObjId> out;
  for (const auto& b : ctx) out.push_back(sort_object(S, b.sort));
  return out;
}

ObjId context_object(const Structure& S, const Context& ctx) {
  auto o = product_of(S.host->base(), context_factors(S, ctx));
  if (!o) throw SemanticsError("context " + show(ctx) + " exceeds the designated products of the host");
  return *o;
}

namespace {

MorId term_in(const Structure& S, const Term& t, const Context& ctx, const std::vector<ObjId>& factors, ObjId dom) {
  const Category& C = S.host->base();
  if (t.is_var) {
    for (size_t i = ctx.size(); i-- > 0;)
      if (ctx[i].var == t.name) return projection(C, factors, i);
    throw SemanticsError("variable " + t.name + " not in context");
  }
  auto fit = S.fns.find(t.name);
  if (fit == S.fns.end()) throw SemanticsError("function " + t.name + " is not interpreted");
  const FnDecl& d = S.sg.functions.at(t.name);
  std::vector<ObjId> argobjs;
  std::vector<MorId> comps;
  for (size_t i = 0; i < t.args.size(); ++i) {
    argobjs.push_back(sort_object(S, d.args[i]));
    comps.push_back(term_in(S, t.args[i], ctx, factors, dom));
  }
  return C.compose(fit->second, tuple(C, dom, argobjs, comps));
}

Elem formula_in(const Structure& S, const Formula& f, const Context& ctx) {
  const Category& C = S.host->base();
  const PropCategory& P = *S.host;
  auto factors = context_factors(S, ctx);
  auto dom = product_of(C, factors);
  if (!dom) throw SemanticsError("context " + show(ctx) + " exceeds the designated products of the host");
  switch (f.kind) {
    case FKind::Rel: {
      auto rit = S.rels.find(f.sym);
      if (rit == S.rels.end()) throw SemanticsError("relation " + f.sym + " is not interpreted");
      const RelDecl& d = S.sg.relations.at(f.sym);
      std::vector<ObjId> argobjs;
      std::vector<MorId> comps;
      for (size_t i = 0; i < f.terms.size(); ++i) {
        argobjs.push_back(sort_object(S, d.args[i]));
        comps.push_back(term_in(S, f.terms[i], ctx, factors, *dom));
      }
      return P.pull(tuple(C, *dom, argobjs, comps), rit->second);
    }
    case FKind::Eq: {
      MorId m = term_in(S, f.terms[0], ctx, factors, *dom);
      MorId n = term_in(S, f.terms[1], ctx, factors, *dom);
      ObjId s = sort_object(S, f.sym);
      C.product_or_throw(s, s);
      return P.pull(C.pair(m, n), P.eq(s));
    }
    case FKind::Conn: {
      std::vector<Elem> xs;
      for (const auto& g : f.subs) xs.push_back(formula_in(S, g, ctx));
      return P.op(*dom, f.sym, xs);
    }
    case FKind::Quant: {
      Context inner;
      for (const auto& b : ctx)
        if (b.var != f.bound.var) inner.push_back(b);
      inner.push_back(f.bound);
      Elem body = formula_in(S, f.subs[0], inner);
      ObjId s = sort_object(S, f.bound.sort);
      ProductData gs = C.product_or_throw(*dom, s);
      // change of product: [[Gamma]] x [[sigma]] -> [[inner]]
      std::vector<MorId> comps;
      std::vector<ObjId> innerobjs = context_factors(S, inner);
      for (size_t k = 0; k + 1 < inner.size(); ++k) {
        size_t i = 0;
        while (ctx[i].var != inner[k].var) ++i;
        comps.push_back(C.compose(projection(C, factors, i), gs.p1));
      }
      comps.push_back(gs.p2);
      MorId a = tuple(C, gs.obj, innerobjs, comps);
      return P.quant(f.sym, *dom, s, P.pull(a, body));
    }
  }
  throw SemanticsError("unknown formula kind");
}

}  // namespace

MorId interpret_term(const Structure& S, const Term& t, const Context& ctx) {
  wf_term(S.sg, ctx, t);
  auto factors = context_factors(S, ctx);
  return term_in(S, t, ctx, factors, context_object(S, ctx));
}

Elem interpret_formula(const Structure& S, const Formula& f, const Context& ctx) {
  wf_formula(S.sg, S.host->language(), ctx, f);
  return formula_in(S, f, ctx);
}

std::string SatisfactionReport::show() const {
  std::ostringstream os;
  os << (verdict ? "holds" : "fails") << ": " << pcat::show(assertion) << "\n  over " << fiber << "\n  left  " << left
     << "\n  right " << right;
  return os.str();
}

SatisfactionReport satisfies(const Structure& S, const Assertion& a) {
  wf_assertion(S.sg, S.host->language(), a);
  SatisfactionReport r;
  r.assertion = a;
  const Category& C = S.host->base();
  const Context& ctx = context_of(a);
  ObjId g = context_object(S, ctx);
  r.fiber = C.object_name(g);
  if (const auto* e = std::get_if<Equation>(&a)) {
    MorId m = interpret_term(S, e->lhs, ctx), n = interpret_term(S, e->rhs, ctx);
    r.verdict = m == n;
    r.left = C.morphism_name(m);
    r.right = C.morphism_name(n);
  } else {
    const auto& s = std::get<Sequent>(a);
    std::vector<Elem> hs;
    for (const auto& h : s.hyps) hs.push_back(formula_in(S, h, ctx));
    Elem l = S.host->tensor_all(g, hs);
    Elem c = formula_in(S, s.concl, ctx);
    r.verdict = S.host->leq(g, l, c);
    r.left = S.host->format(g, l);
    r.right = S.host->format(g, c);
  }
  return r;
}

bool holds(const Structure& S, const Assertion& a) { return satisfies(S, a).verdict; }

// ------------------------------------------------------------ budgets

Budget Budget::parse(const std::string& spec) {
  Budget b;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("budget entry without '=': " + item);
    std::string k = item.substr(0, eq);
    std::int64_t v = std::stoll(item.substr(eq + 1));
    if (v < 0) throw std::invalid_argument("negative budget entry " + k);
    if (k == "ctx") b.ctx = static_cast<int>(v);
    else if (k == "term") b.term = static_cast<int>(v);
    else if (k == "fml") b.fml = static_cast<int>(v);
    else if (k == "ante") b.ante = static_cast<int>(v);
    else if (k == "limit") b.limit = v;
    else if (k == "formulas") b.formulas_per_context = v;
    else if (k == "terms") b.terms_per_sort = v;
    else throw std::invalid_argument("unknown budget entry " + k);
  }
  return b;
}

std::string Budget::show() const {
  return "ctx=" + std::to_string(ctx) + ",term=" + std::to_string(term) + ",fml=" + std::to_string(fml) +
         ",ante=" + std::to_string(ante) + ",limit=" + std::to_string(limit) +
         ",formulas=" + std::to_string(formulas_per_context) + ",terms=" + std::to_string(terms_per_sort);
}

namespace {

struct Enumerator {
  const Signature& sg;
  const Language& lang;
  const Budget& b;
  bool truncated = false;

  // terms of each sort by exact depth, capped per sort
  std::map<std::string, std::vector<Term>> terms(const Context& ctx) {
    std::map<std::string, std::vector<Term>> out;
    std::map<std::string, std::vector<std::vector<Term>>> by_depth;
    for (const auto& s : sg.sorts) by_depth[s].resize(static_cast<size_t>(b.term) + 1);
    for (const auto& v : ctx) by_depth[v.sort][0].push_back(Term::var(v.var));
    auto count = [&](const std::string& s) {
      size_t n = 0;
      for (const auto& l : by_depth[s]) n += l.size();
      return static_cast<std::int64_t>(n);
    };
    for (int d = 1; d <= b.term; ++d) {
      for (const auto& [f, decl] : sg.functions) {
        // argument tuples with all depths < d and at least one of depth d-1
        size_t n = decl.args.size();
        if (n == 0) {
          if (d == 1 && count(decl.result) < b.terms_per_sort) by_depth[decl.result][1].push_back(Term::app(f));
          continue;
        }
        std::vector<std::vector<Term>> pools(n);
        for (size_t i = 0; i < n; ++i)
          for (int k = 0; k < d; ++k)
            for (const auto& t : by_depth[decl.args[i]][k]) pools[i].push_back(t);
        std::vector<size_t> idx(n, 0);
        bool empty = false;
        for (const auto& p : pools) empty = empty || p.empty();
        if (empty) continue;
        while (true) {
          std::vector<Term> args;
          int maxd = -1;
          for (size_t i = 0; i < n; ++i) {
            args.push_back(pools[i][idx[i]]);
            maxd = std::max(maxd, term_depth(args.back()));
          }
          if (maxd == d - 1) {
            if (count(decl.result) >= b.terms_per_sort) {
              truncated = true;
              break;
            }
            by_depth[decl.result][d].push_back(Term::app(f, args));
          }
          size_t k = n;
          while (k-- > 0) {
            if (++idx[k] < pools[k].size()) break;
            idx[k] = 0;
          }
          if (k == static_cast<size_t>(-1)) break;
        }
      }
    }
    for (auto& [s, ls] : by_depth)
      for (auto& l : ls)
        for (auto& t : l) out[s].push_back(std::move(t));
    return out;
  }

  std::vector<Formula> formulas(const Context& ctx, int depth) {
    auto ts = terms(ctx);
    std::vector<std::vector<Formula>> by_depth(static_cast<size_t>(depth) + 1);
    std::int64_t total = 0;
    auto push = [&](int d, Formula f) {
      if (total >= b.formulas_per_context) {
        truncated = true;
        return false;
      }
      by_depth[d].push_back(std::move(f));
      ++total;
      return true;
    };
    // atoms
    for (const auto& [name, ar] : lang.connectives)
      if (ar == 0) push(0, Formula::conn(name));
    for (const auto& [r, decl] : sg.relations) {
      size_t n = decl.args.size();
      std::vector<size_t> idx(n, 0);
      bool empty = false;
      for (const auto& s : decl.args) empty = empty || ts[s].empty();
      if (empty) continue;
      while (true) {
        std::vector<Term> args;
        for (size_t i = 0; i < n; ++i) args.push_back(ts[decl.args[i]][idx[i]]);
        if (!push(0, Formula::rel(r, args))) break;
        size_t k = n;
        while (k-- > 0) {
          if (++idx[k] < ts[decl.args[k]].size()) break;
          idx[k] = 0;
        }
        if (k == static_cast<size_t>(-1)) break;
      }
    }
    for (const auto& s : sg.sorts)
      for (const auto& m : ts[s])
        for (const auto& n : ts[s]) push(0, Formula::eq(s, m, n));
    for (int d = 1; d <= depth; ++d) {
      std::vector<Formula> lower;
      for (int k = 0; k < d; ++k)
        for (const auto& f : by_depth[k]) lower.push_back(f);
      for (const auto& [name, ar] : lang.connectives) {
        if (ar == 0 || lower.empty()) continue;
        std::vector<size_t> idx(static_cast<size_t>(ar), 0);
        while (true) {
          std::vector<Formula> xs;
          int maxd = -1;
          for (int i = 0; i < ar; ++i) {
            xs.push_back(lower[idx[i]]);
            maxd = std::max(maxd, formula_depth(xs.back()));
          }
          if (maxd == d - 1 && !push(d, Formula::conn(name, xs))) break;
          size_t k = static_cast<size_t>(ar);
          while (k-- > 0) {
            if (++idx[k] < lower.size()) break;
            idx[k] = 0;
          }
          if (k == static_cast<size_t>(-1)) break;
        }
      }
      std::string x = "x" + std::to_string(ctx.size() + 1);
      for (const auto& q : lang.quantifiers)
        for (const auto& s : sg.sorts) {
          Context inner = ctx;
          inner.push_back({x, s});
          for (const auto& body : formulas(inner, d - 1))
            if (formula_depth(body) == d - 1 && !push(d, Formula::quant(q, {x, s}, body))) break;
        }
    }
    std::vector<Formula> out;
    for (auto& l : by_depth)
      for (auto& f : l) out.push_back(std::move(f));
    return out;
  }
};

void contexts(const Signature& sg, int maxlen, Context& cur, std::vector<Context>& out) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == maxlen) return;
  for (const auto& s : sg.sorts) {
    cur.push_back({"x" + std::to_string(cur.size() + 1), s});
    contexts(sg, maxlen, cur, out);
    cur.pop_back();
  }
}

}  // namespace

Assertion AssertionSpace::assertion(size_t i) const {
  const Item& it = items.at(i);
  const ContextBlock& bl = blocks[it.block];
  if (it.equation) return Equation{bl.ctx, bl.terms[it.a], bl.terms[it.b], bl.term_sorts[it.a]};
  Sequent s;
  s.ctx = bl.ctx;
  for (auto h : it.hyps) s.hyps.push_back(bl.formulas[h]);
  s.concl = bl.formulas[it.b];
  return s;
}

AssertionSpace enumerate_assertions(const Signature& sg, const Language& lang, const Budget& b) {
  AssertionSpace sp;
  Enumerator en{sg, lang, b};
  std::vector<Context> ctxs;
  Context cur;
  contexts(sg, b.ctx, cur, ctxs);
  std::stable_sort(ctxs.begin(), ctxs.end(), [](const Context& x, const Context& y) { return x.size() < y.size(); });
  auto full = [&] {
    if (static_cast<std::int64_t>(sp.items.size()) >= b.limit) {
      sp.truncated = true;
      return true;
    }
    return false;
  };
  for (const auto& ctx : ctxs) {
    if (full()) break;
    ContextBlock bl;
    bl.ctx = ctx;
    for (auto& [s, ts] : en.terms(ctx))
      for (auto& t : ts) {
        bl.terms.push_back(t);
        bl.term_sorts.push_back(s);
      }
    bl.formulas = en.formulas(ctx, b.fml);
    auto blk = static_cast<std::uint32_t>(sp.blocks.size());
    sp.blocks.push_back(bl);
    const auto& B = sp.blocks.back();
    for (std::uint32_t i = 0; i < B.terms.size() && !full(); ++i)
      for (std::uint32_t j = 0; j < B.terms.size() && !full(); ++j)
        if (B.term_sorts[i] == B.term_sorts[j]) sp.items.push_back({blk, true, i, j, {}});
    auto nf = static_cast<std::uint32_t>(B.formulas.size());
    for (int n = 0; n <= b.ante && !full(); ++n) {
      std::vector<std::uint32_t> hyps(static_cast<size_t>(n), 0);
      while (!full()) {
        for (std::uint32_t c = 0; c < nf && !full(); ++c) sp.items.push_back({blk, false, 0, c, hyps});
        size_t k = hyps.size();
        while (k-- > 0) {
          if (++hyps[k] < nf) break;
          hyps[k] = 0;
        }
        if (k == static_cast<size_t>(-1) || nf == 0) break;
      }
    }
  }
  sp.truncated = sp.truncated || en.truncated;
  return sp;
}

SatVector satisfaction_vector(const Structure& S, const AssertionSpace& space) {
  SatVector out;
  out.sat.assign(space.size(), 0);
  out.defined.assign(space.size(), 0);
  size_t item = 0;
  for (std::uint32_t blk = 0; blk < space.blocks.size(); ++blk) {
    const auto& B = space.blocks[blk];
    size_t first = item;
    while (item < space.size() && space.items[item].block == blk) ++item;
    std::optional<ObjId> g;
    try {
      g = context_object(S, B.ctx);
    } catch (const SemanticsError&) {
      continue;
    }
    auto factors = context_factors(S, B.ctx);
    std::vector<std::optional<MorId>> tv(B.terms.size());
    for (size_t i = 0; i < B.terms.size(); ++i) {
      try {
        tv[i] = term_in(S, B.terms[i], B.ctx, factors, *g);
      } catch (const std::exception&) {
      }
    }
    std::vector<std::optional<Elem>> fv(B.formulas.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < B.formulas.size(); ++i) {
      try {
        fv[i] = formula_in(S, B.formulas[i], B.ctx);
      } catch (const std::exception&) {
      }
    }
    for (size_t i = first; i < item; ++i) {
      const auto& it = space.items[i];
      if (it.equation) {
        if (!tv[it.a] || !tv[it.b]) continue;
        out.defined[i] = 1;
        out.sat[i] = *tv[it.a] == *tv[it.b];
        continue;
      }
      bool ok = fv[it.b].has_value();
      std::vector<Elem> hs;
      for (auto h : it.hyps) {
        ok = ok && fv[h].has_value();
        if (ok) hs.push_back(*fv[h]);
      }
      if (!ok) continue;
      out.defined[i] = 1;
      out.sat[i] = S.host->leq(*g, S.host->tensor_all(*g, hs), *fv[it.b]);
    }
  }
  return out;
}

TheoryResult theory_of(const Structure& S, const Language& lang, const Budget& b) {
  AssertionSpace sp = enumerate_assertions(S.sg, lang, b);
  SatVector v = satisfaction_vector(S, sp);
  TheoryResult r;
  r.truncated = sp.truncated;
  r.considered = static_cast<std::int64_t>(sp.size());
  for (size_t i = 0; i < sp.size(); ++i) {
    if (!v.defined[i]) {
      ++r.skipped;
      continue;
    }
    if (v.sat[i]) r.assertions.push_back(sp.assertion(i));
  }
  return r;
}

TheoryResult theory_of(const Structure& S, const Budget& b) { return theory_of(S, S.host->language(), b); }

}  // namespace pcat
