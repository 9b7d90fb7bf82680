// SPDX-License-Identifier: Apache-2.0
#include "pcat/syntax.hpp"

#include <algorithm>
#include <optional>

namespace pcat {

bool Signature::has_sort(const std::string& s) const {
  return std::find(sorts.begin(), sorts.end(), s) != sorts.end();
}

void Signature::add_sort(const std::string& s) {
  if (has_sort(s)) throw SyntaxError("duplicate symbol", "sort " + s);
  sorts.push_back(s);
}

void Signature::validate() const {
  for (const auto& [f, d] : functions) {
    for (const auto& s : d.args)
      if (!has_sort(s)) throw SyntaxError("unknown symbol", "sort " + s + " in function " + f);
    if (!has_sort(d.result))
      throw SyntaxError("unknown symbol", "sort " + d.result + " in function " + f);
    if (relations.count(f)) throw SyntaxError("duplicate symbol", f);
  }
  for (const auto& [r, d] : relations)
    for (const auto& s : d.args)
      if (!has_sort(s)) throw SyntaxError("unknown symbol", "sort " + s + " in relation " + r);
}

Language::Language() {
  connectives[kUnit] = 0;
  connectives[kTensor] = 2;
}

Language Language::lattice() {
  Language l;
  l.connectives["top"] = 0;
  l.connectives["bot"] = 0;
  l.connectives["and"] = 2;
  l.connectives["or"] = 2;
  l.quantifiers = {kForall, kExists};
  return l;
}

bool Language::has_connective(const std::string& c, int arity) const {
  auto it = connectives.find(c);
  return it != connectives.end() && it->second == arity;
}

bool Language::contains(const Language& o) const {
  for (const auto& [c, n] : o.connectives)
    if (!has_connective(c, n)) return false;
  for (const auto& q : o.quantifiers)
    if (!quantifiers.count(q)) return false;
  return true;
}

Language Language::meet(const Language& o) const {
  Language r;
  r.connectives.clear();
  for (const auto& [c, n] : connectives)
    if (o.has_connective(c, n)) r.connectives[c] = n;
  for (const auto& q : quantifiers)
    if (o.quantifiers.count(q)) r.quantifiers.insert(q);
  return r;
}

const Binding* lookup(const Context& ctx, const std::string& var) {
  for (const auto& b : ctx)
    if (b.var == var) return &b;
  return nullptr;
}

void wf_context(const Signature& sg, const Context& ctx) {
  std::set<std::string> seen;
  for (const auto& b : ctx) {
    if (!sg.has_sort(b.sort)) throw SyntaxError("unknown symbol", "sort " + b.sort);
    if (!seen.insert(b.var).second) throw SyntaxError("bad context", "repeated variable " + b.var);
  }
}

Context concat(const Context& a, const Context& b) {
  Context r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

Formula Formula::rel(std::string r, std::vector<Term> ts) {
  Formula f;
  f.kind = FKind::Rel;
  f.sym = std::move(r);
  f.terms = std::move(ts);
  return f;
}

Formula Formula::eq(std::string sort, Term a, Term b) {
  Formula f;
  f.kind = FKind::Eq;
  f.sym = std::move(sort);
  f.terms = {std::move(a), std::move(b)};
  return f;
}

Formula Formula::conn(std::string c, std::vector<Formula> xs) {
  Formula f;
  f.kind = FKind::Conn;
  f.sym = std::move(c);
  f.subs = std::move(xs);
  return f;
}

Formula Formula::quant(std::string q, Binding b, Formula body) {
  Formula f;
  f.kind = FKind::Quant;
  f.sym = std::move(q);
  f.bound = std::move(b);
  f.subs = {std::move(body)};
  return f;
}

const Context& context_of(const Assertion& a) {
  return std::visit([](const auto& x) -> const Context& { return x.ctx; }, a);
}

namespace {

std::string type_term(const Signature& sg, const Context& ctx, const Term& t, std::vector<int>& path) {
  if (t.is_var) {
    const Binding* b = lookup(ctx, t.name);
    if (!b) throw SyntaxError("variable not in context", t.name, path);
    return b->sort;
  }
  auto it = sg.functions.find(t.name);
  if (it == sg.functions.end()) throw SyntaxError("unknown symbol", "function " + t.name, path);
  const FnDecl& d = it->second;
  if (d.args.size() != t.args.size())
    throw SyntaxError("arity mismatch",
                      t.name + " expects " + std::to_string(d.args.size()) + " arguments, got " +
                          std::to_string(t.args.size()),
                      path);
  for (size_t i = 0; i < t.args.size(); ++i) {
    path.push_back(static_cast<int>(i + 1));
    std::string s = type_term(sg, ctx, t.args[i], path);
    if (s != d.args[i])
      throw SyntaxError("sort mismatch",
                        show(t.args[i]) + " has sort " + s + ", " + t.name + " expects " + d.args[i],
                        path);
    path.pop_back();
  }
  return d.result;
}

void type_formula(const Signature& sg, const Language& lang, const Context& ctx, const Formula& f,
                  std::vector<int>& path) {
  switch (f.kind) {
    case FKind::Rel: {
      auto it = sg.relations.find(f.sym);
      if (it == sg.relations.end()) throw SyntaxError("unknown symbol", "relation " + f.sym, path);
      if (it->second.args.size() != f.terms.size())
        throw SyntaxError("arity mismatch", "relation " + f.sym, path);
      for (size_t i = 0; i < f.terms.size(); ++i) {
        path.push_back(static_cast<int>(i + 1));
        std::string s = type_term(sg, ctx, f.terms[i], path);
        if (s != it->second.args[i])
          throw SyntaxError("sort mismatch",
                            show(f.terms[i]) + " has sort " + s + ", " + f.sym + " expects " +
                                it->second.args[i],
                            path);
        path.pop_back();
      }
      return;
    }
    case FKind::Eq: {
      if (!sg.has_sort(f.sym)) throw SyntaxError("unknown symbol", "sort " + f.sym, path);
      if (f.terms.size() != 2) throw SyntaxError("arity mismatch", "equality takes two terms", path);
      for (size_t i = 0; i < 2; ++i) {
        path.push_back(static_cast<int>(i + 1));
        std::string s = type_term(sg, ctx, f.terms[i], path);
        if (s != f.sym)
          throw SyntaxError("sort mismatch",
                            show(f.terms[i]) + " has sort " + s + ", equality at " + f.sym, path);
        path.pop_back();
      }
      return;
    }
    case FKind::Conn: {
      auto it = lang.connectives.find(f.sym);
      if (it == lang.connectives.end()) throw SyntaxError("unknown connective", f.sym, path);
      if (static_cast<size_t>(it->second) != f.subs.size())
        throw SyntaxError("arity mismatch",
                          f.sym + " has arity " + std::to_string(it->second) + ", applied to " +
                              std::to_string(f.subs.size()),
                          path);
      for (size_t i = 0; i < f.subs.size(); ++i) {
        path.push_back(static_cast<int>(i + 1));
        type_formula(sg, lang, ctx, f.subs[i], path);
        path.pop_back();
      }
      return;
    }
    case FKind::Quant: {
      if (!lang.quantifiers.count(f.sym)) throw SyntaxError("unknown quantifier", f.sym, path);
      if (!sg.has_sort(f.bound.sort)) throw SyntaxError("unknown symbol", "sort " + f.bound.sort, path);
      if (f.subs.size() != 1) throw SyntaxError("arity mismatch", "quantifier body", path);
      // the formation rule extends the context; a rebound name shadows the outer one
      Context inner;
      for (const auto& b : ctx)
        if (b.var != f.bound.var) inner.push_back(b);
      inner.push_back(f.bound);
      path.push_back(1);
      type_formula(sg, lang, inner, f.subs[0], path);
      path.pop_back();
      return;
    }
  }
}

}  // namespace

std::string wf_term(const Signature& sg, const Context& ctx, const Term& t) {
  std::vector<int> path;
  return type_term(sg, ctx, t, path);
}

void wf_formula(const Signature& sg, const Language& lang, const Context& ctx, const Formula& f) {
  std::vector<int> path;
  type_formula(sg, lang, ctx, f, path);
}

void wf_assertion(const Signature& sg, const Language& lang, const Assertion& a) {
  wf_context(sg, context_of(a));
  if (const auto* e = std::get_if<Equation>(&a)) {
    if (!sg.has_sort(e->sort)) throw SyntaxError("unknown symbol", "sort " + e->sort);
    std::string l = wf_term(sg, e->ctx, e->lhs);
    std::string r = wf_term(sg, e->ctx, e->rhs);
    if (l != e->sort || r != e->sort)
      throw SyntaxError("sort mismatch", "equation declared at " + e->sort + " relates " + l + " and " + r);
    return;
  }
  const auto& s = std::get<Sequent>(a);
  for (const auto& h : s.hyps) wf_formula(sg, lang, s.ctx, h);
  wf_formula(sg, lang, s.ctx, s.concl);
}

void validate(const Theory& t) {
  t.sg.validate();
  if (!t.lang.has_connective(kUnit, 0) || !t.lang.has_connective(kTensor, 2))
    throw SyntaxError("unknown connective", "language must contain e/0 and tensor/2");
  for (const auto& a : t.axioms) wf_assertion(t.sg, t.lang, a);
}

void collect_free_vars(const Term& t, std::set<std::string>& out) {
  if (t.is_var) {
    out.insert(t.name);
    return;
  }
  for (const auto& a : t.args) collect_free_vars(a, out);
}

void collect_free_vars(const Formula& f, std::set<std::string>& out) {
  for (const auto& t : f.terms) collect_free_vars(t, out);
  if (f.kind == FKind::Quant) {
    std::set<std::string> inner;
    collect_free_vars(f.subs[0], inner);
    inner.erase(f.bound.var);
    out.insert(inner.begin(), inner.end());
    return;
  }
  for (const auto& s : f.subs) collect_free_vars(s, out);
}

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  collect_free_vars(t, out);
  return out;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  collect_free_vars(f, out);
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string n = base + "'";
  while (avoid.count(n)) n += "'";
  return n;
}

Term substitute(const Term& t, const Subst& s) {
  if (t.is_var) {
    auto it = s.find(t.name);
    return it == s.end() ? t : it->second;
  }
  Term r = Term::app(t.name);
  r.args.reserve(t.args.size());
  for (const auto& a : t.args) r.args.push_back(substitute(a, s));
  return r;
}

Formula substitute(const Formula& f, const Subst& s) {
  if (s.empty()) return f;
  if (f.kind != FKind::Quant) {
    Formula r = f;
    for (auto& t : r.terms) t = substitute(t, s);
    for (auto& x : r.subs) x = substitute(x, s);
    return r;
  }
  const Formula& body = f.subs[0];
  std::set<std::string> fv = free_vars(body);
  Subst inner;
  for (const auto& [v, t] : s)
    if (v != f.bound.var && fv.count(v)) inner.emplace(v, t);
  if (inner.empty()) return f;
  std::set<std::string> reach;
  for (const auto& [v, t] : inner) collect_free_vars(t, reach);
  Binding b = f.bound;
  if (reach.count(b.var)) {
    std::set<std::string> avoid = reach;
    avoid.insert(fv.begin(), fv.end());
    for (const auto& [v, t] : inner) avoid.insert(v);
    std::string nv = fresh_name(b.var, avoid);
    inner.emplace(b.var, Term::var(nv));
    b.var = nv;
  }
  return Formula::quant(f.sym, b, substitute(body, inner));
}

void check_subst(const Signature& sg, const Context& from, const Context& to, const Subst& s) {
  for (const auto& [v, t] : s) {
    const Binding* b = lookup(from, v);
    if (!b) throw SyntaxError("variable not in context", v);
    std::string got = wf_term(sg, to, t);
    if (got != b->sort)
      throw SyntaxError("sort mismatch", v + ":" + b->sort + " replaced by " + show(t) + ":" + got);
  }
}

namespace {

Term canon_term(const Term& t, const std::map<std::string, std::string>& env) {
  if (t.is_var) {
    auto it = env.find(t.name);
    return it == env.end() ? t : Term::var(it->second);
  }
  Term r = Term::app(t.name);
  for (const auto& a : t.args) r.args.push_back(canon_term(a, env));
  return r;
}

Formula canon(const Formula& f, std::map<std::string, std::string>& env, int level) {
  if (f.kind == FKind::Quant) {
    std::string name = "#" + std::to_string(level);
    auto old = env.find(f.bound.var);
    std::optional<std::string> saved;
    if (old != env.end()) saved = old->second;
    env[f.bound.var] = name;
    Formula body = canon(f.subs[0], env, level + 1);
    if (saved)
      env[f.bound.var] = *saved;
    else
      env.erase(f.bound.var);
    return Formula::quant(f.sym, Binding{name, f.bound.sort}, std::move(body));
  }
  Formula r = f;
  for (auto& t : r.terms) t = canon_term(t, env);
  for (auto& x : r.subs) x = canon(x, env, level);
  return r;
}

}  // namespace

Formula canonical(const Formula& f) {
  std::map<std::string, std::string> env;
  return canon(f, env, 0);
}

bool alpha_eq(const Formula& a, const Formula& b) { return canonical(a) == canonical(b); }

Assertion canonical(const Assertion& a) {
  if (const auto* e = std::get_if<Equation>(&a)) return *e;
  Sequent s = std::get<Sequent>(a);
  for (auto& h : s.hyps) h = canonical(h);
  s.concl = canonical(s.concl);
  return s;
}

bool alpha_eq(const Assertion& a, const Assertion& b) {
  if (a.index() != b.index()) return false;
  if (context_of(a) != context_of(b)) return false;
  return canonical(a) == canonical(b);
}

bool equal_upto_free_renaming(const Assertion& a, const Assertion& b) {
  const Context& ca = context_of(a);
  const Context& cb = context_of(b);
  if (ca.size() != cb.size() || a.index() != b.index()) return false;
  auto rename = [](const Assertion& x) {
    Subst s;
    Context c = context_of(x);
    for (size_t i = 0; i < c.size(); ++i) {
      s[c[i].var] = Term::var("$" + std::to_string(i));
      c[i].var = "$" + std::to_string(i);
    }
    if (const auto* e = std::get_if<Equation>(&x))
      return Assertion(Equation{c, substitute(e->lhs, s), substitute(e->rhs, s), e->sort});
    const auto& q = std::get<Sequent>(x);
    Sequent r{c, {}, substitute(q.concl, s)};
    for (const auto& h : q.hyps) r.hyps.push_back(substitute(h, s));
    return Assertion(r);
  };
  return alpha_eq(rename(a), rename(b));
}

int term_depth(const Term& t) {
  if (t.is_var) return 0;
  int d = 0;
  for (const auto& a : t.args) d = std::max(d, term_depth(a));
  return d + 1;
}

int formula_depth(const Formula& f) {
  if (f.kind == FKind::Rel || f.kind == FKind::Eq) return 0;
  int d = 0;
  for (const auto& s : f.subs) d = std::max(d, formula_depth(s));
  return d + 1;
}

SExpr to_sexpr(const Term& t) {
  if (t.is_var) return SExpr::make_atom(t.name);
  std::vector<SExpr> xs{SExpr::make_atom(t.name)};
  for (const auto& a : t.args) xs.push_back(to_sexpr(a));
  return SExpr::make_list(std::move(xs));
}

SExpr to_sexpr(const Formula& f) {
  std::vector<SExpr> xs;
  switch (f.kind) {
    case FKind::Rel:
      xs.push_back(SExpr::make_atom(f.sym));
      for (const auto& t : f.terms) xs.push_back(to_sexpr(t));
      break;
    case FKind::Eq:
      xs = {SExpr::make_atom("="), SExpr::make_atom(f.sym), to_sexpr(f.terms[0]), to_sexpr(f.terms[1])};
      break;
    case FKind::Conn:
      xs.push_back(SExpr::make_atom(f.sym));
      for (const auto& s : f.subs) xs.push_back(to_sexpr(s));
      break;
    case FKind::Quant:
      xs = {SExpr::make_atom(f.sym),
            SExpr::make_list({SExpr::make_atom(f.bound.var), SExpr::make_atom(f.bound.sort)}),
            to_sexpr(f.subs[0])};
      break;
  }
  return SExpr::make_list(std::move(xs));
}

SExpr to_sexpr(const Context& ctx) {
  std::vector<SExpr> xs{SExpr::make_atom("ctx")};
  for (const auto& b : ctx)
    xs.push_back(SExpr::make_list({SExpr::make_atom(b.var), SExpr::make_atom(b.sort)}));
  return SExpr::make_list(std::move(xs));
}

SExpr to_sexpr(const Assertion& a) {
  if (const auto* e = std::get_if<Equation>(&a))
    return SExpr::make_list({SExpr::make_atom("eqn"), to_sexpr(e->ctx), to_sexpr(e->lhs),
                             to_sexpr(e->rhs), SExpr::make_atom(e->sort)});
  const auto& s = std::get<Sequent>(a);
  std::vector<SExpr> hyp{SExpr::make_atom("hyp")};
  for (const auto& h : s.hyps) hyp.push_back(to_sexpr(h));
  return SExpr::make_list({SExpr::make_atom("seq"), to_sexpr(s.ctx), SExpr::make_list(std::move(hyp)),
                           SExpr::make_list({SExpr::make_atom("concl"), to_sexpr(s.concl)})});
}

std::string show(const Term& t) { return to_string(to_sexpr(t)); }
std::string show(const Formula& f) { return to_string(to_sexpr(f)); }
std::string show(const Context& c) { return to_string(to_sexpr(c)); }
std::string show(const Assertion& a) { return to_string(to_sexpr(a)); }

}  // namespace pcat
