// SPDX-License-Identifier: Apache-2.0
#include <functional>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "pcat/io.hpp"

using namespace pcat;

namespace {

std::string fx(const std::string& f) { return std::string(PCAT_FIXTURES) + "/" + f; }

// Tarskian evaluation over the points of B with values read back as rationals.
// Independent of the fibred machinery: only the raw tables of f and R are used.
struct Oracle {
  const Structure& S;
  const FunctionPropCategory& P;
  const WordCategory& W;
  ObjId B, BB;
  std::vector<int> f;
  std::map<std::pair<int, int>, Rational> R;
  std::string tnorm;  // "min" or "luk"

  Oracle(const Structure& s, std::string t)
      : S(s),
        P(dynamic_cast<const FunctionPropCategory&>(*s.host)),
        W(P.words()),
        B(s.sorts.at("s")),
        BB(s.host->base().product_or_throw(B, B).obj),
        f(W.table(s.fns.at("f"))),
        tnorm(std::move(t)) {
    const Elem& r = s.rels.at("R");
    for (int q = 0; q < W.carrier_size(BB); ++q) {
      auto pt = W.point(BB, q);
      R[{pt[0], pt[1]}] = val(r[q]);
    }
  }
  Rational val(Code c) const { return parse_rational(P.domain().format(c)); }

  int term(const Term& t, const std::map<std::string, int>& env) const {
    if (t.is_var) return env.at(t.name);
    REQUIRE(t.name == "f");
    return f[term(t.args[0], env)];
  }

  Rational eval(const Formula& g, const std::map<std::string, int>& env) const {
    switch (g.kind) {
      case FKind::Rel:
        return R.at({term(g.terms[0], env), term(g.terms[1], env)});
      case FKind::Eq:
        return term(g.terms[0], env) == term(g.terms[1], env) ? Rational(1) : Rational(0);
      case FKind::Quant: {
        Rational lo(1), hi(0);
        for (int v = 0; v < W.carrier_size(B); ++v) {
          auto e2 = env;
          e2[g.bound.var] = v;
          Rational x = eval(g.subs[0], e2);
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        return g.sym == kForall ? lo : hi;
      }
      case FKind::Conn:
        break;
    }
    if (g.sym == "top" || g.sym == kUnit) return Rational(1);
    if (g.sym == "bot") return Rational(0);
    Rational a = eval(g.subs[0], env), b = eval(g.subs[1], env);
    if (g.sym == "and") return std::min(a, b);
    if (g.sym == "or") return std::max(a, b);
    REQUIRE(g.sym == kTensor);
    return tnorm == "luk" ? std::max(Rational(0), a + b - 1) : std::min(a, b);
  }

  // compare every point of the context object
  void agree(const Formula& g, const Context& ctx) const {
    Elem got = interpret_formula(S, g, ctx);
    ObjId c = context_object(S, ctx);
    for (int p = 0; p < W.carrier_size(c); ++p) {
      std::map<std::string, int> env;
      if (ctx.size() == 1) env[ctx[0].var] = p;
      if (ctx.size() == 2) {
        auto pt = W.point(c, p);
        env[ctx[0].var] = pt[0];
        env[ctx[1].var] = pt[1];
      }
      INFO(show(g), " at point ", p);
      CHECK(val(got[p]) == eval(g, env));
    }
  }
};

Term rand_term(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
  if (depth == 0 || rng() % 2) return Term::var(vars[rng() % vars.size()]);
  return Term::app("f", {rand_term(rng, vars, depth - 1)});
}

// quantifiers only bind while the context has room under the product depth of 2
Formula rand_formula(std::mt19937_64& rng, std::vector<std::string> vars, int depth) {
  int k = static_cast<int>(rng() % 7);
  if (depth == 0 || k == 0) {
    if (vars.empty()) return Formula::conn(rng() % 2 ? "top" : "bot");
    return Formula::rel("R", {rand_term(rng, vars, 2), rand_term(rng, vars, 2)});
  }
  if (k == 1 && !vars.empty()) return Formula::eq("s", rand_term(rng, vars, 2), rand_term(rng, vars, 2));
  if (k <= 4) {
    static const char* cs[] = {"and", "or", "tensor"};
    return Formula::conn(cs[rng() % 3], {rand_formula(rng, vars, depth - 1), rand_formula(rng, vars, depth - 1)});
  }
  if (vars.size() >= 2) return Formula::unit();
  std::string v = vars.empty() ? "u" : (vars[0] == "u" ? "w" : "u");
  vars.push_back(v);
  return Formula::quant(k == 5 ? kForall : kExists, {v, "s"}, rand_formula(rng, vars, depth - 1));
}

Context ctx_of(const std::vector<std::string>& vs) {
  Context c;
  for (auto& v : vs) c.push_back({v, "s"});
  return c;
}

}  // namespace

TEST_CASE("swap satisfies the involution axiom and refutes symmetry") {
  Workspace ws;
  const Structure& S = ws.structure(fx("swap.structure"));
  const Theory& inv = ws.theory(fx("involution.theory"));
  for (const auto& a : inv.axioms) CHECK(holds(S, a));
  const Theory& sym = ws.theory(fx("symmetric.theory"));
  REQUIRE(sym.axioms.size() == 1);
  auto rep = satisfies(S, sym.axioms[0]);
  CHECK_FALSE(rep.verdict);
  CHECK(rep.fiber == "B*B");
}

TEST_CASE("quantified formulas agree with the Tarskian oracle on closed examples") {
  Workspace ws;
  const Structure& S = ws.structure(fx("swap.structure"));
  Oracle o(S, "min");
  Formula ex = Formula::quant(kExists, {"x", "s"}, Formula::quant(kExists, {"y", "s"}, Formula::rel("R", {Term::var("x"), Term::var("y")})));
  Elem v = interpret_formula(S, ex, {});
  REQUIRE(v.size() == 1);
  CHECK(o.val(v[0]) == Rational(1));
  Formula all = Formula::quant(kForall, {"x", "s"}, Formula::quant(kExists, {"y", "s"}, Formula::rel("R", {Term::var("x"), Term::var("y")})));
  CHECK(o.val(interpret_formula(S, all, {})[0]) == Rational(0));
  o.agree(ex, {});
  o.agree(all, {});
}

TEST_CASE("random formulas agree with the oracle on boolean and graded hosts") {
  Workspace ws;
  for (auto [file, tn] : {std::pair{"swap.structure", "min"}, std::pair{"luk5_plain.structure", "luk"}}) {
    const Structure& S = ws.structure(fx(file));
    Oracle o(S, tn);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 150; ++i) {
      std::vector<std::string> vars;
      for (int k = 0, n = static_cast<int>(rng() % 3); k < n; ++k) vars.push_back(k ? "y" : "x");
      o.agree(rand_formula(rng, vars, 3), ctx_of(vars));
    }
  }
}

TEST_CASE("semantic substitution lemma: [[φ[t/x]]] at y equals [[φ]] at x := [[t]](y)") {
  Workspace ws;
  const Structure& S = ws.structure(fx("luk5_plain.structure"));
  Oracle o(S, "luk");
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    Formula phi = rand_formula(rng, {"x", "y"}, 2);
    Term t = rand_term(rng, {"y"}, 2);
    Formula sub = substitute(phi, Subst{{"x", t}});
    Elem got = interpret_formula(S, sub, ctx_of({"y"}));
    for (int y = 0; y < 2; ++y) {
      std::map<std::string, int> env{{"y", y}};
      env["x"] = o.term(t, env);
      INFO(show(phi), " with x := ", show(t));
      CHECK(o.val(got[y]) == o.eval(phi, env));
    }
  }
}

TEST_CASE("fuzzy host: product quantifier gives 1/4, forall and exists give 1/2") {
  Workspace ws;
  const Structure& S = ws.structure(fx("fuzzy.structure"));
  auto closed = [&](const std::string& q) {
    Formula g = Formula::quant(q, {"y", "τ"}, Formula::rel("R", {Term::var("y")}));
    Elem v = interpret_formula(S, g, {});
    return S.host->format(S.host->base().terminal(), v);
  };
  CHECK(closed("Ωprod") == "(vals 1/4)");
  CHECK(closed(kForall) == "(vals 1/2)");
  CHECK(closed(kExists) == "(vals 1/2)");
}

TEST_CASE("sequents compare the tensor of hypotheses with the conclusion") {
  Workspace ws;
  const Structure& S = ws.structure(fx("luk5.structure"));
  Context c = ctx_of({"x", "y"});
  Formula r = Formula::rel("R", {Term::var("x"), Term::var("y")});
  // 1/2 ⊗ 1/2 = 0 in Łukasiewicz logic, so R, R ⊢ bot holds but R ⊢ bot does not
  CHECK(holds(S, Sequent{c, {r, r}, Formula::conn("bot")}));
  CHECK_FALSE(holds(S, Sequent{c, {r}, Formula::conn("bot")}));
  CHECK(holds(S, Sequent{c, {}, Formula::unit()}));
  CHECK_FALSE(holds(S, Sequent{c, {}, r}));
}

TEST_CASE("ill-typed assertions are rejected before evaluation") {
  Workspace ws;
  const Structure& S = ws.structure(fx("swap.structure"));
  Sequent bad{ctx_of({"x"}), {}, Formula::rel("R", {Term::var("x")})};
  CHECK_THROWS_AS(holds(S, bad), SyntaxError);
  Sequent unknown{ctx_of({"x"}), {}, Formula::quant("most", {"y", "s"}, Formula::unit())};
  CHECK_THROWS_AS(holds(S, unknown), SyntaxError);
}

TEST_CASE("bounded theory: every member holds and the involution axiom is found") {
  Workspace ws;
  const Structure& S = ws.structure(fx("swap.structure"));
  Budget b;
  b.ctx = 1;
  b.term = 2;
  b.fml = 0;
  b.ante = 1;
  b.limit = 200000;
  TheoryResult th = theory_of(S, b);
  CHECK(th.considered > 0);
  CHECK_FALSE(th.assertions.empty());
  bool involution = false, not_identity = true;
  Equation inv{ctx_of({"x1"}), Term::app("f", {Term::app("f", {Term::var("x1")})}), Term::var("x1"), "s"};
  Equation id{ctx_of({"x1"}), Term::app("f", {Term::var("x1")}), Term::var("x1"), "s"};
  for (const auto& a : th.assertions) {
    CHECK(holds(S, a));
    if (equal_upto_free_renaming(a, Assertion{inv})) involution = true;
    if (equal_upto_free_renaming(a, Assertion{id})) not_identity = false;
  }
  CHECK(involution);
  CHECK(not_identity);
  // monotone in the budget: the smaller theory is contained in the larger one
  Budget b2 = b;
  b2.term = 1;
  TheoryResult small = theory_of(S, b2);
  REQUIRE_FALSE(th.truncated);
  REQUIRE_FALSE(small.truncated);
  CHECK(small.considered < th.considered);
  std::set<std::string> big;
  for (const auto& c : th.assertions) big.insert(show(canonical(c)));
  for (const auto& a : small.assertions) CHECK(big.count(show(canonical(a))) == 1);
}
