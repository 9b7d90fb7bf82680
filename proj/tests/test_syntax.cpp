// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "pcat/io.hpp"

using namespace pcat;

namespace {

Signature sig() {
  Signature sg;
  sg.add_sort("s");
  sg.add_sort("t");
  sg.functions["f"] = {{"s"}, "s"};
  sg.functions["g"] = {{"s", "s"}, "s"};
  sg.functions["c"] = {{}, "s"};
  sg.functions["h"] = {{"s"}, "t"};
  sg.relations["R"] = {{"s", "s"}};
  sg.relations["P"] = {{"s"}};
  return sg;
}

Formula F(const std::string& text) { return read_formula(parse_sexpr(text), sig(), Language::lattice()); }
Term Tm(const std::string& text) { return read_term(parse_sexpr(text)); }
Context Cx(const std::string& text) { return read_context(parse_sexpr(text)); }

// random terms and formulas over x, y, z
Term rand_term(std::mt19937_64& rng, int depth) {
  static const char* vars[] = {"x", "y", "z"};
  int k = static_cast<int>(rng() % 4);
  if (depth == 0 || k == 0) return Term::var(vars[rng() % 3]);
  if (k == 1) return Term::app("c");
  if (k == 2) return Term::app("f", {rand_term(rng, depth - 1)});
  return Term::app("g", {rand_term(rng, depth - 1), rand_term(rng, depth - 1)});
}

Formula rand_formula(std::mt19937_64& rng, int depth) {
  static const char* vars[] = {"x", "y", "z"};
  int k = static_cast<int>(rng() % 5);
  if (depth == 0 || k == 0) return Formula::rel("R", {rand_term(rng, 1), rand_term(rng, 1)});
  if (k == 1) return Formula::eq("s", rand_term(rng, 1), rand_term(rng, 1));
  if (k == 2) return Formula::conn("and", {rand_formula(rng, depth - 1), rand_formula(rng, depth - 1)});
  return Formula::quant(k == 3 ? kForall : kExists, {vars[rng() % 3], "s"}, rand_formula(rng, depth - 1));
}

}  // namespace

TEST_CASE("terms type-check against the signature") {
  Signature sg = sig();
  Context c = Cx("(ctx (x s) (y s))");
  CHECK(wf_term(sg, c, Tm("(g (f x) (c))")) == "s");
  CHECK(wf_term(sg, c, Tm("(h x)")) == "t");
  try {
    wf_term(sg, c, Tm("(g x (h y))"));
    FAIL("expected a sort mismatch");
  } catch (const SyntaxError& e) {
    CHECK(e.kind() == "sort mismatch");
    CHECK(e.path() == std::vector<int>{2});
  }
  CHECK_THROWS_WITH_AS(wf_term(sg, c, Tm("(f z)")), doctest::Contains("variable not in context"), SyntaxError);
  CHECK_THROWS_WITH_AS(wf_term(sg, c, Tm("(f x y)")), doctest::Contains("arity mismatch"), SyntaxError);
  CHECK_THROWS_WITH_AS(wf_term(sg, c, Tm("(k x)")), doctest::Contains("unknown symbol"), SyntaxError);
}

TEST_CASE("contexts reject repeated variables and unknown sorts") {
  CHECK_THROWS_WITH_AS(wf_context(sig(), Cx("(ctx (x s) (x s))")), doctest::Contains("bad context"), SyntaxError);
  CHECK_THROWS_AS(wf_context(sig(), Cx("(ctx (x u))")), SyntaxError);
}

TEST_CASE("formulas: quantifiers extend the context, unknown quantifiers are rejected") {
  Signature sg = sig();
  Language L = Language::lattice();
  CHECK_NOTHROW(wf_formula(sg, L, Cx("(ctx (x s))"), F("(forall (y s) (R x y))")));
  CHECK_THROWS_AS(wf_formula(sg, L, Cx("(ctx (x s))"), F("(R x y)")), SyntaxError);
  Formula q = Formula::quant("most", {"y", "s"}, F("(P y)"));
  CHECK_THROWS_WITH_AS(wf_formula(sg, L, {}, q), doctest::Contains("unknown quantifier"), SyntaxError);
  Formula n = Formula::conn("not", {F("(P (c))")});
  CHECK_THROWS_WITH_AS(wf_formula(sg, L, {}, n), doctest::Contains("unknown connective"), SyntaxError);
}

TEST_CASE("substitution renames binders that would capture") {
  // (forall y. R(x, y))[y/x]: the bound y must be renamed
  Formula f = F("(forall (y s) (R x y))");
  Formula g = substitute(f, {{"x", Term::var("y")}});
  CHECK(alpha_eq(g, F("(forall (z s) (R y z))")));
  CHECK_FALSE(alpha_eq(g, F("(forall (y s) (R y y))")));
  CHECK(free_vars(g) == std::set<std::string>{"y"});
  // bound occurrences are untouched
  CHECK(substitute(F("(exists (x s) (P x))"), {{"x", Tm("(c)")}}) == F("(exists (x s) (P x))"));
  // simultaneous, not sequential
  CHECK(substitute(Tm("(g x y)"), {{"x", Term::var("y")}, {"y", Term::var("x")}}) == Tm("(g y x)"));
}

TEST_CASE("alpha-equivalence") {
  CHECK(alpha_eq(F("(forall (y s) (R x y))"), F("(forall (w s) (R x w))")));
  CHECK_FALSE(alpha_eq(F("(forall (y s) (R x y))"), F("(forall (x s) (R x x))")));
  CHECK_FALSE(alpha_eq(F("(forall (y s) (R x y))"), F("(exists (y s) (R x y))")));
  CHECK(alpha_eq(F("(forall (y s) (forall (z s) (R y z)))"), F("(forall (z s) (forall (y s) (R z y)))")));
  CHECK_FALSE(alpha_eq(F("(forall (y s) (forall (z s) (R y z)))"), F("(forall (y s) (forall (z s) (R z y)))")));
}

TEST_CASE("property: substitution lemma for disjoint substitutions") {
  // f[M/x][N/y] = f[N/y][M[N/y]/x] when x is not free in N
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    Formula f = rand_formula(rng, 3);
    Term M = rand_term(rng, 2);
    Term N = substitute(rand_term(rng, 2), {{"x", Term::app("c")}});
    Formula l = substitute(substitute(f, {{"x", M}}), {{"y", N}});
    Formula r = substitute(substitute(f, {{"y", N}}), {{"x", substitute(M, {{"y", N}})}});
    CHECK(alpha_eq(l, r));
  }
}

TEST_CASE("property: canonical forms are alpha-equal and idempotent; free variables are stable") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    Formula f = rand_formula(rng, 3);
    Formula c = canonical(f);
    CHECK(alpha_eq(f, c));
    CHECK(canonical(c) == c);
    CHECK(free_vars(c) == free_vars(f));
    CHECK(alpha_eq(substitute(f, {}), f));
  }
}

TEST_CASE("property: renaming a variable and back is the identity up to alpha") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    Formula f = rand_formula(rng, 3);
    if (free_vars(f).count("w")) continue;
    Formula there = substitute(f, {{"x", Term::var("w")}});
    CHECK(free_vars(there).count("x") == 0);
    CHECK(alpha_eq(substitute(there, {{"w", Term::var("x")}}), f));
  }
}

TEST_CASE("sexpr rendering and reading of formulas round-trip") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    Formula f = rand_formula(rng, 3);
    Formula g = F(to_string(to_sexpr(f)));
    CHECK(g == f);
  }
}
