// SPDX-License-Identifier: Apache-2.0
#include <chrono>

#include "doctest.h"
#include "pcat/propcat.hpp"

using namespace pcat;

namespace {

std::vector<AtomSpec> atomB() { return {{"B", {"0", "1"}}}; }

MostowskiSpec spec(std::string name, MostowskiSpec::Kind k, int n = 0) {
  MostowskiSpec s;
  s.name = std::move(name);
  s.kind = k;
  s.k = n;
  return s;
}

std::shared_ptr<FunctionPropCategory> powerset(int depth = 2) {
  return mk_powerset_propcat(atomB(), {spec(kForall, MostowskiSpec::Kind::All), spec(kExists, MostowskiSpec::Kind::Nonempty)},
                             depth);
}

Elem vals(std::initializer_list<Code> xs) { return Elem(xs.begin(), xs.end()); }

}  // namespace

TEST_CASE("rational packing round-trips and rejects out-of-range values") {
  for (auto r : {Rational(0), Rational(1), Rational(1, 4), Rational(3, 7)}) CHECK(unpack_rational(pack_rational(r)) == r);
  CHECK_THROWS_AS(pack_rational(Rational(3, 2)), PropError);
  CHECK(parse_rational("0.7") == Rational(7, 10));
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK_THROWS_AS(parse_rational("x"), PropError);
}

TEST_CASE("Lukasiewicz t-norm on exact rationals") {
  auto t = TNorm::lukasiewicz();
  CHECK(t.fn(Rational(7, 10), Rational(6, 10)) == Rational(3, 10));
  CHECK(t.fn(Rational(1, 4), Rational(1, 2)) == Rational(0));
}

TEST_CASE("finite lattices verify; a broken meet is rejected") {
  CHECK_NOTHROW(FiniteLattice::boolean()->verify());
  CHECK_NOTHROW(FiniteLattice::lukasiewicz(5)->verify());
  auto L = FiniteLattice::boolean();
  auto tables = L->tables();
  tables["and"].table = {0, 1, 1, 1};
  FiniteLattice bad("bad", L->elems(), L->order(), tables);
  CHECK_THROWS_WITH_AS(bad.verify(), doctest::Contains("lattice law violation"), PropError);
}

TEST_CASE("fuzzy quantifiers: product t-norm over a two-point carrier") {
  auto pc = mk_fuzzy_propcat({{"A", {"*"}}, {"B", {"0", "1"}}}, TNorm::product(), {kForall, kExists, "Ωprod"}, 2);
  const auto& W = pc->words();
  ObjId one = W.terminal(), B = *W.find_object("B");
  Elem half(2, pack_rational(Rational(1, 2)));
  CHECK(unpack_rational(pc->quant("Ωprod", one, B, half)[0]) == Rational(1, 4));
  CHECK(unpack_rational(pc->quant(kForall, one, B, half)[0]) == Rational(1, 2));
  CHECK(unpack_rational(pc->quant(kExists, one, B, half)[0]) == Rational(1, 2));
}

TEST_CASE("fuzzy with min t-norm: the tensor quantifier agrees with forall") {
  auto pc = mk_fuzzy_propcat(atomB(), TNorm::minimum(), {kForall, "Ωmin"}, 2);
  const auto& W = pc->words();
  ObjId B = *W.find_object("B");
  auto xs = pc->probe_elements(*W.find_object("B*B"), Probe{});
  for (const auto& r : xs) CHECK(pc->quant("Ωmin", B, B, r) == pc->quant(kForall, B, B, r));
}

TEST_CASE("t-norm laws are enforced on the probe") {
  TNorm bad{"avg", [](const Rational& a, const Rational& b) { return (a + b) / 2; }};
  CHECK_THROWS_WITH_AS(mk_fuzzy_propcat(atomB(), bad, {kForall}, 1), doctest::Contains("tnorm law violation"), PropError);
}

TEST_CASE("powerset quantifiers match set comprehension") {
  auto pc = powerset();
  const auto& W = pc->words();
  ObjId B = *W.find_object("B"), BB = *W.find_object("B*B");
  for (std::int64_t i = 0; i < *pc->fiber_size(BB); ++i) {
    Elem r = pc->fiber_element(BB, i);
    Elem all(2, 0), some(2, 0);
    for (int a = 0; a < 2; ++a) {
      bool every = true, any = false;
      for (int b = 0; b < 2; ++b) {
        bool in = false;
        for (int p = 0; p < 4; ++p)
          if (W.point(BB, p) == std::vector<int>{a, b}) in = r[p] == 1;
        every = every && in;
        any = any || in;
      }
      all[a] = every;
      some[a] = any;
    }
    CHECK(pc->quant(kForall, B, B, r) == all);
    CHECK(pc->quant(kExists, B, B, r) == some);
  }
  CHECK(pc->quant(kExists, B, B, Elem(4, 0)) == Elem(2, 0));
}

TEST_CASE("powerset host passes check_fa exhaustively") {
  auto rep = check_fa(*powerset());
  CHECK_MESSAGE(rep.ok, rep.summary());
  CHECK(rep.exhaustive());
  CHECK(rep.compiled);
}

TEST_CASE("compiled parallel engine agrees with the serial reference") {
  auto pc = mk_powerset_propcat(atomB(), {spec("two", MostowskiSpec::Kind::Exactly, 2), spec(kExists, MostowskiSpec::Kind::Nonempty)}, 2);
  CheckOptions o;
  o.max_violations = 20;
  auto a = check_fa(*pc, o), b = check_fa_reference(*pc, o);
  REQUIRE(a.violations.size() == b.violations.size());
  for (size_t i = 0; i < a.violations.size(); ++i) {
    CHECK(a.violations[i].condition == b.violations[i].condition);
    CHECK(a.violations[i].lhs == b.violations[i].lhs);
    CHECK(a.violations[i].rhs == b.violations[i].rhs);
  }
  o.parallel = false;
  auto c = check_fa(*pc, o);
  REQUIRE(c.violations.size() == a.violations.size());
  for (size_t i = 0; i < a.violations.size(); ++i) CHECK(a.violations[i].witness == c.violations[i].witness);
}

TEST_CASE("exactly-two quantifier breaks the iteration law on the diagonal") {
  auto pc = mk_powerset_propcat({{"A", {"a0", "a1"}}}, {spec("two", MostowskiSpec::Kind::Exactly, 2)}, 2);
  const auto& W = pc->words();
  ObjId one = W.terminal(), A = *W.find_object("A"), AA = *W.find_object("A*A");
  Elem diag = pc->eq(A);
  Elem lhs = pc->quant("two", one, AA, pc->pull(assoc_iso(W, one, A, A), diag));
  Elem rhs = pc->quant("two", one, A, pc->quant("two", A, A, diag));
  CHECK(lhs == vals({1}));
  CHECK(rhs == vals({0}));
  CheckOptions o;
  o.max_violations = 100;
  auto rep = check_fa(*pc, o);
  CHECK_FALSE(rep.ok);
  bool diag_witness = false;
  for (const auto& v : rep.violations)
    if (v.condition == "C5.assoc" && v.witness.find(pc->format(AA, diag)) != std::string::npos && v.lhs == "(set ())" &&
        v.rhs == "(set)")
      diag_witness = true;
  CHECK(diag_witness);
}

TEST_CASE("Lukasiewicz chain host passes check_fa") {
  auto t0 = std::chrono::steady_clock::now();
  auto pc = mk_lattice_propcat(atomB(), FiniteLattice::lukasiewicz(5), 2);
  auto rep = check_fa(*pc);
  CHECK_MESSAGE(rep.ok, rep.summary());
  CHECK(rep.exhaustive());
  MESSAGE("luk5 check_fa seconds: "
          << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

TEST_CASE("fuzzy product host passes on the probe and says so") {
  auto pc = mk_fuzzy_propcat(atomB(), TNorm::product(), {kForall, kExists, "Ωprod"}, 2);
  auto rep = check_fa(*pc);
  CHECK_MESSAGE(rep.ok, rep.summary());
  CHECK(rep.used_probe);
  CHECK_FALSE(rep.compiled);
}

TEST_CASE("a missing quantifier family is rejected at construction") {
  auto s = spec("odd", MostowskiSpec::Kind::Table);
  s.families[1] = {1};
  s.families[2] = {1, 2};
  CHECK_THROWS_WITH_AS(mk_powerset_propcat(atomB(), {s}, 2), doctest::Contains("spec missing a carrier"), PropError);
}

TEST_CASE("no atoms: only the terminal object") {
  auto pc = mk_powerset_propcat({}, {spec(kForall, MostowskiSpec::Kind::All)}, 2);
  CHECK(pc->base().object_count() == 1);
  CHECK(check_fa(*pc).ok);
}

TEST_CASE("product of powerset and Lukasiewicz passes on a sample") {
  auto pc = product_propcat({powerset(), mk_lattice_propcat(atomB(), FiniteLattice::lukasiewicz(5), 2)});
  CheckOptions o;
  o.samples = 20000;
  auto rep = check_fa(*pc, o);
  CHECK_MESSAGE(rep.ok, rep.summary());
  CHECK(pc->language().quantifiers.count(kForall));
  CHECK(pc->language().connectives.count("not"));
}

TEST_CASE("empty product is the terminal prop-category") {
  auto pc = product_propcat({});
  CHECK(pc->base().object_count() == 1);
  CHECK(pc->base().morphism_count() == 1);
  CHECK(*pc->fiber_size(0) == 1);
  CHECK(check_fa(*pc).ok);
}
