// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pcat/io.hpp"
#include "pcat/report.hpp"

using namespace pcat;
namespace fs = std::filesystem;

namespace {

std::string fx(const std::string& f) { return std::string(PCAT_FIXTURES) + "/" + f; }

std::vector<std::string> corpus() {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(PCAT_FIXTURES))
    if (e.is_regular_file()) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// same objects, morphisms and (listed) fiber elements with the same order and operations
bool propcats_agree(const PropCategory& a, const PropCategory& b) {
  const Category& A = a.base();
  const Category& B = b.base();
  if (A.object_count() != B.object_count() || A.morphism_count() != B.morphism_count()) return false;
  if (!(a.language() == b.language())) return false;
  for (ObjId c = 0; c < A.object_count(); ++c) {
    if (A.object_name(c) != B.object_name(c) || a.symbolic(c) != b.symbolic(c)) return false;
    if (a.symbolic(c)) continue;
    if (a.fiber_size(c) != b.fiber_size(c)) return false;
    std::int64_t n = std::min<std::int64_t>(*a.fiber_size(c), 12);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) {
        Elem x = a.fiber_element(c, i), y = a.fiber_element(c, j);
        if (a.format(c, x) != b.format(c, b.fiber_element(c, i))) return false;
        if (a.leq(c, x, y) != b.leq(c, b.fiber_element(c, i), b.fiber_element(c, j))) return false;
        if (a.tensor(c, x, y) != b.tensor(c, x, y)) return false;
      }
  }
  for (MorId f = 0; f < A.morphism_count(); f += 1 + A.morphism_count() / 64)
    if (A.morphism_name(f) != B.morphism_name(f)) return false;
  return true;
}

std::string dir_of(const std::string& p) { return fs::path(p).parent_path().string(); }

}  // namespace

TEST_CASE("every fixture file round-trips through print and parse") {
  Workspace ws;
  const Theory& sym = ws.theory(fx("symmetric.theory"));
  int counts[8] = {};
  for (const auto& path : corpus()) {
    INFO(path);
    SExpr e = parse_sexpr(read_file(path));
    FileKind k = file_kind(e);
    counts[static_cast<int>(k)]++;
    // bad/ holds well-formed counterexamples and files that must be rejected at load time
    if (path.find("/bad/") != std::string::npos && k == FileKind::Theory) {
      CHECK_THROWS_AS(ws.theory(path), ParseError);
      continue;
    }
    switch (k) {
      case FileKind::Theory: {
        const Theory& T = ws.theory(path);
        CHECK(theories_alpha_equal(T, read_theory(parse_sexpr(print_theory(T)))));
        break;
      }
      case FileKind::PropCat: {
        PropPtr P;
        try {
          P = ws.propcat(path);
        } catch (const std::exception&) {
          continue;  // files that are meant to fail construction
        }
        PropPtr Q = ws.propcat_from(parse_sexpr(ws.print_propcat(path)), dir_of(path));
        CHECK(propcats_agree(*P, *Q));
        break;
      }
      case FileKind::Structure: {
        const Structure& S = ws.structure(path);
        Structure S2 = ws.structure_from(parse_sexpr(ws.print_structure(S)), dir_of(path));
        CHECK_FALSE(structure_difference(S, S2).has_value());
        break;
      }
      case FileKind::Morphism: {
        MorphPtr F = ws.morphism(path);
        MorphPtr G = ws.morphism_from(parse_sexpr(ws.print_morphism(path)), dir_of(path));
        CHECK_FALSE(morphism_difference(*F, *G).has_value());
        break;
      }
      case FileKind::Interp: {
        const auto& h = ws.interpretation(path);
        auto h2 = ws.interpretation_from(parse_sexpr(ws.print_interpretation(path)), dir_of(path));
        CHECK(h.source == h2.source);
        CHECK(h.target == h2.target);
        CHECK(h.sorts == h2.sorts);
        for (const auto& [r, img] : h.rels) CHECK(alpha_eq(img.phi, h2.rels.at(r).phi));
        for (const auto& [f, img] : h.fns) CHECK(img.terms == h2.fns.at(f).terms);
        break;
      }
      case FileKind::Proof: {
        ProofNode p = ws.proof(path, sym);
        CHECK(proofs_alpha_equal(p, read_proof(parse_sexpr(print_proof(p)), sym.sg, sym.lang)));
        break;
      }
      case FileKind::Probe: {
        Probe p = read_probe(e);
        CHECK_FALSE(p.values.empty());
        break;
      }
      case FileKind::Unknown:
        FAIL("unrecognised fixture");
    }
  }
  CHECK(counts[static_cast<int>(FileKind::Theory)] >= 2);
  CHECK(counts[static_cast<int>(FileKind::PropCat)] >= 10);
  CHECK(counts[static_cast<int>(FileKind::Structure)] >= 10);
  CHECK(counts[static_cast<int>(FileKind::Morphism)] >= 10);
  CHECK(counts[static_cast<int>(FileKind::Proof)] >= 5);
}

TEST_CASE("alpha-renamed bound variables do not affect theory equality") {
  Theory a = read_theory(parse_sexpr("(theory t (sort s) (rel R (s s)) (seq (ctx) (hyp) (concl (forall (x s) (exists (y s) (R x y))))))"));
  Theory b = read_theory(parse_sexpr("(theory t (sort s) (rel R (s s)) (seq (ctx) (hyp) (concl (forall (u s) (exists (v s) (R u v))))))"));
  Theory c = read_theory(parse_sexpr("(theory t (sort s) (rel R (s s)) (seq (ctx) (hyp) (concl (forall (u s) (exists (v s) (R v u))))))"));
  CHECK(theories_alpha_equal(a, b));
  CHECK_FALSE(theories_alpha_equal(a, c));
}

TEST_CASE("an unknown sort is reported with its name and position") {
  const char* text =
      "(theory t\n"
      "  (sort s)\n"
      "  (fn f (s) s)\n"
      "  (eqn (ctx (x u)) x x u))\n";
  try {
    read_theory(parse_sexpr(text));
    FAIL("accepted an unknown sort");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("sort u") != std::string::npos);
  }
  try {
    read_theory(parse_sexpr("(theory t (sort s)\n  (fn f (w) s))"));
    FAIL("accepted an unknown argument sort");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("sort w") != std::string::npos);
  }
}

TEST_CASE("lexical and grammatical errors carry line and column") {
  try {
    parse_sexpr("(theory t\n  (sort s)\n  (rel R (s s)");
    FAIL("accepted an unclosed list");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 1);
  }
  try {
    read_theory(parse_sexpr("(theory t (sort s) (rel R (s s))\n   (seq (ctx (x s)) (hyp) (concl (R x))))"));
    FAIL("accepted an arity mismatch");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("arity") != std::string::npos);
  }
  Workspace ws;
  CHECK_THROWS_AS(ws.structure(fx("nonexistent.structure")), std::exception);
  try {
    ws.structure_from(parse_sexpr("(structure z (host missing.pc) (sort s B))"), PCAT_FIXTURES);
    FAIL("accepted an unresolved reference");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("missing.pc") != std::string::npos);
  }
}

TEST_CASE("element syntax: sets, values, constants and tuples") {
  Workspace ws;
  const Structure& S = ws.structure(fx("swap.structure"));
  const PropCategory& P = *S.host;
  ObjId bb = context_object(S, {{"x", "s"}, {"y", "s"}});
  Elem r = P.parse(bb, parse_sexpr("(set (0 1) (1 1))"));
  CHECK(P.format(bb, r) == "(set (0 1) (1 1))");
  CHECK(P.parse(bb, parse_sexpr("(const 1)")) == P.parse(bb, parse_sexpr("top")));
  const Structure& Q = ws.structure(fx("pow_x_luk5.structure"));
  ObjId q = Q.sorts.at("s");
  Elem t = Q.host->parse(q, parse_sexpr("(tuple (set 1) (vals 0 3/4))"));
  CHECK(Q.host->format(q, t) == "(tuple (set 1) (vals 0 3/4))");
  CHECK_THROWS(Q.host->parse(q, parse_sexpr("(tuple (set 1) (vals 0 2/3))")));
}

TEST_CASE("reports round-trip through the record format") {
  Report r;
  r.command = "check-pc";
  r.inputs = {"a.pc"};
  r.output("value", "1/4");
  r.output("structure", "(structure s\n  (sort s B))\n");
  FaReport fa;
  fa.ok = false;
  fa.stats.push_back({"C5.unit", 22, 8, true, 0.125});
  fa.violations.push_back({"C5.unit", "two over 1 x 1 at (set ())", "(set)", "(set ())"});
  r.add("FA", fa);
  r.verdict("other", true, "quoted \"detail\" with ⊗");
  r.seconds = 0.1 + 0.2;
  Report back = Report::from_records(r.records());
  CHECK(back == r);
  CHECK_FALSE(back.ok());
  CHECK(r.text().find("Condition 5 (C5.unit)") != std::string::npos);
  CHECK(cite_condition("C1.order.trans") == "Condition 1 (C1.order.trans)");
  CHECK(cite_condition("mor.hom") == "mor.hom");
  CHECK_THROWS(Report::from_records("{\"record\":\"header\",\"schema\":\"other/9\",\"command\":\"x\",\"inputs\":[]}"));
}

TEST_CASE("errors in files name the file, line and column") {
  fs::path p = fs::temp_directory_path() / "pcat_bad_sort.theory";
  {
    std::ofstream out(p);
    out << "(theory t\n  (sort s)\n  (eqn (ctx (x u)) x x u))\n";
  }
  Workspace ws;
  try {
    ws.theory(p.string());
    FAIL("accepted an unknown sort");
  } catch (const ParseError& e) {
    CHECK(e.file() == Workspace::canonical_path(p.string()));
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).rfind(e.file() + ":3:", 0) == 0);
  }
  fs::remove(p);
}
