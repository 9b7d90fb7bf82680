// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, tolerances and budgets pinned below.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "pcat/io.hpp"
#include "pcat/soundness.hpp"

using namespace pcat;
namespace fs = std::filesystem;

namespace {

// pinned limits
constexpr double kFuzzySeconds = 1.0;
constexpr double kFaSeconds = 10.0;
constexpr double kSweepSeconds = 120.0;
constexpr double kSuiteSeconds = 300.0;
constexpr int kTrials = 200;

Budget budget() {
  Budget b;
  b.ctx = 2;
  b.term = 2;
  b.fml = 1;
  b.ante = 1;
  b.limit = 3000;
  b.formulas_per_context = 40;
  return b;
}

std::string fx(const std::string& f) { return std::string(PCAT_FIXTURES) + "/" + f; }

std::vector<std::string> files(const std::string& ext, bool include_bad = false) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(PCAT_FIXTURES)) {
    std::string p = e.path().string();
    if (!e.is_regular_file() || e.path().extension() != ext) continue;
    if (!include_bad && p.find("/bad/") != std::string::npos) continue;
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string base(const std::string& p) { return fs::path(p).filename().string(); }

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(int n, bool pass, const std::string& what, double secs) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s [%.2fs]\n", pass ? "PASS" : "FAIL", n, what.c_str(), secs);
  std::fflush(stdout);
}

// runs body; an exception is a failure with its message
void criterion(int n, const std::function<bool(std::ostringstream&)>& body) {
  auto t = Clock::now();
  std::ostringstream note;
  bool ok = false;
  try {
    ok = body(note);
  } catch (const std::exception& e) {
    note << " exception: " << e.what();
  }
  report(n, ok, note.str(), since(t));
}

struct Fixtures {
  Workspace ws;
  std::vector<std::string> structures, morphisms;
  std::map<const PropCategory*, bool> verified;

  Fixtures() {
    structures = files(".structure");
    for (const auto& m : files(".mor")) morphisms.push_back(m);
  }
  // hosts verify: exhaustive where the default engine manages, sampled for product hosts
  bool host_verifies(PropPtr P) {
    auto it = verified.find(P.get());
    if (it != verified.end()) return it->second;
    CheckOptions o;
    if (dynamic_cast<const ProductPropCategory*>(P.get())) {
      o.exhaustive_limit = 200000;
      o.samples = 20000;
    }
    bool ok = check_fa(*P, o).ok;
    verified[P.get()] = ok;
    return ok;
  }
};

}  // namespace

int main() {
  auto t_suite = Clock::now();
  Fixtures fx_;
  Workspace& ws = fx_.ws;

  // 1. fuzzy quantifier values, exact
  criterion(1, [&](std::ostringstream& note) {
    auto t = Clock::now();
    const Structure& S = ws.structure(fx("fuzzy.structure"));
    auto closed = [&](const std::string& q) {
      Formula g = Formula::quant(q, {"y", "τ"}, Formula::rel("R", {Term::var("y")}));
      return S.host->format(S.host->base().terminal(), interpret_formula(S, g, {}));
    };
    std::string om = closed("Ωprod"), all = closed(kForall), ex = closed(kExists);
    double secs = since(t);
    note << "Ωprod = " << om << ", forall = " << all << ", exists = " << ex << " (want 1/4, 1/2, 1/2 exactly; < "
         << kFuzzySeconds << "s)";
    return om == "(vals 1/4)" && all == "(vals 1/2)" && ex == "(vals 1/2)" && secs < kFuzzySeconds;
  });

  // 2. exactly-two quantifier fails Condition 5; powerset and fuzzy hosts pass
  criterion(2, [&](std::ostringstream& note) {
    auto t = Clock::now();
    FaReport m = check_fa(*ws.propcat(fx("mostowski2.pc")));
    FaReport p = check_fa(*ws.propcat(fx("powerset.pc")));
    FaReport f = check_fa(*ws.propcat(fx("fuzzy.pc")));
    double secs = since(t);
    bool witness = !m.violations.empty() && m.violations[0].condition.rfind("C5", 0) == 0 &&
                   !m.violations[0].witness.empty();
    note << "mostowski2 " << (m.ok ? "accepted" : "rejected");
    if (witness) note << " at " << m.violations[0].show();
    note << "; powerset " << (p.ok ? "ok" : "violated") << "; fuzzy " << (f.ok ? "ok" : "violated")
         << (f.used_probe ? " (probe)" : "") << " (< " << kFaSeconds << "s)";
    return !m.ok && witness && m.has_violation("C5") && p.ok && f.ok && secs < kFaSeconds;
  });

  // 3. rule soundness sweep
  criterion(3, [&](std::ostringstream& note) {
    auto t = Clock::now();
    SoundnessOptions o;
    o.trials = kTrials;
    int violations = 0, nonvacuous = 0, runs = 0;
    for (const char* h : {"powerset.pc", "luk5.pc", "pow_x_luk5.pc"}) {
      SoundnessReport r = soundness_sweep(ws.propcat(fx(h)), lm_rules(), o);
      for (const auto& s : r.rules) {
        violations += s.violations;
        nonvacuous += s.nonvacuous;
        runs += s.trials;
        if (s.violations) note << " " << h << ":" << rule_name(s.rule);
      }
    }
    o.converse = true;
    SoundnessReport adj = soundness_sweep(ws.propcat(fx("powerset.pc")), adjoint_rules(), o);
    for (const auto& s : adj.rules) {
      violations += s.violations;
      nonvacuous += s.nonvacuous;
      runs += s.trials;
      if (s.violations) note << " powerset:" << rule_name(s.rule);
    }
    double secs = since(t);
    note << " " << runs << " instances, " << nonvacuous << " non-vacuous, " << violations
         << " violations over powerset, luk5, powerset x luk5 (< " << kSweepSeconds << "s)";
    return violations == 0 && secs < kSweepSeconds;
  });

  // 4. transport along every fixture morphism, from every structure in its source
  criterion(4, [&](std::ostringstream& note) {
    int pairs = 0, bad = 0;
    for (const auto& m : fx_.morphisms) {
      MorphPtr F = ws.morphism(m);
      for (const auto& s : fx_.structures) {
        const Structure& S = ws.structure(s);
        if (S.host != F->source()) continue;
        ++pairs;
        Language L = S.host->language().meet(F->target()->language());
        FaReport r = check_transport(*F, S, enumerate_assertions(S.sg, L, budget()));
        if (!r.ok) {
          ++bad;
          note << " " << base(m) << "/" << base(s) << ": " << r.violations[0].show();
        }
      }
    }
    note << " " << pairs << " morphism/structure pairs, " << bad << " with violations";
    return pairs >= 10 && bad == 0;
  });

  // 5. factorization and completion
  criterion(5, [&](std::ostringstream& note) {
    int factored = 0, bad = 0;
    for (const auto& m : fx_.morphisms) {
      MorphPtr F = ws.morphism(m);
      if (!is_injective_on_objects(*F)) continue;
      Factorization fz = factorize(F);
      ++factored;
      if (morphism_difference(*compose_morphisms(fz.psi, fz.epsilon), *F) ||
          !kernel_equal(kernel(*fz.epsilon), kernel(*F))) {
        ++bad;
        note << " " << base(m);
      }
    }
    MorphPtr K = ws.morphism(fx("indicator.mor"));
    bool complete_ok = true;
    int cases = 0;
    for (const auto& m : fx_.morphisms) {
      MorphPtr F = ws.morphism(m);
      if (F->source() != K->source()) continue;
      ++cases;
      bool leq = kernel_leq(kernel(*K), kernel(*F));
      Completion a = complete_through(F, K, PreimageOrder::Forward);
      Completion b = complete_through(F, K, PreimageOrder::Reverse);
      bool succeeded = a.H != nullptr;
      if (succeeded != leq || (b.H != nullptr) != leq) complete_ok = false;
      if (succeeded && (morphism_difference(*a.H, *b.H) || morphism_difference(*compose_morphisms(a.H, K), *F)))
        complete_ok = false;
    }
    bool success_seen = complete_through(ws.morphism(fx("top_test.mor")), K).H != nullptr;
    bool obstruction_seen = complete_through(ws.morphism(fx("id_luk5.mor")), K).obstruction.has_value();
    note << " factorized " << factored << " object-injective morphisms, " << bad << " mismatches; completion through "
         << "the indicator on " << cases << " morphisms " << (complete_ok ? "agrees" : "disagrees")
         << " with kernel order, success and obstruction both exercised";
    return factored >= 10 && bad == 0 && complete_ok && success_seen && obstruction_seen;
  });

  // 6. products
  criterion(6, [&](std::ostringstream& note) {
    auto empty = std::dynamic_pointer_cast<const ProductPropCategory>(ws.propcat(fx("empty.pc")));
    const Structure& A = ws.structure(fx("swap.structure"));
    Structure E = structure_product(empty, A.sg, {});
    AssertionSpace se = enumerate_assertions(E.sg, empty->language(), budget());
    SatVector ve = satisfaction_vector(E, se);
    std::int64_t empty_fail = 0;
    for (size_t i = 0; i < se.size(); ++i) empty_fail += !(ve.defined[i] && ve.sat[i]);
    std::int64_t compared = 0, mismatches = 0;
    std::pair<const char*, std::vector<const char*>> cases[] = {
        {"pow_x_luk5.pc", {"swap.structure", "luk5.structure"}},
        {"pow_x_pow.pc", {"swap.structure", "powerset_const.structure"}}};
    for (auto& [h, parts] : cases) {
      auto host = std::dynamic_pointer_cast<const ProductPropCategory>(ws.propcat(fx(h)));
      const Structure& X = ws.structure(fx(parts[0]));
      const Structure& Y = ws.structure(fx(parts[1]));
      Structure P = structure_product(host, {X, Y});
      AssertionSpace sp = enumerate_assertions(P.sg, host->language(), budget());
      SatVector vx = satisfaction_vector(X, sp), vy = satisfaction_vector(Y, sp), vp = satisfaction_vector(P, sp);
      for (size_t i = 0; i < sp.size(); ++i) {
        if (!vx.defined[i] || !vy.defined[i] || !vp.defined[i]) continue;
        ++compared;
        mismatches += static_cast<bool>(vp.sat[i]) != (vx.sat[i] && vy.sat[i]);
      }
    }
    note << " empty product: " << se.size() - empty_fail << "/" << se.size() << " satisfied; binary products: "
         << compared << " assertions compared, " << mismatches << " differ from componentwise conjunction";
    return empty_fail == 0 && se.size() > 0 && compared > 0 && mismatches == 0;
  });

  // 7. HSP directions
  criterion(7, [&](std::ostringstream& note) {
    std::int64_t checks = 0, bad = 0;
    auto common = [&](const std::vector<const Structure*>& in, const Structure& out, const Language& L) {
      AssertionSpace sp = enumerate_assertions(out.sg, L, budget());
      std::vector<SatVector> vs;
      for (const auto* s : in) vs.push_back(satisfaction_vector(*s, sp));
      SatVector vo = satisfaction_vector(out, sp);
      for (size_t i = 0; i < sp.size(); ++i) {
        bool all = vo.defined[i];
        for (const auto& v : vs) all = all && v.defined[i] && v.sat[i];
        if (!all) continue;
        ++checks;
        if (!vo.sat[i]) ++bad;
      }
    };
    int images = 0, subs = 0, prods = 0;
    for (const auto& m : fx_.morphisms) {
      MorphPtr F = ws.morphism(m);
      bool sub = is_subprop_morphism(*F);
      for (const auto& s : fx_.structures) {
        const Structure& S = ws.structure(s);
        if (S.host != F->source()) continue;
        Language L = S.host->language().meet(F->target()->language());
        Structure H = hom_image(*F, S);
        common({&S}, H, L);
        ++images;
        if (sub) {
          Structure back = submodel(*F, S, H);
          common({&H}, back, L);
          ++subs;
        }
      }
    }
    for (const char* h : {"pow_x_luk5.pc", "pow_x_pow.pc"}) {
      auto host = std::dynamic_pointer_cast<const ProductPropCategory>(ws.propcat(fx(h)));
      for (const auto& a : fx_.structures)
        for (const auto& b : fx_.structures) {
          const Structure& X = ws.structure(a);
          const Structure& Y = ws.structure(b);
          if (X.host != host->part_ptr(0) || Y.host != host->part_ptr(1) || !(X.sg == Y.sg)) continue;
          common({&X, &Y}, structure_product(host, {X, Y}), host->language());
          ++prods;
        }
    }
    note << " " << images << " images, " << subs << " submodels, " << prods << " products; " << checks
         << " common assertions checked, " << bad << " lost";
    return images > 0 && subs > 0 && prods > 0 && bad == 0;
  });

  // 8. proof layer
  criterion(8, [&](std::ostringstream& note) {
    const Theory& T = ws.theory(fx("symmetric.theory"));
    std::vector<const Structure*> models;
    for (const auto& s : fx_.structures) {
      const Structure& S = ws.structure(s);
      if (!(S.sg == T.sg) || !fx_.host_verifies(S.host)) continue;
      bool model = true;
      for (const auto& a : T.axioms) model = model && holds(S, a);
      if (model) models.push_back(&S);
    }
    // the symmetric closure of swap is a model in every fixture host that can host it
    int checked = 0, bad = 0, proofs = 0;
    for (const auto& p : files(".proof")) {
      ProofNode pr = ws.proof(p, T);
      Assertion c = check_proof(T, lm_with_adjoints(), pr);
      ++proofs;
      for (const auto* S : models) {
        if (context_of(c).size() > 2) continue;  // beyond the fixture hosts' product depth
        ++checked;
        if (!holds(*S, c)) {
          ++bad;
          note << " " << base(p) << " fails in " << S->name;
        }
      }
    }
    int found = 0, rechecked = 0;
    Context ctx{{"x", "s"}, {"y", "s"}};
    Formula rxy = Formula::rel("R", {Term::var("x"), Term::var("y")});
    Formula ryx = Formula::rel("R", {Term::var("y"), Term::var("x")});
    std::vector<Assertion> goals = {Sequent{ctx, {rxy}, rxy}, Sequent{ctx, {rxy}, ryx},
                                    Sequent{ctx, {rxy}, Formula::tensor(ryx, Formula::unit())},
                                    Sequent{ctx, {rxy, Formula::unit()}, ryx}};
    for (const auto& g : goals) {
      auto p = derive_bounded(T, lm_rules(), g, 4);
      if (!p) continue;
      ++found;
      try {
        if (alpha_eq(check_proof(T, lm_rules(), *p), g)) ++rechecked;
      } catch (const ProofError&) {
      }
    }
    note << " " << proofs << " fixture proofs against " << models.size() << " verified models: " << checked
         << " checks, " << bad << " failures; derive_bounded found " << found << ", re-checked " << rechecked;
    return proofs >= 5 && !models.empty() && bad == 0 && found > 0 && found == rechecked;
  });

  // 9. round trip over the corpus
  criterion(9, [&](std::ostringstream& note) {
    int n = 0, bad = 0;
    const Theory& sym = ws.theory(fx("symmetric.theory"));
    auto dir = [](const std::string& p) { return fs::path(p).parent_path().string(); };
    for (const auto& e : fs::recursive_directory_iterator(PCAT_FIXTURES)) {
      if (!e.is_regular_file()) continue;
      std::string p = e.path().string();
      FileKind k = file_kind(parse_sexpr(read_file(p)));
      bool ok = true;
      try {
        switch (k) {
          case FileKind::Theory: {
            const Theory& T = ws.theory(p);
            ok = theories_alpha_equal(T, read_theory(parse_sexpr(print_theory(T))));
            break;
          }
          case FileKind::PropCat: {
            PropPtr P = ws.propcat(p);
            PropPtr Q = ws.propcat_from(parse_sexpr(ws.print_propcat(p)), dir(p));
            ok = P->base().object_count() == Q->base().object_count() &&
                 P->base().morphism_count() == Q->base().morphism_count() && P->language() == Q->language();
            break;
          }
          case FileKind::Structure: {
            const Structure& S = ws.structure(p);
            ok = !structure_difference(S, ws.structure_from(parse_sexpr(ws.print_structure(S)), dir(p)));
            break;
          }
          case FileKind::Morphism: {
            MorphPtr F = ws.morphism(p);
            ok = !morphism_difference(*F, *ws.morphism_from(parse_sexpr(ws.print_morphism(p)), dir(p)));
            break;
          }
          case FileKind::Interp: {
            const auto& h = ws.interpretation(p);
            auto h2 = ws.interpretation_from(parse_sexpr(ws.print_interpretation(p)), dir(p));
            ok = h.sorts == h2.sorts && h.source == h2.source && h.target == h2.target;
            for (const auto& [r, img] : h.rels) ok = ok && alpha_eq(img.phi, h2.rels.at(r).phi);
            break;
          }
          case FileKind::Proof: {
            ProofNode pr = ws.proof(p, sym);
            ok = proofs_alpha_equal(pr, read_proof(parse_sexpr(print_proof(pr)), sym.sg, sym.lang));
            break;
          }
          case FileKind::Probe:
          case FileKind::Unknown:
            continue;
        }
      } catch (const ParseError&) {
        // rejected at load time on purpose
        if (p.find("/bad/") == std::string::npos) ok = false;
        else continue;
      }
      ++n;
      if (!ok) {
        ++bad;
        note << " " << base(p);
      }
    }
    note << " " << n << " files, " << bad << " differ after print and parse";
    return n >= 30 && bad == 0;
  });

  double total = since(t_suite);
  report(10, total < kSuiteSeconds,
         "acceptance run " + std::to_string(static_cast<int>(total)) + "s (< " +
             std::to_string(static_cast<int>(kSuiteSeconds)) + "s; unit suite timed separately by ctest)",
         total);
  return failures == 0 ? 0 : 1;
}
