// SPDX-License-Identifier: Apache-2.0
// pcat: command-line front end over the library.
#include <chrono>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "pcat/io.hpp"
#include "pcat/report.hpp"
#include "pcat/soundness.hpp"

using namespace pcat;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int trials = 200;
  std::string budget = "ctx=3,term=3,fml=3,ante=2";
  std::string format = "text";
  std::string probe;
};

RuleSet rules_named(const std::string& s) {
  if (s == "eq") return equational_rules();
  if (s == "lm") return lm_rules();
  if (s == "adj") return adjoint_rules();
  if (s == "all") return lm_with_adjoints();
  RuleSet out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto r = rule_from_name(item);
    if (!r) throw std::invalid_argument("unknown rule or rule set " + item + " (use eq, lm, adj, all or rule names)");
    out.insert(*r);
  }
  return out;
}

// common assertions of the inputs must hold in the output
void check_common(Report& rep, const std::string& name, const std::vector<const Structure*>& inputs,
                  const Structure& out, const AssertionSpace& sp) {
  std::vector<SatVector> vs;
  for (const auto* s : inputs) vs.push_back(satisfaction_vector(*s, sp));
  SatVector vo = satisfaction_vector(out, sp);
  std::int64_t common = 0, bad = 0;
  for (size_t i = 0; i < sp.size(); ++i) {
    bool all = vo.defined[i];
    for (const auto& v : vs) all = all && v.defined[i] && v.sat[i];
    if (!all) continue;
    ++common;
    if (!vo.sat[i]) {
      ++bad;
      if (bad <= 5) rep.witnesses.push_back({name, "hsp.common", show(sp.assertion(i)), "holds in every input", "fails"});
    }
  }
  rep.stats.push_back({name, static_cast<std::int64_t>(sp.size()), common, !sp.truncated, 0});
  rep.verdict(name, bad == 0, std::to_string(common) + " common assertions" + (sp.truncated ? ", budget truncated" : ""));
}

std::string kernel_text(const Kernel& k) {
  const PropCategory& P = *k.source;
  const Category& C = P.base();
  std::ostringstream os;
  std::map<ObjId, std::vector<ObjId>> oc;
  for (ObjId a = 0; a < static_cast<ObjId>(k.obj_class.size()); ++a) oc[k.obj_class[a]].push_back(a);
  os << "objects: " << oc.size() << " classes of " << k.obj_class.size() << "\n";
  for (const auto& [r, xs] : oc) {
    if (xs.size() < 2) continue;
    os << "  {";
    for (size_t i = 0; i < xs.size(); ++i) os << (i ? " " : "") << C.object_name(xs[i]);
    os << "}\n";
  }
  std::int64_t identified = 0;
  for (MorId f = 0; f < static_cast<MorId>(k.mor_class.size()); ++f) identified += k.mor_class[f] != f;
  os << "morphisms: " << identified << " of " << k.mor_class.size() << " identified with an earlier one\n";
  for (ObjId c = 0; c < static_cast<ObjId>(k.elems.size()); ++c) {
    const auto& els = k.elems[c];
    std::vector<int> cls(els.size(), -1);
    std::vector<std::vector<size_t>> groups;
    for (size_t i = 0; i < els.size(); ++i) {
      if (cls[i] >= 0) continue;
      cls[i] = static_cast<int>(groups.size());
      groups.push_back({i});
      for (size_t j = i + 1; j < els.size(); ++j)
        if (cls[j] < 0 && k.fiber_related(c, i, c, j) && k.fiber_related(c, j, c, i)) {
          cls[j] = cls[i];
          groups.back().push_back(j);
        }
    }
    if (groups.size() == els.size()) continue;
    os << "fiber over " << C.object_name(c) << ": " << groups.size() << " classes of " << els.size() << "\n";
    int shown = 0;
    for (const auto& g : groups) {
      if (g.size() < 2 || shown++ >= 8) continue;
      os << "  {";
      for (size_t i = 0; i < g.size() && i < 6; ++i) os << (i ? " " : "") << P.format(c, els[g[i]]);
      if (g.size() > 6) os << " ... " << g.size() - 6 << " more";
      os << "}\n";
    }
  }
  return os.str();
}

std::string theory_text(const std::vector<Assertion>& as, size_t cap) {
  std::string s;
  for (size_t i = 0; i < as.size() && i < cap; ++i) s += show(as[i]) + "\n";
  if (as.size() > cap) s += "... " + std::to_string(as.size() - cap) + " more\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcat: prop-categorical semantics workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed for randomized sweeps and sampled checks");
  app.add_option("--trials", g.trials, "trials per rule for randomized sweeps");
  app.add_option("--budget", g.budget, "enumeration budget, e.g. ctx=3,term=3,fml=3,ante=2[,limit=N]");
  app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"text", "records"}));
  app.add_option("--probe", g.probe, "probe file for symbolic fibers");

  std::vector<std::string> args;
  std::string ctx_text = "(ctx)", rules = "all";
  int depth = 4;
  bool converse = false, theory_of_flag = false, reference = false;
  std::int64_t limit = -1;
  std::vector<std::string> assertions;

  std::map<std::string, CLI::App*> sub;
  auto add = [&](const std::string& name, const std::string& help, const std::string& pos_help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("args", args, pos_help)->required();
    sub[name] = s;
    return s;
  };
  add("check-pc", "verify a prop-category against the six conditions", "PC")
      ->add_option("--exhaustive-limit", limit, "per-condition exhaustive limit before sampling");
  sub["check-pc"]->add_flag("--reference", reference, "use the serial element-level engine");
  add("check-mor", "verify a morphism of prop-categories", "MOR")
      ->add_option("--exhaustive-limit", limit, "per-condition exhaustive limit before sampling");
  add("eval", "interpret a term or formula in a structure", "STRUCTURE EXPR")
      ->add_option("--ctx", ctx_text, "context, e.g. \"(ctx (x s) (y s))\"");
  add("sat", "check a structure against a theory or assertions", "STRUCTURE [THEORY]")
      ->add_option("--assert", assertions, "assertion in s-expression form");
  sub["sat"]->add_flag("--theory-of", theory_of_flag, "list the bounded theory of the structure");
  add("prove", "bounded proof search", "THEORY GOAL")->add_option("--depth", depth, "maximal proof height");
  sub["prove"]->add_option("--rules", rules, "eq, lm, adj, all or a comma-separated rule list");
  add("checkproof", "check a proof against a theory", "THEORY PROOF")
      ->add_option("--rules", rules, "eq, lm, adj, all or a comma-separated rule list");
  add("transport", "transport a structure along a morphism", "MOR STRUCTURE");
  add("kernel", "kernel of a morphism; with two, compare kernels", "MOR [MOR2]");
  add("product", "product of structures in a product host", "HOST STRUCTURE...");
  add("factor", "image factorization of a morphism", "MOR");
  add("complete", "complete F through K when ker K <= ker F", "F K");
  add("hsp", "closure directions: image MOR S | sub IOTA S_SUB S | product HOST S...", "MODE ARGS...");
  add("internal", "internal structure of a prop-category", "PC");
  add("translate", "translate a theory along a signature interpretation", "INTERP THEORY [STRUCTURE]");
  add("soundness", "randomized rule-soundness sweep", "HOST...")
      ->add_option("--rules", rules, "eq, lm, adj, all or a comma-separated rule list");
  sub["soundness"]->add_flag("--converse", converse, "also check conclusion => premise for one-premise rules");

  CLI11_PARSE(app, argc, argv);

  std::string cmd;
  for (auto& [n, s] : sub)
    if (s->parsed()) cmd = n;

  Report rep;
  rep.command = cmd;
  rep.inputs = args;
  auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    Probe probe;
    if (!g.probe.empty()) probe = read_probe(parse_sexpr(read_file(g.probe)));
    Workspace ws(probe);
    Budget budget = Budget::parse(g.budget);
    auto need = [&](size_t lo, size_t hi) {
      if (args.size() < lo || args.size() > hi)
        throw std::invalid_argument(cmd + " takes " + std::to_string(lo) + (hi > lo ? " or more" : "") + " arguments");
    };

    if (cmd == "check-pc") {
      need(1, 1);
      PropPtr P = ws.propcat(args[0]);
      CheckOptions o;
      o.seed = g.seed;
      o.probe = probe;
      o.exhaustive_limit = limit;
      rep.output("prop-category", P->describe());
      rep.add("FA", reference ? check_fa_reference(*P, o) : check_fa(*P, o));
    } else if (cmd == "check-mor") {
      need(1, 1);
      MorphPtr F = ws.morphism(args[0]);
      MorphismCheckOptions o;
      o.seed = g.seed;
      o.probe = probe;
      if (limit >= 0) o.exhaustive_limit = limit;
      rep.output("morphism", F->describe() + ": " + F->source()->describe() + " -> " + F->target()->describe());
      rep.add("morphism", check_morphism(*F, o));
    } else if (cmd == "eval") {
      need(2, 2);
      const Structure& S = ws.structure(args[0]);
      Context ctx = read_context(parse_sexpr(ctx_text));
      SExpr e = parse_sexpr(args[1]);
      std::optional<Formula> f;
      try {
        f = read_formula(e, S.sg, S.host->language());
        wf_formula(S.sg, S.host->language(), ctx, *f);
      } catch (const std::exception&) {
        f.reset();
      }
      if (f) {
        Elem r = interpret_formula(S, *f, ctx);
        ObjId c = context_object(S, ctx);
        const auto* fp = dynamic_cast<const FunctionPropCategory*>(S.host.get());
        if (fp && r.size() == 1 && fp->domain().describe() != "bool") rep.output("value", fp->domain().format(r[0]));
        else rep.output("value", S.host->format(c, r));
        rep.output("fiber", S.host->base().object_name(c));
      } else {
        Term t = read_term(e);
        wf_term(S.sg, ctx, t);
        rep.output("morphism", S.host->base().morphism_name(interpret_term(S, t, ctx)));
      }
    } else if (cmd == "sat") {
      need(1, 2);
      const Structure& S = ws.structure(args[0]);
      std::vector<Assertion> as;
      if (args.size() == 2) {
        const Theory& T = ws.theory(args[1]);
        if (!(T.sg == S.sg)) throw std::invalid_argument("structure and theory have different signatures");
        as = T.axioms;
      }
      for (const auto& a : assertions) as.push_back(read_assertion(parse_sexpr(a), S.sg, S.host->language()));
      for (const auto& a : as) {
        SatisfactionReport r = satisfies(S, a);
        rep.verdict(show(a), r.verdict, "over " + r.fiber);
        if (!r.verdict) rep.witnesses.push_back({show(a), "sat", "fiber " + r.fiber, r.left, r.right});
      }
      if (theory_of_flag) {
        TheoryResult th = theory_of(S, budget);
        rep.output("budget", budget.show());
        rep.output("considered", std::to_string(th.considered));
        rep.output("skipped", std::to_string(th.skipped));
        rep.output("truncated", th.truncated ? "yes" : "no");
        rep.output("theory", theory_text(th.assertions, 200));
      }
      if (as.empty() && !theory_of_flag) throw std::invalid_argument("sat needs a theory, --assert or --theory-of");
    } else if (cmd == "prove") {
      need(2, 2);
      const Theory& T = ws.theory(args[0]);
      Assertion goal = read_assertion(parse_sexpr(args[1]), T.sg, T.lang);
      auto p = derive_bounded(T, rules_named(rules), goal, depth);
      if (p) {
        check_proof(T, rules_named(rules), *p);
        rep.output("proof", print_proof(*p));
      }
      rep.verdict("derivable within height " + std::to_string(depth), p.has_value(), p ? "found, re-checked" : "not found");
    } else if (cmd == "checkproof") {
      need(2, 2);
      const Theory& T = ws.theory(args[0]);
      ProofNode p = ws.proof(args[1], T);
      try {
        Assertion c = check_proof(T, rules_named(rules), p);
        rep.output("conclusion", show(c));
        rep.verdict("proof", true, "height " + std::to_string(proof_height(p)) + ", " + std::to_string(proof_size(p)) + " nodes");
      } catch (const ProofError& e) {
        rep.verdict("proof", false, e.what());
        std::string path;
        for (int k : e.path()) path += "." + std::to_string(k);
        rep.witnesses.push_back({"proof", rule_name(e.rule()), "at root" + path + ": " + e.reason(), "", ""});
      }
    } else if (cmd == "transport") {
      need(2, 2);
      MorphPtr F = ws.morphism(args[0]);
      const Structure& S = ws.structure(args[1]);
      Structure FS = transport_structure(*F, S);
      rep.output("structure", ws.print_structure(FS));
      AssertionSpace sp = enumerate_assertions(S.sg, S.host->language().meet(F->target()->language()), budget);
      rep.add("transport", check_transport(*F, S, sp));
    } else if (cmd == "kernel") {
      need(1, 2);
      MorphPtr F = ws.morphism(args[0]);
      Kernel k = kernel(*F, probe);
      rep.output("kernel", kernel_text(k));
      if (args.size() == 2) {
        Kernel k2 = kernel(*ws.morphism(args[1]), probe);
        auto e = kernel_excess(k, k2);
        rep.verdict("ker " + args[0] + " <= ker " + args[1], !e, e ? *e : "");
      }
    } else if (cmd == "product") {
      need(1, 64);
      auto host = std::dynamic_pointer_cast<const ProductPropCategory>(ws.propcat(args[0]));
      if (!host) throw std::invalid_argument(args[0] + " is not a product prop-category");
      std::vector<Structure> parts;
      std::vector<const Structure*> ptrs;
      for (size_t i = 1; i < args.size(); ++i) {
        parts.push_back(ws.structure(args[i]));
        ptrs.push_back(&ws.structure(args[i]));
      }
      if (parts.empty()) throw std::invalid_argument("the empty product needs a signature; use hsp product with structures");
      Structure P = structure_product(host, parts);
      rep.output("structure", ws.print_structure(P));
      AssertionSpace sp = enumerate_assertions(P.sg, host->language(), budget);
      std::vector<SatVector> vs;
      for (const auto* s : ptrs) vs.push_back(satisfaction_vector(*s, sp));
      SatVector vp = satisfaction_vector(P, sp);
      std::int64_t compared = 0, bad = 0;
      for (size_t i = 0; i < sp.size(); ++i) {
        bool defined = vp.defined[i], all = true;
        for (const auto& v : vs) {
          defined = defined && v.defined[i];
          all = all && v.sat[i];
        }
        if (!defined) continue;
        ++compared;
        if (static_cast<bool>(vp.sat[i]) != all && ++bad <= 5)
          rep.witnesses.push_back({"componentwise", "product", show(sp.assertion(i)), all ? "all factors" : "some factor fails",
                                   vp.sat[i] ? "holds" : "fails"});
      }
      rep.verdict("componentwise", bad == 0, std::to_string(compared) + " assertions compared");
    } else if (cmd == "factor") {
      need(1, 1);
      MorphPtr F = ws.morphism(args[0]);
      Factorization fz = factorize(F);
      rep.output("image", std::to_string(fz.image->base().object_count()) + " objects");
      auto d = morphism_difference(*compose_morphisms(fz.psi, fz.epsilon), *F, probe);
      rep.verdict("psi o epsilon = F", !d, d ? *d : "");
      rep.verdict("ker epsilon = ker F", kernel_equal(kernel(*fz.epsilon, probe), kernel(*F, probe)));
      rep.verdict("psi is a subprop-morphism", is_subprop_morphism(*fz.psi, probe));
    } else if (cmd == "complete") {
      need(2, 2);
      MorphPtr F = ws.morphism(args[0]), K = ws.morphism(args[1]);
      Completion c = complete_through(F, K);
      if (c.H) {
        Completion r = complete_through(F, K, PreimageOrder::Reverse);
        auto back = morphism_difference(*compose_morphisms(c.H, K), *F, probe);
        auto uniq = r.H ? morphism_difference(*c.H, *r.H, probe) : std::optional<std::string>("reverse order failed");
        std::ostringstream os;
        const Category& D = K->target()->base();
        for (ObjId o = 0; o < D.object_count(); ++o)
          os << D.object_name(o) << " -> " << F->target()->base().object_name(c.H->obj(o)) << "\n";
        rep.output("H on objects", os.str());
        rep.verdict("H o K = F", !back, back ? *back : "");
        rep.verdict("H independent of preimage order", !uniq, uniq ? *uniq : "");
      } else {
        rep.verdict("ker K <= ker F", false, *c.obstruction);
      }
    } else if (cmd == "hsp") {
      need(2, 64);
      std::string m = args[0];
      if (m == "image") {
        need(3, 3);
        const Structure& S = ws.structure(args[2]);
        Structure H = hom_image(*ws.morphism(args[1]), S);
        rep.output("structure", ws.print_structure(H));
        check_common(rep, "image", {&S}, H, enumerate_assertions(S.sg, H.host->language().meet(S.host->language()), budget));
      } else if (m == "sub") {
        need(4, 4);
        const Structure& Ssub = ws.structure(args[2]);
        const Structure& S = ws.structure(args[3]);
        Structure out = submodel(*ws.morphism(args[1]), Ssub, S);
        check_common(rep, "submodel", {&S}, out, enumerate_assertions(S.sg, S.host->language().meet(out.host->language()), budget));
      } else if (m == "product") {
        auto host = std::dynamic_pointer_cast<const ProductPropCategory>(ws.propcat(args[1]));
        if (!host) throw std::invalid_argument(args[1] + " is not a product prop-category");
        std::vector<Structure> parts;
        std::vector<const Structure*> ptrs;
        for (size_t i = 2; i < args.size(); ++i) {
          parts.push_back(ws.structure(args[i]));
          ptrs.push_back(&ws.structure(args[i]));
        }
        if (parts.empty()) throw std::invalid_argument("hsp product needs at least one structure");
        Structure P = structure_product(host, parts);
        check_common(rep, "product", ptrs, P, enumerate_assertions(P.sg, host->language(), budget));
      } else {
        throw std::invalid_argument("hsp mode must be image, sub or product");
      }
    } else if (cmd == "internal") {
      need(1, 1);
      PropPtr P = ws.propcat(args[0]);
      Structure S = internal_structure(P);
      rep.output("sorts", std::to_string(S.sg.sorts.size()));
      rep.output("function symbols", std::to_string(S.sg.functions.size()));
      rep.output("relation symbols", std::to_string(S.sg.relations.size()));
      std::int64_t bad = 0;
      for (const auto& [r, e] : S.rels) {
        Context c{{"x", S.sg.relations.at(r).args[0]}};
        if (interpret_formula(S, Formula::rel(r, {Term::var("x")}), c) != e) ++bad;
      }
      rep.verdict("relation symbols denote their elements", bad == 0);
    } else if (cmd == "translate") {
      need(2, 3);
      const auto& h = ws.interpretation(args[0]);
      const Theory& T = ws.theory(args[1]);
      Theory T2 = translate_theory(h, T);
      rep.output("theory", print_theory(T2));
      if (args.size() == 3) {
        const Structure& S = ws.structure(args[2]);
        Structure Sh = precompose(S, h);
        for (const auto& a : T.axioms) {
          bool lhs = holds(Sh, a), rhs = true;
          for (const auto& t : translate_assertion(h, a)) rhs = rhs && holds(S, t);
          rep.verdict("S o h |= a iff S |= h(a): " + show(a), lhs == rhs, lhs ? "both hold" : "");
        }
      }
    } else if (cmd == "soundness") {
      need(1, 64);
      SoundnessOptions o;
      o.trials = g.trials;
      o.seed = g.seed;
      o.converse = converse;
      for (const auto& h : args) {
        SoundnessReport r = soundness_sweep(ws.propcat(h), rules_named(rules), o);
        for (const auto& s : r.rules) {
          std::string name = h + " " + rule_name(s.rule);
          rep.stats.push_back({name, s.trials, s.nonvacuous, true, 0});
          rep.verdict(name, s.violations == 0,
                      std::to_string(s.nonvacuous) + "/" + std::to_string(s.trials) + " non-vacuous");
          for (const auto& w : s.witnesses) rep.witnesses.push_back({name, rule_name(s.rule), w, "", ""});
        }
      }
    }
    code = rep.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "pcat " << cmd << ": " << e.what() << "\n";
    return 2;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (g.format == "records" ? rep.records() : rep.text());
  return code;
}
