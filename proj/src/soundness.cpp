// SPDX-License-Identifier: Apache-2.0
#include "pcat/soundness.hpp"

#include <algorithm>
#include <stdexcept>

namespace pcat {

Signature sweep_signature() {
  Signature sg;
  sg.add_sort("s");
  sg.functions["c"] = {{}, "s"};
  sg.functions["f"] = {{"s"}, "s"};
  sg.relations["P"] = {{"s"}};
  sg.relations["R"] = {{"s", "s"}};
  return sg;
}

ObjId sweep_sort_object(const PropCategory& host) {
  const Category& C = host.base();
  ObjId best = -1;
  MorId best_size = -1;
  for (ObjId c = 0; c < C.object_count(); ++c) {
    if (c == C.terminal() || !C.product(c, c)) continue;
    MorId n = C.hom_size(c, c);
    if (n > best_size) {
      best = c;
      best_size = n;
    }
  }
  if (best < 0) throw std::invalid_argument("host has no non-terminal object with a designated square");
  return best;
}

namespace {

template <class T>
const T& pick(const std::vector<T>& xs, std::mt19937_64& rng) {
  return xs[std::uniform_int_distribution<size_t>(0, xs.size() - 1)(rng)];
}

int coin(std::mt19937_64& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

Elem random_element(const PropCategory& P, ObjId c, std::mt19937_64& rng) {
  auto n = P.fiber_size(c);
  if (!n) throw std::invalid_argument("random structures need finite fibers");
  return P.fiber_element(c, std::uniform_int_distribution<std::int64_t>(0, *n - 1)(rng));
}

}  // namespace

Structure random_structure(PropPtr host, const Signature& sg, ObjId sort_obj, std::mt19937_64& rng) {
  Structure S;
  S.name = "random";
  S.host = host;
  S.sg = sg;
  const Category& C = host->base();
  for (const auto& s : sg.sorts) S.sorts[s] = sort_obj;
  auto dom = [&](const std::vector<std::string>& args) {
    std::vector<ObjId> xs;
    for (const auto& a : args) xs.push_back(S.sorts.at(a));
    return product_of_or_throw(C, xs);
  };
  for (const auto& [f, d] : sg.functions) {
    ObjId a = dom(d.args), b = S.sorts.at(d.result);
    MorId n = C.hom_size(a, b);
    S.fns[f] = C.hom_at(a, b, std::uniform_int_distribution<MorId>(0, n - 1)(rng));
  }
  for (const auto& [r, d] : sg.relations) S.rels[r] = random_element(*host, dom(d.args), rng);
  return S;
}

namespace {

const char* const kNames[] = {"x", "y", "z", "w", "v", "u"};

std::string fresh(const Context& ctx) {
  for (const char* n : kNames)
    if (!lookup(ctx, n)) return n;
  throw std::logic_error("out of variable names");
}

Context make_ctx(int n) {
  Context c;
  for (int i = 0; i < n; ++i) c.push_back({kNames[i], "s"});
  return c;
}

class Gen {
 public:
  Gen(const Signature& sg, const Language& lang, int max_ctx, std::mt19937_64& rng)
      : sg_(sg), lang_(lang), max_(max_ctx), rng_(rng) {
    for (const auto& [c, n] : lang.connectives) conns_.push_back({c, n});
    for (const auto& q : lang.quantifiers) quants_.push_back(q);
  }

  Term term(const Context& ctx, int depth) {
    int k = coin(rng_, 4);
    if (k == 0 || ctx.empty()) {
      if (depth > 0 && coin(rng_, 2)) return Term::app("f", {term(ctx, depth - 1)});
      if (!ctx.empty() && coin(rng_, 2)) return Term::var(pick(ctx, rng_).var);
      return Term::app("c");
    }
    if (k == 1 && depth > 0) return Term::app("f", {term(ctx, depth - 1)});
    return Term::var(pick(ctx, rng_).var);
  }

  Formula atom(const Context& ctx) {
    switch (coin(rng_, 4)) {
      case 0: return Formula::rel("P", {term(ctx, 1)});
      case 1: return Formula::eq("s", term(ctx, 1), term(ctx, 1));
      case 2: {
        std::vector<std::string> nullary;
        for (const auto& [c, n] : conns_)
          if (n == 0) nullary.push_back(c);
        if (!nullary.empty()) return Formula::conn(pick(nullary, rng_));
        [[fallthrough]];
      }
      default: return Formula::rel("R", {term(ctx, 1), term(ctx, 1)});
    }
  }

  // `extra` reserves room for variables the formula's context gains later
  Formula formula(const Context& ctx, int depth, int extra = 0) {
    if (depth <= 0 || coin(rng_, 3) == 0) return atom(ctx);
    bool can_quant = !quants_.empty() && static_cast<int>(ctx.size()) + extra < max_;
    if (can_quant && coin(rng_, 3) == 0) {
      Binding b{fresh(ctx), "s"};
      Context inner = ctx;
      inner.push_back(b);
      return Formula::quant(pick(quants_, rng_), b, formula(inner, depth - 1, extra));
    }
    std::vector<std::pair<std::string, int>> ops;
    for (const auto& o : conns_)
      if (o.second > 0) ops.push_back(o);
    if (ops.empty()) return atom(ctx);
    const auto& [c, n] = pick(ops, rng_);
    std::vector<Formula> xs;
    for (int i = 0; i < n; ++i) xs.push_back(formula(ctx, depth - 1, extra));
    return Formula::conn(c, std::move(xs));
  }

  std::vector<Formula> hyps(const Context& ctx, int lo, int hi, int extra = 0) {
    std::vector<Formula> out;
    int n = lo + coin(rng_, hi - lo + 1);
    for (int i = 0; i < n; ++i) out.push_back(formula(ctx, 1, extra));
    return out;
  }

  int ctx_size(int lo, int hi) { return lo + coin(rng_, std::max(hi - lo, 0) + 1); }

  // order-preserving random sublist
  Context sublist(const Context& ctx) {
    Context out;
    for (const auto& b : ctx)
      if (coin(rng_, 3)) out.push_back(b);
    return out;
  }

  const std::vector<std::string>& quants() const { return quants_; }
  const std::vector<std::pair<std::string, int>>& conns() const { return conns_; }
  std::mt19937_64& rng() { return rng_; }
  int max() const { return max_; }

 private:
  const Signature& sg_;
  const Language& lang_;
  int max_;
  std::mt19937_64& rng_;
  std::vector<std::pair<std::string, int>> conns_;
  std::vector<std::string> quants_;
};

Sequent sq(Context ctx, std::vector<Formula> hyps, Formula concl) {
  return Sequent{std::move(ctx), std::move(hyps), std::move(concl)};
}

}  // namespace

RuleInstance random_instance(Rule rule, const Signature& sg, const Language& lang, int max_ctx, std::mt19937_64& rng) {
  Gen g(sg, lang, max_ctx, rng);
  RuleInstance ri;
  ri.node.rule = rule;
  auto& prem = ri.premises;
  auto& concl = ri.node.concl;
  const int K = max_ctx;
  switch (rule) {
    case Rule::Refl: {
      Context c = make_ctx(g.ctx_size(0, K));
      Term m = g.term(c, 2);
      concl = Equation{c, m, m, "s"};
      break;
    }
    case Rule::Sym: {
      Context c = make_ctx(g.ctx_size(0, K));
      Term a = g.term(c, 2), b = g.term(c, 2);
      prem.push_back(Equation{c, a, b, "s"});
      concl = Equation{c, b, a, "s"};
      break;
    }
    case Rule::Trans: {
      Context c = make_ctx(g.ctx_size(0, K));
      Term a = g.term(c, 2), b = g.term(c, 2), d = g.term(c, 2);
      prem.push_back(Equation{c, a, b, "s"});
      prem.push_back(Equation{c, b, d, "s"});
      concl = Equation{c, a, d, "s"};
      break;
    }
    case Rule::EqSubst:
    case Rule::Sub: {
      Context full = make_ctx(g.ctx_size(1, K));
      size_t i = static_cast<size_t>(coin(rng, static_cast<int>(full.size())));
      Binding x = full[i];
      Context small = full;
      small.erase(small.begin() + static_cast<long>(i));
      Context delta = g.sublist(small);
      Term m = g.term(delta, 1), m2 = g.term(delta, 1);
      prem.push_back(Equation{delta, m, m2, "s"});
      ri.node.var = x.var;
      if (rule == Rule::EqSubst) {
        Term n = g.term(full, 2), n2 = g.term(full, 2);
        prem.push_back(Equation{full, n, n2, "s"});
        concl = Equation{small, substitute(n, {{x.var, m}}), substitute(n2, {{x.var, m2}}), "s"};
      } else {
        auto hs = g.hyps(full, 0, 2);
        Formula psi = g.formula(full, 2);
        prem.push_back(sq(full, hs, psi));
        std::vector<Formula> hs2;
        for (const auto& h : hs) hs2.push_back(substitute(h, {{x.var, m}}));
        concl = sq(small, hs2, substitute(psi, {{x.var, m2}}));
      }
      break;
    }
    case Rule::Ax: {
      Context c = make_ctx(g.ctx_size(0, K));
      Formula phi = g.formula(c, 2);
      concl = sq(c, {phi}, phi);
      break;
    }
    case Rule::Axiom: {
      Context c = make_ctx(g.ctx_size(0, K));
      concl = sq(c, g.hyps(c, 0, 2), g.formula(c, 2));
      break;
    }
    case Rule::Cut: {
      Context c = make_ctx(g.ctx_size(0, K));
      Formula a = g.formula(c, 2), b = g.formula(c, 2), d = g.formula(c, 2);
      prem.push_back(sq(c, {a}, b));
      prem.push_back(sq(c, {b}, d));
      concl = sq(c, {a}, d);
      break;
    }
    case Rule::Cwk: {
      Context c = make_ctx(g.ctx_size(0, K - 1));
      auto hs = g.hyps(c, 0, 2, 1);
      Formula psi = g.formula(c, 2, 1);
      prem.push_back(sq(c, hs, psi));
      Context c2 = c;
      c2.push_back({fresh(c), "s"});
      concl = sq(c2, hs, psi);
      break;
    }
    case Rule::OmegaCon: {
      if (g.quants().empty()) throw std::invalid_argument("Ω-Con needs a quantifier in the language");
      Context c = make_ctx(g.ctx_size(0, K - 1));
      Context inner = c;
      Binding x{fresh(c), "s"};
      inner.push_back(x);
      Formula a = g.formula(inner, 1), b = g.formula(inner, 1);
      prem.push_back(sq(inner, {a}, b));
      prem.push_back(sq(inner, {b}, a));
      const std::string& q = pick(g.quants(), rng);
      concl = sq(c, {Formula::quant(q, x, a)}, Formula::quant(q, x, b));
      break;
    }
    case Rule::DiamondCong: {
      Context c = make_ctx(g.ctx_size(0, K));
      const auto& [name, n] = pick(g.conns(), rng);
      std::vector<Formula> l, r;
      for (int i = 0; i < n; ++i) {
        l.push_back(g.formula(c, 1));
        r.push_back(coin(rng, 2) ? l.back() : g.formula(c, 1));
        prem.push_back(sq(c, {l.back()}, r.back()));
        prem.push_back(sq(c, {r.back()}, l.back()));
      }
      concl = sq(c, {Formula::conn(name, l)}, Formula::conn(name, r));
      break;
    }
    case Rule::TensorRefIntro:
    case Rule::TensorRefElim: {
      Context c = make_ctx(g.ctx_size(0, K));
      auto phi = g.hyps(c, 0, 1), psi = g.hyps(c, 0, 1);
      Formula a = g.formula(c, 1), b = g.formula(c, 1), th = g.formula(c, 2);
      std::vector<Formula> split = phi, joined = phi;
      split.push_back(a);
      split.push_back(b);
      joined.push_back(Formula::tensor(a, b));
      split.insert(split.end(), psi.begin(), psi.end());
      joined.insert(joined.end(), psi.begin(), psi.end());
      bool intro = rule == Rule::TensorRefIntro;
      prem.push_back(sq(c, intro ? split : joined, th));
      concl = sq(c, intro ? joined : split, th);
      ri.node.pos = static_cast<int>(phi.size());
      break;
    }
    case Rule::ERefIntro:
    case Rule::ERefElim: {
      Context c = make_ctx(g.ctx_size(0, K));
      auto phi = g.hyps(c, 0, 1), psi = g.hyps(c, 0, 1);
      Formula th = g.formula(c, 2);
      std::vector<Formula> without = phi, with = phi;
      with.push_back(Formula::unit());
      without.insert(without.end(), psi.begin(), psi.end());
      with.insert(with.end(), psi.begin(), psi.end());
      bool intro = rule == Rule::ERefIntro;
      prem.push_back(sq(c, intro ? without : with, th));
      concl = sq(c, intro ? with : without, th);
      ri.node.pos = static_cast<int>(phi.size());
      break;
    }
    case Rule::EqAdjFwd:
    case Rule::EqAdjBwd: {
      if (K < 2) throw std::invalid_argument("=-Adj needs contexts of two variables");
      Context gam = make_ctx(g.ctx_size(0, K - 2));
      Context hi = gam;
      Binding x{fresh(hi), "s"};
      hi.push_back(x);
      Context lo = hi;
      Binding x2{fresh(lo), "s"};
      lo.push_back(x2);
      auto phi = g.hyps(hi, 0, 1, 1);
      Formula psi = g.formula(lo, 2);
      std::vector<Formula> lo_h = phi;
      lo_h.push_back(Formula::eq("s", Term::var(x.var), Term::var(x2.var)));
      Sequent up = sq(hi, phi, substitute(psi, {{x2.var, Term::var(x.var)}}));
      Sequent down = sq(lo, lo_h, psi);
      bool fwd = rule == Rule::EqAdjFwd;
      prem.push_back(fwd ? Assertion(up) : Assertion(down));
      concl = fwd ? Assertion(down) : Assertion(up);
      break;
    }
    case Rule::ForallAdjFwd:
    case Rule::ForallAdjBwd: {
      Context gam = make_ctx(g.ctx_size(0, K - 1));
      Context hi = gam;
      Binding x{fresh(hi), "s"};
      hi.push_back(x);
      auto phi = g.hyps(gam, 0, 1, 1);
      Formula psi = g.formula(hi, 2);
      Sequent up = sq(hi, phi, psi);
      Sequent down = sq(gam, phi, Formula::quant(kForall, x, psi));
      bool fwd = rule == Rule::ForallAdjFwd;
      prem.push_back(fwd ? Assertion(up) : Assertion(down));
      concl = fwd ? Assertion(down) : Assertion(up);
      break;
    }
    case Rule::ExistsAdjFwd:
    case Rule::ExistsAdjBwd: {
      Context gam = make_ctx(g.ctx_size(0, K - 1));
      Context hi = gam;
      Binding x{fresh(hi), "s"};
      hi.push_back(x);
      auto phi = g.hyps(gam, 0, 1, 1);
      Formula psi = g.formula(hi, 2);
      Formula th = g.formula(gam, 2, 1);
      std::vector<Formula> up_h = phi, down_h = phi;
      up_h.push_back(psi);
      down_h.push_back(Formula::quant(kExists, x, psi));
      Sequent up = sq(hi, up_h, th);
      Sequent down = sq(gam, down_h, th);
      bool fwd = rule == Rule::ExistsAdjFwd;
      prem.push_back(fwd ? Assertion(up) : Assertion(down));
      concl = fwd ? Assertion(down) : Assertion(up);
      break;
    }
  }
  if (rule == Rule::Axiom) prem.push_back(concl);
  else
    for (const auto& p : prem) ri.node.premises.push_back(ProofNode{Rule::Axiom, p, {}, std::nullopt, std::nullopt});
  // every generated instance must pass the checker
  Theory T{"instance", sg, lang, prem};
  check_proof(T, {rule, Rule::Axiom}, ri.node);
  return ri;
}

bool SoundnessReport::ok() const {
  for (const auto& r : rules)
    if (r.violations) return false;
  return true;
}

namespace {

std::string describe(const Structure& S) {
  const Category& C = S.host->base();
  std::string s;
  for (const auto& [f, m] : S.fns) s += f + " = " + C.morphism_name(m) + "; ";
  for (const auto& [r, el] : S.rels) {
    std::vector<ObjId> xs;
    for (const auto& a : S.sg.relations.at(r).args) xs.push_back(S.sorts.at(a));
    s += r + " = " + S.host->format(product_of_or_throw(C, xs), el) + "; ";
  }
  return s;
}

bool all_hold(const Structure& S, const std::vector<Assertion>& as) {
  for (const auto& a : as)
    if (!holds(S, a)) return false;
  return true;
}

}  // namespace

SoundnessReport soundness_sweep(PropPtr host, const RuleSet& rules, const SoundnessOptions& opts) {
  SoundnessReport rep;
  rep.host = host->describe();
  Signature sg = sweep_signature();
  ObjId s = sweep_sort_object(*host);
  const Language& lang = host->language();
  for (Rule rule : all_rules()) {
    if (!rules.count(rule)) continue;
    RuleSweep rs;
    rs.rule = rule;
    // one stream per rule so results do not depend on which rules are swept
    std::mt19937_64 rng(opts.seed * 1000003u + static_cast<std::uint64_t>(rule) + 1);
    for (int t = 0; t < opts.trials; ++t) {
      RuleInstance ri = random_instance(rule, sg, lang, 2, rng);
      ++rs.trials;
      for (int k = 0; k < opts.structure_retries; ++k) {
        Structure S = random_structure(host, sg, s, rng);
        if (!all_hold(S, ri.premises)) continue;
        ++rs.nonvacuous;
        if (!holds(S, ri.node.concl)) {
          ++rs.violations;
          if (rs.witnesses.size() < 3)
            rs.witnesses.push_back(show(ri.node.concl) + " fails in " + describe(S) + "while its premises hold");
        }
        break;
      }
      if (!opts.converse || ri.premises.size() != 1) continue;
      for (int k = 0; k < opts.structure_retries; ++k) {
        Structure S = random_structure(host, sg, s, rng);
        if (!holds(S, ri.node.concl)) continue;
        if (!holds(S, ri.premises[0])) {
          ++rs.violations;
          if (rs.witnesses.size() < 3)
            rs.witnesses.push_back("converse: " + show(ri.premises[0]) + " fails in " + describe(S) +
                                   "while the conclusion holds");
        }
        break;
      }
    }
    rep.rules.push_back(std::move(rs));
  }
  return rep;
}

}  // namespace pcat
