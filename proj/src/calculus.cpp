// SPDX-License-Identifier: Apache-2.0
#include "pcat/calculus.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace pcat {

namespace {

const std::vector<std::pair<Rule, std::string>>& rule_table() {
  static const std::vector<std::pair<Rule, std::string>> t{
      {Rule::Refl, "Refl"},
      {Rule::Sym, "Sym"},
      {Rule::Trans, "Trans"},
      {Rule::EqSubst, "EqSubst"},
      {Rule::Ax, "Ax"},
      {Rule::Cut, "Cut"},
      {Rule::Cwk, "Cwk"},
      {Rule::Sub, "Sub"},
      {Rule::OmegaCon, "Ω-Con"},
      {Rule::DiamondCong, "◇-Cong"},
      {Rule::TensorRefIntro, "⊗-Ref-intro"},
      {Rule::TensorRefElim, "⊗-Ref-elim"},
      {Rule::ERefIntro, "e-Ref-intro"},
      {Rule::ERefElim, "e-Ref-elim"},
      {Rule::EqAdjFwd, "=-Adj-fwd"},
      {Rule::EqAdjBwd, "=-Adj-bwd"},
      {Rule::ForallAdjFwd, "∀-Adj-fwd"},
      {Rule::ForallAdjBwd, "∀-Adj-bwd"},
      {Rule::ExistsAdjFwd, "∃-Adj-fwd"},
      {Rule::ExistsAdjBwd, "∃-Adj-bwd"},
      {Rule::Axiom, "Axiom"},
  };
  return t;
}

// ASCII spellings accepted on input
const std::map<std::string, Rule>& rule_aliases() {
  static const std::map<std::string, Rule> a{
      {"Omega-Con", Rule::OmegaCon},         {"Diamond-Cong", Rule::DiamondCong},
      {"Tensor-Ref-intro", Rule::TensorRefIntro}, {"Tensor-Ref-elim", Rule::TensorRefElim},
      {"Eq-Adj-fwd", Rule::EqAdjFwd},         {"Eq-Adj-bwd", Rule::EqAdjBwd},
      {"Forall-Adj-fwd", Rule::ForallAdjFwd}, {"Forall-Adj-bwd", Rule::ForallAdjBwd},
      {"Exists-Adj-fwd", Rule::ExistsAdjFwd}, {"Exists-Adj-bwd", Rule::ExistsAdjBwd},
  };
  return a;
}

}  // namespace

const std::string& rule_name(Rule r) {
  for (const auto& [k, n] : rule_table())
    if (k == r) return n;
  static const std::string unknown = "?";
  return unknown;
}

std::optional<Rule> rule_from_name(const std::string& s) {
  for (const auto& [k, n] : rule_table())
    if (n == s) return k;
  auto it = rule_aliases().find(s);
  if (it != rule_aliases().end()) return it->second;
  return std::nullopt;
}

const std::vector<Rule>& all_rules() {
  static const std::vector<Rule> v = [] {
    std::vector<Rule> out;
    for (const auto& [k, n] : rule_table()) out.push_back(k);
    return out;
  }();
  return v;
}

RuleSet equational_rules() { return {Rule::Refl, Rule::Sym, Rule::Trans, Rule::EqSubst}; }

RuleSet lm_rules() {
  RuleSet r = equational_rules();
  for (Rule x : {Rule::Ax, Rule::Cut, Rule::Cwk, Rule::Sub, Rule::OmegaCon, Rule::DiamondCong, Rule::TensorRefIntro,
                 Rule::TensorRefElim, Rule::ERefIntro, Rule::ERefElim, Rule::Axiom})
    r.insert(x);
  return r;
}

RuleSet adjoint_rules() {
  return {Rule::EqAdjFwd, Rule::EqAdjBwd, Rule::ForallAdjFwd, Rule::ForallAdjBwd, Rule::ExistsAdjFwd, Rule::ExistsAdjBwd};
}

RuleSet lm_with_adjoints() {
  RuleSet r = lm_rules();
  for (Rule x : adjoint_rules()) r.insert(x);
  return r;
}

int proof_height(const ProofNode& p) {
  int h = 0;
  for (const auto& q : p.premises) h = std::max(h, proof_height(q));
  return h + 1;
}

size_t proof_size(const ProofNode& p) {
  size_t n = 1;
  for (const auto& q : p.premises) n += proof_size(q);
  return n;
}

namespace {
std::string path_text(const std::vector<int>& p) {
  std::string s = "root";
  for (int k : p) s += "." + std::to_string(k);
  return s;
}
}  // namespace

ProofError::ProofError(std::vector<int> path, Rule rule, const std::string& msg)
    : std::runtime_error("at " + path_text(path) + " (" + rule_name(rule) + "): " + msg),
      path_(std::move(path)),
      rule_(rule),
      reason_(msg) {}

// ------------------------------------------------------------ rule instances

namespace {

struct Fail {
  std::string msg;
};

const Sequent& seq(const Assertion& a, const char* what) {
  if (const auto* s = std::get_if<Sequent>(&a)) return *s;
  throw Fail{std::string(what) + " must be a sequent"};
}

const Equation& eqn(const Assertion& a, const char* what) {
  if (const auto* e = std::get_if<Equation>(&a)) return *e;
  throw Fail{std::string(what) + " must be an equation"};
}

void need(bool c, const std::string& msg) {
  if (!c) throw Fail{msg};
}

bool same_list(const std::vector<Formula>& a, const std::vector<Formula>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!alpha_eq(a[i], b[i])) return false;
  return true;
}

bool vs_subset(const Context& d, const Context& g) {
  for (const auto& b : d)
    if (std::find(g.begin(), g.end(), b) == g.end()) return false;
  return true;
}

// position of the variable removed from `big` to give `small`
size_t removed_index(const Context& big, const Context& small, const std::optional<std::string>& var) {
  need(big.size() == small.size() + 1, "premise context must have exactly one more variable than the conclusion");
  for (size_t i = 0; i < big.size(); ++i) {
    if (var && big[i].var != *var) continue;
    Context c = big;
    c.erase(c.begin() + static_cast<long>(i));
    if (c == small) return i;
  }
  throw Fail{var ? "removing " + *var + " from the premise context does not give the conclusion context"
                 : "conclusion context is not the premise context minus one variable"};
}

size_t premise_count(Rule r, const Assertion& concl) {
  switch (r) {
    case Rule::Refl:
    case Rule::Ax:
    case Rule::Axiom:
      return 0;
    case Rule::Trans:
    case Rule::EqSubst:
    case Rule::Cut:
    case Rule::Sub:
    case Rule::OmegaCon:
      return 2;
    case Rule::DiamondCong: {
      const auto& s = seq(concl, "conclusion");
      need(s.hyps.size() == 1, "conclusion needs exactly one antecedent");
      return 2 * s.concl.subs.size();
    }
    default:
      return 1;
  }
}

void check_instance(const Theory& T, const ProofNode& n, const std::vector<Assertion>& prem) {
  const Assertion& C = n.concl;
  switch (n.rule) {
    case Rule::Refl: {
      const auto& e = eqn(C, "conclusion");
      need(e.lhs == e.rhs, "both sides must be the same term");
      return;
    }
    case Rule::Sym: {
      const auto& e = eqn(C, "conclusion");
      const auto& p = eqn(prem[0], "premise");
      need(p.ctx == e.ctx && p.sort == e.sort, "context and sort must agree");
      need(p.lhs == e.rhs && p.rhs == e.lhs, "conclusion must swap the premise sides");
      return;
    }
    case Rule::Trans: {
      const auto& e = eqn(C, "conclusion");
      const auto& p = eqn(prem[0], "premise 1");
      const auto& q = eqn(prem[1], "premise 2");
      need(p.ctx == e.ctx && q.ctx == e.ctx, "contexts must agree");
      need(p.sort == e.sort && q.sort == e.sort, "sorts must agree");
      need(p.rhs == q.lhs, "middle terms must coincide");
      need(p.lhs == e.lhs && q.rhs == e.rhs, "conclusion must join the outer terms");
      return;
    }
    case Rule::EqSubst: {
      const auto& e = eqn(C, "conclusion");
      const auto& m = eqn(prem[0], "premise 1");
      const auto& nn = eqn(prem[1], "premise 2");
      size_t i = removed_index(nn.ctx, e.ctx, n.var);
      const Binding& x = nn.ctx[i];
      need(m.sort == x.sort, "substituted variable has sort " + x.sort + " but the equation has sort " + m.sort);
      need(vs_subset(m.ctx, e.ctx), "side condition VS(Δ) ⊆ VS(Γ,Γ′) fails");
      need(nn.sort == e.sort, "sorts must agree");
      need(substitute(nn.lhs, {{x.var, m.lhs}}) == e.lhs, "left side is not N[M/x]");
      need(substitute(nn.rhs, {{x.var, m.rhs}}) == e.rhs, "right side is not N′[M′/x]");
      return;
    }
    case Rule::Ax: {
      const auto& s = seq(C, "conclusion");
      need(s.hyps.size() == 1 && alpha_eq(s.hyps[0], s.concl), "conclusion must be φ ⊢ φ");
      return;
    }
    case Rule::Axiom: {
      for (const auto& a : T.axioms)
        if (alpha_eq(a, C)) return;
      throw Fail{"axiom not in T"};
    }
    case Rule::Cut: {
      const auto& s = seq(C, "conclusion");
      const auto& p = seq(prem[0], "premise 1");
      const auto& q = seq(prem[1], "premise 2");
      need(s.hyps.size() == 1 && p.hyps.size() == 1 && q.hyps.size() == 1, "Cut takes single antecedents");
      need(p.ctx == s.ctx && q.ctx == s.ctx, "contexts must agree");
      need(alpha_eq(p.concl, q.hyps[0]), "cut formulas differ");
      need(alpha_eq(p.hyps[0], s.hyps[0]) && alpha_eq(q.concl, s.concl), "conclusion must be φ ⊢ θ");
      return;
    }
    case Rule::Cwk: {
      const auto& s = seq(C, "conclusion");
      const auto& p = seq(prem[0], "premise");
      need(s.ctx.size() == p.ctx.size() + 1 && std::equal(p.ctx.begin(), p.ctx.end(), s.ctx.begin()),
           "conclusion context must extend the premise context by one variable at the end");
      need(!lookup(p.ctx, s.ctx.back().var), "weakening variable must be fresh");
      need(same_list(p.hyps, s.hyps) && alpha_eq(p.concl, s.concl), "formulas must be unchanged");
      return;
    }
    case Rule::Sub: {
      const auto& s = seq(C, "conclusion");
      const auto& m = eqn(prem[0], "premise 1");
      const auto& p = seq(prem[1], "premise 2");
      size_t i = removed_index(p.ctx, s.ctx, n.var);
      const Binding& x = p.ctx[i];
      need(m.sort == x.sort, "substituted variable has sort " + x.sort + " but the equation has sort " + m.sort);
      need(vs_subset(m.ctx, s.ctx), "side condition VS(Δ) ⊆ VS(Γ,Γ′) fails");
      need(p.hyps.size() == s.hyps.size(), "antecedent lengths differ");
      for (size_t k = 0; k < p.hyps.size(); ++k)
        need(alpha_eq(substitute(p.hyps[k], {{x.var, m.lhs}}), s.hyps[k]),
             "antecedent " + std::to_string(k + 1) + " is not Φ[M/x]");
      need(alpha_eq(substitute(p.concl, {{x.var, m.rhs}}), s.concl), "consequent is not ψ[M′/x]");
      return;
    }
    case Rule::OmegaCon: {
      const auto& s = seq(C, "conclusion");
      const auto& p = seq(prem[0], "premise 1");
      const auto& q = seq(prem[1], "premise 2");
      need(s.hyps.size() == 1 && p.hyps.size() == 1 && q.hyps.size() == 1, "Ω-Con relates single formulas");
      need(p.ctx == q.ctx && p.ctx.size() == s.ctx.size() + 1 && std::equal(s.ctx.begin(), s.ctx.end(), p.ctx.begin()),
           "premise context must be the conclusion context plus one variable");
      need(alpha_eq(p.hyps[0], q.concl) && alpha_eq(p.concl, q.hyps[0]), "premises must be φ ⊢ ψ and ψ ⊢ φ");
      const Formula& l = s.hyps[0];
      const Formula& r = s.concl;
      need(l.kind == FKind::Quant && r.kind == FKind::Quant && l.sym == r.sym, "both sides must use the same quantifier");
      const Binding& x = p.ctx.back();
      need(alpha_eq(l, Formula::quant(l.sym, x, p.hyps[0])) && alpha_eq(r, Formula::quant(r.sym, x, p.concl)),
           "conclusion must quantify the premise formulas over " + x.var);
      return;
    }
    case Rule::DiamondCong: {
      const auto& s = seq(C, "conclusion");
      const Formula& l = s.hyps[0];
      const Formula& r = s.concl;
      need(l.kind == FKind::Conn && r.kind == FKind::Conn && l.sym == r.sym && l.subs.size() == r.subs.size(),
           "both sides must apply the same connective");
      for (size_t i = 0; i < l.subs.size(); ++i) {
        const auto& a = seq(prem[2 * i], "premise");
        const auto& b = seq(prem[2 * i + 1], "premise");
        need(a.ctx == s.ctx && b.ctx == s.ctx, "contexts must agree");
        need(a.hyps.size() == 1 && b.hyps.size() == 1, "premises relate single formulas");
        need(alpha_eq(a.hyps[0], l.subs[i]) && alpha_eq(a.concl, r.subs[i]) && alpha_eq(b.hyps[0], r.subs[i]) &&
                 alpha_eq(b.concl, l.subs[i]),
             "premises " + std::to_string(2 * i + 1) + "," + std::to_string(2 * i + 2) +
                 " must be φᵢ ⊢ φᵢ′ and φᵢ′ ⊢ φᵢ");
      }
      return;
    }
    case Rule::TensorRefIntro:
    case Rule::TensorRefElim: {
      const auto& s = seq(C, "conclusion");
      const auto& p = seq(prem[0], "premise");
      need(p.ctx == s.ctx, "contexts must agree");
      need(alpha_eq(p.concl, s.concl), "consequents must agree");
      bool intro = n.rule == Rule::TensorRefIntro;
      const auto& joined = intro ? s : p;
      const auto& split = intro ? p : s;
      need(split.hyps.size() == joined.hyps.size() + 1, "antecedent lengths do not match a ⊗ split");
      auto try_at = [&](size_t k) {
        const Formula& t = joined.hyps[k];
        if (t.kind != FKind::Conn || t.sym != kTensor || t.subs.size() != 2) return false;
        for (size_t i = 0; i < k; ++i)
          if (!alpha_eq(joined.hyps[i], split.hyps[i])) return false;
        if (!alpha_eq(t.subs[0], split.hyps[k]) || !alpha_eq(t.subs[1], split.hyps[k + 1])) return false;
        for (size_t i = k + 1; i < joined.hyps.size(); ++i)
          if (!alpha_eq(joined.hyps[i], split.hyps[i + 1])) return false;
        return true;
      };
      if (n.pos) {
        need(*n.pos >= 0 && static_cast<size_t>(*n.pos) < joined.hyps.size() && try_at(static_cast<size_t>(*n.pos)),
             "no α ⊗ β at the given position");
        return;
      }
      for (size_t k = 0; k < joined.hyps.size(); ++k)
        if (try_at(k)) return;
      throw Fail{"antecedents are not Φ, α, β, Ψ and Φ, α ⊗ β, Ψ"};
    }
    case Rule::ERefIntro:
    case Rule::ERefElim: {
      const auto& s = seq(C, "conclusion");
      const auto& p = seq(prem[0], "premise");
      need(p.ctx == s.ctx, "contexts must agree");
      need(alpha_eq(p.concl, s.concl), "consequents must agree");
      bool intro = n.rule == Rule::ERefIntro;
      const auto& with = intro ? s : p;
      const auto& without = intro ? p : s;
      need(with.hyps.size() == without.hyps.size() + 1, "antecedent lengths do not match an e insertion");
      auto try_at = [&](size_t k) {
        const Formula& t = with.hyps[k];
        if (t.kind != FKind::Conn || t.sym != kUnit || !t.subs.empty()) return false;
        std::vector<Formula> rest = with.hyps;
        rest.erase(rest.begin() + static_cast<long>(k));
        return same_list(rest, without.hyps);
      };
      if (n.pos) {
        need(*n.pos >= 0 && static_cast<size_t>(*n.pos) < with.hyps.size() && try_at(static_cast<size_t>(*n.pos)),
             "no e at the given position");
        return;
      }
      for (size_t k = 0; k < with.hyps.size(); ++k)
        if (try_at(k)) return;
      throw Fail{"antecedents are not Φ, e, Ψ and Φ, Ψ"};
    }
    case Rule::EqAdjFwd:
    case Rule::EqAdjBwd: {
      bool fwd = n.rule == Rule::EqAdjFwd;
      const auto& lo = seq(fwd ? C : prem[0], fwd ? "conclusion" : "premise");
      const auto& hi = seq(fwd ? prem[0] : C, fwd ? "premise" : "conclusion");
      // hi: Φ ⊢ ψ[x/x′] [Γ, x:σ];  lo: Φ, x =σ x′ ⊢ ψ [Γ, x:σ, x′:σ]
      need(lo.ctx.size() == hi.ctx.size() + 1 && std::equal(hi.ctx.begin(), hi.ctx.end(), lo.ctx.begin()),
           "contexts must be [Γ, x:σ] and [Γ, x:σ, x′:σ]");
      need(!hi.ctx.empty(), "context must end with x:σ");
      const Binding& x = hi.ctx.back();
      const Binding& x2 = lo.ctx.back();
      need(x.sort == x2.sort, "the last two variables must share a sort");
      need(lo.hyps.size() == hi.hyps.size() + 1, "antecedents must differ by the equation");
      need(same_list(std::vector<Formula>(lo.hyps.begin(), lo.hyps.end() - 1), hi.hyps), "Φ must be unchanged");
      need(alpha_eq(lo.hyps.back(), Formula::eq(x.sort, Term::var(x.var), Term::var(x2.var))),
           "last antecedent must be " + x.var + " = " + x2.var);
      need(alpha_eq(substitute(lo.concl, {{x2.var, Term::var(x.var)}}), hi.concl), "consequent must be ψ[x/x′]");
      return;
    }
    case Rule::ForallAdjFwd:
    case Rule::ForallAdjBwd: {
      bool fwd = n.rule == Rule::ForallAdjFwd;
      const auto& lo = seq(fwd ? C : prem[0], fwd ? "conclusion" : "premise");
      const auto& hi = seq(fwd ? prem[0] : C, fwd ? "premise" : "conclusion");
      // hi: Φ ⊢ ψ [Γ, x:σ];  lo: Φ ⊢ ∀x ψ [Γ]
      need(hi.ctx.size() == lo.ctx.size() + 1 && std::equal(lo.ctx.begin(), lo.ctx.end(), hi.ctx.begin()),
           "contexts must be [Γ] and [Γ, x:σ]");
      need(same_list(lo.hyps, hi.hyps), "Φ must be unchanged");
      const Binding& x = hi.ctx.back();
      need(alpha_eq(lo.concl, Formula::quant(kForall, x, hi.concl)), "consequent must be ∀" + x.var + " of the other");
      return;
    }
    case Rule::ExistsAdjFwd:
    case Rule::ExistsAdjBwd: {
      bool fwd = n.rule == Rule::ExistsAdjFwd;
      const auto& lo = seq(fwd ? C : prem[0], fwd ? "conclusion" : "premise");
      const auto& hi = seq(fwd ? prem[0] : C, fwd ? "premise" : "conclusion");
      // hi: Φ, ψ ⊢ θ [Γ, x:σ];  lo: Φ, ∃x ψ ⊢ θ [Γ]
      need(hi.ctx.size() == lo.ctx.size() + 1 && std::equal(lo.ctx.begin(), lo.ctx.end(), hi.ctx.begin()),
           "contexts must be [Γ] and [Γ, x:σ]");
      need(!hi.hyps.empty() && hi.hyps.size() == lo.hyps.size(), "antecedents must end with ψ and ∃ψ");
      need(same_list(std::vector<Formula>(lo.hyps.begin(), lo.hyps.end() - 1),
                     std::vector<Formula>(hi.hyps.begin(), hi.hyps.end() - 1)),
           "Φ must be unchanged");
      need(alpha_eq(lo.concl, hi.concl), "θ must be unchanged");
      const Binding& x = hi.ctx.back();
      need(alpha_eq(lo.hyps.back(), Formula::quant(kExists, x, hi.hyps.back())),
           "last antecedent must be ∃" + x.var + " of the other");
      return;
    }
  }
}

void check_node(const Theory& T, const RuleSet& enabled, const ProofNode& n, std::vector<int>& path) {
  try {
    if (!enabled.count(n.rule)) throw Fail{"rule not enabled"};
    try {
      wf_assertion(T.sg, T.lang, n.concl);
    } catch (const SyntaxError& e) {
      throw Fail{std::string("conclusion is not well-formed: ") + e.what()};
    }
    size_t want = premise_count(n.rule, n.concl);
    if (n.premises.size() != want)
      throw Fail{"expected " + std::to_string(want) + " premises, got " + std::to_string(n.premises.size())};
  } catch (const Fail& f) {
    throw ProofError(path, n.rule, f.msg);
  }
  std::vector<Assertion> prem;
  for (size_t i = 0; i < n.premises.size(); ++i) {
    path.push_back(static_cast<int>(i));
    check_node(T, enabled, n.premises[i], path);
    path.pop_back();
    prem.push_back(n.premises[i].concl);
  }
  try {
    check_instance(T, n, prem);
  } catch (const Fail& f) {
    throw ProofError(path, n.rule, f.msg);
  } catch (const SyntaxError& e) {
    throw ProofError(path, n.rule, e.what());
  }
}

}  // namespace

Assertion check_proof(const Theory& T, const RuleSet& enabled, const ProofNode& p) {
  std::vector<int> path;
  check_node(T, enabled, p, path);
  return p.concl;
}

// ------------------------------------------------------------ search

namespace {

void subterms(const Term& t, std::vector<Term>& out) {
  out.push_back(t);
  for (const auto& a : t.args) subterms(a, out);
}

void subformulas(const Formula& f, std::vector<Formula>& out, std::vector<Term>& terms) {
  out.push_back(f);
  for (const auto& t : f.terms) subterms(t, terms);
  for (const auto& g : f.subs) subformulas(g, out, terms);
}

class Searcher {
 public:
  Searcher(const Theory& T, const RuleSet& rules, const SearchOptions& o, const Assertion& goal)
      : T_(T), R_(rules), opts_(o) {
    auto add = [&](const Assertion& a) {
      if (const auto* e = std::get_if<Equation>(&a)) {
        subterms(e->lhs, terms_);
        subterms(e->rhs, terms_);
      } else {
        const auto& s = std::get<Sequent>(a);
        for (const auto& h : s.hyps) subformulas(h, formulas_, terms_);
        subformulas(s.concl, formulas_, terms_);
      }
      for (const auto& b : context_of(a)) terms_.push_back(Term::var(b.var));
    };
    for (const auto& a : T.axioms) add(a);
    add(goal);
    for (const auto& t : o.extra_terms) terms_.push_back(t);
    for (const auto& f : o.extra_formulas) formulas_.push_back(f);
    formulas_.push_back(Formula::unit());
    // close once under function application
    std::vector<Term> base = terms_;
    for (const auto& [f, d] : T.sg.functions) {
      if (d.args.empty()) {
        terms_.push_back(Term::app(f));
        continue;
      }
      if (d.args.size() > 2) continue;
      for (const auto& a : base) {
        if (d.args.size() == 1) {
          terms_.push_back(Term::app(f, {a}));
          continue;
        }
        for (const auto& b : base) terms_.push_back(Term::app(f, {a, b}));
      }
    }
    dedup_terms(terms_);
    std::vector<Formula> fs;
    for (const auto& f : formulas_) {
      bool seen = false;
      for (const auto& g : fs) seen = seen || alpha_eq(f, g);
      if (!seen) fs.push_back(f);
    }
    formulas_ = fs;
  }

  std::optional<ProofNode> prove(const Assertion& g, int depth) {
    if (depth <= 0 || ++nodes_ > opts_.node_limit) return std::nullopt;
    std::string key = show(canonical(g));
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      if (it->second.proof && proof_height(*it->second.proof) <= depth) return it->second.proof;
      if (it->second.failed_depth >= depth) return std::nullopt;
    }
    auto r = attempt(g, depth);
    auto& m = memo_[key];
    if (r) m.proof = r;
    else m.failed_depth = std::max(m.failed_depth, depth);
    return r;
  }

 private:
  struct Memo {
    std::optional<ProofNode> proof;
    int failed_depth = 0;
  };

  static void dedup_terms(std::vector<Term>& ts) {
    std::vector<Term> out;
    for (auto& t : ts)
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    ts = out;
  }

  bool on(Rule r) const { return R_.count(r) > 0; }

  bool wf(const Assertion& a) const {
    try {
      wf_assertion(T_.sg, T_.lang, a);
      return true;
    } catch (const SyntaxError&) {
      return false;
    }
  }

  std::vector<Term> terms_of(const Context& ctx, const std::string& sort) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      try {
        if (wf_term(T_.sg, ctx, t) == sort) out.push_back(t);
      } catch (const SyntaxError&) {
      }
    }
    return out;
  }

  std::vector<Formula> formulas_of(const Context& ctx) const {
    std::vector<Formula> out;
    for (const auto& f : formulas_) {
      try {
        wf_formula(T_.sg, T_.lang, ctx, f);
        out.push_back(f);
      } catch (const SyntaxError&) {
      }
    }
    return out;
  }

  static ProofNode node(Rule r, Assertion c, std::vector<ProofNode> ps = {}) {
    ProofNode n;
    n.rule = r;
    n.concl = std::move(c);
    n.premises = std::move(ps);
    return n;
  }

  std::optional<ProofNode> all(Rule r, const Assertion& c, const std::vector<Assertion>& subs, int depth) {
    std::vector<ProofNode> ps;
    for (const auto& s : subs) {
      auto p = prove(s, depth - 1);
      if (!p) return std::nullopt;
      ps.push_back(std::move(*p));
    }
    return node(r, c, std::move(ps));
  }

  std::optional<ProofNode> attempt(const Assertion& g, int depth) {
    // leaves
    if (on(Rule::Axiom))
      for (const auto& a : T_.axioms)
        if (alpha_eq(a, g)) return node(Rule::Axiom, g);
    if (const auto* e = std::get_if<Equation>(&g)) return equation(*e, g, depth);
    const auto& s = std::get<Sequent>(g);
    if (on(Rule::Ax) && s.hyps.size() == 1 && alpha_eq(s.hyps[0], s.concl)) return node(Rule::Ax, g);
    if (depth < 2) return std::nullopt;
    return sequent(s, g, depth);
  }

  std::optional<ProofNode> equation(const Equation& e, const Assertion& g, int depth) {
    if (on(Rule::Refl) && e.lhs == e.rhs) return node(Rule::Refl, g);
    if (depth < 2) return std::nullopt;
    if (on(Rule::Sym)) {
      Equation f{e.ctx, e.rhs, e.lhs, e.sort};
      if (auto p = all(Rule::Sym, g, {f}, depth)) return p;
    }
    if (on(Rule::Trans))
      for (const auto& m : terms_of(e.ctx, e.sort)) {
        if (m == e.lhs || m == e.rhs) continue;
        if (auto p = all(Rule::Trans, g, {Equation{e.ctx, e.lhs, m, e.sort}, Equation{e.ctx, m, e.rhs, e.sort}}, depth))
          return p;
      }
    if (on(Rule::EqSubst))
      for (const auto& a : T_.axioms) {
        const auto* ax = std::get_if<Equation>(&a);
        if (!ax || ax->sort != e.sort || ax->ctx.size() != e.ctx.size() + 1) continue;
        for (size_t i = 0; i < ax->ctx.size(); ++i) {
          Context c = ax->ctx;
          c.erase(c.begin() + static_cast<long>(i));
          if (c != e.ctx) continue;
          const Binding& x = ax->ctx[i];
          for (const auto& m : terms_of(e.ctx, x.sort)) {
            if (substitute(ax->lhs, {{x.var, m}}) != e.lhs) continue;
            for (const auto& m2 : terms_of(e.ctx, x.sort)) {
              if (substitute(ax->rhs, {{x.var, m2}}) != e.rhs) continue;
              auto p = prove(Equation{e.ctx, m, m2, x.sort}, depth - 1);
              auto q = prove(a, depth - 1);
              if (p && q) {
                ProofNode n = node(Rule::EqSubst, g, {*p, *q});
                n.var = x.var;
                return n;
              }
            }
          }
        }
      }
    return std::nullopt;
  }

  std::optional<ProofNode> sequent(const Sequent& s, const Assertion& g, int depth) {
    const auto& H = s.hyps;
    // reflection rules first: they only reshape the antecedent
    if (on(Rule::ERefIntro))
      for (size_t k = 0; k < H.size(); ++k)
        if (H[k].kind == FKind::Conn && H[k].sym == kUnit) {
          Sequent t = s;
          t.hyps.erase(t.hyps.begin() + static_cast<long>(k));
          if (auto p = all(Rule::ERefIntro, g, {t}, depth)) {
            p->pos = static_cast<int>(k);
            return p;
          }
        }
    if (on(Rule::TensorRefIntro))
      for (size_t k = 0; k < H.size(); ++k)
        if (H[k].kind == FKind::Conn && H[k].sym == kTensor) {
          Sequent t = s;
          t.hyps.erase(t.hyps.begin() + static_cast<long>(k));
          t.hyps.insert(t.hyps.begin() + static_cast<long>(k), {H[k].subs[0], H[k].subs[1]});
          if (auto p = all(Rule::TensorRefIntro, g, {t}, depth)) {
            p->pos = static_cast<int>(k);
            return p;
          }
        }
    if (on(Rule::Cwk) && !s.ctx.empty()) {
      Sequent t = s;
      t.ctx.pop_back();
      if (wf(t))
        if (auto p = all(Rule::Cwk, g, {t}, depth)) return p;
    }
    if (H.size() == 1) {
      const Formula& l = H[0];
      const Formula& r = s.concl;
      if (on(Rule::DiamondCong) && l.kind == FKind::Conn && r.kind == FKind::Conn && l.sym == r.sym &&
          l.subs.size() == r.subs.size()) {
        std::vector<Assertion> subs;
        for (size_t i = 0; i < l.subs.size(); ++i) {
          subs.push_back(Sequent{s.ctx, {l.subs[i]}, r.subs[i]});
          subs.push_back(Sequent{s.ctx, {r.subs[i]}, l.subs[i]});
        }
        if (auto p = all(Rule::DiamondCong, g, subs, depth)) return p;
      }
      if (on(Rule::OmegaCon) && l.kind == FKind::Quant && r.kind == FKind::Quant && l.sym == r.sym &&
          l.bound.sort == r.bound.sort) {
        std::set<std::string> avoid;
        for (const auto& b : s.ctx) avoid.insert(b.var);
        std::string z = avoid.count(l.bound.var) ? fresh_name(l.bound.var, avoid) : l.bound.var;
        Context c = s.ctx;
        c.push_back({z, l.bound.sort});
        Formula a = substitute(l.subs[0], {{l.bound.var, Term::var(z)}});
        Formula b = substitute(r.subs[0], {{r.bound.var, Term::var(z)}});
        if (auto p = all(Rule::OmegaCon, g, {Sequent{c, {a}, b}, Sequent{c, {b}, a}}, depth)) return p;
      }
      if (on(Rule::Cut))
        for (const auto& m : formulas_of(s.ctx)) {
          if (alpha_eq(m, l) || alpha_eq(m, r)) continue;
          if (auto p = all(Rule::Cut, g, {Sequent{s.ctx, {l}, m}, Sequent{s.ctx, {m}, r}}, depth)) return p;
        }
    }
    if (on(Rule::ForallAdjFwd) && s.concl.kind == FKind::Quant && s.concl.sym == kForall) {
      std::set<std::string> avoid;
      for (const auto& b : s.ctx) avoid.insert(b.var);
      std::string z = avoid.count(s.concl.bound.var) ? fresh_name(s.concl.bound.var, avoid) : s.concl.bound.var;
      Sequent t{s.ctx, H, substitute(s.concl.subs[0], {{s.concl.bound.var, Term::var(z)}})};
      t.ctx.push_back({z, s.concl.bound.sort});
      if (auto p = all(Rule::ForallAdjFwd, g, {t}, depth)) return p;
    }
    if (on(Rule::ExistsAdjFwd) && !H.empty() && H.back().kind == FKind::Quant && H.back().sym == kExists) {
      const Formula& q = H.back();
      std::set<std::string> avoid;
      for (const auto& b : s.ctx) avoid.insert(b.var);
      std::string z = avoid.count(q.bound.var) ? fresh_name(q.bound.var, avoid) : q.bound.var;
      Sequent t = s;
      t.hyps.back() = substitute(q.subs[0], {{q.bound.var, Term::var(z)}});
      t.ctx.push_back({z, q.bound.sort});
      if (auto p = all(Rule::ExistsAdjFwd, g, {t}, depth)) return p;
    }
    if (on(Rule::EqAdjFwd) && !H.empty() && s.ctx.size() >= 2) {
      const Binding& x = s.ctx[s.ctx.size() - 2];
      const Binding& x2 = s.ctx.back();
      if (x.sort == x2.sort && alpha_eq(H.back(), Formula::eq(x.sort, Term::var(x.var), Term::var(x2.var)))) {
        Sequent t{Context(s.ctx.begin(), s.ctx.end() - 1), std::vector<Formula>(H.begin(), H.end() - 1),
                  substitute(s.concl, {{x2.var, Term::var(x.var)}})};
        if (wf(t))
          if (auto p = all(Rule::EqAdjFwd, g, {t}, depth)) return p;
      }
    }
    if (on(Rule::Sub) && on(Rule::Axiom))
      if (auto p = sub(s, g, depth)) return p;
    if (on(Rule::TensorRefElim))
      for (size_t k = 0; k + 1 < H.size(); ++k) {
        Sequent t = s;
        t.hyps[k] = Formula::tensor(H[k], H[k + 1]);
        t.hyps.erase(t.hyps.begin() + static_cast<long>(k) + 1);
        if (auto p = all(Rule::TensorRefElim, g, {t}, depth)) {
          p->pos = static_cast<int>(k);
          return p;
        }
      }
    if (on(Rule::ERefElim))
      for (size_t k = 0; k <= H.size(); ++k) {
        Sequent t = s;
        t.hyps.insert(t.hyps.begin() + static_cast<long>(k), Formula::unit());
        if (auto p = all(Rule::ERefElim, g, {t}, depth)) {
          p->pos = static_cast<int>(k);
          return p;
        }
      }
    return std::nullopt;
  }

  // Sub with an axiom of T as the second premise
  std::optional<ProofNode> sub(const Sequent& s, const Assertion& g, int depth) {
    for (const auto& a : T_.axioms) {
      const auto* ax = std::get_if<Sequent>(&a);
      if (!ax || ax->hyps.size() != s.hyps.size() || ax->ctx.size() != s.ctx.size() + 1) continue;
      for (size_t i = 0; i < ax->ctx.size(); ++i) {
        Context c = ax->ctx;
        c.erase(c.begin() + static_cast<long>(i));
        if (c != s.ctx) continue;
        const Binding& x = ax->ctx[i];
        auto cands = terms_of(s.ctx, x.sort);
        for (const auto& m : cands) {
          bool ok = true;
          for (size_t k = 0; k < s.hyps.size() && ok; ++k)
            ok = alpha_eq(substitute(ax->hyps[k], {{x.var, m}}), s.hyps[k]);
          if (!ok) continue;
          for (const auto& m2 : cands) {
            if (!alpha_eq(substitute(ax->concl, {{x.var, m2}}), s.concl)) continue;
            auto p = prove(Equation{s.ctx, m, m2, x.sort}, depth - 1);
            if (!p) continue;
            ProofNode n = node(Rule::Sub, g, {*p, node(Rule::Axiom, a)});
            n.var = x.var;
            return n;
          }
        }
      }
    }
    return std::nullopt;
  }

  const Theory& T_;
  const RuleSet& R_;
  const SearchOptions& opts_;
  std::vector<Term> terms_;
  std::vector<Formula> formulas_;
  std::unordered_map<std::string, Memo> memo_;
  std::int64_t nodes_ = 0;
};

}  // namespace

std::optional<ProofNode> derive_bounded(const Theory& T, const RuleSet& enabled, const Assertion& goal, int depth,
                                        const SearchOptions& opts) {
  wf_assertion(T.sg, T.lang, goal);
  Searcher s(T, enabled, opts, goal);
  auto p = s.prove(goal, depth);
  if (p) check_proof(T, enabled, *p);
  return p;
}

}  // namespace pcat
