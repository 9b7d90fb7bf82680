// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcat/syntax.hpp"

namespace pcat {

// Reversible rules are split into two directions. For the reflection rules,
// "intro" is the direction whose conclusion contains the connective.
enum class Rule {
  Refl,
  Sym,
  Trans,
  EqSubst,
  Ax,
  Cut,
  Cwk,
  Sub,
  OmegaCon,
  DiamondCong,
  TensorRefIntro,
  TensorRefElim,
  ERefIntro,
  ERefElim,
  EqAdjFwd,
  EqAdjBwd,
  ForallAdjFwd,
  ForallAdjBwd,
  ExistsAdjFwd,
  ExistsAdjBwd,
  Axiom,
};

using RuleSet = std::set<Rule>;

const std::string& rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& s);
const std::vector<Rule>& all_rules();
RuleSet equational_rules();
// equational logic, the L^m rules and Axiom(T)
RuleSet lm_rules();
RuleSet adjoint_rules();
RuleSet lm_with_adjoints();

struct ProofNode {
  Rule rule = Rule::Ax;
  Assertion concl;
  std::vector<ProofNode> premises;
  std::optional<std::string> var;  // Sub/EqSubst: the substituted variable
  std::optional<int> pos;          // reflection rules: 0-based antecedent position
};

int proof_height(const ProofNode& p);  // a leaf has height 1
size_t proof_size(const ProofNode& p);

class ProofError : public std::runtime_error {
 public:
  ProofError(std::vector<int> path, Rule rule, const std::string& msg);
  const std::vector<int>& path() const { return path_; }
  Rule rule() const { return rule_; }
  const std::string& reason() const { return reason_; }

 private:
  std::vector<int> path_;
  Rule rule_;
  std::string reason_;
};

// Returns the root conclusion; throws ProofError naming the node path and the failed condition.
Assertion check_proof(const Theory& T, const RuleSet& enabled, const ProofNode& p);

struct SearchOptions {
  // extra candidate terms and formulas for Trans, Cut and Sub
  std::vector<Term> extra_terms;
  std::vector<Formula> extra_formulas;
  std::int64_t node_limit = 2'000'000;
};

// Backward search for a proof of height <= depth. Cut middles and substitution
// terms range over subterms/subformulas of T and the goal, terms closed once
// under the function symbols. Sub and EqSubst only instantiate axioms of T.
std::optional<ProofNode> derive_bounded(const Theory& T, const RuleSet& enabled, const Assertion& goal, int depth,
                                        const SearchOptions& opts = {});

}  // namespace pcat
