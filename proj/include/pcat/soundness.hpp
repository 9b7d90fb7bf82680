// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pcat/calculus.hpp"
#include "pcat/propcat.hpp"
#include "pcat/semantics.hpp"

namespace pcat {

// Randomized rule soundness: each trial draws a rule instance over a small
// signature and a structure on the host, then checks that satisfied premises
// give a satisfied conclusion.

// one sort s, constant c, unary f, unary P, binary R
Signature sweep_signature();

// the non-terminal object with the largest endomorphism set whose square exists
ObjId sweep_sort_object(const PropCategory& host);

// uniform choice of every symbol's interpretation; the host's fibers must be finite
Structure random_structure(PropPtr host, const Signature& sg, ObjId sort_obj, std::mt19937_64& rng);

struct RuleInstance {
  ProofNode node;               // premises are Axiom leaves
  std::vector<Assertion> premises;
};

// a checked instance of `rule` whose contexts have at most `max_ctx` variables
RuleInstance random_instance(Rule rule, const Signature& sg, const Language& lang, int max_ctx, std::mt19937_64& rng);

struct RuleSweep {
  Rule rule = Rule::Ax;
  int trials = 0;
  int nonvacuous = 0;  // trials whose premises held in the drawn structure
  int violations = 0;
  std::vector<std::string> witnesses;
};

struct SoundnessOptions {
  int trials = 200;
  std::uint64_t seed = 0;
  int structure_retries = 16;  // structures drawn per instance looking for satisfied premises
  bool converse = false;       // also check conclusion => premises (adjoint rules)
};

struct SoundnessReport {
  std::string host;
  std::vector<RuleSweep> rules;
  bool ok() const;
};

SoundnessReport soundness_sweep(PropPtr host, const RuleSet& rules, const SoundnessOptions& opts = {});

}  // namespace pcat
