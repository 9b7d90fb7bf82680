// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcat/propcat.hpp"
#include "pcat/syntax.hpp"

namespace pcat {

class SemanticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Structure {
  std::string name;
  PropPtr host;
  Signature sg;
  std::map<std::string, ObjId> sorts;
  std::map<std::string, MorId> fns;
  std::map<std::string, Elem> rels;

  // domains and codomains against the designated products of the declared sorts
  void validate() const;
};

ObjId sort_object(const Structure& S, const std::string& sort);
std::vector<ObjId> context_factors(const Structure& S, const Context& ctx);
// left-nested designated product of the context's sorts; [] is the terminal
ObjId context_object(const Structure& S, const Context& ctx);

MorId interpret_term(const Structure& S, const Term& t, const Context& ctx);
Elem interpret_formula(const Structure& S, const Formula& f, const Context& ctx);

struct SatisfactionReport {
  Assertion assertion;
  bool verdict = false;
  std::string left;
  std::string right;
  std::string fiber;  // base object the comparison lives over
  std::string show() const;
};

SatisfactionReport satisfies(const Structure& S, const Assertion& a);
bool holds(const Structure& S, const Assertion& a);

// ------------------------------------------------------------ budgets

struct Budget {
  int ctx = 3;
  int term = 3;
  int fml = 3;
  int ante = 2;
  // caps keeping the enumeration at desk scale; hitting one marks the result truncated
  std::int64_t limit = 20000;
  std::int64_t formulas_per_context = 120;
  std::int64_t terms_per_sort = 24;

  static Budget parse(const std::string& spec);  // "ctx=3,term=3,fml=3,ante=2[,limit=N]"
  std::string show() const;
};

// Contexts are x1..xn; a binder introduced under [x1..xn] is named x(n+1).
struct ContextBlock {
  Context ctx;
  std::vector<Term> terms;
  std::vector<std::string> term_sorts;
  std::vector<Formula> formulas;
};

struct AssertionSpace {
  struct Item {
    std::uint32_t block = 0;
    bool equation = false;
    std::uint32_t a = 0, b = 0;  // equation: term indices; sequent: b is the conclusion
    std::vector<std::uint32_t> hyps;
  };
  std::vector<ContextBlock> blocks;
  std::vector<Item> items;
  bool truncated = false;

  size_t size() const { return items.size(); }
  Assertion assertion(size_t i) const;
};

// all well-formed assertions within the budget, in a fixed order
AssertionSpace enumerate_assertions(const Signature& sg, const Language& lang, const Budget& b);

struct SatVector {
  std::vector<char> sat;       // per item of the space
  std::vector<char> defined;   // false when the host cannot interpret the item
};
SatVector satisfaction_vector(const Structure& S, const AssertionSpace& space);

struct TheoryResult {
  std::vector<Assertion> assertions;
  std::int64_t considered = 0;
  std::int64_t skipped = 0;  // not interpretable within the host's product bound
  bool truncated = false;
};
// bounded Th(S) over the host's language
TheoryResult theory_of(const Structure& S, const Budget& b);
TheoryResult theory_of(const Structure& S, const Language& lang, const Budget& b);

}  // namespace pcat
