// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pcat/sexpr.hpp"

namespace pcat {

inline const std::string kTensor = "tensor";
inline const std::string kUnit = "e";
inline const std::string kForall = "forall";
inline const std::string kExists = "exists";

class SyntaxError : public std::runtime_error {
 public:
  // kind is one of: unknown symbol, arity mismatch, variable not in context,
  // sort mismatch, unknown connective, unknown quantifier, bad context
  SyntaxError(std::string kind, const std::string& detail, std::vector<int> path = {})
      : std::runtime_error(kind + ": " + detail + path_suffix(path)),
        kind_(std::move(kind)),
        path_(std::move(path)) {}
  const std::string& kind() const { return kind_; }
  // 1-based argument positions from the root to the offending subterm
  const std::vector<int>& path() const { return path_; }

 private:
  static std::string path_suffix(const std::vector<int>& p) {
    if (p.empty()) return "";
    std::string s = " (at position";
    for (int k : p) s += " " + std::to_string(k);
    return s + ")";
  }
  std::string kind_;
  std::vector<int> path_;
};

struct FnDecl {
  std::vector<std::string> args;
  std::string result;
  bool operator==(const FnDecl&) const = default;
};

struct RelDecl {
  std::vector<std::string> args;
  bool operator==(const RelDecl&) const = default;
};

struct Signature {
  std::vector<std::string> sorts;
  std::map<std::string, FnDecl> functions;
  std::map<std::string, RelDecl> relations;

  bool has_sort(const std::string& s) const;
  void add_sort(const std::string& s);
  void validate() const;
  bool operator==(const Signature&) const = default;
};

struct Language {
  std::map<std::string, int> connectives;
  std::set<std::string> quantifiers;

  Language();  // just e and tensor
  // e, tensor, top, bot, and, or with forall/exists
  static Language lattice();
  bool has_connective(const std::string& c, int arity) const;
  bool contains(const Language& other) const;
  Language meet(const Language& other) const;
  bool operator==(const Language&) const = default;
};

struct Binding {
  std::string var;
  std::string sort;
  bool operator==(const Binding&) const = default;
};

using Context = std::vector<Binding>;

const Binding* lookup(const Context& ctx, const std::string& var);
void wf_context(const Signature& sg, const Context& ctx);
Context concat(const Context& a, const Context& b);

struct Term {
  bool is_var = true;
  std::string name;
  std::vector<Term> args;

  static Term var(std::string n) { return Term{true, std::move(n), {}}; }
  static Term app(std::string f, std::vector<Term> xs = {}) {
    return Term{false, std::move(f), std::move(xs)};
  }
  bool operator==(const Term&) const = default;
};

enum class FKind { Rel, Eq, Conn, Quant };

struct Formula {
  FKind kind = FKind::Conn;
  std::string sym;  // relation, connective or quantifier name; sort for Eq
  std::vector<Term> terms;
  std::vector<Formula> subs;
  Binding bound;  // Quant only

  static Formula rel(std::string r, std::vector<Term> ts);
  static Formula eq(std::string sort, Term a, Term b);
  static Formula conn(std::string c, std::vector<Formula> xs = {});
  static Formula quant(std::string q, Binding b, Formula body);
  static Formula unit() { return conn(kUnit); }
  static Formula tensor(Formula a, Formula b) { return conn(kTensor, {std::move(a), std::move(b)}); }
  bool operator==(const Formula&) const = default;
};

struct Equation {
  Context ctx;
  Term lhs;
  Term rhs;
  std::string sort;
  bool operator==(const Equation&) const = default;
};

struct Sequent {
  Context ctx;
  std::vector<Formula> hyps;
  Formula concl;
  bool operator==(const Sequent&) const = default;
};

using Assertion = std::variant<Equation, Sequent>;

const Context& context_of(const Assertion& a);

struct Theory {
  std::string name;
  Signature sg;
  Language lang;
  std::vector<Assertion> axioms;
};

// typing
std::string wf_term(const Signature& sg, const Context& ctx, const Term& t);
void wf_formula(const Signature& sg, const Language& lang, const Context& ctx, const Formula& f);
void wf_assertion(const Signature& sg, const Language& lang, const Assertion& a);
void validate(const Theory& t);

// variables
std::set<std::string> free_vars(const Term& t);
std::set<std::string> free_vars(const Formula& f);
void collect_free_vars(const Term& t, std::set<std::string>& out);
void collect_free_vars(const Formula& f, std::set<std::string>& out);
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

// simultaneous, capture-avoiding substitution
using Subst = std::map<std::string, Term>;
Term substitute(const Term& t, const Subst& s);
Formula substitute(const Formula& f, const Subst& s);
// checks each replacement has the variable's sort (variables typed in `from`,
// replacements typed in `to`); throws SyntaxError "sort mismatch"
void check_subst(const Signature& sg, const Context& from, const Context& to, const Subst& s);

// alpha-equivalence via canonical binder numbering
Formula canonical(const Formula& f);
bool alpha_eq(const Formula& a, const Formula& b);
bool alpha_eq(const Assertion& a, const Assertion& b);
// equality after renaming context variables positionally; a utility only
bool equal_upto_free_renaming(const Assertion& a, const Assertion& b);
Assertion canonical(const Assertion& a);

int term_depth(const Term& t);
int formula_depth(const Formula& f);

// rendering; the matching readers live in io.hpp
SExpr to_sexpr(const Term& t);
SExpr to_sexpr(const Formula& f);
SExpr to_sexpr(const Context& ctx);
SExpr to_sexpr(const Assertion& a);
std::string show(const Term& t);
std::string show(const Formula& f);
std::string show(const Context& ctx);
std::string show(const Assertion& a);

}  // namespace pcat
