// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pcat/calculus.hpp"
#include "pcat/fibered.hpp"
#include "pcat/propcat.hpp"
#include "pcat/semantics.hpp"
#include "pcat/sexpr.hpp"
#include "pcat/syntax.hpp"

namespace pcat {

// ------------------------------------------------------------ syntax readers
// Errors are ParseError with the line and column of the offending form.

Term read_term(const SExpr& e);
Context read_context(const SExpr& e);
Formula read_formula(const SExpr& e, const Signature& sg, const Language& lang);
Assertion read_assertion(const SExpr& e, const Signature& sg, const Language& lang);
Language read_language(const SExpr& e);
SExpr to_sexpr(const Language& lang);

// (theory NAME (sort s) (fn f (s) s) (rel R (s s)) [(lang ...)] (eqn ...) (seq ...) ...)
Theory read_theory(const SExpr& e);
std::string print_theory(const Theory& T);

// (proof (rule NAME) (concl A) [(var x)] [(pos k)] [(sub P ...)])
ProofNode read_proof(const SExpr& e, const Signature& sg, const Language& lang);
SExpr to_sexpr(const ProofNode& p);
std::string print_proof(const ProofNode& p);

// (probe (values v ...) [(max N)])
Probe read_probe(const SExpr& e);

bool theories_alpha_equal(const Theory& a, const Theory& b);
bool proofs_alpha_equal(const ProofNode& a, const ProofNode& b);

// ------------------------------------------------------------ workspace

enum class FileKind { Theory, PropCat, Structure, Morphism, Interp, Proof, Probe, Unknown };
FileKind file_kind(const SExpr& e);
const char* kind_name(FileKind k);

// Loads files once per canonical path; references inside files are resolved
// relative to the referencing file's directory.
class Workspace {
 public:
  explicit Workspace(Probe probe = {}) : probe_(std::move(probe)) {}

  const Probe& probe() const { return probe_; }
  void set_probe(Probe p) { probe_ = std::move(p); }

  const Theory& theory(const std::string& path);
  PropPtr propcat(const std::string& path);
  const Structure& structure(const std::string& path);
  MorphPtr morphism(const std::string& path);
  const SignatureInterpretation& interpretation(const std::string& path);
  ProofNode proof(const std::string& path, const Theory& T);

  // the file a loaded object came from
  std::string path_of(const PropCategory* P) const;
  std::string path_of(const PropMorphism* F) const;

  // printed forms of loaded objects; parsing them back gives equal objects
  std::string print_propcat(const std::string& path);
  std::string print_structure(const Structure& S);
  std::string print_morphism(const std::string& path);
  std::string print_interpretation(const std::string& path);

  // parse from text with references resolved against `dir`
  PropPtr propcat_from(const SExpr& e, const std::string& dir);
  Structure structure_from(const SExpr& e, const std::string& dir);
  MorphPtr morphism_from(const SExpr& e, const std::string& dir);
  SignatureInterpretation interpretation_from(const SExpr& e, const std::string& dir);

  static std::string canonical_path(const std::string& p);
  static std::string resolve(const std::string& dir, const std::string& ref);

 private:
  SExpr load(const std::string& cpath);

  Probe probe_;
  std::map<std::string, SExpr> text_;
  std::map<std::string, std::unique_ptr<Theory>> theories_;
  std::map<std::string, PropPtr> propcats_;
  std::map<std::string, std::unique_ptr<Structure>> structures_;
  std::map<std::string, MorphPtr> morphisms_;
  std::map<std::string, std::unique_ptr<SignatureInterpretation>> interps_;
  std::map<const void*, std::string> origin_;
  std::map<std::string, std::pair<std::string, std::string>> interp_refs_;  // source/target theory files
};

}  // namespace pcat
