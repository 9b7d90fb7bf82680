// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcat/propcat.hpp"
#include "pcat/semantics.hpp"

namespace pcat {

class FiberedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base functor plus fiber maps P(c) -> Q(F c).
class PropMorphism {
 public:
  virtual ~PropMorphism() = default;
  virtual std::string describe() const = 0;
  virtual PropPtr source() const = 0;
  virtual PropPtr target() const = 0;
  virtual ObjId obj(ObjId a) const = 0;
  virtual MorId mor(MorId f) const = 0;
  virtual Elem fiber(ObjId c, const Elem& r) const = 0;
};

using MorphPtr = std::shared_ptr<const PropMorphism>;

class FnMorphism : public PropMorphism {
 public:
  FnMorphism(std::string name, PropPtr src, PropPtr tgt, std::function<ObjId(ObjId)> o, std::function<MorId(MorId)> m,
             std::function<Elem(ObjId, const Elem&)> p)
      : name_(std::move(name)), src_(std::move(src)), tgt_(std::move(tgt)), o_(std::move(o)), m_(std::move(m)),
        p_(std::move(p)) {}
  std::string describe() const override { return name_; }
  PropPtr source() const override { return src_; }
  PropPtr target() const override { return tgt_; }
  ObjId obj(ObjId a) const override { return o_(a); }
  MorId mor(MorId f) const override { return m_(f); }
  Elem fiber(ObjId c, const Elem& r) const override { return p_(c, r); }

 private:
  std::string name_;
  PropPtr src_, tgt_;
  std::function<ObjId(ObjId)> o_;
  std::function<MorId(MorId)> m_;
  std::function<Elem(ObjId, const Elem&)> p_;
};

MorphPtr identity_morphism(PropPtr P);
MorphPtr compose_morphisms(MorphPtr G, MorphPtr F);  // G after F
// P and Q function prop-categories over the same atom sizes and depth; base is the
// identity, fibers are postcomposed with the value map.
MorphPtr value_morphism(std::string name, PropPtr P, PropPtr Q, const std::map<Code, Code>& values);
// Renames atoms and permutes their elements; values unchanged.
struct AtomRelabel {
  std::string from, to;
  std::vector<std::pair<std::string, std::string>> elems;
};
MorphPtr relabel_morphism(std::string name, PropPtr P, PropPtr Q, const std::vector<AtomRelabel>& atoms);
MorphPtr projection_morphism(std::shared_ptr<const ProductPropCategory> P, size_t i);
MorphPtr pairing_morphism(std::shared_ptr<const ProductPropCategory> Q, const std::vector<MorphPtr>& parts);
// Explicit tables: object and morphism images, and per-object fiber tables indexed by source element index.
MorphPtr table_morphism(std::string name, PropPtr P, PropPtr Q, std::vector<ObjId> omap, std::vector<MorId> mmap,
                        std::vector<std::vector<Elem>> pmap);

// F(b x c) -> Fb x Fc, and its n-ary version for left-nested products of `factors`
MorId product_comparison(const PropMorphism& F, const std::vector<ObjId>& factors);
MorId product_comparison_inverse(const PropMorphism& F, const std::vector<ObjId>& factors);

struct MorphismCheckOptions {
  Probe probe;
  std::int64_t exhaustive_limit = 400000;  // per condition and object, sampled beyond
  std::int64_t samples = 50000;
  std::uint64_t seed = 0;
  int max_violations = 5;
};

FaReport check_morphism(const PropMorphism& F, const MorphismCheckOptions& opts = {});

// extensional equality on objects, morphisms and (probe) fiber elements; returns a difference
std::optional<std::string> morphism_difference(const PropMorphism& F, const PropMorphism& G, const Probe& probe = {});

struct TwoCell {
  MorphPtr F, H;
  std::vector<MorId> eta;  // per source object, F c -> H c
};
FaReport check_two_cell(const TwoCell& t, const Probe& probe = {});

// ------------------------------------------------------------ kernels

struct Kernel {
  PropPtr source;
  std::vector<ObjId> obj_class;  // least object with the same image
  std::vector<MorId> mor_class;  // least morphism with the same image
  std::vector<std::vector<Elem>> elems;
  // (c1, c2) with c1 ~ c2: row-major |elems[c1]| x |elems[c2]|
  std::map<std::pair<ObjId, ObjId>, std::vector<char>> fiber;
  bool fiber_related(ObjId c1, size_t i1, ObjId c2, size_t i2) const;
};

Kernel kernel(const PropMorphism& F, const Probe& probe = {});
// a pair related by `a` and not by `b`, described; nullopt when ker a <= ker b
std::optional<std::string> kernel_excess(const Kernel& a, const Kernel& b);
bool kernel_leq(const Kernel& a, const Kernel& b);
bool kernel_equal(const Kernel& a, const Kernel& b);

// ------------------------------------------------------------ images and factorization

bool is_injective_on_objects(const PropMorphism& F);
bool is_subprop_morphism(const PropMorphism& F, const Probe& probe = {});

struct ImageFactor {
  std::shared_ptr<const SubPropCategory> image;
  MorphPtr corestriction;  // H: source -> image
  MorphPtr inclusion;      // iota: image -> target
};
ImageFactor image_factor(MorphPtr F);

struct Factorization {
  MorphPtr epsilon;
  MorphPtr psi;
  std::shared_ptr<const SubPropCategory> image;
};
Factorization factorize(MorphPtr F);

// K full, surjective on objects, fiberwise surjective; throws FiberedError otherwise
void check_completion_hypotheses(const PropMorphism& K);

struct Completion {
  MorphPtr H;                          // set when ker K <= ker F
  std::optional<std::string> obstruction;
};
enum class PreimageOrder { Forward, Reverse };
Completion complete_through(MorphPtr F, MorphPtr K, PreimageOrder order = PreimageOrder::Forward);

// ------------------------------------------------------------ structures

Structure transport_structure(const PropMorphism& F, const Structure& S);
// satisfaction preservation and both commutation equations over a bounded space
FaReport check_transport(const PropMorphism& F, const Structure& S, const AssertionSpace& space);

std::optional<std::string> structure_difference(const Structure& a, const Structure& b);
Structure structure_product(std::shared_ptr<const ProductPropCategory> host, const std::vector<Structure>& parts);
// also covers the empty product, where every sort goes to the terminal object
Structure structure_product(std::shared_ptr<const ProductPropCategory> host, const Signature& sg,
                            const std::vector<Structure>& parts);
Structure hom_image(const PropMorphism& H, const Structure& S);
// S_sub lives in iota's source and transports to S; returns S_sub
Structure submodel(const PropMorphism& iota, const Structure& S_sub, const Structure& S);

// ------------------------------------------------------------ signature interpretations

struct SignatureInterpretation {
  struct FnImage {
    Context ctx;  // concatenated sort images of the arguments
    std::vector<Term> terms;
  };
  struct RelImage {
    Context ctx;
    Formula phi;
  };
  std::string name;
  Signature source;
  Signature target;
  std::map<std::string, Context> sorts;
  std::map<std::string, FnImage> fns;
  std::map<std::string, RelImage> rels;

  void validate(const Language& lang) const;  // throws SyntaxError
};

SignatureInterpretation identity_interpretation(const Signature& sg);
SignatureInterpretation compose_interpretations(const SignatureInterpretation& h2, const SignatureInterpretation& h1,
                                                const Language& lang);
Context translate_context(const SignatureInterpretation& h, const Context& ctx);
std::vector<Term> translate_term(const SignatureInterpretation& h, const Term& t, const Context& ctx);
Formula translate_formula(const SignatureInterpretation& h, const Formula& f, const Context& ctx);
std::vector<Assertion> translate_assertion(const SignatureInterpretation& h, const Assertion& a);
Theory translate_theory(const SignatureInterpretation& h, const Theory& T);
// S o h, a structure over h.source; every sort image must have length one
Structure precompose(const Structure& S, const SignatureInterpretation& h);

// ------------------------------------------------------------ internal structure

struct InternalOptions {
  bool nary_variants = true;
  std::int64_t max_relations_per_object = 64;
};
// sorts are objects, function symbols morphisms, relation symbols fiber elements
Structure internal_structure(PropPtr pc, const InternalOptions& opts = {});

}  // namespace pcat
