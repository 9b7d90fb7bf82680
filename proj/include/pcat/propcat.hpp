// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <boost/container/small_vector.hpp>
#include <boost/rational.hpp>
#include <cstdint>
#include <functional>
#include <map>
#include <tuple>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcat/category.hpp"
#include "pcat/sexpr.hpp"
#include "pcat/syntax.hpp"

namespace pcat {

using Code = std::int64_t;
using Elem = boost::container::small_vector<Code, 8>;
using Rational = boost::rational<std::int64_t>;

struct ElemHash {
  size_t operator()(const Elem& e) const noexcept {
    size_t h = 1469598103934665603ull;
    for (Code c : e) h = (h ^ static_cast<size_t>(c)) * 1099511628211ull;
    return h;
  }
};

class PropError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite set of truth values used to enumerate symbolic fibers.
struct Probe {
  std::vector<Rational> values{Rational(0), Rational(1, 2), Rational(1)};
  std::int64_t max_elements = 100000;
};

Code pack_rational(const Rational& r);
Rational unpack_rational(Code c);
std::string format_rational(const Rational& r);
Rational parse_rational(const std::string& s);

class PropCategory {
 public:
  virtual ~PropCategory() = default;
  virtual std::string describe() const = 0;
  virtual const Category& base() const = 0;
  virtual std::shared_ptr<const Category> base_ptr() const = 0;
  virtual const Language& language() const = 0;

  // nullopt when the fiber is symbolic or too large to enumerate
  virtual std::optional<std::int64_t> fiber_size(ObjId c) const = 0;
  virtual Elem fiber_element(ObjId c, std::int64_t i) const = 0;
  virtual std::optional<std::int64_t> index_of(ObjId c, const Elem& r) const = 0;
  virtual bool symbolic(ObjId) const { return false; }
  // finite fibers: all elements; symbolic fibers: elements built from the probe
  virtual std::vector<Elem> probe_elements(ObjId c, const Probe& probe) const;

  virtual int element_width(ObjId c) const = 0;
  virtual bool contains(ObjId c, const Elem& r) const = 0;
  virtual bool leq(ObjId c, const Elem& a, const Elem& b) const = 0;
  virtual Elem op(ObjId c, const std::string& name, const std::vector<Elem>& args) const = 0;
  virtual Elem pull(MorId f, const Elem& r) const = 0;
  // r in P(b x c) for the designated product, result in P(b)
  virtual Elem quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const = 0;
  virtual Elem eq(ObjId c) const = 0;

  virtual std::string format(ObjId c, const Elem& r) const = 0;
  virtual Elem parse(ObjId c, const SExpr& e) const = 0;

  Elem unit(ObjId c) const { return op(c, kUnit, {}); }
  Elem tensor(ObjId c, const Elem& a, const Elem& b) const { return op(c, kTensor, {a, b}); }
  // left-associated tensor of a list; the empty list gives e
  Elem tensor_all(ObjId c, const std::vector<Elem>& xs) const;
};

using PropPtr = std::shared_ptr<const PropCategory>;

// ------------------------------------------------------------ value domains

class ValueDomain {
 public:
  virtual ~ValueDomain() = default;
  virtual std::string describe() const = 0;
  virtual std::optional<std::int64_t> size() const = 0;
  virtual Code value_at(std::int64_t i) const = 0;
  virtual std::int64_t index_of(Code v) const = 0;
  virtual bool valid(Code v) const = 0;
  virtual bool leq(Code a, Code b) const = 0;
  // connective name and arity; index into this list is the op id
  virtual const std::vector<std::pair<std::string, int>>& ops() const = 0;
  virtual Code apply(int op, const Code* args) const = 0;
  virtual Code top() const = 0;
  virtual Code bottom() const = 0;
  virtual Code meet(Code a, Code b) const = 0;
  virtual Code join(Code a, Code b) const = 0;
  virtual std::string format(Code v) const = 0;
  virtual Code parse(const SExpr& e) const = 0;
  int op_index(const std::string& name) const;
};

using DomainPtr = std::shared_ptr<const ValueDomain>;

struct OpTable {
  int arity = 0;
  std::vector<int> table;  // row-major over arguments
};

// Finite lattice given by tables. Must provide top, bot, and, or, e, tensor;
// may provide further connectives.
class FiniteLattice : public ValueDomain {
 public:
  FiniteLattice(std::string name, std::vector<std::string> elems, std::vector<std::vector<bool>> leq,
                std::map<std::string, OpTable> ops);
  static std::shared_ptr<FiniteLattice> boolean();
  // chain {0, 1/(n-1), ..., 1}; tensor is Lukasiewicz, plus not = 1 - x
  static std::shared_ptr<FiniteLattice> lukasiewicz(int n);
  // throws PropError naming the failed law
  void verify() const;

  std::string describe() const override { return name_; }
  std::optional<std::int64_t> size() const override { return static_cast<std::int64_t>(elems_.size()); }
  Code value_at(std::int64_t i) const override { return i; }
  std::int64_t index_of(Code v) const override { return v; }
  bool valid(Code v) const override { return v >= 0 && v < static_cast<Code>(elems_.size()); }
  bool leq(Code a, Code b) const override { return leq_[a][b]; }
  const std::vector<std::pair<std::string, int>>& ops() const override { return op_list_; }
  Code apply(int op, const Code* args) const override;
  Code top() const override { return top_; }
  Code bottom() const override { return bot_; }
  Code meet(Code a, Code b) const override { return apply(and_, std::array<Code, 2>{a, b}.data()); }
  Code join(Code a, Code b) const override { return apply(or_, std::array<Code, 2>{a, b}.data()); }
  std::string format(Code v) const override { return elems_.at(v); }
  Code parse(const SExpr& e) const override;

  const std::vector<std::string>& elems() const { return elems_; }
  const std::map<std::string, OpTable>& tables() const { return tables_; }
  const std::vector<std::vector<bool>>& order() const { return leq_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::vector<std::string> elems_;
  std::vector<std::vector<bool>> leq_;
  std::map<std::string, OpTable> tables_;
  std::vector<std::pair<std::string, int>> op_list_;
  std::vector<const OpTable*> op_ptr_;
  Code top_ = 0, bot_ = 0;
  int and_ = 0, or_ = 0;
};

struct TNorm {
  std::string name;  // short name used for the quantifier symbol
  std::function<Rational(const Rational&, const Rational&)> fn;
  static TNorm minimum();
  static TNorm product();
  static TNorm lukasiewicz();
};

// Exact rationals in [0,1]: top, bot, and = min, or = max, e = 1, tensor = T-norm.
class RationalUnit : public ValueDomain {
 public:
  explicit RationalUnit(TNorm t);
  std::string describe() const override { return "unit interval, tensor " + tnorm_.name; }
  std::optional<std::int64_t> size() const override { return std::nullopt; }
  Code value_at(std::int64_t) const override { throw PropError("symbolic domain"); }
  std::int64_t index_of(Code) const override { throw PropError("symbolic domain"); }
  bool valid(Code v) const override;
  bool leq(Code a, Code b) const override { return unpack_rational(a) <= unpack_rational(b); }
  const std::vector<std::pair<std::string, int>>& ops() const override { return op_list_; }
  Code apply(int op, const Code* args) const override;
  Code top() const override { return pack_rational(Rational(1)); }
  Code bottom() const override { return pack_rational(Rational(0)); }
  Code meet(Code a, Code b) const override { return leq(a, b) ? a : b; }
  Code join(Code a, Code b) const override { return leq(a, b) ? b : a; }
  std::string format(Code v) const override { return format_rational(unpack_rational(v)); }
  Code parse(const SExpr& e) const override;
  const TNorm& tnorm() const { return tnorm_; }

 private:
  TNorm tnorm_;
  std::vector<std::pair<std::string, int>> op_list_;
};

// Row quantifier: the values of r(a, -) over the points of c, in point order.
using RowQuant = std::function<Code(const Code* row, int m)>;

struct QuantSpec {
  std::string name;
  RowQuant fn;
  std::string description;
};

// Mostowski quantifier families over a carrier of m points, subsets as bitmasks.
struct MostowskiSpec {
  enum class Kind { All, Nonempty, Exactly, AtLeast, AtMost, Table };
  std::string name;
  Kind kind = Kind::All;
  int k = 0;
  std::map<int, std::vector<std::uint64_t>> families;  // Table kind: carrier size -> accepted masks
  bool defined_for(int m) const;
  bool accepts(int m, std::uint64_t mask) const;
  std::string describe() const;
};

// Fibers are all functions from the carrier of an object into a value domain,
// ordered pointwise. Quantifiers act on rows.
class FunctionPropCategory : public PropCategory {
 public:
  FunctionPropCategory(std::string label, std::shared_ptr<const WordCategory> base, DomainPtr dom,
                       std::vector<QuantSpec> quants);
  std::string describe() const override { return label_; }
  const Category& base() const override { return *base_; }
  std::shared_ptr<const Category> base_ptr() const override { return base_; }
  const WordCategory& words() const { return *base_; }
  const ValueDomain& domain() const { return *dom_; }
  DomainPtr domain_ptr() const { return dom_; }
  const Language& language() const override { return lang_; }
  const std::vector<QuantSpec>& quantifiers() const { return quants_; }

  std::optional<std::int64_t> fiber_size(ObjId c) const override;
  Elem fiber_element(ObjId c, std::int64_t i) const override;
  std::optional<std::int64_t> index_of(ObjId c, const Elem& r) const override;
  bool symbolic(ObjId) const override { return !dom_->size().has_value(); }
  std::vector<Elem> probe_elements(ObjId c, const Probe& probe) const override;
  int element_width(ObjId c) const override { return base_->carrier_size(c); }
  bool contains(ObjId c, const Elem& r) const override;
  bool leq(ObjId c, const Elem& a, const Elem& b) const override;
  Elem op(ObjId c, const std::string& name, const std::vector<Elem>& args) const override;
  Elem pull(MorId f, const Elem& r) const override;
  Elem quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const override;
  Elem eq(ObjId c) const override;
  std::string format(ObjId c, const Elem& r) const override;
  Elem parse(ObjId c, const SExpr& e) const override;

  Elem constant(ObjId c, Code v) const { return Elem(static_cast<size_t>(base_->carrier_size(c)), v); }

 private:
  std::string label_;
  std::shared_ptr<const WordCategory> base_;
  DomainPtr dom_;
  std::vector<QuantSpec> quants_;
  Language lang_;
};

// Fully explicit tables, elements are indices.
class ExplicitPropCategory : public PropCategory {
 public:
  struct Fiber {
    std::vector<std::string> elems;
    std::vector<std::vector<bool>> leq;
    std::map<std::string, OpTable> ops;
  };
  ExplicitPropCategory(std::string label, std::shared_ptr<const ExplicitCategory> base, Language lang,
                       std::vector<Fiber> fibers);
  // P(f) as a table over P(cod f)
  void set_pull(MorId f, std::vector<int> table);
  void set_quant(const std::string& q, ObjId b, ObjId c, std::vector<int> table);
  void set_eq(ObjId c, int elem);
  void finish();  // throws PropError for missing tables

  std::string describe() const override { return label_; }
  const Category& base() const override { return *base_; }
  std::shared_ptr<const Category> base_ptr() const override { return base_; }
  const ExplicitCategory& explicit_base() const { return *base_; }
  const Language& language() const override { return lang_; }
  std::optional<std::int64_t> fiber_size(ObjId c) const override {
    return static_cast<std::int64_t>(fibers_.at(c).elems.size());
  }
  Elem fiber_element(ObjId, std::int64_t i) const override { return Elem{i}; }
  std::optional<std::int64_t> index_of(ObjId c, const Elem& r) const override;
  int element_width(ObjId) const override { return 1; }
  bool contains(ObjId c, const Elem& r) const override;
  bool leq(ObjId c, const Elem& a, const Elem& b) const override;
  Elem op(ObjId c, const std::string& name, const std::vector<Elem>& args) const override;
  Elem pull(MorId f, const Elem& r) const override;
  Elem quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const override;
  Elem eq(ObjId c) const override;
  std::string format(ObjId c, const Elem& r) const override;
  Elem parse(ObjId c, const SExpr& e) const override;

  const Fiber& fiber(ObjId c) const { return fibers_.at(c); }
  const std::vector<int>& pull_table(MorId f) const { return pulls_.at(f); }
  const std::map<std::tuple<std::string, ObjId, ObjId>, std::vector<int>>& quant_tables() const { return quants_; }
  const std::map<ObjId, int>& eq_table() const { return eqs_; }

 private:
  std::string label_;
  std::shared_ptr<const ExplicitCategory> base_;
  Language lang_;
  std::vector<Fiber> fibers_;
  std::vector<std::vector<int>> pulls_;
  std::map<std::tuple<std::string, ObjId, ObjId>, std::vector<int>> quants_;
  std::map<ObjId, int> eqs_;
};

// Componentwise product; the language is the intersection of the parts'.
class ProductPropCategory : public PropCategory {
 public:
  explicit ProductPropCategory(std::vector<PropPtr> parts);
  std::string describe() const override;
  const Category& base() const override { return *base_; }
  std::shared_ptr<const Category> base_ptr() const override { return base_; }
  const ProductCategory& product_base() const { return *base_; }
  const Language& language() const override { return lang_; }
  std::optional<std::int64_t> fiber_size(ObjId c) const override;
  Elem fiber_element(ObjId c, std::int64_t i) const override;
  std::optional<std::int64_t> index_of(ObjId c, const Elem& r) const override;
  bool symbolic(ObjId c) const override;
  std::vector<Elem> probe_elements(ObjId c, const Probe& probe) const override;
  int element_width(ObjId c) const override;
  bool contains(ObjId c, const Elem& r) const override;
  bool leq(ObjId c, const Elem& a, const Elem& b) const override;
  Elem op(ObjId c, const std::string& name, const std::vector<Elem>& args) const override;
  Elem pull(MorId f, const Elem& r) const override;
  Elem quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const override;
  Elem eq(ObjId c) const override;
  std::string format(ObjId c, const Elem& r) const override;
  Elem parse(ObjId c, const SExpr& e) const override;

  size_t arity() const { return parts_.size(); }
  const PropCategory& part(size_t i) const { return *parts_[i]; }
  PropPtr part_ptr(size_t i) const { return parts_[i]; }
  std::vector<Elem> split(ObjId c, const Elem& r) const;
  Elem join(const std::vector<Elem>& xs) const;

 private:
  std::vector<PropPtr> parts_;
  std::shared_ptr<const ProductCategory> base_;
  Language lang_;
};

// Sub-prop-category of a parent: a subcategory with its own designated products
// and fibers given as subsets of the parent fibers. Quantifiers go through the
// parent after the change-of-product isomorphism; equality is supplied.
class SubPropCategory : public PropCategory {
 public:
  SubPropCategory(std::string label, PropPtr parent, std::shared_ptr<const SubCategory> base,
                  std::vector<std::vector<Elem>> fibers, std::map<ObjId, Elem> eqs);
  std::string describe() const override { return label_; }
  const Category& base() const override { return *base_; }
  std::shared_ptr<const Category> base_ptr() const override { return base_; }
  const SubCategory& sub_base() const { return *base_; }
  const PropCategory& parent() const { return *parent_; }
  PropPtr parent_ptr() const { return parent_; }
  const Language& language() const override { return parent_->language(); }
  std::optional<std::int64_t> fiber_size(ObjId c) const override {
    return static_cast<std::int64_t>(fibers_.at(c).size());
  }
  Elem fiber_element(ObjId c, std::int64_t i) const override { return fibers_.at(c).at(i); }
  std::optional<std::int64_t> index_of(ObjId c, const Elem& r) const override;
  int element_width(ObjId c) const override { return parent_->element_width(base_->parent_obj(c)); }
  bool contains(ObjId c, const Elem& r) const override { return index_of(c, r).has_value(); }
  bool leq(ObjId c, const Elem& a, const Elem& b) const override {
    return parent_->leq(base_->parent_obj(c), a, b);
  }
  Elem op(ObjId c, const std::string& name, const std::vector<Elem>& args) const override {
    return parent_->op(base_->parent_obj(c), name, args);
  }
  Elem pull(MorId f, const Elem& r) const override { return parent_->pull(base_->parent_mor(f), r); }
  Elem quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const override;
  Elem eq(ObjId c) const override;
  std::string format(ObjId c, const Elem& r) const override {
    return parent_->format(base_->parent_obj(c), r);
  }
  Elem parse(ObjId c, const SExpr& e) const override;

 private:
  std::string label_;
  PropPtr parent_;
  std::shared_ptr<const SubCategory> base_;
  std::vector<std::vector<Elem>> fibers_;  // sorted
  std::map<ObjId, Elem> eqs_;
  std::map<std::pair<ObjId, ObjId>, MorId> ainv_;  // parent morphism b x^ c -> b x c
};

// ------------------------------------------------------------ builders

struct AtomSpec {
  std::string name;
  std::vector<std::string> elems;
};

std::shared_ptr<FunctionPropCategory> mk_lattice_propcat(const std::vector<AtomSpec>& atoms,
                                                          std::shared_ptr<const FiniteLattice> L,
                                                          int product_depth);
std::shared_ptr<FunctionPropCategory> mk_powerset_propcat(const std::vector<AtomSpec>& atoms,
                                                           const std::vector<MostowskiSpec>& quants,
                                                           int product_depth);
// quantifier names: "forall", "exists", and "Ω" + tnorm name
std::shared_ptr<FunctionPropCategory> mk_fuzzy_propcat(const std::vector<AtomSpec>& atoms, const TNorm& tnorm,
                                                        const std::vector<std::string>& quantifiers,
                                                        int product_depth, const Probe& probe = Probe{});
std::string tnorm_quantifier_name(const TNorm& t);
std::shared_ptr<ProductPropCategory> product_propcat(const std::vector<PropPtr>& parts);

// ------------------------------------------------------------ verification

struct CheckOptions {
  std::int64_t exhaustive_limit = -1;  // per condition; -1 picks a per-engine default
  std::int64_t samples = 200000;
  std::uint64_t seed = 0;
  Probe probe;
  int max_violations = 5;
  bool parallel = true;
  // compiled integer tables are used when every fiber has at most this many elements
  std::int64_t compile_fiber_limit = 1024;
  bool allow_compile = true;
};

struct Violation {
  std::string condition;
  std::string witness;
  std::string lhs;
  std::string rhs;
  std::string show() const;
};

struct ConditionStat {
  std::string condition;
  std::int64_t space = 0;
  std::int64_t checked = 0;
  bool exhaustive = true;
  double seconds = 0;
};

struct FaReport {
  bool ok = true;
  bool used_probe = false;
  bool compiled = false;
  std::vector<ConditionStat> stats;
  std::vector<Violation> violations;
  bool exhaustive() const;
  bool has_violation(const std::string& prefix) const;
  std::string summary() const;
};

FaReport check_fa(const PropCategory& pc, const CheckOptions& opts = {});
// serial, element-level evaluation of the same conditions
FaReport check_fa_reference(const PropCategory& pc, const CheckOptions& opts = {});

}  // namespace pcat
