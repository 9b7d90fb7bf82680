// SPDX-License-Identifier: Apache-2.0
#include "pcat/propcat.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace pcat {

namespace {
constexpr std::int64_t kMaxEnumerable = std::int64_t{1} << 40;

std::optional<std::int64_t> checked_pow(std::int64_t b, std::int64_t e) {
  std::int64_t r = 1;
  for (std::int64_t k = 0; k < e; ++k) {
    if (b != 0 && r > kMaxEnumerable / b) return std::nullopt;
    r *= b;
  }
  return r;
}
}  // namespace

Code pack_rational(const Rational& r) {
  if (r.numerator() < 0 || r.numerator() > r.denominator())
    throw PropError("truth value " + format_rational(r) + " outside [0,1]");
  if (r.denominator() >= (std::int64_t{1} << 31))
    throw PropError("rational denominator too large: " + format_rational(r));
  return (r.numerator() << 32) | r.denominator();
}

Rational unpack_rational(Code c) { return Rational(c >> 32, c & 0xffffffffLL); }

std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational parse_rational(const std::string& s) {
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string frac = s.substr(dot + 1);
      std::int64_t den = 1;
      for (size_t k = 0; k < frac.size(); ++k) den *= 10;
      std::int64_t whole = dot == 0 ? 0 : std::stoll(s.substr(0, dot));
      std::int64_t part = frac.empty() ? 0 : std::stoll(frac);
      return Rational(whole * den + part, den);
    }
    size_t used = 0;
    std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return Rational(v);
  } catch (const std::exception&) {
    throw PropError("not a rational: " + s);
  }
}

std::vector<Elem> PropCategory::probe_elements(ObjId c, const Probe& probe) const {
  auto n = fiber_size(c);
  if (!n) throw PropError("fiber over " + base().object_name(c) + " is not enumerable");
  if (*n > probe.max_elements)
    throw PropError("fiber over " + base().object_name(c) + " has " + std::to_string(*n) + " elements");
  std::vector<Elem> out;
  out.reserve(static_cast<size_t>(*n));
  for (std::int64_t i = 0; i < *n; ++i) out.push_back(fiber_element(c, i));
  return out;
}

Elem PropCategory::tensor_all(ObjId c, const std::vector<Elem>& xs) const {
  if (xs.empty()) return unit(c);
  Elem acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = tensor(c, acc, xs[i]);
  return acc;
}

int ValueDomain::op_index(const std::string& name) const {
  const auto& v = ops();
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i].first == name) return static_cast<int>(i);
  return -1;
}

// ------------------------------------------------------------ finite lattice

FiniteLattice::FiniteLattice(std::string name, std::vector<std::string> elems, std::vector<std::vector<bool>> leq,
                             std::map<std::string, OpTable> ops)
    : name_(std::move(name)), elems_(std::move(elems)), leq_(std::move(leq)), tables_(std::move(ops)) {
  size_t n = elems_.size();
  if (n == 0) throw PropError("lattice needs at least one element");
  if (leq_.size() != n) throw PropError("order table has wrong size");
  for (auto& row : leq_)
    if (row.size() != n) throw PropError("order table has wrong size");
  for (const char* req : {"top", "bot", "and", "or", "e", "tensor"})
    if (!tables_.count(req)) throw PropError(std::string("lattice is missing connective ") + req);
  for (const auto& [k, t] : tables_) {
    size_t expect = 1;
    for (int i = 0; i < t.arity; ++i) expect *= n;
    if (t.table.size() != expect) throw PropError("connective table " + k + " is not total");
    for (int v : t.table)
      if (v < 0 || static_cast<size_t>(v) >= n) throw PropError("connective table " + k + " leaves the carrier");
    op_list_.emplace_back(k, t.arity);
  }
  for (const auto& [k, t] : op_list_) op_ptr_.push_back(&tables_.at(k));
  if (tables_.at("top").arity != 0 || tables_.at("bot").arity != 0 || tables_.at("e").arity != 0)
    throw PropError("top, bot and e must be nullary");
  if (tables_.at("and").arity != 2 || tables_.at("or").arity != 2 || tables_.at("tensor").arity != 2)
    throw PropError("and, or and tensor must be binary");
  top_ = tables_.at("top").table[0];
  bot_ = tables_.at("bot").table[0];
  and_ = op_index("and");
  or_ = op_index("or");
}

Code FiniteLattice::apply(int op, const Code* args) const {
  const OpTable& t = *op_ptr_[op];
  size_t idx = 0, n = elems_.size();
  for (int i = 0; i < t.arity; ++i) idx = idx * n + static_cast<size_t>(args[i]);
  return t.table[idx];
}

Code FiniteLattice::parse(const SExpr& e) const {
  if (e.is_atom())
    for (size_t i = 0; i < elems_.size(); ++i)
      if (elems_[i] == e.atom) return static_cast<Code>(i);
  e.fail("unknown truth value for lattice " + name_);
}

void FiniteLattice::verify() const {
  size_t n = elems_.size();
  auto L = [&](size_t a, size_t b) { return leq_[a][b]; };
  for (size_t a = 0; a < n; ++a) {
    if (!L(a, a)) throw PropError("lattice law violation: order not reflexive at " + elems_[a]);
    for (size_t b = 0; b < n; ++b) {
      if (a != b && L(a, b) && L(b, a)) throw PropError("lattice law violation: order not antisymmetric");
      for (size_t c = 0; c < n; ++c)
        if (L(a, b) && L(b, c) && !L(a, c)) throw PropError("lattice law violation: order not transitive");
    }
  }
  for (size_t a = 0; a < n; ++a) {
    if (!L(a, top_)) throw PropError("lattice law violation: top is not greatest");
    if (!L(bot_, a)) throw PropError("lattice law violation: bot is not least");
    for (size_t b = 0; b < n; ++b) {
      Code m = meet(a, b), j = join(a, b);
      if (!L(m, a) || !L(m, b) || !L(a, j) || !L(b, j))
        throw PropError("lattice law violation: and/or are not bounds at " + elems_[a] + "," + elems_[b]);
      for (size_t x = 0; x < n; ++x) {
        if (L(x, a) && L(x, b) && !L(x, m))
          throw PropError("lattice law violation: and is not the greatest lower bound");
        if (L(a, x) && L(b, x) && !L(j, x)) throw PropError("lattice law violation: or is not the least upper bound");
      }
    }
  }
}

std::shared_ptr<FiniteLattice> FiniteLattice::boolean() {
  std::map<std::string, OpTable> ops;
  ops["top"] = {0, {1}};
  ops["bot"] = {0, {0}};
  ops["e"] = {0, {1}};
  ops["and"] = {2, {0, 0, 0, 1}};
  ops["tensor"] = {2, {0, 0, 0, 1}};
  ops["or"] = {2, {0, 1, 1, 1}};
  ops["not"] = {1, {1, 0}};
  return std::make_shared<FiniteLattice>("bool", std::vector<std::string>{"0", "1"},
                                         std::vector<std::vector<bool>>{{true, true}, {false, true}}, ops);
}

std::shared_ptr<FiniteLattice> FiniteLattice::lukasiewicz(int n) {
  if (n < 2) throw PropError("Lukasiewicz chain needs at least two elements");
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) names.push_back(format_rational(Rational(k, n - 1)));
  std::vector<std::vector<bool>> leq(n, std::vector<bool>(n));
  std::map<std::string, OpTable> ops;
  OpTable meet{2, {}}, join{2, {}}, luk{2, {}}, neg{1, {}};
  for (int a = 0; a < n; ++a) {
    neg.table.push_back(n - 1 - a);
    for (int b = 0; b < n; ++b) {
      leq[a][b] = a <= b;
      meet.table.push_back(std::min(a, b));
      join.table.push_back(std::max(a, b));
      luk.table.push_back(std::max(0, a + b - (n - 1)));
    }
  }
  ops["top"] = {0, {n - 1}};
  ops["bot"] = {0, {0}};
  ops["e"] = {0, {n - 1}};
  ops["and"] = meet;
  ops["or"] = join;
  ops["tensor"] = luk;
  ops["not"] = neg;
  return std::make_shared<FiniteLattice>("luk" + std::to_string(n), names, leq, ops);
}

// ------------------------------------------------------------ rationals

TNorm TNorm::minimum() {
  return {"min", [](const Rational& a, const Rational& b) { return std::min(a, b); }};
}
TNorm TNorm::product() {
  return {"prod", [](const Rational& a, const Rational& b) { return a * b; }};
}
TNorm TNorm::lukasiewicz() {
  return {"luk", [](const Rational& a, const Rational& b) { return std::max(Rational(0), a + b - Rational(1)); }};
}

RationalUnit::RationalUnit(TNorm t) : tnorm_(std::move(t)) {
  op_list_ = {{"and", 2}, {"bot", 0}, {"e", 0}, {"or", 2}, {"tensor", 2}, {"top", 0}};
}

bool RationalUnit::valid(Code v) const {
  std::int64_t num = v >> 32, den = v & 0xffffffffLL;
  if (den <= 0 || num < 0 || num > den) return false;
  return std::gcd(num, den) == 1;
}

Code RationalUnit::apply(int op, const Code* args) const {
  switch (op) {
    case 0:
      return meet(args[0], args[1]);
    case 1:
      return bottom();
    case 2:
      return top();
    case 3:
      return join(args[0], args[1]);
    case 4:
      return pack_rational(tnorm_.fn(unpack_rational(args[0]), unpack_rational(args[1])));
    case 5:
      return top();
  }
  throw PropError("unknown connective id");
}

Code RationalUnit::parse(const SExpr& e) const {
  if (!e.is_atom()) e.fail("expected a rational truth value");
  try {
    return pack_rational(parse_rational(e.atom));
  } catch (const PropError& err) {
    e.fail(err.what());
  }
}

// ------------------------------------------------------------ Mostowski specs

bool MostowskiSpec::defined_for(int m) const {
  if (kind == Kind::Table) return families.count(m) > 0;
  return true;
}

bool MostowskiSpec::accepts(int m, std::uint64_t mask) const {
  int card = __builtin_popcountll(mask);
  switch (kind) {
    case Kind::All:
      return card == m;
    case Kind::Nonempty:
      return card > 0;
    case Kind::Exactly:
      return card == k;
    case Kind::AtLeast:
      return card >= k;
    case Kind::AtMost:
      return card <= k;
    case Kind::Table: {
      auto it = families.find(m);
      if (it == families.end()) throw PropError("quantifier " + name + " has no family for a carrier of size " + std::to_string(m));
      return std::find(it->second.begin(), it->second.end(), mask) != it->second.end();
    }
  }
  return false;
}

std::string MostowskiSpec::describe() const {
  switch (kind) {
    case Kind::All:
      return "all";
    case Kind::Nonempty:
      return "nonempty";
    case Kind::Exactly:
      return "exactly " + std::to_string(k);
    case Kind::AtLeast:
      return "at least " + std::to_string(k);
    case Kind::AtMost:
      return "at most " + std::to_string(k);
    case Kind::Table:
      return "table";
  }
  return "";
}

// ------------------------------------------------------------ function fibers

FunctionPropCategory::FunctionPropCategory(std::string label, std::shared_ptr<const WordCategory> base, DomainPtr dom,
                                           std::vector<QuantSpec> quants)
    : label_(std::move(label)), base_(std::move(base)), dom_(std::move(dom)), quants_(std::move(quants)) {
  lang_.connectives.clear();
  for (const auto& [n, a] : dom_->ops()) lang_.connectives[n] = a;
  for (const auto& q : quants_) lang_.quantifiers.insert(q.name);
}

std::optional<std::int64_t> FunctionPropCategory::fiber_size(ObjId c) const {
  auto d = dom_->size();
  if (!d) return std::nullopt;
  return checked_pow(*d, base_->carrier_size(c));
}

Elem FunctionPropCategory::fiber_element(ObjId c, std::int64_t i) const {
  std::int64_t d = *dom_->size();
  Elem r(static_cast<size_t>(base_->carrier_size(c)));
  for (auto& v : r) {
    v = dom_->value_at(i % d);
    i /= d;
  }
  return r;
}

std::optional<std::int64_t> FunctionPropCategory::index_of(ObjId c, const Elem& r) const {
  auto d = dom_->size();
  if (!d || !contains(c, r)) return std::nullopt;
  std::int64_t i = 0, w = 1;
  for (Code v : r) {
    i += dom_->index_of(v) * w;
    w *= *d;
  }
  return i;
}

std::vector<Elem> FunctionPropCategory::probe_elements(ObjId c, const Probe& probe) const {
  if (dom_->size()) return PropCategory::probe_elements(c, probe);
  int n = base_->carrier_size(c);
  std::int64_t k = static_cast<std::int64_t>(probe.values.size());
  auto total = checked_pow(k, n);
  if (!total || *total > probe.max_elements)
    throw PropError("probe fiber over " + base_->object_name(c) + " too large");
  std::vector<Code> vals;
  for (const auto& v : probe.values) vals.push_back(pack_rational(v));
  std::vector<Elem> out;
  for (std::int64_t i = 0; i < *total; ++i) {
    Elem r(static_cast<size_t>(n));
    std::int64_t j = i;
    for (auto& v : r) {
      v = vals[j % k];
      j /= k;
    }
    out.push_back(r);
  }
  return out;
}

bool FunctionPropCategory::contains(ObjId c, const Elem& r) const {
  if (static_cast<int>(r.size()) != base_->carrier_size(c)) return false;
  for (Code v : r)
    if (!dom_->valid(v)) return false;
  return true;
}

bool FunctionPropCategory::leq(ObjId, const Elem& a, const Elem& b) const {
  for (size_t i = 0; i < a.size(); ++i)
    if (!dom_->leq(a[i], b[i])) return false;
  return true;
}

Elem FunctionPropCategory::op(ObjId c, const std::string& name, const std::vector<Elem>& args) const {
  int k = dom_->op_index(name);
  if (k < 0) throw PropError("connective " + name + " not interpreted by " + label_);
  if (static_cast<int>(args.size()) != dom_->ops()[k].second) throw PropError("arity mismatch for " + name);
  size_t n = static_cast<size_t>(base_->carrier_size(c));
  Elem r(n);
  std::array<Code, 8> buf{};
  if (args.size() > buf.size()) throw PropError("connective arity above 8");
  for (size_t p = 0; p < n; ++p) {
    for (size_t i = 0; i < args.size(); ++i) buf[i] = args[i][p];
    r[p] = dom_->apply(k, buf.data());
  }
  return r;
}

Elem FunctionPropCategory::pull(MorId f, const Elem& r) const {
  auto t = base_->table(f);
  Elem out(t.size());
  for (size_t i = 0; i < t.size(); ++i) out[i] = r[t[i]];
  return out;
}

Elem FunctionPropCategory::quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const {
  const QuantSpec* spec = nullptr;
  for (const auto& s : quants_)
    if (s.name == q) spec = &s;
  if (!spec) throw PropError("quantifier " + q + " not interpreted by " + label_);
  base_->product_or_throw(b, c);
  int nb = base_->carrier_size(b), m = base_->carrier_size(c);
  Elem out(static_cast<size_t>(nb));
  for (int a = 0; a < nb; ++a) out[a] = spec->fn(r.data() + static_cast<size_t>(a) * m, m);
  return out;
}

Elem FunctionPropCategory::eq(ObjId c) const {
  ProductData cc = base_->product_or_throw(c, c);
  int n = base_->carrier_size(c);
  Elem r(static_cast<size_t>(base_->carrier_size(cc.obj)));
  for (int p = 0; p < n * n; ++p) r[p] = (p / n == p % n) ? dom_->top() : dom_->bottom();
  return r;
}

std::string FunctionPropCategory::format(ObjId c, const Elem& r) const {
  std::string s;
  bool boolean = dom_->size() == 2 && dom_->describe() == "bool";
  if (boolean) {
    s = "(set";
    for (size_t p = 0; p < r.size(); ++p)
      if (r[p] == dom_->top()) s += " " + base_->point_name(c, static_cast<int>(p));
    return s + ")";
  }
  s = "(vals";
  for (Code v : r) s += " " + dom_->format(v);
  return s + ")";
}

Elem FunctionPropCategory::parse(ObjId c, const SExpr& e) const {
  int n = base_->carrier_size(c);
  if (e.is_atom("top")) return constant(c, dom_->top());
  if (e.is_atom("bot")) return constant(c, dom_->bottom());
  if (e.has_head("const")) {
    if (e.size() != 2) e.fail("(const v) takes one value");
    return constant(c, dom_->parse(e[1]));
  }
  if (e.has_head("vals")) {
    if (static_cast<int>(e.size()) != n + 1)
      e.fail("expected " + std::to_string(n) + " values for " + base_->object_name(c));
    Elem r;
    for (size_t i = 1; i < e.size(); ++i) r.push_back(dom_->parse(e[i]));
    return r;
  }
  if (e.has_head("set")) {
    if (dom_->size() != 2) e.fail("(set ...) needs a two-valued domain");
    std::unordered_map<std::string, int> names;
    for (int p = 0; p < n; ++p) names[base_->point_name(c, p)] = p;
    Elem r = constant(c, dom_->bottom());
    for (size_t i = 1; i < e.size(); ++i) {
      auto it = names.find(to_string(e[i]));
      if (it == names.end()) e[i].fail("not a point of " + base_->object_name(c));
      r[it->second] = dom_->top();
    }
    return r;
  }
  e.fail("expected a fiber element: (vals ...), (set ...), (const v), top or bot");
}

// ------------------------------------------------------------ explicit

ExplicitPropCategory::ExplicitPropCategory(std::string label, std::shared_ptr<const ExplicitCategory> base,
                                           Language lang, std::vector<Fiber> fibers)
    : label_(std::move(label)), base_(std::move(base)), lang_(std::move(lang)), fibers_(std::move(fibers)) {
  if (static_cast<int>(fibers_.size()) != base_->object_count()) throw PropError("one fiber per object required");
  for (size_t c = 0; c < fibers_.size(); ++c) {
    auto& F = fibers_[c];
    size_t n = F.elems.size();
    if (n == 0) throw PropError("empty fiber over " + base_->object_name(static_cast<ObjId>(c)));
    F.leq.resize(n);
    for (size_t i = 0; i < n; ++i) {
      F.leq[i].resize(n, false);
      F.leq[i][i] = true;
    }
    for (const auto& [name, arity] : lang_.connectives) {
      auto it = F.ops.find(name);
      if (it == F.ops.end())
        throw PropError("fiber over " + base_->object_name(static_cast<ObjId>(c)) + " lacks connective " + name);
      size_t expect = 1;
      for (int i = 0; i < arity; ++i) expect *= n;
      if (it->second.arity != arity || it->second.table.size() != expect)
        throw PropError("connective table " + name + " over " + base_->object_name(static_cast<ObjId>(c)) +
                        " is not total");
    }
  }
  pulls_.assign(static_cast<size_t>(base_->morphism_count()), {});
}

void ExplicitPropCategory::set_pull(MorId f, std::vector<int> table) { pulls_.at(f) = std::move(table); }

void ExplicitPropCategory::set_quant(const std::string& q, ObjId b, ObjId c, std::vector<int> table) {
  quants_[{q, b, c}] = std::move(table);
}

void ExplicitPropCategory::set_eq(ObjId c, int elem) { eqs_[c] = elem; }

void ExplicitPropCategory::finish() {
  for (MorId f = 0; f < base_->morphism_count(); ++f) {
    ObjId b = base_->cod(f);
    if (pulls_[f].empty() && f == base_->identity(b)) {
      for (size_t i = 0; i < fibers_[b].elems.size(); ++i) pulls_[f].push_back(static_cast<int>(i));
    }
    if (pulls_[f].size() != fibers_[b].elems.size())
      throw PropError("fiber map for " + base_->morphism_name(f) + " is not total");
  }
  for (const auto& [bc, d] : base_->products()) {
    for (const auto& q : lang_.quantifiers) {
      auto it = quants_.find({q, bc.first, bc.second});
      if (it == quants_.end())
        throw PropError("quantifier " + q + " missing at " + base_->object_name(bc.first) + "," +
                        base_->object_name(bc.second));
      if (it->second.size() != fibers_[d.obj].elems.size()) throw PropError("quantifier table " + q + " not total");
    }
    if (bc.first == bc.second && !eqs_.count(bc.first))
      throw PropError("equality missing at " + base_->object_name(bc.first));
  }
}

std::optional<std::int64_t> ExplicitPropCategory::index_of(ObjId c, const Elem& r) const {
  if (!contains(c, r)) return std::nullopt;
  return r[0];
}

bool ExplicitPropCategory::contains(ObjId c, const Elem& r) const {
  return r.size() == 1 && r[0] >= 0 && r[0] < static_cast<Code>(fibers_.at(c).elems.size());
}

bool ExplicitPropCategory::leq(ObjId c, const Elem& a, const Elem& b) const { return fibers_.at(c).leq[a[0]][b[0]]; }

Elem ExplicitPropCategory::op(ObjId c, const std::string& name, const std::vector<Elem>& args) const {
  const auto& F = fibers_.at(c);
  auto it = F.ops.find(name);
  if (it == F.ops.end()) throw PropError("connective " + name + " not interpreted by " + label_);
  if (static_cast<int>(args.size()) != it->second.arity) throw PropError("arity mismatch for " + name);
  size_t idx = 0;
  for (const auto& a : args) idx = idx * F.elems.size() + static_cast<size_t>(a[0]);
  return Elem{it->second.table[idx]};
}

Elem ExplicitPropCategory::pull(MorId f, const Elem& r) const { return Elem{pulls_.at(f).at(r[0])}; }

Elem ExplicitPropCategory::quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const {
  auto it = quants_.find({q, b, c});
  if (it == quants_.end())
    throw PropError("quantifier " + q + " undefined at " + base_->object_name(b) + "," + base_->object_name(c));
  return Elem{it->second.at(r[0])};
}

Elem ExplicitPropCategory::eq(ObjId c) const {
  auto it = eqs_.find(c);
  if (it == eqs_.end()) throw PropError("equality undefined at " + base_->object_name(c));
  return Elem{it->second};
}

std::string ExplicitPropCategory::format(ObjId c, const Elem& r) const { return fibers_.at(c).elems.at(r[0]); }

Elem ExplicitPropCategory::parse(ObjId c, const SExpr& e) const {
  const auto& F = fibers_.at(c);
  if (e.is_atom())
    for (size_t i = 0; i < F.elems.size(); ++i)
      if (F.elems[i] == e.atom) return Elem{static_cast<Code>(i)};
  e.fail("not an element of the fiber over " + base_->object_name(c));
}

// ------------------------------------------------------------ products

ProductPropCategory::ProductPropCategory(std::vector<PropPtr> parts) : parts_(std::move(parts)) {
  std::vector<std::shared_ptr<const Category>> cats;
  for (const auto& p : parts_) cats.push_back(p->base_ptr());
  base_ = std::make_shared<ProductCategory>(cats);
  if (parts_.empty()) {
    lang_ = Language();
    // the terminal fiber is a one-element algebra for every connective
    lang_.connectives["top"] = 0;
    lang_.connectives["bot"] = 0;
    lang_.connectives["and"] = 2;
    lang_.connectives["or"] = 2;
    lang_.connectives["not"] = 1;
    lang_.quantifiers = {kForall, kExists};
  } else {
    lang_ = parts_[0]->language();
    for (size_t i = 1; i < parts_.size(); ++i) lang_ = lang_.meet(parts_[i]->language());
  }
}

std::string ProductPropCategory::describe() const {
  std::string s = "product(";
  for (size_t i = 0; i < parts_.size(); ++i) s += (i ? ", " : "") + parts_[i]->describe();
  return s + ")";
}

int ProductPropCategory::element_width(ObjId c) const {
  auto cs = base_->split_obj(c);
  int w = 0;
  for (size_t i = 0; i < parts_.size(); ++i) w += parts_[i]->element_width(cs[i]);
  return w;
}

std::vector<Elem> ProductPropCategory::split(ObjId c, const Elem& r) const {
  auto cs = base_->split_obj(c);
  std::vector<Elem> out(parts_.size());
  size_t pos = 0;
  for (size_t i = 0; i < parts_.size(); ++i) {
    size_t w = static_cast<size_t>(parts_[i]->element_width(cs[i]));
    if (pos + w > r.size()) throw PropError("product element has the wrong width");
    out[i].assign(r.begin() + pos, r.begin() + pos + w);
    pos += w;
  }
  if (pos != r.size()) throw PropError("product element has the wrong width");
  return out;
}

Elem ProductPropCategory::join(const std::vector<Elem>& xs) const {
  Elem r;
  for (const auto& x : xs) r.insert(r.end(), x.begin(), x.end());
  return r;
}

std::optional<std::int64_t> ProductPropCategory::fiber_size(ObjId c) const {
  auto cs = base_->split_obj(c);
  std::int64_t n = 1;
  for (size_t i = 0; i < parts_.size(); ++i) {
    auto k = parts_[i]->fiber_size(cs[i]);
    if (!k || (*k != 0 && n > kMaxEnumerable / *k)) return std::nullopt;
    n *= *k;
  }
  return n;
}

Elem ProductPropCategory::fiber_element(ObjId c, std::int64_t i) const {
  auto cs = base_->split_obj(c);
  std::vector<Elem> xs(parts_.size());
  for (size_t k = parts_.size(); k-- > 0;) {
    std::int64_t n = *parts_[k]->fiber_size(cs[k]);
    xs[k] = parts_[k]->fiber_element(cs[k], i % n);
    i /= n;
  }
  return join(xs);
}

std::optional<std::int64_t> ProductPropCategory::index_of(ObjId c, const Elem& r) const {
  auto cs = base_->split_obj(c);
  std::vector<Elem> xs;
  try {
    xs = split(c, r);
  } catch (const PropError&) {
    return std::nullopt;
  }
  std::int64_t idx = 0;
  for (size_t k = 0; k < parts_.size(); ++k) {
    auto n = parts_[k]->fiber_size(cs[k]);
    auto j = parts_[k]->index_of(cs[k], xs[k]);
    if (!n || !j) return std::nullopt;
    idx = idx * *n + *j;
  }
  return idx;
}

bool ProductPropCategory::symbolic(ObjId c) const {
  auto cs = base_->split_obj(c);
  for (size_t k = 0; k < parts_.size(); ++k)
    if (parts_[k]->symbolic(cs[k])) return true;
  return false;
}

std::vector<Elem> ProductPropCategory::probe_elements(ObjId c, const Probe& probe) const {
  auto cs = base_->split_obj(c);
  std::vector<std::vector<Elem>> lists;
  std::int64_t total = 1;
  for (size_t k = 0; k < parts_.size(); ++k) {
    lists.push_back(parts_[k]->probe_elements(cs[k], probe));
    total *= static_cast<std::int64_t>(lists.back().size());
    if (total > probe.max_elements) throw PropError("product probe fiber too large");
  }
  std::vector<Elem> out;
  for (std::int64_t i = 0; i < total; ++i) {
    std::vector<Elem> xs(parts_.size());
    std::int64_t j = i;
    for (size_t k = parts_.size(); k-- > 0;) {
      xs[k] = lists[k][j % lists[k].size()];
      j /= static_cast<std::int64_t>(lists[k].size());
    }
    out.push_back(join(xs));
  }
  return out;
}

bool ProductPropCategory::contains(ObjId c, const Elem& r) const {
  auto cs = base_->split_obj(c);
  std::vector<Elem> xs;
  try {
    xs = split(c, r);
  } catch (const PropError&) {
    return false;
  }
  for (size_t k = 0; k < parts_.size(); ++k)
    if (!parts_[k]->contains(cs[k], xs[k])) return false;
  return true;
}

bool ProductPropCategory::leq(ObjId c, const Elem& a, const Elem& b) const {
  auto cs = base_->split_obj(c);
  auto as = split(c, a), bs = split(c, b);
  for (size_t k = 0; k < parts_.size(); ++k)
    if (!parts_[k]->leq(cs[k], as[k], bs[k])) return false;
  return true;
}

Elem ProductPropCategory::op(ObjId c, const std::string& name, const std::vector<Elem>& args) const {
  auto it = lang_.connectives.find(name);
  if (it == lang_.connectives.end()) throw PropError("connective " + name + " not interpreted by the product");
  auto cs = base_->split_obj(c);
  std::vector<std::vector<Elem>> per(parts_.size());
  for (const auto& a : args) {
    auto xs = split(c, a);
    for (size_t k = 0; k < parts_.size(); ++k) per[k].push_back(xs[k]);
  }
  std::vector<Elem> out(parts_.size());
  for (size_t k = 0; k < parts_.size(); ++k) out[k] = parts_[k]->op(cs[k], name, per[k]);
  return join(out);
}

Elem ProductPropCategory::pull(MorId f, const Elem& r) const {
  auto fs = base_->split_mor(f);
  auto xs = split(base_->cod(f), r);
  for (size_t k = 0; k < parts_.size(); ++k) xs[k] = parts_[k]->pull(fs[k], xs[k]);
  return join(xs);
}

Elem ProductPropCategory::quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const {
  if (!lang_.quantifiers.count(q)) throw PropError("quantifier " + q + " not interpreted by the product");
  ProductData bc = base_->product_or_throw(b, c);
  auto bs = base_->split_obj(b), cs = base_->split_obj(c);
  auto xs = split(bc.obj, r);
  for (size_t k = 0; k < parts_.size(); ++k) xs[k] = parts_[k]->quant(q, bs[k], cs[k], xs[k]);
  return join(xs);
}

Elem ProductPropCategory::eq(ObjId c) const {
  auto cs = base_->split_obj(c);
  std::vector<Elem> xs(parts_.size());
  for (size_t k = 0; k < parts_.size(); ++k) xs[k] = parts_[k]->eq(cs[k]);
  return join(xs);
}

std::string ProductPropCategory::format(ObjId c, const Elem& r) const {
  auto cs = base_->split_obj(c);
  auto xs = split(c, r);
  std::string s = "(tuple";
  for (size_t k = 0; k < parts_.size(); ++k) s += " " + parts_[k]->format(cs[k], xs[k]);
  return s + ")";
}

Elem ProductPropCategory::parse(ObjId c, const SExpr& e) const {
  auto cs = base_->split_obj(c);
  if (!e.has_head("tuple") || e.size() != parts_.size() + 1)
    e.fail("expected (tuple ...) with " + std::to_string(parts_.size()) + " components");
  std::vector<Elem> xs(parts_.size());
  for (size_t k = 0; k < parts_.size(); ++k) xs[k] = parts_[k]->parse(cs[k], e[k + 1]);
  return join(xs);
}

// ------------------------------------------------------------ sub

SubPropCategory::SubPropCategory(std::string label, PropPtr parent, std::shared_ptr<const SubCategory> base,
                                 std::vector<std::vector<Elem>> fibers, std::map<ObjId, Elem> eqs)
    : label_(std::move(label)),
      parent_(std::move(parent)),
      base_(std::move(base)),
      fibers_(std::move(fibers)),
      eqs_(std::move(eqs)) {
  for (auto& f : fibers_) {
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
  }
  const Category& P = parent_->base();
  for (ObjId b = 0; b < base_->object_count(); ++b)
    for (ObjId c = 0; c < base_->object_count(); ++c) {
      auto d = base_->product(b, c);
      if (!d) continue;
      auto pp = P.product(base_->parent_obj(b), base_->parent_obj(c));
      if (!pp) throw PropError("parent lacks the product of " + base_->object_name(b) + "," + base_->object_name(c));
      MorId a = P.pair(base_->parent_mor(d->p1), base_->parent_mor(d->p2));
      auto inv = find_inverse(P, a);
      if (!inv) throw PropError("image product is not a product in the parent");
      ainv_[{b, c}] = *inv;
    }
}

std::optional<std::int64_t> SubPropCategory::index_of(ObjId c, const Elem& r) const {
  const auto& f = fibers_.at(c);
  auto it = std::lower_bound(f.begin(), f.end(), r);
  if (it == f.end() || *it != r) return std::nullopt;
  return static_cast<std::int64_t>(it - f.begin());
}

Elem SubPropCategory::quant(const std::string& q, ObjId b, ObjId c, const Elem& r) const {
  auto it = ainv_.find({b, c});
  if (it == ainv_.end()) throw PropError("no designated product " + base_->object_name(b) + "," + base_->object_name(c));
  Elem moved = parent_->pull(it->second, r);
  return parent_->quant(q, base_->parent_obj(b), base_->parent_obj(c), moved);
}

Elem SubPropCategory::eq(ObjId c) const {
  auto it = eqs_.find(c);
  if (it == eqs_.end()) throw PropError("equality undefined at " + base_->object_name(c));
  return it->second;
}

Elem SubPropCategory::parse(ObjId c, const SExpr& e) const {
  Elem r = parent_->parse(base_->parent_obj(c), e);
  if (!contains(c, r)) e.fail("element lies outside the subfiber");
  return r;
}

// ------------------------------------------------------------ builders

namespace {

std::shared_ptr<const WordCategory> word_base(const std::vector<AtomSpec>& atoms, int depth) {
  std::vector<WordCategory::Atom> as;
  for (const auto& a : atoms) as.push_back({a.name, a.elems});
  return std::make_shared<WordCategory>(as, depth);
}

QuantSpec meet_quant(DomainPtr d, const std::string& name) {
  return {name,
          [d](const Code* row, int m) {
            Code acc = d->top();
            for (int i = 0; i < m; ++i) acc = d->meet(acc, row[i]);
            return acc;
          },
          "meet over the second factor"};
}

QuantSpec join_quant(DomainPtr d, const std::string& name) {
  return {name,
          [d](const Code* row, int m) {
            Code acc = d->bottom();
            for (int i = 0; i < m; ++i) acc = d->join(acc, row[i]);
            return acc;
          },
          "join over the second factor"};
}

}  // namespace

std::shared_ptr<FunctionPropCategory> mk_lattice_propcat(const std::vector<AtomSpec>& atoms,
                                                          std::shared_ptr<const FiniteLattice> L, int product_depth) {
  if (product_depth < 1) throw PropError("product depth must be at least 1");
  L->verify();
  auto base = word_base(atoms, product_depth);
  std::vector<QuantSpec> qs{meet_quant(L, kForall), join_quant(L, kExists)};
  return std::make_shared<FunctionPropCategory>("lattice " + L->name(), base, L, qs);
}

std::shared_ptr<FunctionPropCategory> mk_powerset_propcat(const std::vector<AtomSpec>& atoms,
                                                           const std::vector<MostowskiSpec>& quants,
                                                           int product_depth) {
  if (product_depth < 1) throw PropError("product depth must be at least 1");
  auto base = word_base(atoms, product_depth);
  auto B = FiniteLattice::boolean();
  for (ObjId c = 0; c < base->object_count(); ++c) {
    int m = base->carrier_size(c);
    if (m > 64) throw PropError("carrier of " + base->object_name(c) + " exceeds 64 points");
    for (const auto& q : quants)
      if (!q.defined_for(m))
        throw PropError("spec missing a carrier: quantifier " + q.name + " has no family for " +
                        base->object_name(c) + " (" + std::to_string(m) + " points)");
  }
  std::vector<QuantSpec> qs;
  for (const auto& q : quants) {
    MostowskiSpec spec = q;
    qs.push_back({q.name,
                  [spec](const Code* row, int m) -> Code {
                    std::uint64_t mask = 0;
                    for (int i = 0; i < m; ++i)
                      if (row[i] == 1) mask |= std::uint64_t{1} << i;
                    return spec.accepts(m, mask) ? 1 : 0;
                  },
                  q.describe()});
  }
  return std::make_shared<FunctionPropCategory>("powerset", base, B, qs);
}

std::string tnorm_quantifier_name(const TNorm& t) { return "Ω" + t.name; }

std::shared_ptr<FunctionPropCategory> mk_fuzzy_propcat(const std::vector<AtomSpec>& atoms, const TNorm& tnorm,
                                                        const std::vector<std::string>& quantifiers,
                                                        int product_depth, const Probe& probe) {
  if (product_depth < 1) throw PropError("product depth must be at least 1");
  const auto& V = probe.values;
  auto T = [&](const Rational& a, const Rational& b) { return tnorm.fn(a, b); };
  auto show3 = [](const Rational& a, const Rational& b, const Rational& c) {
    return format_rational(a) + "," + format_rational(b) + "," + format_rational(c);
  };
  for (const auto& a : V) {
    if (T(a, Rational(1)) != a || T(Rational(1), a) != a)
      throw PropError("tnorm law violation: unit 1 fails at " + format_rational(a));
    for (const auto& b : V) {
      Rational ab = T(a, b);
      if (ab < 0 || ab > 1) throw PropError("tnorm law violation: value outside [0,1]");
      if (ab != T(b, a)) throw PropError("tnorm law violation: commutativity at " + format_rational(a) + "," + format_rational(b));
      for (const auto& c : V) {
        if (T(ab, c) != T(a, T(b, c))) throw PropError("tnorm law violation: associativity at " + show3(a, b, c));
        if (a <= b && T(a, c) > T(b, c)) throw PropError("tnorm law violation: monotonicity at " + show3(a, b, c));
      }
    }
  }
  auto base = word_base(atoms, product_depth);
  auto D = std::make_shared<RationalUnit>(tnorm);
  std::vector<QuantSpec> qs;
  std::string omega = tnorm_quantifier_name(tnorm);
  for (const auto& q : quantifiers) {
    if (q == kForall) {
      qs.push_back(meet_quant(D, kForall));
    } else if (q == kExists) {
      qs.push_back(join_quant(D, kExists));
    } else if (q == omega) {
      TNorm t = tnorm;
      qs.push_back({omega,
                    [t](const Code* row, int m) {
                      Rational acc(1);
                      for (int i = 0; i < m; ++i) acc = t.fn(acc, unpack_rational(row[i]));
                      return pack_rational(acc);
                    },
                    "iterated tensor over the second factor"});
    } else {
      throw PropError("unknown fuzzy quantifier " + q + " (expected forall, exists or " + omega + ")");
    }
  }
  return std::make_shared<FunctionPropCategory>("fuzzy " + tnorm.name, base, D, qs);
}

std::shared_ptr<ProductPropCategory> product_propcat(const std::vector<PropPtr>& parts) {
  return std::make_shared<ProductPropCategory>(parts);
}

}  // namespace pcat
