// SPDX-License-Identifier: Apache-2.0
#include "pcat/category.hpp"

#include <algorithm>

namespace pcat {

std::optional<ObjId> Category::find_object(const std::string& name) const {
  for (ObjId a = 0; a < object_count(); ++a)
    if (object_name(a) == name) return a;
  return std::nullopt;
}

std::optional<MorId> Category::find_morphism(const std::string& name) const {
  for (MorId f = 0; f < morphism_count(); ++f)
    if (morphism_name(f) == name) return f;
  return std::nullopt;
}

MorId Category::bang(ObjId a) const {
  if (hom_size(a, terminal()) != 1)
    throw CategoryError("terminal object " + object_name(terminal()) + " has " +
                        std::to_string(hom_size(a, terminal())) + " morphisms from " + object_name(a));
  return hom_at(a, terminal(), 0);
}

std::vector<MorId> Category::hom(ObjId a, ObjId b) const {
  std::vector<MorId> out;
  MorId n = hom_size(a, b);
  out.reserve(static_cast<size_t>(n));
  for (MorId i = 0; i < n; ++i) out.push_back(hom_at(a, b, i));
  return out;
}

ProductData Category::product_or_throw(ObjId b, ObjId c) const {
  auto p = product(b, c);
  if (!p) throw CategoryError("no designated product " + object_name(b) + " x " + object_name(c));
  return *p;
}

std::optional<ObjId> product_of(const Category& C, const std::vector<ObjId>& factors) {
  if (factors.empty()) return C.terminal();
  ObjId acc = factors[0];
  for (size_t k = 1; k < factors.size(); ++k) {
    auto p = C.product(acc, factors[k]);
    if (!p) return std::nullopt;
    acc = p->obj;
  }
  return acc;
}

ObjId product_of_or_throw(const Category& C, const std::vector<ObjId>& factors) {
  auto p = product_of(C, factors);
  if (!p) {
    std::string s;
    for (ObjId a : factors) s += (s.empty() ? "" : " x ") + C.object_name(a);
    throw CategoryError("product " + s + " exceeds the designated products");
  }
  return *p;
}

MorId projection(const Category& C, const std::vector<ObjId>& factors, size_t i) {
  size_t n = factors.size();
  if (i >= n) throw CategoryError("projection index out of range");
  if (n == 1) return C.identity(factors[0]);
  std::vector<ObjId> prefix(factors.begin(), factors.end() - 1);
  ProductData d = C.product_or_throw(product_of_or_throw(C, prefix), factors.back());
  if (i == n - 1) return d.p2;
  return C.compose(projection(C, prefix, i), d.p1);
}

MorId tuple(const Category& C, ObjId dom, const std::vector<ObjId>& factors,
            const std::vector<MorId>& comps) {
  if (factors.size() != comps.size()) throw CategoryError("tuple arity mismatch");
  if (comps.empty()) return C.bang(dom);
  if (comps.size() == 1) return comps[0];
  std::vector<ObjId> pf(factors.begin(), factors.end() - 1);
  std::vector<MorId> pc(comps.begin(), comps.end() - 1);
  return C.pair(tuple(C, dom, pf, pc), comps.back());
}

MorId assoc_iso(const Category& C, ObjId b, ObjId c, ObjId d) {
  ProductData cd = C.product_or_throw(c, d);
  ProductData bcd = C.product_or_throw(b, cd.obj);
  MorId left = C.pair(bcd.p1, C.compose(cd.p1, bcd.p2));
  return C.pair(left, C.compose(cd.p2, bcd.p2));
}

std::optional<MorId> find_inverse(const Category& C, MorId m) {
  ObjId a = C.dom(m), b = C.cod(m);
  if (a == b && m == C.identity(a)) return m;
  MorId ida = C.identity(a), idb = C.identity(b);
  MorId n = C.hom_size(b, a);
  for (MorId i = 0; i < n; ++i) {
    MorId g = C.hom_at(b, a, i);
    if (C.compose(g, m) == ida && C.compose(m, g) == idb) return g;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- explicit

ExplicitCategory::ExplicitCategory(std::vector<std::string> objects, std::vector<Mor> mors,
                                   std::vector<MorId> identities, ObjId terminal)
    : objects_(std::move(objects)), mors_(std::move(mors)), ids_(std::move(identities)), terminal_(terminal) {
  size_t n = mors_.size();
  comp_.assign(n * n, -1);
  homs_.assign(objects_.size() * objects_.size(), {});
  for (size_t f = 0; f < n; ++f) {
    const Mor& m = mors_[f];
    if (m.dom < 0 || m.cod < 0 || m.dom >= object_count() || m.cod >= object_count())
      throw CategoryError("morphism " + m.name + " has unknown endpoints");
    homs_[m.dom * objects_.size() + m.cod].push_back(static_cast<MorId>(f));
  }
  if (ids_.size() != objects_.size()) throw CategoryError("identity table incomplete");
}

void ExplicitCategory::set_comp(MorId g, MorId f, MorId h) {
  if (cod(f) != dom(g)) throw CategoryError("composition of non-composable " + mors_[g].name + " . " + mors_[f].name);
  comp_[g * mors_.size() + f] = h;
}

void ExplicitCategory::set_product(ObjId b, ObjId c, ProductData d) { prod_[{b, c}] = d; }
void ExplicitCategory::set_pair(MorId f, MorId g, MorId h) { pair_[{f, g}] = h; }

void ExplicitCategory::finish() {
  size_t n = mors_.size();
  for (size_t g = 0; g < n; ++g)
    for (size_t f = 0; f < n; ++f) {
      if (mors_[f].cod != mors_[g].dom) continue;
      if (comp_[g * n + f] < 0) {
        // identities compose without needing table entries
        if (static_cast<MorId>(g) == ids_[mors_[g].dom]) {
          comp_[g * n + f] = static_cast<MorId>(f);
        } else if (static_cast<MorId>(f) == ids_[mors_[f].cod]) {
          comp_[g * n + f] = static_cast<MorId>(g);
        } else {
          throw CategoryError("composition table missing " + mors_[g].name + " . " + mors_[f].name);
        }
      }
    }
  for (const auto& [bc, d] : prod_) {
    for (ObjId a = 0; a < object_count(); ++a)
      for (MorId f : homs_[a * objects_.size() + bc.first])
        for (MorId g : homs_[a * objects_.size() + bc.second])
          if (!pair_.count({f, g}))
            throw CategoryError("pairing table missing <" + mors_[f].name + "," + mors_[g].name + ">");
  }
}

MorId ExplicitCategory::compose(MorId g, MorId f) const {
  MorId h = comp_.at(g * mors_.size() + f);
  if (h < 0) throw CategoryError("cannot compose " + mors_[g].name + " . " + mors_[f].name);
  return h;
}

std::optional<ProductData> ExplicitCategory::product(ObjId b, ObjId c) const {
  auto it = prod_.find({b, c});
  if (it == prod_.end()) return std::nullopt;
  return it->second;
}

MorId ExplicitCategory::pair(MorId f, MorId g) const {
  auto it = pair_.find({f, g});
  if (it == pair_.end()) throw CategoryError("no pairing <" + mors_.at(f).name + "," + mors_.at(g).name + ">");
  return it->second;
}

MorId ExplicitCategory::hom_size(ObjId a, ObjId b) const {
  return static_cast<MorId>(homs_.at(a * objects_.size() + b).size());
}

MorId ExplicitCategory::hom_at(ObjId a, ObjId b, MorId i) const { return homs_.at(a * objects_.size() + b).at(i); }

// ---------------------------------------------------------------- words

namespace {
constexpr MorId kMaxMorphisms = 20'000'000;
constexpr MorId kCompCacheLimit = 1024;

MorId ipow(MorId b, MorId e) {
  MorId r = 1;
  for (MorId k = 0; k < e; ++k) {
    r *= b;
    if (r > kMaxMorphisms) return kMaxMorphisms + 1;
  }
  return r;
}
}  // namespace

WordCategory::WordCategory(std::vector<Atom> atoms, int depth) : atoms_(std::move(atoms)), depth_(depth) {
  if (depth < 1) throw CategoryError("product depth must be at least 1");
  words_.push_back({});
  std::vector<std::vector<int>> layer{{}};
  for (int len = 1; len <= depth && !atoms_.empty(); ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& w : layer)
      for (int a = 0; a < static_cast<int>(atoms_.size()); ++a) {
        auto v = w;
        v.push_back(a);
        next.push_back(v);
      }
    std::sort(next.begin(), next.end());
    words_.insert(words_.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  for (ObjId i = 0; i < static_cast<ObjId>(words_.size()); ++i) {
    index_[words_[i]] = i;
    int s = 1;
    for (int a : words_[i]) s *= static_cast<int>(atoms_[a].elems.size());
    sizes_.push_back(s);
  }
  size_t n = words_.size();
  offset_.resize(n * n);
  count_.resize(n * n);
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      MorId c = ipow(sizes_[b], sizes_[a]);
      offset_[a * n + b] = total_;
      count_[a * n + b] = c;
      total_ += c;
      if (total_ > kMaxMorphisms)
        throw CategoryError("base category too large: more than " + std::to_string(kMaxMorphisms) +
                            " morphisms (reduce product depth or atom sizes)");
    }
  if (total_ <= kCompCacheLimit) {
    std::vector<std::vector<int>> tabs(total_);
    for (MorId f = 0; f < total_; ++f) tabs[f] = table(f);
    comp_cache_.assign(total_ * total_, -1);
    for (MorId f = 0; f < total_; ++f)
      for (MorId g = 0; g < total_; ++g) {
        if (cod(f) != dom(g)) continue;
        std::vector<int> h(tabs[f].size());
        for (size_t i = 0; i < h.size(); ++i) h[i] = tabs[g][tabs[f][i]];
        comp_cache_[g * total_ + f] = static_cast<std::int32_t>(from_table(dom(f), cod(g), h));
      }
  }
}

std::optional<ObjId> WordCategory::object_of(const std::vector<int>& w) const {
  auto it = index_.find(w);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string WordCategory::object_name(ObjId a) const {
  const auto& w = words_.at(a);
  if (w.empty()) return "1";
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) s += (i ? "*" : "") + atoms_[w[i]].name;
  return s;
}

std::pair<ObjId, ObjId> WordCategory::locate(MorId f) const {
  if (f < 0 || f >= total_) throw CategoryError("morphism id out of range");
  auto it = std::upper_bound(offset_.begin(), offset_.end(), f);
  size_t k = static_cast<size_t>(it - offset_.begin()) - 1;
  size_t n = words_.size();
  return {static_cast<ObjId>(k / n), static_cast<ObjId>(k % n)};
}

std::vector<int> WordCategory::table(MorId f) const {
  auto [a, b] = locate(f);
  MorId i = f - offset_[a * words_.size() + b];
  std::vector<int> t(sizes_[a]);
  for (auto& x : t) {
    x = static_cast<int>(i % sizes_[b]);
    i /= sizes_[b];
  }
  return t;
}

MorId WordCategory::from_table(ObjId a, ObjId b, const std::vector<int>& t) const {
  if (static_cast<int>(t.size()) != sizes_[a]) throw CategoryError("table length mismatch");
  MorId i = 0, w = 1;
  for (int x : t) {
    if (x < 0 || x >= sizes_[b]) throw CategoryError("table entry out of range");
    i += x * w;
    w *= sizes_[b];
  }
  return offset_[a * words_.size() + b] + i;
}

std::vector<int> WordCategory::point(ObjId a, int p) const {
  const auto& w = words_.at(a);
  std::vector<int> out(w.size());
  for (size_t k = w.size(); k-- > 0;) {
    int s = static_cast<int>(atoms_[w[k]].elems.size());
    out[k] = p % s;
    p /= s;
  }
  return out;
}

std::string WordCategory::point_name(ObjId a, int p) const {
  auto pt = point(a, p);
  const auto& w = words_.at(a);
  if (w.size() == 1) return atoms_[w[0]].elems[pt[0]];
  std::string s = "(";
  for (size_t k = 0; k < pt.size(); ++k) s += (k ? " " : "") + atoms_[w[k]].elems[pt[k]];
  return s + ")";
}

std::string WordCategory::morphism_name(MorId f) const {
  auto [a, b] = locate(f);
  auto t = table(f);
  std::string s = object_name(a) + "->" + object_name(b) + "[";
  for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + "]";
}

std::optional<ObjId> WordCategory::find_object(const std::string& name) const {
  for (ObjId a = 0; a < object_count(); ++a)
    if (object_name(a) == name) return a;
  return std::nullopt;
}

std::optional<MorId> WordCategory::find_morphism(const std::string& name) const {
  auto arrow = name.find("->");
  auto br = name.find('[');
  if (arrow == std::string::npos || br == std::string::npos || name.back() != ']') return std::nullopt;
  auto a = find_object(name.substr(0, arrow));
  auto b = find_object(name.substr(arrow + 2, br - arrow - 2));
  if (!a || !b) return std::nullopt;
  std::vector<int> t;
  std::string body = name.substr(br + 1, name.size() - br - 2);
  size_t pos = 0;
  while (pos < body.size()) {
    size_t next = body.find(',', pos);
    if (next == std::string::npos) next = body.size();
    try {
      t.push_back(std::stoi(body.substr(pos, next - pos)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    pos = next + 1;
  }
  if (static_cast<int>(t.size()) != sizes_[*a]) return std::nullopt;
  for (int x : t)
    if (x < 0 || x >= sizes_[*b]) return std::nullopt;
  return from_table(*a, *b, t);
}

MorId WordCategory::identity(ObjId a) const {
  std::vector<int> t(sizes_.at(a));
  for (int i = 0; i < sizes_[a]; ++i) t[i] = i;
  return from_table(a, a, t);
}

MorId WordCategory::compose(MorId g, MorId f) const {
  if (!comp_cache_.empty()) {
    std::int32_t h = comp_cache_[g * total_ + f];
    if (h < 0) throw CategoryError("cannot compose " + morphism_name(g) + " . " + morphism_name(f));
    return h;
  }
  auto [a, b] = locate(f);
  auto [b2, c] = locate(g);
  if (b != b2) throw CategoryError("cannot compose " + morphism_name(g) + " . " + morphism_name(f));
  auto tf = table(f);
  auto tg = table(g);
  for (auto& x : tf) x = tg[x];
  return from_table(a, c, tf);
}

std::optional<ProductData> WordCategory::product(ObjId b, ObjId c) const {
  auto w = words_.at(b);
  w.insert(w.end(), words_.at(c).begin(), words_.at(c).end());
  auto bc = object_of(w);
  if (!bc) return std::nullopt;
  int n = sizes_[*bc], sc = sizes_[c];
  std::vector<int> t1(n), t2(n);
  for (int p = 0; p < n; ++p) {
    t1[p] = p / sc;
    t2[p] = p % sc;
  }
  return ProductData{*bc, from_table(*bc, b, t1), from_table(*bc, c, t2)};
}

MorId WordCategory::pair(MorId f, MorId g) const {
  auto [a, u] = locate(f);
  auto [a2, v] = locate(g);
  if (a != a2) throw CategoryError("pairing needs a common domain");
  auto p = product(u, v);
  if (!p) throw CategoryError("no designated product " + object_name(u) + " x " + object_name(v));
  auto tf = table(f), tg = table(g);
  for (size_t i = 0; i < tf.size(); ++i) tf[i] = tf[i] * sizes_[v] + tg[i];
  return from_table(a, p->obj, tf);
}

MorId WordCategory::hom_size(ObjId a, ObjId b) const { return count_.at(a * words_.size() + b); }

MorId WordCategory::hom_at(ObjId a, ObjId b, MorId i) const {
  if (i < 0 || i >= hom_size(a, b)) throw CategoryError("hom index out of range");
  return offset_[a * words_.size() + b] + i;
}

// ---------------------------------------------------------------- products

ProductCategory::ProductCategory(std::vector<std::shared_ptr<const Category>> parts) : parts_(std::move(parts)) {
  for (const auto& p : parts_) {
    nobj_ *= p->object_count();
    nmor_ *= p->morphism_count();
  }
}

std::vector<ObjId> ProductCategory::split_obj(ObjId a) const {
  std::vector<ObjId> xs(parts_.size());
  for (size_t k = parts_.size(); k-- > 0;) {
    xs[k] = a % parts_[k]->object_count();
    a /= parts_[k]->object_count();
  }
  return xs;
}

ObjId ProductCategory::join_obj(const std::vector<ObjId>& xs) const {
  ObjId a = 0;
  for (size_t k = 0; k < parts_.size(); ++k) a = a * parts_[k]->object_count() + xs[k];
  return a;
}

std::vector<MorId> ProductCategory::split_mor(MorId f) const {
  std::vector<MorId> xs(parts_.size());
  for (size_t k = parts_.size(); k-- > 0;) {
    xs[k] = f % parts_[k]->morphism_count();
    f /= parts_[k]->morphism_count();
  }
  return xs;
}

MorId ProductCategory::join_mor(const std::vector<MorId>& xs) const {
  MorId f = 0;
  for (size_t k = 0; k < parts_.size(); ++k) f = f * parts_[k]->morphism_count() + xs[k];
  return f;
}

std::string ProductCategory::object_name(ObjId a) const {
  auto xs = split_obj(a);
  std::string s = "<";
  for (size_t k = 0; k < xs.size(); ++k) s += (k ? "|" : "") + parts_[k]->object_name(xs[k]);
  return s + ">";
}

std::string ProductCategory::morphism_name(MorId f) const {
  auto xs = split_mor(f);
  std::string s = "<";
  for (size_t k = 0; k < xs.size(); ++k) s += (k ? "|" : "") + parts_[k]->morphism_name(xs[k]);
  return s + ">";
}

ObjId ProductCategory::dom(MorId f) const {
  auto xs = split_mor(f);
  std::vector<ObjId> os(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) os[k] = parts_[k]->dom(xs[k]);
  return join_obj(os);
}

ObjId ProductCategory::cod(MorId f) const {
  auto xs = split_mor(f);
  std::vector<ObjId> os(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) os[k] = parts_[k]->cod(xs[k]);
  return join_obj(os);
}

MorId ProductCategory::identity(ObjId a) const {
  auto xs = split_obj(a);
  std::vector<MorId> ms(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) ms[k] = parts_[k]->identity(xs[k]);
  return join_mor(ms);
}

MorId ProductCategory::compose(MorId g, MorId f) const {
  auto gs = split_mor(g), fs = split_mor(f);
  for (size_t k = 0; k < gs.size(); ++k) gs[k] = parts_[k]->compose(gs[k], fs[k]);
  return join_mor(gs);
}

ObjId ProductCategory::terminal() const {
  std::vector<ObjId> os(parts_.size());
  for (size_t k = 0; k < parts_.size(); ++k) os[k] = parts_[k]->terminal();
  return join_obj(os);
}

std::optional<ProductData> ProductCategory::product(ObjId b, ObjId c) const {
  auto bs = split_obj(b), cs = split_obj(c);
  std::vector<ObjId> os(parts_.size());
  std::vector<MorId> p1(parts_.size()), p2(parts_.size());
  for (size_t k = 0; k < parts_.size(); ++k) {
    auto d = parts_[k]->product(bs[k], cs[k]);
    if (!d) return std::nullopt;
    os[k] = d->obj;
    p1[k] = d->p1;
    p2[k] = d->p2;
  }
  return ProductData{join_obj(os), join_mor(p1), join_mor(p2)};
}

MorId ProductCategory::pair(MorId f, MorId g) const {
  auto fs = split_mor(f), gs = split_mor(g);
  for (size_t k = 0; k < fs.size(); ++k) fs[k] = parts_[k]->pair(fs[k], gs[k]);
  return join_mor(fs);
}

MorId ProductCategory::hom_size(ObjId a, ObjId b) const {
  auto as = split_obj(a), bs = split_obj(b);
  MorId n = 1;
  for (size_t k = 0; k < parts_.size(); ++k) n *= parts_[k]->hom_size(as[k], bs[k]);
  return n;
}

MorId ProductCategory::hom_at(ObjId a, ObjId b, MorId i) const {
  auto as = split_obj(a), bs = split_obj(b);
  std::vector<MorId> ms(parts_.size());
  for (size_t k = parts_.size(); k-- > 0;) {
    MorId n = parts_[k]->hom_size(as[k], bs[k]);
    ms[k] = parts_[k]->hom_at(as[k], bs[k], i % n);
    i /= n;
  }
  return join_mor(ms);
}

// ---------------------------------------------------------------- sub

SubCategory::SubCategory(std::shared_ptr<const Category> parent, std::vector<ObjId> objs, std::vector<MorId> mors,
                         ObjId terminal_local)
    : parent_(std::move(parent)), objs_(std::move(objs)), mors_(std::move(mors)), terminal_(terminal_local) {
  for (ObjId i = 0; i < static_cast<ObjId>(objs_.size()); ++i) obj_index_[objs_[i]] = i;
  for (MorId i = 0; i < static_cast<MorId>(mors_.size()); ++i) mor_index_[mors_[i]] = i;
  size_t n = objs_.size();
  homs_.assign(n * n, {});
  for (MorId i = 0; i < static_cast<MorId>(mors_.size()); ++i) {
    auto a = local_obj(parent_->dom(mors_[i]));
    auto b = local_obj(parent_->cod(mors_[i]));
    if (!a || !b) throw CategoryError("subcategory morphism with endpoints outside the subcategory");
    homs_[*a * n + *b].push_back(i);
  }
}

void SubCategory::set_product(ObjId b, ObjId c, ProductData local) { prod_[{b, c}] = local; }
void SubCategory::set_pair(MorId f, MorId g, MorId h) { pair_[{f, g}] = h; }

std::optional<ObjId> SubCategory::local_obj(ObjId p) const {
  auto it = obj_index_.find(p);
  if (it == obj_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<MorId> SubCategory::local_mor(MorId p) const {
  auto it = mor_index_.find(p);
  if (it == mor_index_.end()) return std::nullopt;
  return it->second;
}

ObjId SubCategory::dom(MorId f) const { return *local_obj(parent_->dom(mors_.at(f))); }
ObjId SubCategory::cod(MorId f) const { return *local_obj(parent_->cod(mors_.at(f))); }

MorId SubCategory::identity(ObjId a) const {
  auto m = local_mor(parent_->identity(objs_.at(a)));
  if (!m) throw CategoryError("subcategory lacks identity on " + object_name(a));
  return *m;
}

MorId SubCategory::compose(MorId g, MorId f) const {
  auto m = local_mor(parent_->compose(mors_.at(g), mors_.at(f)));
  if (!m) throw CategoryError("subcategory not closed under composition");
  return *m;
}

std::optional<ProductData> SubCategory::product(ObjId b, ObjId c) const {
  auto it = prod_.find({b, c});
  if (it == prod_.end()) return std::nullopt;
  return it->second;
}

MorId SubCategory::pair(MorId f, MorId g) const {
  auto it = pair_.find({f, g});
  if (it == pair_.end()) throw CategoryError("no pairing <" + morphism_name(f) + "," + morphism_name(g) + ">");
  return it->second;
}

MorId SubCategory::hom_size(ObjId a, ObjId b) const {
  return static_cast<MorId>(homs_.at(a * objs_.size() + b).size());
}

MorId SubCategory::hom_at(ObjId a, ObjId b, MorId i) const { return homs_.at(a * objs_.size() + b).at(i); }

}  // namespace pcat
