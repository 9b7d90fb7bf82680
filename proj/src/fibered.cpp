// SPDX-License-Identifier: Apache-2.0
#include "pcat/fibered.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace pcat {

// ------------------------------------------------------------ constructors

MorphPtr identity_morphism(PropPtr P) {
  return std::make_shared<FnMorphism>(
      "id_" + P->describe(), P, P, [](ObjId a) { return a; }, [](MorId f) { return f; },
      [](ObjId, const Elem& r) { return r; });
}

MorphPtr compose_morphisms(MorphPtr G, MorphPtr F) {
  if (F->target() != G->source()) throw FiberedError("cannot compose " + G->describe() + " after " + F->describe());
  return std::make_shared<FnMorphism>(
      G->describe() + " . " + F->describe(), F->source(), G->target(), [F, G](ObjId a) { return G->obj(F->obj(a)); },
      [F, G](MorId f) { return G->mor(F->mor(f)); },
      [F, G](ObjId c, const Elem& r) { return G->fiber(F->obj(c), F->fiber(c, r)); });
}

namespace {

std::shared_ptr<const FunctionPropCategory> as_function(const PropPtr& P, const char* what) {
  auto f = std::dynamic_pointer_cast<const FunctionPropCategory>(P);
  if (!f) throw FiberedError(std::string(what) + " must be a function prop-category (lattice, powerset or fuzzy)");
  return f;
}

bool same_shape(const WordCategory& a, const WordCategory& b) {
  if (a.depth() != b.depth() || a.atoms().size() != b.atoms().size()) return false;
  for (size_t i = 0; i < a.atoms().size(); ++i)
    if (a.atoms()[i].elems.size() != b.atoms()[i].elems.size()) return false;
  return true;
}

int point_index(const WordCategory& W, ObjId a, const std::vector<int>& pt) {
  const auto& w = W.word(a);
  int idx = 0;
  for (size_t i = 0; i < w.size(); ++i) idx = idx * static_cast<int>(W.atoms()[w[i]].elems.size()) + pt[i];
  return idx;
}

}  // namespace

MorphPtr value_morphism(std::string name, PropPtr P, PropPtr Q, const std::map<Code, Code>& values) {
  auto fp = as_function(P, "value-map source");
  auto fq = as_function(Q, "value-map target");
  if (!same_shape(fp->words(), fq->words()))
    throw FiberedError("value-map morphism needs the same atom sizes and depth on both sides");
  for (const auto& [a, b] : values) {
    if (!fp->domain().valid(a)) throw FiberedError("value map: source value out of range");
    if (!fq->domain().valid(b)) throw FiberedError("value map: target value out of range");
  }
  auto vals = std::make_shared<const std::map<Code, Code>>(values);
  return std::make_shared<FnMorphism>(
      std::move(name), P, Q, [](ObjId a) { return a; }, [](MorId f) { return f; },
      [vals, fp](ObjId, const Elem& r) {
        Elem out(r.size());
        for (size_t i = 0; i < r.size(); ++i) {
          auto it = vals->find(r[i]);
          if (it == vals->end())
            throw FiberedError("value map undefined at " + fp->domain().format(r[i]));
          out[i] = it->second;
        }
        return out;
      });
}

MorphPtr relabel_morphism(std::string name, PropPtr P, PropPtr Q, const std::vector<AtomRelabel>& atoms) {
  auto fp = as_function(P, "relabel source");
  auto fq = as_function(Q, "relabel target");
  const WordCategory& A = fp->words();
  const WordCategory& B = fq->words();
  if (A.depth() != B.depth()) throw FiberedError("relabel: depths differ");
  size_t n = A.atoms().size();
  if (atoms.size() != n || B.atoms().size() != n) throw FiberedError("relabel: every atom needs exactly one image");
  std::vector<int> amap(n, -1);
  std::vector<std::vector<int>> emap(n);
  auto atom_index = [](const WordCategory& W, const std::string& s) {
    for (size_t i = 0; i < W.atoms().size(); ++i)
      if (W.atoms()[i].name == s) return static_cast<int>(i);
    throw FiberedError("relabel: unknown atom " + s);
  };
  std::set<int> hit;
  for (const auto& r : atoms) {
    int i = atom_index(A, r.from), j = atom_index(B, r.to);
    const auto& ea = A.atoms()[i].elems;
    const auto& eb = B.atoms()[j].elems;
    if (ea.size() != eb.size() || r.elems.size() != ea.size()) throw FiberedError("relabel: " + r.from + " needs a bijection");
    amap[i] = j;
    hit.insert(j);
    emap[i].assign(ea.size(), -1);
    std::set<int> used;
    for (const auto& [x, y] : r.elems) {
      auto xi = std::find(ea.begin(), ea.end(), x) - ea.begin();
      auto yi = std::find(eb.begin(), eb.end(), y) - eb.begin();
      if (xi == static_cast<long>(ea.size()) || yi == static_cast<long>(eb.size()))
        throw FiberedError("relabel: unknown element in " + r.from);
      emap[i][xi] = static_cast<int>(yi);
      used.insert(static_cast<int>(yi));
    }
    if (used.size() != ea.size()) throw FiberedError("relabel: " + r.from + " needs a bijection");
  }
  if (hit.size() != n) throw FiberedError("relabel: atom map is not a bijection");
  // object map and point permutations
  std::vector<ObjId> omap(A.object_count());
  std::vector<std::vector<int>> pmap(A.object_count());
  for (ObjId a = 0; a < A.object_count(); ++a) {
    std::vector<int> w;
    for (int l : A.word(a)) w.push_back(amap[l]);
    auto b = B.object_of(w);
    if (!b) throw FiberedError("relabel: missing object");
    omap[a] = *b;
    int m = A.carrier_size(a);
    pmap[a].resize(m);
    for (int p = 0; p < m; ++p) {
      auto pt = A.point(a, p);
      const auto& wa = A.word(a);
      for (size_t k = 0; k < pt.size(); ++k) pt[k] = emap[wa[k]][pt[k]];
      pmap[a][p] = point_index(B, *b, pt);
    }
  }
  auto om = std::make_shared<const std::vector<ObjId>>(std::move(omap));
  auto pm = std::make_shared<const std::vector<std::vector<int>>>(std::move(pmap));
  return std::make_shared<FnMorphism>(
      std::move(name), P, Q, [om](ObjId a) { return om->at(a); },
      [fp, fq, om, pm](MorId f) {
        const WordCategory& A = fp->words();
        ObjId a = A.dom(f), b = A.cod(f);
        auto t = A.table(f);
        std::vector<int> u(t.size());
        for (size_t p = 0; p < t.size(); ++p) u[(*pm)[a][p]] = (*pm)[b][t[p]];
        return fq->words().from_table((*om)[a], (*om)[b], u);
      },
      [pm](ObjId c, const Elem& r) {
        Elem out(r.size());
        for (size_t p = 0; p < r.size(); ++p) out[(*pm)[c][p]] = r[p];
        return out;
      });
}

MorphPtr projection_morphism(std::shared_ptr<const ProductPropCategory> P, size_t i) {
  if (i >= P->arity()) throw FiberedError("projection index out of range");
  return std::make_shared<FnMorphism>(
      "pi" + std::to_string(i + 1), P, P->part_ptr(i), [P, i](ObjId a) { return P->product_base().split_obj(a)[i]; },
      [P, i](MorId f) { return P->product_base().split_mor(f)[i]; },
      [P, i](ObjId c, const Elem& r) { return P->split(c, r)[i]; });
}

MorphPtr pairing_morphism(std::shared_ptr<const ProductPropCategory> Q, const std::vector<MorphPtr>& parts) {
  if (parts.size() != Q->arity()) throw FiberedError("pairing needs one morphism per factor");
  if (parts.empty()) throw FiberedError("pairing into the empty product needs an explicit source");
  PropPtr src = parts[0]->source();
  std::string name = "<";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (parts[i]->source() != src) throw FiberedError("pairing: morphisms have different sources");
    if (parts[i]->target() != Q->part_ptr(i)) throw FiberedError("pairing: target mismatch at factor " + std::to_string(i + 1));
    name += (i ? "," : "") + parts[i]->describe();
  }
  return std::make_shared<FnMorphism>(
      name + ">", src, Q,
      [Q, parts](ObjId a) {
        std::vector<ObjId> xs;
        for (const auto& F : parts) xs.push_back(F->obj(a));
        return Q->product_base().join_obj(xs);
      },
      [Q, parts](MorId f) {
        std::vector<MorId> xs;
        for (const auto& F : parts) xs.push_back(F->mor(f));
        return Q->product_base().join_mor(xs);
      },
      [Q, parts](ObjId c, const Elem& r) {
        std::vector<Elem> xs;
        for (const auto& F : parts) xs.push_back(F->fiber(c, r));
        return Q->join(xs);
      });
}

MorphPtr table_morphism(std::string name, PropPtr P, PropPtr Q, std::vector<ObjId> omap, std::vector<MorId> mmap,
                        std::vector<std::vector<Elem>> pmap) {
  if (static_cast<int>(omap.size()) != P->base().object_count()) throw FiberedError("object map is not total");
  if (static_cast<MorId>(mmap.size()) != P->base().morphism_count()) throw FiberedError("morphism map is not total");
  if (pmap.size() != omap.size()) throw FiberedError("fiber maps are not total");
  for (ObjId c = 0; c < static_cast<ObjId>(omap.size()); ++c) {
    auto n = P->fiber_size(c);
    if (!n || *n != static_cast<std::int64_t>(pmap[c].size()))
      throw FiberedError("fiber map at " + P->base().object_name(c) + " is not total");
  }
  auto om = std::make_shared<const std::vector<ObjId>>(std::move(omap));
  auto mm = std::make_shared<const std::vector<MorId>>(std::move(mmap));
  auto pm = std::make_shared<const std::vector<std::vector<Elem>>>(std::move(pmap));
  return std::make_shared<FnMorphism>(
      std::move(name), P, Q, [om](ObjId a) { return om->at(a); }, [mm](MorId f) { return mm->at(f); },
      [P, pm](ObjId c, const Elem& r) {
        auto i = P->index_of(c, r);
        if (!i) throw FiberedError("element outside the source fiber");
        return (*pm)[c][*i];
      });
}

MorId product_comparison(const PropMorphism& F, const std::vector<ObjId>& factors) {
  const Category& C = F.source()->base();
  const Category& D = F.target()->base();
  ObjId prod = product_of_or_throw(C, factors);
  std::vector<ObjId> images;
  std::vector<MorId> comps;
  for (size_t i = 0; i < factors.size(); ++i) {
    images.push_back(F.obj(factors[i]));
    comps.push_back(F.mor(projection(C, factors, i)));
  }
  if (!product_of(D, images)) throw FiberedError("target lacks the product of the images");
  return tuple(D, F.obj(prod), images, comps);
}

MorId product_comparison_inverse(const PropMorphism& F, const std::vector<ObjId>& factors) {
  MorId a = product_comparison(F, factors);
  auto inv = find_inverse(F.target()->base(), a);
  if (!inv) throw FiberedError("morphism does not preserve a designated product: " + F.target()->base().morphism_name(a));
  return *inv;
}

// ------------------------------------------------------------ checking

namespace {

struct Acc {
  Acc(FaReport& r, int maxv) : rep(r), max_violations(maxv) {}
  FaReport& rep;
  int max_violations;
  ConditionStat* cur = nullptr;
  std::chrono::steady_clock::time_point t0{};

  void begin(const std::string& name) {
    rep.stats.push_back({name, 0, 0, true, 0});
    cur = &rep.stats.back();
    t0 = std::chrono::steady_clock::now();
  }
  void end() { cur->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
  void space(std::int64_t n, bool exhaustive) {
    cur->space += n;
    cur->exhaustive = cur->exhaustive && exhaustive;
  }
  bool full() const { return static_cast<int>(rep.violations.size()) >= max_violations; }
  void checked() { ++cur->checked; }
  void fail(std::string witness, std::string lhs, std::string rhs) {
    rep.ok = false;
    if (!full()) rep.violations.push_back({cur->condition, std::move(witness), std::move(lhs), std::move(rhs)});
  }
};

std::vector<Elem> elements(const PropCategory& P, ObjId c, const Probe& probe, bool& used_probe) {
  if (P.symbolic(c)) used_probe = true;
  return P.probe_elements(c, probe);
}

// tuples of indices into n elements, exhaustive or sampled
template <class Fn>
void for_tuples(std::int64_t n, int arity, std::int64_t limit, std::int64_t samples, std::mt19937_64& rng, Acc& acc,
                Fn&& fn) {
  std::int64_t space = 1;
  bool overflow = false;
  for (int k = 0; k < arity; ++k) {
    if (n && space > limit / n + 1) overflow = true;
    space *= std::max<std::int64_t>(n, 1);
  }
  if (n == 0 && arity > 0) return;
  std::vector<std::int64_t> ix(arity, 0);
  if (!overflow && space <= limit) {
    acc.space(space, true);
    for (std::int64_t t = 0; t < space && !acc.full(); ++t) {
      std::int64_t r = t;
      for (int k = arity - 1; k >= 0; --k) {
        ix[k] = r % n;
        r /= n;
      }
      fn(ix);
    }
    return;
  }
  acc.space(overflow ? limit : space, false);
  std::uniform_int_distribution<std::int64_t> d(0, n - 1);
  for (std::int64_t t = 0; t < samples && !acc.full(); ++t) {
    for (auto& x : ix) x = d(rng);
    fn(ix);
  }
}

std::string elem_list(const PropCategory& P, ObjId c, const std::vector<Elem>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + P.format(c, xs[i]);
  return s;
}

}  // namespace

FaReport check_morphism(const PropMorphism& F, const MorphismCheckOptions& opts) {
  FaReport rep;
  Acc acc{rep, opts.max_violations};
  const PropCategory& P = *F.source();
  const PropCategory& Q = *F.target();
  const Category& C = P.base();
  const Category& D = Q.base();
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  auto on = [&](const std::string& what, auto&& body) {
    acc.begin(what);
    try {
      body();
    } catch (const std::exception& e) {
      acc.fail("exception", e.what(), "");
    }
    acc.end();
  };

  on("mor.language", [&] {
    for (const auto& [c, n] : P.language().connectives) {
      acc.checked();
      if (!Q.language().has_connective(c, n)) acc.fail("connective " + c, "in source language", "missing in target");
    }
    for (const auto& q : P.language().quantifiers) {
      acc.checked();
      if (!Q.language().quantifiers.count(q)) acc.fail("quantifier " + q, "in source language", "missing in target");
    }
    acc.space(static_cast<std::int64_t>(P.language().connectives.size() + P.language().quantifiers.size()), true);
  });
  if (!rep.ok) return rep;

  on("mor.functor.typing", [&] {
    acc.space(C.morphism_count(), true);
    for (MorId f = 0; f < C.morphism_count() && !acc.full(); ++f) {
      acc.checked();
      MorId g = F.mor(f);
      if (D.dom(g) != F.obj(C.dom(f)) || D.cod(g) != F.obj(C.cod(f)))
        acc.fail("f = " + C.morphism_name(f), D.morphism_name(g),
                 D.object_name(F.obj(C.dom(f))) + " -> " + D.object_name(F.obj(C.cod(f))));
    }
  });
  on("mor.functor.identity", [&] {
    acc.space(C.object_count(), true);
    for (ObjId a = 0; a < C.object_count(); ++a) {
      acc.checked();
      if (F.mor(C.identity(a)) != D.identity(F.obj(a)))
        acc.fail("a = " + C.object_name(a), D.morphism_name(F.mor(C.identity(a))), D.morphism_name(D.identity(F.obj(a))));
    }
  });
  // budgets are shared out over the units of a condition so large bases stay bounded
  auto share = [](std::int64_t budget, std::int64_t units) { return std::max<std::int64_t>(budget / std::max<std::int64_t>(units, 1), 64); };
  const std::int64_t no = C.object_count();
  on("mor.functor.comp", [&] {
    const std::int64_t lim = share(opts.exhaustive_limit, no * no * no), smp = share(opts.samples, no * no * no);
    for (ObjId a = 0; a < C.object_count(); ++a)
      for (ObjId b = 0; b < C.object_count(); ++b)
        for (ObjId c = 0; c < C.object_count() && !acc.full(); ++c) {
          MorId n1 = C.hom_size(a, b), n2 = C.hom_size(b, c);
          for_tuples(std::max(n1, n2), 2, lim, smp, rng, acc, [&](const auto& ix) {
            if (ix[0] >= n1 || ix[1] >= n2) return;
            MorId f = C.hom_at(a, b, ix[0]), g = C.hom_at(b, c, ix[1]);
            acc.checked();
            MorId l = F.mor(C.compose(g, f)), r = D.compose(F.mor(g), F.mor(f));
            if (l != r)
              acc.fail("g = " + C.morphism_name(g) + ", f = " + C.morphism_name(f), D.morphism_name(l), D.morphism_name(r));
          });
        }
  });
  on("mor.terminal", [&] {
    ObjId t = F.obj(C.terminal());
    acc.space(D.object_count(), true);
    for (ObjId x = 0; x < D.object_count(); ++x) {
      acc.checked();
      if (D.hom_size(x, t) != 1)
        acc.fail("x = " + D.object_name(x), std::to_string(D.hom_size(x, t)) + " maps into F(1) = " + D.object_name(t),
                 "1");
    }
  });
  on("mor.product", [&] {
    for (ObjId b = 0; b < C.object_count(); ++b)
      for (ObjId c = 0; c < C.object_count(); ++c) {
        if (!C.product(b, c)) continue;
        acc.space(1, true);
        acc.checked();
        try {
          product_comparison_inverse(F, {b, c});
        } catch (const std::exception& e) {
          acc.fail("b = " + C.object_name(b) + ", c = " + C.object_name(c), e.what(), "an isomorphism");
        }
      }
  });
  if (!rep.ok) return rep;

  std::vector<std::vector<Elem>> els(C.object_count());
  for (ObjId c = 0; c < C.object_count(); ++c) els[c] = elements(P, c, opts.probe, rep.used_probe);

  on("mor.natural", [&] {
    auto one = [&](MorId f, const Elem& r) {
      ObjId a = C.dom(f), b = C.cod(f);
      acc.checked();
      Elem l = F.fiber(a, P.pull(f, r));
      Elem rr = Q.pull(F.mor(f), F.fiber(b, r));
      if (l != rr)
        acc.fail("f = " + C.morphism_name(f) + ", r = " + P.format(b, r), Q.format(F.obj(a), l), Q.format(F.obj(a), rr));
    };
    std::int64_t total = 0;
    for (MorId f = 0; f < C.morphism_count(); ++f) total += static_cast<std::int64_t>(els[C.cod(f)].size());
    if (total <= opts.exhaustive_limit) {
      acc.space(total, true);
      for (MorId f = 0; f < C.morphism_count() && !acc.full(); ++f)
        for (const auto& r : els[C.cod(f)]) one(f, r);
      return;
    }
    // sampled: a uniform morphism, then a uniform element of its codomain fiber
    acc.space(total, false);
    std::uniform_int_distribution<MorId> pick(0, C.morphism_count() - 1);
    for (std::int64_t t = 0; t < opts.samples && !acc.full(); ++t) {
      MorId f = pick(rng);
      const auto& xs = els[C.cod(f)];
      if (xs.empty()) continue;
      one(f, xs[std::uniform_int_distribution<size_t>(0, xs.size() - 1)(rng)]);
    }
  });
  on("mor.monotone", [&] {
    for (ObjId c = 0; c < C.object_count() && !acc.full(); ++c) {
      const auto& xs = els[c];
      for_tuples(static_cast<std::int64_t>(xs.size()), 2, share(opts.exhaustive_limit, no), share(opts.samples, no), rng, acc,
                 [&](const auto& ix) {
                   const Elem& r = xs[ix[0]];
                   const Elem& s = xs[ix[1]];
                   if (!P.leq(c, r, s)) return;
                   acc.checked();
                   if (!Q.leq(F.obj(c), F.fiber(c, r), F.fiber(c, s)))
                     acc.fail("c = " + C.object_name(c) + ", r <= s with r = " + P.format(c, r) + ", s = " + P.format(c, s),
                              Q.format(F.obj(c), F.fiber(c, r)), Q.format(F.obj(c), F.fiber(c, s)));
                 });
    }
  });
  on("mor.hom", [&] {
    for (const auto& [name, n] : P.language().connectives)
      for (ObjId c = 0; c < C.object_count() && !acc.full(); ++c) {
        const auto& xs = els[c];
        ObjId fc = F.obj(c);
        for_tuples(static_cast<std::int64_t>(xs.size()), n, share(opts.exhaustive_limit, no), share(opts.samples, no), rng, acc,
                   [&](const auto& ix) {
                     std::vector<Elem> args, imgs;
                     for (auto i : ix) {
                       args.push_back(xs[i]);
                       imgs.push_back(F.fiber(c, xs[i]));
                     }
                     acc.checked();
                     Elem l = F.fiber(c, P.op(c, name, args));
                     Elem r = Q.op(fc, name, imgs);
                     if (l != r)
                       acc.fail(name + " at " + C.object_name(c) + " on (" + elem_list(P, c, args) + ")",
                                Q.format(fc, l), Q.format(fc, r));
                   });
      }
  });
  on("mor.quant", [&] {
    for (const auto& q : P.language().quantifiers)
      for (ObjId b = 0; b < C.object_count(); ++b)
        for (ObjId c = 0; c < C.object_count() && !acc.full(); ++c) {
          auto d = C.product(b, c);
          if (!d) continue;
          MorId ainv = product_comparison_inverse(F, {b, c});
          const auto& xs = els[d->obj];
          for_tuples(static_cast<std::int64_t>(xs.size()), 1, opts.exhaustive_limit, opts.samples, rng, acc,
                     [&](const auto& ix) {
                       const Elem& r = xs[ix[0]];
                       acc.checked();
                       Elem l = F.fiber(b, P.quant(q, b, c, r));
                       Elem rr = Q.quant(q, F.obj(b), F.obj(c), Q.pull(ainv, F.fiber(d->obj, r)));
                       if (l != rr)
                         acc.fail(q + " over " + C.object_name(b) + "," + C.object_name(c) + " at r = " +
                                      P.format(d->obj, r),
                                  Q.format(F.obj(b), l), Q.format(F.obj(b), rr));
                     });
        }
  });
  on("mor.eq", [&] {
    for (ObjId c = 0; c < C.object_count(); ++c) {
      auto d = C.product(c, c);
      if (!d) continue;
      acc.space(1, true);
      acc.checked();
      MorId a = product_comparison(F, {c, c});
      Elem l = F.fiber(d->obj, P.eq(c));
      Elem r = Q.pull(a, Q.eq(F.obj(c)));
      if (l != r) acc.fail("c = " + C.object_name(c), Q.format(F.obj(d->obj), l), Q.format(F.obj(d->obj), r));
    }
  });
  return rep;
}

std::optional<std::string> morphism_difference(const PropMorphism& F, const PropMorphism& G, const Probe& probe) {
  if (F.source() != G.source()) return "sources differ";
  if (F.target() != G.target()) return "targets differ";
  const PropCategory& P = *F.source();
  const Category& C = P.base();
  const Category& D = F.target()->base();
  for (ObjId a = 0; a < C.object_count(); ++a)
    if (F.obj(a) != G.obj(a))
      return "object " + C.object_name(a) + ": " + D.object_name(F.obj(a)) + " vs " + D.object_name(G.obj(a));
  for (MorId f = 0; f < C.morphism_count(); ++f)
    if (F.mor(f) != G.mor(f))
      return "morphism " + C.morphism_name(f) + ": " + D.morphism_name(F.mor(f)) + " vs " + D.morphism_name(G.mor(f));
  for (ObjId c = 0; c < C.object_count(); ++c)
    for (const auto& r : P.probe_elements(c, probe)) {
      Elem x = F.fiber(c, r), y = G.fiber(c, r);
      if (x != y)
        return "fiber element " + P.format(c, r) + " at " + C.object_name(c) + ": " + F.target()->format(F.obj(c), x) +
               " vs " + F.target()->format(F.obj(c), y);
    }
  return std::nullopt;
}

FaReport check_two_cell(const TwoCell& t, const Probe& probe) {
  FaReport rep;
  Acc acc{rep, 5};
  const auto& F = *t.F;
  const auto& H = *t.H;
  if (F.source() != H.source() || F.target() != H.target()) throw FiberedError("2-cell between non-parallel morphisms");
  const PropCategory& P = *F.source();
  const PropCategory& Q = *F.target();
  const Category& C = P.base();
  const Category& D = Q.base();
  if (static_cast<int>(t.eta.size()) != C.object_count()) throw FiberedError("2-cell needs one component per object");
  acc.begin("2cell.typing");
  for (ObjId c = 0; c < C.object_count(); ++c) {
    acc.checked();
    MorId e = t.eta[c];
    if (D.dom(e) != F.obj(c) || D.cod(e) != H.obj(c))
      acc.fail("c = " + C.object_name(c), D.morphism_name(e), D.object_name(F.obj(c)) + " -> " + D.object_name(H.obj(c)));
  }
  acc.space(C.object_count(), true);
  acc.end();
  if (!rep.ok) return rep;
  acc.begin("2cell.natural");
  acc.space(C.morphism_count(), true);
  for (MorId f = 0; f < C.morphism_count() && !acc.full(); ++f) {
    acc.checked();
    MorId l = D.compose(t.eta[C.cod(f)], F.mor(f));
    MorId r = D.compose(H.mor(f), t.eta[C.dom(f)]);
    if (l != r) acc.fail("f = " + C.morphism_name(f), D.morphism_name(l), D.morphism_name(r));
  }
  acc.end();
  acc.begin("2cell.fiber");
  for (ObjId c = 0; c < C.object_count(); ++c) {
    auto xs = elements(P, c, probe, rep.used_probe);
    acc.space(static_cast<std::int64_t>(xs.size()), true);
    for (const auto& r : xs) {
      acc.checked();
      Elem l = F.fiber(c, r);
      Elem rr = Q.pull(t.eta[c], H.fiber(c, r));
      if (l != rr) acc.fail("c = " + C.object_name(c) + ", r = " + P.format(c, r), Q.format(F.obj(c), l), Q.format(F.obj(c), rr));
    }
  }
  acc.end();
  return rep;
}

// ------------------------------------------------------------ kernels

bool Kernel::fiber_related(ObjId c1, size_t i1, ObjId c2, size_t i2) const {
  auto it = fiber.find({c1, c2});
  if (it == fiber.end()) return false;
  return it->second[i1 * elems[c2].size() + i2] != 0;
}

Kernel kernel(const PropMorphism& F, const Probe& probe) {
  Kernel k;
  k.source = F.source();
  const PropCategory& P = *F.source();
  const PropCategory& Q = *F.target();
  const Category& C = P.base();
  int n = C.object_count();
  std::map<ObjId, ObjId> first_obj;
  k.obj_class.resize(n);
  for (ObjId a = 0; a < n; ++a) k.obj_class[a] = first_obj.emplace(F.obj(a), a).first->second;
  std::unordered_map<MorId, MorId> first_mor;
  k.mor_class.resize(static_cast<size_t>(C.morphism_count()));
  for (MorId f = 0; f < C.morphism_count(); ++f) k.mor_class[f] = first_mor.emplace(F.mor(f), f).first->second;
  k.elems.resize(n);
  std::vector<std::vector<Elem>> img(n);
  for (ObjId c = 0; c < n; ++c) {
    k.elems[c] = P.probe_elements(c, probe);
    for (const auto& r : k.elems[c]) img[c].push_back(F.fiber(c, r));
  }
  for (ObjId c1 = 0; c1 < n; ++c1)
    for (ObjId c2 = 0; c2 < n; ++c2) {
      if (k.obj_class[c1] != k.obj_class[c2]) continue;
      ObjId o = F.obj(c1);
      size_t n1 = img[c1].size(), n2 = img[c2].size();
      std::vector<char> rel(n1 * n2);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(n1); ++i)
        for (size_t j = 0; j < n2; ++j) rel[i * n2 + j] = Q.leq(o, img[c1][i], img[c2][j]) ? 1 : 0;
      k.fiber[{c1, c2}] = std::move(rel);
    }
  return k;
}

std::optional<std::string> kernel_excess(const Kernel& a, const Kernel& b) {
  if (a.source != b.source) throw FiberedError("kernels of morphisms with different sources");
  const PropCategory& P = *a.source;
  const Category& C = P.base();
  for (ObjId x = 0; x < static_cast<ObjId>(a.obj_class.size()); ++x)
    if (a.obj_class[x] != x && b.obj_class[x] != b.obj_class[a.obj_class[x]])
      return "objects " + C.object_name(a.obj_class[x]) + " ~ " + C.object_name(x);
  for (MorId f = 0; f < static_cast<MorId>(a.mor_class.size()); ++f)
    if (a.mor_class[f] != f && b.mor_class[f] != b.mor_class[a.mor_class[f]])
      return "morphisms " + C.morphism_name(a.mor_class[f]) + " ~ " + C.morphism_name(f);
  for (const auto& [key, rel] : a.fiber) {
    auto [c1, c2] = key;
    auto it = b.fiber.find(key);
    if (a.elems[c1] != b.elems[c1] || a.elems[c2] != b.elems[c2]) throw FiberedError("kernels enumerate different fibers");
    size_t n2 = a.elems[c2].size();
    for (size_t i = 0; i < rel.size(); ++i)
      if (rel[i] && (it == b.fiber.end() || !it->second[i]))
        return "fiber elements " + P.format(c1, a.elems[c1][i / n2]) + " in P(" + C.object_name(c1) + ") below " +
               P.format(c2, a.elems[c2][i % n2]) + " in P(" + C.object_name(c2) + ")";
  }
  return std::nullopt;
}

bool kernel_leq(const Kernel& a, const Kernel& b) { return !kernel_excess(a, b); }
bool kernel_equal(const Kernel& a, const Kernel& b) { return kernel_leq(a, b) && kernel_leq(b, a); }

// ------------------------------------------------------------ images

bool is_injective_on_objects(const PropMorphism& F) {
  std::set<ObjId> seen;
  for (ObjId a = 0; a < F.source()->base().object_count(); ++a)
    if (!seen.insert(F.obj(a)).second) return false;
  return true;
}

bool is_subprop_morphism(const PropMorphism& F, const Probe& probe) {
  const PropCategory& P = *F.source();
  const PropCategory& Q = *F.target();
  const Category& C = P.base();
  for (ObjId a = 0; a < C.object_count(); ++a)
    for (ObjId b = 0; b < C.object_count(); ++b) {
      std::set<MorId> seen;
      for (MorId i = 0; i < C.hom_size(a, b); ++i)
        if (!seen.insert(F.mor(C.hom_at(a, b, i))).second) return false;
    }
  for (ObjId c = 0; c < C.object_count(); ++c) {
    auto xs = P.probe_elements(c, probe);
    std::vector<Elem> img;
    for (const auto& r : xs) img.push_back(F.fiber(c, r));
    ObjId fc = F.obj(c);
    for (size_t i = 0; i < xs.size(); ++i)
      for (size_t j = 0; j < xs.size(); ++j)
        if (P.leq(c, xs[i], xs[j]) != Q.leq(fc, img[i], img[j])) return false;
  }
  return true;
}

ImageFactor image_factor(MorphPtr Fp) {
  const PropMorphism& F = *Fp;
  PropPtr P = F.source();
  PropPtr Q = F.target();
  const Category& C = P->base();
  const Category& D = Q->base();
  if (!is_injective_on_objects(F)) throw FiberedError("image factorization needs a morphism injective on objects");
  int n = C.object_count();
  std::vector<ObjId> objs(n);
  for (ObjId a = 0; a < n; ++a) objs[a] = F.obj(a);
  std::vector<MorId> mors;
  std::unordered_map<MorId, MorId> local;
  std::vector<MorId> src_local(static_cast<size_t>(C.morphism_count()));
  for (MorId f = 0; f < C.morphism_count(); ++f) {
    MorId g = F.mor(f);
    auto [it, fresh] = local.emplace(g, static_cast<MorId>(mors.size()));
    if (fresh) mors.push_back(g);
    src_local[f] = it->second;
  }
  auto sub = std::make_shared<SubCategory>(Q->base_ptr(), objs, mors, C.terminal());
  std::map<std::pair<ObjId, ObjId>, MorId> ainv;
  for (ObjId b = 0; b < n; ++b)
    for (ObjId c = 0; c < n; ++c) {
      auto d = C.product(b, c);
      if (!d) continue;
      sub->set_product(b, c, {d->obj, src_local[d->p1], src_local[d->p2]});
      ainv[{b, c}] = product_comparison_inverse(F, {b, c});
    }
  std::vector<std::vector<MorId>> out(n);
  for (MorId m = 0; m < static_cast<MorId>(mors.size()); ++m) out[sub->dom(m)].push_back(m);
  for (ObjId a = 0; a < n; ++a)
    for (MorId f : out[a])
      for (MorId g : out[a]) {
        auto it = ainv.find({sub->cod(f), sub->cod(g)});
        if (it == ainv.end()) continue;
        MorId h = D.compose(it->second, D.pair(mors[f], mors[g]));
        auto lh = sub->local_mor(h);
        if (!lh) throw FiberedError("image is not closed under pairing");
        sub->set_pair(f, g, *lh);
      }
  std::vector<std::vector<Elem>> fibers(n);
  for (ObjId c = 0; c < n; ++c) {
    if (P->symbolic(c)) throw FiberedError("image factorization needs finite source fibers");
    auto sz = *P->fiber_size(c);
    for (std::int64_t i = 0; i < sz; ++i) fibers[c].push_back(F.fiber(c, P->fiber_element(c, i)));
  }
  std::map<ObjId, Elem> eqs;
  for (ObjId c = 0; c < n; ++c)
    if (auto d = C.product(c, c)) eqs[c] = F.fiber(d->obj, P->eq(c));
  auto image = std::make_shared<SubPropCategory>("image of " + F.describe(), Q, sub, std::move(fibers), std::move(eqs));
  auto sl = std::make_shared<const std::vector<MorId>>(std::move(src_local));
  ImageFactor r;
  r.image = image;
  r.corestriction = std::make_shared<FnMorphism>(
      "corestriction of " + F.describe(), P, image, [](ObjId a) { return a; }, [sl](MorId f) { return sl->at(f); },
      [Fp](ObjId c, const Elem& x) { return Fp->fiber(c, x); });
  r.inclusion = std::make_shared<FnMorphism>(
      "inclusion of the image of " + F.describe(), image, Q, [sub](ObjId a) { return sub->parent_obj(a); },
      [sub](MorId f) { return sub->parent_mor(f); }, [](ObjId, const Elem& x) { return x; });
  return r;
}

Factorization factorize(MorphPtr F) {
  auto im = image_factor(F);
  return {im.corestriction, im.inclusion, im.image};
}

void check_completion_hypotheses(const PropMorphism& K) {
  const PropCategory& P = *K.source();
  const PropCategory& R = *K.target();
  const Category& C = P.base();
  const Category& D = R.base();
  std::set<ObjId> hit;
  for (ObjId a = 0; a < C.object_count(); ++a) hit.insert(K.obj(a));
  if (static_cast<int>(hit.size()) != D.object_count()) throw FiberedError("K is not surjective on objects");
  for (ObjId a = 0; a < C.object_count(); ++a)
    for (ObjId b = 0; b < C.object_count(); ++b) {
      std::set<MorId> imgs;
      for (MorId i = 0; i < C.hom_size(a, b); ++i) imgs.insert(K.mor(C.hom_at(a, b, i)));
      if (static_cast<MorId>(imgs.size()) != D.hom_size(K.obj(a), K.obj(b)))
        throw FiberedError("K is not full at " + C.object_name(a) + " -> " + C.object_name(b));
    }
  for (ObjId c = 0; c < C.object_count(); ++c) {
    if (P.symbolic(c) || R.symbolic(K.obj(c))) throw FiberedError("completion needs finite fibers");
    std::set<Elem> imgs;
    for (std::int64_t i = 0; i < *P.fiber_size(c); ++i) imgs.insert(K.fiber(c, P.fiber_element(c, i)));
    if (static_cast<std::int64_t>(imgs.size()) != *R.fiber_size(K.obj(c)))
      throw FiberedError("K is not surjective on the fiber over " + C.object_name(c));
  }
}

Completion complete_through(MorphPtr F, MorphPtr K, PreimageOrder order) {
  if (F->source() != K->source()) throw FiberedError("F and K must share a source");
  check_completion_hypotheses(*K);
  Completion out;
  if (auto e = kernel_excess(kernel(*K), kernel(*F))) {
    out.obstruction = "identified by K but not by F: " + *e;
    return out;
  }
  const PropCategory& P = *K->source();
  PropPtr R = K->target();
  const Category& C = P.base();
  const Category& D = R->base();
  bool fwd = order == PreimageOrder::Forward;
  std::vector<ObjId> pre(D.object_count(), -1);
  for (ObjId i = 0; i < C.object_count(); ++i) {
    ObjId a = fwd ? i : C.object_count() - 1 - i;
    if (pre[K->obj(a)] < 0) pre[K->obj(a)] = a;
  }
  std::vector<ObjId> omap(D.object_count());
  for (ObjId o = 0; o < D.object_count(); ++o) omap[o] = F->obj(pre[o]);
  std::vector<MorId> mmap(static_cast<size_t>(D.morphism_count()), -1);
  for (MorId i = 0; i < C.morphism_count(); ++i) {
    MorId f = fwd ? i : C.morphism_count() - 1 - i;
    MorId& slot = mmap[K->mor(f)];
    if (slot < 0) slot = F->mor(f);
  }
  for (MorId m = 0; m < D.morphism_count(); ++m)
    if (mmap[m] < 0) throw FiberedError("K misses morphism " + D.morphism_name(m));
  std::vector<std::vector<Elem>> pmap(D.object_count());
  for (ObjId o = 0; o < D.object_count(); ++o) {
    ObjId c = pre[o];
    std::int64_t n = *P.fiber_size(c);
    pmap[o].resize(static_cast<size_t>(*R->fiber_size(o)));
    std::vector<char> done(pmap[o].size(), 0);
    for (std::int64_t i = 0; i < n; ++i) {
      Elem r = P.fiber_element(c, fwd ? i : n - 1 - i);
      auto j = *R->index_of(o, K->fiber(c, r));
      if (!done[j]) {
        done[j] = 1;
        pmap[o][j] = F->fiber(c, r);
      }
    }
  }
  out.H = table_morphism("completion of " + F->describe() + " through " + K->describe(), R, F->target(),
                         std::move(omap), std::move(mmap), std::move(pmap));
  return out;
}

// ------------------------------------------------------------ structures

Structure transport_structure(const PropMorphism& F, const Structure& S) {
  if (S.host != F.source())
    throw FiberedError("host mismatch: structure lives in " + S.host->describe() + ", morphism starts at " +
                       F.source()->describe());
  const Category& D = F.target()->base();
  Structure T;
  T.name = F.describe() + "." + S.name;
  T.host = F.target();
  T.sg = S.sg;
  for (const auto& [s, o] : S.sorts) T.sorts[s] = F.obj(o);
  for (const auto& [f, m] : S.fns) {
    std::vector<ObjId> args;
    for (const auto& a : S.sg.functions.at(f).args) args.push_back(sort_object(S, a));
    T.fns[f] = D.compose(F.mor(m), product_comparison_inverse(F, args));
  }
  for (const auto& [r, e] : S.rels) {
    std::vector<ObjId> args;
    for (const auto& a : S.sg.relations.at(r).args) args.push_back(sort_object(S, a));
    ObjId prod = product_of_or_throw(S.host->base(), args);
    T.rels[r] = F.target()->pull(product_comparison_inverse(F, args), F.fiber(prod, e));
  }
  T.validate();
  return T;
}

FaReport check_transport(const PropMorphism& F, const Structure& S, const AssertionSpace& space) {
  FaReport rep;
  Acc acc{rep, 5};
  Structure FS = transport_structure(F, S);
  const PropCategory& Q = *F.target();
  const Category& D = Q.base();
  acc.begin("transport.sat");
  SatVector a = satisfaction_vector(S, space);
  SatVector b = satisfaction_vector(FS, space);
  acc.space(static_cast<std::int64_t>(space.size()), !space.truncated);
  for (size_t i = 0; i < space.size(); ++i) {
    if (!a.defined[i] || !a.sat[i]) continue;
    acc.checked();
    if (!b.defined[i] || !b.sat[i]) acc.fail(show(space.assertion(i)), "holds in " + S.name, "fails in " + FS.name);
  }
  acc.end();
  std::map<std::vector<ObjId>, MorId> inv_cache;
  auto inv = [&](const Context& ctx) {
    auto fs = context_factors(S, ctx);
    auto it = inv_cache.find(fs);
    if (it == inv_cache.end()) it = inv_cache.emplace(fs, product_comparison_inverse(F, fs)).first;
    return it->second;
  };
  acc.begin("transport.term");
  for (const auto& blk : space.blocks) {
    MorId ai;
    ObjId g;
    try {
      ai = inv(blk.ctx);
      g = context_object(S, blk.ctx);
    } catch (const std::exception&) {
      continue;
    }
    (void)g;
    acc.space(static_cast<std::int64_t>(blk.terms.size()), true);
    for (const auto& t : blk.terms) {
      MorId m;
      try {
        m = interpret_term(S, t, blk.ctx);
      } catch (const std::exception&) {
        continue;
      }
      acc.checked();
      MorId l = interpret_term(FS, t, blk.ctx);
      MorId r = D.compose(F.mor(m), ai);
      if (l != r) acc.fail(show(t) + " in " + show(blk.ctx), D.morphism_name(l), D.morphism_name(r));
    }
  }
  acc.end();
  acc.begin("transport.formula");
  for (const auto& blk : space.blocks) {
    MorId ai;
    ObjId g;
    try {
      ai = inv(blk.ctx);
      g = context_object(S, blk.ctx);
    } catch (const std::exception&) {
      continue;
    }
    ObjId fg = context_object(FS, blk.ctx);
    acc.space(static_cast<std::int64_t>(blk.formulas.size()), true);
    for (const auto& f : blk.formulas) {
      Elem e;
      try {
        e = interpret_formula(S, f, blk.ctx);
      } catch (const std::exception&) {
        continue;
      }
      acc.checked();
      Elem l = interpret_formula(FS, f, blk.ctx);
      Elem r = Q.pull(ai, F.fiber(g, e));
      if (l != r) acc.fail(show(f) + " in " + show(blk.ctx), Q.format(fg, l), Q.format(fg, r));
    }
  }
  acc.end();
  return rep;
}

std::optional<std::string> structure_difference(const Structure& a, const Structure& b) {
  if (a.host != b.host) return "hosts differ";
  if (!(a.sg == b.sg)) return "signatures differ";
  const Category& C = a.host->base();
  for (const auto& [s, o] : a.sorts)
    if (b.sorts.at(s) != o) return "sort " + s + ": " + C.object_name(o) + " vs " + C.object_name(b.sorts.at(s));
  for (const auto& [f, m] : a.fns)
    if (b.fns.at(f) != m) return "function " + f + ": " + C.morphism_name(m) + " vs " + C.morphism_name(b.fns.at(f));
  for (const auto& [r, e] : a.rels)
    if (b.rels.at(r) != e) return "relation " + r + " differs";
  return std::nullopt;
}

Structure structure_product(std::shared_ptr<const ProductPropCategory> host, const std::vector<Structure>& parts) {
  if (parts.empty()) throw FiberedError("use the signature-taking overload for the empty product");
  return structure_product(host, parts[0].sg, parts);
}

Structure structure_product(std::shared_ptr<const ProductPropCategory> host, const Signature& sg,
                            const std::vector<Structure>& parts) {
  if (parts.size() != host->arity()) throw FiberedError("product needs one structure per factor");
  Structure S;
  S.host = host;
  S.sg = sg;
  S.name = "product";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (!(parts[i].sg == S.sg)) throw FiberedError("product of structures over different signatures");
    if (parts[i].host != host->part_ptr(i)) throw FiberedError("structure " + parts[i].name + " is not hosted in factor " + std::to_string(i + 1));
  }
  const auto& PB = host->product_base();
  for (const auto& s : S.sg.sorts) {
    std::vector<ObjId> xs;
    for (const auto& p : parts) xs.push_back(p.sorts.at(s));
    S.sorts[s] = PB.join_obj(xs);
  }
  for (const auto& [f, d] : S.sg.functions) {
    std::vector<MorId> xs;
    for (const auto& p : parts) xs.push_back(p.fns.at(f));
    S.fns[f] = PB.join_mor(xs);
  }
  for (const auto& [r, d] : S.sg.relations) {
    std::vector<Elem> xs;
    for (const auto& p : parts) xs.push_back(p.rels.at(r));
    S.rels[r] = host->join(xs);
  }
  S.validate();
  return S;
}

Structure hom_image(const PropMorphism& H, const Structure& S) { return transport_structure(H, S); }

Structure submodel(const PropMorphism& iota, const Structure& S_sub, const Structure& S) {
  if (!is_subprop_morphism(iota)) throw FiberedError(iota.describe() + " is not a subprop-morphism");
  if (auto d = structure_difference(transport_structure(iota, S_sub), S))
    throw FiberedError("witness does not transport to the structure: " + *d);
  return S_sub;
}

// ------------------------------------------------------------ interpretations

namespace {

const Context& sort_image(const SignatureInterpretation& h, const std::string& s) {
  auto it = h.sorts.find(s);
  if (it == h.sorts.end()) throw SyntaxError("unknown symbol", "sort " + s + " has no image under " + h.name);
  return it->second;
}

std::vector<Binding> var_image(const SignatureInterpretation& h, const Binding& b) {
  const Context& img = sort_image(h, b.sort);
  std::vector<Binding> out;
  if (img.size() == 1) return {{b.var, img[0].sort}};
  for (size_t i = 0; i < img.size(); ++i) out.push_back({b.var + "_" + std::to_string(i + 1), img[i].sort});
  return out;
}

Subst positional(const Context& ctx, const std::vector<Term>& ts, const std::string& what) {
  if (ctx.size() != ts.size()) throw SyntaxError("arity mismatch", what);
  Subst s;
  for (size_t i = 0; i < ctx.size(); ++i) s[ctx[i].var] = ts[i];
  return s;
}

}  // namespace

void SignatureInterpretation::validate(const Language& lang) const {
  target.validate();
  for (const auto& s : source.sorts) {
    const Context& c = sort_image(*this, s);
    wf_context(target, c);
  }
  auto sorts_of = [&](const std::vector<std::string>& ss) {
    std::vector<std::string> out;
    for (const auto& s : ss)
      for (const auto& b : sort_image(*this, s)) out.push_back(b.sort);
    return out;
  };
  auto ctx_sorts = [](const Context& c) {
    std::vector<std::string> out;
    for (const auto& b : c) out.push_back(b.sort);
    return out;
  };
  for (const auto& [f, d] : source.functions) {
    auto it = fns.find(f);
    if (it == fns.end()) throw SyntaxError("unknown symbol", "function " + f + " has no image");
    wf_context(target, it->second.ctx);
    if (ctx_sorts(it->second.ctx) != sorts_of(d.args))
      throw SyntaxError("sort mismatch", "context of the image of " + f + " does not match its argument sorts");
    const Context& res = sort_image(*this, d.result);
    if (it->second.terms.size() != res.size()) throw SyntaxError("arity mismatch", "image of " + f + " has the wrong length");
    for (size_t i = 0; i < res.size(); ++i)
      if (wf_term(target, it->second.ctx, it->second.terms[i]) != res[i].sort)
        throw SyntaxError("sort mismatch", "component " + std::to_string(i + 1) + " of the image of " + f);
  }
  for (const auto& [r, d] : source.relations) {
    auto it = rels.find(r);
    if (it == rels.end()) throw SyntaxError("unknown symbol", "relation " + r + " has no image");
    wf_context(target, it->second.ctx);
    if (ctx_sorts(it->second.ctx) != sorts_of(d.args))
      throw SyntaxError("sort mismatch", "context of the image of " + r + " does not match its argument sorts");
    wf_formula(target, lang, it->second.ctx, it->second.phi);
  }
}

SignatureInterpretation identity_interpretation(const Signature& sg) {
  SignatureInterpretation h;
  h.name = "id";
  h.source = h.target = sg;
  for (const auto& s : sg.sorts) h.sorts[s] = {{"x", s}};
  for (const auto& [f, d] : sg.functions) {
    SignatureInterpretation::FnImage im;
    std::vector<Term> args;
    for (size_t i = 0; i < d.args.size(); ++i) {
      im.ctx.push_back({"x" + std::to_string(i + 1), d.args[i]});
      args.push_back(Term::var("x" + std::to_string(i + 1)));
    }
    im.terms = {Term::app(f, args)};
    h.fns[f] = im;
  }
  for (const auto& [r, d] : sg.relations) {
    SignatureInterpretation::RelImage im;
    std::vector<Term> args;
    for (size_t i = 0; i < d.args.size(); ++i) {
      im.ctx.push_back({"x" + std::to_string(i + 1), d.args[i]});
      args.push_back(Term::var("x" + std::to_string(i + 1)));
    }
    im.phi = Formula::rel(r, args);
    h.rels[r] = im;
  }
  return h;
}

Context translate_context(const SignatureInterpretation& h, const Context& ctx) {
  Context out;
  for (const auto& b : ctx)
    for (auto& v : var_image(h, b)) out.push_back(v);
  return out;
}

std::vector<Term> translate_term(const SignatureInterpretation& h, const Term& t, const Context& ctx) {
  if (t.is_var) {
    const Binding* b = lookup(ctx, t.name);
    if (!b) throw SyntaxError("variable not in context", t.name);
    std::vector<Term> out;
    for (const auto& v : var_image(h, *b)) out.push_back(Term::var(v.var));
    return out;
  }
  auto it = h.fns.find(t.name);
  if (it == h.fns.end()) throw SyntaxError("unknown symbol", "function " + t.name + " has no image");
  std::vector<Term> args;
  for (const auto& a : t.args)
    for (auto& x : translate_term(h, a, ctx)) args.push_back(std::move(x));
  Subst s = positional(it->second.ctx, args, "image of " + t.name);
  std::vector<Term> out;
  for (const auto& m : it->second.terms) out.push_back(substitute(m, s));
  return out;
}

Formula translate_formula(const SignatureInterpretation& h, const Formula& f, const Context& ctx) {
  switch (f.kind) {
    case FKind::Rel: {
      auto it = h.rels.find(f.sym);
      if (it == h.rels.end()) throw SyntaxError("unknown symbol", "relation " + f.sym + " has no image");
      std::vector<Term> args;
      for (const auto& a : f.terms)
        for (auto& x : translate_term(h, a, ctx)) args.push_back(std::move(x));
      return substitute(it->second.phi, positional(it->second.ctx, args, "image of " + f.sym));
    }
    case FKind::Eq: {
      auto l = translate_term(h, f.terms[0], ctx);
      auto r = translate_term(h, f.terms[1], ctx);
      const Context& img = sort_image(h, f.sym);
      std::optional<Formula> acc;
      for (size_t i = 0; i < img.size(); ++i) {
        Formula e = Formula::eq(img[i].sort, l[i], r[i]);
        acc = acc ? Formula::tensor(*acc, e) : e;
      }
      return acc ? *acc : Formula::unit();
    }
    case FKind::Conn: {
      std::vector<Formula> xs;
      for (const auto& g : f.subs) xs.push_back(translate_formula(h, g, ctx));
      return Formula::conn(f.sym, xs);
    }
    case FKind::Quant: {
      Context inner;
      for (const auto& b : ctx)
        if (b.var != f.bound.var) inner.push_back(b);
      inner.push_back(f.bound);
      Formula body = translate_formula(h, f.subs[0], inner);
      auto vs = var_image(h, f.bound);
      for (size_t i = vs.size(); i-- > 0;) body = Formula::quant(f.sym, vs[i], body);
      return body;
    }
  }
  throw SyntaxError("unknown connective", "formula kind");
}

std::vector<Assertion> translate_assertion(const SignatureInterpretation& h, const Assertion& a) {
  if (const auto* e = std::get_if<Equation>(&a)) {
    Context c = translate_context(h, e->ctx);
    auto l = translate_term(h, e->lhs, e->ctx);
    auto r = translate_term(h, e->rhs, e->ctx);
    const Context& img = sort_image(h, e->sort);
    std::vector<Assertion> out;
    for (size_t i = 0; i < img.size(); ++i) out.push_back(Equation{c, l[i], r[i], img[i].sort});
    return out;
  }
  const auto& s = std::get<Sequent>(a);
  Sequent t;
  t.ctx = translate_context(h, s.ctx);
  for (const auto& x : s.hyps) t.hyps.push_back(translate_formula(h, x, s.ctx));
  t.concl = translate_formula(h, s.concl, s.ctx);
  return {t};
}

Theory translate_theory(const SignatureInterpretation& h, const Theory& T) {
  if (!(h.source == T.sg)) throw SyntaxError("sort mismatch", "interpretation source differs from the theory's signature");
  h.validate(T.lang);
  Theory out;
  out.name = h.name + "." + T.name;
  out.sg = h.target;
  out.lang = T.lang;
  for (const auto& a : T.axioms)
    for (auto& b : translate_assertion(h, a)) out.axioms.push_back(std::move(b));
  validate(out);
  return out;
}

SignatureInterpretation compose_interpretations(const SignatureInterpretation& h2, const SignatureInterpretation& h1,
                                                const Language& lang) {
  if (!(h1.target == h2.source)) throw SyntaxError("sort mismatch", "interpretations are not composable");
  SignatureInterpretation h;
  h.name = h2.name + "." + h1.name;
  h.source = h1.source;
  h.target = h2.target;
  for (const auto& [s, c] : h1.sorts) h.sorts[s] = translate_context(h2, c);
  for (const auto& [f, im] : h1.fns) {
    SignatureInterpretation::FnImage out;
    out.ctx = translate_context(h2, im.ctx);
    for (const auto& m : im.terms)
      for (auto& t : translate_term(h2, m, im.ctx)) out.terms.push_back(std::move(t));
    h.fns[f] = out;
  }
  for (const auto& [r, im] : h1.rels) h.rels[r] = {translate_context(h2, im.ctx), translate_formula(h2, im.phi, im.ctx)};
  h.validate(lang);
  return h;
}

Structure precompose(const Structure& S, const SignatureInterpretation& h) {
  if (!(h.target == S.sg)) throw FiberedError("interpretation target differs from the structure's signature");
  Structure T;
  T.name = S.name + "." + h.name;
  T.host = S.host;
  T.sg = h.source;
  for (const auto& s : h.source.sorts) {
    const Context& c = sort_image(h, s);
    if (c.size() != 1) throw FiberedError("precomposition needs sort images of length one; " + s + " has " + std::to_string(c.size()));
    T.sorts[s] = sort_object(S, c[0].sort);
  }
  for (const auto& [f, im] : h.fns) T.fns[f] = interpret_term(S, im.terms.at(0), im.ctx);
  for (const auto& [r, im] : h.rels) T.rels[r] = interpret_formula(S, im.phi, im.ctx);
  T.validate();
  return T;
}

// ------------------------------------------------------------ internal structure

Structure internal_structure(PropPtr pc, const InternalOptions& opts) {
  const Category& C = pc->base();
  Structure S;
  S.name = "internal." + pc->describe();
  S.host = pc;
  for (ObjId a = 0; a < C.object_count(); ++a) {
    std::string s = C.object_name(a);
    S.sg.add_sort(s);
    S.sorts[s] = a;
  }
  for (MorId f = 0; f < C.morphism_count(); ++f) {
    std::string name = C.morphism_name(f);
    ObjId a = C.dom(f), b = C.cod(f);
    S.sg.functions[name] = {{C.object_name(a)}, C.object_name(b)};
    S.fns[name] = f;
    if (!opts.nary_variants) continue;
    if (a == C.terminal()) {
      S.sg.functions[name + "/0"] = {{}, C.object_name(b)};
      S.fns[name + "/0"] = f;
    }
    for (ObjId x = 0; x < C.object_count(); ++x)
      for (ObjId y = 0; y < C.object_count(); ++y) {
        auto d = C.product(x, y);
        if (!d || d->obj != a) continue;
        std::string n2 = name + "/2:" + C.object_name(x) + "," + C.object_name(y);
        S.sg.functions[n2] = {{C.object_name(x), C.object_name(y)}, C.object_name(b)};
        S.fns[n2] = f;
      }
  }
  for (ObjId c = 0; c < C.object_count(); ++c) {
    if (pc->symbolic(c)) continue;
    std::int64_t n = std::min(*pc->fiber_size(c), opts.max_relations_per_object);
    for (std::int64_t i = 0; i < n; ++i) {
      std::string r = "r" + std::to_string(i) + "@" + C.object_name(c);
      S.sg.relations[r] = {{C.object_name(c)}};
      S.rels[r] = pc->fiber_element(c, i);
    }
  }
  S.validate();
  return S;
}

}  // namespace pcat
