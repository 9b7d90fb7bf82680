// SPDX-License-Identifier: Apache-2.0
// Verification of the prop-category conditions over a bounded host.
//
// The same condition code runs over two models of the fibers: RefModel works
// on elements through the PropCategory interface, CompiledModel on integer
// tables built once up front. The driver can run serially or with OpenMP;
// results are identical because violations are ranked by their index.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <sstream>

#include "pcat/propcat.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pcat {

std::string Violation::show() const {
  std::string s = condition + ": " + witness;
  if (!lhs.empty() || !rhs.empty()) s += "; lhs = " + lhs + ", rhs = " + rhs;
  return s;
}

bool FaReport::exhaustive() const {
  return std::all_of(stats.begin(), stats.end(), [](const ConditionStat& s) { return s.exhaustive; });
}

bool FaReport::has_violation(const std::string& prefix) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.condition.rfind(prefix, 0) == 0; });
}

std::string FaReport::summary() const {
  std::ostringstream os;
  os << (ok ? "OK" : "VIOLATED") << " (" << (compiled ? "compiled" : "reference")
     << (used_probe ? ", probe fibers" : "") << ")\n";
  for (const auto& s : stats)
    os << "  " << s.condition << ": " << s.checked << "/" << s.space << (s.exhaustive ? " exhaustive" : " sampled")
       << " " << s.seconds << "s\n";
  for (const auto& v : violations) os << "  violation " << v.show() << "\n";
  return os.str();
}

namespace {

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

struct OpInfo {
  std::string name;
  int arity;
};

std::vector<OpInfo> op_list(const PropCategory& pc) {
  std::vector<OpInfo> out;
  for (const auto& [n, a] : pc.language().connectives) out.push_back({n, a});
  return out;
}

// ------------------------------------------------------------ models

class RefModel {
 public:
  using H = Elem;
  RefModel(const PropCategory& pc, const Probe& probe) : pc(pc), C(pc.base()), ops_(op_list(pc)) {
    for (ObjId c = 0; c < C.object_count(); ++c) {
      if (pc.symbolic(c)) used_probe = true;
      elems_.push_back(pc.probe_elements(c, probe));
    }
    for (const auto& q : pc.language().quantifiers) quants_.push_back(q);
  }
  std::int64_t size(ObjId c) const { return static_cast<std::int64_t>(elems_[c].size()); }
  const H& at(ObjId c, std::int64_t i) const { return elems_[c][i]; }
  bool leq(ObjId c, const H& a, const H& b) const { return pc.leq(c, a, b); }
  const std::vector<OpInfo>& ops() const { return ops_; }
  H op(ObjId c, int k, const H* args) const {
    return pc.op(c, ops_[k].name, std::vector<Elem>(args, args + ops_[k].arity));
  }
  H op_named(ObjId c, const std::string& n, std::vector<Elem> args) const { return pc.op(c, n, args); }
  H pull(MorId f, const H& x) const { return pc.pull(f, x); }
  const std::vector<std::string>& quants() const { return quants_; }
  H quant(int q, ObjId b, ObjId c, const H& x) const { return pc.quant(quants_[q], b, c, x); }
  H eq(ObjId c) const { return pc.eq(c); }
  H unit(ObjId c) const { return pc.unit(c); }
  H tensor(ObjId c, const H& a, const H& b) const { return pc.tensor(c, a, b); }
  bool valid(ObjId c, const H& x) const { return pc.contains(c, x); }
  bool bad(const H&) const { return false; }
  std::string show(ObjId c, const H& x) const { return pc.format(c, x); }

  const PropCategory& pc;
  const Category& C;
  bool used_probe = false;

 private:
  std::vector<OpInfo> ops_;
  std::vector<std::vector<Elem>> elems_;
  std::vector<std::string> quants_;
};

class CompiledModel {
 public:
  using H = std::int32_t;

  static bool compilable(const PropCategory& pc, std::int64_t limit) {
    const Category& C = pc.base();
    for (ObjId c = 0; c < C.object_count(); ++c) {
      auto n = pc.fiber_size(c);
      if (!n || *n > limit) return false;
    }
    std::int64_t pulls = 0;
    for (MorId f = 0; f < C.morphism_count(); ++f) pulls += *pc.fiber_size(C.cod(f));
    if (pulls > 50'000'000) return false;
    for (const auto& [n, a] : pc.language().connectives)
      if (a > 3) return false;
    return true;
  }

  explicit CompiledModel(const PropCategory& pc) : pc(pc), C(pc.base()), ops_(op_list(pc)) {
    int no = C.object_count();
    for (const auto& q : pc.language().quantifiers) quants_.push_back(q);
    n_.resize(no);
    leq_.resize(no);
    optab_.resize(no);
    eq_.assign(no, -1);
    has_eq_.assign(no, false);
    std::vector<std::vector<Elem>> el(no);
    for (ObjId c = 0; c < no; ++c) {
      n_[c] = *pc.fiber_size(c);
      for (std::int64_t i = 0; i < n_[c]; ++i) el[c].push_back(pc.fiber_element(c, i));
      std::int64_t n = n_[c];
      leq_[c].assign(static_cast<size_t>(n * n), 0);
      for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = 0; b < n; ++b) leq_[c][a * n + b] = pc.leq(c, el[c][a], el[c][b]);
      for (const auto& o : ops_) {
        std::int64_t cnt = 1;
        for (int i = 0; i < o.arity; ++i) cnt *= n;
        std::vector<H> tab(static_cast<size_t>(cnt));
        std::vector<Elem> args(o.arity);
        for (std::int64_t t = 0; t < cnt; ++t) {
          std::int64_t r = t;
          for (int i = o.arity; i-- > 0;) {
            args[i] = el[c][r % n];
            r /= n;
          }
          tab[t] = index(c, pc.op(c, o.name, args));
        }
        optab_[c].push_back(std::move(tab));
      }
    }
    pull_.resize(static_cast<size_t>(C.morphism_count()));
    for (MorId f = 0; f < C.morphism_count(); ++f) {
      ObjId b = C.cod(f), a = C.dom(f);
      auto& t = pull_[f];
      t.resize(static_cast<size_t>(n_[b]));
      for (std::int64_t x = 0; x < n_[b]; ++x) t[x] = index(a, pc.pull(f, el[b][x]));
    }
    quant_.assign(quants_.size(), std::vector<std::vector<H>>(static_cast<size_t>(no * no)));
    for (ObjId b = 0; b < no; ++b)
      for (ObjId c = 0; c < no; ++c) {
        auto d = C.product(b, c);
        if (!d) continue;
        for (size_t q = 0; q < quants_.size(); ++q) {
          auto& t = quant_[q][b * no + c];
          t.resize(static_cast<size_t>(n_[d->obj]));
          for (std::int64_t x = 0; x < n_[d->obj]; ++x) t[x] = index(b, pc.quant(quants_[q], b, c, el[d->obj][x]));
        }
        if (b == c) {
          has_eq_[c] = true;
          eq_[c] = index(d->obj, pc.eq(c));
        }
      }
    for (size_t k = 0; k < ops_.size(); ++k) {
      if (ops_[k].name == kUnit) unit_ = static_cast<int>(k);
      if (ops_[k].name == kTensor) tensor_ = static_cast<int>(k);
    }
  }

  std::int64_t size(ObjId c) const { return n_[c]; }
  H at(ObjId, std::int64_t i) const { return static_cast<H>(i); }
  bool leq(ObjId c, H a, H b) const { return leq_[c][static_cast<size_t>(a) * n_[c] + b]; }
  const std::vector<OpInfo>& ops() const { return ops_; }
  H op(ObjId c, int k, const H* args) const {
    const H* t = optab_[c][k].data();
    std::int64_t n = n_[c];
    switch (ops_[k].arity) {
      case 0:
        return t[0];
      case 1:
        return args[0] < 0 ? -1 : t[args[0]];
      case 2:
        return (args[0] | args[1]) < 0 ? -1 : t[args[0] * n + args[1]];
    }
    std::int64_t idx = 0;
    for (int i = 0; i < ops_[k].arity; ++i) {
      if (args[i] < 0) return -1;
      idx = idx * n + args[i];
    }
    return t[idx];
  }
  H pull(MorId f, H x) const { return x < 0 ? -1 : pull_[f][x]; }
  const std::vector<std::string>& quants() const { return quants_; }
  H quant(int q, ObjId b, ObjId c, H x) const {
    const auto& t = quant_[q][b * C.object_count() + c];
    if (t.empty()) throw PropError("no designated product");
    return x < 0 ? -1 : t[x];
  }
  H eq(ObjId c) const {
    if (!has_eq_[c]) throw PropError("no designated square");
    return eq_[c];
  }
  H unit(ObjId c) const { return op(c, unit_, nullptr); }
  H tensor(ObjId c, H a, H b) const {
    if ((a | b) < 0) return -1;
    return optab_[c][tensor_][a * n_[c] + b];
  }
  bool valid(ObjId, H x) const { return x >= 0; }
  bool bad(H x) const { return x < 0; }
  std::string show(ObjId c, H x) const {
    if (x < 0) return "<outside the fiber>";
    return pc.format(c, pc.fiber_element(c, x));
  }

  const PropCategory& pc;
  const Category& C;
  bool used_probe = false;

 private:
  H index(ObjId c, const Elem& r) const {
    auto i = pc.index_of(c, r);
    return i ? static_cast<H>(*i) : -1;
  }
  std::vector<OpInfo> ops_;
  std::vector<std::string> quants_;
  std::vector<std::int64_t> n_;
  std::vector<std::vector<std::uint8_t>> leq_;
  std::vector<std::vector<std::vector<H>>> optab_;
  std::vector<std::vector<H>> pull_;
  std::vector<std::vector<std::vector<H>>> quant_;
  std::vector<H> eq_;
  std::vector<bool> has_eq_;
  int unit_ = -1, tensor_ = -1;
};

// ------------------------------------------------------------ driver

// Each unit of a condition is a box of up to four digits, most significant
// first; a point of the box is one instance of the condition.
using Dig = std::array<std::int64_t, 4>;

Dig rad(std::initializer_list<std::int64_t> xs) {
  Dig r{1, 1, 1, 1};
  size_t off = 4 - xs.size();
  for (auto x : xs) r[off++] = x;
  return r;
}

std::int64_t box_size(const Dig& r) { return r[0] * r[1] * r[2] * r[3]; }

class Runner {
 public:
  Runner(const CheckOptions& o, std::int64_t limit, bool parallel, FaReport& rep)
      : opts_(o), limit_(limit), parallel_(parallel), rep_(rep) {}

  // body(u, d, v) checks point d of unit u; returns false and fills v on violation
  template <class Body>
  void run(const std::string& cond, const std::vector<Dig>& units, Body&& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::int64_t> pre(units.size() + 1, 0);
    for (size_t u = 0; u < units.size(); ++u) pre[u + 1] = pre[u] + box_size(units[u]);
    std::int64_t N = pre.back();
    ConditionStat st{cond, N, 0, true, 0};
    Found found;
    Ctx<Body> ctx{cond, units, pre, body, std::max<size_t>(1, static_cast<size_t>(std::max(1, opts_.max_violations)))};
    if (N <= limit_) {
      st.checked = exhaustive(ctx, N, found);
    } else {
      st.exhaustive = false;
      std::mt19937_64 rng(opts_.seed ^ fnv(cond));
      std::uniform_int_distribution<std::int64_t> pick(0, N - 1);
      std::vector<std::int64_t> idx(static_cast<size_t>(opts_.samples));
      for (auto& i : idx) i = pick(rng);
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
      st.checked = sampled(ctx, idx, found);
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (found.size() > ctx.maxv) found.resize(ctx.maxv);
    for (auto& [i, v] : found) rep_.violations.push_back(std::move(v));
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep_.stats.push_back(st);
  }

 private:
  using Found = std::vector<std::pair<std::int64_t, Violation>>;
  static constexpr std::int64_t kBlock = 1 << 15;

  template <class Body>
  struct Ctx {
    const std::string& cond;
    const std::vector<Dig>& units;
    const std::vector<std::int64_t>& pre;
    Body& body;
    size_t maxv;

    // position the cursor at flat index i
    void seek(std::int64_t i, size_t& u, Dig& d) const {
      u = static_cast<size_t>(std::upper_bound(pre.begin(), pre.end(), i) - pre.begin() - 1);
      std::int64_t j = i - pre[u];
      for (int k = 3; k >= 0; --k) {
        d[k] = j % units[u][k];
        j /= units[u][k];
      }
    }
    void advance(size_t& u, Dig& d) const {
      for (int k = 3; k >= 0; --k) {
        if (++d[k] < units[u][k]) return;
        d[k] = 0;
      }
      do {
        ++u;
      } while (u < units.size() && box_size(units[u]) == 0);
    }
    bool check(size_t u, const Dig& d, std::int64_t idx, Violation& scratch, Found& out) const {
      bool ok;
      try {
        ok = body(u, d, scratch);
      } catch (const std::exception& e) {
        ok = false;
        scratch.witness = "evaluation failed at unit " + std::to_string(u);
        scratch.lhs = std::string("error: ") + e.what();
      }
      if (ok) return true;
      scratch.condition = cond;
      out.emplace_back(idx, std::move(scratch));
      scratch = Violation{};
      return false;
    }
  };

  template <class C>
  std::int64_t block(const C& ctx, std::int64_t start, std::int64_t end, Found& out) {
    size_t u;
    Dig d;
    ctx.seek(start, u, d);
    Violation scratch;
    size_t before = out.size();
    for (std::int64_t idx = start; idx < end; ++idx) {
      if (!ctx.check(u, d, idx, scratch, out) && out.size() - before >= ctx.maxv) return idx + 1 - start;
      ctx.advance(u, d);
    }
    return end - start;
  }

  template <class C>
  std::int64_t exhaustive(const C& ctx, std::int64_t N, Found& found) {
    std::int64_t nblocks = (N + kBlock - 1) / kBlock;
    std::int64_t checked = 0;
    if (!parallel_) {
      for (std::int64_t b = 0; b < nblocks && found.size() < ctx.maxv; ++b)
        checked += block(ctx, b * kBlock, std::min(N, (b + 1) * kBlock), found);
      return checked;
    }
    // blocks past `stop` cannot contribute to the first maxv violations
    std::atomic<std::int64_t> stop{nblocks};
    std::vector<std::int64_t> counts(static_cast<size_t>(nblocks), -1);
    std::int64_t frontier = 0, acc = 0;
#pragma omp parallel reduction(+ : checked)
    {
      Found local;
#pragma omp for schedule(dynamic, 1)
      for (std::int64_t b = 0; b < nblocks; ++b) {
        if (b > stop.load(std::memory_order_relaxed)) continue;
        size_t before = local.size();
        checked += block(ctx, b * kBlock, std::min(N, (b + 1) * kBlock), local);
#pragma omp critical(pcat_frontier)
        {
          counts[b] = static_cast<std::int64_t>(local.size() - before);
          while (frontier < nblocks && counts[frontier] >= 0) {
            acc += counts[frontier];
            if (acc >= static_cast<std::int64_t>(ctx.maxv)) {
              stop.store(std::min(stop.load(), frontier));
              break;
            }
            ++frontier;
          }
        }
      }
#pragma omp critical(pcat_merge)
      for (auto& x : local) found.push_back(std::move(x));
    }
    return checked;
  }

  template <class C>
  std::int64_t sampled(const C& ctx, const std::vector<std::int64_t>& idx, Found& found) {
    auto at = [&](std::int64_t i, Violation& scratch, Found& out) {
      size_t u;
      Dig d;
      ctx.seek(i, u, d);
      ctx.check(u, d, i, scratch, out);
    };
    std::int64_t n = static_cast<std::int64_t>(idx.size());
    if (!parallel_) {
      Violation scratch;
      std::int64_t k = 0;
      for (; k < n && found.size() < ctx.maxv; ++k) at(idx[k], scratch, found);
      return k;
    }
#pragma omp parallel
    {
      Found local;
      Violation scratch;
#pragma omp for schedule(static)
      for (std::int64_t k = 0; k < n; ++k) at(idx[k], scratch, local);
#pragma omp critical(pcat_merge)
      for (auto& x : local) found.push_back(std::move(x));
    }
    return n;
  }

  const CheckOptions& opts_;
  std::int64_t limit_;
  bool parallel_;
  FaReport& rep_;
};

// ------------------------------------------------------------ conditions

void category_conditions(const Category& C, Runner& R) {
  int no = C.object_count();
  auto nm = [&](MorId f) { return C.morphism_name(f); };
  {
    std::vector<Dig> units;
    std::vector<std::pair<ObjId, ObjId>> objs;
    for (ObjId a = 0; a < no; ++a)
      for (ObjId b = 0; b < no; ++b) {
        objs.emplace_back(a, b);
        units.push_back(rad({C.hom_size(a, b)}));
      }
    R.run("cat.identity", units, [&](size_t u, const Dig& d, Violation& v) {
      auto [a, b] = objs[u];
      MorId f = C.hom_at(a, b, d[3]);
      MorId l = C.compose(C.identity(b), f), r = C.compose(f, C.identity(a));
      if (l == f && r == f) return true;
      v.witness = "f = " + nm(f);
      v.lhs = nm(l);
      v.rhs = nm(r);
      return false;
    });
  }
  {
    std::vector<Dig> units;
    std::vector<std::array<ObjId, 4>> objs;
    for (ObjId a = 0; a < no; ++a)
      for (ObjId b = 0; b < no; ++b)
        for (ObjId c = 0; c < no; ++c)
          for (ObjId d = 0; d < no; ++d) {
            Dig r = rad({C.hom_size(a, b), C.hom_size(b, c), C.hom_size(c, d)});
            if (box_size(r) == 0) continue;
            objs.push_back({a, b, c, d});
            units.push_back(r);
          }
    R.run("cat.assoc", units, [&](size_t u, const Dig& x, Violation& v) {
      auto [a, b, c, d] = objs[u];
      MorId f = C.hom_at(a, b, x[1]), g = C.hom_at(b, c, x[2]), h = C.hom_at(c, d, x[3]);
      MorId l = C.compose(h, C.compose(g, f)), r = C.compose(C.compose(h, g), f);
      if (l == r) return true;
      v.witness = "f = " + nm(f) + ", g = " + nm(g) + ", h = " + nm(h);
      v.lhs = nm(l);
      v.rhs = nm(r);
      return false;
    });
  }
  {
    std::vector<Dig> units(static_cast<size_t>(no), rad({}));
    ObjId t = C.terminal();
    R.run("cat.terminal", units, [&](size_t u, const Dig&, Violation& v) {
      ObjId a = static_cast<ObjId>(u);
      if (C.hom_size(a, t) == 1) return true;
      v.witness = "object " + C.object_name(a);
      v.lhs = std::to_string(C.hom_size(a, t)) + " maps to the terminal";
      v.rhs = "1";
      return false;
    });
  }
  {
    std::vector<Dig> sb, se;
    std::vector<std::array<ObjId, 3>> objs;
    for (ObjId b = 0; b < no; ++b)
      for (ObjId c = 0; c < no; ++c) {
        auto d = C.product(b, c);
        if (!d) continue;
        for (ObjId a = 0; a < no; ++a) {
          objs.push_back({a, b, c});
          sb.push_back(rad({C.hom_size(a, b), C.hom_size(a, c)}));
          se.push_back(rad({C.hom_size(a, d->obj)}));
        }
      }
    R.run("cat.product.beta", sb, [&](size_t u, const Dig& x, Violation& v) {
      auto [a, b, c] = objs[u];
      auto d = *C.product(b, c);
      MorId f = C.hom_at(a, b, x[2]), g = C.hom_at(a, c, x[3]);
      MorId p = C.pair(f, g);
      if (C.dom(p) == a && C.cod(p) == d.obj && C.compose(d.p1, p) == f && C.compose(d.p2, p) == g) return true;
      v.witness = "f = " + nm(f) + ", g = " + nm(g);
      v.lhs = nm(p);
      v.rhs = "a map with the given projections";
      return false;
    });
    R.run("cat.product.eta", se, [&](size_t u, const Dig& x, Violation& v) {
      auto [a, b, c] = objs[u];
      auto d = *C.product(b, c);
      MorId h = C.hom_at(a, d.obj, x[3]);
      MorId p = C.pair(C.compose(d.p1, h), C.compose(d.p2, h));
      if (p == h) return true;
      v.witness = "h = " + nm(h);
      v.lhs = nm(p);
      v.rhs = nm(h);
      return false;
    });
  }
}

template <class M>
void fiber_conditions(const M& m, Runner& R) {
  using H = typename M::H;
  const Category& C = m.C;
  int no = C.object_count();
  const auto& ops = m.ops();
  for (const auto& o : ops)
    if (o.arity > 4) throw PropError("connective " + o.name + " has arity above 4");
  auto on = [&](ObjId c) { return C.object_name(c); };
  // last k digits of d are elements of P(c)
  auto args_of = [&](ObjId c, const Dig& d, int k, H* out) {
    for (int i = 0; i < k; ++i) out[i] = m.at(c, d[4 - k + i]);
  };
  auto boxes = [&](int k) {
    std::vector<Dig> out;
    for (ObjId c = 0; c < no; ++c) {
      Dig r{1, 1, 1, 1};
      for (int i = 0; i < k; ++i) r[3 - i] = m.size(c);
      out.push_back(r);
    }
    return out;
  };
  auto per1 = boxes(1), per2 = boxes(2), per3 = boxes(3);

  // C1: P(c) is a poset, connectives total and preserved by P(f)
  R.run("C1.order", per2, [&](size_t u, const Dig& d, Violation& v) {
    ObjId c = static_cast<ObjId>(u);
    H xy[2];
    args_of(c, d, 2, xy);
    if (d[2] == d[3]) {
      if (m.leq(c, xy[0], xy[0])) return true;
      v.witness = "not reflexive at " + m.show(c, xy[0]) + " over " + on(c);
      return false;
    }
    if (!(m.leq(c, xy[0], xy[1]) && m.leq(c, xy[1], xy[0]))) return true;
    v.witness = "not antisymmetric over " + on(c);
    v.lhs = m.show(c, xy[0]);
    v.rhs = m.show(c, xy[1]);
    return false;
  });
  R.run("C1.order.trans", per3, [&](size_t u, const Dig& d, Violation& v) {
    ObjId c = static_cast<ObjId>(u);
    H x[3];
    args_of(c, d, 3, x);
    if (!m.leq(c, x[0], x[1]) || !m.leq(c, x[1], x[2]) || m.leq(c, x[0], x[2])) return true;
    v.witness = "not transitive over " + on(c) + " at " + m.show(c, x[0]) + " <= " + m.show(c, x[1]) +
                " <= " + m.show(c, x[2]);
    return false;
  });
  auto op_box = [&](ObjId c, int arity) {
    Dig r{1, 1, 1, 1};
    for (int i = 0; i < arity; ++i) r[3 - i] = m.size(c);
    return r;
  };
  {
    std::vector<Dig> units;
    std::vector<std::pair<ObjId, int>> keys;
    for (ObjId c = 0; c < no; ++c)
      for (size_t k = 0; k < ops.size(); ++k) {
        keys.emplace_back(c, static_cast<int>(k));
        units.push_back(op_box(c, ops[k].arity));
      }
    R.run("C1.closure", units, [&](size_t u, const Dig& d, Violation& v) {
      auto [c, k] = keys[u];
      H args[4];
      args_of(c, d, ops[k].arity, args);
      H r = m.op(c, k, args);
      if (m.valid(c, r)) return true;
      v.witness = ops[k].name + " over " + on(c) + " leaves the fiber";
      v.lhs = m.show(c, r);
      return false;
    });
  }
  {
    std::vector<Dig> units, pairs, singles;
    struct HomKey {
      MorId f;
      int k;
      ObjId a, b;
    };
    std::vector<HomKey> keys;
    std::vector<std::pair<ObjId, ObjId>> ends;
    for (MorId f = 0; f < C.morphism_count(); ++f) {
      ObjId b = C.cod(f);
      ends.emplace_back(C.dom(f), b);
      pairs.push_back(rad({m.size(b), m.size(b)}));
      singles.push_back(rad({m.size(b)}));
      for (size_t k = 0; k < ops.size(); ++k) {
        keys.push_back({f, static_cast<int>(k), ends.back().first, b});
        units.push_back(op_box(b, ops[k].arity));
      }
    }
    R.run("C1.hom", units, [&](size_t u, const Dig& d, Violation& v) {
      auto [f, k, a, b] = keys[u];
      int ar = ops[k].arity;
      H args[4], pulled[4];
      args_of(b, d, ar, args);
      for (int i = 0; i < ar; ++i) pulled[i] = m.pull(f, args[i]);
      H l = m.pull(f, m.op(b, k, args));
      H r = m.op(a, k, pulled);
      if (m.bad(l) || m.bad(r) || l == r) return true;
      v.witness = "P(" + C.morphism_name(f) + ") does not preserve " + ops[k].name;
      for (int i = 0; i < ar; ++i) v.witness += (i ? ", " : " at ") + m.show(b, args[i]);
      v.lhs = m.show(a, l);
      v.rhs = m.show(a, r);
      return false;
    });
    R.run("functor.closure", singles, [&](size_t u, const Dig& d, Violation& v) {
      MorId f = static_cast<MorId>(u);
      H x = m.at(C.cod(f), d[3]);
      H r = m.pull(f, x);
      if (m.valid(C.dom(f), r)) return true;
      v.witness = "P(" + C.morphism_name(f) + ") leaves the fiber at " + m.show(C.cod(f), x);
      v.lhs = m.show(C.dom(f), r);
      return false;
    });
    R.run("C1.monotone", pairs, [&](size_t u, const Dig& d, Violation& v) {
      MorId f = static_cast<MorId>(u);
      auto [a, b] = ends[u];
      H xy[2];
      args_of(b, d, 2, xy);
      if (!m.leq(b, xy[0], xy[1])) return true;
      H px = m.pull(f, xy[0]), py = m.pull(f, xy[1]);
      if (m.bad(px) || m.bad(py) || m.leq(a, px, py)) return true;
      v.witness = "P(" + C.morphism_name(f) + ") not monotone";
      v.lhs = m.show(a, px);
      v.rhs = m.show(a, py);
      return false;
    });
  }
  R.run("functor.identity", per1, [&](size_t u, const Dig& d, Violation& v) {
    ObjId c = static_cast<ObjId>(u);
    H x = m.at(c, d[3]);
    H r = m.pull(C.identity(c), x);
    if (r == x) return true;
    v.witness = "P(id " + on(c) + ")";
    v.lhs = m.show(c, r);
    v.rhs = m.show(c, x);
    return false;
  });
  {
    std::vector<Dig> units;
    std::vector<std::array<ObjId, 3>> objs;
    for (ObjId a = 0; a < no; ++a)
      for (ObjId b = 0; b < no; ++b)
        for (ObjId c = 0; c < no; ++c) {
          Dig r = rad({C.hom_size(a, b), C.hom_size(b, c), m.size(c)});
          if (box_size(r) == 0) continue;
          objs.push_back({a, b, c});
          units.push_back(r);
        }
    R.run("functor.comp", units, [&](size_t u, const Dig& d, Violation& v) {
      auto [a, b, c] = objs[u];
      MorId f = C.hom_at(a, b, d[1]), g = C.hom_at(b, c, d[2]);
      H x = m.at(c, d[3]);
      H l = m.pull(C.compose(g, f), x), r = m.pull(f, m.pull(g, x));
      if (m.bad(l) || m.bad(r) || l == r) return true;
      v.witness = "f = " + C.morphism_name(f) + ", g = " + C.morphism_name(g) + ", x = " + m.show(c, x);
      v.lhs = m.show(a, l);
      v.rhs = m.show(a, r);
      return false;
    });
  }

  // C2: quantifiers and equality land in the fibers
  {
    std::vector<Dig> units, eunits;
    std::vector<std::array<int, 3>> keys;
    std::vector<ObjId> eqobjs;
    for (ObjId b = 0; b < no; ++b)
      for (ObjId c = 0; c < no; ++c) {
        auto d = C.product(b, c);
        if (!d) continue;
        for (size_t q = 0; q < m.quants().size(); ++q) {
          keys.push_back({static_cast<int>(q), b, c});
          units.push_back(rad({m.size(d->obj)}));
        }
        if (b == c) {
          eqobjs.push_back(c);
          eunits.push_back(rad({}));
        }
      }
    R.run("C2.quant", units, [&](size_t u, const Dig& d, Violation& v) {
      auto [q, b, c] = keys[u];
      ObjId bc = C.product(b, c)->obj;
      H x = m.at(bc, d[3]);
      H r = m.quant(q, b, c, x);
      if (m.valid(b, r)) return true;
      v.witness = m.quants()[q] + " at " + on(b) + "," + on(c) + " leaves the fiber at " + m.show(bc, x);
      v.lhs = m.show(b, r);
      return false;
    });
    R.run("C2.eq", eunits, [&](size_t u, const Dig&, Violation& v) {
      ObjId c = eqobjs[u];
      ObjId cc = C.product(c, c)->obj;
      H r = m.eq(c);
      if (m.valid(cc, r)) return true;
      v.witness = "Eq over " + on(c) + " is not in the fiber";
      v.lhs = m.show(cc, r);
      return false;
    });
  }

  // C3: naturality in b of the quantifiers: P(f) Omega_{b,c} = Omega_{a,c} P(f x id_c)
  {
    std::vector<Dig> units;
    std::vector<std::array<int, 4>> keys;
    std::vector<std::pair<ProductData, ProductData>> prods;
    for (size_t q = 0; q < m.quants().size(); ++q)
      for (ObjId a = 0; a < no; ++a)
        for (ObjId b = 0; b < no; ++b)
          for (ObjId c = 0; c < no; ++c) {
            auto ac = C.product(a, c);
            auto bc = C.product(b, c);
            if (!ac || !bc) continue;
            Dig r = rad({C.hom_size(a, b), m.size(bc->obj)});
            if (box_size(r) == 0) continue;
            keys.push_back({static_cast<int>(q), a, b, c});
            prods.push_back({*ac, *bc});
            units.push_back(r);
          }
    static std::atomic<std::int64_t> generation{0};
    const std::int64_t gen = ++generation;
    R.run("C3.naturality", units, [&](size_t u, const Dig& d, Violation& v) {
      auto [q, a, b, c] = keys[u];
      const auto& [ac, bc] = prods[u];
      // f x id_c depends only on the outer digit; reuse it across the fiber sweep
      thread_local std::array<std::int64_t, 3> last_key{-1, -1, -1};
      thread_local MorId f = -1, fx = -1;
      if (last_key != std::array<std::int64_t, 3>{gen, static_cast<std::int64_t>(u), d[2]}) {
        f = C.hom_at(a, b, d[2]);
        fx = C.pair(C.compose(f, ac.p1), ac.p2);
        last_key = {gen, static_cast<std::int64_t>(u), d[2]};
      }
      H x = m.at(bc.obj, d[3]);
      H l = m.quant(q, a, c, m.pull(fx, x));
      H r = m.pull(f, m.quant(q, b, c, x));
      if (m.bad(l) || m.bad(r) || l == r) return true;
      v.witness = m.quants()[q] + ", f = " + C.morphism_name(f) + ", c = " + on(c) + ", r = " + m.show(bc.obj, x);
      v.lhs = m.show(a, l);
      v.rhs = m.show(a, r);
      return false;
    });
  }

  // C4: (P(c), tensor, e) is a monoid
  bool has_monoid = false;
  for (const auto& o : ops)
    if (o.name == kTensor && o.arity == 2) has_monoid = true;
  if (has_monoid) {
    R.run("C4.monoid.assoc", per3, [&](size_t u, const Dig& d, Violation& v) {
      ObjId c = static_cast<ObjId>(u);
      H x[3];
      args_of(c, d, 3, x);
      H l = m.tensor(c, m.tensor(c, x[0], x[1]), x[2]), r = m.tensor(c, x[0], m.tensor(c, x[1], x[2]));
      if (m.bad(l) || m.bad(r) || l == r) return true;
      v.witness = "tensor over " + on(c) + " at " + m.show(c, x[0]) + ", " + m.show(c, x[1]) + ", " + m.show(c, x[2]);
      v.lhs = m.show(c, l);
      v.rhs = m.show(c, r);
      return false;
    });
    R.run("C4.monoid.unit", per1, [&](size_t u, const Dig& d, Violation& v) {
      ObjId c = static_cast<ObjId>(u);
      H x = m.at(c, d[3]), e = m.unit(c);
      H l = m.tensor(c, e, x), r = m.tensor(c, x, e);
      if ((m.bad(l) || l == x) && (m.bad(r) || r == x)) return true;
      v.witness = "unit over " + on(c) + " at " + m.show(c, x);
      v.lhs = m.show(c, l);
      v.rhs = m.show(c, r);
      return false;
    });
  }

  // C5: Omega_{b,1} P(pi1) = id and Omega_{b,cxd} P(a_{b,c,d}) = Omega_{b,c} Omega_{bxc,d}
  {
    ObjId one = C.terminal();
    std::vector<Dig> units;
    std::vector<std::pair<int, ObjId>> keys;
    for (size_t q = 0; q < m.quants().size(); ++q)
      for (ObjId b = 0; b < no; ++b)
        if (C.product(b, one)) {
          keys.emplace_back(static_cast<int>(q), b);
          units.push_back(rad({m.size(b)}));
        }
    R.run("C5.unit", units, [&](size_t u, const Dig& d, Violation& v) {
      auto [q, b] = keys[u];
      auto b1 = *C.product(b, one);
      H x = m.at(b, d[3]);
      H l = m.quant(q, b, one, m.pull(b1.p1, x));
      if (m.bad(l) || l == x) return true;
      v.witness = m.quants()[q] + " over " + on(b) + " x 1 at " + m.show(b, x);
      v.lhs = m.show(b, l);
      v.rhs = m.show(b, x);
      return false;
    });
    std::vector<Dig> aunits;
    std::vector<std::array<int, 4>> akeys;
    for (size_t q = 0; q < m.quants().size(); ++q)
      for (ObjId b = 0; b < no; ++b)
        for (ObjId c = 0; c < no; ++c)
          for (ObjId d = 0; d < no; ++d) {
            auto cd = C.product(c, d);
            auto bc = C.product(b, c);
            if (!cd || !bc) continue;
            auto b_cd = C.product(b, cd->obj);
            auto bc_d = C.product(bc->obj, d);
            if (!b_cd || !bc_d) continue;
            akeys.push_back({static_cast<int>(q), b, c, d});
            aunits.push_back(rad({m.size(bc_d->obj)}));
          }
    R.run("C5.assoc", aunits, [&](size_t u, const Dig& x, Violation& v) {
      auto [q, b, c, d] = akeys[u];
      ObjId cd = C.product(c, d)->obj, bc = C.product(b, c)->obj;
      ObjId bc_d = C.product(bc, d)->obj;
      MorId a = assoc_iso(C, b, c, d);
      H r0 = m.at(bc_d, x[3]);
      H l = m.quant(q, b, cd, m.pull(a, r0));
      H r = m.quant(q, b, c, m.quant(q, bc, d, r0));
      if (m.bad(l) || m.bad(r) || l == r) return true;
      v.witness = m.quants()[q] + ", b = " + on(b) + ", c = " + on(c) + ", d = " + on(d) + ", r = " + m.show(bc_d, r0);
      v.lhs = m.show(b, l);
      v.rhs = m.show(b, r);
      return false;
    });
  }

  // C6: Eq_1 = e and Eq_{c1 x c2} is the tensor of the reindexed component equalities
  if (has_monoid) {
    ObjId one = C.terminal();
    std::vector<Dig> t1;
    if (C.product(one, one)) t1.push_back(rad({}));
    R.run("C6.terminal", t1, [&](size_t, const Dig&, Violation& v) {
      ObjId oo = C.product(one, one)->obj;
      H l = m.eq(one), r = m.unit(oo);
      if (l == r) return true;
      v.witness = "Eq over the terminal";
      v.lhs = m.show(oo, l);
      v.rhs = m.show(oo, r);
      return false;
    });
    std::vector<std::pair<ObjId, ObjId>> keys;
    for (ObjId c1 = 0; c1 < no; ++c1)
      for (ObjId c2 = 0; c2 < no; ++c2) {
        auto c = C.product(c1, c2);
        if (!c || !C.product(c->obj, c->obj) || !C.product(c1, c1) || !C.product(c2, c2)) continue;
        keys.emplace_back(c1, c2);
      }
    R.run("C6.product", std::vector<Dig>(keys.size(), rad({})), [&](size_t u, const Dig&, Violation& v) {
      auto [c1, c2] = keys[u];
      auto c = *C.product(c1, c2);
      auto cc = *C.product(c.obj, c.obj);
      MorId m1 = C.pair(C.compose(c.p1, cc.p1), C.compose(c.p1, cc.p2));
      MorId m2 = C.pair(C.compose(c.p2, cc.p1), C.compose(c.p2, cc.p2));
      H l = m.eq(c.obj);
      H r = m.tensor(cc.obj, m.pull(m1, m.eq(c1)), m.pull(m2, m.eq(c2)));
      if (m.bad(l) || m.bad(r) || l == r) return true;
      v.witness = "Eq over " + on(c1) + " x " + on(c2);
      v.lhs = m.show(cc.obj, l);
      v.rhs = m.show(cc.obj, r);
      return false;
    });
  }
}

FaReport finish(FaReport rep) {
  rep.ok = rep.violations.empty();
  return rep;
}

}  // namespace

FaReport check_fa(const PropCategory& pc, const CheckOptions& opts) {
  FaReport rep;
  bool compiled = opts.allow_compile && CompiledModel::compilable(pc, opts.compile_fiber_limit);
  std::int64_t limit = opts.exhaustive_limit >= 0 ? opts.exhaustive_limit : (compiled ? 2'000'000'000 : 3'000'000);
  Runner R(opts, limit, opts.parallel, rep);
  category_conditions(pc.base(), R);
  if (compiled) {
    CompiledModel m(pc);
    rep.compiled = true;
    fiber_conditions(m, R);
  } else {
    RefModel m(pc, opts.probe);
    rep.used_probe = m.used_probe;
    fiber_conditions(m, R);
  }
  return finish(std::move(rep));
}

FaReport check_fa_reference(const PropCategory& pc, const CheckOptions& opts) {
  FaReport rep;
  std::int64_t limit = opts.exhaustive_limit >= 0 ? opts.exhaustive_limit : 3'000'000;
  Runner R(opts, limit, false, rep);
  category_conditions(pc.base(), R);
  RefModel m(pc, opts.probe);
  rep.used_probe = m.used_probe;
  fiber_conditions(m, R);
  return finish(std::move(rep));
}

}  // namespace pcat
