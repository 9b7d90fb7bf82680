// SPDX-License-Identifier: Apache-2.0
#include "pcat/io.hpp"

#include <filesystem>
#include <sstream>

namespace pcat {

namespace fs = std::filesystem;

namespace {

const std::string& atom(const SExpr& e, const char* what) {
  if (!e.is_atom()) e.fail(std::string("expected ") + what);
  return e.atom;
}

std::int64_t integer(const SExpr& e, const char* what) {
  const std::string& s = atom(e, what);
  try {
    size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) e.fail(std::string("expected ") + what);
    return v;
  } catch (const std::logic_error&) {
    e.fail(std::string("expected ") + what);
  }
}

std::vector<std::string> atoms_of(const SExpr& e, size_t from, const char* what) {
  if (!e.is_list) e.fail(std::string("expected a list of ") + what);
  std::vector<std::string> out;
  for (size_t i = from; i < e.size(); ++i) out.push_back(atom(e[i], what));
  return out;
}

// Rethrows typing errors at the form's position.
template <class Fn>
auto located(const SExpr& e, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SyntaxError& err) {
    throw ParseError(err.what(), e.line, e.col);
  } catch (const SemanticsError& err) {
    throw ParseError(err.what(), e.line, e.col);
  } catch (const PropError& err) {
    throw ParseError(err.what(), e.line, e.col);
  } catch (const CategoryError& err) {
    throw ParseError(err.what(), e.line, e.col);
  } catch (const FiberedError& err) {
    throw ParseError(err.what(), e.line, e.col);
  }
}

SExpr list(std::vector<SExpr> xs) { return SExpr::make_list(std::move(xs)); }
SExpr at(std::string s) { return SExpr::make_atom(std::move(s)); }

}  // namespace

// ------------------------------------------------------------ syntax

Term read_term(const SExpr& e) {
  if (e.is_atom()) return Term::var(e.atom);
  if (e.items.empty()) e.fail("empty term");
  std::vector<Term> args;
  for (size_t i = 1; i < e.size(); ++i) args.push_back(read_term(e[i]));
  return Term::app(atom(e[0], "function symbol"), std::move(args));
}

Context read_context(const SExpr& e) {
  if (!e.has_head("ctx")) e.fail("expected (ctx (x sort) ...)");
  Context c;
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& b = e[i];
    if (!b.is_list || b.size() != 2) b.fail("expected (variable sort)");
    c.push_back({atom(b[0], "variable"), atom(b[1], "sort")});
  }
  return c;
}

Formula read_formula(const SExpr& e, const Signature& sg, const Language& lang) {
  if (e.is_atom()) {
    if (lang.has_connective(e.atom, 0)) return Formula::conn(e.atom);
    auto r = sg.relations.find(e.atom);
    if (r != sg.relations.end() && r->second.args.empty()) return Formula::rel(e.atom, {});
    e.fail("unknown nullary connective or relation '" + e.atom + "'");
  }
  const std::string& h = e.head();
  if (h == "=") {
    if (e.size() != 4) e.fail("expected (= sort M N)");
    return Formula::eq(atom(e[1], "sort"), read_term(e[2]), read_term(e[3]));
  }
  if (lang.quantifiers.count(h) && e.size() == 3 && e[1].is_list && e[1].size() == 2 && e[1][0].is_atom() &&
      e[1][1].is_atom())
    return Formula::quant(h, {e[1][0].atom, e[1][1].atom}, read_formula(e[2], sg, lang));
  if (sg.relations.count(h)) {
    std::vector<Term> ts;
    for (size_t i = 1; i < e.size(); ++i) ts.push_back(read_term(e[i]));
    return Formula::rel(h, std::move(ts));
  }
  if (lang.connectives.count(h)) {
    std::vector<Formula> xs;
    for (size_t i = 1; i < e.size(); ++i) xs.push_back(read_formula(e[i], sg, lang));
    return Formula::conn(h, std::move(xs));
  }
  if (lang.quantifiers.count(h)) e.fail("expected (" + h + " (x sort) body)");
  e.fail("unknown connective or relation '" + h + "'");
}

Assertion read_assertion(const SExpr& e, const Signature& sg, const Language& lang) {
  if (e.has_head("eqn")) {
    if (e.size() != 5) e.fail("expected (eqn (ctx ...) lhs rhs sort)");
    return Equation{read_context(e[1]), read_term(e[2]), read_term(e[3]), atom(e[4], "sort")};
  }
  if (e.has_head("seq")) {
    Sequent s;
    bool have_ctx = false, have_concl = false;
    for (size_t i = 1; i < e.size(); ++i) {
      const SExpr& part = e[i];
      if (part.has_head("ctx")) {
        s.ctx = read_context(part);
        have_ctx = true;
      } else if (part.has_head("hyp")) {
        for (size_t k = 1; k < part.size(); ++k) s.hyps.push_back(read_formula(part[k], sg, lang));
      } else if (part.has_head("concl")) {
        if (part.size() != 2) part.fail("expected (concl formula)");
        s.concl = read_formula(part[1], sg, lang);
        have_concl = true;
      } else {
        part.fail("expected (ctx ...), (hyp ...) or (concl ...)");
      }
    }
    if (!have_ctx) e.fail("sequent without (ctx ...)");
    if (!have_concl) e.fail("sequent without (concl ...)");
    return s;
  }
  e.fail("expected (eqn ...) or (seq ...)");
}

Language read_language(const SExpr& e) {
  if (!e.has_head("lang")) e.fail("expected (lang ...)");
  Language L;
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.is_atom("lattice")) {
      Language m = Language::lattice();
      for (const auto& [c, n] : m.connectives) L.connectives[c] = n;
      for (const auto& q : m.quantifiers) L.quantifiers.insert(q);
    } else if (x.has_head("conn") && x.size() == 3) {
      L.connectives[atom(x[1], "connective")] = static_cast<int>(integer(x[2], "arity"));
    } else if (x.has_head("quant") && x.size() == 2) {
      L.quantifiers.insert(atom(x[1], "quantifier"));
    } else {
      x.fail("expected (conn name arity), (quant name) or lattice");
    }
  }
  if (L.connectives.at(kUnit) != 0 || L.connectives.at(kTensor) != 2) e.fail("e must be nullary and tensor binary");
  return L;
}

SExpr to_sexpr(const Language& L) {
  std::vector<SExpr> xs{at("lang")};
  for (const auto& [c, n] : L.connectives) xs.push_back(list({at("conn"), at(c), at(std::to_string(n))}));
  for (const auto& q : L.quantifiers) xs.push_back(list({at("quant"), at(q)}));
  return list(std::move(xs));
}

namespace {

void read_signature_form(const SExpr& x, Signature& sg) {
  if (x.has_head("sort")) {
    if (x.size() != 2) x.fail("expected (sort name)");
    const std::string& s = atom(x[1], "sort name");
    if (sg.has_sort(s)) x.fail("sort " + s + " declared twice");
    sg.add_sort(s);
    return;
  }
  auto sorts = [&](const SExpr& l) {
    auto ss = atoms_of(l, 0, "sort");
    for (size_t i = 0; i < ss.size(); ++i)
      if (!sg.has_sort(ss[i])) l[i].fail("unknown sort " + ss[i]);
    return ss;
  };
  if (x.has_head("fn")) {
    if (x.size() != 4) x.fail("expected (fn name (arg sorts) result)");
    const std::string& f = atom(x[1], "function name");
    if (sg.functions.count(f)) x.fail("function " + f + " declared twice");
    FnDecl d{sorts(x[2]), atom(x[3], "result sort")};
    if (!sg.has_sort(d.result)) x[3].fail("unknown sort " + d.result);
    sg.functions[f] = d;
    return;
  }
  if (x.has_head("rel")) {
    if (x.size() != 3) x.fail("expected (rel name (arg sorts))");
    const std::string& r = atom(x[1], "relation name");
    if (sg.relations.count(r)) x.fail("relation " + r + " declared twice");
    sg.relations[r] = {sorts(x[2])};
    return;
  }
  x.fail("expected a signature declaration");
}

bool is_signature_form(const SExpr& x) { return x.has_head("sort") || x.has_head("fn") || x.has_head("rel"); }

}  // namespace

Theory read_theory(const SExpr& e) {
  if (!e.has_head("theory")) e.fail("expected (theory NAME ...)");
  if (e.size() < 2) e.fail("theory without a name");
  Theory T;
  T.name = atom(e[1], "theory name");
  T.lang = Language::lattice();
  for (size_t i = 2; i < e.size(); ++i)
    if (e[i].has_head("lang")) T.lang = read_language(e[i]);
  for (size_t i = 2; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (is_signature_form(x)) {
      read_signature_form(x, T.sg);
    } else if (x.has_head("lang")) {
      continue;
    } else {
      const SExpr& a = x.has_head("axiom") ? (x.size() == 2 ? x[1] : (x.fail("expected (axiom A)"), x)) : x;
      Assertion A = read_assertion(a, T.sg, T.lang);
      located(a, [&] {
        wf_assertion(T.sg, T.lang, A);
        return 0;
      });
      T.axioms.push_back(std::move(A));
    }
  }
  located(e, [&] {
    T.sg.validate();
    return 0;
  });
  return T;
}

namespace {

std::vector<SExpr> signature_forms(const Signature& sg) {
  std::vector<SExpr> xs;
  for (const auto& s : sg.sorts) xs.push_back(list({at("sort"), at(s)}));
  for (const auto& [f, d] : sg.functions) {
    std::vector<SExpr> args;
    for (const auto& a : d.args) args.push_back(at(a));
    xs.push_back(list({at("fn"), at(f), list(std::move(args)), at(d.result)}));
  }
  for (const auto& [r, d] : sg.relations) {
    std::vector<SExpr> args;
    for (const auto& a : d.args) args.push_back(at(a));
    xs.push_back(list({at("rel"), at(r), list(std::move(args))}));
  }
  return xs;
}

std::string pretty_forms(const std::string& head, const std::vector<SExpr>& forms) {
  std::string s = "(" + head;
  for (const auto& f : forms) {
    std::string body = to_pretty(f, 76);
    s += "\n  ";
    for (char ch : body) s += ch == '\n' ? std::string("\n  ") : std::string(1, ch);
  }
  return s + ")\n";
}

}  // namespace

std::string print_theory(const Theory& T) {
  auto forms = signature_forms(T.sg);
  forms.push_back(to_sexpr(T.lang));
  for (const auto& a : T.axioms) forms.push_back(to_sexpr(a));
  return pretty_forms("theory " + T.name, forms);
}

ProofNode read_proof(const SExpr& e, const Signature& sg, const Language& lang) {
  if (!e.has_head("proof")) e.fail("expected (proof ...)");
  ProofNode p;
  bool have_rule = false, have_concl = false;
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.has_head("rule") && x.size() == 2) {
      auto r = rule_from_name(atom(x[1], "rule name"));
      if (!r) x[1].fail("unknown rule " + x[1].atom);
      p.rule = *r;
      have_rule = true;
    } else if (x.has_head("concl") && x.size() == 2) {
      p.concl = read_assertion(x[1], sg, lang);
      have_concl = true;
    } else if (x.has_head("var") && x.size() == 2) {
      p.var = atom(x[1], "variable");
    } else if (x.has_head("pos") && x.size() == 2) {
      p.pos = static_cast<int>(integer(x[1], "position"));
    } else if (x.has_head("sub")) {
      for (size_t k = 1; k < x.size(); ++k) p.premises.push_back(read_proof(x[k], sg, lang));
    } else {
      x.fail("expected (rule ...), (concl ...), (var ...), (pos ...) or (sub ...)");
    }
  }
  if (!have_rule) e.fail("proof node without (rule ...)");
  if (!have_concl) e.fail("proof node without (concl ...)");
  return p;
}

SExpr to_sexpr(const ProofNode& p) {
  std::vector<SExpr> xs{at("proof"), list({at("rule"), at(rule_name(p.rule))}), list({at("concl"), to_sexpr(p.concl)})};
  if (p.var) xs.push_back(list({at("var"), at(*p.var)}));
  if (p.pos) xs.push_back(list({at("pos"), at(std::to_string(*p.pos))}));
  if (!p.premises.empty()) {
    std::vector<SExpr> sub{at("sub")};
    for (const auto& q : p.premises) sub.push_back(to_sexpr(q));
    xs.push_back(list(std::move(sub)));
  }
  return list(std::move(xs));
}

std::string print_proof(const ProofNode& p) { return to_pretty(to_sexpr(p), 100) + "\n"; }

Probe read_probe(const SExpr& e) {
  if (!e.has_head("probe")) e.fail("expected (probe (values ...))");
  Probe p;
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.has_head("values")) {
      p.values.clear();
      for (size_t k = 1; k < x.size(); ++k) {
        try {
          p.values.push_back(parse_rational(atom(x[k], "rational")));
        } catch (const PropError& err) {
          x[k].fail(err.what());
        }
      }
    } else if (x.has_head("max") && x.size() == 2) {
      p.max_elements = integer(x[1], "count");
    } else {
      x.fail("expected (values ...) or (max N)");
    }
  }
  return p;
}

bool theories_alpha_equal(const Theory& a, const Theory& b) {
  if (a.name != b.name || !(a.sg == b.sg) || !(a.lang == b.lang) || a.axioms.size() != b.axioms.size()) return false;
  for (size_t i = 0; i < a.axioms.size(); ++i)
    if (!alpha_eq(a.axioms[i], b.axioms[i])) return false;
  return true;
}

bool proofs_alpha_equal(const ProofNode& a, const ProofNode& b) {
  if (a.rule != b.rule || a.var != b.var || a.pos != b.pos || a.premises.size() != b.premises.size()) return false;
  if (!alpha_eq(a.concl, b.concl)) return false;
  for (size_t i = 0; i < a.premises.size(); ++i)
    if (!proofs_alpha_equal(a.premises[i], b.premises[i])) return false;
  return true;
}

// ------------------------------------------------------------ workspace

FileKind file_kind(const SExpr& e) {
  if (e.has_head("theory")) return FileKind::Theory;
  if (e.has_head("builtin") || e.has_head("product") || e.has_head("explicit")) return FileKind::PropCat;
  if (e.has_head("structure")) return FileKind::Structure;
  if (e.has_head("morphism")) return FileKind::Morphism;
  if (e.has_head("interp")) return FileKind::Interp;
  if (e.has_head("proof")) return FileKind::Proof;
  if (e.has_head("probe")) return FileKind::Probe;
  return FileKind::Unknown;
}

const char* kind_name(FileKind k) {
  switch (k) {
    case FileKind::Theory: return "theory";
    case FileKind::PropCat: return "propcat";
    case FileKind::Structure: return "structure";
    case FileKind::Morphism: return "morphism";
    case FileKind::Interp: return "interp";
    case FileKind::Proof: return "proof";
    case FileKind::Probe: return "probe";
    case FileKind::Unknown: break;
  }
  return "unknown";
}

std::string Workspace::canonical_path(const std::string& p) {
  std::error_code ec;
  auto c = fs::weakly_canonical(fs::path(p), ec);
  return ec ? p : c.string();
}

std::string Workspace::resolve(const std::string& dir, const std::string& ref) {
  fs::path r(ref);
  if (r.is_absolute() || dir.empty()) return canonical_path(ref);
  return canonical_path((fs::path(dir) / r).string());
}

SExpr Workspace::load(const std::string& cpath) {
  auto it = text_.find(cpath);
  if (it != text_.end()) return it->second;
  std::string text = read_file(cpath);
  SExpr e;
  try {
    e = parse_sexpr(text);
  } catch (const ParseError& err) {
    throw ParseError(err.message(), err.line(), err.col(), cpath);
  }
  text_[cpath] = e;
  return e;
}

namespace {

std::string dir_of(const std::string& cpath) { return fs::path(cpath).parent_path().string(); }

template <class Fn>
auto in_file(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ParseError& err) {
    if (!err.file().empty()) throw;
    throw ParseError(err.message(), err.line(), err.col(), path);
  }
}

}  // namespace

const Theory& Workspace::theory(const std::string& path) {
  std::string c = canonical_path(path);
  auto it = theories_.find(c);
  if (it != theories_.end()) return *it->second;
  return in_file(c, [&]() -> const Theory& {
    SExpr e = load(c);
    auto T = std::make_unique<Theory>(read_theory(e));
    return *theories_.emplace(c, std::move(T)).first->second;
  });
}

PropPtr Workspace::propcat(const std::string& path) {
  std::string c = canonical_path(path);
  auto it = propcats_.find(c);
  if (it != propcats_.end()) return it->second;
  return in_file(c, [&] {
    SExpr e = load(c);
    PropPtr P = propcat_from(e, dir_of(c));
    propcats_[c] = P;
    origin_[P.get()] = c;
    return P;
  });
}

namespace {

std::vector<AtomSpec> read_atoms(const SExpr& x) {
  std::vector<AtomSpec> out;
  for (size_t i = 1; i < x.size(); ++i) {
    const SExpr& a = x[i];
    if (!a.is_list || a.size() < 1) a.fail("expected (ATOM elem ...)");
    out.push_back({atom(a[0], "atom name"), atoms_of(a, 1, "element")});
  }
  return out;
}

const SExpr* field(const SExpr& e, const char* name) {
  for (size_t i = 1; i < e.size(); ++i)
    if (e[i].has_head(name)) return &e[i];
  return nullptr;
}

const SExpr& need_field(const SExpr& e, const char* name) {
  const SExpr* f = field(e, name);
  if (!f) e.fail(std::string("missing (") + name + " ...)");
  return *f;
}

std::shared_ptr<FiniteLattice> read_values(const SExpr& x) {
  if (x.is_atom("bool")) return FiniteLattice::boolean();
  if (x.is_atom() && x.atom.rfind("luk", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(x.atom.substr(3));
    } catch (const std::exception&) {
      x.fail("expected lukN");
    }
    if (n < 2) x.fail("lukN needs N >= 2");
    return FiniteLattice::lukasiewicz(n);
  }
  if (x.has_head("finite")) {
    std::string name = atom(x[1], "lattice name");
    auto elems = atoms_of(need_field(x, "elems"), 1, "element");
    auto index = [&](const SExpr& a) {
      for (size_t i = 0; i < elems.size(); ++i)
        if (elems[i] == atom(a, "element")) return static_cast<int>(i);
      a.fail("unknown element " + a.atom);
    };
    std::vector<std::vector<bool>> leq(elems.size(), std::vector<bool>(elems.size(), false));
    for (size_t i = 0; i < elems.size(); ++i) leq[i][i] = true;
    for (size_t i = 1; i < need_field(x, "leq").size(); ++i) {
      const SExpr& p = need_field(x, "leq")[i];
      if (!p.is_list || p.size() != 2) p.fail("expected (a b)");
      leq[index(p[0])][index(p[1])] = true;
    }
    std::map<std::string, OpTable> ops;
    for (size_t i = 2; i < x.size(); ++i) {
      const SExpr& o = x[i];
      if (!o.has_head("op")) continue;
      if (o.size() != 4) o.fail("expected (op name arity (table ...))");
      OpTable t;
      t.arity = static_cast<int>(integer(o[2], "arity"));
      for (size_t k = 0; k < o[3].size(); ++k) t.table.push_back(index(o[3][k]));
      ops[atom(o[1], "op name")] = t;
    }
    auto L = std::make_shared<FiniteLattice>(name, elems, leq, ops);
    return L;
  }
  x.fail("expected bool, lukN or (finite ...)");
}

MostowskiSpec read_mostowski(const SExpr& q) {
  if (q.size() != 3) q.fail("expected (quant NAME kind)");
  MostowskiSpec s;
  s.name = atom(q[1], "quantifier name");
  const SExpr& k = q[2];
  if (k.is_atom("all")) {
    s.kind = MostowskiSpec::Kind::All;
  } else if (k.is_atom("nonempty")) {
    s.kind = MostowskiSpec::Kind::Nonempty;
  } else if (k.is_list && k.size() == 2 && (k.has_head("exactly") || k.has_head("at-least") || k.has_head("at-most"))) {
    s.kind = k.has_head("exactly") ? MostowskiSpec::Kind::Exactly
             : k.has_head("at-least") ? MostowskiSpec::Kind::AtLeast
                                       : MostowskiSpec::Kind::AtMost;
    s.k = static_cast<int>(integer(k[1], "count"));
  } else if (k.has_head("table")) {
    s.kind = MostowskiSpec::Kind::Table;
    for (size_t i = 1; i < k.size(); ++i) {
      const SExpr& row = k[i];
      if (!row.is_list || row.size() < 1) row.fail("expected (carrier-size mask ...)");
      int m = static_cast<int>(integer(row[0], "carrier size"));
      auto& fam = s.families[m];
      for (size_t j = 1; j < row.size(); ++j) fam.push_back(static_cast<std::uint64_t>(integer(row[j], "mask")));
    }
  } else {
    k.fail("expected all, nonempty, (exactly k), (at-least k), (at-most k) or (table ...)");
  }
  return s;
}

TNorm read_tnorm(const SExpr& x) {
  if (x.is_atom("product")) return TNorm::product();
  if (x.is_atom("min")) return TNorm::minimum();
  if (x.is_atom("luk")) return TNorm::lukasiewicz();
  x.fail("expected product, min or luk");
}

int depth_of(const SExpr& e) {
  const SExpr* d = field(e, "depth");
  if (!d) return 2;
  if (d->size() != 2) d->fail("expected (depth N)");
  return static_cast<int>(integer((*d)[1], "depth"));
}

std::shared_ptr<const PropCategory> read_explicit(const SExpr& e) {
  std::string label = atom(e[1], "name");
  Language lang = field(e, "lang") ? read_language(*field(e, "lang")) : Language::lattice();
  auto objs = atoms_of(need_field(e, "objects"), 1, "object");
  auto obj = [&](const SExpr& a) {
    for (size_t i = 0; i < objs.size(); ++i)
      if (objs[i] == atom(a, "object")) return static_cast<ObjId>(i);
    a.fail("unknown object " + a.atom);
  };
  std::vector<ExplicitCategory::Mor> mors;
  const SExpr& ms = need_field(e, "morphisms");
  for (size_t i = 1; i < ms.size(); ++i) {
    const SExpr& m = ms[i];
    if (!m.is_list || m.size() != 3) m.fail("expected (name dom cod)");
    mors.push_back({atom(m[0], "morphism"), obj(m[1]), obj(m[2])});
  }
  auto mor = [&](const SExpr& a) {
    for (size_t i = 0; i < mors.size(); ++i)
      if (mors[i].name == atom(a, "morphism")) return static_cast<MorId>(i);
    a.fail("unknown morphism " + a.atom);
  };
  std::vector<MorId> ids(objs.size(), -1);
  const SExpr& is = need_field(e, "identity");
  for (size_t i = 1; i < is.size(); ++i) {
    if (!is[i].is_list || is[i].size() != 2) is[i].fail("expected (object morphism)");
    ids[obj(is[i][0])] = mor(is[i][1]);
  }
  for (size_t i = 0; i < ids.size(); ++i)
    if (ids[i] < 0) is.fail("no identity for " + objs[i]);
  const SExpr& t = need_field(e, "terminal");
  if (t.size() != 2) t.fail("expected (terminal object)");
  auto C = std::make_shared<ExplicitCategory>(objs, mors, ids, obj(t[1]));
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.has_head("comp"))
      for (size_t k = 1; k < x.size(); ++k) {
        if (x[k].size() != 3) x[k].fail("expected (g f g.f)");
        located(x[k], [&] {
          C->set_comp(mor(x[k][0]), mor(x[k][1]), mor(x[k][2]));
          return 0;
        });
      }
    if (x.has_head("product"))
      for (size_t k = 1; k < x.size(); ++k) {
        if (x[k].size() != 5) x[k].fail("expected (b c bxc p1 p2)");
        C->set_product(obj(x[k][0]), obj(x[k][1]), {obj(x[k][2]), mor(x[k][3]), mor(x[k][4])});
      }
    if (x.has_head("pair"))
      for (size_t k = 1; k < x.size(); ++k) {
        if (x[k].size() != 3) x[k].fail("expected (f g <f,g>)");
        C->set_pair(mor(x[k][0]), mor(x[k][1]), mor(x[k][2]));
      }
  }
  located(e, [&] {
    C->finish();
    return 0;
  });
  std::vector<ExplicitPropCategory::Fiber> fibers(objs.size());
  std::vector<bool> have(objs.size(), false);
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (!x.has_head("fiber")) continue;
    ObjId c = obj(x[1]);
    auto& F = fibers[c];
    have[c] = true;
    F.elems = atoms_of(need_field(x, "elems"), 1, "element");
    auto el = [&](const SExpr& a) {
      for (size_t k = 0; k < F.elems.size(); ++k)
        if (F.elems[k] == atom(a, "element")) return static_cast<int>(k);
      a.fail("unknown element " + a.atom);
    };
    size_t n = F.elems.size();
    F.leq.assign(n, std::vector<bool>(n, false));
    for (size_t k = 0; k < n; ++k) F.leq[k][k] = true;
    const SExpr& l = need_field(x, "leq");
    for (size_t k = 1; k < l.size(); ++k) {
      if (!l[k].is_list || l[k].size() != 2) l[k].fail("expected (a b)");
      F.leq[el(l[k][0])][el(l[k][1])] = true;
    }
    for (size_t k = 2; k < x.size(); ++k) {
      const SExpr& o = x[k];
      if (!o.has_head("op")) continue;
      if (o.size() != 3) o.fail("expected (op name (table ...))");
      std::string name = atom(o[1], "connective");
      auto ar = lang.connectives.find(name);
      if (ar == lang.connectives.end()) o[1].fail("connective " + name + " is not in the language");
      OpTable tb;
      tb.arity = ar->second;
      for (size_t j = 0; j < o[2].size(); ++j) tb.table.push_back(el(o[2][j]));
      F.ops[name] = tb;
    }
  }
  for (size_t c = 0; c < objs.size(); ++c)
    if (!have[c]) e.fail("no fiber over " + objs[c]);
  auto P = located(e, [&] { return std::make_shared<ExplicitPropCategory>(label, C, lang, fibers); });
  auto elem_in = [&](ObjId c, const SExpr& a) { return static_cast<int>(P->parse(c, a)[0]); };
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.has_head("pull")) {
      if (x.size() != 3 || !x[2].has_head("map")) x.fail("expected (pull f (map ...))");
      MorId f = mor(x[1]);
      std::vector<int> tb;
      for (size_t k = 1; k < x[2].size(); ++k) tb.push_back(elem_in(C->dom(f), x[2][k]));
      P->set_pull(f, tb);
    } else if (x.has_head("quant")) {
      if (x.size() != 5 || !x[4].has_head("map")) x.fail("expected (quant Q b c (map ...))");
      ObjId b = obj(x[2]), c = obj(x[3]);
      std::vector<int> tb;
      for (size_t k = 1; k < x[4].size(); ++k) tb.push_back(elem_in(b, x[4][k]));
      P->set_quant(atom(x[1], "quantifier"), b, c, tb);
    } else if (x.has_head("eq")) {
      if (x.size() != 3) x.fail("expected (eq c element)");
      ObjId c = obj(x[1]);
      auto d = C->product(c, c);
      if (!d) x.fail("no designated product " + objs[c] + " x " + objs[c]);
      P->set_eq(c, elem_in(d->obj, x[2]));
    }
  }
  located(e, [&] {
    P->finish();
    return 0;
  });
  return P;
}

}  // namespace

PropPtr Workspace::propcat_from(const SExpr& e, const std::string& dir) {
  if (e.is_atom()) return propcat(resolve(dir, e.atom));
  if (e.has_head("product")) {
    std::vector<PropPtr> parts;
    for (size_t i = 1; i < e.size(); ++i) parts.push_back(propcat_from(e[i], dir));
    return product_propcat(parts);
  }
  if (e.has_head("explicit")) return read_explicit(e);
  if (!e.has_head("builtin") || e.size() < 2) e.fail("expected (builtin KIND ...), (product ...) or (explicit ...)");
  const std::string& kind = atom(e[1], "builtin kind");
  std::vector<AtomSpec> atoms;
  if (const SExpr* a = field(e, "atoms")) atoms = read_atoms(*a);
  int depth = depth_of(e);
  return located(e, [&]() -> PropPtr {
    if (kind == "lattice") {
      auto L = read_values(field(e, "values") ? (*field(e, "values"))[1] : at("bool"));
      if (const SExpr* ops = field(e, "ops")) {
        auto keep = atoms_of(*ops, 1, "connective");
        std::map<std::string, OpTable> t;
        for (const auto& k : keep) {
          auto it = L->tables().find(k);
          if (it == L->tables().end()) ops->fail("lattice has no connective " + k);
          t[k] = it->second;
        }
        L = std::make_shared<FiniteLattice>(L->name(), L->elems(), L->order(), t);
      }
      return mk_lattice_propcat(atoms, L, depth);
    }
    if (kind == "powerset") {
      std::vector<MostowskiSpec> qs;
      for (size_t i = 2; i < e.size(); ++i)
        if (e[i].has_head("quant")) qs.push_back(read_mostowski(e[i]));
      return mk_powerset_propcat(atoms, qs, depth);
    }
    if (kind == "fuzzy") {
      TNorm t = read_tnorm(need_field(e, "tnorm").size() == 2 ? need_field(e, "tnorm")[1] : e);
      std::vector<std::string> qs{kForall, kExists};
      if (const SExpr* q = field(e, "quants")) qs = atoms_of(*q, 1, "quantifier");
      return mk_fuzzy_propcat(atoms, t, qs, depth, probe_);
    }
    e[1].fail("unknown builtin " + kind);
  });
}

namespace {

MorId read_morphism_ref(const Category& C, const SExpr& x, ObjId dom, ObjId cod) {
  if (x.has_head("table")) {
    const auto* W = dynamic_cast<const WordCategory*>(&C);
    if (!W) x.fail("(table ...) needs a word base category");
    std::vector<int> t;
    for (size_t i = 1; i < x.size(); ++i) t.push_back(static_cast<int>(integer(x[i], "point index")));
    return located(x, [&] { return W->from_table(dom, cod, t); });
  }
  auto m = C.find_morphism(atom(x, "morphism"));
  if (!m) x.fail("unknown morphism " + x.atom);
  if (C.dom(*m) != dom || C.cod(*m) != cod)
    x.fail("morphism " + x.atom + " should go " + C.object_name(dom) + " -> " + C.object_name(cod));
  return *m;
}

ObjId read_object(const Category& C, const SExpr& x) {
  auto o = C.find_object(atom(x, "object"));
  if (!o) x.fail("unknown object " + x.atom);
  return *o;
}

}  // namespace

Structure Workspace::structure_from(const SExpr& e, const std::string& dir) {
  if (!e.has_head("structure") || e.size() < 2) e.fail("expected (structure NAME ...)");
  Structure S;
  S.name = atom(e[1], "structure name");
  const SExpr& h = need_field(e, "host");
  if (h.size() != 2) h.fail("expected (host pc)");
  S.host = propcat_from(h[1], dir);
  const Category& C = S.host->base();
  bool declared = false;
  if (const SExpr* sig = field(e, "sig")) {
    S.sg = theory(resolve(dir, atom((*sig)[1], "theory path"))).sg;
    declared = true;
  }
  // declarations first, then interpretations
  for (size_t i = 2; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.has_head("sort") && x.size() == 3) {
      if (!declared) S.sg.add_sort(atom(x[1], "sort"));
      S.sorts[atom(x[1], "sort")] = read_object(C, x[2]);
    }
  }
  for (size_t i = 2; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.has_head("fn")) {
      std::string f = atom(x[1], "function");
      if (x.size() == 5 && !declared) {
        Signature tmp = S.sg;
        read_signature_form(list({x[0], x[1], x[2], x[3]}), tmp);
        S.sg = tmp;
      } else if (x.size() != 3 || !declared) {
        x.fail("expected (fn f (args) result MOR), or (fn f MOR) with (sig ...)");
      }
      auto d = S.sg.functions.find(f);
      if (d == S.sg.functions.end()) x.fail("function " + f + " is not in the signature");
      std::vector<ObjId> args;
      for (const auto& a : d->second.args) {
        if (!S.sorts.count(a)) x.fail("sort " + a + " is not interpreted");
        args.push_back(S.sorts[a]);
      }
      auto dom = product_of(C, args);
      if (!dom) x.fail("host lacks the product of the argument sorts of " + f);
      if (!S.sorts.count(d->second.result)) x.fail("sort " + d->second.result + " is not interpreted");
      S.fns[f] = read_morphism_ref(C, x[x.size() - 1], *dom, S.sorts[d->second.result]);
    } else if (x.has_head("rel")) {
      std::string r = atom(x[1], "relation");
      if (x.size() == 4 && !declared) {
        Signature tmp = S.sg;
        read_signature_form(list({x[0], x[1], x[2]}), tmp);
        S.sg = tmp;
      } else if (x.size() != 3 || !declared) {
        x.fail("expected (rel R (args) ELEM), or (rel R ELEM) with (sig ...)");
      }
      auto d = S.sg.relations.find(r);
      if (d == S.sg.relations.end()) x.fail("relation " + r + " is not in the signature");
      std::vector<ObjId> args;
      for (const auto& a : d->second.args) {
        if (!S.sorts.count(a)) x.fail("sort " + a + " is not interpreted");
        args.push_back(S.sorts[a]);
      }
      auto dom = product_of(C, args);
      if (!dom) x.fail("host lacks the product of the argument sorts of " + r);
      S.rels[r] = located(x, [&] { return S.host->parse(*dom, x[x.size() - 1]); });
    } else if (!(x.has_head("sort") || x.has_head("host") || x.has_head("sig"))) {
      x.fail("expected (host ...), (sig ...), (sort ...), (fn ...) or (rel ...)");
    }
  }
  located(e, [&] {
    S.validate();
    return 0;
  });
  return S;
}

const Structure& Workspace::structure(const std::string& path) {
  std::string c = canonical_path(path);
  auto it = structures_.find(c);
  if (it != structures_.end()) return *it->second;
  return in_file(c, [&]() -> const Structure& {
    SExpr e = load(c);
    auto S = std::make_unique<Structure>(structure_from(e, dir_of(c)));
    return *structures_.emplace(c, std::move(S)).first->second;
  });
}

std::string Workspace::print_structure(const Structure& S) {
  const Category& C = S.host->base();
  std::vector<SExpr> forms;
  std::string hp = path_of(S.host.get());
  if (hp.empty()) throw FiberedError("structure host was not loaded from a file");
  forms.push_back(list({at("host"), at(hp)}));
  for (const auto& [s, o] : S.sorts) forms.push_back(list({at("sort"), at(s), at(C.object_name(o))}));
  for (const auto& [f, m] : S.fns) {
    const auto& d = S.sg.functions.at(f);
    std::vector<SExpr> args;
    for (const auto& a : d.args) args.push_back(at(a));
    forms.push_back(list({at("fn"), at(f), list(std::move(args)), at(d.result), at(C.morphism_name(m))}));
  }
  for (const auto& [r, el] : S.rels) {
    const auto& d = S.sg.relations.at(r);
    std::vector<SExpr> args;
    std::vector<ObjId> objs;
    for (const auto& a : d.args) {
      args.push_back(at(a));
      objs.push_back(S.sorts.at(a));
    }
    ObjId dom = product_of_or_throw(C, objs);
    forms.push_back(list({at("rel"), at(r), list(std::move(args)), parse_sexpr(S.host->format(dom, el))}));
  }
  return pretty_forms("structure " + S.name, forms);
}

MorphPtr Workspace::morphism(const std::string& path) {
  std::string c = canonical_path(path);
  auto it = morphisms_.find(c);
  if (it != morphisms_.end()) return it->second;
  return in_file(c, [&] {
    SExpr e = load(c);
    MorphPtr F = morphism_from(e, dir_of(c));
    morphisms_[c] = F;
    origin_[F.get()] = c;
    return F;
  });
}

MorphPtr Workspace::morphism_from(const SExpr& e, const std::string& dir) {
  if (e.is_atom()) return morphism(resolve(dir, e.atom));
  if (!e.has_head("morphism") || e.size() < 2) e.fail("expected (morphism NAME ...)");
  std::string name = atom(e[1], "morphism name");
  if (const SExpr* c = field(e, "compose")) {
    if (c->size() != 3) c->fail("expected (compose G F)");
    MorphPtr G = morphism_from((*c)[1], dir), F = morphism_from((*c)[2], dir);
    return located(*c, [&]() -> MorphPtr {
      auto H = compose_morphisms(G, F);
      return std::make_shared<FnMorphism>(
          name, H->source(), H->target(), [H](ObjId a) { return H->obj(a); }, [H](MorId f) { return H->mor(f); },
          [H](ObjId x, const Elem& r) { return H->fiber(x, r); });
    });
  }
  const SExpr& s = need_field(e, "src");
  const SExpr& t = need_field(e, "tgt");
  PropPtr P = propcat_from(s[1], dir);
  PropPtr Q = propcat_from(t[1], dir);
  return located(e, [&]() -> MorphPtr {
    if (field(e, "identity")) {
      if (P != Q) e.fail("identity needs the same source and target");
      auto I = identity_morphism(P);
      return std::make_shared<FnMorphism>(
          name, P, P, [](ObjId a) { return a; }, [](MorId f) { return f; }, [](ObjId, const Elem& r) { return r; });
    }
    if (const SExpr* v = field(e, "values")) {
      auto fp = std::dynamic_pointer_cast<const FunctionPropCategory>(P);
      auto fq = std::dynamic_pointer_cast<const FunctionPropCategory>(Q);
      if (!fp || !fq) v->fail("(values ...) needs function prop-categories");
      std::map<Code, Code> m;
      for (size_t i = 1; i < v->size(); ++i) {
        const SExpr& p = (*v)[i];
        if (!p.is_list || p.size() != 2) p.fail("expected (from to)");
        m[fp->domain().parse(p[0])] = fq->domain().parse(p[1]);
      }
      return value_morphism(name, P, Q, m);
    }
    if (const SExpr* r = field(e, "relabel")) {
      std::vector<AtomRelabel> rs;
      for (size_t i = 1; i < r->size(); ++i) {
        const SExpr& a = (*r)[i];
        if (!a.is_list || a.size() < 2) a.fail("expected (FROM TO (x y) ...)");
        AtomRelabel ar{atom(a[0], "atom"), atom(a[1], "atom"), {}};
        for (size_t k = 2; k < a.size(); ++k) {
          if (!a[k].is_list || a[k].size() != 2) a[k].fail("expected (x y)");
          ar.elems.push_back({atom(a[k][0], "element"), atom(a[k][1], "element")});
        }
        rs.push_back(ar);
      }
      return relabel_morphism(name, P, Q, rs);
    }
    if (const SExpr* pr = field(e, "projection")) {
      auto pp = std::dynamic_pointer_cast<const ProductPropCategory>(P);
      if (!pp) pr->fail("projection needs a product source");
      auto i = integer((*pr)[1], "factor index");
      if (i < 1 || static_cast<size_t>(i) > pp->arity()) pr->fail("factor index out of range");
      if (pp->part_ptr(static_cast<size_t>(i - 1)) != Q) pr->fail("target is not that factor");
      auto F = projection_morphism(pp, static_cast<size_t>(i - 1));
      return std::make_shared<FnMorphism>(
          name, P, Q, [F](ObjId a) { return F->obj(a); }, [F](MorId f) { return F->mor(f); },
          [F](ObjId x, const Elem& r) { return F->fiber(x, r); });
    }
    if (const SExpr* pa = field(e, "pairing")) {
      auto qq = std::dynamic_pointer_cast<const ProductPropCategory>(Q);
      if (!qq) pa->fail("pairing needs a product target");
      std::vector<MorphPtr> parts;
      for (size_t i = 1; i < pa->size(); ++i) parts.push_back(morphism_from((*pa)[i], dir));
      auto F = pairing_morphism(qq, parts);
      if (F->source() != P) pa->fail("components do not start at the source");
      return std::make_shared<FnMorphism>(
          name, P, Q, [F](ObjId a) { return F->obj(a); }, [F](MorId f) { return F->mor(f); },
          [F](ObjId x, const Elem& r) { return F->fiber(x, r); });
    }
    if (field(e, "omap")) {
      const Category& C = P->base();
      const Category& D = Q->base();
      std::vector<ObjId> om(C.object_count(), -1);
      const SExpr& o = need_field(e, "omap");
      for (size_t i = 1; i < o.size(); ++i) {
        if (!o[i].is_list || o[i].size() != 2) o[i].fail("expected (a b)");
        om[read_object(C, o[i][0])] = read_object(D, o[i][1]);
      }
      for (ObjId a = 0; a < C.object_count(); ++a)
        if (om[a] < 0) o.fail("object map misses " + C.object_name(a));
      std::vector<MorId> mm(static_cast<size_t>(C.morphism_count()), -1);
      if (const SExpr* m = field(e, "mmap"))
        for (size_t i = 1; i < m->size(); ++i) {
          const SExpr& p = (*m)[i];
          if (!p.is_list || p.size() != 2) p.fail("expected (f g)");
          auto f = C.find_morphism(atom(p[0], "morphism"));
          if (!f) p[0].fail("unknown morphism " + p[0].atom);
          mm[*f] = read_morphism_ref(D, p[1], om[C.dom(*f)], om[C.cod(*f)]);
        }
      for (ObjId a = 0; a < C.object_count(); ++a)
        if (mm[C.identity(a)] < 0) mm[C.identity(a)] = D.identity(om[a]);
      for (MorId f = 0; f < C.morphism_count(); ++f)
        if (mm[f] < 0) e.fail("morphism map misses " + C.morphism_name(f));
      std::vector<std::vector<Elem>> pm(C.object_count());
      for (size_t i = 1; i < e.size(); ++i) {
        const SExpr& x = e[i];
        if (!x.has_head("pmap")) continue;
        ObjId c = read_object(C, x[1]);
        auto n = P->fiber_size(c);
        if (!n) x.fail("explicit fiber maps need finite fibers");
        pm[c].assign(static_cast<size_t>(*n), Elem{});
        std::vector<char> seen(static_cast<size_t>(*n), 0);
        for (size_t k = 2; k < x.size(); ++k) {
          const SExpr& p = x[k];
          if (!p.is_list || p.size() != 2) p.fail("expected (r s)");
          auto idx = P->index_of(c, P->parse(c, p[0]));
          pm[c][*idx] = Q->parse(om[c], p[1]);
          seen[*idx] = 1;
        }
        for (size_t k = 0; k < seen.size(); ++k)
          if (!seen[k]) x.fail("fiber map misses " + P->format(c, P->fiber_element(c, static_cast<std::int64_t>(k))));
      }
      return table_morphism(name, P, Q, om, mm, pm);
    }
    e.fail("expected (identity), (values ...), (relabel ...), (projection i), (pairing ...), (compose ...) or tables");
  });
}

std::string Workspace::print_morphism(const std::string& path) {
  std::string c = canonical_path(path);
  morphism(c);
  return to_pretty(text_.at(c), 78) + "\n";
}

std::string Workspace::print_propcat(const std::string& path) {
  std::string c = canonical_path(path);
  propcat(c);
  return to_pretty(text_.at(c), 78) + "\n";
}

SignatureInterpretation Workspace::interpretation_from(const SExpr& e, const std::string& dir) {
  if (!e.has_head("interp") || e.size() < 2) e.fail("expected (interp NAME ...)");
  SignatureInterpretation h;
  h.name = atom(e[1], "interpretation name");
  const Theory& src = theory(resolve(dir, atom(need_field(e, "source")[1], "theory path")));
  const Theory& tgt = theory(resolve(dir, atom(need_field(e, "target")[1], "theory path")));
  h.source = src.sg;
  h.target = tgt.sg;
  for (size_t i = 2; i < e.size(); ++i) {
    const SExpr& x = e[i];
    if (x.has_head("sort")) {
      if (x.size() != 3) x.fail("expected (sort s (ctx ...))");
      h.sorts[atom(x[1], "sort")] = read_context(x[2]);
    } else if (x.has_head("fn")) {
      if (x.size() != 4 || !x[3].has_head("terms")) x.fail("expected (fn f (ctx ...) (terms ...))");
      SignatureInterpretation::FnImage im{read_context(x[2]), {}};
      for (size_t k = 1; k < x[3].size(); ++k) im.terms.push_back(read_term(x[3][k]));
      h.fns[atom(x[1], "function")] = im;
    } else if (x.has_head("rel")) {
      if (x.size() != 4) x.fail("expected (rel R (ctx ...) formula)");
      h.rels[atom(x[1], "relation")] = {read_context(x[2]), read_formula(x[3], tgt.sg, tgt.lang)};
    } else if (!(x.has_head("source") || x.has_head("target"))) {
      x.fail("expected (source ...), (target ...), (sort ...), (fn ...) or (rel ...)");
    }
  }
  located(e, [&] {
    h.validate(tgt.lang);
    return 0;
  });
  return h;
}

const SignatureInterpretation& Workspace::interpretation(const std::string& path) {
  std::string c = canonical_path(path);
  auto it = interps_.find(c);
  if (it != interps_.end()) return *it->second;
  return in_file(c, [&]() -> const SignatureInterpretation& {
    SExpr e = load(c);
    auto h = std::make_unique<SignatureInterpretation>(interpretation_from(e, dir_of(c)));
    std::string d = dir_of(c);
    interp_refs_[c] = {resolve(d, need_field(e, "source")[1].atom), resolve(d, need_field(e, "target")[1].atom)};
    return *interps_.emplace(c, std::move(h)).first->second;
  });
}

std::string Workspace::print_interpretation(const std::string& path) {
  std::string c = canonical_path(path);
  const auto& h = interpretation(c);
  const auto& refs = interp_refs_.at(c);
  std::vector<SExpr> forms{list({at("source"), at(refs.first)}), list({at("target"), at(refs.second)})};
  for (const auto& [s, ctx] : h.sorts) forms.push_back(list({at("sort"), at(s), to_sexpr(ctx)}));
  for (const auto& [f, im] : h.fns) {
    std::vector<SExpr> ts{at("terms")};
    for (const auto& t : im.terms) ts.push_back(to_sexpr(t));
    forms.push_back(list({at("fn"), at(f), to_sexpr(im.ctx), list(std::move(ts))}));
  }
  for (const auto& [r, im] : h.rels) forms.push_back(list({at("rel"), at(r), to_sexpr(im.ctx), to_sexpr(im.phi)}));
  return pretty_forms("interp " + h.name, forms);
}

ProofNode Workspace::proof(const std::string& path, const Theory& T) {
  std::string c = canonical_path(path);
  return in_file(c, [&] { return read_proof(load(c), T.sg, T.lang); });
}

std::string Workspace::path_of(const PropCategory* P) const {
  auto it = origin_.find(P);
  return it == origin_.end() ? "" : it->second;
}

std::string Workspace::path_of(const PropMorphism* F) const {
  auto it = origin_.find(F);
  return it == origin_.end() ? "" : it->second;
}

}  // namespace pcat
