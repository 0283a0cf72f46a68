#include "tjm/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <utility>

namespace tjm {

Rational make_rational(long num, long den) {
  if (den == 0) throw DivisionByZeroError("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : Error(what + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}

namespace detail {

enum class FuncKind : std::uint8_t { Sin = 0, Cos = 1, Exp = 2 };

struct Atom {
  int coord = -1;  // >= 0: coordinate index; < 0: function atom
  FuncKind fn = FuncKind::Sin;
  RatFuncPtr arg;
};

struct Factor {
  Atom atom;
  int exp = 1;  // > 0
};

using Monomial = std::vector<Factor>;  // atoms strictly ascending

struct Term {
  Monomial mono;
  Rational coeff;
};

struct Poly {
  std::vector<Term> terms;  // ascending monomials, nonzero coeffs
  bool is_zero() const { return terms.empty(); }
};

struct RatFuncData {
  Poly num;
  Poly den;  // nonzero, monic leading coefficient
};

int cmp_ratfunc(const RatFuncData& a, const RatFuncData& b);

int cmp_atom(const Atom& a, const Atom& b) {
  const bool ac = a.coord >= 0, bc = b.coord >= 0;
  if (ac != bc) return ac ? -1 : 1;
  if (ac) return a.coord < b.coord ? -1 : (a.coord > b.coord ? 1 : 0);
  if (a.fn != b.fn) return a.fn < b.fn ? -1 : 1;
  return cmp_ratfunc(*a.arg, *b.arg);
}

// Lexicographic monomial order: at the smallest atom where the exponents
// differ, the larger exponent wins; an atom present beats an atom absent.
// This is a multiplicative monomial order with 1 as the least element.
int cmp_mono(const Monomial& a, const Monomial& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const int c = cmp_atom(a[i].atom, b[j].atom);
    if (c < 0) return 1;
    if (c > 0) return -1;
    if (a[i].exp != b[j].exp) return a[i].exp > b[j].exp ? 1 : -1;
    ++i;
    ++j;
  }
  if (i < a.size()) return 1;
  if (j < b.size()) return -1;
  return 0;
}

int cmp_rat(const Rational& a, const Rational& b) { return ::cmp(a, b); }

int cmp_poly(const Poly& a, const Poly& b) {
  const std::size_t n = std::min(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = cmp_mono(a.terms[i].mono, b.terms[i].mono);
    if (c != 0) return c;
    c = cmp_rat(a.terms[i].coeff, b.terms[i].coeff);
    if (c != 0) return c;
  }
  if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size() ? -1 : 1;
  return 0;
}

int cmp_ratfunc(const RatFuncData& a, const RatFuncData& b) {
  const int c = cmp_poly(a.num, b.num);
  if (c != 0) return c;
  return cmp_poly(a.den, b.den);
}

struct MonoLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return cmp_mono(a, b) < 0; }
};

Poly poly_const(const Rational& c) {
  Poly p;
  if (c != 0) p.terms.push_back(Term{{}, c});
  return p;
}

Poly poly_one() { return poly_const(Rational(1)); }

bool poly_is_constant(const Poly& p) {
  return p.terms.empty() || (p.terms.size() == 1 && p.terms[0].mono.empty());
}

Poly poly_from_map(std::map<Monomial, Rational, MonoLess>&& acc) {
  Poly p;
  p.terms.reserve(acc.size());
  for (auto& [mono, coeff] : acc)
    if (coeff != 0) p.terms.push_back(Term{mono, coeff});
  return p;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out;
  out.terms.reserve(a.terms.size() + b.terms.size());
  std::size_t i = 0, j = 0;
  while (i < a.terms.size() && j < b.terms.size()) {
    const int c = cmp_mono(a.terms[i].mono, b.terms[j].mono);
    if (c < 0) {
      out.terms.push_back(a.terms[i++]);
    } else if (c > 0) {
      out.terms.push_back(b.terms[j++]);
    } else {
      Rational s = a.terms[i].coeff + b.terms[j].coeff;
      if (s != 0) out.terms.push_back(Term{a.terms[i].mono, std::move(s)});
      ++i;
      ++j;
    }
  }
  for (; i < a.terms.size(); ++i) out.terms.push_back(a.terms[i]);
  for (; j < b.terms.size(); ++j) out.terms.push_back(b.terms[j]);
  return out;
}

Poly poly_neg(Poly p) {
  for (auto& t : p.terms) t.coeff = -t.coeff;
  return p;
}

Poly poly_sub(const Poly& a, const Poly& b) { return poly_add(a, poly_neg(b)); }

Poly poly_scale(Poly p, const Rational& c) {
  if (c == 0) return {};
  for (auto& t : p.terms) t.coeff *= c;
  return p;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const int c = cmp_atom(a[i].atom, b[j].atom);
    if (c < 0) {
      out.push_back(a[i++]);
    } else if (c > 0) {
      out.push_back(b[j++]);
    } else {
      out.push_back(Factor{a[i].atom, a[i].exp + b[j].exp});
      ++i;
      ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::map<Monomial, Rational, MonoLess> acc;
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) acc[mono_mul(ta.mono, tb.mono)] += ta.coeff * tb.coeff;
  return poly_from_map(std::move(acc));
}

Poly poly_pow(const Poly& a, int e) {
  assert(e >= 0);
  Poly out = poly_one();
  for (int i = 0; i < e; ++i) out = poly_mul(out, a);
  return out;
}

// nullopt when b's leading monomial does not divide a's.
std::optional<Monomial> mono_divide(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0;
  for (const auto& fb : b) {
    while (i < a.size() && cmp_atom(a[i].atom, fb.atom) < 0) out.push_back(a[i++]);
    if (i == a.size() || cmp_atom(a[i].atom, fb.atom) != 0 || a[i].exp < fb.exp)
      return std::nullopt;
    if (a[i].exp > fb.exp) out.push_back(Factor{a[i].atom, a[i].exp - fb.exp});
    ++i;
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  return out;
}

std::optional<Poly> poly_divide_exact(const Poly& num, const Poly& den) {
  if (den.is_zero()) return std::nullopt;
  Poly rem = num;
  std::map<Monomial, Rational, MonoLess> quot;
  const Term& dlead = den.terms.back();
  while (!rem.is_zero()) {
    const Term& rlead = rem.terms.back();
    auto qmono = mono_divide(rlead.mono, dlead.mono);
    if (!qmono) return std::nullopt;
    Rational qc = rlead.coeff / dlead.coeff;
    Poly qterm;
    qterm.terms.push_back(Term{*qmono, qc});
    quot[*qmono] += qc;
    rem = poly_sub(rem, poly_mul(qterm, den));
  }
  return poly_from_map(std::move(quot));
}

// Exponent profile common to every term of p (the largest monomial dividing p).
Monomial poly_mono_content(const Poly& p) {
  if (p.is_zero()) return {};
  Monomial g = p.terms[0].mono;
  for (std::size_t t = 1; t < p.terms.size() && !g.empty(); ++t) {
    const Monomial& m = p.terms[t].mono;
    Monomial next;
    std::size_t i = 0, j = 0;
    while (i < g.size() && j < m.size()) {
      const int c = cmp_atom(g[i].atom, m[j].atom);
      if (c < 0) {
        ++i;
      } else if (c > 0) {
        ++j;
      } else {
        next.push_back(Factor{g[i].atom, std::min(g[i].exp, m[j].exp)});
        ++i;
        ++j;
      }
    }
    g = std::move(next);
  }
  return g;
}

Monomial mono_min(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const int c = cmp_atom(a[i].atom, b[j].atom);
    if (c < 0) {
      ++i;
    } else if (c > 0) {
      ++j;
    } else {
      out.push_back(Factor{a[i].atom, std::min(a[i].exp, b[j].exp)});
      ++i;
      ++j;
    }
  }
  return out;
}

Poly poly_shift_down(const Poly& p, const Monomial& g) {
  if (g.empty()) return p;
  Poly out;
  out.terms.reserve(p.terms.size());
  for (const auto& t : p.terms) {
    auto m = mono_divide(t.mono, g);
    assert(m);
    out.terms.push_back(Term{std::move(*m), t.coeff});
  }
  return out;
}

RatFuncPtr share(RatFuncData d) { return std::make_shared<const RatFuncData>(std::move(d)); }

// Canonicalization of a fraction: strip the common monomial factor, attempt
// exact division in both directions, then make the denominator monic.
RatFuncPtr make_ratfunc(Poly num, Poly den) {
  if (den.is_zero()) throw DivisionByZeroError("division by zero expression");
  if (num.is_zero()) return share(RatFuncData{{}, poly_one()});
  const Monomial g = mono_min(poly_mono_content(num), poly_mono_content(den));
  if (!g.empty()) {
    num = poly_shift_down(num, g);
    den = poly_shift_down(den, g);
  }
  if (!poly_is_constant(den)) {
    if (auto q = poly_divide_exact(num, den)) {
      num = std::move(*q);
      den = poly_one();
    } else if (!poly_is_constant(num)) {
      if (auto q2 = poly_divide_exact(den, num)) {
        den = std::move(*q2);
        num = poly_one();
      }
    }
  }
  const Rational lc = den.terms.back().coeff;
  if (lc != 1) {
    const Rational inv = 1 / lc;
    num = poly_scale(std::move(num), inv);
    den = poly_scale(std::move(den), inv);
  }
  return share(RatFuncData{std::move(num), std::move(den)});
}

RatFuncPtr rf_const(const Rational& c) { return make_ratfunc(poly_const(c), poly_one()); }

RatFuncPtr rf_coord(int i) {
  Poly p;
  p.terms.push_back(Term{Monomial{Factor{Atom{i, FuncKind::Sin, nullptr}, 1}}, Rational(1)});
  return make_ratfunc(std::move(p), poly_one());
}

RatFuncPtr rf_add(const RatFuncData& a, const RatFuncData& b) {
  return make_ratfunc(poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den)),
                      poly_mul(a.den, b.den));
}

RatFuncPtr rf_neg(const RatFuncData& a) { return make_ratfunc(poly_neg(a.num), a.den); }

RatFuncPtr rf_sub(const RatFuncData& a, const RatFuncData& b) {
  return make_ratfunc(poly_sub(poly_mul(a.num, b.den), poly_mul(b.num, a.den)),
                      poly_mul(a.den, b.den));
}

RatFuncPtr rf_mul(const RatFuncData& a, const RatFuncData& b) {
  return make_ratfunc(poly_mul(a.num, b.num), poly_mul(a.den, b.den));
}

RatFuncPtr rf_div(const RatFuncData& a, const RatFuncData& b) {
  if (b.num.is_zero()) throw DivisionByZeroError("division by zero expression");
  return make_ratfunc(poly_mul(a.num, b.den), poly_mul(a.den, b.num));
}

RatFuncPtr rf_pow(const RatFuncData& a, int e) {
  if (e == 0) return rf_const(Rational(1));
  if (e > 0) return make_ratfunc(poly_pow(a.num, e), poly_pow(a.den, e));
  if (a.num.is_zero()) throw DivisionByZeroError("zero raised to a negative power");
  return make_ratfunc(poly_pow(a.den, -e), poly_pow(a.num, -e));
}

bool rf_is_zero(const RatFuncData& a) { return a.num.is_zero(); }

std::optional<Rational> rf_as_rational(const RatFuncData& a) {
  if (!poly_is_constant(a.num) || !poly_is_constant(a.den)) return std::nullopt;
  Rational n = a.num.is_zero() ? Rational(0) : a.num.terms[0].coeff;
  return n / a.den.terms[0].coeff;
}

RatFuncPtr rf_func(FuncKind fn, RatFuncPtr arg) {
  // Fold exactly-known values at 0.
  if (rf_is_zero(*arg)) {
    if (fn == FuncKind::Sin) return rf_const(Rational(0));
    return rf_const(Rational(1));  // cos(0) = exp(0) = 1
  }
  Poly p;
  p.terms.push_back(
      Term{Monomial{Factor{Atom{-1, fn, std::move(arg)}, 1}}, Rational(1)});
  return make_ratfunc(std::move(p), poly_one());
}

bool poly_has_transcendental(const Poly& p) {
  for (const auto& t : p.terms)
    for (const auto& f : t.mono)
      if (f.atom.coord < 0) return true;
  return false;
}

bool rf_has_transcendental(const RatFuncData& a) {
  return poly_has_transcendental(a.num) || poly_has_transcendental(a.den);
}

// ---- differentiation ----------------------------------------------------

RatFuncPtr rf_derivative(const RatFuncData& f, int coord);

// d(atom)/dx_coord as a rational function (1/0 for coordinates, chain rule
// for the function atoms).
RatFuncPtr atom_derivative(const Atom& a, int coord) {
  if (a.coord >= 0) return rf_const(Rational(a.coord == coord ? 1 : 0));
  RatFuncPtr du = rf_derivative(*a.arg, coord);
  if (rf_is_zero(*du)) return rf_const(Rational(0));
  RatFuncPtr outer;
  switch (a.fn) {
    case FuncKind::Sin:
      outer = rf_func(FuncKind::Cos, a.arg);
      break;
    case FuncKind::Cos:
      outer = rf_neg(*rf_func(FuncKind::Sin, a.arg));
      break;
    case FuncKind::Exp:
      outer = rf_func(FuncKind::Exp, a.arg);
      break;
  }
  return rf_mul(*outer, *du);
}

RatFuncPtr poly_derivative(const Poly& p, int coord) {
  RatFuncPtr acc = rf_const(Rational(0));
  for (const auto& t : p.terms) {
    for (std::size_t k = 0; k < t.mono.size(); ++k) {
      RatFuncPtr da = atom_derivative(t.mono[k].atom, coord);
      if (rf_is_zero(*da)) continue;
      Monomial rest;
      rest.reserve(t.mono.size());
      for (std::size_t j = 0; j < t.mono.size(); ++j) {
        int e = t.mono[j].exp - (j == k ? 1 : 0);
        if (e > 0) rest.push_back(Factor{t.mono[j].atom, e});
      }
      Poly part;
      part.terms.push_back(Term{std::move(rest), t.coeff * t.mono[k].exp});
      acc = rf_add(*acc, *rf_mul(RatFuncData{std::move(part), poly_one()}, *da));
    }
  }
  return acc;
}

RatFuncPtr rf_derivative(const RatFuncData& f, int coord) {
  RatFuncPtr dn = poly_derivative(f.num, coord);
  if (poly_is_constant(f.den)) {
    // den is monic constant 1 after canonicalization
    return dn;
  }
  RatFuncPtr dd = poly_derivative(f.den, coord);
  // (n/d)' = (n' d - n d') / d^2
  RatFuncData nd{f.num, poly_one()};
  RatFuncData dd_{f.den, poly_one()};
  RatFuncPtr left = rf_mul(*dn, dd_);
  RatFuncPtr right = rf_mul(nd, *dd);
  RatFuncPtr num = rf_sub(*left, *right);
  RatFuncPtr den2 = make_ratfunc(poly_mul(f.den, f.den), poly_one());
  return rf_div(*num, *den2);
}

// ---- evaluation ----------------------------------------------------------

double eval_poly_d(const Poly& p, std::span<const double> x);

double eval_atom_d(const Atom& a, std::span<const double> x) {
  if (a.coord >= 0) return x[static_cast<std::size_t>(a.coord)];
  const double num = eval_poly_d(a.arg->num, x);
  const double den = eval_poly_d(a.arg->den, x);
  if (den == 0.0) throw DivisionByZeroError("division by zero while evaluating");
  const double u = num / den;
  switch (a.fn) {
    case FuncKind::Sin:
      return std::sin(u);
    case FuncKind::Cos:
      return std::cos(u);
    case FuncKind::Exp:
      return std::exp(u);
  }
  return 0.0;
}

double eval_poly_d(const Poly& p, std::span<const double> x) {
  double acc = 0.0;
  for (const auto& t : p.terms) {
    double m = t.coeff.get_d();
    for (const auto& f : t.mono) m *= std::pow(eval_atom_d(f.atom, x), f.exp);
    acc += m;
  }
  return acc;
}

double rf_eval_d(const RatFuncData& f, std::span<const double> x) {
  const double num = eval_poly_d(f.num, x);
  const double den = eval_poly_d(f.den, x);
  if (den == 0.0) throw DivisionByZeroError("division by zero while evaluating");
  return num / den;
}

Rational eval_poly_q(const Poly& p, std::span<const Rational> x) {
  Rational acc(0);
  for (const auto& t : p.terms) {
    Rational m = t.coeff;
    for (const auto& f : t.mono) {
      if (f.atom.coord < 0) throw Error("exact evaluation of a sin/cos/exp expression");
      Rational base = x[static_cast<std::size_t>(f.atom.coord)];
      for (int e = 0; e < f.exp; ++e) m *= base;
    }
    acc += m;
  }
  return acc;
}

Rational rf_eval_q(const RatFuncData& f, std::span<const Rational> x) {
  const Rational num = eval_poly_q(f.num, x);
  const Rational den = eval_poly_q(f.den, x);
  if (den == 0) throw DivisionByZeroError("division by zero while evaluating");
  return num / den;
}

// ---- printing ------------------------------------------------------------

void print_ratfunc(std::ostream& os, const RatFuncData& f, const std::vector<std::string>& names);

void print_atom(std::ostream& os, const Atom& a, const std::vector<std::string>& names) {
  if (a.coord >= 0) {
    os << names[static_cast<std::size_t>(a.coord)];
    return;
  }
  switch (a.fn) {
    case FuncKind::Sin:
      os << "sin(";
      break;
    case FuncKind::Cos:
      os << "cos(";
      break;
    case FuncKind::Exp:
      os << "exp(";
      break;
  }
  print_ratfunc(os, *a.arg, names);
  os << ")";
}

void print_poly(std::ostream& os, const Poly& p, const std::vector<std::string>& names) {
  if (p.is_zero()) {
    os << "0";
    return;
  }
  // Print leading (largest) terms first. A negative leading coefficient is
  // printed explicitly ("-1*x^2"), because a bare "-x^2" would reparse as
  // (-x)^2 under the grammar's '-' base rule.
  for (std::size_t r = 0; r < p.terms.size(); ++r) {
    const Term& t = p.terms[p.terms.size() - 1 - r];
    Rational c = t.coeff;
    bool force_coeff = false;
    if (r == 0) {
      force_coeff = c < 0;
    } else {
      os << (c < 0 ? " - " : " + ");
      if (c < 0) c = -c;
    }
    const bool show_coeff = force_coeff || c != 1 || t.mono.empty();
    bool printed_any = false;
    if (show_coeff) {
      os << c.get_str();
      printed_any = true;
    }
    for (const auto& f : t.mono) {
      if (printed_any) os << "*";
      print_atom(os, f.atom, names);
      if (f.exp != 1) os << "^" << f.exp;
      printed_any = true;
    }
  }
}

void print_ratfunc(std::ostream& os, const RatFuncData& f,
                   const std::vector<std::string>& names) {
  if (poly_is_constant(f.den)) {
    print_poly(os, f.num, names);
    return;
  }
  os << "(";
  print_poly(os, f.num, names);
  os << ")/(";
  print_poly(os, f.den, names);
  os << ")";
}

}  // namespace detail

using namespace detail;

// ---- Chart ----------------------------------------------------------------

struct Chart::Impl {
  std::vector<std::string> names;
  std::vector<RatFuncPtr> constraints;
};

Chart::Chart(std::vector<std::string> names) : impl_(std::make_shared<Impl>()) {
  if (names.empty()) throw Error("chart needs at least one coordinate");
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) throw Error("duplicate coordinate name '" + names[i] + "'");
  impl_->names = std::move(names);
}

int Chart::dim() const { return static_cast<int>(impl_->names.size()); }

const std::vector<std::string>& Chart::names() const { return impl_->names; }

const std::string& Chart::name(int i) const { return impl_->names[static_cast<std::size_t>(i)]; }

std::optional<int> Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < impl_->names.size(); ++i)
    if (impl_->names[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

ScalarExpr Chart::coordinate(int i) const {
  if (i < 0 || i >= dim()) throw Error("coordinate index out of range");
  return ScalarExpr(*this, rf_coord(i));
}

ScalarExpr Chart::constant(const Rational& value) const { return ScalarExpr(*this, value); }

ScalarExpr Chart::constant(long num, long den) const {
  return ScalarExpr(*this, make_rational(num, den));
}

ScalarExpr Chart::zero() const { return constant(0); }
ScalarExpr Chart::one() const { return constant(1); }

void Chart::add_constraint(const ScalarExpr& nonzero) {
  if (!compatible(nonzero.chart())) throw ChartMismatchError("constraint is on another chart");
  if (nonzero.is_structural_zero()) throw Error("identically-zero domain constraint");
  if (nonzero.as_rational()) return;  // nonzero constants constrain nothing
  for (const auto& c : impl_->constraints)
    if (cmp_ratfunc(*c, *nonzero.rep_) == 0) return;
  impl_->constraints.push_back(nonzero.rep_);
}

std::vector<ScalarExpr> Chart::constraints() const {
  std::vector<ScalarExpr> out;
  out.reserve(impl_->constraints.size());
  for (const auto& c : impl_->constraints) out.push_back(ScalarExpr(*this, c));
  return out;
}

bool Chart::compatible(const Chart& other) const {
  return impl_ == other.impl_ || impl_->names == other.impl_->names;
}

// ---- Point ----------------------------------------------------------------

Point Point::rationals(std::vector<Rational> coords) {
  Point p;
  p.approx_.reserve(coords.size());
  for (const auto& c : coords) p.approx_.push_back(c.get_d());
  p.exact_ = std::move(coords);
  return p;
}

Point Point::doubles(std::vector<double> coords) {
  Point p;
  p.approx_ = std::move(coords);
  return p;
}

const std::vector<Rational>& Point::rational_coords() const {
  if (!exact_) throw Error("point has no exact coordinates");
  return *exact_;
}

std::string Point::str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < approx_.size(); ++i) {
    if (i) os << ", ";
    if (exact_)
      os << (*exact_)[i].get_str();
    else
      os << approx_[i];
  }
  os << ")";
  return os.str();
}

// ---- ScalarExpr -----------------------------------------------------------

ScalarExpr::ScalarExpr(const Chart& chart, const Rational& value)
    : chart_(chart), rep_(rf_const(value)) {}

ScalarExpr::ScalarExpr(Chart chart, RatFuncPtr rep) : chart_(std::move(chart)), rep_(std::move(rep)) {}

namespace {
void require_same_chart(const ScalarExpr& a, const ScalarExpr& b) {
  if (!a.chart().compatible(b.chart()))
    throw ChartMismatchError("expressions live on different charts");
}
}  // namespace

ScalarExpr ScalarExpr::operator-() const { return ScalarExpr(chart_, rf_neg(*rep_)); }

ScalarExpr ScalarExpr::operator+(const ScalarExpr& rhs) const {
  require_same_chart(*this, rhs);
  return ScalarExpr(chart_, rf_add(*rep_, *rhs.rep_));
}

ScalarExpr ScalarExpr::operator-(const ScalarExpr& rhs) const {
  require_same_chart(*this, rhs);
  return ScalarExpr(chart_, rf_sub(*rep_, *rhs.rep_));
}

ScalarExpr ScalarExpr::operator*(const ScalarExpr& rhs) const {
  require_same_chart(*this, rhs);
  return ScalarExpr(chart_, rf_mul(*rep_, *rhs.rep_));
}

ScalarExpr ScalarExpr::operator/(const ScalarExpr& rhs) const {
  require_same_chart(*this, rhs);
  return ScalarExpr(chart_, rf_div(*rep_, *rhs.rep_));
}

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& rhs) { return *this = *this + rhs; }
ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& rhs) { return *this = *this - rhs; }
ScalarExpr& ScalarExpr::operator*=(const ScalarExpr& rhs) { return *this = *this * rhs; }

ScalarExpr ScalarExpr::operator*(const Rational& c) const {
  return ScalarExpr(chart_, rf_mul(*rep_, *rf_const(c)));
}

ScalarExpr ScalarExpr::pow(int exponent) const { return ScalarExpr(chart_, rf_pow(*rep_, exponent)); }

ScalarExpr ScalarExpr::derivative(int i) const {
  if (i < 0 || i >= chart_.dim()) throw Error("derivative index out of range");
  return ScalarExpr(chart_, rf_derivative(*rep_, i));
}

bool ScalarExpr::is_structural_zero() const { return rf_is_zero(*rep_); }

bool ScalarExpr::is_one() const {
  auto r = rf_as_rational(*rep_);
  return r && *r == 1;
}

std::optional<Rational> ScalarExpr::as_rational() const { return rf_as_rational(*rep_); }

bool ScalarExpr::is_polynomial() const { return poly_is_constant(rep_->den); }

bool ScalarExpr::has_transcendental() const { return rf_has_transcendental(*rep_); }

ScalarExpr ScalarExpr::numerator() const {
  return ScalarExpr(chart_, share(RatFuncData{rep_->num, poly_one()}));
}

ScalarExpr ScalarExpr::denominator() const {
  return ScalarExpr(chart_, share(RatFuncData{rep_->den, poly_one()}));
}

std::string ScalarExpr::str() const {
  std::ostringstream os;
  print_ratfunc(os, *rep_, chart_.names());
  return os.str();
}

double ScalarExpr::eval(std::span<const double> coords) const {
  if (static_cast<int>(coords.size()) != chart_.dim())
    throw DomainError("point dimension does not match chart");
  return rf_eval_d(*rep_, coords);
}

Rational ScalarExpr::eval_rational(std::span<const Rational> coords) const {
  if (static_cast<int>(coords.size()) != chart_.dim())
    throw DomainError("point dimension does not match chart");
  return rf_eval_q(*rep_, coords);
}

bool ScalarExpr::operator==(const ScalarExpr& rhs) const {
  if (!chart_.compatible(rhs.chart_)) return false;
  // a/b == c/d  <=>  a*d - c*b == 0 as an expanded polynomial
  Poly lhs_p = poly_mul(rep_->num, rhs.rep_->den);
  Poly rhs_p = poly_mul(rhs.rep_->num, rep_->den);
  return poly_sub(lhs_p, rhs_p).is_zero();
}

int ScalarExpr::cmp(const ScalarExpr& rhs) const { return cmp_ratfunc(*rep_, *rhs.rep_); }

ScalarExpr sin(const ScalarExpr& e) { return ScalarExpr(e.chart_, rf_func(FuncKind::Sin, e.rep_)); }
ScalarExpr cos(const ScalarExpr& e) { return ScalarExpr(e.chart_, rf_func(FuncKind::Cos, e.rep_)); }
ScalarExpr exp(const ScalarExpr& e) { return ScalarExpr(e.chart_, rf_func(FuncKind::Exp, e.rep_)); }

std::optional<ScalarExpr> exact_divide(const ScalarExpr& a, const ScalarExpr& b) {
  if (!a.is_polynomial() || !b.is_polynomial()) return std::nullopt;
  if (b.is_structural_zero()) return std::nullopt;
  auto q = poly_divide_exact(a.rep_->num, b.rep_->num);
  if (!q) return std::nullopt;
  return ScalarExpr(a.chart_, share(RatFuncData{std::move(*q), poly_one()}));
}

// ---- parser ---------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Chart& chart) : s_(text), chart_(chart) {}

  ScalarExpr run() {
    ScalarExpr e = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool eat(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  ScalarExpr parse_expr() {
    ScalarExpr e = parse_term();
    for (;;) {
      if (eat('+'))
        e = e + parse_term();
      else if (eat('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  ScalarExpr parse_term() {
    ScalarExpr e = parse_factor();
    for (;;) {
      if (eat('*')) {
        e = e * parse_factor();
      } else if (eat('/')) {
        std::size_t at = pos_;
        ScalarExpr d = parse_factor();
        if (d.is_structural_zero()) throw ParseError("division by zero", at);
        e = e / d;
      } else {
        return e;
      }
    }
  }

  ScalarExpr parse_factor() {
    ScalarExpr b = parse_base();
    if (eat('^')) {
      skip_ws();
      bool neg = false;
      if (pos_ < s_.size() && s_[pos_] == '-') {
        neg = true;
        ++pos_;
      }
      std::size_t at = pos_;
      long v = parse_digits("exponent");
      if (v > 512) throw ParseError("exponent too large", at);
      if (neg && b.is_structural_zero()) throw ParseError("division by zero", at);
      return b.pow(static_cast<int>(neg ? -v : v));
    }
    return b;
  }

  ScalarExpr parse_base() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("expected expression", pos_);
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_rational();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    if (c == '(') {
      ++pos_;
      ScalarExpr e = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (c == '-') {
      ++pos_;
      return -parse_base();
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  long parse_digits(const char* what) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError(std::string("expected ") + what, pos_);
    long v = 0;
    for (std::size_t i = start; i < pos_; ++i) {
      v = v * 10 + (s_[i] - '0');
      if (v > 1000000000L) throw ParseError("integer literal too large", start);
    }
    return v;
  }

  ScalarExpr parse_rational() {
    skip_ws();
    std::size_t start = pos_;
    std::string digits;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      digits += s_[pos_++];
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      std::string frac;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        frac += s_[pos_++];
      }
      if (digits.empty() && frac.empty())
        throw ParseError("malformed decimal literal", start);
      // Exact conversion: d.f -> (d*10^k + f) / 10^k
      Rational value(digits.empty() ? "0" : digits);
      if (!frac.empty()) {
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
        value = value * scale + mpz_class(frac);
        value /= scale;
        value.canonicalize();
      }
      return chart_.constant(value);
    }
    if (digits.empty()) throw ParseError("malformed number", start);
    Rational value{mpz_class(digits)};
    // Greedy rational literal: integer '/' positive-integer.
    std::size_t save = pos_;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '/') {
      std::size_t slash = pos_;
      ++pos_;
      skip_ws();
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        std::size_t dstart = pos_;
        std::string den;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          den += s_[pos_++];
        }
        mpz_class d(den);
        if (d == 0) throw ParseError("zero denominator in rational literal", dstart);
        value /= Rational(d);
        value.canonicalize();
        return chart_.constant(value);
      }
      pos_ = slash;  // not a rational literal, leave '/' for the term level
      return chart_.constant(value);
    }
    pos_ = save;
    return chart_.constant(value);
  }

  ScalarExpr parse_identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name(s_.substr(start, pos_ - start));
    if (peek_is('(')) {
      if (name != "sin" && name != "cos" && name != "exp")
        throw ParseError("unknown function '" + name + "'", start);
      ++pos_;  // '('
      ScalarExpr arg = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      return exp(arg);
    }
    auto idx = chart_.index_of(name);
    if (!idx) throw ParseError("unknown identifier '" + name + "'", start);
    return chart_.coordinate(*idx);
  }

  std::string_view s_;
  const Chart& chart_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarExpr parse(std::string_view text, const Chart& chart) {
  return Parser(text, chart).run();
}

// ---- zero testing ---------------------------------------------------------

std::string_view to_string(ZeroStatus s) {
  switch (s) {
    case ZeroStatus::ExactZero:
      return "ExactZero";
    case ZeroStatus::ProbablyZero:
      return "ProbablyZero";
    case ZeroStatus::NonZero:
      return "NonZero";
  }
  return "?";
}

namespace {

Rational random_unit_rational(std::mt19937_64& rng) {
  const long den = static_cast<long>(rng() % 16) + 1;
  const long num = static_cast<long>(rng() % static_cast<unsigned long>(2 * den + 1)) - den;
  return make_rational(num, den);
}

bool constraints_hold(const std::vector<ScalarExpr>& constraints, const Point& p) {
  for (const auto& c : constraints) {
    double v;
    try {
      v = c.eval(p);
    } catch (const DivisionByZeroError&) {
      return false;
    }
    if (std::abs(v) <= kSingularityThreshold) return false;
  }
  return true;
}

}  // namespace

ZeroCheck is_zero(const ScalarExpr& e, std::uint64_t seed) {
  ZeroCheck out;
  if (e.is_structural_zero()) {
    out.status = ZeroStatus::ExactZero;
    out.exact_path = true;
    return out;
  }
  const bool transcendental = e.has_transcendental();
  const auto constraints = e.chart().constraints();
  const int dim = e.chart().dim();
  std::mt19937_64 rng(seed);

  // Exact-path fallback: a point with an exactly nonzero but tiny value.
  std::optional<Point> weak_witness;
  double weak_witness_value = 0.0;

  int accepted = 0;
  bool tried_origin = false;
  long scale = 1;  // widened after each exhausted batch of tries
  for (int budget = kZeroSampleCount * 64; accepted < kZeroSampleCount && budget > 0; --budget) {
    if (budget % (kZeroSampleCount * 16) == 0) scale *= 4;
    std::vector<Rational> coords(static_cast<std::size_t>(dim));
    if (!tried_origin) {
      tried_origin = true;  // coords stay zero
    } else {
      for (auto& c : coords) c = random_unit_rational(rng) * scale;
    }
    Point p = Point::rationals(std::move(coords));
    if (!constraints_hold(constraints, p)) continue;
    if (!transcendental) {
      Rational rv;
      try {
        rv = e.eval_rational(p.rational_coords());
      } catch (const DivisionByZeroError&) {
        continue;
      }
      ++accepted;
      if (rv != 0) {
        if (std::abs(rv.get_d()) > kZeroSampleTolerance) {
          out.status = ZeroStatus::NonZero;
          out.exact_path = true;
          out.witness = p;
          out.witness_value = rv.get_d();
          return out;
        }
        if (!weak_witness) {
          weak_witness = p;
          weak_witness_value = rv.get_d();
        }
      }
    } else {
      double v;
      try {
        v = e.eval(p);
      } catch (const DivisionByZeroError&) {
        continue;
      }
      ++accepted;
      if (std::abs(v) > kZeroSampleTolerance) {
        out.status = ZeroStatus::NonZero;
        out.witness = p;
        out.witness_value = v;
        return out;
      }
    }
  }

  if (accepted == 0) throw SamplingError("all sample points violate the domain constraints");

  if (!transcendental) {
    // Canonical expansion certifies nonzeroness even with no strong witness.
    out.status = ZeroStatus::NonZero;
    out.exact_path = true;
    if (weak_witness) {
      out.witness = *weak_witness;
      out.witness_value = weak_witness_value;
    }
    return out;
  }
  out.status = ZeroStatus::ProbablyZero;
  return out;
}

std::variant<Rational, double> evaluate(const ScalarExpr& e, const Point& p) {
  if (p.dim() != e.chart().dim()) throw DomainError("point dimension does not match chart");
  for (const auto& c : e.chart().constraints()) {
    double v = 0.0;
    try {
      v = c.eval(p);
    } catch (const DivisionByZeroError&) {
      // a constraint undefined at p counts as violated
    }
    if (std::abs(v) <= kSingularityThreshold)
      throw DomainError("domain constraint violated: " + c.str() + " = 0 at " + p.str());
  }
  if (p.exact() && !e.has_transcendental()) return e.eval_rational(p.rational_coords());
  return e.eval(p);
}

}  // namespace tjm
