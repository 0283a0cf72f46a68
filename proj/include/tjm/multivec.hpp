#pragma once

#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tjm/expr.hpp"

namespace tjm {

using IndexTuple = std::vector<int>;

// Sorts `t` in place, returning the permutation sign (+1/-1), or 0 when an
// index repeats.
int sort_index_tuple(IndexTuple& t);

// Degree-k antisymmetric tensor field with ScalarExpr coefficients indexed by
// strictly increasing tuples (absent tuple = zero). Degree 0 is a scalar with
// the empty tuple as its only key. The variance tag distinguishes multivector
// fields from differential forms at compile time.
enum class Variance { Contravariant, Covariant };

template <Variance V>
class AltTensor {
 public:
  AltTensor(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
    if (degree_ < 0) throw Error("negative tensor degree");
  }

  static AltTensor scalar(const ScalarExpr& f) {
    AltTensor t(f.chart(), 0);
    t.set({}, f);
    return t;
  }

  const Chart& chart() const { return chart_; }
  int degree() const { return degree_; }

  // idx must be strictly increasing and in range; zero values erase the entry.
  void set(const IndexTuple& idx, ScalarExpr value) {
    validate_increasing(idx);
    if (value.is_structural_zero())
      coeffs_.erase(idx);
    else
      coeffs_.insert_or_assign(idx, std::move(value));
  }

  // Accumulates value on an arbitrarily ordered tuple, applying the
  // permutation sign; repeated indices contribute nothing.
  void add_signed(IndexTuple idx, const ScalarExpr& value) {
    if (static_cast<int>(idx.size()) != degree_) throw Error("tuple arity != degree");
    const int sign = sort_index_tuple(idx);
    if (sign == 0 || value.is_structural_zero()) return;
    check_range(idx);
    auto it = coeffs_.find(idx);
    ScalarExpr v = sign > 0 ? value : -value;
    if (it == coeffs_.end())
      coeffs_.emplace(std::move(idx), std::move(v));
    else {
      it->second += v;
      if (it->second.is_structural_zero()) coeffs_.erase(it);
    }
  }

  ScalarExpr coeff(const IndexTuple& idx) const {
    validate_increasing(idx);
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? chart_.zero() : it->second;
  }

  // Coefficient on an arbitrarily ordered tuple with the permutation sign.
  ScalarExpr coeff_signed(IndexTuple idx) const {
    const int sign = sort_index_tuple(idx);
    if (sign == 0) return chart_.zero();
    auto it = coeffs_.find(idx);
    if (it == coeffs_.end()) return chart_.zero();
    return sign > 0 ? it->second : -it->second;
  }

  const std::map<IndexTuple, ScalarExpr>& coeffs() const { return coeffs_; }

  ScalarExpr scalar_value() const {
    if (degree_ != 0) throw Error("scalar_value on tensor of degree > 0");
    return coeff({});
  }

  bool is_structural_zero() const { return coeffs_.empty(); }

  AltTensor operator+(const AltTensor& rhs) const {
    require_match(rhs);
    AltTensor out = *this;
    for (const auto& [idx, v] : rhs.coeffs_) out.set(idx, out.coeff(idx) + v);
    return out;
  }

  AltTensor operator-(const AltTensor& rhs) const {
    require_match(rhs);
    AltTensor out = *this;
    for (const auto& [idx, v] : rhs.coeffs_) out.set(idx, out.coeff(idx) - v);
    return out;
  }

  AltTensor operator-() const {
    AltTensor out(chart_, degree_);
    for (const auto& [idx, v] : coeffs_) out.coeffs_.emplace(idx, -v);
    return out;
  }

  friend AltTensor operator*(const ScalarExpr& f, const AltTensor& t) {
    AltTensor out(t.chart_, t.degree_);
    if (f.is_structural_zero()) return out;
    for (const auto& [idx, v] : t.coeffs_) out.set(idx, f * v);
    return out;
  }

  friend AltTensor operator*(const Rational& c, const AltTensor& t) {
    return t.chart_.constant(c) * t;
  }

  bool operator==(const AltTensor& rhs) const {
    if (!chart_.compatible(rhs.chart_) || degree_ != rhs.degree_) return false;
    return (*this - rhs).is_structural_zero();
  }
  bool operator!=(const AltTensor& rhs) const { return !(*this == rhs); }

  std::string str() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [idx, v] : coeffs_) {
      std::string cs = v.str();
      const std::string ns = (-v).str();
      const bool neg = ns.size() < cs.size();  // "-1*y" prints nicer as "- y"
      if (neg) cs = ns;
      os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
      first = false;
      if (idx.empty()) {
        os << cs;
        continue;
      }
      if (cs != "1") {
        const bool needs_parens = cs.find(' ') != std::string::npos;
        os << (needs_parens ? "(" + cs + ")" : cs) << "*";
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k) os << "^";
        os << basis_symbol() << chart_.name(idx[k]);
      }
    }
    return os.str();
  }

 private:
  static const char* basis_symbol() { return V == Variance::Covariant ? "d" : "D"; }

  void require_match(const AltTensor& rhs) const {
    if (!chart_.compatible(rhs.chart_)) throw ChartMismatchError("tensors on different charts");
    if (degree_ != rhs.degree_) throw Error("tensor degree mismatch");
  }

  void check_range(const IndexTuple& idx) const {
    for (int i : idx)
      if (i < 0 || i >= chart_.dim()) throw Error("tensor index out of range");
  }

  void validate_increasing(const IndexTuple& idx) const {
    if (static_cast<int>(idx.size()) != degree_) throw Error("tuple arity != degree");
    check_range(idx);
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (idx[k - 1] >= idx[k]) throw Error("tensor indices not strictly increasing");
  }

  Chart chart_;
  int degree_;
  std::map<IndexTuple, ScalarExpr> coeffs_;
};

using Multivector = AltTensor<Variance::Contravariant>;
using DiffForm = AltTensor<Variance::Covariant>;

// Section of (Λ^p TM) ⊗ T*M: antisymmetric in the contravariant slots only.
struct MixedContraction {
  Chart chart;
  int p;  // contravariant degree
  std::map<std::pair<IndexTuple, int>, ScalarExpr> coeffs;

  // Contraction with a vector field over the covariant slot.
  Multivector contract(const Multivector& x) const;
};

// Graded-commutative exterior product.
template <Variance V>
AltTensor<V> wedge(const AltTensor<V>& a, const AltTensor<V>& b) {
  if (!a.chart().compatible(b.chart())) throw ChartMismatchError("wedge across charts");
  AltTensor<V> out(a.chart(), a.degree() + b.degree());
  if (out.degree() > a.chart().dim()) return out;
  for (const auto& [ia, va] : a.coeffs())
    for (const auto& [ib, vb] : b.coeffs()) {
      IndexTuple merged;
      merged.reserve(ia.size() + ib.size());
      merged.insert(merged.end(), ia.begin(), ia.end());
      merged.insert(merged.end(), ib.begin(), ib.end());
      out.add_signed(std::move(merged), va * vb);
    }
  return out;
}

// n-fold wedge power (n >= 0; n == 0 yields the scalar 1).
template <Variance V>
AltTensor<V> wedge_power(const AltTensor<V>& a, int n) {
  AltTensor<V> out = AltTensor<V>::scalar(a.chart().one());
  for (int i = 0; i < n; ++i) out = wedge(out, a);
  return out;
}

DiffForm exterior_derivative(const DiffForm& eta);

// i(X)eta for a vector field X (degree-1 multivector).
DiffForm interior_product(const Multivector& x, const DiffForm& eta);

// <alpha, X> for a 1-form and a vector field.
ScalarExpr pairing(const DiffForm& alpha, const Multivector& x);

// eta(V_1, ..., V_k): determinant expansion over basis index tuples.
ScalarExpr eval_on_vectors(const DiffForm& eta, std::span<const Multivector> fields);

// P(alpha_1, ..., alpha_k), same expansion on the other side.
ScalarExpr eval_on_forms(const Multivector& p, std::span<const DiffForm> forms);

// X(f): directional derivative of a scalar along a vector field.
ScalarExpr apply_vector(const Multivector& x, const ScalarExpr& f);

// Schouten-Nijenhuis bracket, degree p+q-1, computed by Leibniz recursion on
// coefficient-times-coordinate-basis terms. Sign convention: [X,Y] is the Lie
// bracket, [X,f] = X(f), [P,Q^R] = [P,Q]^R + (-1)^((p-1)q) Q^[P,R], and
// [P,Q] = -(-1)^((p-1)(q-1)) [Q,P]; this makes [L,L](df,dg,dh) the doubled
// cyclic Jacobiator of {f,g} = L(df,dg).
Multivector schouten(const Multivector& p, const Multivector& q);

// L_X P = [X, P] for a vector field X.
Multivector lie_derivative(const Multivector& x, const Multivector& p);

// Lambda^#(alpha): <beta, sharp(L,alpha)> = L(alpha,beta).
Multivector sharp(const Multivector& lambda, const DiffForm& alpha);

// Extension of Lambda^# to k-forms: (-1)^k eta(L#a_1, ..., L#a_k).
Multivector sharp_ext(const Multivector& lambda, const DiffForm& eta);

// (Lambda^# (x) 1)(eta) as a section of (Λ^(k-1) TM) ⊗ T*M.
MixedContraction sharp_tensor_one_section(const Multivector& lambda, const DiffForm& eta);

// ((Lambda^# (x) 1)(eta))(X): the degree-(k-1) multivector
// (a_1,...,a_{k-1}) -> (-1)^k eta(L#a_1, ..., L#a_{k-1}, X).
Multivector sharp_tensor_one(const Multivector& lambda, const DiffForm& eta,
                             const Multivector& x);

Multivector coordinate_field(const Chart& chart, int i);
DiffForm coordinate_form(const Chart& chart, int i);

// df as a 1-form.
DiffForm differential(const ScalarExpr& f);

}  // namespace tjm
