#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tjm/multivec.hpp"

namespace tjm {

// Chart + (Lambda, E, omega). Domain constraints live on the chart. A
// structure counts as verified only when verify_structure reports no NonZero
// residual; the constructors in structures.hpp enforce that before returning.
struct TwistedJacobiStructure {
  Chart chart;
  Multivector lambda;   // bivector
  Multivector e_field;  // vector field
  DiffForm omega;       // 2-form

  TwistedJacobiStructure(Chart chart_, Multivector lambda_, Multivector e_,
                         DiffForm omega_);
};

// Section of Λ^k(T*M x R) as (degree-k part, degree-(k-1) part).
struct FormPair {
  DiffForm eta;
  DiffForm xi;

  FormPair(DiffForm eta_, DiffForm xi_);
  int degree() const { return eta.degree(); }
};

// Section of TM x R.
struct SectionPair {
  Multivector vec;  // degree 1
  ScalarExpr fun;

  SectionPair(Multivector vec_, ScalarExpr fun_);
};

struct ResidualComponent {
  IndexTuple index;
  ScalarExpr value;
  ZeroCheck check;
};

struct IdentityReport {
  std::string name;
  // Canonically nonzero residual coefficients with their sampled status;
  // coefficients that cancel exactly are never materialized.
  std::vector<ResidualComponent> components;

  ZeroStatus aggregate() const;
};

struct VerificationReport {
  std::vector<IdentityReport> identities;

  bool passed() const;  // no NonZero anywhere
  ZeroStatus worst() const;
  std::string str() const;
};

// Builds the per-coefficient report for a residual tensor.
template <Variance V>
IdentityReport residual_report(std::string name, const AltTensor<V>& residual,
                               std::uint64_t seed = 0) {
  IdentityReport out{std::move(name), {}};
  for (const auto& [idx, v] : residual.coeffs())
    out.components.push_back(ResidualComponent{idx, v, is_zero(v, seed)});
  return out;
}

// Checks the two defining identities
//   R2: [L,L] + 2 E^L - 2 L#(dw) - 2 (L#w)^E = 0
//   R3: [E,L] - (L# (x) 1)(dw)(E) + ((L# (x) 1)(w)(E))^E = 0
// and reports residual coefficients with their zero status.
VerificationReport verify_structure(const TwistedJacobiStructure& s, std::uint64_t seed = 0);

// {f,g} = L(df,dg) + <f dg - g df, E>.
ScalarExpr bracket_fun(const TwistedJacobiStructure& s, const ScalarExpr& f,
                       const ScalarExpr& g);

// L#(df) + f E.
Multivector hamiltonian_vector(const TwistedJacobiStructure& s, const ScalarExpr& f);

// (L,E)#(a,f) = (L#a + f E, -<a,E>); requires degrees (1,0).
SectionPair pair_sharp(const TwistedJacobiStructure& s, const FormPair& p);

// (eta,xi)((X_1,g_1),...,(X_k,g_k))
//   = eta(X_1,...,X_k) + sum_i (-1)^(i+1) g_i xi(X_1,...,^X_i,...,X_k).
ScalarExpr pair_eval(const FormPair& p, std::span<const SectionPair> args);

struct JacobiatorResult {
  ScalarExpr lhs;
  ScalarExpr rhs;
  ZeroCheck residual;
};

// lhs = {f,{g,h}} + {g,{h,f}} + {h,{f,g}},
// rhs = (-1)^3 (dw,w)((L,E)#(df,f), (L,E)#(dg,g), (L,E)#(dh,h)).
JacobiatorResult jacobiator_check(const TwistedJacobiStructure& s, const ScalarExpr& f,
                                  const ScalarExpr& g, const ScalarExpr& h,
                                  std::uint64_t seed = 0);

// Cartan formula L_X beta = i(X) d(beta) + d(i(X) beta) for 1-forms.
DiffForm lie_derivative_form(const Multivector& x, const DiffForm& beta);

// The algebroid bracket {(a,f),(b,g)}^w: Kerbrat-Souici-Benhammadi base
// bracket plus the (dw,w) correction with the free slot expanded over the
// coordinate coframe and the unit section.
FormPair algebroid_bracket_omega(const TwistedJacobiStructure& s, const FormPair& a,
                                 const FormPair& b);

// pi((L,E)#(a,f)) = L#a + f E.
Multivector anchor(const TwistedJacobiStructure& s, const FormPair& a);

}  // namespace tjm
