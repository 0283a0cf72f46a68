#include <doctest.h>

#include <random>

#include "tjm/jacobi.hpp"
#include "test_util.hpp"

using namespace tjm;
using tjm_test::random_polynomial;

namespace {

Chart r3() { return Chart({"x", "y", "z"}); }

// Standard contact structure on R^3: L = (Dx + y Dz) ^ Dy, E = Dz, w = 0.
TwistedJacobiStructure contact_structure(const Chart& c) {
  Multivector a(c, 1);
  a.set({0}, c.one());
  a.set({2}, c.coordinate(1));
  Multivector lam = wedge(a, coordinate_field(c, 1));
  return TwistedJacobiStructure(c, lam, coordinate_field(c, 2), DiffForm(c, 2));
}

// Twisted contact structure for theta = dz - y dx, omega = x dx^dy:
// L = 1/(1+x) (Dx^Dy - y Dy^Dz), E = Dz (chart carries 1+x != 0).
TwistedJacobiStructure twisted_contact_structure(Chart c) {
  ScalarExpr d = c.one() + c.coordinate(0);
  c.add_constraint(d);
  Multivector lam(c, 2);
  lam.set({0, 1}, c.one() / d);
  lam.set({1, 2}, -c.coordinate(1) / d);
  DiffForm w(c, 2);
  w.set({0, 1}, c.coordinate(0));
  return TwistedJacobiStructure(c, lam, coordinate_field(c, 2), w);
}

FormPair exact_pair(const ScalarExpr& f) {
  return FormPair(differential(f), DiffForm::scalar(f));
}

}  // namespace

TEST_CASE("verify_structure: trivial and contact structures pass") {
  Chart c = r3();
  TwistedJacobiStructure only_e(c, Multivector(c, 2), coordinate_field(c, 2), DiffForm(c, 2));
  VerificationReport r1 = verify_structure(only_e);
  CHECK(r1.passed());
  CHECK(r1.worst() == ZeroStatus::ExactZero);

  VerificationReport r2 = verify_structure(contact_structure(c));
  CHECK(r2.passed());
  CHECK(r2.worst() == ZeroStatus::ExactZero);
  CHECK(r2.identities.size() == 2);
  CHECK(r2.identities[0].components.empty());
  CHECK(r2.identities[1].components.empty());
}

TEST_CASE("verify_structure: twisted contact with omega = x dx^dy passes exactly") {
  Chart c = r3();
  VerificationReport r = verify_structure(twisted_contact_structure(c));
  CHECK(r.passed());
  CHECK(r.worst() == ZeroStatus::ExactZero);
}

TEST_CASE("verify_structure: non-structure yields a NonZero witness") {
  Chart c = r3();
  Multivector lam = wedge(coordinate_field(c, 0), coordinate_field(c, 1));
  TwistedJacobiStructure bad(c, lam, coordinate_field(c, 2), DiffForm(c, 2));
  VerificationReport r = verify_structure(bad);
  CHECK_FALSE(r.passed());
  // R2 = 2 E^L = 2 Dx^Dy^Dz
  REQUIRE(r.identities[0].components.size() == 1);
  const ResidualComponent& comp = r.identities[0].components[0];
  CHECK(comp.index == IndexTuple{0, 1, 2});
  CHECK(comp.value == c.constant(2));
  CHECK(comp.check.status == ZeroStatus::NonZero);
  REQUIRE(comp.check.witness.has_value());
  CHECK(comp.check.witness_value == doctest::Approx(2.0));
}

TEST_CASE("bracket_fun on the contact structure") {
  Chart c = r3();
  TwistedJacobiStructure s = contact_structure(c);
  ScalarExpr x = c.coordinate(0), y = c.coordinate(1), z = c.coordinate(2);
  CHECK(bracket_fun(s, x, y) == c.one());
  CHECK(bracket_fun(s, x, z) == x);
  CHECK(bracket_fun(s, y, z).is_structural_zero());  // L-part -y cancels the E-part +y
  // antisymmetry and {f,f} = 0
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    ScalarExpr f = random_polynomial(c, rng), g = random_polynomial(c, rng);
    CHECK(is_zero(bracket_fun(s, f, g) + bracket_fun(s, g, f)).status == ZeroStatus::ExactZero);
    CHECK(bracket_fun(s, f, f).is_structural_zero());
  }
}

TEST_CASE("hamiltonian_vector") {
  Chart c = r3();
  TwistedJacobiStructure s = contact_structure(c);
  CHECK(hamiltonian_vector(s, c.one()) == coordinate_field(c, 2));
  // f = x: Dy + x Dz
  Multivector hx = hamiltonian_vector(s, c.coordinate(0));
  CHECK(hx.coeff({1}) == c.one());
  CHECK(hx.coeff({2}) == c.coordinate(0));
  CHECK(hx.coeffs().size() == 2);
  CHECK(hamiltonian_vector(s, c.zero()).is_structural_zero());
}

TEST_CASE("pair_sharp and anchor") {
  Chart c = r3();
  TwistedJacobiStructure s = contact_structure(c);
  DiffForm dx = coordinate_form(c, 0);

  SectionPair p1 = pair_sharp(s, FormPair(dx, DiffForm::scalar(c.zero())));
  CHECK(p1.vec == coordinate_field(c, 1));
  CHECK(p1.fun.is_structural_zero());

  SectionPair p2 = pair_sharp(s, FormPair(DiffForm(c, 1), DiffForm::scalar(c.one())));
  CHECK(p2.vec == s.e_field);
  CHECK(p2.fun.is_structural_zero());

  DiffForm theta(c, 1);
  theta.set({2}, c.one());
  theta.set({0}, -c.coordinate(1));
  SectionPair p3 = pair_sharp(s, FormPair(theta, DiffForm::scalar(c.zero())));
  CHECK(p3.vec.is_structural_zero());
  CHECK(p3.fun == -c.one());

  CHECK(anchor(s, exact_pair(c.coordinate(0))) == hamiltonian_vector(s, c.coordinate(0)));
  CHECK(anchor(s, FormPair(DiffForm(c, 1), DiffForm::scalar(c.one()))) == s.e_field);
}

TEST_CASE("pair_eval identities") {
  Chart c = r3();
  std::mt19937_64 rng(5);
  // k=1: (a,f)((X,g)) = a(X) + g f
  DiffForm alpha(c, 1);
  alpha.set({0}, random_polynomial(c, rng));
  alpha.set({2}, random_polynomial(c, rng));
  ScalarExpr f = random_polynomial(c, rng);
  Multivector x(c, 1);
  x.set({1}, random_polynomial(c, rng));
  x.set({2}, random_polynomial(c, rng));
  ScalarExpr g = random_polynomial(c, rng);
  std::vector<SectionPair> args1 = {SectionPair(x, g)};
  CHECK(pair_eval(FormPair(alpha, DiffForm::scalar(f)), args1) == pairing(alpha, x) + g * f);

  // k=2 with xi = 0 reduces to eta(X1,X2)
  DiffForm eta = wedge(coordinate_form(c, 0), coordinate_form(c, 1));
  Multivector y(c, 1);
  y.set({0}, random_polynomial(c, rng));
  std::vector<SectionPair> args2 = {SectionPair(x, g), SectionPair(y, c.zero())};
  std::vector<Multivector> fields = {x, y};
  CHECK(pair_eval(FormPair(eta, DiffForm(c, 1)), args2) == eval_on_vectors(eta, fields));

  // k=2 sign bookkeeping: (eta,xi)((X,1),(Y,0)) = eta(X,Y) + xi(Y)
  DiffForm xi(c, 1);
  xi.set({1}, random_polynomial(c, rng));
  std::vector<SectionPair> args3 = {SectionPair(x, c.one()), SectionPair(y, c.zero())};
  std::vector<Multivector> just_y = {y};
  CHECK(pair_eval(FormPair(eta, xi), args3) ==
        eval_on_vectors(eta, fields) + eval_on_vectors(xi, just_y));
}

TEST_CASE("jacobiator: ordinary Jacobi identity when omega = 0") {
  Chart c = r3();
  TwistedJacobiStructure s = contact_structure(c);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10; ++i) {
    ScalarExpr f = random_polynomial(c, rng);
    ScalarExpr g = random_polynomial(c, rng);
    ScalarExpr h = random_polynomial(c, rng);
    JacobiatorResult r = jacobiator_check(s, f, g, h);
    CHECK(r.rhs.is_structural_zero());
    CHECK(r.residual.status == ZeroStatus::ExactZero);
  }
}

TEST_CASE("jacobiator: twisted contact defect identity") {
  Chart c = r3();
  TwistedJacobiStructure s = twisted_contact_structure(c);
  JacobiatorResult r =
      jacobiator_check(s, c.coordinate(0), c.coordinate(1), c.coordinate(2));
  CHECK(r.residual.status == ZeroStatus::ExactZero);
  // constant f: identity still holds
  std::mt19937_64 rng(11);
  JacobiatorResult r2 = jacobiator_check(s, c.one(), random_polynomial(c, rng),
                                         random_polynomial(c, rng));
  CHECK(r2.residual.status == ZeroStatus::ExactZero);
  for (int i = 0; i < 5; ++i) {
    JacobiatorResult rr = jacobiator_check(s, random_polynomial(c, rng),
                                           random_polynomial(c, rng),
                                           random_polynomial(c, rng));
    CHECK(rr.residual.status == ZeroStatus::ExactZero);
  }
}

TEST_CASE("algebroid bracket: exact pairs, antisymmetry, degenerate structure") {
  Chart c = r3();
  TwistedJacobiStructure s = contact_structure(c);
  std::mt19937_64 rng(13);

  // with omega = 0: {(df,f),(dg,g)} = (d{f,g}, {f,g})
  for (int i = 0; i < 5; ++i) {
    ScalarExpr f = random_polynomial(c, rng);
    ScalarExpr g = random_polynomial(c, rng);
    FormPair out = algebroid_bracket_omega(s, exact_pair(f), exact_pair(g));
    ScalarExpr fg = bracket_fun(s, f, g);
    CHECK(out.eta == differential(fg));
    CHECK(out.xi.scalar_value() == fg);
  }

  // a = b: antisymmetry makes the bracket vanish
  DiffForm alpha(c, 1);
  alpha.set({0}, random_polynomial(c, rng));
  alpha.set({1}, random_polynomial(c, rng));
  FormPair a(alpha, DiffForm::scalar(random_polynomial(c, rng)));
  FormPair self = algebroid_bracket_omega(s, a, a);
  CHECK(self.eta.is_structural_zero());
  CHECK(self.xi.scalar_value().is_structural_zero());

  // Lambda = 0, E = 0: bracket identically zero
  TwistedJacobiStructure trivial(c, Multivector(c, 2), Multivector(c, 1), DiffForm(c, 2));
  DiffForm beta(c, 1);
  beta.set({1}, random_polynomial(c, rng));
  FormPair b(beta, DiffForm::scalar(random_polynomial(c, rng)));
  FormPair z = algebroid_bracket_omega(trivial, a, b);
  CHECK(z.eta.is_structural_zero());
  CHECK(z.xi.scalar_value().is_structural_zero());
}

TEST_CASE("property: anchor is a bracket homomorphism") {
  Chart c = r3();
  std::mt19937_64 rng(17);
  for (const bool twisted : {false, true}) {
    TwistedJacobiStructure s = twisted ? twisted_contact_structure(c) : contact_structure(c);
    for (int i = 0; i < 4; ++i) {
      DiffForm alpha(c, 1), beta(c, 1);
      alpha.set({0}, random_polynomial(c, rng, 1, 2));
      alpha.set({2}, random_polynomial(c, rng, 1, 2));
      beta.set({1}, random_polynomial(c, rng, 1, 2));
      beta.set({2}, random_polynomial(c, rng, 1, 2));
      FormPair a(alpha, DiffForm::scalar(random_polynomial(c, rng, 1, 2)));
      FormPair b(beta, DiffForm::scalar(random_polynomial(c, rng, 1, 2)));
      Multivector lhs = anchor(s, algebroid_bracket_omega(s, a, b));
      Multivector rhs = lie_derivative(anchor(s, a), anchor(s, b));
      Multivector diff = lhs - rhs;
      for (const auto& [idx, v] : diff.coeffs())
        CHECK(is_zero(v).status == ZeroStatus::ExactZero);
      CHECK(diff.is_structural_zero());
    }
  }
}

TEST_CASE("property: algebroid Leibniz rule") {
  Chart c = r3();
  TwistedJacobiStructure s = twisted_contact_structure(c);
  std::mt19937_64 rng(19);
  for (int i = 0; i < 4; ++i) {
    DiffForm alpha(c, 1), beta(c, 1);
    alpha.set({0}, random_polynomial(c, rng, 1, 2));
    beta.set({1}, random_polynomial(c, rng, 1, 2));
    beta.set({2}, random_polynomial(c, rng, 1, 2));
    FormPair a(alpha, DiffForm::scalar(random_polynomial(c, rng, 1, 2)));
    FormPair b(beta, DiffForm::scalar(random_polynomial(c, rng, 1, 2)));
    ScalarExpr phi = random_polynomial(c, rng, 1, 2);

    FormPair phib(phi * b.eta, DiffForm::scalar(phi * b.xi.scalar_value()));
    FormPair lhs = algebroid_bracket_omega(s, a, phib);
    FormPair base = algebroid_bracket_omega(s, a, b);
    ScalarExpr dphi = apply_vector(anchor(s, a), phi);
    DiffForm rhs_eta = phi * base.eta + dphi * b.eta;
    ScalarExpr rhs_xi = phi * base.xi.scalar_value() + dphi * b.xi.scalar_value();
    CHECK(lhs.eta == rhs_eta);
    CHECK(lhs.xi.scalar_value() == rhs_xi);
  }
}

TEST_CASE("property: algebroid Jacobi identity holds numerically") {
  Chart c = r3();
  TwistedJacobiStructure s = twisted_contact_structure(c);
  std::mt19937_64 rng(23);
  DiffForm alpha(c, 1), beta(c, 1), gamma(c, 1);
  alpha.set({0}, random_polynomial(c, rng, 1, 1));
  beta.set({1}, random_polynomial(c, rng, 1, 1));
  gamma.set({2}, random_polynomial(c, rng, 1, 1));
  FormPair a(alpha, DiffForm::scalar(random_polynomial(c, rng, 1, 1)));
  FormPair b(beta, DiffForm::scalar(random_polynomial(c, rng, 1, 1)));
  FormPair g(gamma, DiffForm::scalar(random_polynomial(c, rng, 1, 1)));

  auto br = [&](const FormPair& u, const FormPair& v) {
    return algebroid_bracket_omega(s, u, v);
  };
  FormPair t1 = br(a, br(b, g));
  FormPair t2 = br(b, br(g, a));
  FormPair t3 = br(g, br(a, b));
  DiffForm eta_sum = t1.eta + t2.eta + t3.eta;
  ScalarExpr xi_sum =
      t1.xi.scalar_value() + t2.xi.scalar_value() + t3.xi.scalar_value();

  for (int k = 0; k < 20; ++k) {
    std::vector<double> p = tjm_test::random_point(rng, 3, 0.5);
    for (const auto& [idx, v] : eta_sum.coeffs()) CHECK(std::abs(v.eval(p)) <= 1e-8);
    CHECK(std::abs(xi_sum.eval(p)) <= 1e-8);
  }
}
