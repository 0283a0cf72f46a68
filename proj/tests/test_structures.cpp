#include <doctest.h>

#include "tjm/structures.hpp"
#include "test_util.hpp"

using namespace tjm;

namespace {

Chart r3() { return Chart({"x", "y", "z"}); }

DiffForm contact_theta(const Chart& c) {
  DiffForm theta(c, 1);
  theta.set({2}, c.one());
  theta.set({0}, -c.coordinate(1));
  return theta;
}

}  // namespace

TEST_CASE("from_twisted_contact: standard contact form") {
  Chart c = r3();
  TwistedJacobiStructure s =
      from_twisted_contact(TwistedContactData(c, contact_theta(c), DiffForm(c, 2)));

  CHECK(s.e_field == coordinate_field(c, 2));
  CHECK(s.lambda.coeff({0, 1}) == c.one());
  CHECK(s.lambda.coeff({1, 2}) == -c.coordinate(1));
  CHECK(s.lambda.coeff({0, 2}).is_structural_zero());
  CHECK(verify_structure(s).worst() == ZeroStatus::ExactZero);
}

TEST_CASE("from_twisted_contact: omega = x dx^dy twists Lambda by 1/(1+x)") {
  Chart c = r3();
  DiffForm w(c, 2);
  w.set({0, 1}, c.coordinate(0));
  TwistedJacobiStructure s =
      from_twisted_contact(TwistedContactData(c, contact_theta(c), w));

  ScalarExpr d = c.one() + c.coordinate(0);
  CHECK(s.e_field == coordinate_field(c, 2));
  CHECK(s.lambda.coeff({0, 1}) == c.one() / d);
  CHECK(s.lambda.coeff({1, 2}) == -c.coordinate(1) / d);
  CHECK(s.lambda.coeff({0, 2}).is_structural_zero());
  CHECK(verify_structure(s).worst() == ZeroStatus::ExactZero);

  // the nondegeneracy coefficient 1+x landed on the chart
  bool found = false;
  for (const auto& constraint : c.constraints())
    if (constraint == d) found = true;
  CHECK(found);
}

TEST_CASE("from_twisted_contact: invariants of the construction") {
  Chart c = r3();
  DiffForm w(c, 2);
  w.set({0, 1}, c.coordinate(0));
  for (const DiffForm& omega : {DiffForm(c, 2), w}) {
    TwistedJacobiStructure s =
        from_twisted_contact(TwistedContactData(c, contact_theta(c), omega));
    const DiffForm theta = contact_theta(c);
    const DiffForm theta_c = exterior_derivative(theta) + omega;

    CHECK(sharp(s.lambda, theta).is_structural_zero());
    CHECK(pairing(theta, s.e_field) == c.one());
    CHECK(interior_product(s.e_field, theta_c).is_structural_zero());

    // proof identity: [L,L] = 2 L#(d Theta_c) - 2 E ^ L#(d theta)
    Multivector residual = schouten(s.lambda, s.lambda) -
                           Rational(2) * sharp_ext(s.lambda, exterior_derivative(theta_c)) +
                           Rational(2) * wedge(s.e_field,
                                               sharp_ext(s.lambda, exterior_derivative(theta)));
    CHECK(residual.is_structural_zero());
  }
}

TEST_CASE("from_twisted_contact: degenerate theta is rejected") {
  Chart c = r3();
  DiffForm dz(c, 1);
  dz.set({2}, c.one());
  CHECK_THROWS_AS(from_twisted_contact(TwistedContactData(c, dz, DiffForm(c, 2))),
                  DegeneracyError);
  CHECK_THROWS_AS(TwistedContactData(Chart({"x", "y"}), DiffForm(Chart({"x", "y"}), 1),
                                     DiffForm(Chart({"x", "y"}), 2)),
                  Error);  // even-dimensional chart
}

TEST_CASE("from_twisted_lcs: R^2 symplectic case") {
  Chart c = Chart({"x", "y"});
  DiffForm big = wedge(coordinate_form(c, 0), coordinate_form(c, 1));
  DiffForm theta(c, 1);
  theta.set({0}, c.one());
  TwistedJacobiStructure s = from_twisted_lcs(TwistedLcsData(c, big, theta, DiffForm(c, 2)));

  CHECK(s.lambda == wedge(coordinate_field(c, 0), coordinate_field(c, 1)));
  CHECK(s.e_field == coordinate_field(c, 1));
  CHECK(verify_structure(s).worst() == ZeroStatus::ExactZero);
  // Lambda = Lambda^#(Theta)
  CHECK(sharp_ext(s.lambda, big) == s.lambda);
}

TEST_CASE("from_twisted_lcs: exponential LCS structure on R^4") {
  Chart c = Chart({"x1", "y1", "x2", "y2"});
  ScalarExpr e = exp(-c.coordinate(0));
  DiffForm phi(c, 2);
  phi.set({0, 1}, e);
  phi.set({2, 3}, e);
  DiffForm w(c, 2);
  w.set({0, 2}, c.coordinate(2));  // polynomial omega, Theta stays nondegenerate
  DiffForm big = phi + w;
  DiffForm theta(c, 1);
  theta.set({0}, c.one());

  TwistedJacobiStructure s = from_twisted_lcs(TwistedLcsData(c, big, theta, w));
  CHECK(verify_structure(s).passed());
  CHECK(sharp_ext(s.lambda, big) == s.lambda);
  // E = Lambda^#(theta)
  CHECK(s.e_field == sharp(s.lambda, theta));
}

TEST_CASE("from_twisted_lcs: rejects a non-closed theta") {
  Chart c = Chart({"x", "y"});
  DiffForm big = wedge(coordinate_form(c, 0), coordinate_form(c, 1));
  DiffForm theta(c, 1);
  theta.set({0}, c.coordinate(1));  // y dx is not closed
  CHECK_THROWS_AS(from_twisted_lcs(TwistedLcsData(c, big, theta, DiffForm(c, 2))),
                  ConstructionError);
}

TEST_CASE("from_twisted_lcs: rejects a degenerate big_theta") {
  Chart c = Chart({"x", "y", "z", "w"});
  DiffForm big(c, 2);
  big.set({0, 1}, c.one());  // rank 2 < 4
  DiffForm theta(c, 1);
  CHECK_THROWS_AS(from_twisted_lcs(TwistedLcsData(c, big, theta, DiffForm(c, 2))),
                  DegeneracyError);
}

TEST_CASE("recognize_reduction") {
  Chart c = r3();
  Multivector dxdy = wedge(coordinate_field(c, 0), coordinate_field(c, 1));

  TwistedJacobiStructure poisson(c, dxdy, Multivector(c, 1), DiffForm(c, 2));
  CHECK(recognize_reduction(poisson) == ReductionKind::Poisson);

  TwistedJacobiStructure contact =
      from_twisted_contact(TwistedContactData(c, contact_theta(c), DiffForm(c, 2)));
  CHECK(recognize_reduction(contact) == ReductionKind::Jacobi);

  DiffForm w(c, 2);
  w.set({0, 1}, c.coordinate(0));
  TwistedJacobiStructure tp(c, dxdy, Multivector(c, 1), w);
  CHECK(recognize_reduction(tp) == ReductionKind::TwistedPoisson);
  // d(x dx^dy) = 0, so this instance really is twisted Poisson: R2 vanishes
  CHECK(verify_structure(tp).worst() == ZeroStatus::ExactZero);
  CHECK(twisted_poisson_residual(tp).is_structural_zero());

  DiffForm w2(c, 2);
  w2.set({0, 1}, c.coordinate(2));
  TwistedJacobiStructure none(c, dxdy, coordinate_field(c, 2), w2);
  CHECK(recognize_reduction(none) == ReductionKind::None);
}

TEST_CASE("twisted_poisson_residual matches the reported R2 when E = 0") {
  Chart c = r3();
  // deliberately non-verifying instance: nontrivial reduced residual
  Multivector a(c, 1);
  a.set({0}, c.one());
  a.set({2}, c.coordinate(1));
  Multivector lam = wedge(a, coordinate_field(c, 1));
  DiffForm w(c, 2);
  w.set({0, 1}, c.coordinate(2));
  TwistedJacobiStructure s(c, lam, Multivector(c, 1), w);

  VerificationReport r = verify_structure(s);
  Multivector reduced = twisted_poisson_residual(s);
  // rebuild the reported R2 from the report components
  Multivector reported(c, 3);
  for (const auto& comp : r.identities[0].components) reported.set(comp.index, comp.value);
  CHECK(reported == reduced);
  CHECK_FALSE(reduced.is_structural_zero());
}
