#include "tjm/structures.hpp"

#include "tjm/linsolve.hpp"

namespace tjm {

TwistedContactData::TwistedContactData(Chart chart_, DiffForm theta_, DiffForm omega_)
    : chart(std::move(chart_)), theta(std::move(theta_)), omega(std::move(omega_)) {
  if (chart.dim() % 2 == 0) throw Error("twisted contact data needs an odd-dimensional chart");
  if (theta.degree() != 1) throw Error("theta must be a 1-form");
  if (omega.degree() != 2) throw Error("omega must be a 2-form");
  if (!theta.chart().compatible(chart) || !omega.chart().compatible(chart))
    throw ChartMismatchError("contact data on different charts");
}

TwistedLcsData::TwistedLcsData(Chart chart_, DiffForm big_theta_, DiffForm theta_,
                               DiffForm omega_)
    : chart(std::move(chart_)),
      big_theta(std::move(big_theta_)),
      theta(std::move(theta_)),
      omega(std::move(omega_)) {
  if (chart.dim() % 2 != 0) throw Error("twisted LCS data needs an even-dimensional chart");
  if (big_theta.degree() != 2) throw Error("big_theta must be a 2-form");
  if (theta.degree() != 1) throw Error("theta must be a 1-form");
  if (omega.degree() != 2) throw Error("omega must be a 2-form");
  if (!big_theta.chart().compatible(chart) || !theta.chart().compatible(chart) ||
      !omega.chart().compatible(chart))
    throw ChartMismatchError("LCS data on different charts");
}

namespace {

// Antisymmetric coefficient matrix B[a][j] = Theta(d_a, d_j) of a 2-form.
ExprMatrix form_matrix(const DiffForm& theta2) {
  const Chart& chart = theta2.chart();
  const int n = chart.dim();
  ExprMatrix b(static_cast<std::size_t>(n), ExprVector(static_cast<std::size_t>(n), chart.zero()));
  for (const auto& [idx, v] : theta2.coeffs()) {
    b[static_cast<std::size_t>(idx[0])][static_cast<std::size_t>(idx[1])] = v;
    b[static_cast<std::size_t>(idx[1])][static_cast<std::size_t>(idx[0])] = -v;
  }
  return b;
}

// Gate shared by both constructors.
void require_verified(const TwistedJacobiStructure& s, std::uint64_t seed, const char* what) {
  VerificationReport report = verify_structure(s, seed);
  if (!report.passed())
    throw ConstructionError(std::string(what) +
                            ": constructed tensors fail the defining identities\n" +
                            report.str());
}

}  // namespace

TwistedJacobiStructure from_twisted_contact(const TwistedContactData& data, std::uint64_t seed) {
  Chart chart = data.chart;
  const int n = chart.dim();
  const int half = (n - 1) / 2;

  const DiffForm theta_c = exterior_derivative(data.theta) + data.omega;

  // nondegeneracy: theta ^ (d theta + omega)^half is a nowhere-zero top form
  DiffForm top = wedge(data.theta, wedge_power(theta_c, half));
  IndexTuple all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  const ScalarExpr nondeg = top.coeff(all);
  if (is_zero(nondeg, seed).status != ZeroStatus::NonZero)
    throw DegeneracyError("theta ^ (d theta + omega)^n vanishes identically");
  chart.add_constraint(nondeg);

  // rows j: sum_a E^a Theta_c[a][j] = rhs_j, plus the row <theta, E> = rhs.
  const ExprMatrix b = form_matrix(theta_c);
  ExprMatrix a(static_cast<std::size_t>(n + 1), ExprVector(static_cast<std::size_t>(n), chart.zero()));
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m)
      a[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] =
          b[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
  for (int m = 0; m < n; ++m)
    a[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] = data.theta.coeff({m});

  ExprVector rhs_e(static_cast<std::size_t>(n + 1), chart.zero());
  rhs_e[static_cast<std::size_t>(n)] = chart.one();
  SolveOutcome e_sol = solve_unique(a, rhs_e, seed);
  if (!e_sol.ok)
    throw DegeneracyError("degenerate system for the Reeb-type field E: " + e_sol.failure);
  Multivector e(chart, 1);
  for (int m = 0; m < n; ++m) e.set({m}, e_sol.x[static_cast<std::size_t>(m)]);

  // Lambda^#(dx_k): i(v)Theta_c = -(dx_k - E^k theta), <theta, v> = 0.
  Multivector lambda(chart, 2);
  std::vector<ExprVector> vs;
  vs.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    ExprVector rhs(static_cast<std::size_t>(n + 1), chart.zero());
    const ScalarExpr ek = e.coeff({k});
    for (int j = 0; j < n; ++j) {
      ScalarExpr v = ek * data.theta.coeff({j});
      if (j == k) v -= chart.one();
      rhs[static_cast<std::size_t>(j)] = v;
    }
    SolveOutcome v_sol = solve_unique(a, rhs, seed);
    if (!v_sol.ok)
      throw DegeneracyError("degenerate system for Lambda^#(d" + chart.name(k) +
                            "): " + v_sol.failure);
    vs.push_back(v_sol.x);
  }
  for (int k = 0; k < n; ++k)
    for (int j = k + 1; j < n; ++j) {
      // Lambda^{kj} = <dx_j, Lambda^#(dx_k)>; antisymmetry is a consistency check
      const ScalarExpr& up = vs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      const ScalarExpr& dn = vs[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      if (is_zero(up + dn, seed).status == ZeroStatus::NonZero)
        throw ConstructionError("contact construction produced a non-antisymmetric Lambda");
      lambda.set({k, j}, up);
    }

  TwistedJacobiStructure s(chart, lambda, e, data.omega);
  require_verified(s, seed, "from_twisted_contact");
  return s;
}

TwistedJacobiStructure from_twisted_lcs(const TwistedLcsData& data, std::uint64_t seed) {
  Chart chart = data.chart;
  const int n = chart.dim();

  // theta must be closed
  const DiffForm dtheta = exterior_derivative(data.theta);
  for (const auto& [idx, v] : dtheta.coeffs())
    if (is_zero(v, seed).status == ZeroStatus::NonZero)
      throw ConstructionError("from_twisted_lcs: theta is not closed");

  // compatibility: d(Theta - w) + theta ^ (Theta - w) = 0
  const DiffForm phi = data.big_theta - data.omega;
  const DiffForm compat = exterior_derivative(phi) + wedge(data.theta, phi);
  for (const auto& [idx, v] : compat.coeffs())
    if (is_zero(v, seed).status == ZeroStatus::NonZero)
      throw ConstructionError(
          "from_twisted_lcs: d(Theta - omega) + theta ^ (Theta - omega) != 0");

  // nondegeneracy and inversion: Lambda-matrix = -B^{-1}
  const ExprMatrix b = form_matrix(data.big_theta);
  const ScalarExpr det = determinant(b);
  if (is_zero(det, seed).status != ZeroStatus::NonZero)
    throw DegeneracyError("big_theta is degenerate");
  chart.add_constraint(det);

  const ExprMatrix badj = adjugate(b);
  Multivector lambda(chart, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      lambda.set({i, j}, -badj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / det);

  Multivector e = sharp(lambda, data.theta);
  TwistedJacobiStructure s(chart, lambda, e, data.omega);
  require_verified(s, seed, "from_twisted_lcs");
  return s;
}

std::string_view to_string(ReductionKind k) {
  switch (k) {
    case ReductionKind::Poisson:
      return "Poisson";
    case ReductionKind::Jacobi:
      return "Jacobi";
    case ReductionKind::TwistedPoisson:
      return "TwistedPoisson";
    case ReductionKind::None:
      return "None";
  }
  return "?";
}

ReductionKind recognize_reduction(const TwistedJacobiStructure& s, std::uint64_t seed) {
  auto tensor_zero = [&](const auto& t) {
    for (const auto& [idx, v] : t.coeffs())
      if (is_zero(v, seed).status == ZeroStatus::NonZero) return false;
    return true;
  };
  const bool e_zero = tensor_zero(s.e_field);
  const bool omega_zero = tensor_zero(s.omega);
  if (e_zero && omega_zero) return ReductionKind::Poisson;
  if (e_zero) return ReductionKind::TwistedPoisson;
  if (omega_zero) return ReductionKind::Jacobi;
  return ReductionKind::None;
}

Multivector twisted_poisson_residual(const TwistedJacobiStructure& s) {
  return schouten(s.lambda, s.lambda) -
         Rational(2) * sharp_ext(s.lambda, exterior_derivative(s.omega));
}

}  // namespace tjm
