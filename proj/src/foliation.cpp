#include "tjm/foliation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "tjm/linsolve.hpp"

namespace tjm {

DistributionGenerators generators(const TwistedJacobiStructure& s) {
  DistributionGenerators out;
  const int n = s.chart.dim();
  out.fields.reserve(static_cast<std::size_t>(n + 1));
  for (int i = 0; i < n; ++i) out.fields.push_back(sharp(s.lambda, coordinate_form(s.chart, i)));
  out.fields.push_back(s.e_field);
  return out;
}

namespace {

void require_in_domain(const Chart& chart, const Point& p) {
  if (p.dim() != chart.dim()) throw DomainError("point dimension does not match chart");
  for (const auto& c : chart.constraints()) {
    double v = 0.0;
    try {
      v = c.eval(p);
    } catch (const DivisionByZeroError&) {
    }
    if (std::abs(v) <= kSingularityThreshold)
      throw DomainError("domain constraint violated: " + c.str() + " = 0 at " + p.str());
  }
}

bool point_in_domain(const Chart& chart, const std::vector<double>& x) {
  for (const auto& c : chart.constraints()) {
    double v = 0.0;
    try {
      v = c.eval(x);
    } catch (const DivisionByZeroError&) {
      return false;
    }
    if (std::abs(v) <= kSingularityThreshold) return false;
  }
  return true;
}

int numeric_rank(std::vector<std::vector<double>> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size(), cols = m[0].size();
  double max_entry = 0.0;
  for (const auto& row : m)
    for (double v : row) max_entry = std::max(max_entry, std::abs(v));
  if (max_entry == 0.0) return 0;
  const double tol = kRankPivotTolerance * max_entry;

  int rank = 0;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t best = row;
    for (std::size_t i = row + 1; i < rows; ++i)
      if (std::abs(m[i][col]) > std::abs(m[best][col])) best = i;
    if (std::abs(m[best][col]) <= tol) continue;
    std::swap(m[row], m[best]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == row) continue;
      const double f = m[i][col] / m[row][col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < cols; ++j) m[i][j] -= f * m[row][j];
    }
    ++row;
    ++rank;
  }
  return rank;
}

std::vector<std::vector<double>> evaluate_generators(const DistributionGenerators& gens,
                                                     const std::vector<double>& x, int dim) {
  std::vector<std::vector<double>> m;
  m.reserve(gens.fields.size());
  for (const auto& g : gens.fields) {
    std::vector<double> row(static_cast<std::size_t>(dim), 0.0);
    for (const auto& [idx, v] : g.coeffs()) row[static_cast<std::size_t>(idx[0])] = v.eval(x);
    m.push_back(std::move(row));
  }
  return m;
}

}  // namespace

int rank_at(const TwistedJacobiStructure& s, const Point& p) {
  require_in_domain(s.chart, p);
  const DistributionGenerators gens = generators(s);
  return numeric_rank(evaluate_generators(gens, p.coords(), s.chart.dim()));
}

TransitivityReport is_transitive(const TwistedJacobiStructure& s,
                                 const std::vector<Point>& sample) {
  if (sample.empty()) throw Error("is_transitive needs a nonempty sample");
  TransitivityReport out;
  const DistributionGenerators gens = generators(s);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    require_in_domain(s.chart, sample[i]);
    const int r = numeric_rank(evaluate_generators(gens, sample[i].coords(), s.chart.dim()));
    out.ranks.push_back(r);
    if (r != s.chart.dim()) out.failing.push_back(i);
  }
  out.transitive = out.failing.empty();
  return out;
}

std::string_view to_string(LeafParity p) { return p == LeafParity::Even ? "Even" : "Odd"; }

namespace {

// Lambda-matrix L[m][j] = Lambda(dx_m, dx_j).
ExprMatrix lambda_matrix(const TwistedJacobiStructure& s) {
  const int n = s.chart.dim();
  ExprMatrix l(static_cast<std::size_t>(n), ExprVector(static_cast<std::size_t>(n), s.chart.zero()));
  for (const auto& [idx, v] : s.lambda.coeffs()) {
    l[static_cast<std::size_t>(idx[0])][static_cast<std::size_t>(idx[1])] = v;
    l[static_cast<std::size_t>(idx[1])][static_cast<std::size_t>(idx[0])] = -v;
  }
  return l;
}

}  // namespace

TransitiveClassification classify_transitive(const TwistedJacobiStructure& s,
                                             std::uint64_t seed) {
  const Chart& chart = s.chart;
  const int n = chart.dim();

  // symbolic generic rank of the generator matrix
  const DistributionGenerators gens = generators(s);
  ExprMatrix gm;
  gm.reserve(gens.fields.size());
  for (const auto& g : gens.fields) {
    ExprVector row(static_cast<std::size_t>(n), chart.zero());
    for (const auto& [idx, v] : g.coeffs()) row[static_cast<std::size_t>(idx[0])] = v;
    gm.push_back(std::move(row));
  }
  const int rank = generic_rank(gm);
  if (rank < n)
    throw NotTransitiveError("not transitive: generic rank " + std::to_string(rank) + " of " +
                             std::to_string(n));

  const ExprMatrix lmat = lambda_matrix(s);

  if (n % 2 == 0) {
    // solve sum_m theta_m L[m][j] = E^j
    ExprMatrix a(static_cast<std::size_t>(n), ExprVector(static_cast<std::size_t>(n), chart.zero()));
    ExprVector rhs(static_cast<std::size_t>(n), chart.zero());
    for (int j = 0; j < n; ++j) {
      for (int m = 0; m < n; ++m)
        a[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] =
            lmat[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
      rhs[static_cast<std::size_t>(j)] = s.e_field.coeff({j});
    }
    SolveOutcome sol = solve_unique(a, rhs, seed);
    if (!sol.ok)
      throw NotTransitiveError("E is not in the image of Lambda# (" + sol.failure + ")");
    DiffForm theta(chart, 1);
    for (int m = 0; m < n; ++m) theta.set({m}, sol.x[static_cast<std::size_t>(m)]);

    // big_theta inverts Lambda: B = -L^{-1}
    ExprMatrix linv = invert(lmat);
    DiffForm big(chart, 2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        big.set({i, j}, -linv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);

    VerificationReport residuals;
    residuals.identities.push_back(
        residual_report("d theta", exterior_derivative(theta), seed));
    const DiffForm phi = big - s.omega;
    residuals.identities.push_back(residual_report(
        "d(Theta - omega) + theta ^ (Theta - omega)",
        exterior_derivative(phi) + wedge(theta, phi), seed));
    return TransitiveClassification{LeafParity::Even, theta, big, std::move(residuals)};
  }

  // odd: theta solves <theta,E> = 1 and Lambda#(theta) = 0
  ExprMatrix a(static_cast<std::size_t>(n + 1), ExprVector(static_cast<std::size_t>(n), chart.zero()));
  ExprVector rhs(static_cast<std::size_t>(n + 1), chart.zero());
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m)
      a[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] =
          lmat[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
  for (int m = 0; m < n; ++m)
    a[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] = s.e_field.coeff({m});
  rhs[static_cast<std::size_t>(n)] = chart.one();
  SolveOutcome theta_sol = solve_unique(a, rhs, seed);
  if (!theta_sol.ok)
    throw NotTransitiveError("theta system unsolvable (" + theta_sol.failure + ")");
  DiffForm theta(chart, 1);
  for (int m = 0; m < n; ++m) theta.set({m}, theta_sol.x[static_cast<std::size_t>(m)]);

  // big_theta: i(Lambda#(dx_k)) Theta = -(dx_k - E^k theta), i(E) Theta = 0.
  // Unknowns Theta_{uv}, u < v; equation (k, j) plus the i(E) rows.
  std::vector<std::pair<int, int>> unknowns;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) unknowns.emplace_back(u, v);
  const std::size_t nu = unknowns.size();

  ExprMatrix big_a;
  ExprVector big_rhs;
  auto add_row = [&](const Multivector& w, int j, const ScalarExpr& rhs_value) {
    ExprVector row(nu, chart.zero());
    for (std::size_t t = 0; t < nu; ++t) {
      const auto [u, v] = unknowns[t];
      ScalarExpr coeff = chart.zero();
      if (j == v) coeff += w.coeff({u});
      if (j == u) coeff -= w.coeff({v});
      row[t] = coeff;
    }
    big_a.push_back(std::move(row));
    big_rhs.push_back(rhs_value);
  };

  std::vector<Multivector> sharps;
  sharps.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) sharps.push_back(sharp(s.lambda, coordinate_form(chart, k)));
  for (int k = 0; k < n; ++k) {
    const ScalarExpr ek = s.e_field.coeff({k});
    for (int j = 0; j < n; ++j) {
      ScalarExpr rv = ek * theta.coeff({j});
      if (j == k) rv -= chart.one();
      add_row(sharps[static_cast<std::size_t>(k)], j, rv);
    }
  }
  for (int j = 0; j < n; ++j) add_row(s.e_field, j, chart.zero());

  SolveOutcome big_sol = solve_unique(big_a, big_rhs, seed);
  if (!big_sol.ok)
    throw NotTransitiveError("Theta system unsolvable (" + big_sol.failure + ")");
  DiffForm big(chart, 2);
  for (std::size_t t = 0; t < nu; ++t)
    big.set({unknowns[t].first, unknowns[t].second}, big_sol.x[t]);

  // nondegeneracy of the recovered pair
  const int half = (n - 1) / 2;
  DiffForm top = wedge(theta, wedge_power(big, half));
  IndexTuple all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  if (is_zero(top.coeff(all), seed).status != ZeroStatus::NonZero)
    throw NotTransitiveError("recovered theta ^ Theta^n vanishes identically");

  VerificationReport residuals;
  residuals.identities.push_back(residual_report(
      "Theta - d theta - omega", big - exterior_derivative(theta) - s.omega, seed));
  return TransitiveClassification{LeafParity::Odd, theta, big, std::move(residuals)};
}

std::vector<Point> LeafSample::points() const {
  std::vector<Point> out;
  out.reserve(steps.size() + 1);
  out.push_back(base);
  for (const auto& s : steps) out.push_back(Point::doubles(s.x));
  return out;
}

LeafSample trace_leaf(const TwistedJacobiStructure& s, const Point& p,
                      const TraceControls& controls) {
  const auto t_start = std::chrono::steady_clock::now();
  const Chart& chart = s.chart;
  const int n = chart.dim();
  require_in_domain(chart, p);

  std::vector<ScalarExpr> functions = controls.functions;
  if (functions.empty()) {
    for (int i = 0; i < n; ++i) functions.push_back(chart.coordinate(i));
    functions.push_back(chart.one());
  }
  if (controls.step <= 0.0) throw Error("step size must be positive");

  // component expressions of each hamiltonian-type field
  std::vector<std::vector<ScalarExpr>> rhs;
  rhs.reserve(functions.size());
  for (const auto& f : functions) {
    const Multivector h = hamiltonian_vector(s, f);
    std::vector<ScalarExpr> comps(static_cast<std::size_t>(n), chart.zero());
    for (const auto& [idx, v] : h.coeffs()) comps[static_cast<std::size_t>(idx[0])] = v;
    rhs.push_back(std::move(comps));
  }

  const DistributionGenerators gens = generators(s);

  LeafSample out(p);
  out.requested_steps = controls.steps_per_flow * controls.flows;

  std::mt19937_64 rng(controls.seed);
  std::vector<double> x = p.coords();
  int first_rank = -1;
  int global_step = 0;

  auto eval_field = [&](const std::vector<ScalarExpr>& comps, const std::vector<double>& at,
                        std::vector<double>& into) {
    for (int i = 0; i < n; ++i) into[static_cast<std::size_t>(i)] = comps[static_cast<std::size_t>(i)].eval(at);
  };

  std::vector<double> k1(static_cast<std::size_t>(n)), k2(k1), k3(k1), k4(k1), tmp(k1);
  const double h = controls.step;

  for (int flow = 0; flow < controls.flows && !out.truncated; ++flow) {
    const int fi = static_cast<int>(rng() % functions.size());
    const auto& comps = rhs[static_cast<std::size_t>(fi)];
    for (int st = 0; st < controls.steps_per_flow; ++st) {
      bool ok = true;
      try {
        eval_field(comps, x, k1);
        for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + 0.5 * h * k1[static_cast<std::size_t>(i)];
        eval_field(comps, tmp, k2);
        for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + 0.5 * h * k2[static_cast<std::size_t>(i)];
        eval_field(comps, tmp, k3);
        for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + h * k3[static_cast<std::size_t>(i)];
        eval_field(comps, tmp, k4);
      } catch (const DivisionByZeroError&) {
        ok = false;
      }
      if (ok) {
        for (int i = 0; i < n; ++i)
          tmp[static_cast<std::size_t>(i)] =
              x[static_cast<std::size_t>(i)] +
              h / 6.0 *
                  (k1[static_cast<std::size_t>(i)] + 2.0 * k2[static_cast<std::size_t>(i)] +
                   2.0 * k3[static_cast<std::size_t>(i)] + k4[static_cast<std::size_t>(i)]);
        ok = point_in_domain(chart, tmp) &&
             std::all_of(tmp.begin(), tmp.end(), [](double v) { return std::isfinite(v); });
      }
      if (!ok) {
        out.truncated = true;
        out.truncation_reason = "step " + std::to_string(global_step + 1) +
                                " leaves the chart domain";
        break;
      }
      x = tmp;
      ++global_step;
      const int r = numeric_rank(evaluate_generators(gens, x, n));
      if (first_rank < 0) first_rank = r;
      if (r != first_rank) out.rank_drop = true;
      out.steps.push_back(LeafStep{global_step, fi, x, r});
    }
  }

  out.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

void write_leaf_csv(std::ostream& os, const LeafSample& sample) {
  const int n = sample.base.dim();
  os << "step,flow_function_index";
  for (int i = 0; i < n; ++i) os << ",x_" << i;
  os << ",rank\n";
  char buf[64];
  for (const auto& srow : sample.steps) {
    os << srow.step << "," << srow.function_index;
    for (double v : srow.x) {
      std::snprintf(buf, sizeof buf, "%#.12g", v);
      os << "," << buf;
    }
    os << "," << srow.rank << "\n";
  }
}

double leaf_bracket_check(const TwistedJacobiStructure& s, const ScalarExpr& f,
                          const ScalarExpr& g, const ScalarExpr& f_alt,
                          const ScalarExpr& g_alt, const LeafSample& sample) {
  const std::vector<Point> pts = sample.points();
  for (const auto& pt : pts) {
    if (std::abs(f.eval(pt) - f_alt.eval(pt)) > 1e-8)
      throw PreconditionError("f and f_alt disagree on the leaf sample at " + pt.str());
    if (std::abs(g.eval(pt) - g_alt.eval(pt)) > 1e-8)
      throw PreconditionError("g and g_alt disagree on the leaf sample at " + pt.str());
  }
  const ScalarExpr b1 = bracket_fun(s, f, g);
  const ScalarExpr b2 = bracket_fun(s, f_alt, g_alt);
  double deviation = 0.0;
  for (const auto& pt : pts)
    deviation = std::max(deviation, std::abs(b1.eval(pt) - b2.eval(pt)));
  return deviation;
}

}  // namespace tjm
