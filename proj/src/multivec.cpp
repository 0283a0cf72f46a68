#include "tjm/multivec.hpp"

#include <algorithm>

namespace tjm {

int sort_index_tuple(IndexTuple& t) {
  int sign = 1;
  for (std::size_t i = 1; i < t.size(); ++i) {
    int v = t[i];
    std::size_t j = i;
    while (j > 0 && t[j - 1] > v) {
      t[j] = t[j - 1];
      --j;
      sign = -sign;
    }
    t[j] = v;
  }
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i - 1] == t[i]) return 0;
  return sign;
}

Multivector MixedContraction::contract(const Multivector& x) const {
  if (x.degree() != 1) throw Error("contraction argument must be a vector field");
  if (!x.chart().compatible(chart)) throw ChartMismatchError("contraction across charts");
  Multivector out(chart, p);
  for (const auto& [key, v] : coeffs) {
    const auto& [tuple, m] = key;
    ScalarExpr xm = x.coeff({m});
    if (xm.is_structural_zero()) continue;
    out.set(tuple, out.coeff(tuple) + v * xm);
  }
  return out;
}

DiffForm exterior_derivative(const DiffForm& eta) {
  const Chart& chart = eta.chart();
  DiffForm out(chart, eta.degree() + 1);
  if (out.degree() > chart.dim()) return out;
  for (const auto& [idx, v] : eta.coeffs()) {
    for (int j = 0; j < chart.dim(); ++j) {
      ScalarExpr dv = v.derivative(j);
      if (dv.is_structural_zero()) continue;
      IndexTuple t;
      t.reserve(idx.size() + 1);
      t.push_back(j);
      t.insert(t.end(), idx.begin(), idx.end());
      out.add_signed(std::move(t), dv);
    }
  }
  return out;
}

DiffForm interior_product(const Multivector& x, const DiffForm& eta) {
  if (x.degree() != 1) throw Error("interior product needs a vector field");
  if (eta.degree() < 1) throw Error("interior product of a degree-0 form");
  if (!x.chart().compatible(eta.chart())) throw ChartMismatchError("interior product across charts");
  const Chart& chart = eta.chart();
  DiffForm out(chart, eta.degree() - 1);
  for (const auto& [idx, v] : eta.coeffs()) {
    // (i(X)eta)(...) = eta(X, ...): strip each index in turn.
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      ScalarExpr xa = x.coeff({idx[pos]});
      if (xa.is_structural_zero()) continue;
      IndexTuple rest;
      rest.reserve(idx.size() - 1);
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (k != pos) rest.push_back(idx[k]);
      ScalarExpr contrib = xa * v;
      if (pos % 2 == 1) contrib = -contrib;
      out.set(rest, out.coeff(rest) + contrib);
    }
  }
  return out;
}

ScalarExpr pairing(const DiffForm& alpha, const Multivector& x) {
  if (alpha.degree() != 1 || x.degree() != 1) throw Error("pairing needs degree-1 arguments");
  if (!alpha.chart().compatible(x.chart())) throw ChartMismatchError("pairing across charts");
  ScalarExpr acc = alpha.chart().zero();
  for (const auto& [idx, v] : alpha.coeffs()) acc += v * x.coeff(idx);
  return acc;
}

namespace {

ScalarExpr det_expr(const Chart& chart, std::vector<std::vector<ScalarExpr>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return chart.one();
  if (n == 1) return m[0][0];
  ScalarExpr acc = chart.zero();
  std::vector<std::vector<ScalarExpr>> minor;
  for (std::size_t j = 0; j < n; ++j) {
    if (m[0][j].is_structural_zero()) continue;
    minor.clear();
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<ScalarExpr> row;
      row.reserve(n - 1);
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[r][c]);
      minor.push_back(std::move(row));
    }
    ScalarExpr term = m[0][j] * det_expr(chart, minor);
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace

ScalarExpr eval_on_vectors(const DiffForm& eta, std::span<const Multivector> fields) {
  const Chart& chart = eta.chart();
  if (static_cast<int>(fields.size()) != eta.degree())
    throw Error("field count does not match form degree");
  for (const auto& f : fields) {
    if (f.degree() != 1) throw Error("eval_on_vectors needs vector fields");
    if (!f.chart().compatible(chart)) throw ChartMismatchError("evaluation across charts");
  }
  if (eta.degree() == 0) return eta.scalar_value();
  ScalarExpr acc = chart.zero();
  const std::size_t k = fields.size();
  std::vector<std::vector<ScalarExpr>> m(k, std::vector<ScalarExpr>(k, chart.zero()));
  for (const auto& [idx, v] : eta.coeffs()) {
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) m[a][b] = fields[b].coeff({idx[a]});
    acc += v * det_expr(chart, m);
  }
  return acc;
}

ScalarExpr eval_on_forms(const Multivector& p, std::span<const DiffForm> forms) {
  const Chart& chart = p.chart();
  if (static_cast<int>(forms.size()) != p.degree())
    throw Error("form count does not match multivector degree");
  for (const auto& f : forms) {
    if (f.degree() != 1) throw Error("eval_on_forms needs 1-forms");
    if (!f.chart().compatible(chart)) throw ChartMismatchError("evaluation across charts");
  }
  if (p.degree() == 0) return p.scalar_value();
  ScalarExpr acc = chart.zero();
  const std::size_t k = forms.size();
  std::vector<std::vector<ScalarExpr>> m(k, std::vector<ScalarExpr>(k, chart.zero()));
  for (const auto& [idx, v] : p.coeffs()) {
    // m[a][b] = alpha_a(e_{idx_b}); det = P-term evaluated on the forms
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) m[a][b] = forms[a].coeff({idx[b]});
    acc += v * det_expr(chart, m);
  }
  return acc;
}

ScalarExpr apply_vector(const Multivector& x, const ScalarExpr& f) {
  if (x.degree() != 1) throw Error("apply_vector needs a vector field");
  ScalarExpr acc = f.chart().zero();
  for (const auto& [idx, v] : x.coeffs()) acc += v * f.derivative(idx[0]);
  return acc;
}

// ---- Schouten-Nijenhuis bracket -------------------------------------------

namespace {

Multivector basis_wedge(const Chart& chart, const IndexTuple& idx) {
  Multivector out(chart, static_cast<int>(idx.size()));
  out.set(idx, chart.one());
  return out;
}

// Bracket of the single terms f*d_I and g*d_J via the Leibniz recursion.
Multivector schouten_term(const Chart& chart, const ScalarExpr& f, const IndexTuple& I,
                          const ScalarExpr& g, const IndexTuple& J) {
  const int p = static_cast<int>(I.size());
  const int q = static_cast<int>(J.size());

  if (p == 0 && q == 0) return Multivector(chart, 0);

  if (p == 0) {
    // [f, g*d_{j1} ^ Rest] = [f, g*d_{j1}] ^ Rest - (g*d_{j1}) ^ [f, Rest]
    const int j1 = J[0];
    IndexTuple rest(J.begin() + 1, J.end());
    // [f, Y] = -Y(f)
    ScalarExpr base = -(g * f.derivative(j1));
    Multivector part1 = base.is_structural_zero()
                            ? Multivector(chart, q - 1)
                            : base * basis_wedge(chart, rest);
    if (q == 1) return part1;
    Multivector a = g * basis_wedge(chart, IndexTuple{j1});
    Multivector part2 = wedge(a, schouten_term(chart, f, {}, chart.one(), rest));
    return part1 - part2;
  }

  if (p == 1) {
    const int i = I[0];
    if (q == 0) return Multivector::scalar(f * g.derivative(i));
    // [X, g*d_{j1} ^ Rest] = [X, g*d_{j1}] ^ Rest + (g*d_{j1}) ^ [X, Rest]
    const int j1 = J[0];
    IndexTuple rest(J.begin() + 1, J.end());
    Multivector lie(chart, 1);
    lie.set({j1}, f * g.derivative(i));
    lie.set({i}, lie.coeff({i}) - g * f.derivative(j1));
    Multivector part1 = wedge(lie, basis_wedge(chart, rest));
    if (q == 1) return part1;
    Multivector a = g * basis_wedge(chart, IndexTuple{j1});
    Multivector part2 = wedge(a, schouten_term(chart, f, I, chart.one(), rest));
    return part1 + part2;
  }

  // p >= 2: [A^B, Q] = (-1)^((p-1)(q-1)) [A,Q] ^ B + A ^ [B,Q]
  const int i1 = I[0];
  IndexTuple ib(I.begin() + 1, I.end());
  Multivector left =
      wedge(schouten_term(chart, f, IndexTuple{i1}, g, J), basis_wedge(chart, ib));
  if (((p - 1) * (q - 1)) % 2 != 0) left = -left;
  Multivector a = f * basis_wedge(chart, IndexTuple{i1});
  Multivector right = wedge(a, schouten_term(chart, chart.one(), ib, g, J));
  return left + right;
}

}  // namespace

Multivector schouten(const Multivector& p, const Multivector& q) {
  if (!p.chart().compatible(q.chart())) throw ChartMismatchError("schouten across charts");
  if (p.degree() + q.degree() < 1) throw Error("schouten of two scalars is not defined");
  const Chart& chart = p.chart();
  Multivector out(chart, p.degree() + q.degree() - 1);
  for (const auto& [I, f] : p.coeffs())
    for (const auto& [J, g] : q.coeffs())
      out = out + schouten_term(chart, f, I, g, J);
  return out;
}

Multivector lie_derivative(const Multivector& x, const Multivector& p) {
  if (x.degree() != 1) throw Error("lie_derivative needs a vector field");
  return schouten(x, p);
}

Multivector sharp(const Multivector& lambda, const DiffForm& alpha) {
  if (lambda.degree() != 2) throw Error("sharp needs a bivector");
  if (alpha.degree() != 1) throw Error("sharp needs a 1-form");
  if (!lambda.chart().compatible(alpha.chart())) throw ChartMismatchError("sharp across charts");
  const Chart& chart = lambda.chart();
  Multivector out(chart, 1);
  // <dx_j, sharp(L, a)> = L(a, dx_j) = sum_a a_a * L^{aj}
  for (const auto& [idx, v] : lambda.coeffs()) {
    const int a = idx[0], b = idx[1];
    ScalarExpr aa = alpha.coeff({a});
    ScalarExpr ab = alpha.coeff({b});
    if (!aa.is_structural_zero()) out.set({b}, out.coeff({b}) + aa * v);
    if (!ab.is_structural_zero()) out.set({a}, out.coeff({a}) - ab * v);
  }
  return out;
}

namespace {

// Enumerates strictly increasing k-tuples from [0, dim).
bool next_tuple(IndexTuple& t, int dim) {
  const int k = static_cast<int>(t.size());
  for (int i = k - 1; i >= 0; --i) {
    if (t[static_cast<std::size_t>(i)] < dim - (k - i)) {
      ++t[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        t[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

IndexTuple first_tuple(int k) {
  IndexTuple t(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) t[static_cast<std::size_t>(i)] = i;
  return t;
}

}  // namespace

Multivector sharp_ext(const Multivector& lambda, const DiffForm& eta) {
  if (eta.degree() < 1) throw Error("sharp_ext needs degree >= 1");
  const Chart& chart = lambda.chart();
  if (!chart.compatible(eta.chart())) throw ChartMismatchError("sharp_ext across charts");
  const int k = eta.degree();
  Multivector out(chart, k);
  if (k > chart.dim() || eta.is_structural_zero()) return out;
  std::vector<Multivector> sharped;
  sharped.reserve(static_cast<std::size_t>(chart.dim()));
  for (int i = 0; i < chart.dim(); ++i) sharped.push_back(sharp(lambda, coordinate_form(chart, i)));
  const int sign = (k % 2 == 0) ? 1 : -1;
  IndexTuple t = first_tuple(k);
  std::vector<Multivector> args;
  do {
    args.clear();
    for (int i : t) args.push_back(sharped[static_cast<std::size_t>(i)]);
    ScalarExpr v = eval_on_vectors(eta, args);
    if (sign < 0) v = -v;
    out.set(t, v);
  } while (next_tuple(t, chart.dim()));
  return out;
}

MixedContraction sharp_tensor_one_section(const Multivector& lambda, const DiffForm& eta) {
  if (eta.degree() < 1) throw Error("sharp_tensor_one needs degree >= 1");
  const Chart& chart = lambda.chart();
  if (!chart.compatible(eta.chart())) throw ChartMismatchError("sharp_tensor_one across charts");
  const int k = eta.degree();
  MixedContraction out{chart, k - 1, {}};
  if (k - 1 > chart.dim() || eta.is_structural_zero()) return out;
  std::vector<Multivector> sharped;
  for (int i = 0; i < chart.dim(); ++i) sharped.push_back(sharp(lambda, coordinate_form(chart, i)));
  const int sign = (k % 2 == 0) ? 1 : -1;
  IndexTuple t = first_tuple(k - 1);
  std::vector<Multivector> args;
  do {
    for (int m = 0; m < chart.dim(); ++m) {
      args.clear();
      for (int i : t) args.push_back(sharped[static_cast<std::size_t>(i)]);
      args.push_back(coordinate_field(chart, m));
      ScalarExpr v = eval_on_vectors(eta, args);
      if (sign < 0) v = -v;
      if (!v.is_structural_zero()) out.coeffs.emplace(std::make_pair(t, m), std::move(v));
    }
  } while (next_tuple(t, chart.dim()));
  return out;
}

Multivector sharp_tensor_one(const Multivector& lambda, const DiffForm& eta,
                             const Multivector& x) {
  return sharp_tensor_one_section(lambda, eta).contract(x);
}

Multivector coordinate_field(const Chart& chart, int i) {
  Multivector out(chart, 1);
  out.set({i}, chart.one());
  return out;
}

DiffForm coordinate_form(const Chart& chart, int i) {
  DiffForm out(chart, 1);
  out.set({i}, chart.one());
  return out;
}

DiffForm differential(const ScalarExpr& f) {
  const Chart& chart = f.chart();
  DiffForm out(chart, 1);
  for (int i = 0; i < chart.dim(); ++i) out.set({i}, f.derivative(i));
  return out;
}

}  // namespace tjm
