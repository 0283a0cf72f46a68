#include "tjm/linsolve.hpp"

#include <algorithm>
#include <optional>

namespace tjm {

namespace {

const Chart& matrix_chart(const ExprMatrix& a) {
  if (a.empty() || a[0].empty()) throw SolveError("empty matrix");
  return a[0][0].chart();
}

bool all_polynomial(const ExprMatrix& a) {
  for (const auto& row : a)
    for (const auto& e : row)
      if (!e.is_polynomial()) return false;
  return true;
}

ScalarExpr det_bareiss(ExprMatrix m) {
  const Chart& chart = matrix_chart(m);
  const std::size_t n = m.size();
  ScalarExpr prev = chart.one();
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k].is_structural_zero()) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && m[swap_row][k].is_structural_zero()) ++swap_row;
      if (swap_row == n) return chart.zero();
      std::swap(m[k], m[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        ScalarExpr num = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        auto q = exact_divide(num, prev);
        if (!q) throw SolveError("Bareiss division failed");  // cannot happen over a domain
        m[i][j] = *q;
      }
      m[i][k] = chart.zero();
    }
    prev = m[k][k];
  }
  ScalarExpr det = m[n - 1][n - 1];
  return sign > 0 ? det : -det;
}

ScalarExpr det_cofactor(const ExprMatrix& m) {
  const Chart& chart = matrix_chart(m);
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  ScalarExpr acc = chart.zero();
  for (std::size_t j = 0; j < n; ++j) {
    if (m[0][j].is_structural_zero()) continue;
    ExprMatrix minor;
    minor.reserve(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      ExprVector row;
      row.reserve(n - 1);
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[r][c]);
      minor.push_back(std::move(row));
    }
    ScalarExpr term = m[0][j] * det_cofactor(minor);
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace

ScalarExpr determinant(const ExprMatrix& a) {
  const std::size_t n = a.size();
  for (const auto& row : a)
    if (row.size() != n) throw SolveError("determinant of a non-square matrix");
  if (n == 0) throw SolveError("empty matrix");
  if (a[0][0].as_rational() && n == 1) return a[0][0];
  if (all_polynomial(a) && n >= 3) return det_bareiss(a);
  return det_cofactor(a);
}

ExprMatrix adjugate(const ExprMatrix& a) {
  const Chart& chart = matrix_chart(a);
  const std::size_t n = a.size();
  ExprMatrix out(n, ExprVector(n, chart.zero()));
  if (n == 1) {
    out[0][0] = chart.one();
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      ExprMatrix minor;
      minor.reserve(n - 1);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        ExprVector row;
        row.reserve(n - 1);
        for (std::size_t c = 0; c < n; ++c)
          if (c != j) row.push_back(a[r][c]);
        minor.push_back(std::move(row));
      }
      ScalarExpr cof = det_cofactor(minor);
      if ((i + j) % 2 != 0) cof = -cof;
      out[j][i] = cof;  // adjugate is the transposed cofactor matrix
    }
  return out;
}

ExprMatrix invert(const ExprMatrix& a) {
  const ScalarExpr det = determinant(a);
  if (det.is_structural_zero()) throw SolveError("matrix is singular");
  ExprMatrix adj = adjugate(a);
  for (auto& row : adj)
    for (auto& e : row) e = e / det;
  return adj;
}

int generic_rank(ExprMatrix a) {
  if (a.empty()) return 0;
  const std::size_t m = a.size(), n = a[0].size();
  std::size_t row = 0;
  int rank = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t pivot = row;
    while (pivot < m && a[pivot][col].is_structural_zero()) ++pivot;
    if (pivot == m) continue;
    std::swap(a[row], a[pivot]);
    for (std::size_t i = row + 1; i < m; ++i) {
      if (a[i][col].is_structural_zero()) continue;
      ScalarExpr factor = a[i][col] / a[row][col];
      for (std::size_t j = col; j < n; ++j) a[i][j] = a[i][j] - factor * a[row][j];
    }
    ++row;
    ++rank;
  }
  return rank;
}

namespace {

enum class PivotPolicy { Structural, Sampled };

// true when the entry should be treated as a usable (nonzero) pivot
bool pivot_usable(const ScalarExpr& e, PivotPolicy policy, std::uint64_t seed) {
  if (e.is_structural_zero()) return false;
  if (policy == PivotPolicy::Structural) return true;
  return is_zero(e, seed).status == ZeroStatus::NonZero;
}

std::optional<ExprVector> eliminate(const ExprMatrix& a, const ExprVector& b,
                                    PivotPolicy policy, std::uint64_t seed,
                                    std::string& failure) {
  const Chart& chart = matrix_chart(a);
  const std::size_t m = a.size(), n = a[0].size();
  ExprMatrix aug = a;
  for (std::size_t i = 0; i < m; ++i) aug[i].push_back(b[i]);

  std::size_t row = 0;
  std::vector<std::size_t> pivot_row_of_col(n, m);
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t pivot = row;
    while (pivot < m && !pivot_usable(aug[pivot][col], policy, seed)) ++pivot;
    if (pivot == m) continue;
    std::swap(aug[row], aug[pivot]);
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || aug[i][col].is_structural_zero()) continue;
      ScalarExpr factor = aug[i][col] / aug[row][col];
      for (std::size_t j = col; j <= n; ++j) aug[i][j] = aug[i][j] - factor * aug[row][j];
    }
    pivot_row_of_col[col] = row;
    ++row;
  }

  ExprVector x(n, chart.zero());
  for (std::size_t col = 0; col < n; ++col) {
    if (pivot_row_of_col[col] == m) {
      failure = "underdetermined system (no pivot in column " + std::to_string(col) + ")";
      return std::nullopt;
    }
    const std::size_t r = pivot_row_of_col[col];
    x[col] = aug[r][n] / aug[r][col];
  }
  return x;
}

}  // namespace

SolveOutcome solve_unique(const ExprMatrix& a, const ExprVector& b, std::uint64_t seed) {
  SolveOutcome out;
  if (a.empty() || a.size() != b.size()) {
    out.failure = "shape mismatch";
    return out;
  }
  const std::size_t n = a[0].size();
  if (a.size() < n) {
    out.failure = "fewer equations than unknowns";
    return out;
  }

  for (PivotPolicy policy : {PivotPolicy::Structural, PivotPolicy::Sampled}) {
    std::string failure;
    auto x = eliminate(a, b, policy, seed, failure);
    if (!x) {
      out.failure = failure;
      continue;
    }
    bool verified = true;
    for (std::size_t i = 0; i < a.size() && verified; ++i) {
      ScalarExpr residual = -b[i];
      for (std::size_t j = 0; j < n; ++j) residual += a[i][j] * (*x)[j];
      ZeroCheck z = is_zero(residual, seed);
      if (z.status == ZeroStatus::NonZero) {
        verified = false;
        out.failure = "inconsistent system (row " + std::to_string(i) +
                      " residual nonzero at " +
                      (z.witness ? z.witness->str() : std::string("sample")) + ")";
      }
    }
    if (verified) {
      out.ok = true;
      out.x = std::move(*x);
      out.failure.clear();
      return out;
    }
  }
  return out;
}

}  // namespace tjm
