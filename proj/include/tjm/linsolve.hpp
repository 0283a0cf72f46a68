#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tjm/expr.hpp"

namespace tjm {

class SolveError : public Error {
 public:
  using Error::Error;
};

using ExprMatrix = std::vector<std::vector<ScalarExpr>>;
using ExprVector = std::vector<ScalarExpr>;

// Exact determinant: fraction-free Bareiss elimination when every entry is
// polynomial, cofactor expansion otherwise.
ScalarExpr determinant(const ExprMatrix& a);

// adj(A) with A * adj(A) = det(A) * I.
ExprMatrix adjugate(const ExprMatrix& a);

// Inverse over the rational-function field; throws SolveError when the
// determinant is not structurally nonzero. The caller is responsible for
// recording det != 0 as a domain constraint where appropriate.
ExprMatrix invert(const ExprMatrix& a);

// Rank over the rational-function field with structurally-nonzero pivots.
int generic_rank(ExprMatrix a);

struct SolveOutcome {
  bool ok = false;
  ExprVector x;
  std::string failure;
};

// Solves the (possibly overdetermined) system A x = b, m >= n, requiring a
// unique solution. Pivots are chosen structurally first; if the verification
// of all m residual rows fails (transcendental coefficients can make a
// canonically nonzero pivot vanish identically), pivoting is retried with the
// sampling-based zero test. Residual rows are accepted at ExactZero or
// ProbablyZero.
SolveOutcome solve_unique(const ExprMatrix& a, const ExprVector& b, std::uint64_t seed = 0);

}  // namespace tjm
