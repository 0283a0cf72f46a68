#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tjm/jacobi.hpp"

namespace tjm {

class NotTransitiveError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Pivot threshold for the numeric rank test, relative to the largest entry of
// the evaluated generator matrix.
inline constexpr double kRankPivotTolerance = 1e-9;

// The fields Lambda^#(dx_0), ..., Lambda^#(dx_{n-1}), E; their pointwise span
// is the characteristic distribution.
struct DistributionGenerators {
  std::vector<Multivector> fields;  // dim + 1 entries
};

DistributionGenerators generators(const TwistedJacobiStructure& s);

// Numeric rank of the (dim+1) x dim generator matrix at p.
int rank_at(const TwistedJacobiStructure& s, const Point& p);

struct TransitivityReport {
  bool transitive = false;
  std::vector<int> ranks;                 // one per sample point
  std::vector<std::size_t> failing;       // indices of points with rank < dim
};

TransitivityReport is_transitive(const TwistedJacobiStructure& s,
                                 const std::vector<Point>& sample);

enum class LeafParity { Even, Odd };

std::string_view to_string(LeafParity p);

struct TransitiveClassification {
  LeafParity parity;
  DiffForm theta;
  DiffForm big_theta;
  VerificationReport residuals;
};

// Proposition-style classification of a transitive structure. Even charts
// recover a twisted LCS pair (theta with E = Lambda#(theta), big_theta by
// inversion of Lambda); odd charts recover a twisted contact pair with
// big_theta = d theta + omega. Transitivity is decided symbolically from the
// generic rank; throws NotTransitiveError otherwise.
TransitiveClassification classify_transitive(const TwistedJacobiStructure& s,
                                             std::uint64_t seed = 0);

struct TraceControls {
  std::vector<ScalarExpr> functions;  // empty: coordinates plus the constant 1
  double step = 1e-2;
  int steps_per_flow = 200;
  int flows = 20;
  std::uint64_t seed = 0;
};

struct LeafStep {
  int step = 0;           // global step number, starting at 1
  int function_index = 0;
  std::vector<double> x;
  int rank = 0;
};

struct LeafSample {
  explicit LeafSample(Point base_) : base(std::move(base_)) {}

  Point base;
  std::vector<LeafStep> steps;
  int requested_steps = 0;
  bool truncated = false;
  std::string truncation_reason;
  bool rank_drop = false;  // diagnostic: rank changed along the trace
  double duration_seconds = 0.0;

  std::vector<Point> points() const;  // base point plus every accepted step
};

// Flows along randomly chosen hamiltonian-type fields L#(df) + f E using
// fixed-step classical RK4; visited points are rank-checked and must satisfy
// the chart domain constraints, otherwise the trace truncates.
LeafSample trace_leaf(const TwistedJacobiStructure& s, const Point& p,
                      const TraceControls& controls);

// CSV export: header `step,flow_function_index,x_0,...,x_{n-1},rank`, one row
// per accepted step, 12 significant digits.
void write_leaf_csv(std::ostream& os, const LeafSample& sample);

// Max pointwise deviation |{f,g} - {f_alt,g_alt}| over the sample; requires
// f = f_alt and g = g_alt on the sample (tolerance 1e-8).
double leaf_bracket_check(const TwistedJacobiStructure& s, const ScalarExpr& f,
                          const ScalarExpr& g, const ScalarExpr& f_alt,
                          const ScalarExpr& g_alt, const LeafSample& sample);

}  // namespace tjm
