#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tjm {

using Rational = mpq_class;

// Makes a canonical (lowest-terms) rational from a num/den pair.
Rational make_rational(long num, long den = 1);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ChartMismatchError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DivisionByZeroError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

namespace detail {
struct RatFuncData;
using RatFuncPtr = std::shared_ptr<const RatFuncData>;
}  // namespace detail

class ScalarExpr;

// Ordered list of coordinate names plus the nonvanishing expressions that cut
// out the working domain. Copies share state: a constraint added through one
// handle is visible to every other handle of the same chart.
class Chart {
 public:
  explicit Chart(std::vector<std::string> names);

  int dim() const;
  const std::vector<std::string>& names() const;
  const std::string& name(int i) const;
  std::optional<int> index_of(std::string_view name) const;

  ScalarExpr coordinate(int i) const;
  ScalarExpr constant(const Rational& value) const;
  ScalarExpr constant(long num, long den = 1) const;
  ScalarExpr zero() const;
  ScalarExpr one() const;

  // Registers `nonzero` as required nonvanishing on the working domain.
  void add_constraint(const ScalarExpr& nonzero);
  std::vector<ScalarExpr> constraints() const;

  // Charts are compatible when they list the same coordinate names.
  bool compatible(const Chart& other) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  friend class ScalarExpr;
};

// Threshold below which a domain constraint counts as violated.
inline constexpr double kSingularityThreshold = 1e-6;

// Tolerance for the sampling-based zero test.
inline constexpr double kZeroSampleTolerance = 1e-9;

// Number of sample points used by the probabilistic zero test.
inline constexpr int kZeroSampleCount = 64;

class Point {
 public:
  static Point rationals(std::vector<Rational> coords);
  static Point doubles(std::vector<double> coords);

  int dim() const { return static_cast<int>(approx_.size()); }
  bool exact() const { return exact_.has_value(); }
  const std::vector<Rational>& rational_coords() const;
  const std::vector<double>& coords() const { return approx_; }
  double coord(int i) const { return approx_[static_cast<std::size_t>(i)]; }
  std::string str() const;

 private:
  Point() = default;
  std::optional<std::vector<Rational>> exact_;
  std::vector<double> approx_;
};

// Immutable scalar function of the chart coordinates, kept in canonical form:
// a fully expanded polynomial fraction over Q whose indeterminates are the
// coordinates and opaque sin/cos/exp atoms keyed by their canonical argument.
// Arithmetic, differentiation and printing all operate on this form, so two
// equal rational expressions compare equal structurally.
class ScalarExpr {
 public:
  ScalarExpr(const Chart& chart, const Rational& value);

  const Chart& chart() const { return chart_; }

  ScalarExpr operator-() const;
  ScalarExpr operator+(const ScalarExpr& rhs) const;
  ScalarExpr operator-(const ScalarExpr& rhs) const;
  ScalarExpr operator*(const ScalarExpr& rhs) const;
  ScalarExpr operator/(const ScalarExpr& rhs) const;  // throws DivisionByZeroError
  ScalarExpr& operator+=(const ScalarExpr& rhs);
  ScalarExpr& operator-=(const ScalarExpr& rhs);
  ScalarExpr& operator*=(const ScalarExpr& rhs);

  ScalarExpr operator*(const Rational& c) const;
  friend ScalarExpr operator*(const Rational& c, const ScalarExpr& e) { return e * c; }

  ScalarExpr pow(int exponent) const;

  // Exact partial derivative with respect to coordinate i.
  ScalarExpr derivative(int i) const;

  bool is_structural_zero() const;
  bool is_one() const;
  std::optional<Rational> as_rational() const;  // set when the expression is constant
  bool is_polynomial() const;                   // trivial denominator
  bool has_transcendental() const;

  ScalarExpr numerator() const;
  ScalarExpr denominator() const;

  // Canonical printing; parse(str()) reproduces the same canonical form.
  std::string str() const;

  // Raw evaluation (no domain-constraint checking).
  double eval(std::span<const double> coords) const;
  double eval(const Point& p) const { return eval(std::span<const double>(p.coords())); }
  // Exact evaluation; throws Error if a sin/cos/exp atom is present.
  Rational eval_rational(std::span<const Rational> coords) const;

  // Semantic equality (cross-multiplied exact comparison).
  bool operator==(const ScalarExpr& rhs) const;
  bool operator!=(const ScalarExpr& rhs) const { return !(*this == rhs); }

  // Deterministic total order on the canonical representation.
  int cmp(const ScalarExpr& rhs) const;

 private:
  ScalarExpr(Chart chart, detail::RatFuncPtr rep);
  Chart chart_;
  detail::RatFuncPtr rep_;

  friend class Chart;
  friend ScalarExpr parse(std::string_view, const Chart&);
  friend ScalarExpr sin(const ScalarExpr&);
  friend ScalarExpr cos(const ScalarExpr&);
  friend ScalarExpr exp(const ScalarExpr&);
  friend std::optional<ScalarExpr> exact_divide(const ScalarExpr&, const ScalarExpr&);
};

ScalarExpr sin(const ScalarExpr& e);
ScalarExpr cos(const ScalarExpr& e);
ScalarExpr exp(const ScalarExpr& e);

// Parses `text` against the chart's coordinates. Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' integer)?
//   base   := rational | identifier | func '(' expr ')' | '(' expr ')' | '-' base
//   func   := 'sin'|'cos'|'exp'
//   rational := integer ('/' positive-integer)? | decimal
// Whitespace is insignificant; decimal literals become exact rationals.
ScalarExpr parse(std::string_view text, const Chart& chart);

// Exact polynomial division; nullopt unless both operands are polynomial and
// the division is exact.
std::optional<ScalarExpr> exact_divide(const ScalarExpr& a, const ScalarExpr& b);

enum class ZeroStatus { ExactZero, ProbablyZero, NonZero };

std::string_view to_string(ZeroStatus s);

struct ZeroCheck {
  ZeroStatus status = ZeroStatus::ExactZero;
  bool exact_path = false;           // decided by canonical expansion
  std::optional<Point> witness;      // populated for NonZero
  double witness_value = 0.0;
};

// Zero test: the rational fragment is decided exactly by canonical expansion;
// expressions containing sin/cos/exp are sampled at kZeroSampleCount rational
// points of [-1,1]^dim that respect the chart's domain constraints.
ZeroCheck is_zero(const ScalarExpr& e, std::uint64_t seed = 0);

// Spec-facing evaluation: checks domain constraints at p, then returns an
// exact rational when p is exact and e is sin/cos/exp-free, a double otherwise.
std::variant<Rational, double> evaluate(const ScalarExpr& e, const Point& p);

}  // namespace tjm
