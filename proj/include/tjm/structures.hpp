#pragma once

#include <cstdint>

#include "tjm/jacobi.hpp"

namespace tjm {

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Twisted contact input: a 1-form theta and a 2-form omega on an odd chart
// with theta ^ (d theta + omega)^n nowhere zero on the working domain.
struct TwistedContactData {
  Chart chart;
  DiffForm theta;
  DiffForm omega;

  TwistedContactData(Chart chart_, DiffForm theta_, DiffForm omega_);
};

// Twisted locally conformal symplectic input: nondegenerate 2-form big_theta,
// closed 1-form theta and a 2-form omega on an even chart with
// d(big_theta - omega) + theta ^ (big_theta - omega) = 0.
struct TwistedLcsData {
  Chart chart;
  DiffForm big_theta;
  DiffForm theta;
  DiffForm omega;

  TwistedLcsData(Chart chart_, DiffForm big_theta_, DiffForm theta_, DiffForm omega_);
};

// Builds (Lambda, E, omega) from twisted contact data: E solves
// <theta,E> = 1, i(E)(d theta + omega) = 0; Lambda^#(dx_i) solves
// i(v)(d theta + omega) = -(dx_i - <dx_i,E> theta) with <theta,v> = 0.
// The nondegeneracy coefficient is recorded as a chart domain constraint and
// the result is gated on verify_structure.
TwistedJacobiStructure from_twisted_contact(const TwistedContactData& data,
                                            std::uint64_t seed = 0);

// Builds (Lambda, E, omega) from twisted LCS data: Lambda inverts big_theta
// with the convention i(Lambda^# a)(big_theta) = -a, and E = Lambda^#(theta).
// det(big_theta) is recorded as a chart domain constraint; gated on
// verify_structure.
TwistedJacobiStructure from_twisted_lcs(const TwistedLcsData& data, std::uint64_t seed = 0);

enum class ReductionKind { Poisson, Jacobi, TwistedPoisson, None };

std::string_view to_string(ReductionKind k);

// E = 0 and omega = 0 -> Poisson; E = 0 -> TwistedPoisson; omega = 0 ->
// Jacobi; otherwise None. Zero-ness is decided by the zero test (NonZero
// disqualifies).
ReductionKind recognize_reduction(const TwistedJacobiStructure& s, std::uint64_t seed = 0);

// [Lambda,Lambda] - 2 Lambda#(d omega): what R2 reduces to when E = 0.
Multivector twisted_poisson_residual(const TwistedJacobiStructure& s);

}  // namespace tjm
