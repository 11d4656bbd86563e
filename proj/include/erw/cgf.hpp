#pragma once

// Scaled cumulant generating function of the black count,
//
//   zeta(lambda) = lim (1/N) log E exp(-lambda c_N),   lambda >= 0,
//
// at finite N from the exact law, from its first-order ODE, and in closed
// form for the linear urn; plus the Legendre transform back to the entropy.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erw/exact_dist.hpp"
#include "erw/urn_function.hpp"

namespace erw {

enum class CgfMethod { FiniteN, Ode, ClosedForm };

const char* to_string(CgfMethod m) noexcept;

struct CgfCurve {
  std::vector<double> lambda;
  std::vector<double> zeta;
  CgfMethod method = CgfMethod::Ode;
};

/// (1/N) log sum_c exp(-lambda c) P(c) from an exact table with horizon N.
CgfCurve cgf_finite_n(const DistributionTable& table, std::span<const double> lambda);

/// Runs the exact DP to `horizon` first.
CgfCurve cgf_finite_n(const UrnFunction& f, ProcessState initial, std::int64_t horizon,
                      std::span<const double> lambda);

struct CgfOdeOptions {
  /// Integration starts here (or at the largest grid value if that is larger)
  /// from the two-term expansion around zeta(inf) = log(1 - pi(0)).
  double lambda_seed = 16.0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
};

/// Solves zeta'(lambda) = -pi^{-1}(R), R = (1 - e^zeta) / (1 - e^-lambda),
/// from large lambda down to the smallest grid value. The solution that
/// stays bounded as lambda -> 0 is the one integrated; forward from small
/// lambda the homogeneous mode grows and the problem is ill-posed.
/// Requires an increasing f; raises ErrorKind::ConventionMismatch if R leaves
/// [pi(0), pi(1)] by more than 1e-8.
CgfCurve cgf_ode(const UrnFunction& f, std::span<const double> lambda,
                 const CgfOdeOptions& opts = {});

/// Linear urn, p in (1/2, 1):
///   exp(-zeta(lambda) - lambda)
///     = int_0^1 [1 - (t0 / (1 - e^-lambda v^{1/b}))^c] dv,
/// t0 = 1 - e^-lambda, b = (1-p)/(2p-1), c = 1/(2p-1), by tanh-sinh quadrature.
double cgf_closed_form_k1(double p, double lambda);

CgfCurve cgf_closed_form_k1(double p, std::span<const double> lambda);

struct LegendreCurve {
  std::vector<double> y;
  std::vector<double> phi;
  /// The infimum sat at the largest lambda: the transform is incomplete and
  /// phi is only an upper bound there.
  std::vector<bool> at_boundary;
  bool warning = false;
};

/// phi(y) = inf_{lambda >= 0} [lambda y + zeta(lambda)] over the curve's grid
/// (plus lambda = 0), refined by a parabola through the discrete minimum.
/// Covers densities below the attractor.
LegendreCurve legendre(const CgfCurve& curve, std::span<const double> y_grid);

struct SingularityReport {
  double p = 0.0;
  /// zeta(lambda) + s lambda carries a lambda^{1/(2p-1)} term at lambda -> 0.
  double exponent = 0.0;
  bool integer_exponent = false;
  /// Order of the first derivative that diverges (or, for an integer
  /// exponent, picks up a logarithm).
  int first_singular_derivative = 0;
};

/// Linear urn with p in (1/2, 1).
SingularityReport singularity_report(double p);

struct CurvatureProbe {
  std::vector<std::int64_t> horizons;
  /// [zeta_N(2h) - 2 zeta_N(h) + zeta_N(0)] / h^2, about Var(c_N) / N.
  std::vector<double> second_difference;
  /// Least-squares slope of log second_difference against log N.
  double slope = 0.0;
};

/// Second difference of the finite-N CGF at lambda -> 0+ for increasing horizons.
CurvatureProbe cgf_curvature_probe(const UrnFunction& f, ProcessState initial,
                                   std::span<const std::int64_t> horizons, double h = 1e-4);

}  // namespace erw
