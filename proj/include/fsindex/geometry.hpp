// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "fsindex/surface_pair.hpp"

namespace fsindex {

/// Which of the two explicit parametrizations to evaluate: the integer-pair
/// form u_{k,l}(t, theta) or the rescaled single-rational form u_p(t, theta)
/// (t -> t/l, theta -> theta/l).
enum class Parametrization { IntegerPair, Rational };

/// Free-boundary neck data for one surface.
///
/// T is the unique positive root of k*tanh(k t) = l*coth(l t) (equivalently,
/// in the rational form with k = p, l = 1, of p*tanh(p t) = coth(t));
/// r normalizes the immersion so the boundary circles lie on the unit sphere;
/// rho_T is the boundary value of the conformal factor. The identity
/// rho(T) = l*coth(l T) holds exactly on the root.
struct NeckData {
  double T = 0;
  double r = 0;
  double rho_T = 0;
};

/// Evaluators for the conformal factor rho and the Jacobi-operator
/// coefficients a, b, c of one surface. Valid for both parametrizations: the
/// rational form is the (kk, ll) = (p, 1) instance.
///
/// All values are computed from ratios of exponentially rescaled hyperbolic
/// products, so they stay finite for arguments far beyond the naive
/// cosh-overflow threshold. The weight rho(t)^2 itself grows like e^{2 kk t}
/// and does overflow eventually; rho2() reports that through is_finite.
class CoefficientSet {
 public:
  CoefficientSet(double kk, double ll, double r_squared);

  double rho(double t) const;
  double rho2(double t) const;
  double a(double t) const;  // even, a(t) > c(t)
  double b(double t) const;  // odd, b(t) -> +-ll as t -> +-inf
  double c(double t) const;  // even

  /// Entries of the separated 2x2 potential
  ///   A(m,t) = [ b^2 + m^2 - 2a^2,  -2mb; -2mb,  b^2 + m^2 - 2c^2 ].
  void potential(double m, double t, double& a11, double& a12, double& a22) const;

  double kk() const { return kk_; }
  double ll() const { return ll_; }
  double r_squared() const { return r2_; }

 private:
  double kk_, ll_, r2_, prefac_;  // prefac = kk^2 ll^2 / r^2
};

/// Moving frame at a point: e1, e2 span the tangent plane, n1, n2 the normal
/// plane; all four are orthonormal in E^4.
struct Frame {
  std::array<double, 4> e1, e2, n1, n2;
};

/// Uniform (t, theta) grid, theta periodic with ntheta nodes over [0, 2*pi).
struct Grid2D {
  double t0 = -1, t1 = 1;
  int nt = 512;      // t intervals; nodes are nt + 1
  int ntheta = 256;  // theta nodes
};

/// A two-component normal section sampled on a Grid2D, stored row-major as
/// value(i_t, i_theta) = data[i_t * ntheta + i_theta].
struct SectionGrid {
  Grid2D grid;
  std::vector<double> f1, f2;
};

enum class CurvatureKind { FSCover, FS, EFS, IFSCover };

NeckData solve_neck(const SurfacePair& pair, double tol = 1e-14);
NeckData solve_neck(const Rational& p, double tol = 1e-14);

/// Root of t*tanh(t) = 1, the threshold constant of the exterior-stability
/// inequality chain.
double solve_t_infinity(double tol = 1e-14);

CoefficientSet coefficients(const SurfacePair& pair, const NeckData& neck);
CoefficientSet coefficients(const Rational& p, const NeckData& neck);

/// The explicit minimal immersion u(t, theta) into E^4. Satisfies
/// |u(+-T, theta)| = 1. Components grow like cosh(k t); far outside the
/// neck region they can exceed double range, which is inherent to the value.
std::array<double, 4> immersion(const SurfacePair& pair, const NeckData& neck, double t, double theta,
                                Parametrization param = Parametrization::IntegerPair);

/// Orthonormal frame (e1, e2, n1, n2); e1 = u_theta / rho, e2 = u_t / rho.
/// On the boundary t = +-T, e2 is parallel to u (the surface meets the unit
/// sphere orthogonally).
Frame frame(const SurfacePair& pair, const NeckData& neck, double t, double theta);

/// Discrete Jacobi stability operator applied to a sampled normal section,
/// second-order central differences in t and theta with periodic wraparound
/// in theta. Output rows at the two t-boundary nodes are left zero (the
/// interior stencil does not reach them).
SectionGrid jacobi_apply(const SurfacePair& pair, const NeckData& neck, const SectionGrid& section);

/// Total Gauss curvature as an exact multiple of pi (returns the integer c
/// with TC = c * pi): -4k for the orientable cover, -2k/-4k for the surface
/// itself depending on parity of k, -2k exterior, 0 for the interior cover.
int total_curvature_pi_multiple(const SurfacePair& pair, CurvatureKind kind);
double total_curvature(const SurfacePair& pair, CurvatureKind kind);

}  // namespace fsindex
