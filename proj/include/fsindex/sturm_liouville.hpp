// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fsindex/errors.hpp"

namespace fsindex {

/// One endpoint condition. The Robin coefficient is signed with the fixed
/// convention h'(end) = coef * h(end); the end it applies to (left or right)
/// is determined by which slot of the problem it occupies, so the boundary
/// sign conventions of the separated problems are encoded as data.
struct BoundaryCondition {
  enum class Kind { Dirichlet, Robin };
  Kind kind = Kind::Dirichlet;
  double coef = 0.0;

  static BoundaryCondition dirichlet() { return {Kind::Dirichlet, 0.0}; }
  static BoundaryCondition robin(double coef) { return {Kind::Robin, coef}; }
  static BoundaryCondition neumann() { return {Kind::Robin, 0.0}; }
};

struct SymMat2 {
  double a11 = 0, a12 = 0, a22 = 0;
};

enum class SLDimension { Scalar, Vector2 };
enum class Parity { Plus, Minus, None };

/// A weighted Sturm-Liouville eigenproblem
///   -h'' + A(t) h = lambda * weight(t) * h   on [t0, t1]
/// for a scalar or 2-vector function h with a boundary condition at each end.
/// `m` is the angular mode the potential was built from (metadata used for
/// multiplicity bookkeeping and symmetry checks; the potential evaluator has
/// m already bound).
struct SLProblem {
  double t0 = 0, t1 = 1;
  double m = 0;
  SLDimension dimension = SLDimension::Vector2;
  std::function<SymMat2(double)> potential;  // scalar problems use a11 only
  std::function<double(double)> weight;      // strictly positive
  BoundaryCondition bc_left, bc_right;
};

/// Discretized generalized symmetric eigensystem: second-order central
/// differences in energy form, with the diagonal mass absorbed, i.e. the
/// symmetric banded matrix B = M^{-1/2} K M^{-1/2} whose eigenvalues are the
/// discrete SL eigenvalues. Bandwidth is 1 for scalar problems and 2 for
/// 2-vector problems (components interleaved).
struct DiscreteSystem {
  int dim = 2;
  int n = 0;                    // grid intervals; nodes = n + 1
  std::vector<double> tgrid;    // node coordinates
  std::vector<char> kept;       // dof kept (Dirichlet rows eliminated)
  std::vector<double> b0, b1, b2;  // main, first, second band of B
  std::vector<double> mdiag;       // kept mass diagonal
};

struct Spectrum {
  std::vector<double> eigenvalues;           // ascending
  std::vector<double> convergence_estimate;  // per eigenvalue
  std::vector<Parity> parity;                // per eigenpair; None if undetermined
  int grid_size = 0;                         // final grid intervals
  std::vector<double> tgrid;
  std::vector<std::vector<double>> eigenvectors;  // node samples, components interleaved,
                                                  // weight-normalized <w h, h> = 1
};

struct NegativeCount {
  int negatives = 0;
  int zeros = 0;
};

struct ShootingResult {
  std::optional<double> first_zero;
  double survived_to = 0;
  std::vector<double> sample_t;  // accepted step points
  std::vector<double> sample_g;
};

struct ComparisonVerdict {
  bool domination_ok = false;
  bool first_survives = false;
  bool second_survives = false;
  double min_domination_gap = 0;  // min of q1 - q2 over the sample grid
  ShootingResult first, second;
};

/// Assembles the discrete system on n uniform intervals. Dirichlet rows are
/// eliminated; Robin ends enter through the boundary term of the quadratic
/// form, which is algebraically identical to second-order ghost-point
/// elimination and keeps the operator symmetric w.r.t. the weight inner
/// product.
DiscreteSystem assemble(const SLProblem& problem, int n);

/// Lowest `count` eigenvalues with grid doubling until successive estimates
/// differ by less than tol, then Richardson extrapolation; the per-eigenvalue
/// convergence estimate is recorded. Eigenvectors are recovered at the final
/// grid by inverse iteration. Throws ConvergenceError past 2^18 intervals.
Spectrum eigenvalues(const SLProblem& problem, int count, double tol);

/// Per-parity spectrum of a problem on a symmetric interval [-T, T] whose
/// potential satisfies A11, A22 even and A12 odd. Computed by half-interval
/// reduction on [0, T]: Plus imposes h1'(0) = 0, h2(0) = 0; Minus the
/// opposite. The union over both parities reproduces the full spectrum.
Spectrum eigenvalues_parity(const SLProblem& problem, Parity parity, int count, double tol);

/// Counts eigenvalues below -zero_tol and inside [-zero_tol, zero_tol] by
/// matrix inertia at the two shifts, grid-doubling until both counts are
/// stable and the eigenvalues adjacent to each threshold are certified clear
/// of it. Throws IndeterminateClassification when a convergence interval
/// straddles a threshold.
NegativeCount negative_count(const SLProblem& problem, double zero_tol);

/// Quadratic form Q[h] = int(|h'|^2 + <A h, h>) + Robin boundary terms for a
/// function sampled on a uniform grid of the problem interval (components
/// interleaved). The derivative term uses the piecewise-linear energy sum and
/// the potential term the trapezoid rule, matching the assembled operator.
double quadratic_form(const SLProblem& problem, const std::vector<double>& samples);

/// Integrates g'' + q g = 0, g(t0) = 1, g'(t0) = robin_coef, by adaptive
/// Dormand-Prince RK45 and reports the first sign change (bisected to 1e-10)
/// or survival to t_max. The equation is linear, so the state is renormalized
/// whenever it grows large; zeros are unaffected.
ShootingResult shoot_scalar(const std::function<double(double)>& q, double t0, double robin_coef, double t_max,
                            int max_steps = 2'000'000);

/// Sturm comparison: requires q1 > q2 on a sample grid and b1 < b2, then
/// shoots both problems; survival of the first forces survival of the second.
/// Throws HypothesisError at the first sample violating domination.
ComparisonVerdict oscillation_compare(const std::function<double(double)>& q1, const std::function<double(double)>& q2,
                                      double b1, double b2, double t0, double t_max, int domination_samples = 4096);

}  // namespace fsindex
