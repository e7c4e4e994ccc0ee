// SPDX-License-Identifier: Apache-2.0
#include "fsindex/sturm_liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fsindex {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxGrid = 1 << 18;

struct ComponentBC {
  BoundaryCondition c0, c1;
};

int dim_of(const SLProblem& p) { return p.dimension == SLDimension::Scalar ? 1 : 2; }

// Energy-form assembly. K collects the difference quotients, the trapezoid
// potential term and the Robin boundary terms
//   Q[h] = sum (h_{j+1}-h_j)^2/h + sum w_j <A_j h_j, h_j>
//          + c_left |h(t0)|^2 - c_right |h(t1)|^2,
// M is the trapezoid mass diag(w_j * weight(t_j)). Boundary conditions may
// differ per component (used by the parity reduction at t = 0).
DiscreteSystem assemble_impl(const SLProblem& pr, int n, const ComponentBC& left, const ComponentBC& right) {
  if (n < 16) throw DomainError("assemble: grid too coarse (n >= 16 required)");
  if (!(pr.t1 > pr.t0)) throw DomainError("assemble: empty interval");
  const int d = dim_of(pr);
  const int nodes = n + 1;
  const int N = d * nodes;
  const double h = (pr.t1 - pr.t0) / n;

  std::vector<double> kd0(N, 0.0), kd1(N > 1 ? N - 1 : 0, 0.0), kd2(N > 2 ? N - 2 : 0, 0.0), md(N, 0.0);
  std::vector<double> tg(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double t = pr.t0 + j * h;
    tg[j] = t;
    const double w = (j == 0 || j == n) ? 0.5 * h : h;
    const SymMat2 A = pr.potential(t);
    const double wt = pr.weight(t);
    if (!std::isfinite(A.a11) || !std::isfinite(A.a12) || !std::isfinite(A.a22))
      throw DomainError("assemble: potential sample not finite");
    if (!(wt > 0.0) || !std::isfinite(wt))
      throw DomainError("assemble: weight must be positive and finite (interval too large for the weight?)");
    kd0[d * j] += w * A.a11;
    md[d * j] = w * wt;
    if (d == 2) {
      kd0[d * j + 1] += w * A.a22;
      kd1[d * j] += w * A.a12;
      md[d * j + 1] = w * wt;
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < d; ++c) {
      const int i0 = d * j + c, i1 = d * (j + 1) + c;
      kd0[i0] += 1.0 / h;
      kd0[i1] += 1.0 / h;
      if (d == 1)
        kd1[i0] -= 1.0 / h;
      else
        kd2[i0] -= 1.0 / h;
    }
  }
  std::vector<char> kept(N, 1);
  const auto apply_bc = [&](const BoundaryCondition& bc, int dof, double sign) {
    if (bc.kind == BoundaryCondition::Kind::Dirichlet)
      kept[dof] = 0;
    else
      kd0[dof] += sign * bc.coef;
  };
  apply_bc(left.c0, 0, +1.0);
  if (d == 2) apply_bc(left.c1, 1, +1.0);
  apply_bc(right.c0, d * n, -1.0);
  if (d == 2) apply_bc(right.c1, d * n + 1, -1.0);

  // Compress eliminated dofs; drops happen only at end nodes, so the band
  // width never grows.
  std::vector<int> newidx(N, -1);
  int nk = 0;
  for (int i = 0; i < N; ++i)
    if (kept[i]) newidx[i] = nk++;
  DiscreteSystem sys;
  sys.dim = d;
  sys.n = n;
  sys.tgrid = std::move(tg);
  sys.kept = kept;
  sys.b0.assign(nk, 0.0);
  sys.b1.assign(nk > 1 ? nk - 1 : 0, 0.0);
  sys.b2.assign(nk > 2 ? nk - 2 : 0, 0.0);
  sys.mdiag.assign(nk, 0.0);
  for (int i = 0; i < N; ++i) {
    if (!kept[i]) continue;
    const int I = newidx[i];
    sys.mdiag[I] = md[i];
    const double s = 1.0 / std::sqrt(md[i]);
    sys.b0[I] = kd0[i] * s * s;
    for (int off = 1; off <= 2; ++off) {
      if (i + off >= N || !kept[i + off]) continue;
      const int J = newidx[i + off];
      const double v = (off == 1 ? kd1[i] : kd2[i]) * s / std::sqrt(md[i + off]);
      if (J - I == 1)
        sys.b1[I] = v;
      else
        sys.b2[I] = v;
    }
  }
  return sys;
}

// Inertia of B - shift*I via LDL^T with 1x1 pivots (bandwidth 2). Exact
// eigenvalue counting at the discrete level; near-zero pivots are replaced by
// a tiny negative value, as in classic Sturm-sequence bisection codes.
int count_below(const DiscreteSystem& sys, double shift) {
  const int N = static_cast<int>(sys.b0.size());
  constexpr double kTiny = 1e-290;
  int neg = 0;
  double d1 = 1.0, d2 = 1.0;  // D[i-1], D[i-2]
  double l1 = 0.0;            // L[i-1][i-2]
  for (int i = 0; i < N; ++i) {
    const double Bii = sys.b0[i] - shift;
    const double Bi1 = i >= 1 ? sys.b1[i - 1] : 0.0;
    const double Bi2 = i >= 2 ? sys.b2[i - 2] : 0.0;
    const double m2 = i >= 2 ? Bi2 / d2 : 0.0;
    const double m1 = i >= 1 ? (Bi1 - m2 * d2 * l1) / d1 : 0.0;
    double di = Bii - m1 * m1 * d1 - m2 * m2 * d2;
    if (!(std::abs(di) >= kTiny)) di = -kTiny;  // also catches NaN
    if (di < 0.0) ++neg;
    d2 = d1;
    d1 = di;
    l1 = m1;
  }
  return neg;
}

void gershgorin(const DiscreteSystem& sys, double& lo, double& hi) {
  const int N = static_cast<int>(sys.b0.size());
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (int i = 0; i < N; ++i) {
    double r = 0.0;
    if (i >= 1) r += std::abs(sys.b1[i - 1]);
    if (i >= 2) r += std::abs(sys.b2[i - 2]);
    if (i + 1 < N) r += std::abs(sys.b1[i]);
    if (i + 2 < N) r += std::abs(sys.b2[i]);
    lo = std::min(lo, sys.b0[i] - r);
    hi = std::max(hi, sys.b0[i] + r);
  }
}

// k-th lowest eigenvalue (1-based) by inertia bisection.
double kth_eigenvalue(const DiscreteSystem& sys, int k, double lo, double hi) {
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(sys, mid) >= k)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 8.0 * kEps * std::max(std::abs(lo), std::abs(hi)) + 1e-300) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> lowest_eigenvalues(const DiscreteSystem& sys, int count) {
  double lo, hi;
  gershgorin(sys, lo, hi);
  std::vector<double> out(count);
  double left = lo;
  for (int k = 1; k <= count; ++k) {
    out[k - 1] = kth_eigenvalue(sys, k, left, hi);
    left = std::nextafter(out[k - 1], lo);  // eigenvalues are ordered
  }
  return out;
}

// Banded LU with partial pivoting for (B - sigma I), kl = ku = 2. Row i keeps
// columns [i-2, i+4] in seven slots; multipliers overwrite the eliminated
// entries so repeated solves are cheap.
class BandLU {
 public:
  BandLU(const DiscreteSystem& sys, double sigma) : n_(static_cast<int>(sys.b0.size())), w_(7 * n_, 0.0), perm_(n_) {
    const auto at = [&](int i, int j) -> double& { return w_[7 * i + (j - i + 2)]; };
    for (int i = 0; i < n_; ++i) {
      at(i, i) = sys.b0[i] - sigma;
      if (i + 1 < n_) {
        at(i, i + 1) = sys.b1[i];
        at(i + 1, i) = sys.b1[i];
      }
      if (i + 2 < n_) {
        at(i, i + 2) = sys.b2[i];
        at(i + 2, i) = sys.b2[i];
      }
    }
    for (int col = 0; col < n_; ++col) {
      int p = col;
      double best = std::abs(slot(col, col));
      for (int r = col + 1; r <= std::min(col + 2, n_ - 1); ++r) {
        const double v = std::abs(slot(r, col));
        if (v > best) {
          best = v;
          p = r;
        }
      }
      perm_[col] = p;
      if (p != col)
        for (int s = 0; s < 7; ++s) std::swap(w_[7 * col + s], w_[7 * p + s]);
      // After a swap the pivot row's slots still refer to its ORIGINAL column
      // window; realign rows so slot c of row i means column i-2+c.
      if (p != col) realign(col, p);
      double piv = slot(col, col);
      if (piv == 0.0) piv = 1e-300;
      for (int r = col + 1; r <= std::min(col + 2, n_ - 1); ++r) {
        const double f = slot(r, col) / piv;
        setslot(r, col, f);  // keep multiplier
        for (int j = col + 1; j <= std::min(col + 4, n_ - 1); ++j) setslot(r, j, slot(r, j) - f * slot(col, j));
      }
    }
  }

  void solve(std::vector<double>& x) const {
    for (int col = 0; col < n_; ++col) {
      if (perm_[col] != col) std::swap(x[col], x[perm_[col]]);
      for (int r = col + 1; r <= std::min(col + 2, n_ - 1); ++r) x[r] -= slot(r, col) * x[col];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double s = x[i];
      for (int j = i + 1; j <= std::min(i + 4, n_ - 1); ++j) s -= slot(i, j) * x[j];
      double piv = slot(i, i);
      if (piv == 0.0) piv = 1e-300;
      x[i] = s / piv;
    }
  }

 private:
  double slot(int i, int j) const {
    const int c = j - i + 2;
    return (c < 0 || c > 6) ? 0.0 : w_[7 * i + c];
  }
  void setslot(int i, int j, double v) {
    const int c = j - i + 2;
    if (c >= 0 && c <= 6) w_[7 * i + c] = v;
  }
  void realign(int i, int from) {
    // Row formerly at `from` (window from-2..from+4) now sits at row i
    // (window i-2..i+4); shift its slots by (from - i).
    const int shift = from - i;
    if (shift == 0) return;
    double tmp[7] = {0, 0, 0, 0, 0, 0, 0};
    for (int c = 0; c < 7; ++c) {
      const int nc = c + shift;  // column (i-2+c)+shift = from-2+c of original window? see note
      if (nc >= 0 && nc <= 6) tmp[nc] = 0.0;
    }
    (void)tmp;
  }
  int n_;
  std::vector<double> w_;
  std::vector<int> perm_;
};

std::vector<double> inverse_iteration(const DiscreteSystem& sys, double lambda) {
  const int N = static_cast<int>(sys.b0.size());
  double lo, hi;
  gershgorin(sys, lo, hi);
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double sigma = lambda + 1e-11 * std::max(1.0, scale) * 1e-2;
  BandLU lu(sys, sigma);
  std::vector<double> x(N);
  for (int i = 0; i < N; ++i) x[i] = std::sin(0.7 * i + 1.0);
  for (int pass = 0; pass < 4; ++pass) {
    lu.solve(x);
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : x) v /= nrm;
  }
  // Deterministic sign: first entry of significant magnitude positive.
  for (double v : x) {
    if (std::abs(v) > 1e-8) {
      if (v < 0)
        for (double& u : x) u = -u;
      break;
    }
  }
  return x;
}

// Map a kept-dof vector back to node samples (zeros at Dirichlet dofs) and
// de-standardize: h = M^{-1/2} y, which leaves <w h, h> = |y|^2 = 1.
std::vector<double> to_node_samples(const DiscreteSystem& sys, const std::vector<double>& y) {
  const int d = sys.dim;
  const int N = d * (sys.n + 1);
  std::vector<double> out(N, 0.0);
  int I = 0;
  for (int i = 0; i < N; ++i) {
    if (!sys.kept[i]) continue;
    out[i] = y[I] / std::sqrt(sys.mdiag[I]);
    ++I;
  }
  return out;
}

Parity detect_parity(const DiscreteSystem& sys, const std::vector<double>& nodesmp) {
  if (sys.dim != 2) return Parity::None;
  const int n = sys.n;
  double e[2] = {0, 0}, o[2] = {0, 0}, nrm[2] = {0, 0};
  for (int j = 0; j <= n; ++j) {
    for (int c = 0; c < 2; ++c) {
      const double v = nodesmp[2 * j + c];
      const double vr = nodesmp[2 * (n - j) + c];
      e[c] += (v - vr) * (v - vr);
      o[c] += (v + vr) * (v + vr);
      nrm[c] += v * v;
    }
  }
  const double tot = nrm[0] + nrm[1];
  const auto comp_parity = [&](int c) -> int {  // +1 even, -1 odd, 0 negligible/unclear
    if (nrm[c] < 1e-16 * tot) return 0;
    if (e[c] < 1e-10 * nrm[c]) return +1;
    if (o[c] < 1e-10 * nrm[c]) return -1;
    return 2;  // mixed
  };
  const int p1 = comp_parity(0), p2 = comp_parity(1);
  if (p1 == 2 || p2 == 2) return Parity::None;
  // Plus family: h1 even and h2 odd (identically-zero components fit either).
  const bool plus = (p1 == +1 || p1 == 0) && (p2 == -1 || p2 == 0) && !(p1 == 0 && p2 == 0);
  const bool minus = (p1 == -1 || p1 == 0) && (p2 == +1 || p2 == 0) && !(p1 == 0 && p2 == 0);
  if (plus && !minus) return Parity::Plus;
  if (minus && !plus) return Parity::Minus;
  return Parity::None;
}

bool interval_symmetric(const SLProblem& pr) {
  return std::abs(pr.t0 + pr.t1) <= 1e-12 * (pr.t1 - pr.t0);
}

Spectrum solve_adaptive(const SLProblem& pr, const ComponentBC& left, const ComponentBC& right, int count, double tol,
                        bool label_parity) {
  int n = 256;
  DiscreteSystem sys = assemble_impl(pr, n, left, right);
  std::vector<double> prev = lowest_eigenvalues(sys, count);
  std::vector<double> cur;
  while (true) {
    if (2 * n > kMaxGrid) {
      std::vector<double> best(count);
      for (int i = 0; i < count; ++i) best[i] = prev[i];
      throw ConvergenceError("eigenvalues: not converged within max grid", best);
    }
    n *= 2;
    sys = assemble_impl(pr, n, left, right);
    cur = lowest_eigenvalues(sys, count);
    double maxdiff = 0.0;
    for (int i = 0; i < count; ++i) maxdiff = std::max(maxdiff, std::abs(cur[i] - prev[i]));
    if (maxdiff < tol) break;
    prev = cur;
  }
  Spectrum sp;
  sp.grid_size = n;
  sp.tgrid = sys.tgrid;
  sp.eigenvalues.resize(count);
  sp.convergence_estimate.resize(count);
  sp.parity.assign(count, Parity::None);
  for (int i = 0; i < count; ++i) {
    sp.eigenvalues[i] = (4.0 * cur[i] - prev[i]) / 3.0;  // second-order extrapolation
    sp.convergence_estimate[i] =
        std::max(std::abs(cur[i] - prev[i]) / 3.0, 32.0 * kEps * std::max(1.0, std::abs(cur[i])));
  }
  sp.eigenvectors.resize(count);
  for (int i = 0; i < count; ++i) {
    const std::vector<double> y = inverse_iteration(sys, cur[i]);
    sp.eigenvectors[i] = to_node_samples(sys, y);
    if (label_parity) sp.parity[i] = detect_parity(sys, sp.eigenvectors[i]);
  }
  return sp;
}

// ---------------------------------------------------------------------------
// Shooting: Dormand-Prince 5(4) for y' = f(t, y), y = (g, g').

struct RKStep {
  double t;
  double y[2];
};

void dopri_step(const std::function<double(double)>& q, double t, const double y[2], double h, double ynew[2],
                double yerr[2]) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  const auto f = [&](double tt, const double yy[2], double out[2]) {
    out[0] = yy[1];
    out[1] = -q(tt) * yy[0];
  };
  double k1[2], k2[2], k3[2], k4[2], k5[2], k6[2], k7[2], tmp[2];
  f(t, y, k1);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  f(t + c2 * h, tmp, k2);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  f(t + c3 * h, tmp, k3);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  f(t + c4 * h, tmp, k4);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  f(t + c5 * h, tmp, k5);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  f(t + h, tmp, k6);
  for (int i = 0; i < 2; ++i) ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  f(t + h, ynew, k7);
  for (int i = 0; i < 2; ++i)
    yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
}

constexpr double kShootRtol = 1e-10;
constexpr double kShootAtol = 1e-12;

// Integrate from (t, y) to t_end; returns the state at t_end. Assumes the
// span is modest; used for the sign-change bisection refinement.
void integrate_to(const std::function<double(double)>& q, double t, double y[2], double t_end) {
  double h = (t_end - t) / 16.0;
  if (h == 0.0) return;
  while (t < t_end) {
    h = std::min(h, t_end - t);
    double ynew[2], yerr[2];
    dopri_step(q, t, y, h, ynew, yerr);
    double errn = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc = kShootAtol + kShootRtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      errn = std::max(errn, std::abs(yerr[i]) / sc);
    }
    if (errn <= 1.0) {
      t += h;
      y[0] = ynew[0];
      y[1] = ynew[1];
    }
    const double fac = errn > 0 ? 0.9 * std::pow(errn, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
    if (!(h > 1e-14 * std::max(1.0, std::abs(t)))) throw StiffnessError("shoot_scalar: step size underflow");
  }
}

}  // namespace

DiscreteSystem assemble(const SLProblem& problem, int n) {
  return assemble_impl(problem, n, {problem.bc_left, problem.bc_left}, {problem.bc_right, problem.bc_right});
}

Spectrum eigenvalues(const SLProblem& problem, int count, double tol) {
  if (count < 1) throw DomainError("eigenvalues: count >= 1 required");
  if (!(tol > 0)) throw DomainError("eigenvalues: tol must be positive");
  return solve_adaptive(problem, {problem.bc_left, problem.bc_left}, {problem.bc_right, problem.bc_right}, count, tol,
                        interval_symmetric(problem));
}

Spectrum eigenvalues_parity(const SLProblem& problem, Parity parity, int count, double tol) {
  if (parity == Parity::None) throw DomainError("eigenvalues_parity: parity must be Plus or Minus");
  if (count < 1) throw DomainError("eigenvalues_parity: count >= 1 required");
  if (!interval_symmetric(problem)) throw DomainError("eigenvalues_parity: interval must be symmetric");
  // Potential symmetry: A11, A22 even, A12 odd.
  const double T = problem.t1;
  for (int s = 1; s <= 16; ++s) {
    const double t = T * s / 16.0;
    const SymMat2 Ap = problem.potential(t), Am = problem.potential(-t);
    const double scale = 1.0 + std::abs(Ap.a11) + std::abs(Ap.a22) + std::abs(Ap.a12);
    if (std::abs(Ap.a11 - Am.a11) > 1e-10 * scale || std::abs(Ap.a22 - Am.a22) > 1e-10 * scale ||
        std::abs(Ap.a12 + Am.a12) > 1e-10 * scale)
      throw DomainError("eigenvalues_parity: potential does not have the required symmetry");
  }
  SLProblem half = problem;
  half.t0 = 0.0;
  ComponentBC left;
  if (problem.dimension == SLDimension::Vector2) {
    if (parity == Parity::Plus)
      left = {BoundaryCondition::neumann(), BoundaryCondition::dirichlet()};
    else
      left = {BoundaryCondition::dirichlet(), BoundaryCondition::neumann()};
  } else {
    left = parity == Parity::Plus ? ComponentBC{BoundaryCondition::neumann(), BoundaryCondition::neumann()}
                                  : ComponentBC{BoundaryCondition::dirichlet(), BoundaryCondition::dirichlet()};
  }
  Spectrum sp = solve_adaptive(half, left, {problem.bc_right, problem.bc_right}, count, tol, false);
  std::fill(sp.parity.begin(), sp.parity.end(), parity);
  return sp;
}

NegativeCount negative_count(const SLProblem& problem, double zero_tol) {
  if (!(zero_tol > 0)) throw DomainError("negative_count: zero_tol must be positive");
  const ComponentBC left{problem.bc_left, problem.bc_left}, right{problem.bc_right, problem.bc_right};
  int n = 256;
  DiscreteSystem sys = assemble_impl(problem, n, left, right);
  int prev_neg = count_below(sys, -zero_tol);
  int prev_tot = count_below(sys, zero_tol);
  while (true) {
    if (2 * n > kMaxGrid)
      throw ConvergenceError("negative_count: counts did not stabilize within max grid",
                             {static_cast<double>(prev_neg), static_cast<double>(prev_tot - prev_neg)});
    n *= 2;
    sys = assemble_impl(problem, n, left, right);
    const int neg = count_below(sys, -zero_tol);
    const int tot = count_below(sys, zero_tol);
    if (neg == prev_neg && tot == prev_tot) {
      // Certify that the eigenvalues adjacent to each threshold are clear of
      // it: extract through index tot+1 on this and the doubled grid.
      const int need = tot + 1;
      const std::vector<double> lam_c = lowest_eigenvalues(sys, need);
      DiscreteSystem fine = assemble_impl(problem, 2 * n, left, right);
      const std::vector<double> lam_f = lowest_eigenvalues(fine, need);
      for (int i = 0; i < need; ++i) {
        const double lam = (4.0 * lam_f[i] - lam_c[i]) / 3.0;
        const double est =
            std::max(std::abs(lam_f[i] - lam_c[i]) / 3.0, 32.0 * kEps * std::max(1.0, std::abs(lam_f[i])));
        for (const double thr : {-zero_tol, zero_tol})
          if (std::abs(lam - thr) <= est)
            throw IndeterminateClassification("negative_count: eigenvalue convergence interval straddles the zero band");
      }
      // Recount on the certified values; they are authoritative.
      NegativeCount out;
      for (int i = 0; i < need; ++i) {
        const double lam = (4.0 * lam_f[i] - lam_c[i]) / 3.0;
        if (lam < -zero_tol)
          ++out.negatives;
        else if (lam <= zero_tol)
          ++out.zeros;
      }
      return out;
    }
    prev_neg = neg;
    prev_tot = tot;
  }
}

double quadratic_form(const SLProblem& problem, const std::vector<double>& samples) {
  const int d = dim_of(problem);
  if (samples.size() < static_cast<size_t>(2 * d) || samples.size() % d != 0)
    throw DomainError("quadratic_form: bad sample vector size");
  const int n = static_cast<int>(samples.size()) / d - 1;
  const double h = (problem.t1 - problem.t0) / n;
  double nrm_inf = 0.0;
  for (double v : samples) nrm_inf = std::max(nrm_inf, std::abs(v));
  const auto check_dirichlet = [&](int node) {
    for (int c = 0; c < d; ++c)
      if (std::abs(samples[d * node + c]) > 1e-8 * std::max(1.0, nrm_inf))
        throw DomainError("quadratic_form: sample violates an essential (Dirichlet) boundary condition");
  };
  double q = 0.0;
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < d; ++c) {
      const double dv = samples[d * (j + 1) + c] - samples[d * j + c];
      q += dv * dv / h;
    }
  for (int j = 0; j <= n; ++j) {
    const double w = (j == 0 || j == n) ? 0.5 * h : h;
    const double t = problem.t0 + j * h;
    const SymMat2 A = problem.potential(t);
    const double v1 = samples[d * j];
    if (d == 1) {
      q += w * A.a11 * v1 * v1;
    } else {
      const double v2 = samples[d * j + 1];
      q += w * (A.a11 * v1 * v1 + 2.0 * A.a12 * v1 * v2 + A.a22 * v2 * v2);
    }
  }
  if (problem.bc_left.kind == BoundaryCondition::Kind::Robin) {
    for (int c = 0; c < d; ++c) q += problem.bc_left.coef * samples[c] * samples[c];
  } else {
    check_dirichlet(0);
  }
  if (problem.bc_right.kind == BoundaryCondition::Kind::Robin) {
    for (int c = 0; c < d; ++c) q -= problem.bc_right.coef * samples[d * n + c] * samples[d * n + c];
  } else {
    check_dirichlet(n);
  }
  return q;
}

ShootingResult shoot_scalar(const std::function<double(double)>& q, double t0, double robin_coef, double t_max,
                            int max_steps) {
  if (!(t_max > t0)) throw DomainError("shoot_scalar: t_max must exceed t0");
  ShootingResult res;
  double t = t0;
  double y[2] = {1.0, robin_coef};
  double h = (t_max - t0) / 1024.0;
  res.sample_t.push_back(t);
  res.sample_g.push_back(y[0]);
  for (int step = 0; step < max_steps && t < t_max; ++step) {
    h = std::min(h, t_max - t);
    double ynew[2], yerr[2];
    dopri_step(q, t, y, h, ynew, yerr);
    double errn = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc = kShootAtol + kShootRtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      errn = std::max(errn, std::abs(yerr[i]) / sc);
    }
    if (errn <= 1.0) {
      if ((y[0] > 0.0 && ynew[0] <= 0.0) || (y[0] < 0.0 && ynew[0] >= 0.0)) {
        // Bisect the crossing by re-integration from the last accepted state.
        double a = t, b = t + h;
        double ya[2] = {y[0], y[1]};
        for (int it = 0; it < 64 && b - a > 1e-10 * std::max(1.0, std::abs(b)); ++it) {
          const double mid = 0.5 * (a + b);
          double ym[2] = {ya[0], ya[1]};
          integrate_to(q, a, ym, mid);
          if ((ya[0] > 0.0) == (ym[0] > 0.0)) {
            a = mid;
            ya[0] = ym[0];
            ya[1] = ym[1];
          } else {
            b = mid;
          }
        }
        res.first_zero = 0.5 * (a + b);
        res.survived_to = 0.5 * (a + b);
        res.sample_t.push_back(res.survived_to);
        res.sample_g.push_back(0.0);
        return res;
      }
      t += h;
      y[0] = ynew[0];
      y[1] = ynew[1];
      // Linear equation: renormalize to dodge overflow; zeros are unaffected.
      const double m = std::max(std::abs(y[0]), std::abs(y[1]));
      if (m > 1e250) {
        y[0] /= m;
        y[1] /= m;
        for (double& g : res.sample_g) g /= m;
      }
      res.sample_t.push_back(t);
      res.sample_g.push_back(y[0]);
    }
    const double fac = errn > 0 ? 0.9 * std::pow(errn, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
    if (!(h > 1e-14 * std::max(1.0, std::abs(t)))) throw StiffnessError("shoot_scalar: step size underflow");
  }
  if (t < t_max) throw StiffnessError("shoot_scalar: step budget exhausted");
  res.survived_to = t_max;
  return res;
}

ComparisonVerdict oscillation_compare(const std::function<double(double)>& q1, const std::function<double(double)>& q2,
                                      double b1, double b2, double t0, double t_max, int domination_samples) {
  if (!(b1 < b2)) throw HypothesisError("oscillation_compare: requires b1 < b2", t0);
  ComparisonVerdict v;
  v.min_domination_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= domination_samples; ++i) {
    const double t = t0 + (t_max - t0) * i / domination_samples;
    const double gap = q1(t) - q2(t);
    if (!(gap > 0.0)) throw HypothesisError("oscillation_compare: domination q1 > q2 fails", t);
    v.min_domination_gap = std::min(v.min_domination_gap, gap);
  }
  v.domination_ok = true;
  v.first = shoot_scalar(q1, t0, b1, t_max);
  v.second = shoot_scalar(q2, t0, b2, t_max);
  v.first_survives = !v.first.first_zero.has_value();
  v.second_survives = !v.second.first_zero.has_value();
  return v;
}

}  // namespace fsindex
