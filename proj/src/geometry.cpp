// SPDX-License-Identifier: Apache-2.0
#include "fsindex/geometry.hpp"

#include <cmath>
#include <limits>

#include "fsindex/errors.hpp"

namespace fsindex {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Bracketed bisection refined by safeguarded Newton for a strictly increasing
// function with f(lo) < 0 < f(hi). Stops when |f| drops below tol times the
// local derivative scale.
template <class F, class DF>
double increasing_root(F f, DF df, double lo, double hi, double tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) throw DomainError("root bracket invalid");
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    const double dfx = df(x);
    if (std::abs(fx) <= tol * std::max(dfx, 1e-300)) return x;
    if (fx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double next = x - fx / dfx;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // Newton left the bracket
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return x;
    x = next;
  }
  return x;
}

// sinh/cosh of |x| rescaled by e^{-|x|}: returns (1 -+ e^{-2|x|}) / 2.
inline double scaled_sinh(double ax) { return 0.5 * (1.0 - std::exp(-2.0 * ax)); }
inline double scaled_cosh(double ax) { return 0.5 * (1.0 + std::exp(-2.0 * ax)); }

NeckData neck_from(double kk, double ll, double tol) {
  const auto f = [&](double t) { return kk * std::tanh(kk * t) - ll / std::tanh(ll * t); };
  const auto df = [&](double t) {
    const double ch = std::cosh(kk * t), sh = std::sinh(ll * t);
    return kk * kk / (ch * ch) + ll * ll / (sh * sh);
  };
  NeckData neck;
  neck.T = increasing_root(f, df, 1e-6, 10.0, tol);
  const double sl = std::sinh(ll * neck.T), ck = std::cosh(kk * neck.T);
  neck.r = std::hypot(kk * sl, ll * ck);
  neck.rho_T = kk * ll / neck.r * std::hypot(sl, ck);
  return neck;
}

}  // namespace

NeckData solve_neck(const SurfacePair& pair, double tol) {
  if (!(tol > 0)) throw DomainError("solve_neck: tol must be positive");
  return neck_from(pair.k, pair.l, tol);
}

NeckData solve_neck(const Rational& p, double tol) {
  if (!(tol > 0)) throw DomainError("solve_neck: tol must be positive");
  return neck_from(p.value(), 1.0, tol);
}

double solve_t_infinity(double tol) {
  if (!(tol > 0)) throw DomainError("solve_t_infinity: tol must be positive");
  const auto f = [](double t) { return t * std::tanh(t) - 1.0; };
  const auto df = [](double t) {
    const double ch = std::cosh(t);
    return std::tanh(t) + t / (ch * ch);
  };
  return increasing_root(f, df, 1e-6, 10.0, tol);
}

CoefficientSet::CoefficientSet(double kk, double ll, double r_squared)
    : kk_(kk), ll_(ll), r2_(r_squared), prefac_(kk * kk * ll * ll / r_squared) {}

CoefficientSet coefficients(const SurfacePair& pair, const NeckData& neck) {
  return CoefficientSet(pair.k, pair.l, neck.r * neck.r);
}

CoefficientSet coefficients(const Rational& p, const NeckData& neck) {
  return CoefficientSet(p.value(), 1.0, neck.r * neck.r);
}

// All coefficient formulas are ratios of products of hyperbolic functions.
// With E = e^{-2 ll |t|}, F = e^{-2 kk |t|}, G = e^{-2 (kk-ll) |t|} and the
// denominator S = (1+F)^2 + G (1-E)^2 they become bounded expressions valid
// for arbitrarily large kk*t:
//   sinh^2(ll t) + cosh^2(kk t)   = e^{2 kk |t|} S / 4
//   a =  e^{-(kk-ll)|t|} [kk (1+E)(1+F) - ll (1-E)(1-F)] / S
//   c =  e^{-(kk-ll)|t|} [ll (1+E)(1+F) - kk (1-E)(1-F)] / S
//   b =  sign(t) [ll (1-F^2) + kk G (1-E^2)] / S

double CoefficientSet::a(double t) const {
  const double at = std::abs(t);
  const double E = std::exp(-2.0 * ll_ * at), F = std::exp(-2.0 * kk_ * at);
  const double G = std::exp(-2.0 * (kk_ - ll_) * at);
  const double S = (1.0 + F) * (1.0 + F) + G * (1.0 - E) * (1.0 - E);
  return std::exp(-(kk_ - ll_) * at) * (kk_ * (1.0 + E) * (1.0 + F) - ll_ * (1.0 - E) * (1.0 - F)) / S;
}

double CoefficientSet::c(double t) const {
  const double at = std::abs(t);
  const double E = std::exp(-2.0 * ll_ * at), F = std::exp(-2.0 * kk_ * at);
  const double G = std::exp(-2.0 * (kk_ - ll_) * at);
  const double S = (1.0 + F) * (1.0 + F) + G * (1.0 - E) * (1.0 - E);
  return std::exp(-(kk_ - ll_) * at) * (ll_ * (1.0 + E) * (1.0 + F) - kk_ * (1.0 - E) * (1.0 - F)) / S;
}

double CoefficientSet::b(double t) const {
  const double at = std::abs(t);
  const double E = std::exp(-2.0 * ll_ * at), F = std::exp(-2.0 * kk_ * at);
  const double G = std::exp(-2.0 * (kk_ - ll_) * at);
  const double S = (1.0 + F) * (1.0 + F) + G * (1.0 - E) * (1.0 - E);
  const double v = (ll_ * (1.0 - F * F) + kk_ * G * (1.0 - E * E)) / S;
  return t < 0 ? -v : v;
}

double CoefficientSet::rho2(double t) const {
  const double at = std::abs(t);
  if (kk_ * at < 350.0) {
    const double sl = std::sinh(ll_ * at), ck = std::cosh(kk_ * at);
    return prefac_ * (sl * sl + ck * ck);
  }
  const double E = std::exp(-2.0 * ll_ * at), F = std::exp(-2.0 * kk_ * at);
  const double G = std::exp(-2.0 * (kk_ - ll_) * at);
  const double S = (1.0 + F) * (1.0 + F) + G * (1.0 - E) * (1.0 - E);
  return prefac_ * 0.25 * std::exp(2.0 * kk_ * at) * S;  // overflows to +inf when out of range
}

double CoefficientSet::rho(double t) const { return std::sqrt(rho2(t)); }

void CoefficientSet::potential(double m, double t, double& a11, double& a12, double& a22) const {
  const double av = a(t), bv = b(t), cv = c(t);
  a11 = bv * bv + m * m - 2.0 * av * av;
  a12 = -2.0 * m * bv;
  a22 = bv * bv + m * m - 2.0 * cv * cv;
}

std::array<double, 4> immersion(const SurfacePair& pair, const NeckData& neck, double t, double theta,
                                Parametrization param) {
  double kk = pair.k, ll = pair.l;
  if (param == Parametrization::Rational) {
    kk = pair.p().value();
    ll = 1.0;
  }
  const double sl = std::sinh(ll * t), ck = std::cosh(kk * t);
  return {kk * sl * std::cos(ll * theta) / neck.r, kk * sl * std::sin(ll * theta) / neck.r,
          ll * ck * std::cos(kk * theta) / neck.r, ll * ck * std::sin(kk * theta) / neck.r};
}

Frame frame(const SurfacePair& pair, const NeckData& neck, double t, double theta) {
  (void)neck;
  const double kk = pair.k, ll = pair.l;
  const double at = std::abs(t);
  const double sign = t < 0 ? -1.0 : 1.0;
  const double E = std::exp(-2.0 * ll * at), F = std::exp(-2.0 * kk * at);
  const double G = std::exp(-2.0 * (kk - ll) * at);
  const double sqrtS = std::sqrt((1.0 + F) * (1.0 + F) + G * (1.0 - E) * (1.0 - E));
  // Components of the raw hyperbolic column divided by sqrt(sinh^2 ll t + cosh^2 kk t);
  // the shared prefactor kk ll / (r rho) equals exactly that reciprocal.
  const double decay = std::exp(-(kk - ll) * at);
  const double sig_l = sign * decay * (1.0 - E) / sqrtS;  // sinh(ll t) / s
  const double gam_l = decay * (1.0 + E) / sqrtS;         // cosh(ll t) / s
  const double sig_k = sign * (1.0 - F) / sqrtS;          // sinh(kk t) / s
  const double gam_k = (1.0 + F) / sqrtS;                 // cosh(kk t) / s
  const double cl = std::cos(ll * theta), slt = std::sin(ll * theta);
  const double ckt = std::cos(kk * theta), skt = std::sin(kk * theta);
  Frame fr;
  fr.e1 = {-sig_l * slt, sig_l * cl, -gam_k * skt, gam_k * ckt};
  fr.e2 = {gam_l * cl, gam_l * slt, sig_k * ckt, sig_k * skt};
  fr.n1 = {-sig_k * cl, -sig_k * slt, gam_l * ckt, gam_l * skt};
  fr.n2 = {-gam_k * slt, gam_k * cl, sig_l * skt, -sig_l * ckt};
  return fr;
}

SectionGrid jacobi_apply(const SurfacePair& pair, const NeckData& neck, const SectionGrid& section) {
  const Grid2D& g = section.grid;
  if (g.nt + 1 < 5 || g.ntheta < 5) throw DomainError("jacobi_apply: grid too coarse (need >= 5 points per direction)");
  const size_t nodes = static_cast<size_t>(g.nt + 1) * g.ntheta;
  if (section.f1.size() != nodes || section.f2.size() != nodes)
    throw DomainError("jacobi_apply: section size does not match grid");

  const CoefficientSet co = coefficients(pair, neck);
  const double ht = (g.t1 - g.t0) / g.nt;
  const double htheta = 2.0 * kPi / g.ntheta;

  SectionGrid out;
  out.grid = g;
  out.f1.assign(nodes, 0.0);
  out.f2.assign(nodes, 0.0);

  const int nth = g.ntheta;
  const auto idx = [nth](int i, int j) { return static_cast<size_t>(i) * nth + j; };
  for (int i = 1; i < g.nt; ++i) {
    const double t = g.t0 + i * ht;
    const double rho2 = co.rho2(t);
    const double rho = std::sqrt(rho2);
    const double av = co.a(t), bv = co.b(t), cv = co.c(t);
    const double d1 = 2.0 * av * av - bv * bv;
    const double d2 = 2.0 * cv * cv - bv * bv;
    for (int j = 0; j < nth; ++j) {
      const int jm = (j + nth - 1) % nth, jp = (j + 1) % nth;
      const double f1 = section.f1[idx(i, j)];
      const double f2 = section.f2[idx(i, j)];
      const double lap1 = (section.f1[idx(i + 1, j)] - 2.0 * f1 + section.f1[idx(i - 1, j)]) / (ht * ht) +
                          (section.f1[idx(i, jp)] - 2.0 * f1 + section.f1[idx(i, jm)]) / (htheta * htheta);
      const double lap2 = (section.f2[idx(i + 1, j)] - 2.0 * f2 + section.f2[idx(i - 1, j)]) / (ht * ht) +
                          (section.f2[idx(i, jp)] - 2.0 * f2 + section.f2[idx(i, jm)]) / (htheta * htheta);
      const double dth1 = (section.f1[idx(i, jp)] - section.f1[idx(i, jm)]) / (2.0 * htheta);
      const double dth2 = (section.f2[idx(i, jp)] - section.f2[idx(i, jm)]) / (2.0 * htheta);
      out.f1[idx(i, j)] = (lap1 + 2.0 * bv * rho * dth2 + d1 * f1) / rho2;
      out.f2[idx(i, j)] = (lap2 - 2.0 * bv * rho * dth1 + d2 * f2) / rho2;
    }
  }
  return out;
}

int total_curvature_pi_multiple(const SurfacePair& pair, CurvatureKind kind) {
  switch (kind) {
    case CurvatureKind::FSCover:
      return -4 * pair.k;
    case CurvatureKind::FS:
      return pair.k_even() ? -2 * pair.k : -4 * pair.k;
    case CurvatureKind::EFS:
      return -2 * pair.k;
    case CurvatureKind::IFSCover:
      return 0;
  }
  return 0;
}

double total_curvature(const SurfacePair& pair, CurvatureKind kind) {
  return kPi * total_curvature_pi_multiple(pair, kind);
}

}  // namespace fsindex
