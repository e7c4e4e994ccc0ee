// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numeric>
#include <string>

#include "fsindex/errors.hpp"

namespace fsindex {

/// A positive rational carried as an exact integer pair, used for the
/// single-parameter form p = k/l of the surface family. Keeping the pair
/// exact avoids drift between the two parametrizations.
struct Rational {
  int num = 2;
  int den = 1;

  static Rational of(int num, int den) {
    if (den <= 0 || num <= 0) throw DomainError("rational parameter must be positive");
    const int g = std::gcd(num, den);
    Rational r{num / g, den / g};
    if (r.num <= r.den) throw DomainError("rational parameter must satisfy p > 1");
    return r;
  }

  double value() const { return static_cast<double>(num) / den; }
  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

/// Coprime integers (k, l) with k > l > 0 parametrizing one surface of the
/// family; p = k/l is the derived rational parameter.
struct SurfacePair {
  int k = 2;
  int l = 1;

  static SurfacePair of(int k, int l) {
    if (l <= 0 || k <= l) throw DomainError("surface pair requires k > l > 0");
    if (std::gcd(k, l) != 1) throw DomainError("surface pair requires gcd(k, l) = 1");
    return SurfacePair{k, l};
  }

  Rational p() const { return Rational{k, l}; }
  bool k_even() const { return k % 2 == 0; }
  std::string str() const { return "(" + std::to_string(k) + "," + std::to_string(l) + ")"; }
};

}  // namespace fsindex
