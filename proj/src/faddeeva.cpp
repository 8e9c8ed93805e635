#include "hom/faddeeva.hpp"

#include <array>
#include <cmath>

#include "hom/errors.hpp"
#include "hom/units.hpp"

namespace hom {

namespace {

constexpr int kTerms = 32;

struct WeidemanTable {
  double l = 0.0;
  std::array<double, kTerms> coeffs{};  // coeffs[n] multiplies Z^n

  WeidemanTable() {
    constexpr int m = 2 * kTerms;
    constexpr int m2 = 2 * m;
    l = std::sqrt(kTerms / std::sqrt(2.0));
    // f sampled at t_k = L tan(k pi / 2M), k = -M+1 .. M-1, preceded by a zero.
    std::array<double, m2> f{};
    for (int k = -m + 1; k < m; ++k) {
      const double t = l * std::tan(0.5 * k * kPi / m);
      f[static_cast<std::size_t>(k + m)] = std::exp(-t * t) * (l * l + t * t);
    }
    // fftshift by M then a real-part DFT for harmonics 1..N.
    std::array<double, m2> shifted{};
    for (int j = 0; j < m2; ++j) shifted[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>((j + m) % m2)];
    for (int n = 1; n <= kTerms; ++n) {
      double re = 0.0;
      for (int j = 0; j < m2; ++j) re += shifted[static_cast<std::size_t>(j)] * std::cos(2.0 * kPi * j * n / m2);
      coeffs[static_cast<std::size_t>(n - 1)] = re / m2;
    }
  }
};

const WeidemanTable& table() {
  static const WeidemanTable t;
  return t;
}

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  if (z.imag() < 0.0) throw DomainError("faddeeva: only Im z >= 0 is supported");
  const auto& tab = table();
  const std::complex<double> i1(0.0, 1.0);
  const std::complex<double> denom = tab.l - i1 * z;
  const std::complex<double> zz = (tab.l + i1 * z) / denom;
  std::complex<double> p = 0.0;
  for (int n = kTerms - 1; n >= 0; --n) p = p * zz + tab.coeffs[static_cast<std::size_t>(n)];
  return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(kPi)) / denom;
}

}  // namespace hom
