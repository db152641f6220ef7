#include <cmath>
#include <cstdlib>

#include "rydberg/atomic.hpp"

namespace rydberg {

namespace {

// cos(theta) Y_l^m = a(l, m) Y_{l+1}^m + a(l-1, m) Y_{l-1}^m
double cos_coefficient(int l, int m) {
  if (l < 0) return 0.0;
  const double num = static_cast<double>(l + 1 - m) * (l + 1 + m);
  const double den = static_cast<double>(2 * l + 1) * (2 * l + 3);
  return num > 0.0 ? std::sqrt(num / den) : 0.0;
}

// sin(theta) e^{i phi} Y_l^m = -b(l, m) Y_{l+1}^{m+1} + b(l-1, -m-1) Y_{l-1}^{m+1}
double raise_coefficient(int l, int m) {
  if (l < 0) return 0.0;
  const double num = static_cast<double>(l + m + 1) * (l + m + 2);
  const double den = static_cast<double>(2 * l + 1) * (2 * l + 3);
  return num > 0.0 ? std::sqrt(num / den) : 0.0;
}

bool valid(int l, int m) { return l >= 0 && std::abs(m) <= l; }

// <l m| sin(theta) e^{i phi} |lp mp>
double plus_element(int l, int m, int lp, int mp) {
  if (!valid(l, m) || !valid(lp, mp) || m != mp + 1) return 0.0;
  if (l == lp + 1) return -raise_coefficient(lp, mp);
  if (l == lp - 1) return raise_coefficient(lp - 1, -mp - 1);
  return 0.0;
}

// <l m| cos(theta) |lp mp>
double z_element(int l, int m, int lp, int mp) {
  if (!valid(l, m) || !valid(lp, mp) || m != mp) return 0.0;
  if (l == lp + 1) return cos_coefficient(lp, mp);
  if (l == lp - 1) return cos_coefficient(lp - 1, mp);
  return 0.0;
}

}  // namespace

double angular_factor(DipoleComponent component, int l, int m, int lp, int mp) {
  switch (component) {
    case DipoleComponent::XPlusIY:
      return plus_element(l, m, lp, mp);
    case DipoleComponent::XMinusIY:
      // x - iy = (x + iy)^dagger and the elements are real.
      return plus_element(lp, mp, l, m);
    case DipoleComponent::Z:
      return z_element(l, m, lp, mp);
  }
  return 0.0;
}

}  // namespace rydberg
