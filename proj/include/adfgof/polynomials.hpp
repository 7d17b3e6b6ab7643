#pragma once

// Pointwise coefficient polynomials of the linear transformation, written in
// terms of h(r), g(r) and the cumulative integrals
//   I1 = int g^2,  I2 = int h g,  I3 = int h,  I4 = int h^2,  I5 = int g   (over [0, r]).

namespace adfgof {

struct PolyArgs {
  double I1 = 0, I2 = 0, I3 = 0, I4 = 0, I5 = 0;
  double h = 0, g = 0;
};

namespace poly {

inline double phi1(const PolyArgs& a) {
  const double I1 = a.I1, I2 = a.I2, I3 = a.I3, I4 = a.I4, I5 = a.I5, h = a.h, g = a.g;
  return g - h - 3.0 * I2*g + I5*h*g + I3*g*g + 2.0 * I2*h - 2.0 * I2*I3*g*g + I1*I2*I2*h + I4*I5*g*g
         - I2*I2*I2*g - I2*I4*g + 3.0 * I2*I2*g + I2*I5*h*h - 2.0 * I2*I5*h*g - 2.0 * I1*I2*h
         + I2*I2*I5*h*g + I1*I1*I3*h*h - I4*h + 2.0 * I1*I4*h - I1*I4*g + I1*I2*I4*g + I1*I4*I5*h*g
         - I1*I1*I4*h + I1*h + 2.0 * I2*I3*h*g - I2*I4*I5*g*g - I5*h*h + 2.0 * I1*I3*h*g
         - 2.0 * I1*I2*I3*h*g - 2.0 * I1*I3*h*h - I2*I2*h + I3*h*h - 2.0 * I3*h*g - I4*I5*h*g
         - I1*I2*I5*h*h + I2*I2*I3*g*g + I1*I5*h*h + I4*g;
}

inline double phi2(const PolyArgs& a) {
  const double I1 = a.I1, I2 = a.I2, I3 = a.I3, I4 = a.I4, I5 = a.I5, h = a.h, g = a.g;
  return 1.0 + I5*h - 3.0 * I2*I5*h + I1*I3*h + I3*g - 3.0 * I2*I3*g + I4*I5*g - I3*h - I1*I4*I4*I5*g
         + 3.0 * I2*I2*I3*g - 2.0 * I2*I4*I5*g + 2.0 * I2*I3*h - I2*I2*I2*I5*h + I1*I2*I2*I3*h
         - I2*I2*I2*I3*g + 3.0 * I2*I2*I5*h + I4*I5*h - I2*I4*I5*h + 2.0 * I1*I3*I4*h + I3*I4*g
         - I2*I3*I4*g + I4*I4 + 2.0 * I2*I2*I4 + I2*I2*I2*I2 + I1*I2*I4*I5*h - I1*I1*I3*I4*h
         - I1*I3*I4*g + I1*I2*I3*I4*g - I2*I2*I3*h - 2.0 * I1*I2*I2*I4 - 2.0 * I1*I4*I4 + I1*I1*I4*I4
         + 2.0 * I4 - 2.0 * I1*I4 - 4.0 * I2*I4 + 4.0 * I1*I2*I4 - 4.0 * I2 + I4*I4*I5*g + I2*I2*I4*I5*g
         - 2.0 * I1*I2*I3*h - I3*I4*h + 6.0 * I2*I2 - 4.0 * I2*I2*I2 - I1*I4*I5*h;
}

inline double psi2(const PolyArgs& a) {
  const double I1 = a.I1, I2 = a.I2, I3 = a.I3, I4 = a.I4, I5 = a.I5, h = a.h, g = a.g;
  return h + I3*h*g - 2.0 * I2*I4*g + I5*h*h - 3.0 * I2*h - 2.0 * I2*I3*h*g - I1*I2*I3*h*h + I4*g
         + 3.0 * I2*I2*h + I2*I2*I4*g + I2*I2*I5*h*h - I2*I2*I2*h - I3*I4*h*g + I4*I4*g + I4*h - I2*I4*h
         - 2.0 * I2*I5*h*h - I1*I4*h + I1*I2*I4*h + I1*I3*h*h + I3*I4*g*g + I2*I3*h*h - I3*h*h
         + I1*I3*I4*h*g - I2*I3*I4*g*g - 2.0 * I2*I4*I5*h*g + 2.0 * I4*I5*h*g + I2*I2*I3*h*g
         - I1*I4*I4*g + I4*I4*I5*g*g;
}

inline double psi1(const PolyArgs& a) {
  const double I1 = a.I1, I2 = a.I2, I3 = a.I3, I4 = a.I4, I5 = a.I5, h = a.h, g = a.g;
  return g + 2.0 * I4*g - 3.0 * I2*g + I5*h*g + I1*h - I2*h + I1*I4*I5*h*g + I4*I4*g + 3.0 * I2*I2*g
         - I2*I5*h*h - 2.0 * I2*I5*h*g - 2.0 * I1*I2*h + 2.0 * I2*I2*h + I2*I2*I3*g*g - I1*I2*I3*h*h
         - I2*I2*I2*g + I2*I2*I5*h*g + I1*I2*I2*h - I2*I2*I2*h - 2.0 * I2*I4*I5*h*g + I1*I1*I3*h*h
         - I1*I2*I5*h*h - I3*h*g - I2*I4*h + I3*I4*g*g - I3*I4*h*g - I1*I4*g - I1*I4*I4*g + I1*I2*I4*g
         - 2.0 * I2*I3*g*g + I1*I2*I4*h + I1*I5*h*h + I4*I5*g*g + I2*I2*I3*h*g - I1*I3*h*h
         + I4*I4*I5*g*g - I2*I4*I5*g*g + 2.0 * I1*I3*h*g - 2.0 * I1*I2*I3*h*g + I2*I2*I4*g - I1*I1*I4*h
         + I2*I3*h*h - I2*I3*I4*g*g - 3.0 * I2*I4*g + I2*I2*I5*h*h + I1*I4*h + I1*I3*I4*h*g + I4*I5*h*g
         + I3*g*g;
}

// Factored building blocks. K uses 1 - I1 for the tail integral of g^2, which
// is what the expanded polynomials above assume (int_0^1 g^2 = 1).
inline double C(const PolyArgs& a) { return 1.0 - a.I2; }
inline double D(const PolyArgs& a) { return a.I5 * (1.0 + a.I4 - a.I2) + a.I3 * (a.I1 - a.I2); }
inline double K(const PolyArgs& a) { return (1.0 - a.I2) * (1.0 - a.I2) + a.I4 * (1.0 - a.I1); }
inline double N(const PolyArgs& a) { return a.I3 * (1.0 - a.I2) + a.I4 * a.I5; }
inline double Phi1(const PolyArgs& a) { return (D(a) * a.h + N(a) * (a.g - a.h)) * K(a); }

// r-derivatives, using I1' = g^2, I2' = h g, I3' = h, I4' = h^2, I5' = g.
inline double D_prime(const PolyArgs& a) {
  const double I1 = a.I1, I2 = a.I2, I3 = a.I3, I4 = a.I4, I5 = a.I5, h = a.h, g = a.g;
  return g + I4*g - I2*g + I5*h*h - I5*h*g + I1*h - I2*h + I3*g*g - I3*h*g;
}
inline double K_prime(const PolyArgs& a) {
  const double I1 = a.I1, I2 = a.I2, I4 = a.I4, h = a.h, g = a.g;
  return -2.0 * h*g + 2.0 * I2*h*g + h*h - I1*h*h - I4*g*g;
}
inline double N_prime(const PolyArgs& a) {
  const double I2 = a.I2, I3 = a.I3, I4 = a.I4, I5 = a.I5, h = a.h, g = a.g;
  return -I3*h*g + I4*g + I5*h*h + h - I2*h;
}

}  // namespace poly

/// The four coefficient functions used by a transform. Swappable so that a
/// deliberately corrupted set can be pushed through the validation checks.
struct CoefficientSet {
  double (*phi1)(const PolyArgs&) = poly::phi1;
  double (*phi2)(const PolyArgs&) = poly::phi2;
  double (*psi1)(const PolyArgs&) = poly::psi1;
  double (*psi2)(const PolyArgs&) = poly::psi2;
};

}  // namespace adfgof
