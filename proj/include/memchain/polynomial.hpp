#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace memchain {

using cplx = std::complex<double>;

/// Real polynomial with coefficients in ascending degree. Trailing zero
/// coefficients are trimmed, so the zero polynomial has no coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  Polynomial(std::initializer_list<double> coeffs) : Polynomial(std::vector<double>(coeffs)) {}

  static Polynomial constant(double c) { return Polynomial({c}); }
  /// (x + shift)
  static Polynomial linear_factor(double shift) { return Polynomial({shift, 1.0}); }

  std::span<const double> coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  /// Degree; the zero polynomial reports -1.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }
  double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
  /// Sum of absolute coefficients.
  double abs_sum() const;

  double operator()(double x) const;
  cplx operator()(cplx z) const;
  Polynomial derivative() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

  /// Quotient and remainder of polynomial long division.
  struct DivMod;
  DivMod divmod(const Polynomial& divisor) const;

  /// Drop coefficients below `tol * abs_sum()` from the top.
  Polynomial trimmed(double tol) const;

 private:
  void trim();
  std::vector<double> coeffs_;
};

struct Polynomial::DivMod {
  Polynomial quotient;
  Polynomial remainder;
};

/// Greatest common divisor (monic) by the Euclidean algorithm; remainders
/// whose coefficients fall below `tol` relative to the dividend are zero.
Polynomial polynomial_gcd(const Polynomial& p, const Polynomial& q, double tol = 1e-12);

/// Ratio of real polynomials with a monic denominator, reduced by their
/// common factor on construction.
class RationalFunction {
 public:
  RationalFunction(Polynomial numerator, Polynomial denominator, double gcd_tol = 1e-12);

  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }

  double operator()(double x) const { return num_(x) / den_(x); }
  cplx operator()(cplx z) const { return num_(z) / den_(z); }

  /// lim_{x->0} x * f(x), evaluated from the coefficients: infinite if f
  /// has a double pole at 0, zero if it has none.
  double final_value() const;

 private:
  Polynomial num_;
  Polynomial den_;
};

// ---------------------------------------------------------------------------
// Simultaneous root finding
// ---------------------------------------------------------------------------

/// Value and first derivative of a polynomial at a point, with a magnitude
/// `scale` bounding the rounding noise of the evaluation (e.g. the absolute
/// polynomial at |z|). The relative residual |value|/scale is the backward
/// error used for acceptance.
struct PolyEval {
  cplx value;
  cplx derivative;
  double scale;
};

/// A polynomial given by an evaluator rather than coefficients, so that
/// structured (factored) forms keep their conditioning.
struct RootProblem {
  int degree = 0;
  std::function<PolyEval(cplx)> eval;
  /// All roots lie in the disc |z - center| <= radius (used for starting points).
  cplx center{0.0, 0.0};
  double radius = 1.0;
};

struct RootOptions {
  double tolerance = 1e-12;
  int max_iterations = 500;
  int polish_steps = 3;
  double max_residual = 1e-8;
};

/// Aberth-Ehrlich iteration followed by Newton polishing. Throws
/// RootFindingFailure if a relative residual exceeds `max_residual`.
std::vector<cplx> aberth_roots(const RootProblem& problem, const RootOptions& options = {});

/// Roots of a coefficient polynomial.
std::vector<cplx> polynomial_roots(const Polynomial& p, const RootOptions& options = {});

/// Sort by real part descending, then imaginary part ascending.
void sort_spectrum(std::vector<cplx>& values);

}  // namespace memchain
