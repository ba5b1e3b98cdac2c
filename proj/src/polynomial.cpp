#include "memchain/polynomial.hpp"

#include "memchain/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memchain {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::abs_sum() const {
  double s = 0.0;
  for (double c : coeffs_) s += std::abs(c);
  return s;
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

cplx Polynomial::operator()(cplx z) const {
  cplx acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (*this)[i] + o[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<double> r(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) r[i + j] += coeffs_[i] * o.coeffs_[j];
  }
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double s) const {
  std::vector<double> r = coeffs_;
  for (double& c : r) c *= s;
  return Polynomial(std::move(r));
}

Polynomial::DivMod Polynomial::divmod(const Polynomial& divisor) const {
  if (divisor.is_zero()) throw Error(ErrorCode::InvalidParams, "polynomial division by zero");
  if (degree() < divisor.degree()) return {Polynomial{}, *this};
  std::vector<double> rem = coeffs_;
  const std::size_t dd = divisor.coeffs_.size() - 1;
  std::vector<double> quot(coeffs_.size() - dd, 0.0);
  for (std::size_t k = quot.size(); k-- > 0;) {
    const double q = rem[k + dd] / divisor.coeffs_.back();
    quot[k] = q;
    for (std::size_t j = 0; j <= dd; ++j) rem[k + j] -= q * divisor.coeffs_[j];
    rem[k + dd] = 0.0;
  }
  rem.resize(dd);
  return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
}

Polynomial Polynomial::trimmed(double tol) const {
  const double cut = tol * abs_sum();
  std::vector<double> r = coeffs_;
  while (!r.empty() && std::abs(r.back()) <= cut) r.pop_back();
  return Polynomial(std::move(r));
}

namespace {

double max_abs(const Polynomial& p) {
  double m = 0.0;
  for (double c : p.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

Polynomial normalized(const Polynomial& p) {
  const double m = max_abs(p);
  return m > 0.0 ? p * (1.0 / m) : p;
}

Polynomial monic(const Polynomial& p) {
  std::vector<double> c(p.coeffs().begin(), p.coeffs().end());
  const double lead = c.back();
  for (auto& x : c) x /= lead;
  c.back() = 1.0;
  return Polynomial(std::move(c));
}

}  // namespace

Polynomial polynomial_gcd(const Polynomial& p, const Polynomial& q, double tol) {
  Polynomial a = normalized(p);
  Polynomial b = normalized(q);
  if (a.degree() < b.degree()) std::swap(a, b);
  if (b.is_zero()) return a.is_zero() ? Polynomial{1.0} : monic(a);
  while (true) {
    Polynomial r = a.divmod(b).remainder;
    if (r.is_zero() || max_abs(r) <= tol * max_abs(a)) return monic(b);
    a = b;
    b = normalized(r);
    if (b.degree() == 0) return Polynomial{1.0};
  }
}

// ---------------------------------------------------------------------------

RationalFunction::RationalFunction(Polynomial numerator, Polynomial denominator, double gcd_tol)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_.is_zero()) throw Error(ErrorCode::InvariantViolation, "rational function with zero denominator");
  if (num_.is_zero()) {
    den_ = Polynomial{1.0};
    return;
  }
  if (den_.degree() > 0 && num_.degree() > 0) {
    const Polynomial g = polynomial_gcd(num_, den_, gcd_tol);
    if (g.degree() > 0) {
      num_ = num_.divmod(g).quotient;
      den_ = den_.divmod(g).quotient;
    }
  }
  num_ = num_ * (1.0 / den_.leading());
  den_ = monic(den_);
}

double RationalFunction::final_value() const {
  std::size_t zeros = 0;
  while (zeros < den_.coeffs().size() && den_.coeffs()[zeros] == 0.0) ++zeros;
  const double n0 = num_[0];
  if (zeros == 0) return 0.0;
  if (zeros == 1) return n0 / den_[1];
  if (n0 == 0.0) {
    // x * N / (x^m D) with N(0) = 0: reduce one more order.
    return RationalFunction(num_.divmod(Polynomial{0.0, 1.0}).quotient,
                            den_.divmod(Polynomial{0.0, 1.0}).quotient)
        .final_value();
  }
  return std::copysign(std::numeric_limits<double>::infinity(), n0);
}

// ---------------------------------------------------------------------------

namespace {

void enforce_conjugate_symmetry(std::vector<cplx>& roots) {
  // Real-coefficient problems: snap near-real roots and pair up the rest.
  for (auto& z : roots) {
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) z = {z.real(), 0.0};
  }
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i] || roots[i].imag() <= 0.0) continue;
    std::size_t best = roots.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (used[j] || j == i || roots[j].imag() >= 0.0) continue;
      const double d = std::abs(roots[j] - std::conj(roots[i]));
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (best == roots.size()) continue;
    const cplx mean = 0.5 * (roots[i] + std::conj(roots[best]));
    roots[i] = mean;
    roots[best] = std::conj(mean);
    used[i] = used[best] = true;
  }
}

double relative_residual(const PolyEval& e) {
  return e.scale > 0.0 ? std::abs(e.value) / e.scale : std::abs(e.value);
}

}  // namespace

std::vector<cplx> aberth_roots(const RootProblem& problem, const RootOptions& options) {
  const int n = problem.degree;
  if (n <= 0) return {};
  std::vector<cplx> z(static_cast<std::size_t>(n));
  const double two_pi = 2.0 * std::acos(-1.0);
  const double radius = problem.radius > 0.0 ? problem.radius : 1.0;
  for (int k = 0; k < n; ++k) {
    const double theta = two_pi * k / n + 0.7;
    z[static_cast<std::size_t>(k)] = problem.center + radius * cplx(std::cos(theta), std::sin(theta));
  }

  std::vector<bool> converged(z.size(), false);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    bool all_done = true;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (converged[k]) continue;
      const PolyEval e = problem.eval(z[k]);
      if (e.value == 0.0) {
        converged[k] = true;
        continue;
      }
      cplx deriv = e.derivative;
      if (deriv == 0.0) deriv = cplx(1e-300, 0.0);
      const cplx ratio = e.value / deriv;
      cplx repulsion = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j) {
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      }
      cplx step = ratio / (1.0 - ratio * repulsion);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) step = ratio;
      z[k] -= step;
      if (std::abs(step) <= options.tolerance * std::max(1.0, std::abs(z[k])) || relative_residual(e) < 1e-17) {
        converged[k] = true;
      } else {
        all_done = false;
      }
    }
    if (all_done) break;
  }

  for (auto& root : z) {
    for (int s = 0; s < options.polish_steps; ++s) {
      const PolyEval e = problem.eval(root);
      if (e.value == 0.0 || e.derivative == 0.0) break;
      const cplx candidate = root - e.value / e.derivative;
      if (std::abs(problem.eval(candidate).value) < std::abs(e.value)) {
        root = candidate;
      } else {
        break;
      }
    }
  }

  enforce_conjugate_symmetry(z);
  for (const auto& root : z) {
    const double res = relative_residual(problem.eval(root));
    if (!(res <= options.max_residual)) {
      throw Error(ErrorCode::RootFindingFailure,
                  "root residual " + std::to_string(res) + " exceeds tolerance after refinement");
    }
  }
  return z;
}

std::vector<cplx> polynomial_roots(const Polynomial& p, const RootOptions& options) {
  if (p.degree() <= 0) return {};
  const Polynomial dp = p.derivative();
  const auto coeffs = p.coeffs();
  const double lead = std::abs(p.leading());
  double bound = 0.0;
  const int n = p.degree();
  for (int i = 0; i < n; ++i) {
    const double ratio = std::abs(coeffs[static_cast<std::size_t>(i)]) / lead;
    if (ratio > 0.0) bound = std::max(bound, std::pow(ratio, 1.0 / (n - i)));
  }
  RootProblem problem;
  problem.degree = n;
  problem.center = 0.0;
  problem.radius = bound > 0.0 ? bound : 1.0;
  problem.eval = [&p, &dp](cplx z) {
    double scale = 0.0;
    double r = std::abs(z);
    for (auto it = p.coeffs().rbegin(); it != p.coeffs().rend(); ++it) scale = scale * r + std::abs(*it);
    return PolyEval{p(z), dp(z), scale};
  };
  return aberth_roots(problem, options);
}

void sort_spectrum(std::vector<cplx>& values) {
  std::sort(values.begin(), values.end(), [](cplx x, cplx y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() < y.imag();
  });
}

}  // namespace memchain
