#pragma once

#include "memchain/core.hpp"
#include "memchain/polynomial.hpp"

#include <span>
#include <vector>

namespace memchain {

/// Weights psi_i^j = prod_{k<=j, k!=i} b_k / (b_k - b_i) for i = 1..j, i.e.
/// the Lagrange basis at 0 (up to sign) on the nodes b_1..b_j. `order` is j.
/// Throws CoincidentRates; warns when the nodes are nearly confluent.
std::vector<double> lagrange_psi(std::span<const double> return_rates, std::size_t order);

/// Memory kernel of a loop chain in structured form:
/// K(t) = sum_j a_j K_j(t), K_j(t) = sum_{i<=j} b_i psi_i^j e^{-b_i t}.
class LoopKernel {
 public:
  explicit LoopKernel(LoopGenerator gen);

  const LoopGenerator& generator() const { return gen_; }
  /// Row j-1 holds psi_1^j..psi_j^j (lower triangular, zeros above).
  const Eigen::MatrixXd& psi() const { return psi_; }

  /// K_j alone (1-based j), a kernel of unit mass.
  ExpPolyKernel component(std::size_t j) const;
  /// Coefficients collected per exponential: the e^{-b_i t} term carries
  /// b_i * sum_{j>=i} a_j psi_i^j.
  ExpPolyKernel flatten() const;

 private:
  LoopGenerator gen_;
  Eigen::MatrixXd psi_;
};

inline LoopKernel loop_kernel(const LoopGenerator& gen) { return LoopKernel(gen); }

/// K(t) with compensated summation; t >= 0.
double kernel_eval(const ExpPolyKernel& K, double t);
/// d^order K / dt^order at t (order 0..2).
double kernel_derivative(const ExpPolyKernel& K, double t, int order);

/// Laplace transform sum_i c_i k_i! / (x + alpha_i)^{k_i + 1} over a common
/// denominator.
RationalFunction kernel_laplace(const ExpPolyKernel& K);
/// Direct evaluation of the Laplace transform at a complex point.
cplx kernel_laplace_at(const ExpPolyKernel& K, cplx lambda);

struct KernelMoments {
  double mass = 0.0;       ///< integral of K
  double mean_time = 0.0;  ///< integral of t K divided by the mass
};

/// Analytic moments; throws ZeroMass when the mass vanishes.
KernelMoments moments(const ExpPolyKernel& K);
/// Integral of K over [0, inf) without the mean.
double kernel_mass(const ExpPolyKernel& K);

struct PositivityReport {
  bool positive = false;
  double min_value = 0.0;
  double argmin = 0.0;
  double horizon = 0.0;
  /// The analytic tail bound proved the sign beyond the horizon.
  bool tail_certified = false;
};

/// Global minimum of K on [0, horizon] (dense grid + Newton on K') plus an
/// analytic bound on the tail. horizon <= 0 selects 50 / min rate.
PositivityReport positivity_check(const ExpPolyKernel& K, double horizon = 0.0);

struct WeightedMinimum {
  double value = 0.0;
  double argmin = 0.0;
};

/// Minimum over [0, horizon] of e^{shift t} K(t). Handy for kernels whose
/// positivity margin decays, where K itself tends to 0.
WeightedMinimum weighted_minimum(const ExpPolyKernel& K, double shift, double horizon);

/// Falsifier for pure exponential sums: checks sum_j c_j / (x + alpha_j)^m
/// >= -1e-12 for m = 1..max_order and every x in `grid` (x >= 0). Returns
/// false at the first violation. A true result is evidence, not proof.
bool lemma_positivity_samples(const ExpPolyKernel& K, int max_order, std::span<const double> grid);

/// K_j(t) for the nodes `return_rates` (j = size, at most 4) computed as a
/// nested Gauss-Legendre integral over the simplex, independent of psi.
double simplex_oracle(std::span<const double> return_rates, double t);

}  // namespace memchain
