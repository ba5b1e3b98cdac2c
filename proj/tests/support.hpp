#pragma once

#include "memchain/core.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace memchain::testing {

/// Random loops with rates in [lo, hi] whose return rates are pairwise at
/// least `min_gap` apart.
class LoopSampler {
 public:
  explicit LoopSampler(std::uint64_t seed, double lo = 0.2, double hi = 5.0, double min_gap = 0.05)
      : rng_(seed), lo_(lo), hi_(hi), min_gap_(min_gap) {}

  double rate() { return std::uniform_real_distribution<double>(lo_, hi_)(rng_); }
  std::size_t size(std::size_t max_n) { return std::uniform_int_distribution<std::size_t>(1, max_n)(rng_); }

  /// Uniform over configurations with all gaps >= min_gap, in random order.
  std::vector<double> distinct_rates(std::size_t n) {
    const double slack = (hi_ - lo_) - static_cast<double>(n - 1) * min_gap_;
    std::uniform_real_distribution<double> U(0.0, std::max(slack, 0.0));
    std::vector<double> b(n);
    for (auto& x : b) x = U(rng_);
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) b[i] += lo_ + static_cast<double>(i) * min_gap_;
    std::shuffle(b.begin(), b.end(), rng_);
    return b;
  }

  LoopGenerator loop(std::size_t n) {
    std::vector<double> a(n);
    for (auto& x : a) x = rate();
    return LoopGenerator(std::move(a), distinct_rates(n));
  }

  /// Return rates strictly descending, the ordering the decomposition tries first.
  LoopGenerator descending_loop(std::size_t n) {
    auto b = distinct_rates(n);
    std::sort(b.begin(), b.end(), std::greater<>());
    std::vector<double> a(n);
    for (auto& x : a) x = rate();
    return LoopGenerator(std::move(a), std::move(b));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  double lo_, hi_, min_gap_;
};

/// Dense generator written out entry by entry from the transition rates.
inline Eigen::MatrixXd loop_matrix(const LoopGenerator& gen) {
  const auto n = static_cast<Eigen::Index>(gen.states());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const auto a = gen.split_rates();
  const auto b = gen.return_rates();
  for (Eigen::Index j = 1; j < n; ++j) {
    // 0 -> j at a_j; j -> j-1 at b_j.
    A(j, 0) += a[static_cast<std::size_t>(j - 1)];
    A(0, 0) -= a[static_cast<std::size_t>(j - 1)];
    A(j - 1, j) += b[static_cast<std::size_t>(j - 1)];
    A(j, j) -= b[static_cast<std::size_t>(j - 1)];
  }
  return A;
}

/// Memory kernel read off the chain: mass injected into state j at rate a_j
/// drains down the return block B and re-enters state 0 from state 1 at b_1.
/// K(t) = b_1 sum_j a_j [exp(B t)]_{1, j}.
inline double kernel_by_expm(const LoopGenerator& gen, double t) {
  const Eigen::MatrixXd A = loop_matrix(gen);
  const auto n = A.rows() - 1;
  const Eigen::MatrixXd E = (A.bottomRightCorner(n, n) * t).exp();
  double k = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) k += gen.split_rates()[static_cast<std::size_t>(j)] * E(0, j);
  return gen.return_rates()[0] * k;
}

/// p(t) = exp(A t) p0.
inline Eigen::VectorXd propagate_expm(const Eigen::MatrixXd& A, const Eigen::VectorXd& p0, double t) {
  return (A * t).exp() * p0;
}

/// Two-state chain closed form for u0 = 1.
inline double two_state(double a, double b, double t) {
  return b / (a + b) + a / (a + b) * std::exp(-(a + b) * t);
}

}  // namespace memchain::testing
