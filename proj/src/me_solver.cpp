#include "memchain/me_solver.hpp"

#include "memchain/embed.hpp"
#include "memchain/kernel.hpp"
#include "memchain/markov.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace memchain {

Trajectory solve_me(double decay_rate, const ExpPolyKernel& K, double u0, const UniformGrid& grid) {
  const double h = grid.step;
  if (!(h > 0.0) || grid.intervals == 0) throw Error(ErrorCode::InvalidParams, "grid needs a positive step");
  const double stiffness = h * (std::abs(decay_rate) + std::abs(kernel_mass(K)));
  if (stiffness > 0.5) {
    std::ostringstream os;
    os << "h (a + mass) = " << stiffness << " exceeds 0.5";
    throw Error(ErrorCode::StepTooLarge, os.str());
  }
  const std::size_t n = grid.intervals;

  // Lag-interval weights: over tau in [m h, (m+1) h] the history u(t - tau)
  // is linear between the nodes at lags m and m+1.
  using Rule = boost::math::quadrature::gauss<double, 10>;
  std::vector<double> near(n), far(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double lo = h * static_cast<double>(m);
    const double hi = lo + h;
    near[m] = Rule::integrate([&](double tau) { return kernel_eval(K, tau) * (hi - tau) / h; }, lo, hi);
    far[m] = Rule::integrate([&](double tau) { return kernel_eval(K, tau) * (tau - lo) / h; }, lo, hi);
  }
  // weight[k] multiplies u_{i-k} in the convolution at step i (k = 1..i-1);
  // the endpoints k = 0 and k = i use near[0] and far[i-1].
  std::vector<double> weight(n + 1, 0.0);
  for (std::size_t k = 1; k < n; ++k) weight[k] = near[k] + far[k - 1];

  Trajectory traj(grid.times(), 1);
  std::vector<double> u(n + 1, 0.0);
  u[0] = u0;
  traj.at(0, 0) = u0;
  double rhs_prev = -decay_rate * u0;  // convolution vanishes at t = 0
  const double implicit = 1.0 + 0.5 * h * decay_rate - 0.5 * h * near[0];
  for (std::size_t i = 1; i <= n; ++i) {
    double history = far[i - 1] * u[0];
    for (std::size_t k = 1; k < i; ++k) history += weight[k] * u[i - k];
    u[i] = (u[i - 1] + 0.5 * h * rhs_prev + 0.5 * h * history) / implicit;
    rhs_prev = -decay_rate * u[i] + near[0] * u[i] + history;
    traj.at(i, 0) = u[i];
  }
  return traj;
}

Trajectory solve_me_via_mp(double decay_rate, const ExpPolyKernel& K, double u0, const UniformGrid& grid) {
  const EmbeddedChain chain = me_to_mp(decay_rate, K, u0);
  const Trajectory full = integrate(chain.generator, chain.initial, grid.times());
  Trajectory traj(grid.times(), 1);
  for (std::size_t s = 0; s < full.size(); ++s) traj.at(s, 0) = full.at(s, 0);
  return traj;
}

RationalFunction laplace_solution(const LoopGenerator& gen, double u0) {
  const auto split = gen.split_rates();
  const auto ret = gen.return_rates();
  const std::size_t n = gen.loops();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      if (rates_coincide(ret[i], ret[k])) throw Error(ErrorCode::CoincidentRates, "return rates must be distinct");
    }
  }
  // det(x I - A*) = (x + a) prod (x + b_i) - sum_j a_j prod_{i<=j} b_i prod_{i>j} (x + b_i)
  Polynomial all{1.0};
  for (double b : ret) all = all * Polynomial::linear_factor(b);
  Polynomial charpoly = Polynomial::linear_factor(gen.total_split_rate()) * all;
  for (std::size_t j = 0; j < n; ++j) {
    double head = split[j];
    for (std::size_t i = 0; i <= j; ++i) head *= ret[i];
    Polynomial tail{head};
    for (std::size_t i = j + 1; i < n; ++i) tail = tail * Polynomial::linear_factor(ret[i]);
    charpoly = charpoly - tail;
  }
  // The constant term vanishes analytically; divide out the zero mode exactly.
  std::vector<double> reduced(charpoly.coeffs().begin() + 1, charpoly.coeffs().end());
  const Polynomial den = Polynomial{0.0, 1.0} * Polynomial(std::move(reduced));
  return RationalFunction(all * u0, den);
}

std::vector<Mode> closed_form(const LoopGenerator& gen, double u0) {
  const RationalFunction sol = laplace_solution(gen, u0);
  const Polynomial& den = sol.denominator();
  const Polynomial rest = den.divmod(Polynomial{0.0, 1.0}).quotient;
  std::vector<cplx> poles = polynomial_roots(rest);
  poles.push_back(0.0);
  sort_spectrum(poles);

  double largest = 0.0;
  for (const auto& p : poles) largest = std::max(largest, std::abs(p));
  for (std::size_t i = 0; i < poles.size(); ++i) {
    for (std::size_t k = i + 1; k < poles.size(); ++k) {
      if (std::abs(poles[i] - poles[k]) <= 1e-6 * largest) {
        throw Error(ErrorCode::RepeatedPoles, "Laplace solution has repeated poles; use the Volterra solver");
      }
    }
  }
  const Polynomial dden = den.derivative();
  std::vector<Mode> modes;
  for (const auto& p : poles) modes.push_back({sol.numerator()(p) / dden(p), p});
  return modes;
}

double evaluate_modes(std::span<const Mode> modes, double t) {
  cplx acc = 0.0;
  for (const auto& m : modes) acc += m.residue * std::exp(m.pole * t);
  return acc.real();
}

double equilibrium_me(const LoopGenerator& gen, double u0) { return u0 / partition_constant(gen); }

}  // namespace memchain
