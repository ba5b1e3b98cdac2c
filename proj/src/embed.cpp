#include "memchain/embed.hpp"

#include "memchain/kernel.hpp"
#include "memchain/markov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace memchain {

OrderingAttempt solve_split_rates(const ExpPolyKernel& K, std::span<const double> order) {
  const std::size_t n = order.size();
  if (n == 0) throw Error(ErrorCode::InvalidParams, "empty exponent ordering");
  std::vector<double> coeff(n, 0.0);
  for (const auto& term : K.terms()) {
    auto it = std::find(order.begin(), order.end(), term.rate);
    if (term.power != 0 || it == order.end()) {
      throw Error(ErrorCode::InvalidParams, "ordering does not match the kernel's exponents");
    }
    coeff[static_cast<std::size_t>(it - order.begin())] = term.coeff;
  }

  // psi[j][i] = psi_{i+1}^{j+1}
  std::vector<std::vector<double>> psi(n);
  for (std::size_t j = 0; j < n; ++j) psi[j] = lagrange_psi(order, j + 1);

  OrderingAttempt attempt;
  attempt.return_rates.assign(order.begin(), order.end());
  attempt.split_rates.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double rest = coeff[i] / order[i];
    for (std::size_t j = i + 1; j < n; ++j) rest -= attempt.split_rates[j] * psi[j][i];
    attempt.split_rates[i] = rest / psi[i][i];
  }
  attempt.most_negative = *std::min_element(attempt.split_rates.begin(), attempt.split_rates.end());
  double scale = 1.0;
  for (double a : attempt.split_rates) scale = std::max(scale, std::abs(a));
  attempt.feasible = attempt.most_negative >= -1e-10 * scale;
  return attempt;
}

Decomposition decompose_to_loop(const ExpPolyKernel& K, bool stop_at_first) {
  if (K.empty()) throw Error(ErrorCode::InvalidParams, "cannot embed an empty kernel");
  if (!K.is_exponential_sum()) {
    throw Error(ErrorCode::InvalidParams, "loop embedding needs a pure exponential sum (all powers 0)");
  }
  std::vector<double> order;
  for (const auto& t : K.terms()) order.push_back(t.rate);
  std::sort(order.begin(), order.end(), std::greater<>());
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (rates_coincide(order[i], order[i + 1])) {
      throw Error(ErrorCode::CoincidentRates, "kernel exponents are not pairwise distinct");
    }
  }

  Decomposition out;
  out.exhaustive = order.size() <= kMaxPermutedExponents;
  if (!out.exhaustive) {
    warn("more than " + std::to_string(kMaxPermutedExponents) +
         " exponents: permutation search refused, trying descending order only");
  }
  do {
    OrderingAttempt attempt = solve_split_rates(K, order);
    if (attempt.feasible && !out.loop) {
      std::vector<double> split = attempt.split_rates;
      for (double& a : split) a = std::max(a, 0.0);
      out.loop.emplace(std::move(split), attempt.return_rates);
    }
    out.attempts.push_back(std::move(attempt));
    if (out.loop && stop_at_first) break;
  } while (out.exhaustive && std::next_permutation(order.begin(), order.end(), std::greater<>()));
  return out;
}

LoopGenerator from_mean_times(std::span<const double> mean_times, std::span<const double> split_rates) {
  if (mean_times.size() != split_rates.size()) {
    throw Error(ErrorCode::LengthMismatch, "need one split rate per mean time");
  }
  std::vector<double> rates;
  double previous = 0.0;
  for (double t : mean_times) {
    if (!(t > previous) || !std::isfinite(t)) {
      throw Error(ErrorCode::NonIncreasingTimes, "mean times must satisfy 0 < t_1 < ... < t_N");
    }
    rates.push_back(1.0 / (t - previous));
    previous = t;
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t k = i + 1; k < rates.size(); ++k) {
      if (rates_coincide(rates[i], rates[k])) {
        std::ostringstream os;
        os << "gaps " << i + 1 << " and " << k + 1 << " are equal (" << 1.0 / rates[i] << ')';
        throw Error(ErrorCode::DuplicateGaps, os.str());
      }
    }
  }
  return LoopGenerator(std::vector<double>(split_rates.begin(), split_rates.end()), std::move(rates));
}

EmbeddedChain me_to_mp(double decay_rate, const ExpPolyKernel& K, double u0) {
  const double mass = kernel_mass(K);
  if (!(std::abs(decay_rate - mass) <= 1e-9 * std::abs(decay_rate))) {
    std::ostringstream os;
    os.precision(17);
    os << "decay rate " << decay_rate << " differs from the kernel mass " << mass;
    throw Error(ErrorCode::InconsistentMass, os.str());
  }
  Decomposition dec = decompose_to_loop(K);
  if (!dec.loop) {
    std::ostringstream os;
    os << "no ordering of the exponents yields nonnegative split rates; most negative per ordering:";
    for (const auto& a : dec.attempts) os << ' ' << a.most_negative;
    throw Error(ErrorCode::Infeasible, os.str());
  }
  std::vector<double> p0(dec.loop->states(), 0.0);
  p0[0] = u0;
  GeneratorMatrix gen = build_generator(*dec.loop);
  return {std::move(*dec.loop), std::move(gen), ProbabilityVector(std::move(p0))};
}

}  // namespace memchain
