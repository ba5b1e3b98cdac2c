#pragma once

#include "memchain/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace memchain {

/// Result of solving for split rates with one particular assignment of the
/// kernel's exponents to loop positions.
struct OrderingAttempt {
  std::vector<double> return_rates;  ///< exponents in loop order b_1..b_N
  std::vector<double> split_rates;   ///< solved a_1..a_N (unclamped)
  double most_negative = 0.0;        ///< min_j a_j
  bool feasible = false;             ///< all a_j >= -1e-10
};

struct Decomposition {
  std::optional<LoopGenerator> loop;      ///< first feasible ordering, clamped
  std::vector<OrderingAttempt> attempts;  ///< every ordering tried, in search order
  bool exhaustive = false;                ///< false when the search was limited to one ordering
};

inline constexpr std::size_t kMaxPermutedExponents = 6;

/// Split rates making the flattened loop kernel with return rates `order`
/// equal to K (upper-triangular back substitution). K must be an
/// exponential sum whose exponents are exactly the entries of `order`.
OrderingAttempt solve_split_rates(const ExpPolyKernel& K, std::span<const double> order);

/// Represents a pure exponential sum as a loop-chain kernel with nonnegative
/// split rates. Tries the descending ordering first, then every other
/// permutation (N <= 6), stopping at the first feasible one; unless
/// `stop_at_first` is false, in which case all orderings are recorded.
Decomposition decompose_to_loop(const ExpPolyKernel& K, bool stop_at_first = true);

/// Loop whose j-th component kernel has mean time t_j: b_j = 1/(t_j - t_{j-1}).
LoopGenerator from_mean_times(std::span<const double> mean_times, std::span<const double> split_rates);

struct EmbeddedChain {
  LoopGenerator loop;
  GeneratorMatrix generator;
  ProbabilityVector initial;  ///< (u0, 0, ..., 0)
};

/// Markov embedding of u' = -a u + K*u. Requires a = integral of K (to 1e-9
/// relative) and a feasible decomposition; throws InconsistentMass or
/// Infeasible otherwise.
EmbeddedChain me_to_mp(double decay_rate, const ExpPolyKernel& K, double u0);

}  // namespace memchain
