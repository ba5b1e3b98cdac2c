#pragma once

#include "memchain/core.hpp"
#include "memchain/polynomial.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace memchain {

/// Forward generator of a loop chain: column 0 carries -a on the diagonal
/// and the split rates below it; row j carries -b_j on the diagonal and
/// b_{j+1} to its right.
GeneratorMatrix build_generator(const LoopGenerator& gen);

/// Single long loop of N+1 states: state 0 feeds state N at `split_rate`,
/// every state j >= 1 feeds state j-1 at `return_rate`.
GeneratorMatrix build_cyclic_generator(double split_rate, double return_rate, std::size_t loops);

/// Recovers the loop rates when `A` has the loop-chain sparsity pattern.
std::optional<LoopGenerator> as_loop(const GeneratorMatrix& A);

/// Stationary masses summing to `total_mass`. Throws NonUniqueStationary
/// when the null space is not one-dimensional.
ProbabilityVector stationary(const GeneratorMatrix& A, double total_mass);

/// Closed-form stationary state of a loop chain.
ProbabilityVector stationary_loop(const LoopGenerator& gen, double u0);

/// Normalization constant Z = 1 + sum_i (1/b_i) sum_{j>=i} a_j.
double partition_constant(const LoopGenerator& gen);

struct DetailedBalance {
  bool holds = false;
  double max_violation = 0.0;
};

DetailedBalance detailed_balance(const GeneratorMatrix& A, const ProbabilityVector& mu);

/// Characteristic polynomial det(x I - A*) of a loop chain, evaluated in
/// factored form and scaled by 1/prod(b).
RootProblem loop_characteristic(const LoopGenerator& gen);

/// Eigenvalues sorted by real part descending then imaginary part ascending,
/// with the zero mode snapped to exactly 0. Loop-structured matrices use the
/// factored characteristic polynomial; anything else goes through dense QR.
std::vector<cplx> spectrum(const GeneratorMatrix& A);

/// Dense Hessenberg-QR eigenvalues, same ordering and snapping.
std::vector<cplx> dense_spectrum(const GeneratorMatrix& A);

/// Classical RK4 on p' = A* p over an increasing grid starting at 0. Steps
/// longer than 0.1 / max exit rate are split into equal substeps of at most
/// 0.01 / max exit rate.
Trajectory integrate(const GeneratorMatrix& A, const ProbabilityVector& p0, std::span<const double> times);

struct EnsembleResult {
  Trajectory mean;      ///< per-state empirical mass
  Trajectory std_error; ///< standard error of each mean
  std::size_t paths = 0;
};

struct SimulationOptions {
  std::size_t paths = 10000;
  std::uint64_t seed = 0;
  std::size_t intervals = 100;  ///< uniform output grid on [0, t_end]
  unsigned threads = 1;
};

/// Jump-chain ensemble: each path is one particle whose initial state is
/// drawn from p0 / total. Per-path random streams make the result
/// independent of the thread count.
EnsembleResult simulate_ctmc(const GeneratorMatrix& A, const ProbabilityVector& p0, double t_end,
                             const SimulationOptions& options);

/// State visited by one path at each grid time (for reproducibility checks).
std::vector<std::size_t> sample_path(const GeneratorMatrix& A, const ProbabilityVector& p0,
                                     std::span<const double> times, std::uint64_t seed, std::uint64_t path);

}  // namespace memchain
