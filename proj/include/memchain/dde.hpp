#pragma once

#include "memchain/core.hpp"
#include "memchain/polynomial.hpp"

#include <span>
#include <vector>

namespace memchain {

/// Erlang kernel b^N t^{N-1} e^{-b t} / (N-1)! with b = N / T: unit mass,
/// mean time T.
ExpPolyKernel erlang_kernel(std::size_t order, double delay);

/// Method of steps for u' = -a u(t) + a u(t - T) with u(t) = e^{-a t} u0 on
/// [0, T]. The step is shrunk so that T is a whole number of steps; the
/// history segment is analytic on [0, T] and cubic Hermite afterwards.
Trajectory solve_dde(double decay_rate, double delay, double u0, double t_end, double step);

/// Step actually used by solve_dde for a requested step.
double dde_step(double delay, double step);

/// First component of the single-loop chain with N stages and rate N / T.
Trajectory chain_approximation(double decay_rate, double delay, std::size_t order, double u0,
                               std::span<const double> times);

/// 0 and the `count` nonzero roots of smallest modulus of
/// x + a - a e^{-x T} = 0, by Newton from a grid of starting points.
/// Every root has residual <= 1e-10; conjugates are exact mirror images.
std::vector<cplx> dde_char_roots(double decay_rate, double delay, std::size_t count);

/// Eigenvalues of the cyclic chain as the roots of
/// (x + a)(x + b)^N - a b^N, b = N / T, sorted like `spectrum`.
std::vector<cplx> cyclic_spectrum(double decay_rate, double delay, std::size_t order);

/// Greedy nearest-neighbour pairing: for each of `probe` (in order) the
/// distance to the closest not-yet-used entry of `targets`.
std::vector<double> match_roots(std::span<const cplx> probe, std::span<const cplx> targets);

/// Nonzero entries sorted by modulus (ties: real part descending, then
/// imaginary part ascending).
std::vector<cplx> smallest_nonzero(std::span<const cplx> values, std::size_t count);

}  // namespace memchain
