#pragma once

#include "memchain/core.hpp"
#include "memchain/polynomial.hpp"

#include <span>
#include <vector>

namespace memchain {

/// Solves u' = -a u + (K * u)(t), u(0) = u0, on a uniform grid by product
/// trapezoidal convolution (u piecewise linear, kernel weights integrated
/// exactly to quadrature precision) and an implicit trapezoidal step.
/// Second order. Throws StepTooLarge if h (a + |mass K|) > 0.5.
Trajectory solve_me(double decay_rate, const ExpPolyKernel& K, double u0, const UniformGrid& grid);

/// First component of the embedded chain integrated with RK4.
Trajectory solve_me_via_mp(double decay_rate, const ExpPolyKernel& K, double u0, const UniformGrid& grid);

/// Laplace transform of the solution: u0 prod(x + b_i) / det(x I - A*).
RationalFunction laplace_solution(const LoopGenerator& gen, double u0);

struct Mode {
  cplx residue;
  cplx pole;
};

/// u(t) = sum_k r_k e^{p_k t} from the partial fractions of the Laplace
/// solution. Throws RepeatedPoles when two poles are closer than
/// 1e-6 max|pole|.
std::vector<Mode> closed_form(const LoopGenerator& gen, double u0);

/// Real part of sum_k r_k e^{p_k t}.
double evaluate_modes(std::span<const Mode> modes, double t);

/// Long-time limit u0 / Z.
double equilibrium_me(const LoopGenerator& gen, double u0);

}  // namespace memchain
