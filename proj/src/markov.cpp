#include "memchain/markov.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace memchain {

GeneratorMatrix build_generator(const LoopGenerator& gen) {
  const auto split = gen.split_rates();
  const auto ret = gen.return_rates();
  const auto n = static_cast<Eigen::Index>(gen.states());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A(0, 0) = -gen.total_split_rate();
  for (Eigen::Index j = 1; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(j - 1);
    A(j, 0) = split[idx];
    A(j, j) = -ret[idx];
    A(j - 1, j) = ret[idx];
  }
  return GeneratorMatrix(std::move(A));
}

GeneratorMatrix build_cyclic_generator(double split_rate, double return_rate, std::size_t loops) {
  if (loops == 0) throw Error(ErrorCode::EmptyLoop, "cyclic chain needs at least one loop state");
  if (!(split_rate > 0.0) || !(return_rate > 0.0) || !std::isfinite(split_rate) || !std::isfinite(return_rate)) {
    throw Error(ErrorCode::InvalidRate, "cyclic chain rates must be positive and finite");
  }
  std::vector<double> split(loops, 0.0);
  split.back() = split_rate;
  return build_generator(LoopGenerator(std::move(split), std::vector<double>(loops, return_rate)));
}

std::optional<LoopGenerator> as_loop(const GeneratorMatrix& gm) {
  const auto& A = gm.entries();
  const Eigen::Index n = A.rows();
  if (n < 2) return std::nullopt;
  std::vector<double> split(static_cast<std::size_t>(n - 1));
  std::vector<double> ret(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 1; j < n; ++j) {
      const bool allowed = (i == j) || (i == j - 1);
      if (!allowed && A(i, j) != 0.0) return std::nullopt;
    }
  }
  for (Eigen::Index j = 1; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(j - 1);
    split[idx] = A(j, 0);
    ret[idx] = A(j - 1, j);
    if (A(j, j) != -ret[idx]) return std::nullopt;
  }
  try {
    return LoopGenerator(std::move(split), std::move(ret));
  } catch (const Error&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------

double partition_constant(const LoopGenerator& gen) {
  const auto split = gen.split_rates();
  const auto ret = gen.return_rates();
  double z = 1.0;
  double tail = 0.0;
  for (std::size_t i = gen.loops(); i-- > 0;) {
    tail += split[i];
    z += tail / ret[i];
  }
  return z;
}

ProbabilityVector stationary_loop(const LoopGenerator& gen, double u0) {
  const auto split = gen.split_rates();
  const auto ret = gen.return_rates();
  const double z = partition_constant(gen);
  std::vector<double> mu(gen.states());
  double tail = 0.0;
  for (std::size_t i = gen.loops(); i-- > 0;) {
    tail += split[i];
    mu[i + 1] = tail / ret[i] * u0 / z;
  }
  mu[0] = u0 / z;
  return ProbabilityVector(std::move(mu));
}

ProbabilityVector stationary(const GeneratorMatrix& gm, double total_mass) {
  const auto& A = gm.entries();
  const Eigen::Index n = A.rows();
  if (n == 1) return ProbabilityVector({total_mass});

  Eigen::FullPivLU<Eigen::MatrixXd> rank_lu(A / std::max(gm.norm(), 1e-300));
  rank_lu.setThreshold(1e-10);
  if (rank_lu.rank() < n - 1) {
    throw Error(ErrorCode::NonUniqueStationary,
                "generator has a null space of dimension " + std::to_string(n - rank_lu.rank()));
  }

  Eigen::MatrixXd M = A;
  M.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = total_mass;
  Eigen::VectorXd mu = M.partialPivLu().solve(rhs);

  const double residual = (A * mu).cwiseAbs().maxCoeff();
  if (residual > 1e-10 * std::max(gm.norm(), 1.0) * std::max(std::abs(total_mass), 1.0)) {
    throw Error(ErrorCode::NonUniqueStationary, "stationary solve residual too large");
  }
  return ProbabilityVector(std::vector<double>(mu.data(), mu.data() + n));
}

DetailedBalance detailed_balance(const GeneratorMatrix& gm, const ProbabilityVector& mu) {
  const auto& A = gm.entries();
  const Eigen::Index n = A.rows();
  double mu_norm = 0.0;
  for (double m : mu.masses()) mu_norm = std::max(mu_norm, std::abs(m));
  DetailedBalance out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::abs(A(i, j) * mu[static_cast<std::size_t>(j)] - A(j, i) * mu[static_cast<std::size_t>(i)]);
      out.max_violation = std::max(out.max_violation, v);
    }
  }
  out.holds = out.max_violation <= 1e-10 * gm.norm() * mu_norm;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Value with a first derivative, for forward-mode differentiation of
/// factored polynomials.
struct Jet {
  cplx v;
  cplx d;
  Jet operator*(const Jet& o) const { return {v * o.v, v * o.d + d * o.v}; }
  Jet operator-(const Jet& o) const { return {v - o.v, d - o.d}; }
  Jet operator+(const Jet& o) const { return {v + o.v, d + o.d}; }
};

void snap_zero_mode(std::vector<cplx>& values, double scale) {
  if (values.empty()) return;
  auto it = std::min_element(values.begin(), values.end(),
                             [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
  if (std::abs(*it) > 1e-9 * std::max(scale, 1.0)) {
    std::ostringstream os;
    os << "generator has no eigenvalue near 0 (closest " << std::abs(*it) << ")";
    throw Error(ErrorCode::RootFindingFailure, os.str());
  }
  *it = 0.0;
  sort_spectrum(values);
}

}  // namespace

RootProblem loop_characteristic(const LoopGenerator& gen) {
  const std::vector<double> split(gen.split_rates().begin(), gen.split_rates().end());
  const std::vector<double> ret(gen.return_rates().begin(), gen.return_rates().end());
  const double total = gen.total_split_rate();
  RootProblem problem;
  problem.degree = static_cast<int>(gen.states());
  problem.center = 0.0;
  problem.radius = 2.0 * std::max(total, *std::max_element(ret.begin(), ret.end()));
  problem.eval = [split, ret, total](cplx z) {
    // (z + a) prod_i (z + b_i)/b_i - sum_j a_j prod_{i>j} (z + b_i)/b_i, built
    // from the innermost loop outward so each suffix product is shared.
    const std::size_t n = ret.size();
    Jet suffix{1.0, 0.0};
    Jet returned{0.0, 0.0};
    double abs_suffix = 1.0;
    double abs_returned = 0.0;
    for (std::size_t j = n; j-- > 0;) {
      returned = returned + Jet{split[j], 0.0} * suffix;
      abs_returned += split[j] * abs_suffix;
      suffix = suffix * Jet{(z + ret[j]) / ret[j], 1.0 / ret[j]};
      abs_suffix *= std::abs(z + ret[j]) / ret[j];
    }
    const Jet p = Jet{z + total, 1.0} * suffix - returned;
    return PolyEval{p.v, p.d, std::abs(z + total) * abs_suffix + abs_returned};
  };
  return problem;
}

std::vector<cplx> dense_spectrum(const GeneratorMatrix& gm) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(gm.entries(), false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::RootFindingFailure, "dense eigensolver failed");
  const auto ev = solver.eigenvalues();
  std::vector<cplx> values(ev.data(), ev.data() + ev.size());
  for (auto& z : values) {
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) z = {z.real(), 0.0};
  }
  snap_zero_mode(values, gm.norm());
  return values;
}

std::vector<cplx> spectrum(const GeneratorMatrix& gm) {
  if (gm.size() > 64) throw Error(ErrorCode::InvalidParams, "spectrum supports at most 64 states");
  if (gm.size() == 1) return {0.0};
  if (const auto loop = as_loop(gm)) {
    std::vector<cplx> values = aberth_roots(loop_characteristic(*loop));
    snap_zero_mode(values, gm.norm());
    return values;
  }
  return dense_spectrum(gm);
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd rk4_propagator(const Eigen::MatrixXd& A, double dt, double max_rate) {
  // Steps within the 0.1 guard are taken as given; longer ones are split to
  // h * rate <= 0.01.
  const double z = dt * max_rate;
  const auto substeps = z <= 0.1 ? 1 : static_cast<int>(std::ceil(z / 0.01 - 1e-12));
  const double h = dt / substeps;
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd hA = h * A;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd step = term;
  for (int k = 1; k <= 4; ++k) {
    term = term * hA / static_cast<double>(k);
    step += term;
  }
  Eigen::MatrixXd total = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd base = step;
  for (int e = substeps; e > 0; e >>= 1) {
    if (e & 1) total = total * base;
    base = base * base;
  }
  return total;
}

}  // namespace

Trajectory integrate(const GeneratorMatrix& gm, const ProbabilityVector& p0, std::span<const double> times) {
  if (p0.size() != gm.size()) throw Error(ErrorCode::InvalidParams, "initial state has the wrong dimension");
  Trajectory traj(std::vector<double>(times.begin(), times.end()), gm.size());
  Eigen::VectorXd p = p0.to_eigen();
  for (std::size_t c = 0; c < gm.size(); ++c) traj.at(0, c) = p(static_cast<Eigen::Index>(c));

  const double max_rate = gm.max_exit_rate();
  double cached_dt = -1.0;
  Eigen::MatrixXd propagator;
  for (std::size_t s = 1; s < times.size(); ++s) {
    const double dt = times[s] - times[s - 1];
    if (std::abs(dt - cached_dt) > 1e-10 * dt) {
      propagator = rk4_propagator(gm.entries(), dt, max_rate);
      cached_dt = dt;
    }
    p = propagator * p;
    for (std::size_t c = 0; c < gm.size(); ++c) traj.at(s, c) = p(static_cast<Eigen::Index>(c));
  }
  return traj;
}

}  // namespace memchain
