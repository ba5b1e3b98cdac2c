#include "memchain/dde.hpp"

#include "memchain/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memchain {

ExpPolyKernel erlang_kernel(std::size_t order, double delay) {
  if (order == 0 || !(delay > 0.0) || !std::isfinite(delay)) {
    throw Error(ErrorCode::InvalidParams, "Erlang kernel needs N >= 1 and T > 0");
  }
  const double rate = static_cast<double>(order) / delay;
  // b^N / (N-1)! interleaved so intermediate values stay moderate.
  double coeff = rate;
  for (std::size_t i = 2; i <= order; ++i) coeff *= rate / static_cast<double>(i - 1);
  return ExpPolyKernel({{coeff, rate, static_cast<int>(order) - 1}});
}

double dde_step(double delay, double step) {
  if (!(delay > 0.0) || !(step > 0.0)) throw Error(ErrorCode::InvalidParams, "delay and step must be positive");
  return delay / std::ceil(delay / step - 1e-9);
}

Trajectory solve_dde(double a, double delay, double u0, double t_end, double step) {
  if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidParams, "t_end must be positive");
  if (!(a >= 0.0)) throw Error(ErrorCode::InvalidParams, "decay rate must be nonnegative");
  const double h = dde_step(delay, step);
  const auto lag = static_cast<std::size_t>(std::llround(delay / h));
  const auto n = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  const UniformGrid grid{h, n};

  std::vector<double> u(n + 1), du(n + 1);
  auto history_exact = [&](double s) { return std::exp(-a * s) * u0; };
  for (std::size_t i = 0; i <= std::min(lag, n); ++i) {
    u[i] = history_exact(h * static_cast<double>(i));
    du[i] = i < lag ? -a * u[i] : -a * u[i] + a * u0;
  }

  // Delayed value at the midpoint of [t_k, t_{k+1}].
  auto delayed_mid = [&](std::size_t k) {
    if (k + 1 <= lag) return history_exact(h * (static_cast<double>(k) + 0.5));
    return 0.5 * (u[k] + u[k + 1]) + h * (du[k] - du[k + 1]) / 8.0;
  };

  for (std::size_t i = lag; i < n; ++i) {
    const std::size_t k = i - lag;
    const double d0 = u[k];
    const double dm = delayed_mid(k);
    const double d1 = u[k + 1];
    const double k1 = -a * u[i] + a * d0;
    const double k2 = -a * (u[i] + 0.5 * h * k1) + a * dm;
    const double k3 = -a * (u[i] + 0.5 * h * k2) + a * dm;
    const double k4 = -a * (u[i] + h * k3) + a * d1;
    u[i + 1] = u[i] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    du[i + 1] = -a * u[i + 1] + a * u[i + 1 - lag];
  }

  Trajectory traj(grid.times(), 1);
  for (std::size_t i = 0; i <= n; ++i) traj.at(i, 0) = u[i];
  return traj;
}

Trajectory chain_approximation(double a, double delay, std::size_t order, double u0, std::span<const double> times) {
  if (order == 0 || !(delay > 0.0)) throw Error(ErrorCode::InvalidParams, "need N >= 1 and T > 0");
  const GeneratorMatrix A = build_cyclic_generator(a, static_cast<double>(order) / delay, order);
  std::vector<double> p0(order + 1, 0.0);
  p0[0] = u0;
  const Trajectory full = integrate(A, ProbabilityVector(std::move(p0)), times);
  Trajectory traj(std::vector<double>(times.begin(), times.end()), 1);
  for (std::size_t s = 0; s < full.size(); ++s) traj.at(s, 0) = full.at(s, 0);
  return traj;
}

// ---------------------------------------------------------------------------

std::vector<cplx> dde_char_roots(double a, double delay, std::size_t count) {
  if (!(a > 0.0) || !(delay > 0.0)) throw Error(ErrorCode::InvalidParams, "need a > 0 and T > 0");
  const double T = delay;
  auto f = [&](cplx z) { return z + a - a * std::exp(-z * T); };
  auto df = [&](cplx z) { return 1.0 + a * T * std::exp(-z * T); };

  const double pi = std::acos(-1.0);
  const double im_max = 2.0 * pi * static_cast<double>(count + 2) / T;
  const double re_min = -(a + 10.0 / T);
  const double re_max = 1.0;
  const double spacing = 0.25 * pi / T;

  std::vector<cplx> found;
  auto record = [&](cplx z) {
    if (std::abs(z) <= 1e-12) z = 0.0;
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) z = {z.real(), 0.0};
    for (const auto& r : found) {
      if (std::abs(r - z) <= 1e-8 * std::max(1.0, std::abs(z))) return;
    }
    found.push_back(z);
  };

  for (double im = 0.0; im <= im_max + 1e-12; im += spacing) {
    for (double re = re_min; re <= re_max + 1e-12; re += spacing) {
      cplx z(re, im);
      bool ok = false;
      for (int it = 0; it < 100; ++it) {
        const cplx step = f(z) / df(z);
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(f(z)) > 1e-10) continue;
      }
      if (std::abs(f(z)) > 1e-10 || z.imag() < -1e-9) continue;
      record(z);
    }
  }

  std::vector<cplx> nonzero;
  bool has_zero = false;
  for (const auto& z : found) {
    if (z == 0.0) {
      has_zero = true;
      continue;
    }
    nonzero.push_back(z);
    if (z.imag() != 0.0) nonzero.push_back(std::conj(z));
  }
  if (!has_zero) throw Error(ErrorCode::RootFindingFailure, "Newton search missed the zero root");
  std::vector<cplx> smallest = smallest_nonzero(nonzero, count);
  if (smallest.size() < count) {
    throw Error(ErrorCode::RootCountShortfall,
                "found " + std::to_string(smallest.size()) + " nonzero roots, wanted " + std::to_string(count));
  }
  smallest.insert(smallest.begin(), cplx(0.0, 0.0));
  return smallest;
}

namespace {

cplx int_pow(cplx base, int exponent) {
  cplx result = 1.0;
  for (; exponent > 0; exponent >>= 1) {
    if (exponent & 1) result *= base;
    base *= base;
  }
  return result;
}

}  // namespace

std::vector<cplx> cyclic_spectrum(double a, double delay, std::size_t order) {
  if (order == 0 || !(a > 0.0) || !(delay > 0.0)) throw Error(ErrorCode::InvalidParams, "need N >= 1, a > 0, T > 0");
  const double b = static_cast<double>(order) / delay;
  const auto N = static_cast<int>(order);
  RootProblem problem;
  problem.degree = N + 1;
  problem.center = 0.0;
  problem.radius = 2.0 * std::max(a, b);
  // Scaled by b^{-N}: (z + a) ((z + b)/b)^N - a.
  problem.eval = [a, b, N](cplx z) {
    const cplx w = (z + b) / b;
    const cplx wn1 = int_pow(w, N - 1);
    const cplx wn = wn1 * w;
    return PolyEval{(z + a) * wn - a, wn + (z + a) * static_cast<double>(N) / b * wn1, std::abs((z + a) * wn) + a};
  };
  std::vector<cplx> roots = aberth_roots(problem);
  auto it = std::min_element(roots.begin(), roots.end(), [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
  if (std::abs(*it) > 1e-9 * std::max(1.0, b)) throw Error(ErrorCode::RootFindingFailure, "zero mode not found");
  *it = 0.0;
  sort_spectrum(roots);
  return roots;
}

std::vector<double> match_roots(std::span<const cplx> probe, std::span<const cplx> targets) {
  std::vector<bool> used(targets.size(), false);
  std::vector<double> dist;
  for (const auto& p : probe) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = targets.size();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(p - targets[i]);
      if (d < best) {
        best = d;
        best_idx = i;
      }
    }
    if (best_idx < targets.size()) used[best_idx] = true;
    dist.push_back(best);
  }
  return dist;
}

std::vector<cplx> smallest_nonzero(std::span<const cplx> values, std::size_t count) {
  std::vector<cplx> out;
  for (const auto& z : values) {
    if (z != 0.0) out.push_back(z);
  }
  std::sort(out.begin(), out.end(), [](cplx x, cplx y) {
    const double mx = std::abs(x), my = std::abs(y);
    if (std::abs(mx - my) > 1e-12 * std::max(mx, my)) return mx < my;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() < y.imag();
  });
  if (out.size() > count) out.resize(count);
  return out;
}

}  // namespace memchain
