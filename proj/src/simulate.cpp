#include "memchain/markov.hpp"
#include "memchain/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace memchain {

namespace {

std::size_t draw_categorical(std::span<const double> weights, double total, SplitMix64Stream& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

/// Walks one path and calls `record(step, state)` for every grid time.
template <typename Record>
void walk(const Eigen::MatrixXd& A, std::span<const double> p0, double p0_total, std::span<const double> times,
          SplitMix64Stream& rng, Record&& record) {
  const auto n = static_cast<std::size_t>(A.rows());
  std::vector<double> out_rates(n);
  std::size_t state = draw_categorical(p0, p0_total, rng);
  double t = 0.0;
  std::size_t step = 0;
  while (step < times.size()) {
    const double exit = -A(static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(state));
    const double next_jump = exit > 0.0 ? t + rng.exponential(exit) : std::numeric_limits<double>::infinity();
    while (step < times.size() && times[step] < next_jump) record(step++, state);
    if (step >= times.size()) break;
    for (std::size_t i = 0; i < n; ++i) {
      out_rates[i] = i == state ? 0.0 : A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(state));
    }
    state = draw_categorical(out_rates, exit, rng);
    t = next_jump;
  }
}

}  // namespace

std::vector<std::size_t> sample_path(const GeneratorMatrix& A, const ProbabilityVector& p0,
                                     std::span<const double> times, std::uint64_t seed, std::uint64_t path) {
  SplitMix64Stream rng(seed, path);
  std::vector<std::size_t> states(times.size());
  walk(A.entries(), p0.masses(), p0.total(), times, rng, [&](std::size_t s, std::size_t st) { states[s] = st; });
  return states;
}

EnsembleResult simulate_ctmc(const GeneratorMatrix& A, const ProbabilityVector& p0, double t_end,
                             const SimulationOptions& options) {
  if (options.paths == 0) throw Error(ErrorCode::InvalidParams, "need at least one path");
  if (!(t_end > 0.0) || options.intervals == 0) throw Error(ErrorCode::InvalidParams, "need t_end > 0 and a grid");
  if (p0.size() != A.size()) throw Error(ErrorCode::InvalidParams, "initial state has the wrong dimension");
  const double total = p0.total();
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidParams, "initial state carries no mass");

  const UniformGrid grid{t_end / static_cast<double>(options.intervals), options.intervals};
  std::vector<double> times = grid.times();
  times.back() = t_end;
  const std::size_t n = A.size();
  const std::size_t steps = times.size();

  // Occupation counts are integers, so the reduction is exact in any order.
  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.paths)));
  std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(steps * n, 0));
  auto run_range = [&](unsigned w) {
    auto& local = counts[w];
    for (std::size_t path = w; path < options.paths; path += workers) {
      SplitMix64Stream rng(options.seed, path);
      walk(A.entries(), p0.masses(), total, times, rng,
           [&](std::size_t s, std::size_t state) { ++local[s * n + state]; });
    }
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
  }

  EnsembleResult result{Trajectory(times, n), Trajectory(times, n), options.paths};
  const auto paths = static_cast<double>(options.paths);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t c = 0; c < n; ++c) {
      std::uint64_t k = 0;
      for (const auto& local : counts) k += local[s * n + c];
      const double frac = static_cast<double>(k) / paths;
      result.mean.at(s, c) = total * frac;
      result.std_error.at(s, c) = total * std::sqrt(frac * (1.0 - frac) / paths);
    }
  }
  return result;
}

}  // namespace memchain
