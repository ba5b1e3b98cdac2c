#include "memchain/dde.hpp"
#include "memchain/kernel.hpp"
#include "memchain/markov.hpp"
#include "memchain/me_solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

using namespace memchain;
using doctest::Approx;

TEST_CASE("Erlang kernels") {
  const auto K = erlang_kernel(2, 1.0);
  REQUIRE(K.terms().size() == 1);
  CHECK(K.terms()[0].coeff == 4.0);
  CHECK(K.terms()[0].rate == 2.0);
  CHECK(K.terms()[0].power == 1);

  for (std::size_t N : {1u, 3u, 7u, 20u}) {
    const double T = 1.7;
    const auto E = erlang_kernel(N, T);
    const auto m = moments(E);
    CHECK(m.mass == Approx(1.0).epsilon(1e-12));
    CHECK(m.mean_time == Approx(T).epsilon(1e-12));
    // Same as the equal-rate chain read off its return block.
    std::vector<double> split(N, 0.0);
    split.back() = 1.0;
    const LoopGenerator chain(split, std::vector<double>(N, static_cast<double>(N) / T));
    for (double t : {0.1, 0.9, 2.5}) {
      CHECK(std::abs(kernel_eval(E, t) - testing::kernel_by_expm(chain, t)) <= 1e-11 * std::max(1.0, kernel_eval(E, t)));
    }
  }
  CHECK_THROWS_AS(erlang_kernel(0, 1.0), Error);
  CHECK_THROWS_AS(erlang_kernel(2, 0.0), Error);
}

TEST_CASE("method of steps") {
  const double a = 1.3, T = 0.8, u0 = 2.0;
  const auto tr = solve_dde(a, T, u0, 3.0 * T, 1e-3);
  const double h = dde_step(T, 1e-3);
  CHECK(std::abs(T / h - std::round(T / h)) <= 1e-9);

  double head = 0.0, second = 0.0;
  for (std::size_t s = 0; s < tr.size(); ++s) {
    const double t = tr.time(s);
    if (t <= T) {
      head = std::max(head, std::abs(tr.at(s, 0) - std::exp(-a * t) * u0));
    } else if (t <= 2.0 * T) {
      const double exact = std::exp(-a * (t - T)) * (std::exp(-a * T) * u0 + a * u0 * (t - T));
      second = std::max(second, std::abs(tr.at(s, 0) - exact));
    }
  }
  CHECK(head <= 4.0 * std::numeric_limits<double>::epsilon() * u0);
  CHECK(second <= 1e-9);
}

TEST_CASE("delay equilibria") {
  const double a = 1.6, T = 1.8;
  const auto tr = solve_dde(a, T, 1.0, 40.0, 1e-3);
  CHECK(std::abs(tr.at(tr.size() - 1, 0) - 1.0 / (1.0 + a * T)) <= 1e-3);
  for (std::size_t N : {1u, 4u, 30u}) {
    std::vector<double> split(N, 0.0);
    split.back() = a;
    const LoopGenerator chain(split, std::vector<double>(N, static_cast<double>(N) / T));
    CHECK(equilibrium_me(chain, 1.0) == Approx(1.0 / (1.0 + a * T)).epsilon(1e-14));
  }
}

TEST_CASE("chains converge to the delay equation") {
  const double a = 1.0, T = 1.0;
  const auto dde = solve_dde(a, T, 1.0, 10.0, 1e-3);
  double previous = 1e300;
  for (std::size_t N : {5u, 10u, 20u, 40u}) {
    const auto chain = chain_approximation(a, T, N, 1.0, dde.times());
    double sup = 0.0;
    for (std::size_t s = 0; s < dde.size(); ++s) sup = std::max(sup, std::abs(chain.at(s, 0) - dde.at(s, 0)));
    CHECK(sup < previous);
    previous = sup;
  }

  // The chain is the memory equation with a times the Erlang kernel.
  const auto grid = UniformGrid::covering(4.0, 1e-3);
  const auto chain = chain_approximation(0.7, 1.5, 3, 1.0, grid.times());
  const auto erlang = erlang_kernel(3, 1.5);
  std::vector<KernelTerm> scaled(erlang.terms().begin(), erlang.terms().end());
  for (auto& term : scaled) term.coeff *= 0.7;
  const auto vol = solve_me(0.7, ExpPolyKernel(scaled), 1.0, grid);
  double sup = 0.0;
  for (std::size_t s = 0; s < vol.size(); ++s) sup = std::max(sup, std::abs(chain.at(s, 0) - vol.at(s, 0)));
  CHECK(sup <= 1e-5);
}

TEST_CASE("Erlang transforms approach the pure delay") {
  const double T = 1.2;
  for (double x : {0.3, 1.0, 2.5}) {
    double previous = 1e300;
    for (std::size_t N : {1u, 4u, 16u, 64u}) {
      const auto E = erlang_kernel(N, T);
      const double numeric = boost::math::quadrature::exp_sinh<double>().integrate(
          [&](double t) { return std::exp(-x * t) * kernel_eval(E, t); });
      CHECK(kernel_laplace_at(E, x).real() == Approx(numeric).epsilon(1e-8));
      const double gap = std::abs(kernel_laplace_at(E, x).real() - std::exp(-x * T));
      CHECK(gap < previous);
      previous = gap;
    }
  }
}

TEST_CASE("delay characteristic roots") {
  for (auto [a, T] : {std::pair{1.0, 1.0}, std::pair{1.6, 1.8}, std::pair{0.3, 4.0}}) {
    const auto roots = dde_char_roots(a, T, 8);
    REQUIRE(roots.size() == 9);
    CHECK(roots[0] == cplx(0.0, 0.0));
    for (std::size_t i = 1; i < roots.size(); ++i) {
      const cplx z = roots[i];
      CHECK(std::abs(z + a - a * std::exp(-z * T)) <= 1e-10);
      CHECK(z.real() < 0.0);
      CHECK(std::abs(z) >= std::abs(roots[i - 1]) - 1e-12);
      if (z.imag() != 0.0) {
        CHECK(std::find(roots.begin(), roots.end(), std::conj(z)) != roots.end());
      }
    }
  }
}

TEST_CASE("cyclic spectrum") {
  const auto two = cyclic_spectrum(1.5, 2.0, 1);
  REQUIRE(two.size() == 2);
  CHECK(std::abs(two[0]) <= 1e-14);
  CHECK(std::abs(two[1] + (1.5 + 0.5)) <= 1e-13);

  for (std::size_t N : {1u, 2u, 5u, 10u, 20u, 40u}) {
    const double a = 1.0, T = 1.0;
    const auto roots = cyclic_spectrum(a, T, N);
    REQUIRE(roots.size() == N + 1);
    const auto matrix = dense_spectrum(build_cyclic_generator(a, static_cast<double>(N) / T, N));
    const auto d = match_roots(roots, matrix);
    CHECK(*std::max_element(d.begin(), d.end()) <= 1e-8);
    const auto loop = spectrum(build_cyclic_generator(a, static_cast<double>(N) / T, N));
    const auto dl = match_roots(loop, matrix);
    CHECK(*std::max_element(dl.begin(), dl.end()) <= 1e-8);
    std::size_t zeros = 0;
    for (const auto& z : roots) {
      if (std::abs(z) <= 1e-12) ++zeros;
      else CHECK(z.real() < 0.0);
    }
    CHECK(zeros == 1);
  }
}

TEST_CASE("cyclic eigenvalues approach the delay roots") {
  const auto targets = dde_char_roots(1.0, 1.0, 8);
  double previous = 1e300;
  for (std::size_t N : {10u, 20u, 40u, 80u}) {
    const auto lead = smallest_nonzero(cyclic_spectrum(1.0, 1.0, N), 1);
    const std::vector<cplx> nonzero(targets.begin() + 1, targets.end());
    const double d = match_roots(lead, nonzero)[0];
    CHECK(d < previous);
    previous = d;
  }
}

TEST_CASE("root bookkeeping") {
  const std::vector<cplx> v{{0.0, 0.0}, {-3.0, 0.0}, {-1.0, 2.0}, {-1.0, -2.0}, {-0.5, 0.0}};
  const auto s = smallest_nonzero(v, 3);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == cplx(-0.5, 0.0));
  CHECK(s[1] == cplx(-1.0, -2.0));
  CHECK(s[2] == cplx(-1.0, 2.0));

  const std::vector<cplx> probe{{0.0, 0.0}, {0.1, 0.0}};
  const std::vector<cplx> targets{{0.0, 0.05}, {1.0, 0.0}};
  const auto d = match_roots(probe, targets);
  CHECK(d[0] == Approx(0.05));
  CHECK(d[1] == Approx(0.9));
}
