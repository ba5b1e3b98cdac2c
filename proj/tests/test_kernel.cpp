#include "memchain/dde.hpp"
#include "memchain/kernel.hpp"
#include "support.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace memchain;
using doctest::Approx;

TEST_CASE("Lagrange weights") {
  const std::vector<double> b23{2.0, 3.0};
  const auto psi = lagrange_psi(b23, 2);
  CHECK(psi[0] == Approx(3.0).epsilon(1e-15));
  CHECK(psi[1] == Approx(-2.0).epsilon(1e-15));
  CHECK(lagrange_psi(b23, 1) == std::vector<double>{1.0});

  const std::vector<double> b81{8.0, 1.0};
  const auto q = lagrange_psi(b81, 2);
  CHECK(q[0] == Approx(-1.0 / 7.0).epsilon(1e-15));
  CHECK(q[1] == Approx(8.0 / 7.0).epsilon(1e-15));

  const std::vector<double> same{2.0, 2.0 * (1.0 + 1e-12)};
  try {
    lagrange_psi(same, 2);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CoincidentRates);
  }

  std::string warned;
  set_warning_sink([&](std::string_view m) { warned = m; });
  const std::vector<double> close{1.0, 1.0 + 1e-6};
  lagrange_psi(close, 2);
  set_warning_sink(nullptr);
  CHECK_FALSE(warned.empty());
}

TEST_CASE("Lagrange partition and product-to-sum identity") {
  testing::LoopSampler sampler(17);
  std::uniform_real_distribution<double> Z(0.01, 20.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto b = sampler.distinct_rates(sampler.size(8));
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const auto psi = lagrange_psi(b, j);
      CHECK(std::abs(std::accumulate(psi.begin(), psi.end(), 0.0) - 1.0) <= 1e-10);
      const double z = Z(sampler.engine());
      double prod = 1.0, sum = 0.0;
      for (std::size_t i = 0; i < j; ++i) {
        prod *= b[i] / (z + b[i]);
        sum += psi[i] * b[i] / (z + b[i]);
      }
      CHECK(std::abs(prod - sum) <= 1e-10);
    }
  }
}

TEST_CASE("synthesized kernels") {
  SUBCASE("two loops, generic rates") {
    const double a1 = 2.0, a2 = 5.0, b1 = 8.0, b2 = 1.0;
    const auto K = LoopKernel(LoopGenerator({a1, a2}, {b1, b2})).flatten();
    REQUIRE(K.terms().size() == 2);
    const double c = b1 * b2 * a2 / (b2 - b1);
    CHECK(K.terms()[0].rate == b1);
    CHECK(K.terms()[0].coeff == Approx(b1 * a1 + c).epsilon(1e-14));
    CHECK(K.terms()[1].rate == b2);
    CHECK(K.terms()[1].coeff == Approx(-c).epsilon(1e-14));
  }
  SUBCASE("second component only") {
    const auto K = LoopKernel(LoopGenerator({0.0, 1.0}, {2.0, 3.0})).flatten();
    REQUIRE(K.terms().size() == 2);
    CHECK(K.terms()[0].coeff == Approx(6.0).epsilon(1e-14));
    CHECK(K.terms()[1].coeff == Approx(-6.0).epsilon(1e-14));
  }
  SUBCASE("single loop") {
    const auto K = LoopKernel(LoopGenerator({1.0}, {2.5})).flatten();
    REQUIRE(K.terms().size() == 1);
    CHECK(K.terms()[0] == KernelTerm{2.5, 2.5, 0});
  }
  SUBCASE("psi matrix rows") {
    const LoopKernel lk(LoopGenerator({1.0, 1.0, 1.0}, {2.0, 3.0, 7.0}));
    CHECK(lk.psi()(0, 0) == 1.0);
    CHECK(lk.psi()(0, 1) == 0.0);
    CHECK(lk.psi().row(2).sum() == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("kernels match the chain read through the matrix exponential") {
  testing::LoopSampler sampler(8);
  for (int rep = 0; rep < 40; ++rep) {
    const LoopGenerator g = sampler.loop(sampler.size(6));
    const auto K = LoopKernel(g).flatten();
    for (double t : {0.0, 0.1, 0.7, 2.0, 5.0}) {
      CHECK(std::abs(kernel_eval(K, t) - testing::kernel_by_expm(g, t)) <= 1e-10 * std::max(1.0, K.max_abs_coeff()));
    }
  }
}

TEST_CASE("evaluation and derivatives") {
  const ExpPolyKernel cex({{3.0, 1.0, 0}, {-8.0, 2.0, 0}, {6.0, 3.0, 0}});
  CHECK(kernel_eval(cex, 0.0) == 1.0);
  CHECK(std::abs(kernel_eval(cex, 700.0)) <= 1e-250);

  const auto E2 = erlang_kernel(2, 2.0);  // b = 1
  CHECK(kernel_eval(E2, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-15));

  const ExpPolyKernel mix({{1.5, 0.7, 2}, {-0.4, 2.0, 0}, {2.0, 1.1, 1}});
  for (double t : {0.0, 0.3, 1.7}) {
    const double h = 1e-4;
    const double fd1 = (kernel_eval(mix, t + h) - kernel_eval(mix, std::max(0.0, t - h))) / (t > 0 ? 2 * h : h);
    CHECK(kernel_derivative(mix, t, 1) == Approx(fd1).epsilon(t > 0 ? 1e-7 : 1e-3));
    const double fd2 =
        (kernel_derivative(mix, t + h, 1) - kernel_derivative(mix, std::max(0.0, t - h), 1)) / (t > 0 ? 2 * h : h);
    CHECK(kernel_derivative(mix, t, 2) == Approx(fd2).epsilon(t > 0 ? 1e-7 : 1e-3));
    CHECK(kernel_derivative(mix, t, 0) == kernel_eval(mix, t));
  }
}

TEST_CASE("Laplace transforms") {
  SUBCASE("table entries") {
    const double b = 1.7;
    const auto R = kernel_laplace(ExpPolyKernel({{b, b, 0}}));
    for (double x : {0.0, 0.5, 3.0}) CHECK(R(x) == Approx(b / (x + b)).epsilon(1e-14));

    const auto E = kernel_laplace(erlang_kernel(4, 2.0));
    for (double x : {0.0, 0.5, 3.0}) CHECK(E(x) == Approx(std::pow(2.0 / (x + 2.0), 4)).epsilon(1e-13));
  }
  SUBCASE("loop kernels are products of first-order factors") {
    testing::LoopSampler sampler(29);
    for (int rep = 0; rep < 30; ++rep) {
      const LoopGenerator g = sampler.loop(sampler.size(6));
      const auto K = LoopKernel(g).flatten();
      const auto R = kernel_laplace(K);
      CHECK(R(0.0) == Approx(g.total_split_rate()).epsilon(1e-11));
      for (double x : {0.2, 1.0, 4.0}) {
        double want = 0.0, prod = 1.0;
        for (std::size_t j = 0; j < g.loops(); ++j) {
          prod *= g.return_rates()[j] / (x + g.return_rates()[j]);
          want += g.split_rates()[j] * prod;
        }
        CHECK(R(x) == Approx(want).epsilon(1e-10));
        CHECK(kernel_laplace_at(K, cplx(x, 0.0)).real() == Approx(want).epsilon(1e-12));
      }
    }
  }
  SUBCASE("agrees with quadrature of the time-domain kernel") {
    testing::LoopSampler sampler(31);
    boost::math::quadrature::exp_sinh<double> integrator;
    std::uniform_real_distribution<double> L(0.05, 10.0);
    for (int rep = 0; rep < 50; ++rep) {
      const LoopGenerator g = sampler.loop(sampler.size(4));
      const auto K = LoopKernel(g).flatten();
      const double lambda = L(sampler.engine());
      const double quad = integrator.integrate([&](double t) { return std::exp(-lambda * t) * kernel_eval(K, t); });
      CHECK(std::abs(kernel_laplace(K)(lambda) - quad) <= 1e-8 * std::max(1.0, std::abs(quad)));
    }
  }
}

TEST_CASE("moments") {
  const std::vector<double> b{2.0, 3.0};
  const LoopKernel lk(LoopGenerator({1.0, 1.0}, b));
  const auto m2 = moments(lk.component(2));
  CHECK(m2.mass == Approx(1.0).epsilon(1e-14));
  CHECK(m2.mean_time == Approx(5.0 / 6.0).epsilon(1e-14));

  for (std::size_t N : {1u, 3u, 10u}) {
    const auto m = moments(erlang_kernel(N, 1.8));
    CHECK(m.mass == Approx(1.0).epsilon(1e-13));
    CHECK(m.mean_time == Approx(1.8).epsilon(1e-13));
  }

  CHECK_THROWS_AS(moments(ExpPolyKernel({{1.0, 1.0, 0}, {-2.0, 2.0, 0}})), Error);

  // Well-separated rates: the 1e-12 bound holds outright.
  testing::LoopSampler sampler(41, 0.2, 5.0, 0.5);
  for (int rep = 0; rep < 50; ++rep) {
    const LoopKernel k(sampler.loop(sampler.size(8)));
    const auto rates = k.generator().return_rates();
    double mean = 0.0;
    for (std::size_t j = 1; j <= rates.size(); ++j) {
      mean += 1.0 / rates[j - 1];
      const auto mj = moments(k.component(j));
      CHECK(std::abs(mj.mass - 1.0) <= 1e-12);
      CHECK(std::abs(mj.mean_time - mean) <= 1e-12 * std::max(1.0, mean));
    }
  }

  // Nearly confluent rates: the error is bounded by the cancellation in sum psi.
  testing::LoopSampler close(43, 0.2, 5.0, 0.02);
  for (int rep = 0; rep < 50; ++rep) {
    const LoopKernel k(close.loop(close.size(8)));
    for (std::size_t j = 1; j <= k.generator().loops(); ++j) {
      const double cond = k.psi().row(static_cast<Eigen::Index>(j - 1)).cwiseAbs().sum();
      CHECK(std::abs(moments(k.component(j)).mass - 1.0) <= 16.0 * 2.2e-16 * static_cast<double>(j) * cond);
    }
  }
}

TEST_CASE("positivity") {
  const ExpPolyKernel cex({{3.0, 1.0, 0}, {-8.0, 2.0, 0}, {6.0, 3.0, 0}});
  const auto rep = positivity_check(cex);
  CHECK(rep.positive);
  CHECK(rep.tail_certified);
  const auto wm = weighted_minimum(cex, 4.0, 10.0);
  CHECK(std::abs(wm.value - 0.8590718) <= 1e-4);
  CHECK(std::abs(wm.argmin - 0.215315) <= 1e-4);

  const auto neg = positivity_check(ExpPolyKernel({{1.0, 1.0, 0}, {-2.0, 2.0, 0}}));
  CHECK_FALSE(neg.positive);
  CHECK(neg.min_value == Approx(-1.0));
  CHECK(neg.argmin == 0.0);

  // Short horizon: the tail bound has to certify everything beyond t = 1.
  const auto late = positivity_check(ExpPolyKernel({{1.0, 1.0, 0}, {-1.0, 0.5, 0}, {1.0, 0.5, 1}}), 1.0);
  CHECK(late.positive);

  const auto slow_negative = positivity_check(ExpPolyKernel({{1.0, 2.0, 0}, {-1e-3, 0.1, 0}}));
  CHECK_FALSE(slow_negative.positive);

  testing::LoopSampler sampler(51);
  for (int r = 0; r < 100; ++r) {
    const LoopGenerator g = sampler.loop(sampler.size(6));
    const auto pr = positivity_check(LoopKernel(g).flatten());
    CHECK(pr.positive);
  }
}

TEST_CASE("lemma falsifier") {
  const ExpPolyKernel cex({{3.0, 1.0, 0}, {-8.0, 2.0, 0}, {6.0, 3.0, 0}});
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.5 * i);
  CHECK(lemma_positivity_samples(cex, 20, grid));

  const ExpPolyKernel bad({{1.0, 1.0, 0}, {-2.0, 2.0, 0}});
  const std::vector<double> two{2.0};
  CHECK_FALSE(lemma_positivity_samples(bad, 1, two));
  CHECK(lemma_positivity_samples(ExpPolyKernel({{1.0, 1.0, 0}}), 30, grid));
}

TEST_CASE("simplex integrals reproduce the components") {
  const std::vector<double> b23{2.0, 3.0};
  CHECK(simplex_oracle(b23, 1.0) == Approx(6.0 * (std::exp(-2.0) - std::exp(-3.0))).epsilon(1e-12));
  CHECK(std::abs(simplex_oracle(b23, 0.0)) <= 1e-15);
  const std::vector<double> b1{1.3};
  CHECK(simplex_oracle(b1, 0.4) == Approx(1.3 * std::exp(-1.3 * 0.4)).epsilon(1e-14));
  const std::vector<double> five{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(simplex_oracle(five, 1.0), Error);

  testing::LoopSampler sampler(61);
  for (int rep = 0; rep < 10; ++rep) {
    const LoopKernel lk(sampler.loop(4));
    const auto rates = lk.generator().return_rates();
    for (std::size_t j = 1; j <= 4; ++j) {
      const auto Kj = lk.component(j);
      for (int k = 0; k < 20; ++k) {
        const double t = 0.25 * k;
        CHECK(std::abs(simplex_oracle(rates.first(j), t) - kernel_eval(Kj, t)) <= 1e-8);
      }
    }
  }
}
