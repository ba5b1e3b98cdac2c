#include "memchain/embed.hpp"
#include "memchain/kernel.hpp"
#include "memchain/markov.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace memchain;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvariantViolation;
}

const ExpPolyKernel kCounterexample({{3.0, 1.0, 0}, {-8.0, 2.0, 0}, {6.0, 3.0, 0}});

}  // namespace

TEST_CASE("two exponentials") {
  const auto dec = decompose_to_loop(ExpPolyKernel({{1.0, 1.0, 0}, {1.0, 2.0, 0}}));
  REQUIRE(dec.loop.has_value());
  CHECK(dec.loop->return_rates()[0] == 2.0);
  CHECK(dec.loop->return_rates()[1] == 1.0);
  CHECK(dec.loop->split_rates()[0] == Approx(1.0).epsilon(1e-15));
  CHECK(dec.loop->split_rates()[1] == Approx(0.5).epsilon(1e-15));
  CHECK(dec.attempts.size() == 1);
}

TEST_CASE("two-exponential formulas for the split rates") {
  // a_2 = c_2 (alpha_1 - alpha_2) / (alpha_1 alpha_2), a_1 = (c_1 + c_2) / alpha_1.
  const double c1 = 2.0, c2 = 0.7, al1 = 3.0, al2 = 1.2;
  const auto at = solve_split_rates(ExpPolyKernel({{c1, al1, 0}, {c2, al2, 0}}), std::vector<double>{al1, al2});
  CHECK(at.split_rates[1] == Approx(c2 * (al1 - al2) / (al1 * al2)).epsilon(1e-14));
  CHECK(at.split_rates[0] == Approx((c1 + c2) / al1).epsilon(1e-14));
  CHECK(at.feasible);
}

TEST_CASE("counterexample is infeasible in every ordering") {
  const auto dec = decompose_to_loop(kCounterexample, false);
  CHECK_FALSE(dec.loop.has_value());
  CHECK(dec.exhaustive);
  REQUIRE(dec.attempts.size() == 6);
  for (const auto& at : dec.attempts) {
    CHECK_FALSE(at.feasible);
    CHECK(at.most_negative < -1e-10);
  }
  CHECK(decompose_to_loop(kCounterexample).attempts.size() == 6);
  CHECK(code_of([] { me_to_mp(1.0, kCounterexample, 1.0); }) == ErrorCode::Infeasible);
}

TEST_CASE("round trip through the kernel") {
  const LoopGenerator fixture({2.0, 5.0}, {8.0, 1.0});
  const auto dec = decompose_to_loop(LoopKernel(fixture).flatten());
  REQUIRE(dec.loop.has_value());
  CHECK(dec.loop->return_rates()[0] == 8.0);
  CHECK(dec.loop->split_rates()[0] == Approx(2.0).epsilon(1e-13));
  CHECK(dec.loop->split_rates()[1] == Approx(5.0).epsilon(1e-13));

  SUBCASE("descending return rates come back entrywise") {
    testing::LoopSampler sampler(71, 0.2, 5.0, 0.1);
    for (int rep = 0; rep < 100; ++rep) {
      const LoopGenerator g = sampler.descending_loop(sampler.size(5));
      const auto d = decompose_to_loop(LoopKernel(g).flatten());
      REQUIRE(d.loop.has_value());
      const Eigen::MatrixXd diff = build_generator(*d.loop).entries() - build_generator(g).entries();
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  SUBCASE("any ordering comes back as the same kernel") {
    testing::LoopSampler sampler(73, 0.2, 5.0, 0.1);
    for (int rep = 0; rep < 100; ++rep) {
      const LoopGenerator g = sampler.loop(sampler.size(5));
      const auto K = LoopKernel(g).flatten();
      const auto d = decompose_to_loop(K);
      REQUIRE(d.loop.has_value());
      const auto K2 = LoopKernel(*d.loop).flatten();
      CHECK(d.loop->total_split_rate() == Approx(g.total_split_rate()).epsilon(1e-10));
      for (double t : {0.0, 0.3, 1.0, 3.0}) {
        CHECK(std::abs(kernel_eval(K, t) - kernel_eval(K2, t)) <= 1e-9 * std::max(1.0, K.max_abs_coeff()));
      }
    }
  }
}

TEST_CASE("ascending two-loop chains have a descending twin") {
  const double a1 = 1.0, a2 = 2.0, b1 = 1.0, b2 = 3.0;
  const auto d = decompose_to_loop(LoopKernel(LoopGenerator({a1, a2}, {b1, b2})).flatten());
  REQUIRE(d.loop.has_value());
  CHECK(d.loop->return_rates()[0] == b2);
  CHECK(d.loop->split_rates()[0] == Approx(a1 * b1 / b2).epsilon(1e-14));
  CHECK(d.loop->split_rates()[1] == Approx(a1 * (b2 - b1) / b2 + a2).epsilon(1e-14));
}

TEST_CASE("decomposition input checks") {
  CHECK_THROWS_AS(decompose_to_loop(ExpPolyKernel({{1.0, 1.0, 1}})), Error);
  std::string warned;
  set_warning_sink([&](std::string_view m) { warned = m; });
  std::vector<KernelTerm> seven;
  for (int i = 1; i <= 7; ++i) seven.push_back({1.0, static_cast<double>(i), 0});
  const auto d = decompose_to_loop(ExpPolyKernel(seven));
  set_warning_sink(nullptr);
  CHECK_FALSE(warned.empty());
  CHECK_FALSE(d.exhaustive);
  CHECK(d.attempts.size() == 1);
}

TEST_CASE("loops from mean times") {
  const std::vector<double> t{0.5, 5.0 / 6.0};
  const std::vector<double> a{1.0, 1.0};
  const LoopGenerator g = from_mean_times(t, a);
  CHECK(g.return_rates()[0] == Approx(2.0).epsilon(1e-15));
  CHECK(g.return_rates()[1] == Approx(3.0).epsilon(1e-13));

  const std::vector<double> one{2.5};
  const std::vector<double> a1{0.4};
  CHECK(from_mean_times(one, a1).return_rates()[0] == Approx(0.4).epsilon(1e-15));

  const std::vector<double> dup{1.0, 2.0};
  CHECK(code_of([&] { from_mean_times(dup, a); }) == ErrorCode::DuplicateGaps);
  const std::vector<double> back{1.0, 0.5};
  CHECK(code_of([&] { from_mean_times(back, a); }) == ErrorCode::NonIncreasingTimes);
  CHECK(code_of([&] { from_mean_times(one, a); }) == ErrorCode::LengthMismatch);

  testing::LoopSampler sampler(79);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = sampler.size(6);
    const auto gaps = sampler.distinct_rates(n);
    std::vector<double> times(n), w(n, 1.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) times[j] = acc += gaps[j];
    const LoopKernel lk(from_mean_times(times, w));
    for (std::size_t j = 1; j <= n; ++j) {
      const auto m = moments(lk.component(j));
      CHECK(std::abs(m.mass - 1.0) <= 1e-10);
      CHECK(std::abs(m.mean_time - times[j - 1]) <= 1e-10 * times[j - 1]);
    }
  }
}

TEST_CASE("embedding a memory equation") {
  const auto two = me_to_mp(1.0, ExpPolyKernel({{1.0, 1.0, 0}}), 2.0);
  Eigen::MatrixXd want(2, 2);
  want << -1, 1, 1, -1;
  CHECK(two.generator.entries() == want);
  CHECK(two.initial[0] == 2.0);
  CHECK(two.initial[1] == 0.0);

  const auto three = me_to_mp(1.5, ExpPolyKernel({{1.0, 1.0, 0}, {1.0, 2.0, 0}}), 1.0);
  CHECK(three.generator.size() == 3);
  CHECK(three.loop.split_rates()[1] == Approx(0.5));

  CHECK(code_of([] { me_to_mp(2.0, ExpPolyKernel({{1.0, 1.0, 0}}), 1.0); }) == ErrorCode::InconsistentMass);
}
