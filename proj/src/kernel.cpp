#include "memchain/kernel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace memchain {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double ipow(double x, int k) {
  if (k <= 0) return 1.0;
  return std::pow(x, k);
}

/// sum_i c_i t^k_i e^{-rate_i t} and its derivatives; rates may be any sign.
double eval_terms(std::span<const KernelTerm> terms, double t, int order) {
  CompensatedSum acc;
  for (const auto& term : terms) {
    const double e = std::exp(-term.rate * t);
    if (e == 0.0) continue;
    const double k = term.power;
    const double a = term.rate;
    double poly = 0.0;
    switch (order) {
      case 0:
        poly = ipow(t, term.power);
        break;
      case 1:
        poly = -a * ipow(t, term.power) + (term.power >= 1 ? k * ipow(t, term.power - 1) : 0.0);
        break;
      case 2:
        poly = a * a * ipow(t, term.power) - (term.power >= 1 ? 2.0 * a * k * ipow(t, term.power - 1) : 0.0) +
               (term.power >= 2 ? k * (k - 1) * ipow(t, term.power - 2) : 0.0);
        break;
      default:
        throw Error(ErrorCode::InvalidParams, "only derivatives up to order 2 are supported");
    }
    acc.add(term.coeff * poly * e);
  }
  return acc.value();
}

struct Minimum {
  double value;
  double argmin;
};

/// Refines a grid local minimum inside [lo, hi] with safeguarded Newton on f'.
Minimum refine_minimum(std::span<const KernelTerm> terms, double lo, double hi, double start) {
  double t = start;
  double best_t = start;
  double best_v = eval_terms(terms, start, 0);
  for (int it = 0; it < 60; ++it) {
    const double d1 = eval_terms(terms, t, 1);
    const double d2 = eval_terms(terms, t, 2);
    double next;
    if (d2 > 0.0) {
      next = t - d1 / d2;
    } else {
      next = d1 > 0.0 ? 0.5 * (lo + t) : 0.5 * (t + hi);
    }
    if (!(next > lo) || !(next < hi)) next = d1 > 0.0 ? 0.5 * (lo + t) : 0.5 * (t + hi);
    if (d1 > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double v = eval_terms(terms, next, 0);
    if (v < best_v) {
      best_v = v;
      best_t = next;
    }
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) break;
    t = next;
  }
  return {best_v, best_t};
}

/// Global minimum over [0, horizon]: 2048-point grid (linear head,
/// log-spaced tail) and refinement around every grid local minimum.
Minimum global_minimum(std::span<const KernelTerm> terms, double horizon) {
  constexpr std::size_t kHalf = 1024;
  std::vector<double> grid;
  grid.reserve(2 * kHalf);
  const double split = horizon / 16.0;
  for (std::size_t i = 0; i < kHalf; ++i) grid.push_back(split * static_cast<double>(i) / kHalf);
  const double ratio = std::log(horizon / split);
  for (std::size_t i = 0; i < kHalf; ++i) {
    grid.push_back(split * std::exp(ratio * static_cast<double>(i) / (kHalf - 1)));
  }
  grid.back() = horizon;

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = eval_terms(terms, grid[i], 0);

  Minimum best{values[0], grid[0]};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (values[i] < best.value) best = {values[i], grid[i]};
    const bool left_ok = i == 0 || values[i] <= values[i - 1];
    const bool right_ok = i + 1 == grid.size() || values[i] <= values[i + 1];
    if (!(left_ok && right_ok)) continue;
    const double lo = i == 0 ? grid[0] : grid[i - 1];
    const double hi = i + 1 == grid.size() ? grid[i] : grid[i + 1];
    if (hi > lo) {
      const Minimum m = refine_minimum(terms, lo, hi, grid[i]);
      if (m.value < best.value) best = m;
    }
  }
  return best;
}

enum class TailSign { Positive, Negative, Unknown };

/// Sign of K on [horizon, inf) from the slowest-decaying term: each other
/// term's ratio to it is bounded by its value at the horizon once past its
/// turning point.
TailSign tail_sign(std::span<const KernelTerm> terms, double horizon) {
  if (terms.empty()) return TailSign::Positive;
  const KernelTerm* dom = &terms[0];
  for (const auto& t : terms) {
    if (t.rate < dom->rate || (t.rate == dom->rate && t.power > dom->power)) dom = &t;
  }
  double ratio_sum = 0.0;
  for (const auto& t : terms) {
    if (&t == dom) continue;
    const double dk = t.power - dom->power;
    const double da = t.rate - dom->rate;
    if (da > 0.0) {
      if (dk > 0.0 && horizon < dk / da) return TailSign::Unknown;
    } else if (dk > 0.0) {
      return TailSign::Unknown;
    }
    ratio_sum += std::abs(t.coeff / dom->coeff) * std::pow(horizon, dk) * std::exp(-da * horizon);
  }
  if (ratio_sum >= 1.0) return TailSign::Unknown;
  return dom->coeff > 0.0 ? TailSign::Positive : TailSign::Negative;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> lagrange_psi(std::span<const double> b, std::size_t order) {
  if (order == 0 || order > b.size()) {
    throw Error(ErrorCode::InvalidParams, "psi order must lie in 1..number of rates");
  }
  double max_rate = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < order; ++i) {
    max_rate = std::max(max_rate, std::abs(b[i]));
    for (std::size_t k = i + 1; k < order; ++k) {
      if (rates_coincide(b[i], b[k])) {
        std::ostringstream os;
        os << "rates " << i + 1 << " and " << k + 1 << " coincide (" << b[i] << ')';
        throw Error(ErrorCode::CoincidentRates, os.str());
      }
      min_gap = std::min(min_gap, std::abs(b[i] - b[k]));
    }
  }
  if (order > 1 && min_gap / max_rate < 1e-4) {
    std::ostringstream os;
    os << "nearly coincident rates (relative gap " << min_gap / max_rate << "); Lagrange weights are ill-conditioned";
    warn(os.str());
  }
  std::vector<double> psi(order, 1.0);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t k = 0; k < order; ++k) {
      if (k != i) psi[i] *= b[k] / (b[k] - b[i]);
    }
  }
  return psi;
}

LoopKernel::LoopKernel(LoopGenerator gen) : gen_(std::move(gen)) {
  const auto b = gen_.return_rates();
  const auto n = static_cast<Eigen::Index>(gen_.loops());
  psi_ = Eigen::MatrixXd::Zero(n, n);
  // Full-length check first so the error names the offending pair.
  lagrange_psi(b, b.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto row = lagrange_psi(b, static_cast<std::size_t>(j + 1));
    for (Eigen::Index i = 0; i <= j; ++i) psi_(j, i) = row[static_cast<std::size_t>(i)];
  }
}

ExpPolyKernel LoopKernel::component(std::size_t j) const {
  if (j == 0 || j > gen_.loops()) throw Error(ErrorCode::InvalidParams, "loop index out of range");
  const auto b = gen_.return_rates();
  std::vector<KernelTerm> terms;
  for (std::size_t i = 0; i < j; ++i) {
    terms.push_back({b[i] * psi_(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(i)), b[i], 0});
  }
  return ExpPolyKernel(std::move(terms));
}

ExpPolyKernel LoopKernel::flatten() const {
  const auto a = gen_.split_rates();
  const auto b = gen_.return_rates();
  const std::size_t n = gen_.loops();
  std::vector<KernelTerm> terms;
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum acc;
    for (std::size_t j = i; j < n; ++j) {
      acc.add(a[j] * psi_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
    }
    terms.push_back({b[i] * acc.value(), b[i], 0});
  }
  return ExpPolyKernel(std::move(terms));
}

// ---------------------------------------------------------------------------

double kernel_eval(const ExpPolyKernel& K, double t) { return eval_terms(K.terms(), t, 0); }

double kernel_derivative(const ExpPolyKernel& K, double t, int order) { return eval_terms(K.terms(), t, order); }

RationalFunction kernel_laplace(const ExpPolyKernel& K) {
  struct Factor {
    double rate;
    int multiplicity;
  };
  std::vector<Factor> factors;
  for (const auto& t : K.terms()) {
    auto it = std::find_if(factors.begin(), factors.end(), [&](const Factor& f) { return f.rate == t.rate; });
    if (it == factors.end()) {
      factors.push_back({t.rate, t.power + 1});
    } else {
      it->multiplicity = std::max(it->multiplicity, t.power + 1);
    }
  }
  auto power_of = [](double rate, int m) {
    Polynomial p{1.0};
    for (int i = 0; i < m; ++i) p = p * Polynomial::linear_factor(rate);
    return p;
  };
  Polynomial den{1.0};
  for (const auto& f : factors) den = den * power_of(f.rate, f.multiplicity);
  Polynomial num;
  for (const auto& t : K.terms()) {
    Polynomial term{t.coeff * factorial(t.power)};
    for (const auto& f : factors) {
      const int m = f.rate == t.rate ? f.multiplicity - (t.power + 1) : f.multiplicity;
      term = term * power_of(f.rate, m);
    }
    num = num + term;
  }
  return RationalFunction(num, den);
}

cplx kernel_laplace_at(const ExpPolyKernel& K, cplx lambda) {
  cplx acc = 0.0;
  for (const auto& t : K.terms()) acc += t.coeff * factorial(t.power) / std::pow(lambda + t.rate, t.power + 1);
  return acc;
}

double kernel_mass(const ExpPolyKernel& K) {
  CompensatedSum mass;
  for (const auto& t : K.terms()) mass.add(t.coeff * factorial(t.power) / std::pow(t.rate, t.power + 1));
  return mass.value();
}

KernelMoments moments(const ExpPolyKernel& K) {
  CompensatedSum mass;
  CompensatedSum first;
  double scale = 0.0;
  for (const auto& t : K.terms()) {
    const double m0 = t.coeff * factorial(t.power) / std::pow(t.rate, t.power + 1);
    mass.add(m0);
    first.add(m0 * (t.power + 1) / t.rate);
    scale += std::abs(m0);
  }
  if (scale == 0.0 || std::abs(mass.value()) <= 1e-14 * scale) {
    throw Error(ErrorCode::ZeroMass, "kernel has zero mass; mean time is undefined");
  }
  return {mass.value(), first.value() / mass.value()};
}

// ---------------------------------------------------------------------------

PositivityReport positivity_check(const ExpPolyKernel& K, double horizon) {
  PositivityReport report;
  if (K.empty()) {
    report.positive = true;
    report.tail_certified = true;
    report.horizon = horizon > 0.0 ? horizon : 0.0;
    return report;
  }
  if (!(horizon > 0.0)) horizon = 50.0 / K.min_rate();
  const auto terms = K.terms();
  TailSign tail = tail_sign(terms, horizon);
  for (int extend = 0; tail == TailSign::Unknown && extend < 8; ++extend) {
    horizon *= 2.0;
    tail = tail_sign(terms, horizon);
  }
  const Minimum m = global_minimum(terms, horizon);
  report.min_value = m.value;
  report.argmin = m.argmin;
  report.horizon = horizon;
  report.tail_certified = tail != TailSign::Unknown;
  const double tol = 1e-12 * K.max_abs_coeff();
  report.positive = m.value >= -tol && tail == TailSign::Positive;
  return report;
}

WeightedMinimum weighted_minimum(const ExpPolyKernel& K, double shift, double horizon) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidParams, "horizon must be positive");
  std::vector<KernelTerm> shifted(K.terms().begin(), K.terms().end());
  for (auto& t : shifted) t.rate -= shift;
  const Minimum m = global_minimum(shifted, horizon);
  return {m.value, m.argmin};
}

bool lemma_positivity_samples(const ExpPolyKernel& K, int max_order, std::span<const double> grid) {
  if (!K.is_exponential_sum()) throw Error(ErrorCode::InvalidParams, "lemma check needs a pure exponential sum");
  for (int m = 1; m <= max_order; ++m) {
    for (double x : grid) {
      if (x < 0.0) throw Error(ErrorCode::InvalidParams, "lemma check samples x >= 0 only");
      CompensatedSum acc;
      double scale = 0.0;
      for (const auto& t : K.terms()) {
        const double v = t.coeff / std::pow(x + t.rate, m);
        acc.add(v);
        scale += std::abs(v);
      }
      if (acc.value() < -1e-12 * scale) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

double simplex_oracle(std::span<const double> b, double t) {
  using Rule = boost::math::quadrature::gauss<double, 32>;
  const std::size_t dim = b.size();
  if (dim == 0) throw Error(ErrorCode::InvalidParams, "simplex oracle needs at least one rate");
  if (dim > 4) throw Error(ErrorCode::DimensionTooLarge, "simplex oracle supports at most 4 rates");
  if (t < 0.0) throw Error(ErrorCode::InvalidParams, "time must be nonnegative");

  double prefactor = ipow(t, static_cast<int>(dim) - 1);
  for (double r : b) prefactor *= r;

  // Iterated parameterization: s_1 in [0,1], s_k in [0, 1 - s_1 - ... - s_{k-1}],
  // s_dim = remainder. Integrand exp(-t <b, s>).
  std::function<double(std::size_t, double, double)> level = [&](std::size_t k, double remaining,
                                                                 double partial) -> double {
    if (k + 1 == dim) return std::exp(-t * (partial + b[k] * remaining));
    return Rule::integrate(
        [&](double s) { return level(k + 1, remaining - s, partial + b[k] * s); }, 0.0, remaining);
  };
  return prefactor * level(0, 1.0, 0.0);
}

}  // namespace memchain
