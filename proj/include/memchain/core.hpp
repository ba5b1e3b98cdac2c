#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memchain {

enum class ErrorCode {
  NonPositiveReturnRate,
  NegativeSplitRate,
  EmptyLoop,
  AllSplitRatesZero,
  LengthMismatch,
  ParseError,
  InvariantViolation,
  InvalidRate,
  NonUniqueStationary,
  RootFindingFailure,
  CoincidentRates,
  ZeroMass,
  DimensionTooLarge,
  InconsistentMass,
  Infeasible,
  StepTooLarge,
  RepeatedPoles,
  InvalidParams,
  RootCountShortfall,
  NonIncreasingTimes,
  DuplicateGaps,
};

std::string_view to_string(ErrorCode code);

/// Every domain failure in the library is reported through this type; the
/// code is stable and machine readable, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Non-fatal numerical warnings (near-coincident rates, refused permutation
/// searches). The default sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

/// Relative tolerance under which two rates count as the same rate.
inline constexpr double kCoincidenceTolerance = 1e-9;
bool rates_coincide(double x, double y);

// ---------------------------------------------------------------------------
// Loop chains
// ---------------------------------------------------------------------------

/// Throws Error unless the rates describe a valid loop chain.
void validate_loop(std::span<const double> split_rates, std::span<const double> return_rates);

/// The (N+1)-state loop chain: state 0 splits into loop j at rate split_rates[j],
/// and loop j returns to state 0 through states j, j-1, ..., 1, each step
/// leaving state i at rate return_rates[i].
class LoopGenerator {
 public:
  LoopGenerator(std::vector<double> split_rates, std::vector<double> return_rates);

  std::span<const double> split_rates() const { return split_; }
  std::span<const double> return_rates() const { return return_; }
  std::size_t loops() const { return split_.size(); }
  std::size_t states() const { return split_.size() + 1; }
  double total_split_rate() const;

  bool operator==(const LoopGenerator&) const = default;

 private:
  std::vector<double> split_;
  std::vector<double> return_;
};

// ---------------------------------------------------------------------------
// Generator matrices
// ---------------------------------------------------------------------------

/// Dense forward generator acting on probability column vectors:
/// off-diagonal entries are nonnegative and every column sums to zero.
class GeneratorMatrix {
 public:
  explicit GeneratorMatrix(Eigen::MatrixXd entries);

  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(std::size_t row, std::size_t col) const {
    return entries_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  /// Largest absolute diagonal entry (the fastest exit rate).
  double max_exit_rate() const;
  /// Max-abs-column-sum norm.
  double norm() const;

  bool operator==(const GeneratorMatrix& other) const { return entries_ == other.entries_; }

 private:
  Eigen::MatrixXd entries_;
};

// ---------------------------------------------------------------------------
// Exponential-polynomial kernels
// ---------------------------------------------------------------------------

/// One term coeff * t^power * exp(-rate * t).
struct KernelTerm {
  double coeff = 0.0;
  double rate = 0.0;
  int power = 0;

  bool operator==(const KernelTerm&) const = default;
};

/// A memory kernel K(t) = sum_i c_i t^{k_i} e^{-alpha_i t}. Terms sharing a
/// (rate, power) pair are merged on construction, exact zeros dropped, and
/// the first-occurrence order of the remaining terms is kept.
class ExpPolyKernel {
 public:
  ExpPolyKernel() = default;
  explicit ExpPolyKernel(std::vector<KernelTerm> terms);

  std::span<const KernelTerm> terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  /// True when every term is a plain exponential (power 0).
  bool is_exponential_sum() const;
  double min_rate() const;
  double max_abs_coeff() const;

  bool operator==(const ExpPolyKernel&) const = default;

 private:
  std::vector<KernelTerm> terms_;
};

// ---------------------------------------------------------------------------
// Trajectories and mass vectors
// ---------------------------------------------------------------------------

/// Sampled solution on a strictly increasing time grid starting at 0. Each
/// sample holds `width` values (1 for scalar equations, n for chains).
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::size_t width);

  std::size_t size() const { return times_.size(); }
  std::size_t width() const { return width_; }
  std::span<const double> times() const { return times_; }
  double time(std::size_t step) const { return times_[step]; }

  double& at(std::size_t step, std::size_t component) { return values_[step * width_ + component]; }
  double at(std::size_t step, std::size_t component) const { return values_[step * width_ + component]; }
  std::span<const double> sample(std::size_t step) const {
    return std::span<const double>(values_).subspan(step * width_, width_);
  }
  std::vector<double> component(std::size_t index) const;

 private:
  std::vector<double> times_;
  std::size_t width_;
  std::vector<double> values_;
};

/// Uniform grid 0, h, 2h, ..., intervals*h.
struct UniformGrid {
  double step = 0.0;
  std::size_t intervals = 0;

  /// Grid with the largest step <= `step` that lands exactly on `t_end`.
  static UniformGrid covering(double t_end, double step);
  double end() const { return step * static_cast<double>(intervals); }
  std::vector<double> times() const;
};

/// Nonnegative masses whose total is the conserved quantity (u0 for the
/// embedded chains, not necessarily 1). Entries in [-1e-12, 0) are clamped.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> masses);

  std::span<const double> masses() const { return masses_; }
  std::size_t size() const { return masses_.size(); }
  double operator[](std::size_t i) const { return masses_[i]; }
  double total() const;
  Eigen::VectorXd to_eigen() const;

 private:
  std::vector<double> masses_;
};

}  // namespace memchain
