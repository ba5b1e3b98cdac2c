#include "memchain/core.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>

namespace memchain {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveReturnRate: return "NonPositiveReturnRate";
    case ErrorCode::NegativeSplitRate: return "NegativeSplitRate";
    case ErrorCode::EmptyLoop: return "EmptyLoop";
    case ErrorCode::AllSplitRatesZero: return "AllSplitRatesZero";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::NonUniqueStationary: return "NonUniqueStationary";
    case ErrorCode::RootFindingFailure: return "RootFindingFailure";
    case ErrorCode::CoincidentRates: return "CoincidentRates";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::InconsistentMass: return "InconsistentMass";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::RepeatedPoles: return "RepeatedPoles";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::RootCountShortfall: return "RootCountShortfall";
    case ErrorCode::NonIncreasingTimes: return "NonIncreasingTimes";
    case ErrorCode::DuplicateGaps: return "DuplicateGaps";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink_slot() {
  static WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return sink;
}

}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  sink_slot() = std::move(sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink_slot()) sink_slot()(message);
}

bool rates_coincide(double x, double y) {
  return std::abs(x - y) <= kCoincidenceTolerance * std::max(std::abs(x), std::abs(y));
}

// ---------------------------------------------------------------------------

void validate_loop(std::span<const double> split_rates, std::span<const double> return_rates) {
  if (split_rates.size() != return_rates.size()) {
    std::ostringstream os;
    os << "split rates have length " << split_rates.size() << ", return rates have length "
       << return_rates.size();
    throw Error(ErrorCode::LengthMismatch, os.str());
  }
  if (split_rates.empty()) throw Error(ErrorCode::EmptyLoop, "a loop chain needs at least one loop");
  bool any_positive = false;
  for (std::size_t j = 0; j < split_rates.size(); ++j) {
    if (!(return_rates[j] > 0.0) || !std::isfinite(return_rates[j])) {
      throw Error(ErrorCode::NonPositiveReturnRate,
                  "return rate " + std::to_string(j + 1) + " must be positive and finite");
    }
    if (!(split_rates[j] >= 0.0) || !std::isfinite(split_rates[j])) {
      throw Error(ErrorCode::NegativeSplitRate,
                  "split rate " + std::to_string(j + 1) + " must be nonnegative and finite");
    }
    any_positive = any_positive || split_rates[j] > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::AllSplitRatesZero, "state 0 is not coupled to any loop");
}

LoopGenerator::LoopGenerator(std::vector<double> split_rates, std::vector<double> return_rates)
    : split_(std::move(split_rates)), return_(std::move(return_rates)) {
  validate_loop(split_, return_);
}

double LoopGenerator::total_split_rate() const {
  return std::accumulate(split_.begin(), split_.end(), 0.0);
}

// ---------------------------------------------------------------------------

GeneratorMatrix::GeneratorMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw Error(ErrorCode::InvariantViolation, "generator must be a nonempty square matrix");
  }
  if (!entries_.allFinite()) throw Error(ErrorCode::InvariantViolation, "generator has non-finite entries");
  const Eigen::Index n = entries_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double sum = 0.0;
    double scale = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j && entries_(i, j) < 0.0) {
        std::ostringstream os;
        os << "off-diagonal entry (" << i << ',' << j << ") = " << entries_(i, j) << " is negative";
        throw Error(ErrorCode::InvariantViolation, os.str());
      }
      sum += entries_(i, j);
      scale = std::max(scale, std::abs(entries_(i, j)));
    }
    if (std::abs(sum) > 1e-12 * scale) {
      std::ostringstream os;
      os << "column " << j << " sums to " << sum;
      throw Error(ErrorCode::InvariantViolation, os.str());
    }
  }
}

double GeneratorMatrix::max_exit_rate() const { return entries_.diagonal().cwiseAbs().maxCoeff(); }

double GeneratorMatrix::norm() const { return entries_.cwiseAbs().colwise().sum().maxCoeff(); }

// ---------------------------------------------------------------------------

ExpPolyKernel::ExpPolyKernel(std::vector<KernelTerm> terms) {
  for (const auto& term : terms) {
    if (!(term.rate > 0.0) || !std::isfinite(term.rate)) {
      throw Error(ErrorCode::InvariantViolation, "kernel decay rates must be positive and finite");
    }
    if (term.power < 0) throw Error(ErrorCode::InvariantViolation, "kernel powers must be nonnegative");
    if (!std::isfinite(term.coeff)) throw Error(ErrorCode::InvariantViolation, "kernel coefficient is not finite");
    auto it = std::find_if(terms_.begin(), terms_.end(), [&](const KernelTerm& t) {
      return t.rate == term.rate && t.power == term.power;
    });
    if (it == terms_.end()) {
      terms_.push_back(term);
    } else {
      it->coeff += term.coeff;
    }
  }
  std::erase_if(terms_, [](const KernelTerm& t) { return t.coeff == 0.0; });
}

bool ExpPolyKernel::is_exponential_sum() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const KernelTerm& t) { return t.power == 0; });
}

double ExpPolyKernel::min_rate() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) r = std::min(r, t.rate);
  return r;
}

double ExpPolyKernel::max_abs_coeff() const {
  double c = 0.0;
  for (const auto& t : terms_) c = std::max(c, std::abs(t.coeff));
  return c;
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(std::vector<double> times, std::size_t width)
    : times_(std::move(times)), width_(width), values_(times_.size() * width, 0.0) {
  if (times_.empty() || times_.front() != 0.0) {
    throw Error(ErrorCode::InvariantViolation, "trajectory grid must start at t = 0");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw Error(ErrorCode::InvariantViolation, "trajectory grid must be strictly increasing");
    }
  }
}

std::vector<double> Trajectory::component(std::size_t index) const {
  std::vector<double> out(times_.size());
  for (std::size_t s = 0; s < times_.size(); ++s) out[s] = at(s, index);
  return out;
}

UniformGrid UniformGrid::covering(double t_end, double step) {
  if (!(step > 0.0) || !(t_end > 0.0)) throw Error(ErrorCode::InvalidParams, "grid needs t_end > 0 and step > 0");
  const auto n = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
  return UniformGrid{t_end / static_cast<double>(n), n};
}

std::vector<double> UniformGrid::times() const {
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) t[i] = step * static_cast<double>(i);
  return t;
}

// ---------------------------------------------------------------------------

ProbabilityVector::ProbabilityVector(std::vector<double> masses) : masses_(std::move(masses)) {
  if (masses_.empty()) throw Error(ErrorCode::InvariantViolation, "probability vector is empty");
  double scale = 1.0;
  for (double m : masses_) scale = std::max(scale, std::abs(m));
  for (double& m : masses_) {
    if (!std::isfinite(m) || m < -1e-12 * scale) {
      throw Error(ErrorCode::InvariantViolation, "probability vector has a negative entry");
    }
    if (m < 0.0) m = 0.0;
  }
}

double ProbabilityVector::total() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

Eigen::VectorXd ProbabilityVector::to_eigen() const {
  return Eigen::Map<const Eigen::VectorXd>(masses_.data(), static_cast<Eigen::Index>(masses_.size()));
}

}  // namespace memchain
