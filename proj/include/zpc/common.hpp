#pragma once

/// Shared vocabulary for the zpc library: height ranges, error types,
/// compensated accumulators and the deterministic block-parallel driver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace zpc {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Bad caller input (invalid range, malformed file, unsupported combination).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not certify its answer.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open height interval (t_lo, t_hi].
struct HeightRange {
  double t_lo = 0.0;
  double t_hi = 0.0;

  HeightRange() = default;
  HeightRange(double lo, double hi);

  [[nodiscard]] bool contains(double gamma) const { return gamma > t_lo && gamma <= t_hi; }
  [[nodiscard]] double span() const { return t_hi - t_lo; }
  /// True for ranges of the form (T, 2T].
  [[nodiscard]] bool is_dyadic() const;
  /// The height T used in log T and (T/2pi) log T: t_lo for (T, 2T], t_hi otherwise.
  [[nodiscard]] double reference_height() const;
};

/// (T/2pi) log T, the normalizing scale of every pair statistic.
inline double pair_scale(double T) { return T / kTwoPi * std::log(T); }

/// Neumaier-compensated running sum.
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
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(cplx z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  void add(const CompensatedComplexSum& o) {
    re_.add(o.re_);
    im_.add(o.im_);
  }
  [[nodiscard]] cplx value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

/// Worker count: 0 means "use ZPC_WORKERS or hardware concurrency".
int resolve_workers(int requested);

/// Runs body(block) for block in [0, n_blocks) across `workers` threads.
/// Blocks are assigned round-robin; callers write into per-block slots and
/// reduce in block order, so results do not depend on the worker count.
void parallel_blocks(std::size_t n_blocks, int workers,
                     const std::function<void(std::size_t)>& body);

}  // namespace zpc
