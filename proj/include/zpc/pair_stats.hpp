#pragma once

/// Pair-correlation sums over zero multisets.
///
///   F(alpha, T) = sum_{rho, rho'} T^{i alpha (gamma - gamma')} w(gamma - gamma'),  w(u) = 4 / (4 + u^2)
///   calF(alpha, T) = sum_{rho, rho'} T^{alpha (rho - rho')} W(rho - rho'),         W(z) = 4 / (4 - z^2)
///
/// Two strategies compute F. The windowed strategy sums pairs with
/// |gamma - gamma'| <= U directly and charges the rest to a certified tail
/// bound. The spectral strategy uses
///
///   F(alpha, T) = int e^{-2|xi|} |sum_gamma m_gamma e^{i gamma (alpha log T + xi)}|^2 d xi
///
/// by trapezoidal quadrature on |xi| <= Xi, so it is real and nonnegative by
/// construction; its bound covers aliasing, truncation and phase rounding.

#include <iosfwd>
#include <string>
#include <vector>

#include "zpc/common.hpp"
#include "zpc/zero_multiset.hpp"

namespace zpc {

enum class Weight { w, W };
enum class Exponent { unitary, full };
enum class Method { windowed, spectral };

std::string to_string(Method m);
Method parse_method(const std::string& s);

double weight_w(double u);
/// Throws InvalidArgument at z^2 = 4.
cplx weight_W(cplx z);

struct PairSumSpec {
  Weight weight = Weight::w;
  Exponent exponent = Exponent::unitary;
  HeightRange range{0.0, 1000.0};
  std::vector<double> alpha_grid;
  Method method = Method::windowed;
  /// U; 0 selects default_window_cutoff.
  double window_cutoff = 0.0;
  /// Xi, at least 10.
  double quad_halfwidth = 15.0;
  /// 0 selects 2 pi / (4 gamma_max).
  double quad_step = 0.0;
  int workers = 1;
};

struct CurvePoint {
  double alpha = 0.0;
  cplx raw;
  double normalized = 0.0;  // Re raw / ((T/2pi) log T)
  double predicted = 0.0;   // T^{-2 alpha} log T + alpha
  double residual = 0.0;    // normalized - predicted
  double trunc_bound = 0.0; // window tail, or xi truncation for spectral
  double quad_bound = 0.0;  // aliasing + rounding
  bool outside_theorem = false;  // alpha outside [0, 1]

  [[nodiscard]] double error_bound() const { return trunc_bound + quad_bound; }
};

struct CorrelationCurve {
  double T = 0.0;
  double scale = 0.0;
  Method method = Method::windowed;
  double window_cutoff = 0.0;
  double quad_step = 0.0;
  long zero_count = 0;  // with multiplicity, in range
  std::vector<CurvePoint> points;
};

/// U such that 4 N (log T / 2pi) / U is 1e-3 of (T/2pi) log T.
double default_window_cutoff(long n_zeros, double T);

/// "lo:hi:step" -> inclusive grid.
std::vector<double> parse_alpha_grid(const std::string& spec);
std::vector<double> default_alpha_grid();

/// Throws InvalidArgument for an empty range or unsupported method combination.
CorrelationCurve pair_correlation(const ZeroMultiset& zs, const PairSumSpec& spec);

/// Ordered pairs (with multiplicity), both in range, with |gamma - gamma'| <= h.
long close_pair_count(const ZeroMultiset& zs, const HeightRange& range, double h);

struct WeightSumReport {
  double T = 0.0;
  double sum = 0.0;          // sum over pairs with gamma, gamma' <= T of w(gamma - gamma')
  double trunc_bound = 0.0;
  double ratio = 0.0;        // sum / (T log^2 T)
};
WeightSumReport weight_sum_bound_check(const ZeroMultiset& zs, double T, int workers = 1);

/// alpha,raw,normalized,predicted,residual,trunc_bound,method
/// (trunc_bound carries the full attached error bound).
void write_curve_csv(std::ostream& out, const CorrelationCurve& curve);

}  // namespace zpc
