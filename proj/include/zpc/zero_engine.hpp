#pragma once

/// Hardy Z-function evaluation, critical-line zero location and
/// Turing-certified zero counting at binary64 precision.
///
/// Two independent routes to Z(t) are provided: the Riemann-Siegel formula
/// (main sum plus corrections C0..C4) for t >= 10, and an Euler-Maclaurin
/// evaluation of zeta(1/2 + it) rotated by the exact theta function. The
/// zero finder uses Euler-Maclaurin below kRiemannSiegelCrossover, where the
/// Riemann-Siegel remainder is too large for 1e-9 ordinates.

#include <iosfwd>
#include <vector>

#include "zpc/common.hpp"

namespace zpc::engine {

/// Lowest height accepted by riemann_siegel_Z.
inline constexpr double kRiemannSiegelFloor = 10.0;
/// hardy_Z switches from Euler-Maclaurin to Riemann-Siegel here.
inline constexpr double kRiemannSiegelCrossover = 500.0;
/// Lehman's bound on the integral of S(t) holds for t >= 168 pi.
inline constexpr double kTuringFloor = 168.0 * kPi;

/// Riemann-Siegel theta via its asymptotic expansion (accurate to ~1e-12 for t >= 9).
double theta(double t);
/// theta(t) = Im log Gamma(1/4 + it/2) - (t/2) log pi, for any t > 0.
double theta_exact(double t);
/// theta'(t).
double theta_prime(double t);

/// Z(t) by the Riemann-Siegel formula. Throws InvalidArgument for t < 10.
double riemann_siegel_Z(double t);
/// Z(t) = Re(e^{i theta(t)} zeta(1/2 + it)), zeta by Euler-Maclaurin summation.
double euler_maclaurin_Z(double t);
/// zeta(s) by Euler-Maclaurin summation (s != 1).
cplx zeta_euler_maclaurin(cplx s);
/// Engine dispatch: Euler-Maclaurin below kRiemannSiegelCrossover, Riemann-Siegel above.
double hardy_Z(double t);

/// (T/2pi) log(T/2pi) - T/2pi.
double counting_main_term(double T);

struct ZeroCountReport {
  double T = 0.0;
  long count_signchange = 0;
  double count_formula = 0.0;  // main term only
  double residual = 0.0;       // count_signchange - count_formula
  double count_formula_7_8 = 0.0;  // main term + 7/8, diagnostics only
  // Turing certification details.
  double turing_height = 0.0;  // height where Lehman's bound was applied
  double turing_window = 0.0;  // H
  double turing_upper = 0.0;   // upper bound on N(turing_height)
  long turing_found = 0;       // sign changes up to turing_height
  int grid_divisor = 0;        // final grid refinement used
};

struct EngineOptions {
  int workers = 1;
  /// Initial grid step is (2 pi / log(t / 2 pi)) / grid_divisor.
  int grid_divisor = 8;
  /// How many times the grid may be halved when a Gram block looks short.
  int block_refinements = 6;
  /// Global re-scans (divisor doubled) when Turing's check fails.
  int turing_retries = 2;
  /// Absolute tolerance on located ordinates.
  double tolerance = 1e-10;
};

/// Zeros located by sign changes of Z on (0, t_end], with the Turing
/// certificate computed at `certified_height`.
struct ZeroScan {
  std::vector<double> ordinates;
  ZeroCountReport report;
};

/// Number of sign changes of Z in (0, T], certified by Turing's method.
/// Throws CertificationError when the count cannot be certified.
ZeroCountReport count_zeros(double T, const EngineOptions& opts = {});

/// All ordinates in the range, increasing, to `opts.tolerance`.
std::vector<double> find_zeros(const HeightRange& range, const EngineOptions& opts = {});

/// Zeros up to T together with the count certificate at T (one scan).
ZeroScan scan_zeros(double T, const EngineOptions& opts = {});

/// Plain-ordinate table: one decimal per line, '#' comments and blank lines
/// allowed, strictly increasing. Ingested zeros are taken to be simple and on
/// the critical line. Throws InvalidArgument naming the offending line.
std::vector<double> ingest_zero_table(std::istream& in);

/// sum over all zeros (both signs of gamma) of 1/(1 + (t - gamma)^2), using the
/// supplied ordinates (gamma > 0) plus an estimated tail beyond the last one.
struct DensitySum {
  double t = 0.0;
  double sum = 0.0;
  double tail_estimate = 0.0;
  double ratio = 0.0;  // (sum + tail) / log(t + 2)
};
DensitySum local_density_sum(const std::vector<double>& ordinates, double t);

}  // namespace zpc::engine
