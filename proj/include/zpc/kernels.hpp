#pragma once

/// Fejer kernel (sin z / z)^2, its integral representation
///
///   int_{-1}^{1} e^{z alpha} (1 - |alpha|) d alpha = 2 (cosh z - 1) / z^2 = fejer(i z / 2),
///
/// Fejer pair sums over zero multisets (complex with weight W, real with
/// weight w, real unweighted, and the box-restricted K_b), Selberg's bound on
/// |fejer(x + iy) - fejer(x)|, and the error-term decomposition that links the
/// real-ordinate sum to K_b.

#include <optional>
#include <vector>

#include "zpc/common.hpp"
#include "zpc/pair_stats.hpp"
#include "zpc/zero_multiset.hpp"

namespace zpc {

/// (sin z / z)^2, series branch for |z| < 1e-4.
cplx fejer(cplx z);
double fejer(double x);

struct IdentityReport {
  cplx z;
  cplx quadrature;
  cplx closed_form;
  double abs_diff = 0.0;
  double rel_diff = 0.0;
};

/// Gauss-Legendre panels of width quad_step on [-1, 0] and [0, 1]. Requires |z| <= 50.
IdentityReport fejer_integral_identity_check(cplx z, double quad_step = 1e-4);
/// 50 points: radii 2, 4, ..., 10 at ten angles each.
std::vector<cplx> default_identity_grid();

enum class FejerMode { complex_W, real_w, real_unweighted };
std::string to_string(FejerMode m);
FejerMode parse_fejer_mode(const std::string& s);

struct FejerSumSpec {
  HeightRange range{0.0, 1000.0};
  FejerMode mode = FejerMode::real_w;
  /// With a box: mode complex_W, range (T, 2T], only zeros in the box (K_b).
  std::optional<BoxSpec> box;
  /// 0 selects default_fejer_cutoff.
  double window_cutoff = 0.0;
  int workers = 1;
};

struct FejerSum {
  double T = 0.0;
  double scale = 0.0;
  FejerMode mode = FejerMode::real_w;
  cplx raw;
  double normalized = 0.0;
  /// Real modes: the exact contribution of pairs with gamma = gamma'.
  double diagonal = 0.0;
  double trunc_bound = 0.0;
  double window_cutoff = 0.0;
  long zero_count = 0;
};

/// U such that the kernel tail stays below 1e-4 of (T/2pi) log T.
double default_fejer_cutoff(long n_zeros, double T);

/// Throws InvalidArgument if a box is combined with another mode or range.
FejerSum fejer_pair_sum(const ZeroMultiset& zs, const FejerSumSpec& spec);

struct WeightRemovalReport {
  double T = 0.0;
  double with_weight = 0.0;
  double without_weight = 0.0;
  double difference = 0.0;  // without - with, >= 0
  double trunc_bound = 0.0;
  double F0 = 0.0;          // F(0, T)
  double ratio_F0 = 0.0;    // difference / (F0 / log^2 T), at most 1
  double ratio_scale = 0.0; // difference / ((T/2pi) log T)
};
WeightRemovalReport weight_removal_check(const ZeroMultiset& zs, double T, int workers = 1);

struct SelbergPoint {
  double x = 0.0;
  double y = 0.0;
};
struct SelbergReport {
  double sup_ratio = 0.0;
  SelbergPoint argmax;
  long points = 0;
};

/// x in [-100, 100] step 0.1, y in (0, 5] step 0.05.
std::vector<SelbergPoint> default_selberg_grid();
double selberg_ratio(double x, double y);
/// Throws InvalidArgument for y < 0.
SelbergReport selberg_bound_check(const std::vector<SelbergPoint>& grid);

/// Per-pair constant c in |fejer(complex) - fejer(real)| <= c |db| L T^|db| / (1 + (db^2 + dg^2) L^2).
/// The pair form is at most twice the Selberg ratio, whose sup over the default grid is about 1.80.
inline constexpr double kSelbergPairConstant = 4.0;

struct DecompositionReport {
  double T = 0.0;
  double b = 0.0;
  double scale = 0.0;
  long zero_count = 0;
  double real_sum = 0.0;     // real-ordinate unweighted Fejer sum over the box range
  double real_trunc = 0.0;
  cplx k_b;                  // K_b(T)
  double k_b_trunc = 0.0;
  cplx difference;           // K_b - real_sum
  cplx selberg_part;         // sum fejer(complex) - real_sum
  cplx w_part;               // sum fejer(complex) z^2 / (4 - z^2)
  double error_sum = 0.0;    // sum |db| L T^|db| / (1 + (db^2 + dg^2) L^2)
  double w_bound = 0.0;      // certified bound on |w_part|
  double selberg_pair_max = 0.0;  // max over pairs of |fejer(complex) - fejer(real)| / O-term
  double dyadic_tally = 0.0; // b e^b [close(1/L) + sum_k close(2^k/L) / (1 + 4^{k-1})]
  double error_ratio = 0.0;  // error_sum / (T log T)
  double tally_ratio = 0.0;  // dyadic_tally / (b e^b T log T), 0 when b = 0
  bool selberg_holds = false;
  bool w_holds = false;
  bool difference_holds = false;
  bool tally_holds = false;

  [[nodiscard]] double difference_bound() const {
    return kSelbergPairConstant * error_sum + w_bound + real_trunc + k_b_trunc;
  }
};

/// Throws BoxViolation if a zero in (T, 2T] is outside the box.
DecompositionReport fejer_error_term_decomposition(const ZeroMultiset& zs, const BoxSpec& box,
                                                   int workers = 1);

struct Lemma1Report {
  double T = 0.0;
  double alpha_step = 0.0;
  cplx trapezoid;            // trapezoid of calF(alpha)(1 - |alpha|) over the alpha grid
  cplx fejer_sum;            // complex_W pair sum
  double quad_bound = 0.0;   // sum |W| |fejer| |S(h z/2)^{-2} - 1| over windowed pairs
  double trunc_bound = 0.0;
  double abs_diff = 0.0;
  bool holds = false;
};

/// Integrates calF(alpha, T)(1 - |alpha|) on the grid -1:1:alpha_step and compares
/// with the complex_W Fejer pair sum.
Lemma1Report lemma1_equivalence_check(const ZeroMultiset& zs, const HeightRange& range,
                                      double alpha_step = 0.05, int workers = 1);

}  // namespace zpc
