#include "zpc/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pair_window.hpp"

namespace zpc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Five-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGLNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGLWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                           0.4786286704993665, 0.2369268850561891};

// sinh(w) / w
cplx sinhc(cplx w) {
  if (std::abs(w) < 1e-4) return 1.0 + w * w / 6.0;
  return std::sinh(w) / w;
}

double max_beta_spread(std::span<const Zero> zs) {
  if (zs.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(zs.begin(), zs.end(),
                                            [](const Zero& a, const Zero& b) { return a.beta < b.beta; });
  return hi->beta - lo->beta;
}

// Complex Fejer argument 1/2 i (rho - rho') log T.
cplx fejer_arg(double db, double dg, double L) { return 0.5 * L * cplx(-dg, db); }

// Envelope of |fejer(1/2 i (rho - rho') L)| for |gamma - gamma'| >= d, |beta - beta'| <= s.
double complex_kernel_envelope(double d, double s, double L) {
  const double c = std::cosh(0.5 * s * L);
  return std::min(c * c, c * c * 4.0 / (d * L * d * L));
}

double real_kernel_envelope(double d, double L) { return std::min(1.0, 4.0 / (d * L * d * L)); }

struct Collected {
  cplx off;          // off-diagonal (or all, for the complex mode) pair sum
  double diagonal = 0.0;
  double abs_sum = 0.0;
};

Collected collect(std::span<const Zero> zs, double L, double U, FejerMode mode, int workers) {
  const auto sums = detail::sum_rows(
      zs, U, 3, workers, [&](std::size_t i, detail::RowWindow win, std::vector<cplx>& out) {
        const Zero& a = zs[i];
        for (std::size_t j = win.lo; j < win.hi; ++j) {
          const Zero& b = zs[j];
          const double mm = static_cast<double>(a.mult) * b.mult;
          const double dg = a.gamma - b.gamma;
          if (mode == FejerMode::complex_W) {
            const double db = a.beta - b.beta;
            const cplx v = mm * fejer(fejer_arg(db, dg, L)) * weight_W(cplx(db, dg));
            out[0] += v;
            out[2] += std::abs(v);
          } else if (dg == 0.0) {
            out[1] += mm;
          } else {
            const double k = fejer(0.5 * dg * L);
            const double v = mm * (mode == FejerMode::real_w ? k * weight_w(dg) : k);
            out[0] += v;
            out[2] += v;
          }
        }
      });
  return {sums[0], sums[1].real(), sums[2].real() + sums[1].real()};
}

}  // namespace

cplx fejer(cplx z) {
  if (z.imag() == 0.0) return fejer(z.real());
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 45.0;
  }
  const cplx s = std::sin(z) / z;
  return s * s;
}

double fejer(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 45.0;
  }
  const double s = std::sin(x) / x;
  return s * s;
}

IdentityReport fejer_integral_identity_check(cplx z, double quad_step) {
  if (!(std::abs(z) <= 50.0)) throw InvalidArgument("identity check requires |z| <= 50");
  if (!(quad_step > 0.0 && quad_step <= 0.5)) throw InvalidArgument("quad_step must lie in (0, 0.5]");
  const long panels = static_cast<long>(std::ceil(1.0 / quad_step));
  const double width = 1.0 / static_cast<double>(panels);
  CompensatedComplexSum sum;
  for (long p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * width;
    for (std::size_t k = 0; k < kGLNodes.size(); ++k) {
      const double a = mid + 0.5 * width * kGLNodes[k];
      const double wgt = 0.5 * width * kGLWeights[k] * (1.0 - a);
      sum.add(wgt * (std::exp(z * a) + std::exp(-z * a)));
    }
  }
  IdentityReport r;
  r.z = z;
  r.quadrature = sum.value();
  r.closed_form = fejer(cplx(0.0, 0.5) * z);
  r.abs_diff = std::abs(r.quadrature - r.closed_form);
  r.rel_diff = r.abs_diff / std::max(std::abs(r.closed_form), std::numeric_limits<double>::min());
  return r;
}

std::vector<cplx> default_identity_grid() {
  std::vector<cplx> grid;
  for (int r = 1; r <= 5; ++r) {
    for (int k = 0; k < 10; ++k) grid.push_back(std::polar(2.0 * r, kTwoPi * (k + 0.125 * r) / 10.0));
  }
  return grid;
}

std::string to_string(FejerMode m) {
  switch (m) {
    case FejerMode::complex_W:
      return "complex_W";
    case FejerMode::real_w:
      return "real_w";
    case FejerMode::real_unweighted:
      return "real_unweighted";
  }
  return "unknown";
}

FejerMode parse_fejer_mode(const std::string& s) {
  if (s == "complex_W") return FejerMode::complex_W;
  if (s == "real_w") return FejerMode::real_w;
  if (s == "real_unweighted") return FejerMode::real_unweighted;
  throw InvalidArgument("unknown Fejer mode '" + s + "' (complex_W|real_w|real_unweighted)");
}

double default_fejer_cutoff(long n_zeros, double T) {
  const double L = std::log(T);
  return std::max(20.0, 8.0 * static_cast<double>(n_zeros) / (1e-4 * T * L * L));
}

FejerSum fejer_pair_sum(const ZeroMultiset& zs, const FejerSumSpec& spec) {
  std::vector<Zero> boxed;
  std::span<const Zero> w = zs.window(spec.range);
  if (spec.box) {
    if (spec.mode != FejerMode::complex_W) throw InvalidArgument("K_b requires mode complex_W");
    const HeightRange br = spec.box->range();
    if (spec.range.t_lo != br.t_lo || spec.range.t_hi != br.t_hi) {
      throw InvalidArgument("K_b requires the range (T, 2T] of its box");
    }
    for (const auto& z : w) {
      if (in_box(z, *spec.box)) boxed.push_back(z);
    }
    w = boxed;
  }
  FejerSum r;
  r.T = spec.range.reference_height();
  if (r.T < 3.0) throw InvalidArgument("Fejer sums need a reference height T >= 3");
  r.scale = pair_scale(r.T);
  r.mode = spec.mode;
  const double L = std::log(r.T);
  for (const auto& z : w) r.zero_count += z.mult;
  if (w.empty()) return r;
  const double U = spec.window_cutoff > 0.0 ? spec.window_cutoff : default_fejer_cutoff(r.zero_count, r.T);
  r.window_cutoff = U;
  const auto c = collect(w, L, U, spec.mode, spec.workers);
  r.diagonal = c.diagonal;
  r.raw = c.off + c.diagonal;
  r.normalized = r.raw.real() / r.scale;
  if (spec.mode == FejerMode::complex_W) {
    const double s = max_beta_spread(w);
    r.trunc_bound = detail::shell_tail_bound(w, U, [&](double d) {
      return complex_kernel_envelope(d, s, L) * 4.0 / std::max(4.0 + d * d - s * s, kEps);
    });
  } else {
    const bool weighted = spec.mode == FejerMode::real_w;
    r.trunc_bound = detail::shell_tail_bound(w, U, [&](double d) {
      return real_kernel_envelope(d, L) * (weighted ? weight_w(d) : 1.0);
    });
  }
  r.trunc_bound += 64.0 * kEps * c.abs_sum;
  return r;
}

WeightRemovalReport weight_removal_check(const ZeroMultiset& zs, double T, int workers) {
  WeightRemovalReport r;
  r.T = T;
  const HeightRange range{0.0, T};
  FejerSumSpec s;
  s.range = range;
  s.workers = workers;
  s.mode = FejerMode::real_w;
  const auto with = fejer_pair_sum(zs, s);
  s.mode = FejerMode::real_unweighted;
  s.window_cutoff = with.window_cutoff;
  const auto without = fejer_pair_sum(zs, s);
  r.with_weight = with.raw.real();
  r.without_weight = without.raw.real();
  r.difference = r.without_weight - r.with_weight;
  r.trunc_bound = with.trunc_bound + without.trunc_bound;
  if (zs.window(range).empty()) return r;
  PairSumSpec p;
  p.range = range;
  p.alpha_grid = {0.0};
  p.workers = workers;
  const auto f0 = pair_correlation(zs, p);
  r.F0 = f0.points[0].raw.real();
  const double L = std::log(T);
  r.ratio_F0 = r.difference / (r.F0 / (L * L));
  r.ratio_scale = r.difference / pair_scale(T);
  return r;
}

std::vector<SelbergPoint> default_selberg_grid() {
  std::vector<SelbergPoint> grid;
  grid.reserve(2001 * 100);
  for (int i = -1000; i <= 1000; ++i) {
    for (int j = 1; j <= 100; ++j) grid.push_back({i / 10.0, j / 20.0});
  }
  return grid;
}

double selberg_ratio(double x, double y) {
  if (y < 0.0) throw InvalidArgument("selberg_ratio requires y >= 0");
  if (y == 0.0) return 0.0;
  const double lhs = std::abs(fejer(cplx(x, y)) - fejer(x));
  return lhs / (y * std::exp(2.0 * y) / (1.0 + x * x + y * y));
}

SelbergReport selberg_bound_check(const std::vector<SelbergPoint>& grid) {
  SelbergReport r;
  for (const auto& p : grid) {
    const double v = selberg_ratio(p.x, p.y);
    if (v > r.sup_ratio || r.points == 0) {
      r.sup_ratio = v;
      r.argmax = p;
    }
    ++r.points;
  }
  return r;
}

DecompositionReport fejer_error_term_decomposition(const ZeroMultiset& zs, const BoxSpec& box, int workers) {
  require_in_box(zs, box);
  DecompositionReport r;
  r.T = box.T;
  r.b = box.b;
  r.scale = pair_scale(box.T);
  const double L = std::log(box.T);
  const auto w = zs.window(box.range());
  for (const auto& z : w) r.zero_count += z.mult;
  if (w.empty()) {
    r.selberg_holds = r.w_holds = r.difference_holds = r.tally_holds = true;
    return r;
  }
  const double U = default_fejer_cutoff(r.zero_count, box.T);
  std::vector<double> row_max(w.size(), 0.0);
  // Slots: real off-diagonal, real diagonal, K_b, Selberg part, error sum, W bound, abs mass.
  const auto sums = detail::sum_rows(w, U, 7, workers, [&](std::size_t i, detail::RowWindow win,
                                                           std::vector<cplx>& out) {
    const Zero& a = w[i];
    double mx = 0.0;
    for (std::size_t j = win.lo; j < win.hi; ++j) {
      const Zero& b = w[j];
      const double mm = static_cast<double>(a.mult) * b.mult;
      const double dg = a.gamma - b.gamma;
      const double db = a.beta - b.beta;
      const double real_k = dg == 0.0 ? 1.0 : fejer(0.5 * dg * L);
      if (dg == 0.0) {
        out[1] += mm;
      } else {
        out[0] += mm * real_k;
      }
      const cplx ck = fejer(fejer_arg(db, dg, L));
      const cplx W = weight_W(cplx(db, dg));
      out[2] += mm * ck * W;
      out[3] += mm * (ck - real_k);
      const double adb = std::abs(db);
      const double oterm = adb * L * std::exp(adb * L) / (1.0 + (db * db + dg * dg) * L * L);
      out[4] += mm * oterm;
      const double ch = std::cosh(0.5 * db * L);
      out[5] += mm * 4.0 * ch * ch / (L * L * (4.0 + dg * dg - db * db));
      out[6] += mm * (std::abs(ck * W) + std::abs(ck) + real_k);
      if (oterm > 0.0) mx = std::max(mx, std::abs(ck - real_k) / oterm);
    }
    row_max[i] = mx;
  });
  r.real_sum = sums[1].real() + sums[0].real();
  r.k_b = sums[2];
  r.selberg_part = sums[3];
  r.w_part = r.k_b - r.real_sum - r.selberg_part;
  r.difference = r.k_b - r.real_sum;
  r.error_sum = sums[4].real();
  r.w_bound = sums[5].real();
  r.selberg_pair_max = *std::max_element(row_max.begin(), row_max.end());

  const double s = max_beta_spread(w);
  const double rounding = 64.0 * kEps * sums[6].real();
  r.real_trunc = detail::shell_tail_bound(w, U, [&](double d) { return real_kernel_envelope(d, L); }) + rounding;
  r.k_b_trunc = detail::shell_tail_bound(w, U, [&](double d) {
                  return complex_kernel_envelope(d, s, L) * 4.0 / std::max(4.0 + d * d - s * s, kEps);
                }) + rounding;
  // Pairs beyond U: the complex kernel and the real kernel each obey their envelopes.
  const double tail_c1 = r.real_trunc + detail::shell_tail_bound(w, U, [&](double d) {
                           return complex_kernel_envelope(d, s, L);
                         });
  const double tail_w = detail::shell_tail_bound(w, U, [&](double d) {
    const double c = std::cosh(0.5 * s * L);
    return 4.0 * c * c / (L * L * std::max(4.0 + d * d - s * s, kEps));
  }) + rounding;

  r.selberg_holds = std::abs(r.selberg_part) <= kSelbergPairConstant * r.error_sum + tail_c1 &&
                    r.selberg_pair_max <= kSelbergPairConstant;
  r.w_holds = std::abs(r.w_part) <= r.w_bound + tail_w;
  r.difference_holds = std::abs(r.difference) <= r.difference_bound() + tail_c1 + tail_w;

  const double span = w.back().gamma - w.front().gamma;
  double tally = static_cast<double>(close_pair_count(zs, box.range(), 1.0 / L));
  for (int k = 1; std::ldexp(1.0, k - 1) / L <= span; ++k) {
    tally += static_cast<double>(close_pair_count(zs, box.range(), std::ldexp(1.0, k) / L)) /
             (1.0 + std::ldexp(1.0, 2 * (k - 1)));
  }
  const double bexp = box.b * std::exp(box.b);
  r.dyadic_tally = bexp * tally;
  r.tally_holds = r.error_sum <= r.dyadic_tally * (1.0 + 1e-12);
  const double tl = box.T * L;
  r.error_ratio = r.error_sum / tl;
  r.tally_ratio = bexp > 0.0 ? r.dyadic_tally / (bexp * tl) : 0.0;
  return r;
}

Lemma1Report lemma1_equivalence_check(const ZeroMultiset& zs, const HeightRange& range, double alpha_step,
                                      int workers) {
  const double n_real = 1.0 / alpha_step;
  const long n = std::lround(n_real);
  if (!(alpha_step > 0.0) || n < 1 || std::abs(n_real - n) > 1e-9 * n_real) {
    throw InvalidArgument("alpha_step must be 1/n for a positive integer n");
  }
  Lemma1Report r;
  r.T = range.reference_height();
  r.alpha_step = alpha_step;
  const auto w = zs.window(range);
  if (w.empty()) {
    r.holds = true;
    return r;
  }
  FejerSumSpec fs;
  fs.range = range;
  fs.mode = FejerMode::complex_W;
  fs.workers = workers;
  const auto k = fejer_pair_sum(zs, fs);
  r.fejer_sum = k.raw;

  PairSumSpec ps;
  ps.range = range;
  ps.weight = Weight::W;
  ps.exponent = Exponent::full;
  ps.window_cutoff = k.window_cutoff;
  ps.workers = workers;
  for (long j = -n; j <= n; ++j) ps.alpha_grid.push_back(static_cast<double>(j) / static_cast<double>(n));
  const auto curve = pair_correlation(zs, ps);
  CompensatedComplexSum trap;
  double curve_err = 0.0;
  for (const auto& p : curve.points) {
    const double wgt = alpha_step * (1.0 - std::abs(p.alpha));
    trap.add(wgt * p.raw);
    curve_err += wgt * p.error_bound();
  }
  r.trapezoid = trap.value();

  // Trapezoid of e^{alpha z}(1 - |alpha|) is (S(z/2) / S(h z/2))^2 with S(w) = sinh(w)/w.
  const double L = std::log(r.T);
  const auto q = detail::sum_rows(w, k.window_cutoff, 1, workers,
                                  [&](std::size_t i, detail::RowWindow win, std::vector<cplx>& out) {
                                    const Zero& a = w[i];
                                    double acc = 0.0;
                                    for (std::size_t j = win.lo; j < win.hi; ++j) {
                                      const Zero& b = w[j];
                                      const cplx z = cplx(a.beta - b.beta, a.gamma - b.gamma) * L;
                                      const cplx sh = sinhc(0.5 * alpha_step * z);
                                      const double mm = static_cast<double>(a.mult) * b.mult;
                                      const double gap = std::abs(1.0 / (sh * sh) - 1.0);
                                      acc += mm * std::abs(weight_W(z / L)) * std::abs(fejer(cplx(0.0, 0.5) * z)) *
                                             (std::isfinite(gap) ? gap : 1e300);
                                    }
                                    out[0] += acc;
                                  });
  r.quad_bound = q[0].real();
  r.trunc_bound = curve_err + k.trunc_bound + 64.0 * kEps * (r.quad_bound + std::abs(r.fejer_sum));
  r.abs_diff = std::abs(r.trapezoid - r.fejer_sum);
  r.holds = r.abs_diff <= r.quad_bound + r.trunc_bound;
  return r;
}

}  // namespace zpc
