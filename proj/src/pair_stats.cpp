#include "zpc/pair_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "pair_window.hpp"

namespace zpc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Phasors are re-seeded from sincos every kReseed rotation steps.
constexpr std::size_t kReseed = 256;

struct Slice {
  std::span<const Zero> zeros;
  double T = 0.0;
  double L = 0.0;
  double mass = 0.0;  // sum of multiplicities
};

Slice make_slice(const ZeroMultiset& zs, const HeightRange& range) {
  Slice s;
  s.zeros = zs.window(range);
  s.T = range.reference_height();
  if (s.T < 3.0) throw InvalidArgument("pair sums need a reference height T >= 3");
  s.L = std::log(s.T);
  for (const auto& z : s.zeros) s.mass += z.mult;
  return s;
}

double max_beta_spread(std::span<const Zero> zs) {
  if (zs.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(zs.begin(), zs.end(), [](const Zero& a, const Zero& b) {
    return a.beta < b.beta;
  });
  return hi->beta - lo->beta;
}

void fill_predictions(CorrelationCurve& c) {
  for (auto& p : c.points) {
    const double a = std::abs(p.alpha);
    p.normalized = p.raw.real() / c.scale;
    p.predicted = std::exp(-2.0 * a * std::log(c.T)) * std::log(c.T) + a;
    p.residual = p.normalized - p.predicted;
    p.outside_theorem = p.alpha < 0.0 || p.alpha > 1.0;
  }
}

CorrelationCurve windowed(const Slice& s, const PairSumSpec& spec) {
  CorrelationCurve c;
  c.T = s.T;
  c.scale = pair_scale(s.T);
  c.method = Method::windowed;
  c.zero_count = static_cast<long>(s.mass);
  const double U = spec.window_cutoff > 0.0 ? spec.window_cutoff
                                            : default_window_cutoff(c.zero_count, s.T);
  c.window_cutoff = U;
  const auto& grid = spec.alpha_grid;
  const std::size_t n_alpha = grid.size();
  const bool rotate = detail::is_arithmetic(grid);
  const double a0 = grid.empty() ? 0.0 : grid.front();
  const double da = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
  const bool full = spec.exponent == Exponent::full;
  const bool big_w = spec.weight == Weight::W;
  const double L = s.L;
  const auto zs = s.zeros;

  // Slot n_alpha carries sum |weight| for the rounding estimate.
  const auto sums = detail::sum_rows(
      zs, U, n_alpha + 1, spec.workers,
      [&](std::size_t i, detail::RowWindow win, std::vector<cplx>& out) {
        const Zero& zi = zs[i];
        for (std::size_t j = win.lo; j < win.hi; ++j) {
          const Zero& zj = zs[j];
          const double d = zi.gamma - zj.gamma;
          const double db = zi.beta - zj.beta;
          const double mm = static_cast<double>(zi.mult) * zj.mult;
          const cplx weight = big_w ? weight_W(cplx(db, d)) : cplx(weight_w(d), 0.0);
          const cplx rate = full ? cplx(L * db, L * d) : cplx(0.0, L * d);  // exponent per unit alpha
          const cplx base = mm * weight;
          out[n_alpha] += std::abs(base);
          if (rotate) {
            const cplx v0 = base * std::exp(a0 * rate);
            const cplx st = std::exp(da * rate);
            double vr = v0.real(), vi = v0.imag();
            const double sr = st.real(), si = st.imag();
            for (std::size_t k = 0; k < n_alpha; ++k) {
              out[k] += cplx(vr, vi);
              const double t = vr * sr - vi * si;
              vi = vr * si + vi * sr;
              vr = t;
            }
          } else {
            for (std::size_t k = 0; k < n_alpha; ++k) out[k] += base * std::exp(grid[k] * rate);
          }
        }
      });

  const double spread = full ? max_beta_spread(zs) : 0.0;
  const double tail_shells = detail::shell_tail_bound(zs, U, [&](double d) {
    return big_w ? 4.0 / std::max(4.0 + d * d - spread * spread, kEps) : weight_w(d);
  });
  const double abs_sum = sums[n_alpha].real();
  for (std::size_t k = 0; k < n_alpha; ++k) {
    CurvePoint p;
    p.alpha = grid[k];
    p.raw = sums[k];
    const double growth = full ? std::exp(std::abs(grid[k]) * L * spread) : 1.0;
    p.trunc_bound = tail_shells * growth;
    // Phase rounding grows with alpha L U; rotation drift with the grid index.
    p.quad_bound = abs_sum * growth * kEps * (32.0 + 4.0 * std::abs(grid[k]) * L * U + 8.0 * k);
    c.points.push_back(p);
  }
  fill_predictions(c);
  return c;
}

// Sum_{m >= 1} w(m Omega - u) for m Omega > u, bounded by terms plus an integral tail.
double alias_weight_sum(double omega, double u) {
  double s = 0.0;
  int m = 1;
  while (m * omega <= u) ++m;
  const int m_end = m + 2000;
  for (; m < m_end; ++m) s += weight_w(m * omega - u);
  // Remaining terms: sum_{m >= m_end} 4/(m Omega - u)^2 <= 4 / (Omega (m_end - 1) Omega - u)).
  s += 4.0 / (omega * ((m_end - 1) * omega - u));
  return s;
}

CorrelationCurve spectral(const Slice& s, const PairSumSpec& spec) {
  if (spec.weight != Weight::w || spec.exponent != Exponent::unitary) {
    throw InvalidArgument("spectral method supports only weight w with the unitary exponent");
  }
  if (!(spec.quad_halfwidth >= 10.0)) throw InvalidArgument("quad_halfwidth must be >= 10");
  CorrelationCurve c;
  c.T = s.T;
  c.scale = pair_scale(s.T);
  c.method = Method::spectral;
  c.zero_count = static_cast<long>(s.mass);
  const auto zs = s.zeros;
  const double g_max = zs.back().gamma;
  const double h = spec.quad_step > 0.0 ? spec.quad_step : kTwoPi / (4.0 * g_max);
  c.quad_step = h;
  const double Xi = spec.quad_halfwidth;
  const double L = s.L;
  const double center = 0.5 * (zs.front().gamma + zs.back().gamma);
  const double span = zs.back().gamma - zs.front().gamma;

  double a_lo = std::numeric_limits<double>::infinity();
  double a_hi = 0.0;
  for (double a : spec.alpha_grid) {
    a_lo = std::min(a_lo, std::abs(a));
    a_hi = std::max(a_hi, std::abs(a));
  }
  const double eta0 = a_lo * L - Xi;
  const std::size_t n_nodes = static_cast<std::size_t>(std::ceil(((a_hi - a_lo) * L + 2.0 * Xi) / h)) + 1;

  // P(eta_k) = |sum m e^{i (gamma - center) eta_k}|^2, in independent chunks.
  constexpr std::size_t kChunk = 4 * kReseed;
  const std::size_t n_chunks = (n_nodes + kChunk - 1) / kChunk;
  std::vector<double> power(n_nodes);
  parallel_blocks(n_chunks, spec.workers, [&](std::size_t cidx) {
    const std::size_t k0 = cidx * kChunk;
    const std::size_t k1 = std::min(n_nodes, k0 + kChunk);
    std::vector<double> re(k1 - k0), im(k1 - k0);
    for (const auto& z : zs) {
      const double w = z.gamma - center;
      const double sr = std::cos(w * h), si = std::sin(w * h);
      for (std::size_t sub = k0; sub < k1; sub += kReseed) {
        const std::size_t sub_end = std::min(k1, sub + kReseed);
        const double phase = w * (eta0 + static_cast<double>(sub) * h);
        double pr = z.mult * std::cos(phase), pi = z.mult * std::sin(phase);
        for (std::size_t k = sub - k0; k < sub_end - k0; ++k) {
          re[k] += pr;
          im[k] += pi;
          const double t = pr * sr - pi * si;
          pi = pr * si + pi * sr;
          pr = t;
        }
      }
    }
    for (std::size_t k = k0; k < k1; ++k) power[k] = re[k - k0] * re[k - k0] + im[k - k0] * im[k - k0];
  });

  const double mass2 = s.mass * s.mass;
  const double omega = kTwoPi / h;
  const double alias = mass2 * 2.0 * alias_weight_sum(omega, span);
  const double trunc = mass2 * std::exp(-2.0 * Xi) * (1.0 + h);
  const double eta_max = std::max(std::abs(eta0), std::abs(eta0 + n_nodes * h));
  const double phase_err = kEps * (4.0 * kReseed + 2.0 * 0.5 * span * eta_max + 8.0);
  const double rounding = 2.0 * mass2 * phase_err * (1.0 + h);
  for (double a : spec.alpha_grid) {
    const double center_eta = std::abs(a) * L;
    const auto k_lo = static_cast<std::size_t>(
        std::max(0.0, std::ceil((center_eta - Xi - eta0) / h - 1e-9)));
    CompensatedSum sum;
    for (std::size_t k = k_lo; k < n_nodes; ++k) {
      const double dist = std::abs(eta0 + static_cast<double>(k) * h - center_eta);
      if (dist > Xi) break;
      sum.add(std::exp(-2.0 * dist) * power[k]);
    }
    CurvePoint p;
    p.alpha = a;
    p.raw = cplx(h * sum.value(), 0.0);
    p.trunc_bound = trunc;
    p.quad_bound = alias + rounding;
    c.points.push_back(p);
  }
  fill_predictions(c);
  return c;
}

}  // namespace

std::string to_string(Method m) { return m == Method::windowed ? "windowed" : "spectral"; }

Method parse_method(const std::string& s) {
  if (s == "windowed") return Method::windowed;
  if (s == "spectral") return Method::spectral;
  throw InvalidArgument("unknown method '" + s + "' (windowed|spectral)");
}

double weight_w(double u) { return 4.0 / (4.0 + u * u); }

cplx weight_W(cplx z) {
  const cplx den = 4.0 - z * z;
  if (den == cplx(0.0, 0.0)) throw InvalidArgument("W(z): z^2 = 4 is a pole");
  return 4.0 / den;
}

double default_window_cutoff(long n_zeros, double T) {
  const double density = std::log(T) / kTwoPi;
  return std::max(1.0, 4.0 * static_cast<double>(n_zeros) * density / (1e-3 * pair_scale(T)));
}

std::vector<double> parse_alpha_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  auto num = [&](std::string_view sv) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc() || ptr != sv.data() + sv.size() || !std::isfinite(v)) {
      throw InvalidArgument("alpha grid '" + spec + "': expected lo:hi:step");
    }
    return v;
  };
  if (c2 == std::string::npos) {
    if (c1 == std::string::npos) return {num(spec)};
    throw InvalidArgument("alpha grid '" + spec + "': expected lo:hi:step");
  }
  const std::string_view sv(spec);
  const double lo = num(sv.substr(0, c1));
  const double hi = num(sv.substr(c1 + 1, c2 - c1 - 1));
  const double step = num(sv.substr(c2 + 1));
  if (!(step > 0.0) || hi < lo) throw InvalidArgument("alpha grid '" + spec + "': need step > 0, hi >= lo");
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  for (long k = 0; k <= n; ++k) grid.push_back(lo + step * static_cast<double>(k));
  return grid;
}

std::vector<double> default_alpha_grid() { return parse_alpha_grid("0:1:0.05"); }

CorrelationCurve pair_correlation(const ZeroMultiset& zs, const PairSumSpec& spec) {
  if (spec.alpha_grid.empty()) throw InvalidArgument("pair_correlation: empty alpha grid");
  const Slice s = make_slice(zs, spec.range);
  if (s.zeros.empty()) throw InvalidArgument("pair_correlation: no zeros in range");
  return spec.method == Method::windowed ? windowed(s, spec) : spectral(s, spec);
}

long close_pair_count(const ZeroMultiset& zs, const HeightRange& range, double h) {
  if (!(h >= 0.0)) throw InvalidArgument("close_pair_count: h must be >= 0");
  const auto w = zs.window(range);
  std::vector<long> prefix(w.size() + 1, 0);
  for (std::size_t i = 0; i < w.size(); ++i) prefix[i + 1] = prefix[i] + w[i].mult;
  long total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto win = detail::row_window(w, i, h);
    total += static_cast<long>(w[i].mult) * (prefix[win.hi] - prefix[win.lo]);
  }
  return total;
}

WeightSumReport weight_sum_bound_check(const ZeroMultiset& zs, double T, int workers) {
  WeightSumReport r;
  r.T = T;
  const auto w = zs.window({0.0, T});
  if (!w.empty()) {
    double mass = 0.0;
    for (const auto& z : w) mass += z.mult;
    const double U = std::min(default_window_cutoff(static_cast<long>(mass), T),
                              w.back().gamma - w.front().gamma + 1.0);
    const auto sums = detail::sum_rows(w, U, 1, workers,
                                       [&](std::size_t i, detail::RowWindow win, std::vector<cplx>& out) {
                                         double s = 0.0;
                                         for (std::size_t j = win.lo; j < win.hi; ++j) {
                                           s += static_cast<double>(w[i].mult) * w[j].mult *
                                                weight_w(w[i].gamma - w[j].gamma);
                                         }
                                         out[0] += s;
                                       });
    r.sum = sums[0].real();
    r.trunc_bound = detail::shell_tail_bound(w, U, [](double d) { return weight_w(d); });
  }
  r.ratio = r.sum / (T * std::log(T) * std::log(T));
  return r;
}

void write_curve_csv(std::ostream& out, const CorrelationCurve& curve) {
  out << "alpha,raw,normalized,predicted,residual,trunc_bound,method\n";
  char buf[512];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", p.alpha, p.raw.real(),
                  p.normalized, p.predicted, p.residual, p.error_bound(), to_string(curve.method).c_str());
    out << buf;
  }
}

}  // namespace zpc
