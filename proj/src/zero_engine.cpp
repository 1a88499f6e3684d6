#include "zpc/zero_engine.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <string>
#include <string_view>

namespace zpc::engine {

namespace {

// B_{2k}, k = 1..15
constexpr std::array<double, 15> kBernoulli = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

constexpr double kMaxHeight = 1e7;

cplx log_gamma(cplx z) {
  // Shift to Re z >= 12, then Stirling. Principal logs of the shift factors
  // stay on the continuous branch because every factor has Re > 0.
  cplx shift = 0.0;
  while (z.real() < 12.0) {
    shift += std::log(z);
    z += 1.0;
  }
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx series = 0.0;
  cplx pw = inv;
  for (int k = 1; k <= 8; ++k) {
    series += kBernoulli[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * pw;
    pw *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(kTwoPi) + series - shift;
}

// Psi(z) = cos(2 pi (z^2 - z - 1/16)) / cos(2 pi z), entire in z.
cplx rs_psi(cplx z) {
  return std::cos(kTwoPi * (z * z - z - 1.0 / 16.0)) / std::cos(kTwoPi * z);
}

// Derivatives Psi^{(k)}(p), k = 0..12, by the Cauchy integral on a circle of
// radius 1/2. Sample angles are offset by half a step so no node lands on the
// real axis, where the quotient is 0/0 at p = 1/4, 3/4.
std::array<double, 13> rs_psi_derivatives(double p) {
  constexpr int kNodes = 96;
  constexpr double kRadius = 0.5;
  std::array<cplx, 13> acc{};
  for (int m = 0; m < kNodes; ++m) {
    const double phi = kTwoPi * (m + 0.5) / kNodes;
    const cplx u = std::polar(1.0, phi);
    const cplx f = rs_psi(p + kRadius * u);
    cplx rot = 1.0;
    const cplx step = std::conj(u);
    for (int k = 0; k <= 12; ++k) {
      acc[k] += f * rot;
      rot *= step;
    }
  }
  std::array<double, 13> out{};
  double fact = 1.0;
  double rpow = 1.0;
  for (int k = 0; k <= 12; ++k) {
    if (k > 0) {
      fact *= k;
      rpow *= kRadius;
    }
    out[k] = (acc[k] / static_cast<double>(kNodes)).real() * fact / rpow;
  }
  return out;
}

std::array<double, 5> rs_coefficients_direct(double p) {
  const auto d = rs_psi_derivatives(p);
  const double pi2 = kPi * kPi;
  const double pi4 = pi2 * pi2;
  const double pi6 = pi4 * pi2;
  const double pi8 = pi4 * pi4;
  return {
      d[0],
      -d[3] / (96.0 * pi2),
      d[2] / (64.0 * pi2) + d[6] / (18432.0 * pi4),
      -d[1] / (64.0 * pi2) - d[5] / (3840.0 * pi4) - d[9] / (5308416.0 * pi6),
      d[0] / (128.0 * pi2) + 19.0 * d[4] / (24576.0 * pi4) + 11.0 * d[8] / (5898240.0 * pi6) +
          d[12] / (2038431744.0 * pi8),
  };
}

// Chebyshev fits of C0..C4 on p in [0, 1], built once.
class RsCorrectionTable {
 public:
  static constexpr int kDegree = 48;

  RsCorrectionTable() {
    constexpr int n = kDegree + 1;
    std::array<std::array<double, 5>, n> samples{};
    for (int j = 0; j < n; ++j) {
      const double x = std::cos(kPi * (j + 0.5) / n);
      samples[j] = rs_coefficients_direct(0.5 * (x + 1.0));
    }
    for (int c = 0; c < 5; ++c) {
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += samples[j][c] * std::cos(kPi * k * (j + 0.5) / n);
        coef_[c][k] = 2.0 * s / n;
      }
      coef_[c][0] *= 0.5;
    }
  }

  [[nodiscard]] double eval(int c, double p) const {
    const double x = 2.0 * p - 1.0;
    double b1 = 0.0;
    double b2 = 0.0;
    for (int k = kDegree; k >= 1; --k) {
      const double b0 = 2.0 * x * b1 - b2 + coef_[c][k];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + coef_[c][0];
  }

 private:
  std::array<std::array<double, kDegree + 1>, 5> coef_{};
};

const RsCorrectionTable& rs_table() {
  static const RsCorrectionTable table;
  return table;
}

double mean_gap(double t) {
  const double lg = std::log(std::max(t, 2.0 * kPi * std::exp(1.0)) / kTwoPi);
  return kTwoPi / lg;
}

// Brent's root finder on a bracket with fa * fb <= 0.
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb, double tol) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

struct GramBlock {
  double a = 0.0;
  double b = 0.0;
  double za = 0.0;
  double zb = 0.0;
  long expected = 0;
};

double gram_point(long n, double guess) {
  double g = guess;
  for (int it = 0; it < 60; ++it) {
    const double step = (theta(g) - n * kPi) / theta_prime(g);
    g -= step;
    if (std::abs(step) < 1e-13 * g) break;
  }
  return g;
}

// Gram blocks covering [10, t_end]. The start t = 10 plays the role of the
// good Gram point g_{-1}: no zeros lie below it and Z(10) < 0.
std::vector<GramBlock> gram_blocks(double t_end, int workers) {
  std::vector<double> pts{kRiemannSiegelFloor};
  std::vector<long> idx{-1};
  long n = 0;
  double g = 17.8;
  while (true) {
    g = gram_point(n, g);
    pts.push_back(g);
    idx.push_back(n);
    if (g > t_end) break;
    g += kPi / theta_prime(g);
    ++n;
  }
  std::vector<double> z(pts.size());
  constexpr std::size_t kChunk = 512;
  const std::size_t n_chunks = (pts.size() + kChunk - 1) / kChunk;
  parallel_blocks(n_chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(pts.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) z[i] = hardy_Z(pts[i]);
  });
  // Extend until the final point is good so the last block is closed.
  auto good = [](long k, double zk) { return (k % 2 == 0 ? zk : -zk) > 0.0; };
  while (!good(idx.back(), z.back())) {
    g = gram_point(n + 1, pts.back() + kPi / theta_prime(pts.back()));
    ++n;
    pts.push_back(g);
    idx.push_back(n);
    z.push_back(hardy_Z(g));
  }
  std::vector<GramBlock> blocks;
  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (good(idx[i], z[i])) {
      blocks.push_back({pts[start], pts[i], z[start], z[i], idx[i] - idx[start]});
      start = i;
    }
  }
  return blocks;
}

void scan_block(const GramBlock& blk, const EngineOptions& opts, int divisor,
                std::vector<double>& out) {
  struct Bracket {
    double a, b, fa, fb;
  };
  std::vector<Bracket> brackets;
  for (int refine = 0; refine <= opts.block_refinements; ++refine) {
    brackets.clear();
    const double h = mean_gap(blk.a) / (divisor * std::ldexp(1.0, refine));
    const long n = std::max(1L, static_cast<long>(std::ceil((blk.b - blk.a) / h)));
    double prev_t = blk.a;
    double prev_z = blk.za;
    for (long i = 1; i <= n; ++i) {
      const double t = i == n ? blk.b : blk.a + (blk.b - blk.a) * static_cast<double>(i) / n;
      const double zt = i == n ? blk.zb : hardy_Z(t);
      if ((prev_z > 0.0) != (zt > 0.0) || zt == 0.0) {
        if (prev_z != 0.0) brackets.push_back({prev_t, t, prev_z, zt});
      }
      prev_t = t;
      prev_z = zt;
    }
    if (static_cast<long>(brackets.size()) >= blk.expected) break;
  }
  for (const auto& br : brackets) {
    out.push_back(brent_root([](double t) { return hardy_Z(t); }, br.a, br.b, br.fa, br.fb,
                             opts.tolerance));
  }
}

std::vector<double> scan_to(double t_end, const EngineOptions& opts, int divisor) {
  const auto blocks = gram_blocks(t_end, resolve_workers(opts.workers));
  constexpr std::size_t kChunk = 64;
  const std::size_t n_chunks = (blocks.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> parts(n_chunks);
  parallel_blocks(n_chunks, resolve_workers(opts.workers), [&](std::size_t c) {
    const std::size_t end = std::min(blocks.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) scan_block(blocks[i], opts, divisor, parts[c]);
  });
  std::vector<double> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

// Antiderivative of the asymptotic theta.
double theta_integral(double t) {
  const double l = std::log(t / kTwoPi);
  return 0.25 * t * t * l - 0.375 * t * t - kPi / 8.0 * t + std::log(t) / 48.0 -
         7.0 / (11520.0 * t * t);
}

struct TuringResult {
  bool certified = false;
  double window = 0.0;
  double upper = 0.0;
  long found = 0;
};

// Lehman: for t2 > t1 >= 168 pi, int_{t1}^{t2} S(t) dt <= 2.30 + 0.128 log(t2 / 2 pi).
// Since N(t) >= N(T) + F(T, t] for t > T, with F the located zeros,
//   H N(T) <= B + int_T^{T+H} (theta(t)/pi + 1 - F(T, t]) dt.
TuringResult turing_check(const std::vector<double>& zeros, double T, double H) {
  TuringResult r;
  r.window = H;
  const auto first_above = std::upper_bound(zeros.begin(), zeros.end(), T);
  r.found = first_above - zeros.begin();
  double f_integral = 0.0;
  for (auto it = first_above; it != zeros.end() && *it <= T + H; ++it) f_integral += T + H - *it;
  const double bound = 2.30 + 0.128 * std::log((T + H) / kTwoPi);
  const double theta_part = (theta_integral(T + H) - theta_integral(T)) / kPi + H;
  r.upper = (bound + theta_part - f_integral) / H;
  r.certified = r.upper < static_cast<double>(r.found) + 2.0;
  return r;
}

void check_height(double t) {
  if (!(t <= kMaxHeight)) {
    throw InvalidArgument("height " + std::to_string(t) + " exceeds the engine limit 1e7");
  }
}

}  // namespace

double theta(double t) {
  const double inv = 1.0 / t;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 48.0 +
             inv2 * (7.0 / 5760.0 +
                     inv2 * (31.0 / 80640.0 + inv2 * (127.0 / 430080.0 + inv2 * (511.0 / 1216512.0)))));
  return 0.5 * t * std::log(t / kTwoPi) - 0.5 * t - kPi / 8.0 + series;
}

double theta_exact(double t) {
  return log_gamma(cplx(0.25, 0.5 * t)).imag() - 0.5 * t * std::log(kPi);
}

double theta_prime(double t) {
  const double inv2 = 1.0 / (t * t);
  return 0.5 * std::log(t / kTwoPi) - inv2 / 48.0 - 7.0 * inv2 * inv2 / 1920.0;
}

double riemann_siegel_Z(double t) {
  if (!(t >= kRiemannSiegelFloor)) {
    throw InvalidArgument("riemann_siegel_Z: t must be >= 10 (use euler_maclaurin_Z below)");
  }
  const double a = std::sqrt(t / kTwoPi);
  const long n_terms = static_cast<long>(a);
  const double p = a - static_cast<double>(n_terms);
  const double th = theta(t);
  double main = 0.0;
  for (long n = 1; n <= n_terms; ++n) {
    const double dn = static_cast<double>(n);
    main += std::cos(th - t * std::log(dn)) / std::sqrt(dn);
  }
  const auto& table = rs_table();
  const double u = 1.0 / a;  // (2 pi / t)^{1/2}
  double corr = 0.0;
  double upow = 1.0;
  for (int k = 0; k < 5; ++k) {
    corr += table.eval(k, p) * upow;
    upow *= u;
  }
  const double sign = (n_terms - 1) % 2 == 0 ? 1.0 : -1.0;
  return 2.0 * main + sign * std::sqrt(u) * corr;
}

cplx zeta_euler_maclaurin(cplx s) {
  if (s == cplx(1.0, 0.0)) throw InvalidArgument("zeta: pole at s = 1");
  constexpr int kTerms = static_cast<int>(kBernoulli.size());
  const double reach = std::abs(s) + 2.0 * kTerms + 1.0;
  const long n_cut = std::max(10L, static_cast<long>(std::ceil(reach / kPi)));
  CompensatedComplexSum sum;
  for (long n = 1; n < n_cut; ++n) sum.add(std::exp(-s * std::log(static_cast<double>(n))));
  const double N = static_cast<double>(n_cut);
  const double logN = std::log(N);
  const cplx n_pow_s = std::exp(-s * logN);  // N^{-s}
  cplx total = sum.value() + N * n_pow_s / (s - 1.0) + 0.5 * n_pow_s;
  // sum_k B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
  cplx rising = s;
  cplx npow = n_pow_s / N;
  double fact = 2.0;
  for (int k = 1; k <= kTerms; ++k) {
    total += kBernoulli[k - 1] / fact * rising * npow;
    rising *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
    npow /= N * N;
    fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
  }
  return total;
}

double euler_maclaurin_Z(double t) {
  const cplx z = zeta_euler_maclaurin(cplx(0.5, t));
  return (std::polar(1.0, theta_exact(t)) * z).real();
}

double hardy_Z(double t) {
  return t < kRiemannSiegelCrossover ? euler_maclaurin_Z(t) : riemann_siegel_Z(t);
}

double counting_main_term(double T) {
  const double x = T / kTwoPi;
  return x * std::log(x) - x;
}

ZeroScan scan_zeros(double T, const EngineOptions& opts) {
  if (!(T >= kRiemannSiegelFloor)) throw InvalidArgument("count_zeros: T must be >= 10");
  check_height(T);
  const double t_cert = std::max(T, kTuringFloor + 1.0);
  const double base_window = std::max(12.0 * mean_gap(t_cert), 10.0);
  int divisor = opts.grid_divisor;
  for (int attempt = 0; attempt <= opts.turing_retries; ++attempt, divisor *= 2) {
    ZeroScan scan;
    scan.ordinates = scan_to(t_cert + 4.0 * base_window, opts, divisor);
    TuringResult tr;
    for (double H = base_window; H <= 4.0 * base_window * (1 + 1e-12); H *= 2.0) {
      tr = turing_check(scan.ordinates, t_cert, H);
      if (tr.certified) break;
    }
    if (!tr.certified) continue;
    auto& rep = scan.report;
    rep.T = T;
    rep.count_signchange =
        std::upper_bound(scan.ordinates.begin(), scan.ordinates.end(), T) - scan.ordinates.begin();
    rep.count_formula = counting_main_term(T);
    rep.residual = static_cast<double>(rep.count_signchange) - rep.count_formula;
    rep.count_formula_7_8 = rep.count_formula + 0.875;
    rep.turing_height = t_cert;
    rep.turing_window = tr.window;
    rep.turing_upper = tr.upper;
    rep.turing_found = tr.found;
    rep.grid_divisor = divisor;
    // Parity: sign Z(T) = (-1)^{N(T) - 1}.
    const double zT = hardy_Z(T);
    const bool odd = rep.count_signchange % 2 == 1;
    if (zT != 0.0 && (zT > 0.0) != odd) {
      throw CertificationError("count_zeros: parity of the count disagrees with sign Z(T) at T=" +
                               std::to_string(T));
    }
    return scan;
  }
  throw CertificationError("count_zeros: Turing check could not certify N(" +
                           std::to_string(t_cert) + ") after grid refinement");
}

ZeroCountReport count_zeros(double T, const EngineOptions& opts) {
  return scan_zeros(T, opts).report;
}

std::vector<double> find_zeros(const HeightRange& range, const EngineOptions& opts) {
  check_height(range.t_hi);
  if (range.t_hi < kRiemannSiegelFloor) return {};  // first ordinate is 14.13...
  auto scan = scan_zeros(range.t_hi, opts);
  std::vector<double> out;
  for (double g : scan.ordinates) {
    if (range.contains(g)) out.push_back(g);
  }
  return out;
}

std::vector<double> ingest_zero_table(std::istream& in) {
  std::vector<double> out;
  std::string line;
  long line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back()))) sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;
    if (!seen_data && sv == "gamma") {
      seen_data = true;
      continue;
    }
    seen_data = true;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc() || ptr != sv.data() + sv.size() || !std::isfinite(v) || v <= 0.0) {
      throw InvalidArgument("zero table line " + std::to_string(line_no) + ": malformed ordinate '" +
                            std::string(sv) + "'");
    }
    if (!out.empty() && !(v > out.back())) {
      throw InvalidArgument("zero table line " + std::to_string(line_no) +
                            ": ordinates must be strictly increasing");
    }
    out.push_back(v);
  }
  return out;
}

DensitySum local_density_sum(const std::vector<double>& ordinates, double t) {
  DensitySum r;
  r.t = t;
  CompensatedSum s;
  for (double g : ordinates) {
    s.add(1.0 / (1.0 + (t - g) * (t - g)));
    s.add(1.0 / (1.0 + (t + g) * (t + g)));
  }
  r.sum = s.value();
  if (!ordinates.empty()) {
    const double gmax = ordinates.back();
    const double dens = std::log(std::max(gmax, kTwoPi * 1.5) / kTwoPi) / kTwoPi;
    r.tail_estimate = dens * ((0.5 * kPi - std::atan(gmax - t)) + (0.5 * kPi - std::atan(gmax + t)));
  }
  r.ratio = (r.sum + r.tail_estimate) / std::log(t + 2.0);
  return r;
}

}  // namespace zpc::engine
