#include "zpc/zero_multiset.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "zpc/zero_engine.hpp"

namespace zpc {

namespace {

// Portable draws from mt19937_64 (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  /// Uniform on the open interval (-1, 1).
  double symmetric_open() {
    double u;
    do {
      u = 2.0 * uniform() - 1.0;
    } while (u == -1.0);
    return u;
  }
  double exponential() { return -std::log1p(-uniform()); }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 == 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }
  /// chi variable with 2m degrees of freedom: sqrt(2 Gamma(m, 1)).
  double chi_even(long m) {
    double g = 0.0;
    for (long i = 0; i < m; ++i) g += exponential();
    return std::sqrt(2.0 * g);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Unit-mean-spacing points from bulk GUE eigenvalues (Dumitriu-Edelman
// tridiagonal model, beta = 2). Eigenvalues have semicircle radius 2 sqrt(n);
// only |lambda| < R/2 is kept and unfolded through the semicircle CDF.
void append_gue_block(Rng& rng, std::vector<double>& pts, double offset) {
  constexpr long n = 768;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n - 1);
  for (long i = 0; i < n; ++i) diag[i] = rng.normal();
  for (long i = 0; i < n - 1; ++i) sub[i] = rng.chi_even(n - 1 - i) / std::sqrt(2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const double radius = 2.0 * std::sqrt(static_cast<double>(n));
  auto unfold = [&](double lam) {
    const double u = std::clamp(lam / radius, -1.0, 1.0);
    return static_cast<double>(n) * (0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / kPi);
  };
  const double lo = unfold(-0.5 * radius);
  for (long i = 0; i < n; ++i) {
    const double lam = solver.eigenvalues()[i];
    if (std::abs(lam) < 0.5 * radius) pts.push_back(offset + unfold(lam) - lo);
  }
}

// Increasing unit-mean-spacing sequence of `m` positive points.
std::vector<double> unit_points(Rng& rng, SpacingLaw law, long m) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(m));
  switch (law) {
    case SpacingLaw::poisson: {
      double x = 0.0;
      for (long i = 0; i < m; ++i) {
        x += rng.exponential();
        pts.push_back(x);
      }
      break;
    }
    case SpacingLaw::lattice: {
      for (long i = 0; i < m; ++i) pts.push_back(i + 1.0 + 0.25 * rng.symmetric_open());
      break;
    }
    case SpacingLaw::gue: {
      double offset = rng.exponential();
      while (static_cast<long>(pts.size()) < m) {
        append_gue_block(rng, pts, offset);
        offset = pts.back() + 1.0;
      }
      pts.resize(static_cast<std::size_t>(m));
      break;
    }
  }
  return pts;
}

int draw_multiplicity(Rng& rng, const std::array<double, 3>& w) {
  const double total = w[0] + w[1] + w[2];
  const double u = rng.uniform() * total;
  if (u < w[0]) return 1;
  if (u < w[0] + w[1]) return 2;
  return 3;
}

double draw_beta(Rng& rng, BetaLaw law, const BoxSpec& box) {
  const double hw = box.half_width();
  if (law == BetaLaw::critical || hw == 0.0) return 0.5;
  for (;;) {
    double beta = 0.5;
    if (law == BetaLaw::uniform) {
      beta = 0.5 + hw * rng.symmetric_open();
    } else {
      const double mag = 0.9 + 0.1 * rng.uniform();
      beta = 0.5 + (rng.uniform() < 0.5 ? -1.0 : 1.0) * hw * mag;
    }
    if (std::abs(beta - 0.5) < hw) return beta;  // strict, after rounding
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view sv) {
  while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front()))) sv.remove_prefix(1);
  while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back()))) sv.remove_suffix(1);
  return sv;
}

template <class T>
T parse_field(std::string_view sv, long line_no) {
  sv = trim(sv);
  T v{};
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc() || ptr != sv.data() + sv.size()) {
    throw InvalidArgument("multiset CSV line " + std::to_string(line_no) + ": malformed field '" +
                          std::string(sv) + "'");
  }
  return v;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::computed:
      return "computed";
    case Provenance::ingested:
      return "ingested";
    case Provenance::synthetic:
      return "synthetic";
  }
  return "unknown";
}

BoxSpec::BoxSpec(double b_, double T_) : b(b_), T(T_) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidArgument("box: b must be finite and >= 0");
  if (!(T >= 10.0) || !std::isfinite(T)) throw InvalidArgument("box: T must be finite and >= 10");
}

bool in_box(const Zero& z, const BoxSpec& box) {
  return std::abs(z.beta - 0.5) < box.half_width() && z.gamma > box.T && z.gamma <= 2.0 * box.T;
}

namespace {

std::string violation_message(const BoxSpec& box, const std::vector<Zero>& bad) {
  std::ostringstream os;
  os.precision(17);
  os << bad.size() << " zero(s) in (" << box.T << ", " << 2.0 * box.T << "] outside the box b = " << box.b
     << ":";
  for (std::size_t i = 0; i < bad.size() && i < 10; ++i) {
    os << " (beta=" << bad[i].beta << ", gamma=" << bad[i].gamma << ", mult=" << bad[i].mult << ")";
  }
  if (bad.size() > 10) os << " ...";
  return os.str();
}

}  // namespace

BoxViolation::BoxViolation(const BoxSpec& box, std::vector<Zero> offenders)
    : InvalidArgument(violation_message(box, offenders)), offenders_(std::move(offenders)) {}

std::vector<Zero> box_violations(const ZeroMultiset& zs, const BoxSpec& box) {
  std::vector<Zero> bad;
  for (const auto& z : zs.window(box.range())) {
    if (!in_box(z, box)) bad.push_back(z);
  }
  return bad;
}

void require_in_box(const ZeroMultiset& zs, const BoxSpec& box) {
  auto bad = box_violations(zs, box);
  if (!bad.empty()) throw BoxViolation(box, std::move(bad));
}

ZeroMultiset::ZeroMultiset(std::vector<Zero> zeros, Provenance provenance,
                           std::optional<std::uint64_t> seed)
    : provenance_(provenance), seed_(seed) {
  for (const auto& z : zeros) {
    if (!(z.beta > 0.0 && z.beta < 1.0)) throw InvalidArgument("zero: beta must lie in (0, 1)");
    if (!(z.gamma > 0.0) || !std::isfinite(z.gamma)) throw InvalidArgument("zero: gamma must be > 0");
    if (z.mult < 1) throw InvalidArgument("zero: multiplicity must be >= 1");
  }
  std::sort(zeros.begin(), zeros.end(), [](const Zero& a, const Zero& b) {
    return a.gamma != b.gamma ? a.gamma < b.gamma : a.beta < b.beta;
  });
  for (const auto& z : zeros) {
    if (!zeros_.empty() && zeros_.back().gamma == z.gamma && zeros_.back().beta == z.beta) {
      zeros_.back().mult += z.mult;
    } else {
      zeros_.push_back(z);
    }
  }
}

ZeroMultiset ZeroMultiset::from_ordinates(const std::vector<double>& gammas, Provenance provenance) {
  std::vector<Zero> zs;
  zs.reserve(gammas.size());
  for (double g : gammas) zs.push_back({0.5, g, 1});
  return ZeroMultiset(std::move(zs), provenance);
}

std::span<const Zero> ZeroMultiset::window(const HeightRange& range) const {
  const auto lo = std::upper_bound(zeros_.begin(), zeros_.end(), range.t_lo,
                                   [](double t, const Zero& z) { return t < z.gamma; });
  const auto hi = std::upper_bound(lo, zeros_.end(), range.t_hi,
                                   [](double t, const Zero& z) { return t < z.gamma; });
  return {lo, hi};
}

ZeroMultiset ZeroMultiset::restricted(const HeightRange& range) const {
  const auto w = window(range);
  return ZeroMultiset(std::vector<Zero>(w.begin(), w.end()), provenance_, seed_);
}

ZeroMultiset ZeroMultiset::with_multiplicity_scaled(int k) const {
  if (k < 1) throw InvalidArgument("multiplicity scale must be >= 1");
  auto zs = zeros_;
  for (auto& z : zs) z.mult *= k;
  return ZeroMultiset(std::move(zs), provenance_, seed_);
}

ZeroMultiset ZeroMultiset::with_beta_scaled(double scale) const {
  auto zs = zeros_;
  for (auto& z : zs) z.beta = 0.5 + scale * (z.beta - 0.5);
  return ZeroMultiset(std::move(zs), provenance_, seed_);
}

bool ZeroMultiset::all_critical() const {
  return std::all_of(zeros_.begin(), zeros_.end(), [](const Zero& z) { return z.beta == 0.5; });
}

long count_with_multiplicity(const ZeroMultiset& zs, const HeightRange& range) {
  long n = 0;
  for (const auto& z : zs.window(range)) n += z.mult;
  return n;
}

long coincidence_count(const ZeroMultiset& zs, const HeightRange& range) {
  const auto w = zs.window(range);
  long total = 0;
  std::size_t i = 0;
  while (i < w.size()) {
    long group = 0;
    std::size_t j = i;
    while (j < w.size() && w[j].gamma == w[i].gamma) group += w[j++].mult;
    total += group * group;
    i = j;
  }
  return total;
}

ZeroMultiset synthesize(const SynthSpec& spec) {
  if (spec.count < 1) throw InvalidArgument("synthesize: count must be >= 1");
  if (spec.shared_ordinate_prob < 0.0 || spec.shared_ordinate_prob >= 1.0) {
    throw InvalidArgument("synthesize: shared_ordinate_prob must lie in [0, 1)");
  }
  const auto& w = spec.mult_weights;
  if (w[0] < 0 || w[1] < 0 || w[2] < 0 || w[0] + w[1] + w[2] <= 0) {
    throw InvalidArgument("synthesize: multiplicity weights must be >= 0 with positive sum");
  }
  Rng rng(spec.seed);
  const BoxSpec& box = spec.box;

  // Decide which zeros open a new ordinate before drawing ordinates.
  std::vector<bool> shares(static_cast<std::size_t>(spec.count), false);
  long n_ordinates = 0;
  for (long i = 0; i < spec.count; ++i) {
    shares[i] = i > 0 && spec.shared_ordinate_prob > 0.0 && rng.uniform() < spec.shared_ordinate_prob;
    if (!shares[i]) ++n_ordinates;
  }
  auto pts = unit_points(rng, spec.spacing, n_ordinates);
  const double natural_gap = kTwoPi / std::log(box.T);
  const double last = pts.back();
  double gap = natural_gap;
  if (box.T + gap * last > 2.0 * box.T) gap = box.T / (last * (1.0 + 1e-12));
  // Keep ordinates strictly above T.
  std::vector<double> gammas;
  gammas.reserve(pts.size());
  for (double x : pts) {
    double g = box.T + gap * x;
    if (!(g > box.T)) g = std::nextafter(box.T, 2.0 * box.T);
    gammas.push_back(std::min(g, 2.0 * box.T));
  }

  std::vector<Zero> zeros;
  zeros.reserve(static_cast<std::size_t>(spec.count));
  long slot = -1;
  for (long i = 0; i < spec.count; ++i) {
    if (!shares[i]) ++slot;
    Zero z;
    z.gamma = gammas[static_cast<std::size_t>(slot)];
    z.mult = draw_multiplicity(rng, spec.mult_weights);
    if (shares[i] && spec.mirror_pairs) {
      z.beta = 1.0 - zeros.back().beta;
    } else {
      z.beta = draw_beta(rng, spec.beta_law, box);
    }
    zeros.push_back(z);
  }
  return ZeroMultiset(std::move(zeros), Provenance::synthetic, spec.seed);
}

SpacingLaw parse_spacing_law(const std::string& s) {
  if (s == "poisson") return SpacingLaw::poisson;
  if (s == "gue") return SpacingLaw::gue;
  if (s == "lattice") return SpacingLaw::lattice;
  throw InvalidArgument("unknown spacing law '" + s + "' (poisson|gue|lattice)");
}

BetaLaw parse_beta_law(const std::string& s) {
  if (s == "critical") return BetaLaw::critical;
  if (s == "uniform") return BetaLaw::uniform;
  if (s == "edge") return BetaLaw::edge;
  throw InvalidArgument("unknown beta law '" + s + "' (critical|uniform|edge)");
}

void write_multiset_csv(std::ostream& out, const ZeroMultiset& zs) {
  out << "beta,gamma,mult\n";
  for (const auto& z : zs.zeros()) {
    out << format_double(z.beta) << ',' << format_double(z.gamma) << ',' << z.mult << '\n';
  }
}

ZeroMultiset read_zero_file(std::istream& in) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream ss(content);
  std::string line;
  long line_no = 0;
  bool is_multiset = false;
  while (std::getline(ss, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    is_multiset = t == "beta,gamma,mult";
    break;
  }
  std::istringstream again(content);
  if (!is_multiset) {
    return ZeroMultiset::from_ordinates(engine::ingest_zero_table(again), Provenance::ingested);
  }
  std::vector<Zero> zeros;
  bool header_seen = false;
  while (std::getline(again, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto c1 = t.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : t.find(',', c1 + 1);
    if (c2 == std::string_view::npos || t.find(',', c2 + 1) != std::string_view::npos) {
      throw InvalidArgument("multiset CSV line " + std::to_string(line_no) + ": expected 3 fields");
    }
    Zero z;
    z.beta = parse_field<double>(t.substr(0, c1), line_no);
    z.gamma = parse_field<double>(t.substr(c1 + 1, c2 - c1 - 1), line_no);
    z.mult = parse_field<int>(t.substr(c2 + 1), line_no);
    zeros.push_back(z);
  }
  return ZeroMultiset(std::move(zeros), Provenance::ingested);
}

nlohmann::json to_json(const ZeroMultiset& zs) {
  nlohmann::json j;
  j["provenance"] = to_string(zs.provenance());
  j["seed"] = zs.seed() ? nlohmann::json(*zs.seed()) : nlohmann::json(nullptr);
  auto& arr = j["zeros"] = nlohmann::json::array();
  for (const auto& z : zs.zeros()) arr.push_back({{"beta", z.beta}, {"gamma", z.gamma}, {"mult", z.mult}});
  return j;
}

}  // namespace zpc
