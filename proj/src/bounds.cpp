#include "zpc/bounds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace zpc {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t parse_int(std::string_view sv, const std::string& whole) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc() || ptr != sv.data() + sv.size() || sv.empty()) {
    throw InvalidArgument("rational '" + whole + "': expected p/q, an integer or a decimal");
  }
  return v;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = from_wide(num, den);
}

Rational Rational::from_wide(__int128 num, __int128 den) {
  if (den == 0) throw InvalidArgument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();
  if (num > kMax || num < -kMax || den > kMax) throw InvalidArgument("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

Rational Rational::parse(const std::string& s) {
  const std::string_view sv(s);
  if (const auto slash = sv.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(sv.substr(0, slash), s), parse_int(sv.substr(slash + 1), s));
  }
  if (const auto dot = sv.find('.'); dot != std::string_view::npos) {
    const auto frac = sv.substr(dot + 1);
    const bool digits =
        !frac.empty() && std::all_of(frac.begin(), frac.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (!digits || frac.size() > 17) throw InvalidArgument("rational '" + s + "': malformed decimal");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const bool neg = sv.front() == '-';
    const auto int_part = sv.substr(0, dot);
    const std::int64_t ip = int_part.empty() || int_part == "-" ? 0 : parse_int(int_part, s);
    const std::int64_t fp = parse_int(frac, s);
    const __int128 mag = static_cast<__int128>(ip < 0 ? -ip : ip) * den + fp;
    return from_wide(neg ? -mag : mag, den);
  }
  return Rational(parse_int(sv, s));
}

Rational Rational::ceil_of(double x, std::int64_t den) {
  if (!std::isfinite(x)) throw InvalidArgument("rational from a non-finite value");
  const long double scaled = std::ceil(static_cast<long double>(x) * den);
  if (std::abs(scaled) > 9.0e18L) throw InvalidArgument("rational overflow");
  return Rational(static_cast<std::int64_t>(scaled), den);
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                             static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                             static_cast<__int128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
}

ProportionReport proportions_from_C(const Rational& C) {
  if (C < Rational(1)) throw InvalidArgument("C must be >= 1, got " + C.str());
  ProportionReport r;
  r.C = C;
  r.raw = {Rational(2) - C, (Rational(3) - C) / Rational(2), (Rational(4) - C) / Rational(3)};
  Rational* out[3] = {&r.p_simple_critical, &r.p_avg, &r.p_either};
  for (int i = 0; i < 3; ++i) {
    r.clamped[i] = r.raw[i] < Rational(0);
    *out[i] = r.clamped[i] ? Rational(0) : r.raw[i];
  }
  return r;
}

nlohmann::json to_json(const ProportionReport& r) {
  return {{"C", r.C.str()},
          {"simple_and_critical", r.p_simple_critical.str()},
          {"average", r.p_avg.str()},
          {"simple_or_critical", r.p_either.str()},
          {"clamped", {r.clamped[0], r.clamped[1], r.clamped[2]}}};
}

CExtraction extract_C(const ZeroMultiset& zs, const HeightRange& range) {
  CExtraction e;
  e.T = range.reference_height();
  e.coincidence = coincidence_count(zs, range);
  e.scale = pair_scale(e.T);
  e.C_hat = e.coincidence == 0 ? 0.0 : static_cast<double>(e.coincidence) / e.scale;
  return e;
}

bool PipelineReport::certified() const {
  return std::all_of(chain.begin(), chain.end(), [](const ChainNode& n) { return n.certified; });
}

PipelineReport theorem1_pipeline(const ZeroMultiset& zs, const BoxSpec& box, int workers) {
  require_in_box(zs, box);
  PipelineReport r;
  r.box = box;
  r.scale = pair_scale(box.T);
  r.zero_count = count_with_multiplicity(zs, box.range());
  r.coincidence = coincidence_count(zs, box.range());
  const auto& d = r.decomposition = fejer_error_term_decomposition(zs, box, workers);

  const double coinc = static_cast<double>(r.coincidence);
  r.chain.push_back({"coincidence_count", coinc, d.real_sum, coinc <= d.real_sum});
  r.chain.push_back({"real_fejer_sum", d.real_sum, d.real_trunc, std::isfinite(d.real_sum)});
  r.chain.push_back({"K_b", d.k_b.real(), d.k_b_trunc, std::isfinite(d.k_b.real())});
  r.chain.push_back({"K_b_minus_real_sum", std::abs(d.difference), d.difference_bound(), d.difference_holds});
  r.chain.push_back(
      {"selberg_part", std::abs(d.selberg_part), kSelbergPairConstant * d.error_sum, d.selberg_holds});
  r.chain.push_back({"w_part", std::abs(d.w_part), d.w_bound, d.w_holds});
  r.chain.push_back({"dyadic_tally", d.error_sum, d.dyadic_tally, d.tally_holds});

  r.C_hat = (d.real_sum + d.real_trunc) / r.scale;
  const double via_kb = (d.k_b.real() + d.difference_bound()) / r.scale;
  r.chain.push_back({"C_hat", r.C_hat, via_kb, r.C_hat <= via_kb});
  r.chain_slack = (d.real_sum - coinc) / r.scale;

  r.C_clamped = r.C_hat < 1.0;
  r.proportions = proportions_from_C(Rational::ceil_of(std::max(r.C_hat, 1.0)));
  return r;
}

nlohmann::json to_json(const PipelineReport& r) {
  nlohmann::json chain = nlohmann::json::array();
  for (const auto& n : r.chain) {
    chain.push_back({{"name", n.name}, {"value", n.value}, {"bound", n.bound}, {"certified", n.certified}});
  }
  const auto& d = r.decomposition;
  return {{"T", r.box.T},
          {"b", r.box.b},
          {"scale", r.scale},
          {"zero_count", r.zero_count},
          {"coincidence", r.coincidence},
          {"chain", chain},
          {"C_hat", r.C_hat},
          {"C_clamped", r.C_clamped},
          {"chain_slack", r.chain_slack},
          {"certified", r.certified()},
          {"error_sum", d.error_sum},
          {"error_ratio", d.error_ratio},
          {"tally_ratio", d.tally_ratio},
          {"selberg_pair_max", d.selberg_pair_max},
          {"proportions", to_json(r.proportions)}};
}

}  // namespace zpc
