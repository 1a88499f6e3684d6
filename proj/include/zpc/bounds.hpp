#pragma once

/// Proportion arithmetic for a diagonal constant C >= 1,
///
///   simple and critical >= 2 - C,   average >= (3 - C) / 2,   simple or critical >= (4 - C) / 3,
///
/// extraction of C from coincidence counts, and the certified chain
///
///   sum_{gamma = gamma'} 1 <= real-ordinate Fejer sum = K_b(T) - (K_b - real sum)
///
/// over (T, 2T] for multisets inside a box.

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "zpc/common.hpp"
#include "zpc/kernels.hpp"
#include "zpc/zero_multiset.hpp"

namespace zpc {

/// Exact rational with 64-bit numerator and denominator; throws on overflow.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  /// "p/q", an integer, or a finite decimal such as "1.25".
  static Rational parse(const std::string& s);
  /// Smallest multiple of 1/den that is >= x.
  static Rational ceil_of(double x, std::int64_t den = 1000000);

  [[nodiscard]] std::int64_t num() const { return num_; }
  [[nodiscard]] std::int64_t den() const { return den_; }
  [[nodiscard]] double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  [[nodiscard]] std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  static Rational from_wide(__int128 num, __int128 den);
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

struct ProportionReport {
  Rational C;
  Rational p_simple_critical;  // 2 - C
  Rational p_avg;              // (3 - C) / 2
  Rational p_either;           // (4 - C) / 3
  /// Unclamped 2 - C, (3 - C) / 2, (4 - C) / 3.
  std::array<Rational, 3> raw;
  /// Set where the raw value was negative and has been clamped to 0.
  std::array<bool, 3> clamped{false, false, false};
};

/// Throws InvalidArgument for C < 1.
ProportionReport proportions_from_C(const Rational& C);
nlohmann::json to_json(const ProportionReport& r);

struct CExtraction {
  double T = 0.0;
  long coincidence = 0;
  double scale = 0.0;
  double C_hat = 0.0;
};

/// C_hat = coincidence_count / ((T/2pi) log T), with T the range's reference height
/// (the lower end for (T, 2T], the upper end otherwise).
CExtraction extract_C(const ZeroMultiset& zs, const HeightRange& range);

struct ChainNode {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool certified = false;
};

struct PipelineReport {
  BoxSpec box;
  double scale = 0.0;
  long zero_count = 0;
  long coincidence = 0;
  std::vector<ChainNode> chain;
  double C_hat = 0.0;
  double chain_slack = 0.0;  // (real Fejer sum - coincidences) / scale
  bool C_clamped = false;    // C_hat < 1 raised to 1 before the proportion arithmetic
  ProportionReport proportions;
  DecompositionReport decomposition;

  [[nodiscard]] bool certified() const;
};

/// Throws BoxViolation listing the zeros in (T, 2T] outside the box.
PipelineReport theorem1_pipeline(const ZeroMultiset& zs, const BoxSpec& box, int workers = 1);
nlohmann::json to_json(const PipelineReport& r);

}  // namespace zpc
