#pragma once

/// Zeros as a multiset: each zero rho = beta + i gamma carries a multiplicity,
/// and every count or pair sum runs over the multiset (a zero of multiplicity m
/// contributes m copies). Also the box B_b, window queries, coincidence counts
/// and seeded synthetic multisets.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "zpc/common.hpp"

namespace zpc {

struct Zero {
  double beta = 0.5;
  double gamma = 0.0;
  int mult = 1;

  friend bool operator==(const Zero&, const Zero&) = default;
};

enum class Provenance { computed, ingested, synthetic };
std::string to_string(Provenance p);

/// Box |sigma - 1/2| < b / (2 log T), T < t <= 2T.
struct BoxSpec {
  double b = 0.0;
  double T = 10.0;

  BoxSpec() = default;
  BoxSpec(double b_, double T_);
  [[nodiscard]] double half_width() const { return b / (2.0 * std::log(T)); }
  [[nodiscard]] HeightRange range() const { return {T, 2.0 * T}; }
};

bool in_box(const Zero& z, const BoxSpec& box);

/// Raised when zeros with T < gamma <= 2T fall outside the box.
class BoxViolation : public InvalidArgument {
 public:
  BoxViolation(const BoxSpec& box, std::vector<Zero> offenders);
  [[nodiscard]] const std::vector<Zero>& offenders() const { return offenders_; }

 private:
  std::vector<Zero> offenders_;
};

/// Immutable after construction: zeros sorted by (gamma, beta), exact
/// duplicates merged into one entry with summed multiplicity.
class ZeroMultiset {
 public:
  ZeroMultiset() = default;
  ZeroMultiset(std::vector<Zero> zeros, Provenance provenance,
               std::optional<std::uint64_t> seed = std::nullopt);

  /// Simple critical-line zeros at the given ordinates.
  static ZeroMultiset from_ordinates(const std::vector<double>& gammas, Provenance provenance);

  [[nodiscard]] const std::vector<Zero>& zeros() const { return zeros_; }
  [[nodiscard]] Provenance provenance() const { return provenance_; }
  [[nodiscard]] std::optional<std::uint64_t> seed() const { return seed_; }
  [[nodiscard]] bool empty() const { return zeros_.empty(); }
  [[nodiscard]] std::size_t size() const { return zeros_.size(); }

  /// Contiguous run of zeros with gamma in the range.
  [[nodiscard]] std::span<const Zero> window(const HeightRange& range) const;
  [[nodiscard]] ZeroMultiset restricted(const HeightRange& range) const;
  /// Same zeros, every multiplicity multiplied by k.
  [[nodiscard]] ZeroMultiset with_multiplicity_scaled(int k) const;
  /// Same ordinates and multiplicities, beta replaced by 1/2 + scale (beta - 1/2).
  [[nodiscard]] ZeroMultiset with_beta_scaled(double scale) const;
  [[nodiscard]] bool all_critical() const;

 private:
  std::vector<Zero> zeros_;
  Provenance provenance_ = Provenance::computed;
  std::optional<std::uint64_t> seed_;
};

/// Zeros with T < gamma <= 2T that are not in the box.
std::vector<Zero> box_violations(const ZeroMultiset& zs, const BoxSpec& box);
/// Throws BoxViolation unless every zero in (T, 2T] lies in the box.
void require_in_box(const ZeroMultiset& zs, const BoxSpec& box);

/// sum of mult over zeros with gamma in range.
long count_with_multiplicity(const ZeroMultiset& zs, const HeightRange& range);

/// Ordered pairs (rho, rho') from the multiset, both in range, with gamma = gamma'
/// (exact equality of stored ordinates): sum over distinct gamma of (sum mult)^2.
long coincidence_count(const ZeroMultiset& zs, const HeightRange& range);

enum class SpacingLaw {
  poisson,  // independent exponential gaps
  gue,      // unfolded bulk eigenvalues of the tridiagonal beta = 2 Hermite ensemble
  lattice,  // equal gaps with uniform jitter of +-1/4 gap
};
enum class BetaLaw {
  critical,  // beta = 1/2
  uniform,   // uniform over the open box width
  edge,      // |beta - 1/2| in the outer tenth of the box width
};

struct SynthSpec {
  long count = 100;
  BoxSpec box{0.0, 1000.0};
  /// Relative weights of multiplicity 1, 2, 3.
  std::array<double, 3> mult_weights{1.0, 0.0, 0.0};
  BetaLaw beta_law = BetaLaw::uniform;
  SpacingLaw spacing = SpacingLaw::gue;
  /// Probability that a zero shares the previous zero's ordinate with a different beta.
  double shared_ordinate_prob = 0.0;
  /// Shared-ordinate partners take beta' = 1 - beta (functional-equation mirror).
  bool mirror_pairs = false;
  std::uint64_t seed = 1;
};

/// Seeded multiset with every zero inside spec.box. Ordinates have mean
/// density (log T) / 2 pi, compressed only when `count` zeros cannot fit in (T, 2T].
ZeroMultiset synthesize(const SynthSpec& spec);

SpacingLaw parse_spacing_law(const std::string& s);
BetaLaw parse_beta_law(const std::string& s);

/// CSV with header `beta,gamma,mult`; values are written in shortest
/// round-trip form so equal ordinates stay equal.
void write_multiset_csv(std::ostream& out, const ZeroMultiset& zs);
/// Reads `beta,gamma,mult` CSV, or a plain ordinate table (simple, critical).
ZeroMultiset read_zero_file(std::istream& in);
nlohmann::json to_json(const ZeroMultiset& zs);

}  // namespace zpc
