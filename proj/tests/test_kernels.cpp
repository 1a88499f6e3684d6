#include <cmath>

#include "doctest.h"
#include "zpc/kernels.hpp"
#include "zpc/zero_engine.hpp"

using namespace zpc;

namespace {

const ZeroMultiset& real_zeros() {
  static const ZeroMultiset zs =
      ZeroMultiset::from_ordinates(engine::find_zeros({0.0, 2000.0}), Provenance::computed);
  return zs;
}

}  // namespace

TEST_CASE("fejer values") {
  CHECK(fejer(cplx(0.0, 0.0)) == cplx(1.0, 0.0));
  CHECK(fejer(0.0) == 1.0);
  CHECK(std::abs(fejer(cplx(kPi, 0.0))) < 1e-30);
  for (double y : {0.3, 1.0, 4.0}) {
    const cplx v = fejer(cplx(0.0, y));
    CHECK(v.real() == doctest::Approx(std::pow(std::sinh(y) / y, 2)).epsilon(1e-14));
    CHECK(std::abs(v.imag()) < 1e-15);
    CHECK(v.real() >= 1.0);
  }
  // Series branch against long double direct evaluation on both sides of the switch.
  for (double x : {1e-7, 3e-5, 9.9e-5, 1.01e-4, 1e-3}) {
    const long double lx = x;
    const long double ref = std::pow(std::sin(lx) / lx, 2);
    CHECK(std::abs(fejer(x) - static_cast<double>(ref)) <= 1e-12 * static_cast<double>(ref));
    CHECK(std::abs(fejer(cplx(x, 0.0)).real() - static_cast<double>(ref)) <= 1e-12 * static_cast<double>(ref));
  }
}

TEST_CASE("fejer symmetries") {
  for (double x = -30.0; x <= 30.0; x += 0.37) {
    const double v = fejer(x);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(fejer(-x) == v);
  }
  for (cplx z : {cplx(1.3, 0.4), cplx(-7.0, 2.5), cplx(0.2, -3.0)}) {
    CHECK(std::abs(fejer(-z) - fejer(z)) <= 1e-14 * std::abs(fejer(z)));
    CHECK(std::abs(fejer(std::conj(z)) - std::conj(fejer(z))) <= 1e-14 * std::abs(fejer(z)));
  }
}

TEST_CASE("integral identity") {
  const auto zero = fejer_integral_identity_check(cplx(0.0, 0.0));
  CHECK(zero.closed_form == cplx(1.0, 0.0));
  CHECK(zero.abs_diff < 1e-13);
  const auto two = fejer_integral_identity_check(cplx(2.0, 0.0));
  CHECK(two.closed_form.real() == doctest::Approx((std::cosh(2.0) - 1.0) / 2.0).epsilon(1e-14));
  CHECK(two.abs_diff < 1e-12);
  for (cplx z : {cplx(1, 0), cplx(-1, 0), cplx(0, 2), cplx(0, -2), cplx(3, 4)}) {
    CAPTURE(z);
    CHECK(fejer_integral_identity_check(z).abs_diff <= 1e-10);
  }
  const auto grid = default_identity_grid();
  CHECK(grid.size() == 50);
  for (cplx z : grid) {
    CHECK(std::abs(z) <= 10.0 + 1e-12);
    CHECK(fejer_integral_identity_check(z).abs_diff <= 1e-10);
  }
  CHECK(fejer_integral_identity_check(cplx(50.0, 0.0)).rel_diff < 1e-12);
  CHECK_THROWS_AS(fejer_integral_identity_check(cplx(51.0, 0.0)), InvalidArgument);
}

TEST_CASE("fejer pair sums") {
  const auto one = ZeroMultiset::from_ordinates({700.0}, Provenance::synthetic);
  for (auto m : {FejerMode::complex_W, FejerMode::real_w, FejerMode::real_unweighted}) {
    FejerSumSpec s;
    s.mode = m;
    CHECK(fejer_pair_sum(one, s).raw == cplx(1.0, 0.0));
  }

  const auto& zs = real_zeros();
  for (HeightRange r : {HeightRange{0.0, 1000.0}, HeightRange{1000.0, 2000.0}}) {
    FejerSumSpec s;
    s.range = r;
    s.mode = FejerMode::complex_W;
    const auto c = fejer_pair_sum(zs, s);
    s.mode = FejerMode::real_w;
    const auto w = fejer_pair_sum(zs, s);
    s.mode = FejerMode::real_unweighted;
    const auto u = fejer_pair_sum(zs, s);
    CHECK(std::abs(c.raw - w.raw) <= 1e-10 * std::abs(w.raw));
    CHECK(u.raw.real() >= w.raw.real());
    CHECK(u.diagonal == static_cast<double>(count_with_multiplicity(zs, r)));
    CHECK(c.normalized > 0.6);
    CHECK(c.normalized < 1.4);
  }
}

TEST_CASE("K_b restrictions") {
  SynthSpec sp;
  sp.count = 300;
  sp.box = BoxSpec(0.4, 1000.0);
  const auto zs = synthesize(sp);
  FejerSumSpec s;
  s.range = sp.box.range();
  s.mode = FejerMode::complex_W;
  s.box = sp.box;
  const auto kb = fejer_pair_sum(zs, s);
  CHECK(kb.zero_count == 300);
  s.mode = FejerMode::real_w;
  CHECK_THROWS_AS(fejer_pair_sum(zs, s), InvalidArgument);
  s.mode = FejerMode::complex_W;
  s.range = {0.0, 2000.0};
  CHECK_THROWS_AS(fejer_pair_sum(zs, s), InvalidArgument);
  // A narrower box drops the off-line zeros.
  s.range = sp.box.range();
  s.box = BoxSpec(0.01, 1000.0);
  CHECK(fejer_pair_sum(zs, s).zero_count < 300);
}

TEST_CASE("diagonal inequality on 1000 synthetic multisets") {
  long failures = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    SynthSpec s;
    s.count = 10 + static_cast<long>((seed * 7919) % 491);
    s.box = BoxSpec(0.5, 100.0 + 37.0 * static_cast<double>(seed));
    s.mult_weights = {0.6, 0.25, 0.15};
    s.shared_ordinate_prob = (seed % 5) * 0.1;
    s.mirror_pairs = seed % 2 == 0;
    s.spacing = static_cast<SpacingLaw>(seed % 3);
    s.seed = seed;
    const auto zs = synthesize(s);
    FejerSumSpec f;
    f.range = s.box.range();
    f.mode = FejerMode::real_unweighted;
    const auto sum = fejer_pair_sum(zs, f);
    if (!(static_cast<double>(coincidence_count(zs, f.range)) <= sum.raw.real())) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("weight removal") {
  const auto one = ZeroMultiset::from_ordinates({300.0}, Provenance::synthetic);
  CHECK(weight_removal_check(one, 1000.0).difference == 0.0);
  const auto r = weight_removal_check(real_zeros(), 1000.0);
  CHECK(r.difference > 0.0);
  // fejer(uL/2) u^2 w(u) / 4 <= w(u) / L^2 termwise, so the ratio is at most 1.
  CHECK(r.ratio_F0 <= 1.0);
  CHECK(r.ratio_scale <= 0.05);
}

TEST_CASE("selberg bound") {
  CHECK(selberg_ratio(3.0, 0.0) == 0.0);
  CHECK(std::abs(fejer(cplx(3.0, 0.0)) - fejer(3.0)) == 0.0);
  const double hand = (std::pow(std::sinh(1.0), 2) - 1.0) / (std::exp(2.0) / 2.0);
  CHECK(hand == doctest::Approx(0.1032).epsilon(1e-3));
  CHECK(std::abs(selberg_ratio(0.0, 1.0) - hand) < 1e-6);
  CHECK_THROWS_AS(selberg_ratio(0.0, -1.0), InvalidArgument);
  const auto grid = default_selberg_grid();
  CHECK(grid.size() == 2001u * 100u);
  const auto a = selberg_bound_check(grid);
  const auto b = selberg_bound_check(grid);
  CHECK(a.sup_ratio == b.sup_ratio);
  CHECK(std::isfinite(a.sup_ratio));
  CHECK(a.sup_ratio < 2.0);
  CHECK(2.0 * a.sup_ratio <= kSelbergPairConstant);
}

TEST_CASE("error-term decomposition") {
  SynthSpec s;
  s.count = 1100;
  s.box = BoxSpec(0.5, 1000.0);
  s.shared_ordinate_prob = 0.3;
  s.mirror_pairs = true;
  s.seed = 3;
  const auto wide = synthesize(s);

  SUBCASE("b = 0 has no beta displacement") {
    const auto flat = wide.with_beta_scaled(0.0);
    const auto d = fejer_error_term_decomposition(flat, BoxSpec(0.01, 1000.0));
    CHECK(d.selberg_part == cplx(0.0, 0.0));
    CHECK(d.error_sum == 0.0);
  }
  SUBCASE("chain inequalities hold and scale with b e^b") {
    const auto big = fejer_error_term_decomposition(wide, BoxSpec(0.5, 1000.0));
    const auto small = fejer_error_term_decomposition(wide.with_beta_scaled(0.1), BoxSpec(0.05, 1000.0));
    for (const auto* d : {&big, &small}) {
      CHECK(d->selberg_holds);
      CHECK(d->w_holds);
      CHECK(d->difference_holds);
      CHECK(d->tally_holds);
      CHECK(d->tally_ratio < 1.0);
    }
    const double ratio = big.error_sum / small.error_sum;
    const double expect = 0.5 * std::exp(0.5) / (0.05 * std::exp(0.05));
    CHECK(ratio > expect / 2.0);
    CHECK(ratio < expect * 2.0);
  }
  SUBCASE("zeros outside the box are reported") {
    auto zs = wide.zeros();
    zs.push_back({0.5 + 0.4 / std::log(1000.0), 1500.123, 1});
    try {
      fejer_error_term_decomposition(ZeroMultiset(zs, Provenance::synthetic), BoxSpec(0.5, 1000.0));
      FAIL("expected a box violation");
    } catch (const BoxViolation& e) {
      REQUIRE(e.offenders().size() == 1);
      CHECK(e.offenders()[0].gamma == 1500.123);
      CHECK(std::string(e.what()).find("1500.123") != std::string::npos);
    }
  }
}

TEST_CASE("alpha integral of the calF curve equals the complex Fejer sum") {
  const auto& zs = real_zeros();
  for (HeightRange r : {HeightRange{0.0, 1000.0}, HeightRange{1000.0, 2000.0}}) {
    const auto l = lemma1_equivalence_check(zs, r);
    CHECK(l.holds);
    const auto fine = lemma1_equivalence_check(zs, r, 0.01);
    CHECK(fine.holds);
    CHECK(fine.abs_diff < l.abs_diff);
    CHECK(fine.abs_diff < 0.01 * std::abs(fine.fejer_sum));
  }
  SynthSpec s;
  s.count = 500;
  s.box = BoxSpec(0.6, 1000.0);
  s.beta_law = BetaLaw::edge;
  const auto off = lemma1_equivalence_check(synthesize(s), s.box.range(), 0.02);
  CHECK(off.holds);
  CHECK_THROWS_AS(lemma1_equivalence_check(zs, {0.0, 1000.0}, 0.03), InvalidArgument);
}

TEST_CASE("kernel sums are bitwise identical across worker counts") {
  const auto& zs = real_zeros();
  FejerSumSpec s;
  s.range = {1000.0, 2000.0};
  s.mode = FejerMode::complex_W;
  const auto a = fejer_pair_sum(zs, s);
  s.workers = 8;
  const auto b = fejer_pair_sum(zs, s);
  CHECK(a.raw == b.raw);
  SynthSpec sp;
  sp.count = 800;
  sp.box = BoxSpec(0.5, 1000.0);
  const auto syn = synthesize(sp);
  const auto d1 = fejer_error_term_decomposition(syn, sp.box, 1);
  const auto d4 = fejer_error_term_decomposition(syn, sp.box, 4);
  CHECK(d1.k_b == d4.k_b);
  CHECK(d1.error_sum == d4.error_sum);
  CHECK(d1.dyadic_tally == d4.dyadic_tally);
}
