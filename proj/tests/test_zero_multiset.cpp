#include <cmath>
#include <sstream>

#include "doctest.h"
#include "zpc/zero_engine.hpp"
#include "zpc/zero_multiset.hpp"

using namespace zpc;

namespace {

ZeroMultiset make(std::vector<Zero> zs) { return ZeroMultiset(std::move(zs), Provenance::synthetic); }

}  // namespace

TEST_CASE("count_with_multiplicity") {
  CHECK(count_with_multiplicity(ZeroMultiset{}, {0.0, 100.0}) == 0);
  CHECK(count_with_multiplicity(make({{0.5, 50.0, 3}}), {0.0, 100.0}) == 3);
  CHECK(count_with_multiplicity(make({{0.5, 50.0, 3}}), {50.0, 100.0}) == 0);
  const auto real = ZeroMultiset::from_ordinates(engine::find_zeros({0.0, 100.0}), Provenance::computed);
  CHECK(count_with_multiplicity(real, {0.0, 100.0}) == 29);
}

TEST_CASE("construction sorts and merges duplicates") {
  const auto zs = make({{0.5, 30.0, 1}, {0.4, 20.0, 1}, {0.5, 30.0, 2}, {0.3, 20.0, 1}});
  REQUIRE(zs.size() == 3);
  CHECK(zs.zeros()[0] == Zero{0.3, 20.0, 1});
  CHECK(zs.zeros()[1] == Zero{0.4, 20.0, 1});
  CHECK(zs.zeros()[2] == Zero{0.5, 30.0, 3});
  CHECK_THROWS_AS(make({{1.0, 20.0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(make({{0.5, -1.0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(make({{0.5, 20.0, 0}}), InvalidArgument);
}

TEST_CASE("in_box") {
  const double T = 1000.0;
  const BoxSpec box(0.3, T);
  CHECK(in_box({0.5, 1.5 * T, 1}, box));
  CHECK_FALSE(in_box({0.5 + 0.3 / (2.0 * std::log(T)), 1.5 * T, 1}, box));
  CHECK_FALSE(in_box({0.5, T, 1}, box));
  CHECK(in_box({0.5, 2.0 * T, 1}, box));
  CHECK_FALSE(in_box({0.5, 1.5 * T, 1}, BoxSpec(0.0, T)));
  CHECK_THROWS_AS(BoxSpec(-0.1, T), InvalidArgument);
  CHECK_THROWS_AS(BoxSpec(0.1, 5.0), InvalidArgument);
}

TEST_CASE("in_box is monotone in b") {
  const double T = 500.0;
  for (double beta = 0.41; beta < 0.59; beta += 0.0037) {
    bool seen = false;
    for (double b = 0.0; b < 3.0; b += 0.01) {
      const bool in = in_box({beta, 700.0, 1}, BoxSpec(b, T));
      if (seen) CHECK(in);
      seen = seen || in;
    }
    CHECK(seen);
  }
}

TEST_CASE("coincidence_count") {
  const std::vector<double> g{15.0, 16.0, 17.0, 18.0, 19.0};
  const auto simple = ZeroMultiset::from_ordinates(g, Provenance::synthetic);
  CHECK(coincidence_count(simple, {0.0, 100.0}) == 5);

  auto zs = simple.zeros();
  zs[2].mult = 2;
  CHECK(coincidence_count(make(zs), {0.0, 100.0}) == 5 - 1 + 4);

  const auto pair = make({{0.45, 20.0, 1}, {0.55, 20.0, 1}, {0.5, 21.0, 1}});
  CHECK(coincidence_count(pair, {0.0, 100.0}) == 4 + 1);
  CHECK(coincidence_count(pair, {20.0, 100.0}) == 1);
}

TEST_CASE("coincidence_count >= count_with_multiplicity on synthetic data") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SynthSpec s;
    s.count = 50 + static_cast<long>(seed);
    s.box = BoxSpec(0.4, 2000.0);
    s.mult_weights = {seed % 3 == 0 ? 1.0 : 0.8, seed % 3 == 0 ? 0.0 : 0.15, seed % 3 == 0 ? 0.0 : 0.05};
    s.shared_ordinate_prob = seed % 2 ? 0.0 : 0.2;
    s.seed = seed;
    const auto zs = synthesize(s);
    const HeightRange r = s.box.range();
    const long n = count_with_multiplicity(zs, r);
    const long c = coincidence_count(zs, r);
    CHECK(c >= n);
    bool trivial = true;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      trivial = trivial && zs.zeros()[i].mult == 1 && (i == 0 || zs.zeros()[i].gamma != zs.zeros()[i - 1].gamma);
    }
    CHECK((c == n) == trivial);
  }
}

TEST_CASE("synthesize") {
  SynthSpec s;
  s.count = 400;
  s.box = BoxSpec(0.5, 1e4);
  s.mult_weights = {0.6, 0.3, 0.1};
  s.shared_ordinate_prob = 0.1;
  s.seed = 77;

  SUBCASE("deterministic") {
    const auto a = synthesize(s);
    const auto b = synthesize(s);
    CHECK(a.zeros() == b.zeros());
    CHECK(a.seed() == std::optional<std::uint64_t>(77));
    s.seed = 78;
    CHECK(synthesize(s).zeros() != a.zeros());
  }
  SUBCASE("respects its box") {
    for (auto law : {BetaLaw::critical, BetaLaw::uniform, BetaLaw::edge}) {
      for (auto sp : {SpacingLaw::poisson, SpacingLaw::gue, SpacingLaw::lattice}) {
        s.beta_law = law;
        s.spacing = sp;
        s.mirror_pairs = sp == SpacingLaw::lattice;
        const auto zs = synthesize(s);
        for (const auto& z : zs.zeros()) CHECK(in_box(z, s.box));
      }
    }
  }
  SUBCASE("b = 0 puts every zero on the line") {
    s.box = BoxSpec(0.0, 1e4);
    CHECK(synthesize(s).all_critical());
  }
  SUBCASE("multiplicity one gives count n") {
    s.mult_weights = {1.0, 0.0, 0.0};
    CHECK(count_with_multiplicity(synthesize(s), s.box.range()) == 400);
  }
  SUBCASE("crowded boxes are compressed, not overflowed") {
    s.count = 5000;
    s.box = BoxSpec(0.2, 100.0);
    const auto zs = synthesize(s);
    CHECK(count_with_multiplicity(zs, s.box.range()) == count_with_multiplicity(zs, {0.0, 1e9}));
  }
  SUBCASE("mirror pairs") {
    s.shared_ordinate_prob = 0.5;
    s.mirror_pairs = true;
    s.beta_law = BetaLaw::edge;
    const auto zs = synthesize(s);
    int mirrored = 0;
    for (std::size_t i = 1; i < zs.size(); ++i) {
      const auto& a = zs.zeros()[i - 1];
      const auto& b = zs.zeros()[i];
      if (a.gamma == b.gamma && std::abs(a.beta + b.beta - 1.0) < 1e-15) ++mirrored;
    }
    CHECK(mirrored > 50);
  }
}

TEST_CASE("synthetic spacing laws have the requested mean density") {
  const double T = 1e4;
  for (auto sp : {SpacingLaw::poisson, SpacingLaw::gue, SpacingLaw::lattice}) {
    SynthSpec s;
    s.count = 3000;
    s.box = BoxSpec(0.0, T);
    s.spacing = sp;
    s.seed = 5;
    const auto zs = synthesize(s);
    const double mean_gap = (zs.zeros().back().gamma - zs.zeros().front().gamma) / (zs.size() - 1.0);
    CHECK(mean_gap == doctest::Approx(kTwoPi / std::log(T)).epsilon(0.05));
  }
}

TEST_CASE("GUE spacing shows level repulsion") {
  SynthSpec s;
  s.count = 4000;
  s.box = BoxSpec(0.0, 1e5);
  s.seed = 9;
  auto small_gaps = [&](SpacingLaw law) {
    s.spacing = law;
    const auto zs = synthesize(s);
    const double unit = kTwoPi / std::log(s.box.T);
    int n = 0;
    for (std::size_t i = 1; i < zs.size(); ++i) n += (zs.zeros()[i].gamma - zs.zeros()[i - 1].gamma) < 0.1 * unit;
    return n / static_cast<double>(zs.size() - 1);
  };
  // P(s < 0.1) is about 0.095 for Poisson and about 3e-4 for GUE.
  CHECK(small_gaps(SpacingLaw::poisson) > 0.07);
  CHECK(small_gaps(SpacingLaw::gue) < 0.005);
}

TEST_CASE("scaled copies") {
  SynthSpec s;
  s.count = 100;
  s.box = BoxSpec(0.5, 1000.0);
  const auto zs = synthesize(s);
  const auto doubled = zs.with_multiplicity_scaled(2);
  CHECK(coincidence_count(doubled, s.box.range()) == 4 * coincidence_count(zs, s.box.range()));
  const auto narrow = zs.with_beta_scaled(0.1);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    CHECK(narrow.zeros()[i].gamma == zs.zeros()[i].gamma);
    CHECK(std::abs(narrow.zeros()[i].beta - 0.5) == doctest::Approx(0.1 * std::abs(zs.zeros()[i].beta - 0.5)));
  }
}

TEST_CASE("multiset CSV round trip") {
  SynthSpec s;
  s.count = 60;
  s.box = BoxSpec(0.7, 3000.0);
  s.mult_weights = {0.5, 0.3, 0.2};
  s.shared_ordinate_prob = 0.3;
  const auto zs = synthesize(s);
  std::stringstream ss;
  write_multiset_csv(ss, zs);
  const auto back = read_zero_file(ss);
  CHECK(back.zeros() == zs.zeros());
  CHECK(back.provenance() == Provenance::ingested);

  std::istringstream plain("# table\n14.134725\n21.022040\n");
  const auto p = read_zero_file(plain);
  REQUIRE(p.size() == 2);
  CHECK(p.all_critical());

  std::istringstream bad("beta,gamma,mult\n0.5,20.0\n");
  CHECK_THROWS_WITH_AS(read_zero_file(bad), "multiset CSV line 2: expected 3 fields", InvalidArgument);
}

TEST_CASE("json export") {
  const auto zs = make({{0.5, 20.0, 2}});
  const auto j = to_json(zs);
  CHECK(j["provenance"] == "synthetic");
  CHECK(j["zeros"][0]["mult"] == 2);
  CHECK(j["zeros"][0]["gamma"] == 20.0);
}
