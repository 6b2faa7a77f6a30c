#include <doctest.h>

#include <cmath>

#include "wcg/estimators.hpp"

using namespace wcg;

namespace {

ChamberVector scaled_rho(const RootSystemData& rs, double c) {
  return ChamberVector{c * rs.rho.coords};
}

OrbitDataset cyclic_dataset(int L) {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  GroupElement g;
  Eigen::MatrixXd m(2, 2);
  m << std::exp(1.0), 0.0, 0.0, std::exp(-1.0);
  g.factors.push_back(m);
  GeneratorSet gens = make_generator_set(rs.group, {g});
  EnumerateOptions opts;
  opts.max_length = L;
  opts.record_cap = 100'000'000;
  return enumerate_ball(rs, gens, opts);
}

OrbitDataset synth_linear(const RootSystemData& rs, double c, double r_max,
                          std::uint64_t budget, SynthDetail* detail = nullptr,
                          int resolution = 49) {
  PsiModel m = linear_model(rs, scaled_rho(rs, c));
  SynthConfig cfg;
  cfg.resolution = resolution;
  cfg.r_max = r_max;
  cfg.budget = budget;
  return sample_orbit(rs, m, cfg, detail);
}

}  // namespace

TEST_CASE("counting exponent: polynomial growth reads as zero") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  OrbitDataset ds = cyclic_dataset(24);
  GrowthRateEstimate est = counting_exponent(rs, ds, riemannian_gauge(rs));
  CHECK(est.value >= -0.01);
  CHECK(est.value <= 0.05);
  CHECK(est.sample_count >= 10);
  CHECK(est.window_lo < est.window_hi);
}

TEST_CASE("counting exponent recovers linear-model growth") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
  double two_rho = 2.0 * rs.rho_norm;

  SUBCASE("subcritical 0.8 rho") {
    OrbitDataset ds = synth_linear(rs, 0.8, 12.0, 4'000'000);
    GrowthRateEstimate est = counting_exponent(rs, ds, riemannian_gauge(rs));
    CHECK(est.value == doctest::Approx(0.8 * rs.rho_norm).epsilon(0.06));
  }

  SUBCASE("critical 2 rho") {
    OrbitDataset ds = synth_linear(rs, 2.0, 12.0, 1'200'000);
    GrowthRateEstimate est = counting_exponent(rs, ds, riemannian_gauge(rs));
    CHECK(std::abs(est.value - two_rho) <= 0.05);
  }
}

TEST_CASE("counting exponent sanity envelope on the free group") {
  GroupDescriptor desc = GroupDescriptor::parse("sl2");
  RootSystemData rs = build_root_system(desc);
  GroupElement a, b;
  IntMatrix ma(2, 2), mb(2, 2);
  ma << 1, 2, 0, 1;
  mb << 1, 0, 2, 1;
  a.exact = std::vector<IntMatrix>{ma};
  a.factors.push_back(ma.cast<double>());
  b.exact = std::vector<IntMatrix>{mb};
  b.factors.push_back(mb.cast<double>());
  GeneratorSet gens = make_generator_set(desc, {a, b});
  EnumerateOptions opts;
  opts.max_length = 10;
  opts.record_cap = 100'000'000;
  OrbitDataset ds = enumerate_ball(rs, gens, opts);
  GrowthRateEstimate est = counting_exponent(rs, ds, riemannian_gauge(rs));
  CHECK(est.value > 0.1);
  CHECK(est.value < 2.0 * rs.rho_norm + 0.1);
}

TEST_CASE("modified critical exponent on synthetic linear models") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));

  SUBCASE("subcritical branch") {
    OrbitDataset ds = synth_linear(rs, 0.8, 12.0, 4'000'000);
    GrowthRateEstimate est = modified_critical_exponent(rs, ds);
    CHECK(std::abs(est.value - 0.8 * rs.rho_norm) <= 0.05);
  }

  SUBCASE("supercritical branch") {
    OrbitDataset ds = synth_linear(rs, 2.0, 12.0, 1'200'000);
    GrowthRateEstimate est = modified_critical_exponent(rs, ds);
    CHECK(std::abs(est.value - 2.0 * rs.rho_norm) <= 0.05);
  }
}

TEST_CASE("rank one: delta and delta-tilde coincide") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  PsiModel m = spherical_cap_model(rs, 1.0);
  SynthConfig cfg;
  cfg.resolution = 2;
  cfg.r_max = 12.0;
  OrbitDataset ds = sample_orbit(rs, m, cfg);
  GrowthRateEstimate delta = counting_exponent(rs, ds, riemannian_gauge(rs));
  GrowthRateEstimate dtilde = modified_critical_exponent(rs, ds);
  CHECK(std::abs(delta.value - 1.0) <= 0.03);
  CHECK(std::abs(delta.value - dtilde.value) <= 0.02);
}

TEST_CASE("modified exponent on polynomial data is tiny") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  OrbitDataset ds = cyclic_dataset(24);
  GrowthRateEstimate est = modified_critical_exponent(rs, ds);
  CHECK(est.value >= 0.0);
  CHECK(est.value <= 0.05);
}

TEST_CASE("estimator error paths") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));

  SUBCASE("empty dataset") {
    OrbitDataset empty;
    CHECK_THROWS_AS(counting_exponent(rs, empty, riemannian_gauge(rs)),
                    Error);
  }

  SUBCASE("too few records") {
    OrbitDataset ds = cyclic_dataset(2);  // 5 records
    CHECK_THROWS_WITH_AS(counting_exponent(rs, ds, riemannian_gauge(rs)),
                         doctest::Contains("10 records"), Error);
  }

  SUBCASE("zero radius range") {
    OrbitDataset ds = cyclic_dataset(0);  // identity only
    CHECK_THROWS_AS(counting_exponent(rs, ds, riemannian_gauge(rs)), Error);
  }

  SUBCASE("bad window fraction") {
    OrbitDataset ds = cyclic_dataset(12);
    CHECK_THROWS_AS(counting_exponent(rs, ds, riemannian_gauge(rs), 0.0),
                    Error);
  }
}

TEST_CASE("growth indicator on synthetic directional data") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
  SynthDetail detail;
  OrbitDataset ds = synth_linear(rs, 1.2, 12.0, 2'000'000, &detail);
  std::vector<ChamberVector> dirs = estimation_grid(rs, 15);
  std::vector<double> angles{0.3, 0.2};
  GrowthIndicatorEstimate est = growth_indicator(rs, ds, dirs, angles);
  REQUIRE(est.values.size() == dirs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    double expected = 1.2 * rs.rho.coords.dot(dirs[d].coords);
    CHECK(est.values[d] == doctest::Approx(expected).epsilon(0.08));
    // soft upper bound psi <= 2 rho
    CHECK(est.values[d] <=
          2.0 * rs.rho.coords.dot(dirs[d].coords) + 0.1);
  }

  SUBCASE("shrinking cones refine monotonically up to noise") {
    for (const auto& rows : est.table)
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].valid && rows[i - 1].valid)
          CHECK(rows[i - 1].slope >= rows[i].slope - 0.02);
  }

  SUBCASE("classical exponent cross-check") {
    GrowthRateEstimate delta =
        counting_exponent(rs, ds, riemannian_gauge(rs));
    PsiDeltaCheck check = classical_exponent_from_psi_check(est, delta);
    CHECK(check.discrepancy <= 0.1);
  }
}

TEST_CASE("growth indicator outside the support cone is -inf") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
  SupportCone cone{rho_hat(rs), 0.25};
  PsiModel m = linear_model(rs, scaled_rho(rs, 1.0), cone);
  SynthConfig cfg;
  cfg.resolution = 49;
  cfg.r_max = 10.0;
  OrbitDataset ds = sample_orbit(rs, m, cfg);
  auto rays = chamber_extreme_rays(rs);
  std::vector<ChamberVector> dirs{rays[0], rho_hat(rs)};
  GrowthIndicatorEstimate est =
      growth_indicator(rs, ds, dirs, {0.15, 0.1});
  CHECK(est.values[0] == kNegInf);
  CHECK(est.values[1] ==
        doctest::Approx(rs.rho_norm).epsilon(0.08));
}

TEST_CASE("growth indicator on the cyclic axis is flat") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  OrbitDataset ds = cyclic_dataset(24);
  std::vector<ChamberVector> dirs{rho_hat(rs)};
  GrowthIndicatorEstimate est =
      growth_indicator(rs, ds, dirs, {0.3, 0.2});
  CHECK(est.values[0] <= 0.05);
  CHECK(est.values[0] > kNegInf);

  GrowthRateEstimate delta = counting_exponent(rs, ds, riemannian_gauge(rs));
  PsiDeltaCheck check = classical_exponent_from_psi_check(est, delta);
  CHECK(check.delta <= 0.05);
  CHECK(check.psi_sup <= 0.05);
  CHECK(check.discrepancy <= 0.05);
}

TEST_CASE("gauge monotonicity: polyhedral exponent dominates riemannian") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
  // skew dominant form, not aligned with rho
  auto rays = chamber_extreme_rays(rs);
  ChamberVector phi{0.9 * rs.rho.coords + 0.5 * rays[0].coords};
  PsiModel m = linear_model(rs, phi);
  REQUIRE(m.admissible);
  SynthConfig cfg;
  cfg.resolution = 49;
  cfg.r_max = 11.0;
  cfg.budget = 2'000'000;
  OrbitDataset ds = sample_orbit(rs, m, cfg);
  GrowthRateEstimate riem = counting_exponent(rs, ds, riemannian_gauge(rs));
  GrowthRateEstimate poly = counting_exponent(rs, ds, polyhedral_gauge(rs));
  CHECK(poly.value >= riem.value - 0.05);

  GrowthRateEstimate dtilde = modified_critical_exponent(rs, ds);
  CHECK(riem.value <= dtilde.value + 0.05);
  CHECK(dtilde.value <= 2.0 * rs.rho_norm + 0.05);
}

TEST_CASE("growth indicator argument validation") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  OrbitDataset ds = cyclic_dataset(12);
  std::vector<ChamberVector> dirs{rho_hat(rs)};
  CHECK_THROWS_AS(growth_indicator(rs, ds, dirs, {0.1, 0.3}), Error);
  CHECK_THROWS_AS(growth_indicator(rs, ds, dirs, {}), Error);
  CHECK_THROWS_AS(growth_indicator(rs, ds, {}, {0.3, 0.2}), Error);
  CHECK_THROWS_AS(
      growth_indicator(rs, OrbitDataset{}, dirs, {0.3, 0.2}), Error);
}
