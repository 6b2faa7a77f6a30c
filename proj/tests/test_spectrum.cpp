#include <doctest.h>

#include <cmath>

#include "wcg/spectrum.hpp"

using namespace wcg;

namespace {

ChamberVector scaled_rho(const RootSystemData& rs, double c) {
  return ChamberVector{c * rs.rho.coords};
}

// Independent brute-force sup oracle over a dense direction grid; does not
// share code with analyze_psi.
struct BruteSups {
  double ratio = kNegInf;
  double gap = kNegInf;
};

BruteSups brute_force_sups(const RootSystemData& rs, const PsiModel& m,
                           int points) {
  BruteSups out;
  for (const ChamberVector& u : estimation_grid(rs, points)) {
    double v = evaluate_psi(rs, m, u);
    if (v == kNegInf) continue;
    double rho_pair = rs.rho.coords.dot(u.coords);
    out.ratio = std::max(out.ratio, v * rs.rho_norm / rho_pair);
    out.gap = std::max(out.gap, v - rho_pair);
  }
  return out;
}

// Random dominant linear form: positive combination of the extreme-ray
// duals plus a rho component.
ChamberVector random_dominant_form(const RootSystemData& rs,
                                   std::uint64_t& state) {
  Vec phi = (0.2 + 1.0 * uniform01(state)) * rs.rho.coords;
  for (const ChamberVector& ray : chamber_extreme_rays(rs))
    phi += (0.1 + 1.1 * uniform01(state)) * ray.coords;
  return ChamberVector{phi};
}

PsiModel random_min_linear(const RootSystemData& rs, std::uint64_t& state) {
  int count = 1 + static_cast<int>(uniform01(state) * 3.0);
  std::vector<ChamberVector> forms;
  for (int i = 0; i < count; ++i)
    forms.push_back(random_dominant_form(rs, state));
  return min_linear_model(rs, std::move(forms));
}

}  // namespace

TEST_CASE("delta_tilde_from_psi branch values") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));

  SUBCASE("subcritical linear model") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 0.8));
    CHECK(delta_tilde_from_psi(rs, m) ==
          doctest::Approx(0.8 * rs.rho_norm).epsilon(1e-12));
  }

  SUBCASE("critical linear model") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 2.0));
    CHECK(delta_tilde_from_psi(rs, m) ==
          doctest::Approx(2.0 * rs.rho_norm).epsilon(1e-12));
  }

  SUBCASE("min-linear matches the brute-force grid oracle") {
    std::uint64_t state = 31337;
    for (int k = 0; k < 20; ++k) {
      PsiModel m = min_linear_model(
          rs, {scaled_rho(rs, 1.5), random_dominant_form(rs, state)});
      PsiAnalysis a = analyze_psi(rs, m);
      BruteSups oracle = brute_force_sups(rs, m, 10000);
      double expected = a.psi_le_rho ? std::max(oracle.ratio, 0.0)
                                     : oracle.gap + rs.rho_norm;
      CHECK(a.delta_tilde == doctest::Approx(expected).epsilon(1e-4));
    }
  }

  SUBCASE("degenerate model reports zero with a warning") {
    // support cone so narrow that no grid direction survives; the axis
    // sits between grid points
    auto grid = estimation_grid(rs, 64);
    Vec mid = grid[0].coords + grid[1].coords;
    SupportCone cone{ChamberVector{mid / mid.norm()}, 1e-9};
    PsiModel m = linear_model(rs, scaled_rho(rs, 1.0), cone);
    PsiAnalysis a = analyze_psi(rs, m, 64);
    CHECK(a.degenerate);
    CHECK(a.delta_tilde == 0.0);
  }
}

TEST_CASE("lambda0 from delta tilde") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl3"));
  double rho2 = rs.rho_norm * rs.rho_norm;
  CHECK(lambda0_from_delta_tilde(rs, rs.rho_norm) == rho2);
  CHECK(lambda0_from_delta_tilde(rs, 2.0 * rs.rho_norm) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(lambda0_from_delta_tilde(rs, 0.0) == rho2);
  // clamping outside [0, 2|rho|]
  CHECK(lambda0_from_delta_tilde(rs, -1.0) == rho2);
  CHECK(lambda0_from_delta_tilde(rs, 10.0 * rs.rho_norm) ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("lambda0 from psi") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
  double rho2 = rs.rho_norm * rs.rho_norm;

  SUBCASE("psi below rho keeps the full spectral gap") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 0.7));
    CHECK(lambda0_from_psi(rs, m) == doctest::Approx(rho2).epsilon(1e-12));
  }

  SUBCASE("psi = 2 rho closes the gap") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 2.0));
    CHECK(lambda0_from_psi(rs, m) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("constructed sup-term 0.3") {
    ChamberVector phi{rs.rho.coords +
                      0.3 * rs.rho.coords / rs.rho_norm};
    PsiModel m = min_linear_model(rs, {phi, scaled_rho(rs, 5.0)});
    CHECK(lambda0_from_psi(rs, m) ==
          doctest::Approx(rho2 - 0.09).epsilon(1e-4));
  }
}

TEST_CASE("lambda0 cross-formula identity on random models") {
  std::uint64_t state = 2718;
  for (const char* name : {"sl2", "sl3", "sl2xsl2", "sl4", "sl2xsl3"}) {
    RootSystemData rs = build_root_system(GroupDescriptor::parse(name));
    double rho2 = rs.rho_norm * rs.rho_norm;
    for (int k = 0; k < 25; ++k) {
      PsiModel m = random_min_linear(rs, state);
      double via_dt =
          lambda0_from_delta_tilde(rs, delta_tilde_from_psi(rs, m));
      double direct = lambda0_from_psi(rs, m);
      CHECK(std::abs(via_dt - direct) <= 1e-9);
      CHECK(direct >= -1e-12);
      CHECK(direct <= rho2 + 1e-12);
    }
  }
}

TEST_CASE("branch coherence and monotonicity") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl3"));
  std::uint64_t state = 99;
  for (int k = 0; k < 40; ++k) {
    PsiModel m = random_min_linear(rs, state);
    PsiAnalysis a = analyze_psi(rs, m);
    // delta_tilde <= |rho| exactly when the psi <= rho grid check passed
    if (a.psi_le_rho)
      CHECK(a.delta_tilde <= rs.rho_norm + 1e-9);
    else
      CHECK(a.delta_tilde > rs.rho_norm - 1e-9);

    // enlarging psi pointwise never decreases delta_tilde
    std::vector<ChamberVector> enlarged;
    ChamberVector theta{0.15 * rs.rho.coords};
    for (const ChamberVector& f : m.forms)
      enlarged.push_back(ChamberVector{f.coords + theta.coords});
    PsiModel bigger = min_linear_model(rs, std::move(enlarged));
    CHECK(delta_tilde_from_psi(rs, bigger) >= a.delta_tilde - 1e-12);
  }
}

TEST_CASE("rank-one collapse is exact") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
  for (double d : {0.2, 0.5, 0.9, 1.3}) {
    PsiModel m = spherical_cap_model(rs, d);
    CHECK(delta_tilde_from_psi(rs, m) == doctest::Approx(d).epsilon(1e-14));
  }
}

TEST_CASE("lemma 2.1 bounds") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
  std::uint64_t state = 5150;

  SUBCASE("riemannian gauge recovers sup psi") {
    for (int k = 0; k < 20; ++k) {
      ChamberVector phi = random_dominant_form(rs, state);
      PsiModel m = linear_model(rs, phi);
      // delta for d_s = s|H| is the direction sup of psi
      double delta = kNegInf;
      for (const ChamberVector& u : estimation_grid(rs, 4096))
        delta = std::max(delta, evaluate_psi(rs, m, u));
      Lemma21Report rep =
          lemma21_bounds(rs, m, riemannian_family(rs), delta, 4096);
      CHECK(std::abs(rep.inf_s - delta) <= 1e-4);
      CHECK(rep.ok(1e-4));
    }
  }

  SUBCASE("polyhedral gauge with the analytic delta tilde") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 0.8));
    double dt = delta_tilde_from_psi(rs, m);
    Lemma21Report rep = lemma21_bounds(rs, m, polyhedral_family(rs), dt);
    CHECK(rep.margin_first >= -1e-6);
    CHECK(rep.margin_second >= -1e-6);
  }

  SUBCASE("convex combination on randomized models") {
    GaugeFamily combo =
        mix_family(riemannian_family(rs), polyhedral_family(rs), 0.5);
    for (int k = 0; k < 20; ++k) {
      PsiModel m = random_min_linear(rs, state);
      PsiSamples samples = psi_samples_from_model(rs, m, 1024);
      // take delta at the first-bound infimum itself
      Lemma21Report probe = lemma21_bounds(rs, samples, combo, 0.0);
      Lemma21Report rep = lemma21_bounds(rs, samples, combo, probe.inf_s);
      CHECK(rep.margin_first >= -1e-6);
      CHECK(rep.margin_second >= -1e-6);
    }
  }

  SUBCASE("bracket failure") {
    PsiModel huge = linear_model(rs, scaled_rho(rs, 9.0));
    CHECK_THROWS_WITH_AS(
        lemma21_bounds(rs, huge, polyhedral_family(rs), 1.0),
        doctest::Contains("bracket"), Error);
  }
}

TEST_CASE("check_conditions on analytic pipelines") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));

  SUBCASE("subcritical: (A),(B),(C) hold") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 0.8));
    ConditionInputs in;
    in.psi = psi_samples_from_model(rs, m);
    SpectralReport rep = check_conditions(rs, in);
    CHECK(rep.consistent);
    CHECK(rep.tol_regime == "analytic");
    REQUIRE(rep.cond_A);
    REQUIRE(rep.cond_B);
    REQUIRE(rep.cond_C);
    CHECK(*rep.cond_A);
    CHECK(*rep.cond_B);
    CHECK(*rep.cond_C);
    CHECK_FALSE(*rep.fig_ii);
    CHECK_FALSE(*rep.fig_iv);
  }

  SUBCASE("critical: (i),(ii),(iv),(v),(vi) hold and (A),(B),(C) fail") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 2.0));
    PsiAnalysis a = analyze_psi(rs, m);
    ConditionInputs in;
    in.psi = psi_samples_from_model(rs, m);
    // delta = sup psi / |H| = 2|rho| for the lattice-like model
    in.delta = TaggedValue{a.sup_ratio, Provenance::analytic};
    in.delta_tilde = TaggedValue{a.delta_tilde, Provenance::analytic};
    SpectralReport rep = check_conditions(rs, in);
    CHECK(rep.consistent);
    REQUIRE(rep.fig_i);
    REQUIRE(rep.fig_ii);
    REQUIRE(rep.fig_iv);
    REQUIRE(rep.fig_v);
    REQUIRE(rep.fig_vi);
    CHECK(*rep.fig_i);
    CHECK(*rep.fig_ii);
    CHECK(*rep.fig_iv);
    CHECK(*rep.fig_v);
    CHECK(*rep.fig_vi);
    CHECK_FALSE(*rep.cond_A);
    CHECK_FALSE(*rep.cond_B);
    CHECK_FALSE(*rep.cond_C);
  }

  SUBCASE("inconsistent manual input withholds flags") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 2.0));
    ConditionInputs in;
    in.psi = psi_samples_from_model(rs, m);
    in.delta_tilde = TaggedValue{0.3 * rs.rho_norm, Provenance::manual};
    SpectralReport rep = check_conditions(rs, in);
    CHECK_FALSE(rep.consistent);
    CHECK_FALSE(rep.cond_A.has_value());
    CHECK_FALSE(rep.fig_ii.has_value());
    CHECK(rep.message.find("inconsistent") != std::string::npos);
  }

  SUBCASE("metadata flags are recorded, never computed") {
    PsiModel m = linear_model(rs, scaled_rho(rs, 0.5));
    ConditionInputs in;
    in.psi = psi_samples_from_model(rs, m);
    in.lattice = false;
    in.tempered = true;
    SpectralReport rep = check_conditions(rs, in);
    REQUIRE(rep.lattice);
    CHECK_FALSE(*rep.lattice);
    REQUIRE(rep.tempered);
    CHECK(*rep.tempered);
  }
}

TEST_CASE("report serialization") {
  RootSystemData rs = build_root_system(GroupDescriptor::parse("sl3"));
  PsiModel m = linear_model(rs, scaled_rho(rs, 0.8));
  ConditionInputs in;
  in.psi = psi_samples_from_model(rs, m);
  SpectralReport rep = check_conditions(rs, in);
  std::string text = report_to_text(rep);
  CHECK(text.find("cond_A=true") != std::string::npos);
  CHECK(text.find("tol_regime=analytic") != std::string::npos);
  CHECK(text.find("delta=unset") != std::string::npos);

  write_report_text(rep, "/tmp/wcg_report.txt");
  write_report_csv(rep, "/tmp/wcg_report.csv");
  std::remove("/tmp/wcg_report.txt");
  std::remove("/tmp/wcg_report.csv");
}
