#include "wcg/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wcg/estimators.hpp"
#include "wcg/orbit.hpp"
#include "wcg/spectrum.hpp"
#include "wcg/synth.hpp"
#include "wcg/version.hpp"

namespace wcg::cli {

namespace {

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::usage:
      return 2;
    case ErrorKind::io:
    case ErrorKind::format:
      return 3;
    default:
      return 1;
  }
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      fail(ErrorKind::usage, what + ": bad number '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorKind::usage, what + ": empty list");
  return out;
}

struct EstimateParams {
  double window_fraction = 0.4;
  std::vector<double> cone_angles{0.3, 0.2};
  int directions = 33;
  bool extrapolate = true;
};

struct Estimates {
  GrowthRateEstimate delta;
  GrowthRateEstimate delta_tilde;
  GrowthIndicatorEstimate indicator;
};

Estimates estimate_all(const RootSystemData& rs, const OrbitDataset& ds,
                       const EstimateParams& p) {
  Estimates out;
  out.delta = counting_exponent(rs, ds, riemannian_gauge(rs),
                                p.window_fraction);
  out.delta_tilde = modified_critical_exponent(rs, ds, p.window_fraction);
  out.indicator =
      growth_indicator(rs, ds, estimation_grid(rs, p.directions),
                       p.cone_angles, p.window_fraction, p.extrapolate);
  return out;
}

// ---------------------------------------------------------------------------
// subcommand configs

struct EnumerateCmd {
  std::string group;
  std::string gens_path;
  int maxlen = 0;
  std::string dedup = "auto";
  std::uint64_t record_cap = 2'000'000;
  std::string checkpoint;
  std::string out;
  int threads = 1;

  std::string canonical() const {
    return "enumerate --group " + group + " --gens " + gens_path +
           " --maxlen " + std::to_string(maxlen) + " --dedup " + dedup +
           " --record-cap " + std::to_string(record_cap);
  }
};

struct SynthCmd {
  std::string group;
  std::string model = "linear";
  double phi_scale = 1.0;
  std::vector<std::string> phi_forms;
  double cap_value = 1.0;
  std::string support_axis;
  double support_angle = 0.0;
  double rmax = 10.0;
  int resolution = 49;
  std::uint64_t seed = 0;
  double jitter = 0.0;
  std::uint64_t budget = 4'000'000;
  bool strict_counts = false;
  std::string out;

  std::string canonical() const {
    std::string s = "synth --group " + group + " --model " + model;
    if (model == "linear") s += " --phi-scale " + format_g(phi_scale);
    if (model == "cap") s += " --cap-value " + format_g(cap_value);
    for (const std::string& f : phi_forms) s += " --phi " + f;
    if (!support_axis.empty())
      s += " --support-axis " + support_axis + " --support-angle " +
           format_g(support_angle);
    s += " --rmax " + format_g(rmax) + " --resolution " +
         std::to_string(resolution) + " --seed " + std::to_string(seed) +
         " --jitter " + format_g(jitter) + " --budget " +
         std::to_string(budget);
    if (strict_counts) s += " --strict-counts";
    return s;
  }
};

struct EstimateCmd {
  std::string in;
  EstimateParams params;
  std::string cone_angles_text = "0.3,0.2";
  std::string out_csv;
  std::string counts_csv;
  std::string counts_csv_poly;
  std::string summary;

  std::string canonical() const {
    std::string s = "estimate --in " + in + " --window-fraction " +
                    format_g(params.window_fraction) + " --cone-angles " +
                    cone_angles_text + " --directions " +
                    std::to_string(params.directions);
    if (!params.extrapolate) s += " --no-extrapolate";
    return s;
  }
};

struct SpectrumCmd {
  std::string in;
  std::string model;
  std::string group;
  double phi_scale = 1.0;
  std::vector<std::string> phi_forms;
  double cap_value = 1.0;
  EstimateParams params;
  std::string cone_angles_text = "0.3,0.2";
  double manual_delta = std::numeric_limits<double>::quiet_NaN();
  double manual_delta_tilde = std::numeric_limits<double>::quiet_NaN();
  int lattice = -1;  // -1 unset, 0 false, 1 true
  int tempered = -1;
  std::string report_path;
  std::string csv_path;
};

PsiModel build_model(const RootSystemData& rs, const std::string& model,
                     double phi_scale,
                     const std::vector<std::string>& phi_forms,
                     double cap_value, const std::string& support_axis,
                     double support_angle) {
  std::optional<SupportCone> support;
  if (!support_axis.empty()) {
    std::vector<double> axis =
        parse_double_list(support_axis, "--support-axis");
    if (static_cast<int>(axis.size()) != rs.ambient_dim)
      fail(ErrorKind::usage, "--support-axis has wrong dimension");
    Vec v(rs.ambient_dim);
    for (int i = 0; i < rs.ambient_dim; ++i) v[i] = axis[i];
    ChamberVector a = chamber_vector(rs, v);
    support = SupportCone{ChamberVector{a.coords / a.coords.norm()},
                          support_angle};
  }
  if (model == "linear")
    return linear_model(
        rs, ChamberVector{phi_scale * rs.rho.coords}, support);
  if (model == "cap") return spherical_cap_model(rs, cap_value, support);
  if (model == "minlinear") {
    if (phi_forms.empty())
      fail(ErrorKind::usage, "minlinear model needs at least one --phi");
    std::vector<ChamberVector> forms;
    for (const std::string& text : phi_forms) {
      std::vector<double> xs = parse_double_list(text, "--phi");
      if (static_cast<int>(xs.size()) != rs.ambient_dim)
        fail(ErrorKind::usage, "--phi has wrong dimension for " +
                                   rs.group.to_string());
      Vec v(rs.ambient_dim);
      for (int i = 0; i < rs.ambient_dim; ++i) v[i] = xs[i];
      forms.push_back(chamber_vector(rs, v));
    }
    return min_linear_model(rs, std::move(forms), support);
  }
  fail(ErrorKind::usage, "unknown model '" + model + "'");
}

int run_enumerate(const EnumerateCmd& cmd) {
  GroupDescriptor desc = GroupDescriptor::parse(cmd.group);
  RootSystemData rs = build_root_system(desc);
  GeneratorSet gens = load_generators(desc, cmd.gens_path);
  EnumerateOptions opts;
  opts.max_length = cmd.maxlen;
  if (cmd.dedup == "exact")
    opts.dedup = DedupMode::exact;
  else if (cmd.dedup == "float")
    opts.dedup = DedupMode::floating;
  else if (cmd.dedup != "auto")
    fail(ErrorKind::usage, "--dedup must be exact, float, or auto");
  opts.record_cap = cmd.record_cap;
  opts.threads = cmd.threads;
  opts.checkpoint_path = cmd.checkpoint;
  OrbitDataset ds = enumerate_ball(rs, gens, opts);
  ds.header.meta.emplace_back("version", kVersion);
  ds.header.meta.emplace_back("run", cmd.canonical());
  write_dataset(ds, cmd.out);
  std::cout << "wrote " << ds.records.size() << " records to " << cmd.out
            << "\n";
  return 0;
}

int run_synth(const SynthCmd& cmd) {
  GroupDescriptor desc = GroupDescriptor::parse(cmd.group);
  RootSystemData rs = build_root_system(desc);
  PsiModel model =
      build_model(rs, cmd.model, cmd.phi_scale, cmd.phi_forms,
                  cmd.cap_value, cmd.support_axis, cmd.support_angle);
  SynthConfig cfg;
  cfg.resolution = cmd.resolution;
  cfg.r_max = cmd.rmax;
  cfg.seed = cmd.seed;
  cfg.jitter = cmd.jitter;
  cfg.budget = cmd.budget;
  cfg.strict_counts = cmd.strict_counts;
  SynthDetail detail;
  OrbitDataset ds = sample_orbit(rs, model, cfg, &detail);
  ds.header.meta.emplace_back("version", kVersion);
  ds.header.meta.emplace_back("run", cmd.canonical());
  write_dataset(ds, cmd.out);
  std::cout << "wrote " << ds.records.size() << " records (stride "
            << detail.stride << ") to " << cmd.out << "\n";
  return 0;
}

void write_summary(const std::string& path, const std::string& canonical,
                   const std::string& fingerprint, const Estimates& est) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << "# " << kVersion << "\n";
  out << "# config " << canonical << "\n";
  out << "# dataset " << fingerprint << "\n";
  out << "delta=" << format_g(est.delta.value) << "\n";
  out << "delta_stderr=" << format_g(est.delta.std_error) << "\n";
  out << "delta_window=" << format_g(est.delta.window_lo) << ".."
      << format_g(est.delta.window_hi) << "\n";
  out << "delta_samples=" << est.delta.sample_count << "\n";
  out << "delta_tilde=" << format_g(est.delta_tilde.value) << "\n";
  out << "delta_tilde_stderr=" << format_g(est.delta_tilde.std_error)
      << "\n";
  out << "delta_tilde_window=" << format_g(est.delta_tilde.window_lo)
      << ".." << format_g(est.delta_tilde.window_hi) << "\n";
  double sup = kNegInf;
  for (double v : est.indicator.values) sup = std::max(sup, v);
  out << "psi_sup=" << (sup == kNegInf ? "-inf" : format_g(sup)) << "\n";
  PsiDeltaCheck check =
      classical_exponent_from_psi_check(est.indicator, est.delta);
  out << "psi_delta_discrepancy=" << format_g(check.discrepancy) << "\n";
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

int run_estimate(const EstimateCmd& cmd) {
  OrbitDataset ds = read_dataset(cmd.in);
  RootSystemData rs = dataset_root_system(ds.header);
  Estimates est = estimate_all(rs, ds, cmd.params);
  if (!cmd.out_csv.empty())
    write_indicator_csv(est.indicator, ds.header.gens_fingerprint,
                        cmd.out_csv);
  if (!cmd.counts_csv.empty())
    write_counts_csv(rs, ds, riemannian_gauge(rs), "riemannian",
                     cmd.counts_csv);
  if (!cmd.counts_csv_poly.empty())
    write_counts_csv(rs, ds, polyhedral_gauge(rs), "polyhedral",
                     cmd.counts_csv_poly);
  if (!cmd.summary.empty())
    write_summary(cmd.summary, cmd.canonical(),
                  ds.header.gens_fingerprint, est);
  std::cout << "delta=" << format_g(est.delta.value)
            << " delta_tilde=" << format_g(est.delta_tilde.value) << "\n";
  return 0;
}

int run_spectrum(const SpectrumCmd& cmd) {
  if (cmd.in.empty() == cmd.model.empty())
    fail(ErrorKind::usage,
         "spectrum needs exactly one of --in <dataset> or --model");

  SpectralReport report;
  if (!cmd.in.empty()) {
    OrbitDataset ds = read_dataset(cmd.in);
    RootSystemData rs = dataset_root_system(ds.header);
    Estimates est = estimate_all(rs, ds, cmd.params);
    ConditionInputs inputs;
    inputs.delta = TaggedValue{est.delta.value, Provenance::estimated};
    inputs.delta_tilde =
        TaggedValue{est.delta_tilde.value, Provenance::estimated};
    inputs.psi = psi_samples_from_estimate(est.indicator);
    inputs.psi_prov = Provenance::estimated;
    if (!std::isnan(cmd.manual_delta))
      inputs.delta = TaggedValue{cmd.manual_delta, Provenance::manual};
    if (!std::isnan(cmd.manual_delta_tilde))
      inputs.delta_tilde =
          TaggedValue{cmd.manual_delta_tilde, Provenance::manual};
    if (cmd.lattice >= 0) inputs.lattice = cmd.lattice == 1;
    if (cmd.tempered >= 0) inputs.tempered = cmd.tempered == 1;
    report = check_conditions(rs, inputs);
    if (!cmd.report_path.empty()) write_report_text(report, cmd.report_path);
    if (!cmd.csv_path.empty()) write_report_csv(report, cmd.csv_path);
  } else {
    GroupDescriptor desc = GroupDescriptor::parse(cmd.group);
    RootSystemData rs = build_root_system(desc);
    PsiModel model = build_model(rs, cmd.model, cmd.phi_scale,
                                 cmd.phi_forms, cmd.cap_value, "", 0.0);
    PsiSamples samples = psi_samples_from_model(rs, model);
    ConditionInputs inputs;
    inputs.psi = samples;
    inputs.psi_prov = Provenance::analytic;
    double sup = kNegInf;
    for (double v : samples.values) sup = std::max(sup, v);
    if (sup > kNegInf)
      inputs.delta = TaggedValue{sup, Provenance::analytic};
    inputs.delta_tilde =
        TaggedValue{delta_tilde_from_psi(rs, model), Provenance::analytic};
    if (!std::isnan(cmd.manual_delta))
      inputs.delta = TaggedValue{cmd.manual_delta, Provenance::manual};
    if (!std::isnan(cmd.manual_delta_tilde))
      inputs.delta_tilde =
          TaggedValue{cmd.manual_delta_tilde, Provenance::manual};
    if (cmd.lattice >= 0) inputs.lattice = cmd.lattice == 1;
    if (cmd.tempered >= 0) inputs.tempered = cmd.tempered == 1;
    report = check_conditions(rs, inputs);
    if (!cmd.report_path.empty()) write_report_text(report, cmd.report_path);
    if (!cmd.csv_path.empty()) write_report_csv(report, cmd.csv_path);
  }
  std::cout << report_to_text(report);
  return 0;
}

// ---------------------------------------------------------------------------
// verification suites

struct VerifyContext {
  int failures = 0;
  void check(const std::string& name, bool ok, const std::string& detail) {
    if (ok)
      std::cout << "ok   " << name << "\n";
    else {
      std::cout << "FAIL " << name << " (" << detail << ")\n";
      ++failures;
    }
  }
};

void verify_analytic(VerifyContext& vc) {
  for (const char* name : {"sl2", "sl3", "sl2xsl2"}) {
    RootSystemData rs = build_root_system(GroupDescriptor::parse(name));
    GaugeAudit poly = verify_gauge_family(polyhedral_family(rs), rs, 500, 1);
    GaugeAudit riem = verify_gauge_family(riemannian_family(rs), rs, 500, 2);
    GaugeAudit mix = verify_gauge_family(
        mix_family(riemannian_family(rs), polyhedral_family(rs), 0.5), rs,
        500, 3);
    vc.check(std::string("gauge audit ") + name,
             poly.passed(1e-12) && riem.passed(1e-12) && mix.passed(1e-12),
             "gauge-family contract violated");
  }

  {
    RootSystemData rs = build_root_system(GroupDescriptor::parse("sl3"));
    std::uint64_t state = 11;
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      ChamberVector h = random_chamber_vector(rs, state);
      double s = 3.0 * rs.rho_norm * uniform01(state);
      worst = std::max(worst,
                       std::abs(d_s(rs, s, h) - d_s_cases(rs, s, h)));
      double t = 0.2 + 4.0 * uniform01(state);
      worst = std::max(
          worst, std::abs(d_s(rs, s, ChamberVector{t * h.coords}) -
                          t * d_s(rs, s, h)) /
                     t);
    }
    vc.check("d_s two-form agreement and homogeneity (1e4 samples)",
             worst <= 1e-12, "max violation " + format_g(worst));
  }

  {
    RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
    PsiModel sub = linear_model(rs, ChamberVector{0.8 * rs.rho.coords});
    PsiModel crit = linear_model(rs, ChamberVector{2.0 * rs.rho.coords});
    double v_sub = delta_tilde_from_psi(rs, sub);
    double v_crit = delta_tilde_from_psi(rs, crit);
    vc.check("delta-tilde relation on linear models",
             std::abs(v_sub - 0.8 * rs.rho_norm) <= 1e-9 &&
                 std::abs(v_crit - 2.0 * rs.rho_norm) <= 1e-9,
             format_g(v_sub) + ", " + format_g(v_crit));
  }

  {
    std::uint64_t state = 7;
    double worst = 0.0;
    for (const char* name : {"sl2", "sl3", "sl2xsl2", "sl4", "sl2xsl3"}) {
      RootSystemData rs = build_root_system(GroupDescriptor::parse(name));
      for (int k = 0; k < 20; ++k) {
        std::vector<ChamberVector> forms;
        int count = 1 + static_cast<int>(uniform01(state) * 3.0);
        for (int i = 0; i < count; ++i) {
          Vec phi = (0.2 + uniform01(state)) * rs.rho.coords;
          for (const ChamberVector& ray : chamber_extreme_rays(rs))
            phi += (0.1 + 1.1 * uniform01(state)) * ray.coords;
          forms.push_back(ChamberVector{phi});
        }
        PsiModel m = min_linear_model(rs, std::move(forms));
        double via_dt =
            lambda0_from_delta_tilde(rs, delta_tilde_from_psi(rs, m));
        double direct = lambda0_from_psi(rs, m);
        worst = std::max(worst, std::abs(via_dt - direct));
      }
    }
    vc.check("lambda0 cross-formula identity (100 random models)",
             worst <= 1e-9, "max disagreement " + format_g(worst));
  }

  {
    RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
    std::uint64_t state = 23;
    bool ok = true;
    std::string detail;
    GaugeFamily combo =
        mix_family(riemannian_family(rs), polyhedral_family(rs), 0.5);
    for (int k = 0; k < 20 && ok; ++k) {
      Vec phi = (0.2 + uniform01(state)) * rs.rho.coords;
      for (const ChamberVector& ray : chamber_extreme_rays(rs))
        phi += (0.1 + 0.8 * uniform01(state)) * ray.coords;
      PsiModel m = linear_model(rs, ChamberVector{phi});
      PsiSamples samples = psi_samples_from_model(rs, m, 1024);

      double sup = kNegInf;
      for (double v : samples.values) sup = std::max(sup, v);
      Lemma21Report riem =
          lemma21_bounds(rs, samples, riemannian_family(rs), sup);
      Lemma21Report poly = lemma21_bounds(
          rs, samples, polyhedral_family(rs), delta_tilde_from_psi(rs, m));
      Lemma21Report probe = lemma21_bounds(rs, samples, combo, 0.0);
      Lemma21Report mixed = lemma21_bounds(rs, samples, combo, probe.inf_s);
      if (!riem.ok(1e-6) || !poly.ok(1e-6) || !mixed.ok(1e-6)) {
        ok = false;
        detail = "margins " + format_g(riem.margin_first) + ", " +
                 format_g(poly.margin_first) + ", " +
                 format_g(mixed.margin_first);
      }
    }
    vc.check("lemma bounds for canonical and mixed gauges", ok, detail);
  }

  {
    RootSystemData rs2 = build_root_system(GroupDescriptor::parse("sl2"));
    std::uint64_t state = 77;
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      double t = 3.0 * (uniform01(state) - 0.3);
      Eigen::MatrixXd d(2, 2);
      d << std::exp(t), 0.0, 0.0, std::exp(-t);
      double a1 = 6.28 * uniform01(state);
      double a2 = 6.28 * uniform01(state);
      Eigen::MatrixXd k1(2, 2), k2(2, 2);
      k1 << std::cos(a1), -std::sin(a1), std::sin(a1), std::cos(a1);
      k2 << std::cos(a2), -std::sin(a2), std::sin(a2), std::cos(a2);
      GroupElement g;
      g.factors.push_back(k1 * d * k2);
      ChamberVector mu = cartan_projection(rs2, g);
      worst = std::max(worst, std::abs(mu.coords[0] - std::abs(t)));
      GroupElement gi = inverse(g);
      ChamberVector mui = cartan_projection(rs2, gi);
      worst = std::max(worst, std::abs(mui.coords[0] - std::abs(t)));
    }
    vc.check("cartan projection K-bi-invariance and inverse symmetry",
             worst <= 1e-9, "max deviation " + format_g(worst));
  }
}

void verify_data(VerifyContext& vc) {
  {
    RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2"));
    GroupElement g;
    Eigen::MatrixXd m(2, 2);
    m << std::exp(1.0), 0.0, 0.0, std::exp(-1.0);
    g.factors.push_back(m);
    GeneratorSet gens = make_generator_set(rs.group, {g});
    EnumerateOptions opts;
    opts.max_length = 24;
    opts.record_cap = 100'000'000;
    OrbitDataset ds = enumerate_ball(rs, gens, opts);
    GrowthRateEstimate delta =
        counting_exponent(rs, ds, riemannian_gauge(rs));
    GrowthRateEstimate dtilde = modified_critical_exponent(rs, ds);
    double lam = lambda0_from_delta_tilde(rs, dtilde.value);
    double rho2 = rs.rho_norm * rs.rho_norm;
    vc.check("cyclic pipeline: flat exponents and full gap",
             delta.value <= 0.05 && dtilde.value <= 0.05 &&
                 std::abs(lam - rho2) <= 1e-3,
             "delta " + format_g(delta.value) + " lambda0 " + format_g(lam));
  }

  {
    RootSystemData rs = build_root_system(GroupDescriptor::parse("sl2xsl2"));
    PsiModel m = linear_model(rs, ChamberVector{0.8 * rs.rho.coords});
    SynthConfig cfg;
    cfg.resolution = 49;
    cfg.r_max = 12.0;
    OrbitDataset ds = sample_orbit(rs, m, cfg);
    EstimateParams params;
    Estimates est = estimate_all(rs, ds, params);
    ConditionInputs inputs;
    inputs.delta = TaggedValue{est.delta.value, Provenance::estimated};
    inputs.delta_tilde =
        TaggedValue{est.delta_tilde.value, Provenance::estimated};
    inputs.psi = psi_samples_from_estimate(est.indicator);
    inputs.psi_prov = Provenance::estimated;
    SpectralReport rep = check_conditions(rs, inputs);
    bool ok = rep.consistent && rep.cond_A && *rep.cond_A && rep.cond_B &&
              *rep.cond_B && rep.cond_C && *rep.cond_C;
    vc.check("synthetic subcritical pipeline: (A),(B),(C)", ok,
             "delta_tilde " + format_g(est.delta_tilde.value));
  }

  {
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
    opts.max_length = 6;
    opts.record_cap = 10'000'000;
    OrbitDataset ds = enumerate_ball(rs, gens, opts);
    vc.check("free group ball count",
             ds.records.size() == 2 * 729 - 1,
             std::to_string(ds.records.size()) + " records");
  }
}

int run_verify(const std::string& suite) {
  VerifyContext vc;
  if (suite == "analytic" || suite == "all") verify_analytic(vc);
  if (suite == "data" || suite == "all") verify_data(vc);
  if (suite != "analytic" && suite != "data" && suite != "all")
    fail(ErrorKind::usage, "--suite must be analytic, data, or all");
  if (vc.failures) {
    std::cout << vc.failures << " verification failure(s)\n";
    return 1;
  }
  std::cout << "all checks passed\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"growth exponents and L2-spectrum bottom for discrete "
               "subgroups of higher-rank symmetric spaces"};
  app.set_config("--config");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  EnumerateCmd en;
  auto* enumerate_cmd = app.add_subcommand(
      "enumerate", "enumerate a word ball and write its orbit dataset");
  enumerate_cmd->add_option("--group", en.group, "group descriptor")
      ->required();
  enumerate_cmd->add_option("--gens", en.gens_path, "generator file")
      ->required();
  enumerate_cmd->add_option("--maxlen", en.maxlen, "maximum word length")
      ->required()
      ->check(CLI::NonNegativeNumber);
  enumerate_cmd->add_option("--dedup", en.dedup, "exact | float | auto");
  enumerate_cmd->add_option("--record-cap", en.record_cap,
                            "refuse runs predicted to exceed this");
  enumerate_cmd->add_option("--checkpoint", en.checkpoint,
                            "sphere-granular checkpoint file");
  enumerate_cmd->add_option("--threads", en.threads,
                            "frontier expansion threads (0 = auto)");
  enumerate_cmd->add_option("--out", en.out, "output dataset")->required();

  SynthCmd sy;
  auto* synth_cmd = app.add_subcommand(
      "synth", "sample a synthetic orbit from a psi model");
  synth_cmd->add_option("--group", sy.group, "group descriptor")->required();
  synth_cmd->add_option("--model", sy.model, "linear | minlinear | cap")
      ->required();
  synth_cmd->add_option("--phi-scale", sy.phi_scale,
                        "linear model: phi = scale * rho");
  synth_cmd->add_option("--phi", sy.phi_forms,
                        "minlinear form, comma-separated coordinates");
  synth_cmd->add_option("--cap-value", sy.cap_value, "cap model slope");
  synth_cmd->add_option("--support-axis", sy.support_axis,
                        "support cone axis coordinates");
  synth_cmd->add_option("--support-angle", sy.support_angle,
                        "support cone half-angle");
  synth_cmd->add_option("--rmax", sy.rmax, "radius cutoff")->required();
  synth_cmd->add_option("--resolution", sy.resolution, "direction grid size");
  synth_cmd->add_option("--seed", sy.seed, "jitter seed");
  synth_cmd->add_option("--jitter", sy.jitter,
                        "direction jitter in half grid cells");
  synth_cmd->add_option("--budget", sy.budget, "emitted record budget");
  synth_cmd->add_flag("--strict-counts", sy.strict_counts,
                      "refuse rather than subsample oversized runs");
  synth_cmd->add_option("--out", sy.out, "output dataset")->required();

  EstimateCmd es;
  auto* estimate_cmd = app.add_subcommand(
      "estimate", "estimate growth exponents from an orbit dataset");
  estimate_cmd->add_option("--in", es.in, "input dataset")->required();
  estimate_cmd->add_option("--window-fraction",
                           es.params.window_fraction,
                           "top fraction of the radius range");
  estimate_cmd->add_option("--cone-angles", es.cone_angles_text,
                           "decreasing cone angles, comma-separated");
  estimate_cmd->add_option("--directions", es.params.directions,
                           "direction grid resolution");
  bool no_extrapolate = false;
  estimate_cmd->add_flag("--no-extrapolate", no_extrapolate,
                         "report the smallest-angle slope instead");
  estimate_cmd->add_option("--out-csv", es.out_csv,
                           "growth indicator table");
  estimate_cmd->add_option("--counts-csv", es.counts_csv,
                           "radius vs log-count, Riemannian gauge");
  estimate_cmd->add_option("--counts-csv-poly", es.counts_csv_poly,
                           "radius vs log-count, polyhedral gauge");
  estimate_cmd->add_option("--summary", es.summary, "summary text file");

  SpectrumCmd sp;
  auto* spectrum_cmd = app.add_subcommand(
      "spectrum", "compose estimates or a model into a spectral report");
  spectrum_cmd->add_option("--in", sp.in, "input dataset");
  spectrum_cmd->add_option("--model", sp.model,
                           "analytic model: linear | minlinear | cap");
  spectrum_cmd->add_option("--group", sp.group,
                           "group descriptor (with --model)");
  spectrum_cmd->add_option("--phi-scale", sp.phi_scale,
                           "linear model: phi = scale * rho");
  spectrum_cmd->add_option("--phi", sp.phi_forms, "minlinear form");
  spectrum_cmd->add_option("--cap-value", sp.cap_value, "cap model slope");
  spectrum_cmd->add_option("--window-fraction", sp.params.window_fraction,
                           "estimator window fraction");
  spectrum_cmd->add_option("--cone-angles", sp.cone_angles_text,
                           "estimator cone angles");
  spectrum_cmd->add_option("--directions", sp.params.directions,
                           "estimator direction resolution");
  spectrum_cmd->add_option("--delta", sp.manual_delta,
                           "manual delta override");
  spectrum_cmd->add_option("--delta-tilde", sp.manual_delta_tilde,
                           "manual delta-tilde override");
  spectrum_cmd->add_flag("--lattice{1},--no-lattice{0}", sp.lattice,
                         "record finite covolume metadata");
  spectrum_cmd->add_flag("--tempered{1},--not-tempered{0}", sp.tempered,
                         "record temperedness metadata");
  spectrum_cmd->add_option("--report", sp.report_path, "text report path");
  spectrum_cmd->add_option("--csv", sp.csv_path, "CSV report path");

  std::string suite = "analytic";
  auto* verify_cmd = app.add_subcommand(
      "verify", "run the built-in property and oracle suite");
  verify_cmd->add_option("--suite", suite, "analytic | data | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*enumerate_cmd) return run_enumerate(en);
    if (*synth_cmd) return run_synth(sy);
    if (*estimate_cmd) {
      es.params.cone_angles =
          parse_double_list(es.cone_angles_text, "--cone-angles");
      es.params.extrapolate = !no_extrapolate;
      return run_estimate(es);
    }
    if (*spectrum_cmd) {
      sp.params.cone_angles =
          parse_double_list(sp.cone_angles_text, "--cone-angles");
      return run_spectrum(sp);
    }
    if (*verify_cmd) return run_verify(suite);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace wcg::cli
