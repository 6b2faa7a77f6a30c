#include "wcg/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

namespace wcg {

namespace {

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double tol) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return f(0.5 * (a + b));
}

ChamberVector slerp_dir(const ChamberVector& a, const ChamberVector& b,
                        double t) {
  double cosphi = std::clamp(a.coords.dot(b.coords), -1.0, 1.0);
  double phi = std::acos(cosphi);
  if (phi < 1e-12) return a;
  Vec v = (std::sin((1.0 - t) * phi) * a.coords +
           std::sin(t * phi) * b.coords) /
          std::sin(phi);
  return ChamberVector{v / v.norm()};
}

struct SupResult {
  double sup_ratio = kNegInf;
  double sup_gap = kNegInf;
};

// Objectives of the two branches at a unit direction.
void accumulate(const RootSystemData& rs, const ChamberVector& u, double psi,
                SupResult& out) {
  if (psi == kNegInf) return;
  double rho_pair = rs.rho.coords.dot(u.coords);
  if (rho_pair <= 1e-9)
    fail(ErrorKind::domain,
         "grid direction nearly orthogonal to rho; rho should be strictly "
         "dominant");
  out.sup_ratio = std::max(out.sup_ratio, psi * rs.rho_norm / rho_pair);
  out.sup_gap = std::max(out.sup_gap, psi - rho_pair);
}

PsiAnalysis analysis_from_sups(const RootSystemData& rs, const SupResult& sup,
                               bool psi_le_rho, bool degenerate) {
  PsiAnalysis out;
  out.degenerate = degenerate;
  out.psi_le_rho = psi_le_rho;
  out.sup_ratio = sup.sup_ratio;
  out.sup_gap = sup.sup_gap;
  if (degenerate) {
    out.delta_tilde = 0.0;
    out.psi_le_rho = true;
    return out;
  }
  // sup over an effectively empty positive part reads as 0
  out.delta_tilde = psi_le_rho ? std::max(sup.sup_ratio, 0.0)
                               : sup.sup_gap + rs.rho_norm;
  return out;
}

// Local refinement of both sups around the best grid cell (models only).
void refine_model_sups(const RootSystemData& rs, const PsiModel& m,
                       const std::vector<ChamberVector>& grid,
                       SupResult& sup) {
  if (rs.rank == 1 || grid.size() < 2) return;

  auto value_at = [&](const ChamberVector& u, bool ratio) {
    double psi = evaluate_psi(rs, m, u);
    if (psi == kNegInf) return kNegInf;
    double rho_pair = rs.rho.coords.dot(u.coords);
    return ratio ? psi * rs.rho_norm / rho_pair : psi - rho_pair;
  };

  if (rs.rank == 2) {
    // The grid is a uniform sweep of the chamber arc; refine in the arc
    // parameter around the best cell, one golden search per objective.
    std::vector<ChamberVector> rays = chamber_extreme_rays(rs);
    int n = static_cast<int>(grid.size());
    for (bool ratio : {true, false}) {
      int best = 0;
      double best_v = kNegInf;
      for (int i = 0; i < n; ++i) {
        double v = value_at(grid[i], ratio);
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      if (best_v == kNegInf) continue;
      double cell = 1.0 / double(n - 1);
      double lo = std::max(0.0, (best - 1.5) * cell);
      double hi = std::min(1.0, (best + 1.5) * cell);
      double refined = golden_max(
          [&](double t) {
            return value_at(slerp_dir(rays[0], rays[1], t), ratio);
          },
          lo, hi, 1e-6);
      if (ratio)
        sup.sup_ratio = std::max(sup.sup_ratio, refined);
      else
        sup.sup_gap = std::max(sup.sup_gap, refined);
    }
    return;
  }

  // rank >= 3: pattern search over barycentric weights on the extreme rays.
  std::vector<ChamberVector> rays = chamber_extreme_rays(rs);
  int r = rs.rank;
  for (bool ratio : {true, false}) {
    const ChamberVector* best_u = nullptr;
    double best_v = kNegInf;
    for (const ChamberVector& u : grid) {
      double v = value_at(u, ratio);
      if (v > best_v) {
        best_v = v;
        best_u = &u;
      }
    }
    if (!best_u) continue;
    // initial weights: projections onto the (independent) rays via
    // least squares
    Eigen::MatrixXd A(rs.ambient_dim, r);
    for (int k = 0; k < r; ++k) A.col(k) = rays[k].coords;
    Vec w = A.colPivHouseholderQr().solve(best_u->coords);
    for (int k = 0; k < r; ++k) w[k] = std::max(w[k], 0.0);
    auto eval_w = [&](const Vec& weights) {
      Vec v = A * weights;
      double n2 = v.norm();
      if (n2 < 1e-12) return kNegInf;
      return value_at(ChamberVector{v / n2}, ratio);
    };
    double h = 0.25;
    double current = eval_w(w);
    while (h > 1e-7) {
      bool improved = false;
      for (int k = 0; k < r; ++k) {
        for (double sgn : {1.0, -1.0}) {
          Vec cand = w;
          cand[k] = std::max(0.0, cand[k] + sgn * h);
          double v = eval_w(cand);
          if (v > current) {
            current = v;
            w = cand;
            improved = true;
          }
        }
      }
      if (!improved) h *= 0.5;
    }
    best_v = std::max(best_v, current);
    if (ratio)
      sup.sup_ratio = std::max(sup.sup_ratio, best_v);
    else
      sup.sup_gap = std::max(sup.sup_gap, best_v);
  }
}

}  // namespace

PsiSamples psi_samples_from_model(const RootSystemData& rs, const PsiModel& m,
                                  int resolution) {
  PsiSamples out;
  out.directions = estimation_grid(rs, resolution);
  out.values.reserve(out.directions.size());
  for (const ChamberVector& u : out.directions)
    out.values.push_back(evaluate_psi(rs, m, u));
  return out;
}

PsiSamples psi_samples_from_estimate(const GrowthIndicatorEstimate& est) {
  return PsiSamples{est.directions, est.values};
}

PsiAnalysis analyze_psi(const RootSystemData& rs, const PsiSamples& samples) {
  if (samples.directions.size() != samples.values.size() ||
      samples.directions.empty())
    fail(ErrorKind::usage, "psi samples are empty or inconsistent");
  SupResult sup;
  bool any_finite = false;
  bool le_rho = true;
  for (std::size_t i = 0; i < samples.directions.size(); ++i) {
    double v = samples.values[i];
    if (v == kNegInf) continue;
    any_finite = true;
    accumulate(rs, samples.directions[i], v, sup);
    if (v > rs.rho.coords.dot(samples.directions[i].coords) + 1e-12)
      le_rho = false;
  }
  return analysis_from_sups(rs, sup, le_rho, !any_finite);
}

PsiAnalysis analyze_psi(const RootSystemData& rs, const PsiModel& m,
                        int resolution) {
  PsiSamples samples = psi_samples_from_model(rs, m, resolution);
  SupResult sup;
  bool any_finite = false;
  bool le_rho = true;
  for (std::size_t i = 0; i < samples.directions.size(); ++i) {
    double v = samples.values[i];
    if (v == kNegInf) continue;
    any_finite = true;
    accumulate(rs, samples.directions[i], v, sup);
    if (v > rs.rho.coords.dot(samples.directions[i].coords) + 1e-12)
      le_rho = false;
  }
  if (any_finite) refine_model_sups(rs, m, samples.directions, sup);
  return analysis_from_sups(rs, sup, le_rho, !any_finite);
}

double delta_tilde_from_psi(const RootSystemData& rs, const PsiModel& m,
                            int resolution) {
  return analyze_psi(rs, m, resolution).delta_tilde;
}

double delta_tilde_from_psi(const RootSystemData& rs,
                            const PsiSamples& samples) {
  return analyze_psi(rs, samples).delta_tilde;
}

double lambda0_from_delta_tilde(const RootSystemData& rs,
                                double delta_tilde) {
  double dt = std::clamp(delta_tilde, 0.0, 2.0 * rs.rho_norm);
  double rho2 = rs.rho_norm * rs.rho_norm;
  if (dt <= rs.rho_norm) return rho2;
  return rho2 - (dt - rs.rho_norm) * (dt - rs.rho_norm);
}

namespace {

double lambda0_from_gap(const RootSystemData& rs, double sup_gap) {
  // gap beyond |rho| means psi above 2 rho somewhere; the spectrum
  // formulas clamp there, matching the delta-tilde clamp at 2|rho|.
  double rho2 = rs.rho_norm * rs.rho_norm;
  double gap = std::clamp(sup_gap, 0.0, rs.rho_norm);
  return rho2 - gap * gap;
}

}  // namespace

double lambda0_from_psi(const RootSystemData& rs, const PsiModel& m,
                        int resolution) {
  PsiAnalysis a = analyze_psi(rs, m, resolution);
  if (a.degenerate) return rs.rho_norm * rs.rho_norm;
  return lambda0_from_gap(rs, a.sup_gap);
}

double lambda0_from_psi(const RootSystemData& rs, const PsiSamples& samples) {
  PsiAnalysis a = analyze_psi(rs, samples);
  if (a.degenerate) return rs.rho_norm * rs.rho_norm;
  return lambda0_from_gap(rs, a.sup_gap);
}

Lemma21Report lemma21_bounds(const RootSystemData& rs,
                             const PsiSamples& samples, const GaugeFamily& g,
                             double delta) {
  if (samples.directions.empty())
    fail(ErrorKind::usage, "lemma bounds need psi samples");

  auto min_margin = [&](double s) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.directions.size(); ++i) {
      if (samples.values[i] == kNegInf) continue;
      worst = std::min(worst,
                       g(s, samples.directions[i]) - samples.values[i]);
    }
    return worst;
  };

  double s_hi = 4.0 * rs.rho_norm;
  if (!(min_margin(s_hi) > 0.0))
    fail(ErrorKind::domain,
         "gauge family never dominates psi up to s = 4|rho| "
         "(bisection bracket failure)");

  Lemma21Report report;
  if (min_margin(0.0) > 0.0) {
    report.inf_s = 0.0;
  } else {
    double lo = 0.0, hi = s_hi;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      if (min_margin(mid) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    report.inf_s = hi;
  }
  report.margin_first = report.inf_s - delta;
  report.margin_second = min_margin(delta);
  return report;
}

Lemma21Report lemma21_bounds(const RootSystemData& rs, const PsiModel& m,
                             const GaugeFamily& g, double delta,
                             int resolution) {
  return lemma21_bounds(rs, psi_samples_from_model(rs, m, resolution), g,
                        delta);
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic:
      return "analytic";
    case Provenance::estimated:
      return "estimated";
    case Provenance::manual:
      return "manual";
  }
  return "unknown";
}

SpectralReport check_conditions(const RootSystemData& rs,
                                const ConditionInputs& inputs) {
  if (!inputs.delta_tilde && !inputs.psi)
    fail(ErrorKind::usage,
         "check_conditions needs delta_tilde or psi samples");

  SpectralReport report;
  bool any_estimated = false;
  auto note_source = [&](const std::string& key, Provenance prov) {
    report.sources.emplace_back(key, to_string(prov));
    if (prov != Provenance::analytic) any_estimated = true;
  };
  if (inputs.delta) note_source("delta", inputs.delta->prov);
  if (inputs.delta_tilde) note_source("delta_tilde", inputs.delta_tilde->prov);
  std::optional<PsiAnalysis> psi_analysis;
  if (inputs.psi) {
    psi_analysis = analyze_psi(rs, *inputs.psi);
    note_source("psi", inputs.psi_prov);
  }

  report.tol = any_estimated ? 0.05 : 1e-6;
  report.tol_regime = any_estimated ? "estimated" : "analytic";
  double tol = report.tol;

  if (inputs.delta) report.delta = inputs.delta->value;
  double delta_tilde_value = 0.0;
  if (inputs.delta_tilde) {
    delta_tilde_value = inputs.delta_tilde->value;
  } else {
    delta_tilde_value = psi_analysis->delta_tilde;
  }
  report.delta_tilde = delta_tilde_value;
  report.lambda0_from_delta_tilde =
      lambda0_from_delta_tilde(rs, delta_tilde_value);
  if (psi_analysis) {
    report.lambda0_from_psi =
        psi_analysis->degenerate
            ? rs.rho_norm * rs.rho_norm
            : lambda0_from_gap(rs, psi_analysis->sup_gap);
  }
  report.lambda0 = *report.lambda0_from_delta_tilde;
  report.lattice = inputs.lattice;
  report.tempered = inputs.tempered;

  // Cross-checks between independently supplied inputs.
  double ctol = any_estimated ? 0.1 : 2e-6;
  if (inputs.delta_tilde && psi_analysis) {
    double from_psi = psi_analysis->delta_tilde;
    if (std::abs(from_psi - inputs.delta_tilde->value) > ctol) {
      report.consistent = false;
      report.message =
          "delta_tilde " + format_g(inputs.delta_tilde->value) +
          " is inconsistent with the psi input (relation gives " +
          format_g(from_psi) + "); flags withheld";
    }
  }
  if (inputs.delta && report.delta_tilde &&
      inputs.delta->value > *report.delta_tilde + ctol) {
    report.consistent = false;
    report.message = "delta exceeds delta_tilde beyond tolerance; "
                     "flags withheld";
  }
  if (!report.consistent) return report;

  double rho_n = rs.rho_norm;
  double two_rho = 2.0 * rho_n;
  double rho2 = rho_n * rho_n;

  report.cond_A = delta_tilde_value <= rho_n + tol;
  if (psi_analysis) {
    bool le = true;
    for (std::size_t i = 0; i < inputs.psi->directions.size(); ++i) {
      double v = inputs.psi->values[i];
      if (v == kNegInf) continue;
      if (v > rs.rho.coords.dot(inputs.psi->directions[i].coords) + tol)
        le = false;
    }
    report.cond_B = le;
  }
  // Near (C) the lambda0 <-> delta_tilde map is quadratic, so tol^2 is
  // the matching tolerance; near (iv) it is linear with slope 2|rho|.
  report.cond_C = std::abs(report.lambda0 - rho2) <= tol * tol;

  if (inputs.delta)
    report.fig_i = std::abs(inputs.delta->value - two_rho) <= tol;
  report.fig_ii = std::abs(delta_tilde_value - two_rho) <= tol;
  report.fig_iv = report.lambda0 <= two_rho * tol;
  if (psi_analysis) {
    bool eq = true;
    ChamberVector rhat = rho_hat(rs);
    double at_rho = kNegInf;
    double best_angle = 1e9;
    for (std::size_t i = 0; i < inputs.psi->directions.size(); ++i) {
      const ChamberVector& u = inputs.psi->directions[i];
      double v = inputs.psi->values[i];
      double target = 2.0 * rs.rho.coords.dot(u.coords);
      if (v == kNegInf || std::abs(v - target) > tol) eq = false;
      double angle = (u.coords - rhat.coords).norm();
      if (angle < best_angle) {
        best_angle = angle;
        at_rho = v;
      }
    }
    report.fig_v = eq;
    if (best_angle < 0.05)
      report.fig_vi = at_rho != kNegInf &&
                      std::abs(at_rho - two_rho) <= tol;
  }
  return report;
}

namespace {

std::string flag_text(const std::optional<bool>& f) {
  if (!f) return "unset";
  return *f ? "true" : "false";
}

std::string opt_text(const std::optional<double>& v) {
  if (!v) return "unset";
  return format_g(*v);
}

}  // namespace

std::string report_to_text(const SpectralReport& report) {
  std::string out;
  out += "delta=" + opt_text(report.delta) + "\n";
  out += "delta_tilde=" + opt_text(report.delta_tilde) + "\n";
  out += "lambda0_from_delta_tilde=" +
         opt_text(report.lambda0_from_delta_tilde) + "\n";
  out += "lambda0_from_psi=" + opt_text(report.lambda0_from_psi) + "\n";
  out += "lambda0=" + format_g(report.lambda0) + "\n";
  out += "cond_A=" + flag_text(report.cond_A) + "\n";
  out += "cond_B=" + flag_text(report.cond_B) + "\n";
  out += "cond_C=" + flag_text(report.cond_C) + "\n";
  out += "fig_i=" + flag_text(report.fig_i) + "\n";
  out += "fig_ii=" + flag_text(report.fig_ii) + "\n";
  out += "fig_iv=" + flag_text(report.fig_iv) + "\n";
  out += "fig_v=" + flag_text(report.fig_v) + "\n";
  out += "fig_vi=" + flag_text(report.fig_vi) + "\n";
  out += "lattice=" + flag_text(report.lattice) + "\n";
  out += "tempered=" + flag_text(report.tempered) + "\n";
  out += "consistent=" + std::string(report.consistent ? "true" : "false") +
         "\n";
  out += "tol_regime=" + report.tol_regime + "\n";
  out += "tol=" + format_g(report.tol) + "\n";
  for (const auto& [key, value] : report.sources)
    out += "source_" + key + "=" + value + "\n";
  if (!report.message.empty()) out += "message=" + report.message + "\n";
  return out;
}

void write_report_text(const SpectralReport& report,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << report_to_text(report);
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

void write_report_csv(const SpectralReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << "delta,delta_tilde,lambda0_from_delta_tilde,lambda0_from_psi,"
         "lambda0,cond_A,cond_B,cond_C,fig_i,fig_ii,fig_iv,fig_v,fig_vi,"
         "lattice,tempered,consistent,tol_regime,tol\n";
  out << opt_text(report.delta) << ',' << opt_text(report.delta_tilde) << ','
      << opt_text(report.lambda0_from_delta_tilde) << ','
      << opt_text(report.lambda0_from_psi) << ',' << format_g(report.lambda0)
      << ',' << flag_text(report.cond_A) << ',' << flag_text(report.cond_B)
      << ',' << flag_text(report.cond_C) << ',' << flag_text(report.fig_i)
      << ',' << flag_text(report.fig_ii) << ',' << flag_text(report.fig_iv)
      << ',' << flag_text(report.fig_v) << ',' << flag_text(report.fig_vi)
      << ',' << flag_text(report.lattice) << ',' << flag_text(report.tempered)
      << ',' << (report.consistent ? "true" : "false") << ','
      << report.tol_regime << ',' << format_g(report.tol) << "\n";
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace wcg
