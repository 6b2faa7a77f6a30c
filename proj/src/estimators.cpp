#include "wcg/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wcg/version.hpp"

namespace wcg {

namespace {

struct WindowFit {
  double slope = 0.0;
  double std_error = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int sample_count = 0;
};

// Slope of log(count <= r) against r over the top window_fraction of the
// radius range; radii must be sorted ascending. log_offset shifts the
// counts (used for cumulative-sum regressions via precomputed values).
std::optional<WindowFit> fit_log_counts(const std::vector<double>& radii,
                                        double window_fraction,
                                        std::string* why = nullptr) {
  auto reject = [&](const char* msg) {
    if (why) *why = msg;
    return std::nullopt;
  };
  if (radii.empty()) return reject("empty radius list");
  double r_lo = radii.front();
  double r_hi = radii.back();
  if (!(r_hi > r_lo)) return reject("zero radius range");
  double w_lo = r_hi - window_fraction * (r_hi - r_lo);

  std::size_t first =
      std::lower_bound(radii.begin(), radii.end(), w_lo) - radii.begin();
  std::size_t in_window = radii.size() - first;
  if (in_window < 10) return reject("fewer than 10 records in the window");

  // Low counts carry exponentially larger relative noise and, on sparse
  // data, a discreteness knee; keep regression points above an adaptive
  // count floor.
  double max_count = static_cast<double>(radii.size());
  double floor_count =
      std::max(5.0, std::min(30.0, std::floor(max_count / 3.0)));

  // One regression point per distinct radius, y = log N(r).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = first; i < radii.size(); ++i) {
    if (i + 1 < radii.size() && radii[i + 1] == radii[i]) continue;
    if (static_cast<double>(i + 1) < floor_count) continue;
    double x = radii[i];
    double y = std::log(static_cast<double>(i + 1));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < 2) return reject("zero radius range");
  double nn = static_cast<double>(n);
  double sxx_c = sxx - sx * sx / nn;
  double sxy_c = sxy - sx * sy / nn;
  double syy_c = syy - sy * sy / nn;
  if (sxx_c <= 0.0) return reject("zero radius range");
  WindowFit fit;
  fit.slope = sxy_c / sxx_c;
  double resid = std::max(0.0, syy_c - fit.slope * sxy_c);
  fit.std_error =
      n > 2 ? std::sqrt(resid / (nn - 2.0) / sxx_c) : 0.0;
  fit.window_lo = w_lo;
  fit.window_hi = r_hi;
  fit.sample_count = static_cast<int>(in_window);
  return fit;
}

struct LinearFit {
  double slope = 0.0;
  double std_error = 0.0;
  double sse = 0.0;
  int points = 0;
};

std::optional<LinearFit> least_squares(const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
  std::size_t n = xs.size();
  if (n < 2) return std::nullopt;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  double nn = static_cast<double>(n);
  double sxx_c = sxx - sx * sx / nn;
  double sxy_c = sxy - sx * sy / nn;
  double syy_c = syy - sy * sy / nn;
  if (sxx_c <= 0.0) return std::nullopt;
  LinearFit fit;
  fit.slope = sxy_c / sxx_c;
  fit.sse = std::max(0.0, syy_c - fit.slope * sxy_c);
  fit.std_error =
      n > 2 ? std::sqrt(fit.sse / (nn - 2.0) / sxx_c) : 0.0;
  fit.points = static_cast<int>(n);
  return fit;
}

// Fit of log(S(r) - C) against r over the top window, profiling out the
// constant C. Convergent sub-series and sampling transients enter S as
// r-constants, so the offset belongs to the model; C = 0 is kept unless
// the offset clearly improves the residual.
std::optional<WindowFit> fit_log_values_offset(
    const std::vector<double>& radii, const std::vector<double>& sums,
    double window_fraction, std::string* why = nullptr) {
  auto reject = [&](const char* msg) {
    if (why) *why = msg;
    return std::nullopt;
  };
  if (radii.empty()) return reject("empty radius list");
  double r_lo = radii.front();
  double r_hi = radii.back();
  if (!(r_hi > r_lo)) return reject("zero radius range");
  double w_lo = r_hi - window_fraction * (r_hi - r_lo);
  std::size_t first =
      std::lower_bound(radii.begin(), radii.end(), w_lo) - radii.begin();
  std::size_t in_window = radii.size() - first;
  if (in_window < 10) return reject("fewer than 10 records in the window");

  std::vector<double> xs, values;
  for (std::size_t i = first; i < radii.size(); ++i) {
    if (i + 1 < radii.size() && radii[i + 1] == radii[i]) continue;
    xs.push_back(radii[i]);
    values.push_back(sums[i]);
  }
  if (xs.size() < 2) return reject("zero radius range");

  double s_min = values.front();
  for (double v : values) s_min = std::min(s_min, v);
  std::vector<double> ys(values.size());
  auto fit_at = [&](double c) -> std::optional<LinearFit> {
    for (std::size_t i = 0; i < values.size(); ++i) {
      double d = values[i] - c;
      if (d <= 0.0) return std::nullopt;
      ys[i] = std::log(d);
    }
    return least_squares(xs, ys);
  };

  auto base = fit_at(0.0);
  if (!base) return reject("zero radius range");
  auto sse_of = [&](double c) {
    auto f = fit_at(c);
    return f ? f->sse : std::numeric_limits<double>::infinity();
  };

  // Golden-section minimization of the profile SSE over C.
  double lo = 0.0, hi = s_min * (1.0 - 1e-9);
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = sse_of(x1), f2 = sse_of(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = sse_of(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = sse_of(x2);
    }
  }
  double c_best = 0.5 * (a + b);
  auto offset_fit = fit_at(c_best);
  LinearFit chosen = *base;
  if (offset_fit && offset_fit->sse < 0.95 * base->sse)
    chosen = *offset_fit;

  WindowFit fit;
  fit.slope = chosen.slope;
  fit.std_error = chosen.std_error;
  fit.window_lo = w_lo;
  fit.window_hi = r_hi;
  fit.sample_count = static_cast<int>(in_window);
  return fit;
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Word balls are complete in the norm only below the smallest norm seen in
// the two deepest spheres: longer words (parabolic-type distortion) would
// keep landing below that radius. Returns +inf when the dataset carries no
// usable word-length structure (synthetic data, depth < 2).
double word_complete_radius(const OrbitDataset& ds) {
  int max_len = 0;
  for (const OrbitRecord& rec : ds.records)
    max_len = std::max(max_len, rec.word_length);
  if (max_len < 2) return std::numeric_limits<double>::infinity();
  double cut = std::numeric_limits<double>::infinity();
  for (const OrbitRecord& rec : ds.records)
    if (rec.word_length >= max_len - 1) cut = std::min(cut, rec.norm);
  return cut;
}

}  // namespace

GaugeFn riemannian_gauge(const RootSystemData& rs) {
  (void)rs;
  return [](const ChamberVector& h) { return h.coords.norm(); };
}

GaugeFn polyhedral_gauge(const RootSystemData& rs) {
  Vec rh = rs.rho.coords / rs.rho_norm;
  return [rh](const ChamberVector& h) { return rh.dot(h.coords); };
}

GrowthRateEstimate counting_exponent(const RootSystemData& rs,
                                     const OrbitDataset& ds,
                                     const GaugeFn& gauge,
                                     double window_fraction) {
  if (ds.records.empty())
    fail(ErrorKind::domain, "counting exponent of an empty dataset");
  if (window_fraction <= 0.0 || window_fraction > 1.0)
    fail(ErrorKind::usage, "window fraction must lie in (0, 1]");

  // A dataset truncated at Riemannian radius R is complete in this gauge
  // only up to R * min_u gauge(u) over unit chamber directions; counts
  // beyond that bend down artificially and must not enter the regression.
  // Word-ball data is truncated again at its own completeness radius.
  double word_cut = word_complete_radius(ds);
  double max_norm = 0.0;
  for (const OrbitRecord& rec : ds.records)
    if (rec.norm <= word_cut) max_norm = std::max(max_norm, rec.norm);
  double min_unit_gauge = std::numeric_limits<double>::infinity();
  for (const ChamberVector& u : estimation_grid(rs, 65))
    min_unit_gauge = std::min(min_unit_gauge, gauge(u));
  if (!(min_unit_gauge > 0.0))
    fail(ErrorKind::domain,
         "gauge is not positive on the chamber's unit directions");
  double q_complete = min_unit_gauge * max_norm * (1.0 + 1e-12);

  std::vector<double> radii;
  radii.reserve(ds.records.size());
  for (const OrbitRecord& rec : ds.records) {
    if (rec.norm > word_cut) continue;
    double r = gauge(rec.mu);
    if (!std::isfinite(r) || r < -1e-9)
      fail(ErrorKind::domain, "gauge produced an invalid radius");
    if (r <= q_complete) radii.push_back(std::max(r, 0.0));
  }
  std::sort(radii.begin(), radii.end());
  std::string why;
  auto fit = fit_log_counts(radii, window_fraction, &why);
  if (!fit) fail(ErrorKind::domain, "counting exponent: " + why);
  GrowthRateEstimate est;
  est.value = fit->slope;
  est.window_lo = fit->window_lo;
  est.window_hi = fit->window_hi;
  est.std_error = fit->std_error;
  est.sample_count = fit->sample_count;
  return est;
}

GrowthRateEstimate modified_critical_exponent(const RootSystemData& rs,
                                              const OrbitDataset& ds,
                                              double window_fraction) {
  GrowthRateEstimate tau =
      counting_exponent(rs, ds, polyhedral_gauge(rs), window_fraction);
  double two_rho = 2.0 * rs.rho_norm;
  if (tau.value <= rs.rho_norm) {
    tau.value = std::clamp(tau.value, 0.0, two_rho);
    return tau;
  }

  // Supercritical branch: slope of log S(R), where S is the rho-twisted
  // partial sum over the Riemannian ball of radius R.
  double word_cut = word_complete_radius(ds);
  std::vector<std::pair<double, double>> by_norm;  // (|mu|, <rho,mu>)
  by_norm.reserve(ds.records.size());
  for (const OrbitRecord& rec : ds.records)
    if (rec.norm <= word_cut) by_norm.emplace_back(rec.norm, rec.rho_pairing);
  std::sort(by_norm.begin(), by_norm.end());
  std::vector<double> radii(by_norm.size());
  std::vector<double> sums(by_norm.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < by_norm.size(); ++i) {
    radii[i] = by_norm[i].first;
    acc += std::exp(-by_norm[i].second);
    sums[i] = acc;
  }
  std::string why;
  auto fit = fit_log_values_offset(radii, sums, window_fraction, &why);
  if (!fit) fail(ErrorKind::domain, "modified critical exponent: " + why);
  GrowthRateEstimate est;
  est.value = std::clamp(rs.rho_norm + fit->slope, 0.0, two_rho);
  est.window_lo = fit->window_lo;
  est.window_hi = fit->window_hi;
  est.std_error = fit->std_error;
  est.sample_count = fit->sample_count;
  return est;
}

GrowthIndicatorEstimate growth_indicator(
    const RootSystemData& rs, const OrbitDataset& ds,
    const std::vector<ChamberVector>& directions,
    const std::vector<double>& cone_angles, double window_fraction,
    bool extrapolate) {
  if (ds.records.empty())
    fail(ErrorKind::domain, "growth indicator of an empty dataset");
  if (directions.empty())
    fail(ErrorKind::usage, "growth indicator needs directions");
  if (cone_angles.empty())
    fail(ErrorKind::usage, "growth indicator needs cone angles");
  for (std::size_t i = 1; i < cone_angles.size(); ++i)
    if (!(cone_angles[i] < cone_angles[i - 1]))
      fail(ErrorKind::usage, "cone angles must be strictly decreasing");
  if (extrapolate && cone_angles.size() < 2)
    fail(ErrorKind::usage, "extrapolation needs at least two cone angles");

  // Records sorted by norm once; unit vectors cached.
  std::vector<std::size_t> order(ds.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.records[a].norm < ds.records[b].norm;
  });
  double word_cut = word_complete_radius(ds);
  Eigen::MatrixXd units(rs.ambient_dim, ds.records.size());
  std::vector<double> norms(ds.records.size());
  std::size_t m = 0;
  for (std::size_t idx : order) {
    const OrbitRecord& rec = ds.records[idx];
    if (rec.norm <= 0.0 || rec.norm > word_cut) continue;
    units.col(m) = rec.mu.coords / rec.norm;
    norms[m] = rec.norm;
    ++m;
  }

  GrowthIndicatorEstimate est;
  est.directions = directions;
  est.cone_angles = cone_angles;
  est.extrapolated = extrapolate;
  est.values.reserve(directions.size());
  est.table.resize(directions.size());

  std::vector<double> cone_radii;
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const Vec& u = directions[d].coords;
    Eigen::VectorXd dots =
        units.leftCols(m).transpose() * u;  // cos of angle to u
    std::vector<ConeSlope>& rows = est.table[d];
    for (double eps : cone_angles) {
      double cos_eps = std::cos(eps);
      cone_radii.clear();
      for (std::size_t i = 0; i < m; ++i)
        if (dots[i] >= cos_eps) cone_radii.push_back(norms[i]);
      ConeSlope row;
      row.epsilon = eps;
      row.count = static_cast<int>(cone_radii.size());
      if (cone_radii.size() >= 10) {
        auto fit = fit_log_counts(cone_radii, window_fraction);
        if (fit) {
          row.slope = fit->slope;
          row.std_error = fit->std_error;
          row.valid = true;
        }
      }
      rows.push_back(row);
    }

    const ConeSlope& smallest = rows.back();
    double value = kNegInf;
    if (smallest.count >= 10 && smallest.valid) {
      value = smallest.slope;
      if (extrapolate && rows.size() >= 2) {
        const ConeSlope& next = rows[rows.size() - 2];
        if (next.valid) {
          double e1 = smallest.epsilon;
          double e2 = next.epsilon;
          value = smallest.slope -
                  e1 * (next.slope - smallest.slope) / (e2 - e1);
        }
      }
    }
    est.values.push_back(value);
  }
  return est;
}

PsiDeltaCheck classical_exponent_from_psi_check(
    const GrowthIndicatorEstimate& est, const GrowthRateEstimate& delta) {
  PsiDeltaCheck check;
  check.delta = delta.value;
  check.psi_sup = kNegInf;
  for (double v : est.values)
    if (v > check.psi_sup) check.psi_sup = v;
  check.discrepancy = check.psi_sup == kNegInf
                          ? std::abs(check.delta)
                          : std::abs(check.delta - check.psi_sup);
  return check;
}

void write_indicator_csv(const GrowthIndicatorEstimate& est,
                         const std::string& dataset_fingerprint,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  int dim = est.directions.empty() ? 0 : est.directions[0].dim();
  out << "# " << kVersion << " growth indicator\n";
  out << "# dataset " << dataset_fingerprint << "\n";
  out << "direction_index";
  for (int i = 1; i <= dim; ++i) out << ",u_" << i;
  out << ",epsilon,slope,stderr\n";
  for (std::size_t d = 0; d < est.directions.size(); ++d) {
    for (const ConeSlope& row : est.table[d]) {
      out << d;
      for (int i = 0; i < dim; ++i)
        out << ',' << format_g(est.directions[d].coords[i]);
      out << ',' << format_g(row.epsilon) << ',';
      out << (row.valid ? format_g(row.slope) : "nan") << ','
          << (row.valid ? format_g(row.std_error) : "nan") << "\n";
    }
    out << d;
    for (int i = 0; i < dim; ++i)
      out << ',' << format_g(est.directions[d].coords[i]);
    out << ",0,";
    out << (est.values[d] == kNegInf ? "-inf" : format_g(est.values[d]))
        << ",\n";
  }
  out << "# summary\n";
  out << "# directions " << est.directions.size() << "\n";
  out << "# extrapolated " << (est.extrapolated ? 1 : 0) << "\n";
  double sup = kNegInf;
  for (double v : est.values) sup = std::max(sup, v);
  out << "# psi_sup " << (sup == kNegInf ? "-inf" : format_g(sup)) << "\n";
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

void write_counts_csv(const RootSystemData& rs, const OrbitDataset& ds,
                      const GaugeFn& gauge, const std::string& gauge_label,
                      const std::string& path) {
  (void)rs;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  std::vector<double> radii;
  radii.reserve(ds.records.size());
  for (const OrbitRecord& rec : ds.records)
    radii.push_back(std::max(gauge(rec.mu), 0.0));
  std::sort(radii.begin(), radii.end());
  out << "# " << kVersion << " counts, gauge " << gauge_label << "\n";
  out << "radius,log_count\n";
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i + 1 < radii.size() && radii[i + 1] == radii[i]) continue;
    out << format_g(radii[i]) << ','
        << format_g(std::log(static_cast<double>(i + 1))) << "\n";
  }
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace wcg
