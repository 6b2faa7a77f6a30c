#include "wcg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace wcg {

namespace {

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool in_support(const PsiModel& m, const ChamberVector& h, double hn) {
  if (!m.support) return true;
  double cosang = m.support->axis.coords.dot(h.coords) / hn;
  return cosang >= std::cos(m.support->half_angle) - 1e-12;
}

// psi <= 2 rho checked on a dense direction grid.
bool check_admissible(const RootSystemData& rs, const PsiModel& m) {
  for (const ChamberVector& u : estimation_grid(rs, 512)) {
    double v = evaluate_psi(rs, m, u);
    if (v == kNegInf) continue;
    if (v > 2.0 * rs.rho.coords.dot(u.coords) + 1e-9) return false;
  }
  return true;
}

}  // namespace

PsiModel linear_model(const RootSystemData& rs, const ChamberVector& phi,
                      std::optional<SupportCone> support) {
  if (phi.dim() != rs.ambient_dim)
    fail(ErrorKind::usage, "linear model: form dimension mismatch");
  PsiModel m;
  m.kind = PsiModel::Kind::linear;
  m.forms = {phi};
  m.support = std::move(support);
  m.label = "linear(";
  for (int i = 0; i < phi.dim(); ++i)
    m.label += (i ? "," : "") + format_g(phi.coords[i]);
  m.label += ")";
  m.admissible = check_admissible(rs, m);
  return m;
}

PsiModel min_linear_model(const RootSystemData& rs,
                          std::vector<ChamberVector> forms,
                          std::optional<SupportCone> support) {
  if (forms.empty())
    fail(ErrorKind::usage, "min-linear model needs at least one form");
  for (const ChamberVector& phi : forms)
    if (phi.dim() != rs.ambient_dim)
      fail(ErrorKind::usage, "min-linear model: form dimension mismatch");
  PsiModel m;
  m.kind = PsiModel::Kind::min_linear;
  m.forms = std::move(forms);
  m.support = std::move(support);
  m.label = "minlinear[" + std::to_string(m.forms.size()) + "]";
  m.admissible = check_admissible(rs, m);
  return m;
}

PsiModel spherical_cap_model(const RootSystemData& rs, double c,
                             std::optional<SupportCone> support) {
  PsiModel m;
  m.kind = PsiModel::Kind::spherical_cap;
  m.cap = c;
  m.support = std::move(support);
  m.label = "cap(" + format_g(c) + ")";
  m.admissible = check_admissible(rs, m);
  return m;
}

double evaluate_psi(const RootSystemData& rs, const PsiModel& m,
                    const ChamberVector& h) {
  if (h.dim() != rs.ambient_dim)
    fail(ErrorKind::domain, "evaluate_psi: dimension mismatch");
  double hn = h.coords.norm();
  if (hn == 0.0) return 0.0;
  if (!in_closed_chamber(rs, h, 1e-9))
    fail(ErrorKind::domain, "evaluate_psi: H outside the closed chamber");
  if (!in_support(m, h, hn)) return kNegInf;
  switch (m.kind) {
    case PsiModel::Kind::linear:
      return m.forms[0].coords.dot(h.coords);
    case PsiModel::Kind::min_linear: {
      double best = m.forms[0].coords.dot(h.coords);
      for (std::size_t i = 1; i < m.forms.size(); ++i)
        best = std::min(best, m.forms[i].coords.dot(h.coords));
      return best;
    }
    case PsiModel::Kind::spherical_cap:
      return m.cap * hn;
  }
  return kNegInf;
}

OrbitDataset sample_orbit(const RootSystemData& rs, const PsiModel& m,
                          const SynthConfig& cfg, SynthDetail* detail) {
  if (cfg.resolution < 2)
    fail(ErrorKind::usage, "synth resolution must be >= 2");
  if (cfg.r_max <= 0.0) fail(ErrorKind::usage, "synth r_max must be > 0");
  if (!m.admissible)
    fail(ErrorKind::domain,
         "synthetic sampling requires an admissible model (psi <= 2 rho)");

  std::vector<ChamberVector> dirs = direction_grid(rs, cfg.resolution);

  if (cfg.jitter > 0.0 && dirs.size() > 1) {
    double cell = std::acos(std::clamp(
        dirs[0].coords.dot(dirs[1].coords), -1.0, 1.0));
    std::uint64_t state = cfg.seed ^ 0x9e377971ULL;
    std::vector<ChamberVector> rays = chamber_extreme_rays(rs);
    for (ChamberVector& u : dirs) {
      Vec noise = Vec::Zero(rs.ambient_dim);
      for (const ChamberVector& ray : rays)
        noise += (uniform01(state) - 0.5) * ray.coords;
      double nn = noise.norm();
      if (nn < 1e-12) continue;
      Vec cand = u.coords + cfg.jitter * 0.5 * cell * noise / nn;
      cand /= cand.norm();
      ChamberVector moved{cand};
      if (in_closed_chamber(rs, moved, 1e-12)) u = moved;
    }
  }

  std::vector<double> psi_values;
  std::vector<double> exact_counts;  // floor(e^{psi r_max}), saturated
  psi_values.reserve(dirs.size());
  exact_counts.reserve(dirs.size());
  long double total = 0.0L;
  bool any_positive = false;
  for (const ChamberVector& u : dirs) {
    double v = evaluate_psi(rs, m, u);
    psi_values.push_back(v);
    double count = 0.0;
    if (v > 0.0) {
      any_positive = true;
      // Saturate astronomically large counts; the stride below keeps the
      // emitted subsequence consistent with this value.
      count = v * cfg.r_max > 41.0 ? 9e17
                                   : std::floor(std::exp(v * cfg.r_max));
      total += count;
    }
    exact_counts.push_back(count);
  }
  if (!any_positive)
    fail(ErrorKind::domain,
         "psi model is nonpositive everywhere on the direction grid; "
         "nothing to sample");

  std::uint64_t stride = 1;
  if (total > static_cast<long double>(cfg.budget)) {
    if (cfg.strict_counts)
      fail(ErrorKind::guard,
           "predicted point count exceeds the record budget of " +
               std::to_string(cfg.budget) +
               " (raise the budget or allow subsampling)");
    stride = static_cast<std::uint64_t>(
        std::ceil(total / static_cast<long double>(cfg.budget)));
  }

  OrbitDataset ds;
  ds.header.group_desc = "synthetic " + rs.group.to_string();
  ds.header.rank = rs.rank;
  ds.header.form = rs.form;
  ds.header.max_length = 0;
  ds.header.dedup = DedupMode::floating;
  {
    std::string blob = m.label + "|" + std::to_string(cfg.resolution) + "|" +
                       format_g(cfg.r_max) + "|" + std::to_string(cfg.seed) +
                       "|" + format_g(cfg.jitter) + "|" +
                       std::to_string(stride);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : blob) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    ds.header.gens_fingerprint = buf;
  }
  ds.header.meta.emplace_back("model", m.label);
  ds.header.meta.emplace_back("rmax", format_g(cfg.r_max));
  ds.header.meta.emplace_back("resolution", std::to_string(cfg.resolution));
  ds.header.meta.emplace_back("seed", std::to_string(cfg.seed));
  ds.header.meta.emplace_back("jitter", format_g(cfg.jitter));
  ds.header.meta.emplace_back("stride", std::to_string(stride));

  SynthDetail local;
  local.directions = dirs;
  local.psi_values = psi_values;
  local.stride = stride;
  local.emitted.assign(dirs.size(), 0);

  // Identity record, exactly once.
  OrbitRecord id;
  id.word_length = 0;
  id.mu = ChamberVector{Vec::Zero(rs.ambient_dim)};
  id.norm = 0.0;
  id.rho_pairing = 0.0;
  ds.records.push_back(std::move(id));

  double log_stride = std::log(static_cast<double>(stride));
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    double psi = psi_values[j];
    if (psi <= 0.0) continue;
    // k-th emitted point sits at radius log(k * stride) / psi; counts at
    // radius R therefore realize floor(e^{psi R} / stride).
    std::uint64_t kmax = static_cast<std::uint64_t>(
        std::floor(exact_counts[j] / static_cast<double>(stride)));
    const Vec& u = dirs[j].coords;
    for (std::uint64_t k = 1; k <= kmax; ++k) {
      double r = (std::log(static_cast<double>(k)) + log_stride) / psi;
      if (r <= 0.0) continue;  // the identity stands in for radius zero
      OrbitRecord rec;
      rec.word_length = 0;
      rec.mu = ChamberVector{r * u};
      rec.norm = r;
      rec.rho_pairing = rs.rho.coords.dot(rec.mu.coords);
      ds.records.push_back(std::move(rec));
      ++local.emitted[j];
    }
  }

  sort_records(ds.records);
  if (detail) *detail = std::move(local);
  return ds;
}

}  // namespace wcg
