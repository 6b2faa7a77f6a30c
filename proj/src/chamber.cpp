#include "wcg/chamber.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace wcg {

int GroupDescriptor::rank() const {
  int r = 0;
  for (int n : factors) r += n - 1;
  return r;
}

int GroupDescriptor::ambient_dim() const {
  int d = 0;
  for (int n : factors) d += n;
  return d;
}

std::string GroupDescriptor::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += 'x';
    out += "sl" + std::to_string(factors[i]);
  }
  return out;
}

GroupDescriptor GroupDescriptor::parse(std::string_view text) {
  GroupDescriptor desc;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text.compare(pos, 2, "sl") != 0)
      fail(ErrorKind::format,
           "bad group descriptor '" + std::string(text) + "'");
    pos += 2;
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (start == pos)
      fail(ErrorKind::format,
           "bad group descriptor '" + std::string(text) + "'");
    desc.factors.push_back(std::stoi(std::string(text.substr(start, pos - start))));
    if (pos < text.size()) {
      if (text[pos] != 'x')
        fail(ErrorKind::format,
             "bad group descriptor '" + std::string(text) + "'");
      ++pos;
      if (pos == text.size())
        fail(ErrorKind::format,
             "bad group descriptor '" + std::string(text) + "'");
    }
  }
  if (desc.factors.empty())
    fail(ErrorKind::format, "empty group descriptor");
  for (int n : desc.factors)
    if (n < 2)
      fail(ErrorKind::usage, "factor size must be >= 2, got sl" +
                                 std::to_string(n));
  return desc;
}

RootSystemData build_root_system(const GroupDescriptor& desc) {
  if (desc.factors.empty())
    fail(ErrorKind::usage, "group descriptor needs at least one factor");
  for (int n : desc.factors)
    if (n < 2)
      fail(ErrorKind::usage,
           "factor size must be >= 2, got sl" + std::to_string(n));

  RootSystemData rs;
  rs.group = desc;
  rs.rank = desc.rank();
  rs.ambient_dim = desc.ambient_dim();

  int offset = 0;
  Vec rho = Vec::Zero(rs.ambient_dim);
  for (int n : desc.factors) {
    rs.blocks.push_back({offset, n});
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Vec alpha = Vec::Zero(rs.ambient_dim);
        alpha[offset + i] = 1.0;
        alpha[offset + j] = -1.0;
        rs.positive_roots.push_back({alpha, 1});
        if (j == i + 1) rs.simple_roots.push_back(alpha);
      }
    // rho per block: ((n-1)/2, (n-3)/2, ..., -(n-1)/2)
    for (int i = 0; i < n; ++i)
      rho[offset + i] = 0.5 * (n - 1 - 2 * i);
    offset += n;
  }
  rs.rho = ChamberVector{rho};
  rs.rho_norm = rho.norm();
  return rs;
}

double pairing(const RootSystemData& rs, const ChamberVector& a,
               const ChamberVector& b) {
  if (a.dim() != rs.ambient_dim || b.dim() != rs.ambient_dim)
    fail(ErrorKind::domain, "pairing: dimension mismatch");
  return a.coords.dot(b.coords);
}

double norm(const RootSystemData& rs, const ChamberVector& v) {
  if (v.dim() != rs.ambient_dim)
    fail(ErrorKind::domain, "norm: dimension mismatch");
  return v.coords.norm();
}

ChamberVector rho_hat(const RootSystemData& rs) {
  return ChamberVector{rs.rho.coords / rs.rho_norm};
}

double block_sum_defect(const RootSystemData& rs, const ChamberVector& v) {
  double worst = 0.0;
  for (const Block& b : rs.blocks)
    worst = std::max(worst,
                     std::abs(v.coords.segment(b.offset, b.n).sum()));
  return worst;
}

ChamberVector chamber_vector(const RootSystemData& rs, Vec coords) {
  if (coords.size() != rs.ambient_dim)
    fail(ErrorKind::domain, "chamber vector: dimension mismatch");
  ChamberVector v{std::move(coords)};
  if (block_sum_defect(rs, v) > 1e-12)
    fail(ErrorKind::domain, "chamber vector: block sums exceed 1e-12");
  return v;
}

ChamberVector project_trace_free(const RootSystemData& rs, const Vec& coords) {
  if (coords.size() != rs.ambient_dim)
    fail(ErrorKind::domain, "projection: dimension mismatch");
  Vec out = coords;
  for (const Block& b : rs.blocks) {
    double mean = out.segment(b.offset, b.n).mean();
    out.segment(b.offset, b.n).array() -= mean;
  }
  return ChamberVector{out};
}

bool in_closed_chamber(const RootSystemData& rs, const ChamberVector& v,
                       double tol) {
  if (v.dim() != rs.ambient_dim) return false;
  // Simple roots suffice: coordinates nonincreasing within each block.
  for (const Vec& alpha : rs.simple_roots)
    if (alpha.dot(v.coords) < -tol) return false;
  return true;
}

ChamberVector simple_reflection(const RootSystemData& rs, int i,
                                const ChamberVector& v) {
  if (i < 0 || i >= static_cast<int>(rs.simple_roots.size()))
    fail(ErrorKind::domain, "simple reflection index out of range");
  const Vec& alpha = rs.simple_roots[i];
  double c = 2.0 * alpha.dot(v.coords) / alpha.squaredNorm();
  return ChamberVector{v.coords - c * alpha};
}

double d_s(const RootSystemData& rs, double s, const ChamberVector& h) {
  if (s < 0) fail(ErrorKind::domain, "d_s: negative parameter s");
  if (!in_closed_chamber(rs, h))
    fail(ErrorKind::domain, "d_s: H outside the closed chamber");
  double rho_term = rs.rho.coords.dot(h.coords) / rs.rho_norm;
  return std::min(s, rs.rho_norm) * rho_term +
         std::max(s - rs.rho_norm, 0.0) * h.coords.norm();
}

double d_s_cases(const RootSystemData& rs, double s, const ChamberVector& h) {
  if (s < 0) fail(ErrorKind::domain, "d_s: negative parameter s");
  if (!in_closed_chamber(rs, h))
    fail(ErrorKind::domain, "d_s: H outside the closed chamber");
  double rho_pair = rs.rho.coords.dot(h.coords);
  if (s >= rs.rho_norm)
    return rho_pair + (s - rs.rho_norm) * h.coords.norm();
  return s * rho_pair / rs.rho_norm;
}

GaugeFamily riemannian_family(const RootSystemData& rs) {
  (void)rs;
  return {"riemannian", [](double s, const ChamberVector& h) {
            return s * h.coords.norm();
          }};
}

GaugeFamily polyhedral_family(const RootSystemData& rs) {
  return {"polyhedral", [rs](double s, const ChamberVector& h) {
            return d_s(rs, s, h);
          }};
}

GaugeFamily mix_family(const GaugeFamily& a, const GaugeFamily& b,
                       double weight) {
  if (weight < 0.0 || weight > 1.0)
    fail(ErrorKind::usage, "mix_family: weight outside [0,1]");
  auto ea = a.eval;
  auto eb = b.eval;
  return {"mix(" + a.label + "," + b.label + ")",
          [ea, eb, weight](double s, const ChamberVector& h) {
            return weight * ea(s, h) + (1.0 - weight) * eb(s, h);
          }};
}

bool GaugeAudit::passed(double tol) const {
  return worst_d0 <= tol && worst_positivity <= tol &&
         worst_homogeneity <= tol && worst_monotonicity <= tol &&
         worst_continuity <= tol;
}

std::uint64_t split_mix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(split_mix(state) >> 11) * 0x1.0p-53;
}

ChamberVector random_chamber_vector(const RootSystemData& rs,
                                    std::uint64_t& state) {
  std::vector<ChamberVector> rays = chamber_extreme_rays(rs);
  Vec out = Vec::Zero(rs.ambient_dim);
  for (const ChamberVector& ray : rays)
    out += uniform01(state) * ray.coords;
  double n = out.norm();
  if (n < 1e-9) return random_chamber_vector(rs, state);
  return ChamberVector{out / n * (0.25 + 4.0 * uniform01(state))};
}

GaugeAudit verify_gauge_family(const GaugeFamily& g, const RootSystemData& rs,
                               int samples, std::uint64_t seed) {
  if (samples < 1) fail(ErrorKind::usage, "gauge audit needs samples >= 1");
  GaugeAudit audit;
  audit.samples = samples;
  std::uint64_t state = seed ^ 0x5bf03635ull;
  double s_hi = 3.0 * rs.rho_norm + 1.0;
  for (int k = 0; k < samples; ++k) {
    ChamberVector h = random_chamber_vector(rs, state);
    double s1 = s_hi * uniform01(state);
    double s2 = s_hi * uniform01(state);
    if (s1 > s2) std::swap(s1, s2);

    audit.worst_d0 = std::max(audit.worst_d0, std::abs(g(0.0, h)));

    double hn = h.coords.norm();
    double v1 = g(s1, h);
    double v2 = g(s2, h);
    if (s1 > 1e-6 && hn > 1e-9)
      audit.worst_positivity = std::max(audit.worst_positivity, -v1);
    audit.worst_monotonicity =
        std::max(audit.worst_monotonicity, v1 - v2);

    double t = 0.1 + 4.0 * uniform01(state);
    ChamberVector th{t * h.coords};
    audit.worst_homogeneity = std::max(
        audit.worst_homogeneity, std::abs(g(s1, th) - t * v1) / t);

    // Continuity in s: a 1e-8 step may move the value by at most
    // 1e-6 * scale before it counts as a violation.
    double step = 1e-8;
    double scale = std::max(1.0, hn);
    double jump = std::abs(g(s1 + step, h) - v1);
    audit.worst_continuity =
        std::max(audit.worst_continuity, jump - 1e-6 * scale);
  }
  audit.worst_positivity = std::max(audit.worst_positivity, 0.0);
  audit.worst_continuity = std::max(audit.worst_continuity, 0.0);
  return audit;
}

std::vector<ChamberVector> chamber_extreme_rays(const RootSystemData& rs) {
  std::vector<ChamberVector> rays;
  for (const Block& b : rs.blocks) {
    for (int k = 1; k < b.n; ++k) {
      Vec ray = Vec::Zero(rs.ambient_dim);
      for (int i = 0; i < b.n; ++i)
        ray[b.offset + i] = (i < k) ? 1.0 - double(k) / b.n
                                    : -double(k) / b.n;
      rays.push_back(ChamberVector{ray / ray.norm()});
    }
  }
  return rays;
}

namespace {

// Uniform-in-angle sweep between two unit vectors (geodesic on the sphere).
ChamberVector slerp(const ChamberVector& a, const ChamberVector& b, double t) {
  double cosphi = std::clamp(a.coords.dot(b.coords), -1.0, 1.0);
  double phi = std::acos(cosphi);
  if (phi < 1e-12) return a;
  Vec v = (std::sin((1.0 - t) * phi) * a.coords +
           std::sin(t * phi) * b.coords) /
          std::sin(phi);
  return ChamberVector{v / v.norm()};
}

void compositions(int total, int parts, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    current.push_back(v);
    compositions(total - v, parts - 1, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<ChamberVector> direction_grid(const RootSystemData& rs,
                                          int resolution) {
  if (resolution < 2) fail(ErrorKind::usage, "grid resolution must be >= 2");
  std::vector<ChamberVector> rays = chamber_extreme_rays(rs);
  if (rs.rank == 1) return {rays[0]};
  if (rs.rank == 2) {
    std::vector<ChamberVector> grid;
    grid.reserve(resolution);
    for (int i = 0; i < resolution; ++i)
      grid.push_back(slerp(rays[0], rays[1],
                           double(i) / double(resolution - 1)));
    return grid;
  }
  // rank >= 3: barycentric lattice over the extreme rays.
  int r = rs.rank;
  int m = 1;
  auto count = [&](int mm) {
    double c = 1.0;
    for (int i = 1; i <= r - 1; ++i) c *= double(mm + i) / double(i);
    return c;
  };
  while (count(m) < resolution) ++m;
  std::vector<std::vector<int>> lam;
  std::vector<int> cur;
  compositions(m, r, cur, lam);
  std::vector<ChamberVector> grid;
  grid.reserve(lam.size());
  for (const auto& weights : lam) {
    Vec v = Vec::Zero(rs.ambient_dim);
    for (int i = 0; i < r; ++i) v += double(weights[i]) * rays[i].coords;
    double n = v.norm();
    if (n > 1e-12) grid.push_back(ChamberVector{v / n});
  }
  return grid;
}

std::vector<ChamberVector> estimation_grid(const RootSystemData& rs,
                                           int resolution) {
  std::vector<ChamberVector> grid = direction_grid(rs, resolution);
  ChamberVector rh = rho_hat(rs);
  bool present = false;
  for (const ChamberVector& u : grid)
    if ((u.coords - rh.coords).norm() < 1e-9) {
      present = true;
      break;
    }
  if (!present) grid.push_back(rh);
  return grid;
}

}  // namespace wcg
