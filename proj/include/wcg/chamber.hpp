#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "wcg/errors.hpp"

namespace wcg {

using Vec = Eigen::VectorXd;

// Product of special-linear factors, G = SL(n_1,R) x ... x SL(n_k,R).
struct GroupDescriptor {
  std::vector<int> factors;

  int rank() const;
  int ambient_dim() const;
  std::string to_string() const;  // canonical form, e.g. "sl2xsl3"
  bool operator==(const GroupDescriptor&) const = default;

  // Parses "sl2", "sl3xsl2", ... Throws on anything else.
  static GroupDescriptor parse(std::string_view text);
};

struct Block {
  int offset;
  int n;
};

// Point of the Cartan subspace in ambient diagonal coordinates,
// trace-free within each factor block.
struct ChamberVector {
  Vec coords;

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
};

struct PositiveRoot {
  Vec alpha;
  int multiplicity;
};

// Root data of type A_{n-1} per factor under the per-block trace form.
struct RootSystemData {
  GroupDescriptor group;
  int rank = 0;
  int ambient_dim = 0;
  std::vector<Block> blocks;
  std::vector<PositiveRoot> positive_roots;
  std::vector<Vec> simple_roots;
  ChamberVector rho;
  double rho_norm = 0.0;
  std::string form = "trace";
};

RootSystemData build_root_system(const GroupDescriptor& desc);

// Trace-form pairing; positive definite on the trace-free subspace.
double pairing(const RootSystemData& rs, const ChamberVector& a,
               const ChamberVector& b);
double norm(const RootSystemData& rs, const ChamberVector& v);

// Unit vector along rho.
ChamberVector rho_hat(const RootSystemData& rs);

// Largest per-block |sum of coordinates|.
double block_sum_defect(const RootSystemData& rs, const ChamberVector& v);

// Validating constructor: checks dimension and trace-freeness (1e-12).
ChamberVector chamber_vector(const RootSystemData& rs, Vec coords);

// Orthogonal projection onto the trace-free subspace (per block).
ChamberVector project_trace_free(const RootSystemData& rs, const Vec& coords);

// Closed chamber: <alpha,H> >= -tol for all positive roots. The default
// tolerance absorbs rounding from downstream singular value computations.
bool in_closed_chamber(const RootSystemData& rs, const ChamberVector& v,
                       double tol = 1e-12);

// Reflection in the i-th simple root (coordinate swap within a block).
ChamberVector simple_reflection(const RootSystemData& rs, int i,
                                const ChamberVector& v);

// Polyhedral/Riemannian hybrid gauge
//   d_s(H) = min{s,|rho|} <rho/|rho|, H> + max{s-|rho|, 0} |H|.
// Requires H in the closed chamber.
double d_s(const RootSystemData& rs, double s, const ChamberVector& h);

// Same gauge written as the two-branch case split; must agree with d_s.
double d_s_cases(const RootSystemData& rs, double s, const ChamberVector& h);

// One-parameter family of gauges d_s(H), homogeneous of degree one in H,
// nondecreasing and continuous in s, with d_0 = 0.
struct GaugeFamily {
  std::string label;
  std::function<double(double, const ChamberVector&)> eval;

  double operator()(double s, const ChamberVector& h) const {
    return eval(s, h);
  }
};

GaugeFamily riemannian_family(const RootSystemData& rs);  // s |H|
GaugeFamily polyhedral_family(const RootSystemData& rs);  // d_s above
// weight*a + (1-weight)*b
GaugeFamily mix_family(const GaugeFamily& a, const GaugeFamily& b,
                       double weight);

// Randomized audit of the gauge-family contract. Violations are reported
// as magnitudes; zero means the property held on every sample.
struct GaugeAudit {
  double worst_d0 = 0.0;           // |d_0(H)|
  double worst_positivity = 0.0;   // max(0, -d_s(H)) for s>0, H != 0
  double worst_homogeneity = 0.0;  // |d_s(tH) - t d_s(H)| / t
  double worst_monotonicity = 0.0; // max(0, d_{s1}(H) - d_{s2}(H)), s1<s2
  double worst_continuity = 0.0;   // small-step excess beyond 1e-6 scale
  int samples = 0;

  bool passed(double tol = 1e-12) const;
};

GaugeAudit verify_gauge_family(const GaugeFamily& g, const RootSystemData& rs,
                               int samples, std::uint64_t seed);

// Extreme rays of the closed chamber (fundamental coweight directions),
// normalized. The chamber is their nonnegative span.
std::vector<ChamberVector> chamber_extreme_rays(const RootSystemData& rs);

// Unit directions covering the chamber's unit-sphere patch. Rank 1 yields
// the single ray; rank 2 sweeps the arc uniformly in angle (endpoints
// included); higher ranks use a barycentric lattice over the extreme rays.
std::vector<ChamberVector> direction_grid(const RootSystemData& rs,
                                          int resolution);

// direction_grid plus the rho direction (deduplicated); preferred for
// sup-recovery in estimators and spectrum scans.
std::vector<ChamberVector> estimation_grid(const RootSystemData& rs,
                                           int resolution);

// Deterministic sample of the closed chamber: random nonnegative
// combination of extreme rays, scaled to roughly unit size.
ChamberVector random_chamber_vector(const RootSystemData& rs,
                                    std::uint64_t& state);

// xorshift-style generator used for reproducible sampling in audits.
std::uint64_t split_mix(std::uint64_t& state);
double uniform01(std::uint64_t& state);

}  // namespace wcg
