#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wcg/chamber.hpp"
#include "wcg/orbit.hpp"
#include "wcg/synth.hpp"

namespace wcg {

struct GrowthRateEstimate {
  double value = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double std_error = 0.0;
  int sample_count = 0;  // records inside the regression window
};

using GaugeFn = std::function<double(const ChamberVector&)>;

GaugeFn riemannian_gauge(const RootSystemData& rs);  // |H|
GaugeFn polyhedral_gauge(const RootSystemData& rs);  // <rho/|rho|, H>

// Least-squares slope of log N(R) over the top window_fraction of the
// radius range, where N(R) counts records with gauge(mu) <= R.
GrowthRateEstimate counting_exponent(const RootSystemData& rs,
                                     const OrbitDataset& ds,
                                     const GaugeFn& gauge,
                                     double window_fraction = 0.4);

// Two-stage estimate of the modified critical exponent: the polyhedral
// counting exponent tau when tau <= |rho|, otherwise |rho| plus the slope
// of the log of the rho-twisted partial sums. Clamped to [0, 2|rho|].
GrowthRateEstimate modified_critical_exponent(const RootSystemData& rs,
                                              const OrbitDataset& ds,
                                              double window_fraction = 0.4);

struct ConeSlope {
  double epsilon = 0.0;
  double slope = 0.0;
  double std_error = 0.0;
  int count = 0;  // records in the cone
  bool valid = false;
};

struct GrowthIndicatorEstimate {
  std::vector<ChamberVector> directions;
  std::vector<double> values;  // per direction; -inf when the cone is empty
  std::vector<double> cone_angles;
  bool extrapolated = false;
  std::vector<std::vector<ConeSlope>> table;  // per direction, per angle
};

// Directional counting exponents: per direction and cone angle, the slope
// of the log count of Cartan projections in the cone; per-direction value
// is the linear-in-epsilon extrapolation to 0 (or the smallest-angle
// slope). Directions whose smallest cone holds < 10 points report -inf.
GrowthIndicatorEstimate growth_indicator(
    const RootSystemData& rs, const OrbitDataset& ds,
    const std::vector<ChamberVector>& directions,
    const std::vector<double>& cone_angles, double window_fraction = 0.4,
    bool extrapolate = true);

struct PsiDeltaCheck {
  double delta = 0.0;
  double psi_sup = 0.0;
  double discrepancy = 0.0;
};

// delta = sup_H psi(H)/|H| cross-check between two estimates of the same
// dataset.
PsiDeltaCheck classical_exponent_from_psi_check(
    const GrowthIndicatorEstimate& est, const GrowthRateEstimate& delta);

// CSV table: direction_index,u_1..u_d,epsilon,slope,stderr rows followed
// by a '# summary' block. epsilon = 0 rows carry the per-direction value.
void write_indicator_csv(const GrowthIndicatorEstimate& est,
                         const std::string& dataset_fingerprint,
                         const std::string& path);

// Plot-ready radius versus log-count table for one gauge.
void write_counts_csv(const RootSystemData& rs, const OrbitDataset& ds,
                      const GaugeFn& gauge, const std::string& gauge_label,
                      const std::string& path);

}  // namespace wcg
