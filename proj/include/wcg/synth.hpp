#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wcg/chamber.hpp"
#include "wcg/orbit.hpp"

namespace wcg {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Angular subcone of the closed chamber around a unit axis.
struct SupportCone {
  ChamberVector axis;
  double half_angle = 0.0;
};

// Analytic growth-indicator model: degree-1 homogeneous, finite on its
// support cone, -inf outside, psi(0) = 0.
struct PsiModel {
  enum class Kind { linear, min_linear, spherical_cap };
  Kind kind = Kind::linear;
  std::vector<ChamberVector> forms;  // linear functionals via the pairing
  double cap = 0.0;                  // spherical_cap slope
  std::optional<SupportCone> support;
  bool admissible = false;  // psi <= 2 rho verified on a grid
  std::string label;
};

PsiModel linear_model(const RootSystemData& rs, const ChamberVector& phi,
                      std::optional<SupportCone> support = std::nullopt);
PsiModel min_linear_model(const RootSystemData& rs,
                          std::vector<ChamberVector> forms,
                          std::optional<SupportCone> support = std::nullopt);
PsiModel spherical_cap_model(const RootSystemData& rs, double c,
                             std::optional<SupportCone> support = std::nullopt);

// Homogeneous evaluation; -inf outside the support cone; psi(0) = 0.
// H must lie in the closed chamber.
double evaluate_psi(const RootSystemData& rs, const PsiModel& m,
                    const ChamberVector& h);

struct SynthConfig {
  int resolution = 49;      // direction grid resolution (>= 2)
  double r_max = 10.0;      // Riemannian radius cutoff
  std::uint64_t seed = 0;
  double jitter = 0.0;      // direction perturbation, in half grid cells
  std::uint64_t budget = 4'000'000;  // emitted record budget
  // When set, counts beyond the budget are refused instead of subsampled
  // with a uniform stride.
  bool strict_counts = false;
};

struct SynthDetail {
  std::vector<ChamberVector> directions;
  std::vector<double> psi_values;
  std::vector<std::uint64_t> emitted;  // points per direction
  std::uint64_t stride = 1;
};

// Deterministic synthetic orbit: for each grid direction u with
// psi(u) > 0, points at radii log(k * stride)/psi(u), realizing
// per-direction cone counts floor(e^{psi(u) R} / stride). stride = 1
// whenever the exact counts fit the budget.
OrbitDataset sample_orbit(const RootSystemData& rs, const PsiModel& m,
                          const SynthConfig& cfg,
                          SynthDetail* detail = nullptr);

}  // namespace wcg
