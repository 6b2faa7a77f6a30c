#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wcg/chamber.hpp"
#include "wcg/estimators.hpp"
#include "wcg/synth.hpp"

namespace wcg {

// Growth indicator as direction/value samples; -inf marks directions
// where it is undefined (outside the limit cone).
struct PsiSamples {
  std::vector<ChamberVector> directions;  // unit vectors in the chamber
  std::vector<double> values;
};

PsiSamples psi_samples_from_model(const RootSystemData& rs, const PsiModel& m,
                                  int resolution = 2048);
PsiSamples psi_samples_from_estimate(const GrowthIndicatorEstimate& est);

struct PsiAnalysis {
  double delta_tilde = 0.0;
  double sup_ratio = 0.0;  // sup psi(H) |rho| / <rho,H>
  double sup_gap = 0.0;    // sup (psi(H) - <rho,H>)/|H|
  bool psi_le_rho = false;
  bool degenerate = false;  // psi = -inf on every direction
};

// Both branches of the delta-tilde / psi relation. Models get local
// refinement around the best grid cell; sample sets are evaluated as-is.
PsiAnalysis analyze_psi(const RootSystemData& rs, const PsiSamples& samples);
PsiAnalysis analyze_psi(const RootSystemData& rs, const PsiModel& m,
                        int resolution = 2048);

double delta_tilde_from_psi(const RootSystemData& rs, const PsiModel& m,
                            int resolution = 2048);
double delta_tilde_from_psi(const RootSystemData& rs,
                            const PsiSamples& samples);

// lambda_0 from the modified critical exponent; input clamped to
// [0, 2|rho|].
double lambda0_from_delta_tilde(const RootSystemData& rs, double delta_tilde);

// lambda_0 directly from the growth indicator.
double lambda0_from_psi(const RootSystemData& rs, const PsiModel& m,
                        int resolution = 2048);
double lambda0_from_psi(const RootSystemData& rs, const PsiSamples& samples);

struct Lemma21Report {
  double inf_s = 0.0;          // inf{s : d_s > psi on the grid}
  double margin_first = 0.0;   // inf_s - delta
  double margin_second = 0.0;  // min_H (d_delta(H) - psi(H))
  bool ok(double tol = 1e-6) const {
    return margin_first >= -tol && margin_second >= -tol;
  }
};

// Bounds of the generic gauge-family lemma for a supplied convergence
// exponent delta. Throws when d_s never dominates psi up to s = 4|rho|.
Lemma21Report lemma21_bounds(const RootSystemData& rs,
                             const PsiSamples& samples, const GaugeFamily& g,
                             double delta);
Lemma21Report lemma21_bounds(const RootSystemData& rs, const PsiModel& m,
                             const GaugeFamily& g, double delta,
                             int resolution = 2048);

enum class Provenance { analytic, estimated, manual };
std::string to_string(Provenance p);

struct TaggedValue {
  double value = 0.0;
  Provenance prov = Provenance::analytic;
};

struct ConditionInputs {
  std::optional<TaggedValue> delta;
  std::optional<TaggedValue> delta_tilde;
  std::optional<PsiSamples> psi;
  Provenance psi_prov = Provenance::analytic;
  std::optional<bool> lattice;   // metadata only, never computed
  std::optional<bool> tempered;  // metadata only, never computed
};

struct SpectralReport {
  std::optional<double> delta;
  std::optional<double> delta_tilde;
  std::optional<double> lambda0_from_delta_tilde;
  std::optional<double> lambda0_from_psi;
  double lambda0 = 0.0;  // value the flags refer to

  std::optional<bool> cond_A, cond_B, cond_C;
  std::optional<bool> fig_i, fig_ii, fig_iv, fig_v, fig_vi;
  std::optional<bool> lattice, tempered;

  bool consistent = true;
  std::string message;
  std::string tol_regime;  // "analytic" or "estimated"
  double tol = 0.0;
  std::vector<std::pair<std::string, std::string>> sources;
};

// Equivalence flags (A),(B),(C) and the large-exponent flags (i),(ii),
// (iv),(v),(vi). Condition (D) and finite covolume are recorded from the
// supplied metadata only. Inconsistent inputs withhold all flags.
SpectralReport check_conditions(const RootSystemData& rs,
                                const ConditionInputs& inputs);

void write_report_text(const SpectralReport& report, const std::string& path);
void write_report_csv(const SpectralReport& report, const std::string& path);
std::string report_to_text(const SpectralReport& report);

}  // namespace wcg
