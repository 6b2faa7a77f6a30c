#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "wcg/chamber.hpp"

namespace wcg {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Element of a product of SL(n,R) factors. The optional integer matrices
// mirror the float ones exactly and are used only for deduplication.
struct GroupElement {
  std::vector<Eigen::MatrixXd> factors;
  std::optional<std::vector<IntMatrix>> exact;

  bool has_exact() const { return exact.has_value(); }
};

GroupElement identity_element(const GroupDescriptor& desc);

// Product; exact representations propagate with overflow checking.
GroupElement multiply(const GroupElement& a, const GroupElement& b);

// Inverse; exact integer inverse via the adjugate when available.
GroupElement inverse(const GroupElement& g);

// Largest per-factor distance of |det| from 1.
double unimodular_defect(const GroupElement& g);

// Checks shape against the descriptor and |det +- 1| <= tol per factor.
void validate_element(const GroupDescriptor& desc, const GroupElement& g,
                      double tol = 1e-9);

// Cartan projection: per factor the trace-free vector of log singular
// values in nonincreasing order, concatenated across factors. Lands in
// the closed chamber. Throws on singular/overflowing/non-unimodular input.
ChamberVector cartan_projection(const RootSystemData& rs,
                                const GroupElement& g);

// d(o, g.o) = |mu_+(g)| under the trace form.
double riemannian_length(const RootSystemData& rs, const GroupElement& g);

}  // namespace wcg
