#include "wcg/cartan.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace wcg {

namespace {

// Entries above this make squared column norms overflow inside the SVD.
constexpr double kEntryLimit = 1e140;

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out))
    fail(ErrorKind::overflow, "integer matrix entry overflow");
  return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out))
    fail(ErrorKind::overflow, "integer matrix entry overflow");
  return out;
}

IntMatrix int_multiply(const IntMatrix& a, const IntMatrix& b) {
  IntMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      std::int64_t acc = 0;
      for (int k = 0; k < a.cols(); ++k)
        acc = checked_add(acc, checked_mul(a(i, k), b(k, j)));
      out(i, j) = acc;
    }
  return out;
}

std::int64_t int_det(const IntMatrix& m) {
  int n = static_cast<int>(m.rows());
  if (n == 1) return m(0, 0);
  if (n == 2)
    return checked_add(checked_mul(m(0, 0), m(1, 1)),
                       -checked_mul(m(0, 1), m(1, 0)));
  std::int64_t det = 0;
  for (int j = 0; j < n; ++j) {
    IntMatrix minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r) {
      int cc = 0;
      for (int c = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = m(r, c);
      }
    }
    std::int64_t term = checked_mul(m(0, j), int_det(minor));
    det = checked_add(det, (j % 2 == 0) ? term : -term);
  }
  return det;
}

// Inverse of an integer matrix with det +-1: the (sign-adjusted) adjugate.
IntMatrix int_inverse(const IntMatrix& m) {
  int n = static_cast<int>(m.rows());
  std::int64_t det = int_det(m);
  if (det != 1 && det != -1)
    fail(ErrorKind::domain, "exact inverse requires det = +-1");
  IntMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        IntMatrix minor(n - 1, n - 1);
        int rr = 0;
        for (int r = 0; r < n; ++r) {
          if (r == i) continue;
          int cc = 0;
          for (int c = 0; c < n; ++c) {
            if (c == j) continue;
            minor(rr, cc++) = m(r, c);
          }
          ++rr;
        }
        std::int64_t cof = int_det(minor);
        adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
      }
  }
  return det == 1 ? adj : IntMatrix(-adj);
}

// Cofactor determinant for small matrices. Eigen's dynamic-size
// determinant() routes through LU even for 2x2 and loses the exactness
// of integer-valued entries to cancellation.
double det_double(const Eigen::MatrixXd& m) {
  switch (m.rows()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      return m.determinant();
  }
}

}  // namespace

GroupElement identity_element(const GroupDescriptor& desc) {
  GroupElement g;
  std::vector<IntMatrix> exact;
  for (int n : desc.factors) {
    g.factors.push_back(Eigen::MatrixXd::Identity(n, n));
    exact.push_back(IntMatrix::Identity(n, n));
  }
  g.exact = std::move(exact);
  return g;
}

GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  if (a.factors.size() != b.factors.size())
    fail(ErrorKind::domain, "multiply: factor count mismatch");
  GroupElement out;
  out.factors.reserve(a.factors.size());
  for (std::size_t i = 0; i < a.factors.size(); ++i)
    out.factors.push_back(a.factors[i] * b.factors[i]);
  if (a.has_exact() && b.has_exact()) {
    std::vector<IntMatrix> exact;
    exact.reserve(a.factors.size());
    for (std::size_t i = 0; i < a.factors.size(); ++i)
      exact.push_back(int_multiply((*a.exact)[i], (*b.exact)[i]));
    out.exact = std::move(exact);
  }
  return out;
}

GroupElement inverse(const GroupElement& g) {
  GroupElement out;
  out.factors.reserve(g.factors.size());
  if (g.has_exact()) {
    std::vector<IntMatrix> exact;
    for (const IntMatrix& m : *g.exact) exact.push_back(int_inverse(m));
    for (const IntMatrix& m : exact) out.factors.push_back(m.cast<double>());
    out.exact = std::move(exact);
    return out;
  }
  for (const Eigen::MatrixXd& m : g.factors) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible())
      fail(ErrorKind::domain, "inverse of a singular factor");
    out.factors.push_back(lu.inverse());
  }
  return out;
}

double unimodular_defect(const GroupElement& g) {
  if (g.has_exact()) {
    for (const IntMatrix& m : *g.exact) {
      std::int64_t d = int_det(m);
      if (d != 1 && d != -1) return 1.0;  // integer case is all-or-nothing
    }
    return 0.0;
  }
  double worst = 0.0;
  for (const Eigen::MatrixXd& m : g.factors)
    worst = std::max(worst, std::abs(std::abs(det_double(m)) - 1.0));
  return worst;
}

void validate_element(const GroupDescriptor& desc, const GroupElement& g,
                      double tol) {
  if (g.factors.size() != desc.factors.size())
    fail(ErrorKind::domain, "element has wrong number of factors");
  for (std::size_t i = 0; i < g.factors.size(); ++i) {
    const Eigen::MatrixXd& m = g.factors[i];
    if (m.rows() != desc.factors[i] || m.cols() != desc.factors[i])
      fail(ErrorKind::domain, "factor " + std::to_string(i) +
                                  " has wrong dimensions");
    if (!m.allFinite())
      fail(ErrorKind::overflow, "factor " + std::to_string(i) +
                                    " has non-finite entries");
  }
  double defect = unimodular_defect(g);
  if (defect > tol)
    fail(ErrorKind::domain,
         "element is not unimodular: |det|-1 defect " +
             std::to_string(defect));
}

ChamberVector cartan_projection(const RootSystemData& rs,
                                const GroupElement& g) {
  if (static_cast<int>(g.factors.size()) !=
      static_cast<int>(rs.blocks.size()))
    fail(ErrorKind::domain, "cartan projection: factor count mismatch");
  Vec mu = Vec::Zero(rs.ambient_dim);
  for (std::size_t f = 0; f < g.factors.size(); ++f) {
    const Eigen::MatrixXd& m = g.factors[f];
    const Block& b = rs.blocks[f];
    if (m.rows() != b.n || m.cols() != b.n)
      fail(ErrorKind::domain, "cartan projection: factor size mismatch");
    if (!m.allFinite() || m.cwiseAbs().maxCoeff() > kEntryLimit)
      fail(ErrorKind::overflow,
           "matrix entries overflow the representable range");
    // Jacobi SVD keeps small singular values accurate; forming g^T g
    // would square the condition number and lose them.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Vec& sv = svd.singularValues();
    if (sv[b.n - 1] <= 0.0 || !std::isfinite(sv[0]))
      fail(ErrorKind::domain, "cartan projection of a singular matrix");
    Vec logs(b.n);
    double log_scale = 0.0;
    for (int i = 0; i < b.n; ++i) {
      logs[i] = std::log(sv[i]);
      log_scale += std::abs(logs[i]);
    }
    double drift = logs.sum();  // = log|det|, zero for unimodular input
    if (std::abs(drift) > 1e-6 * (1.0 + log_scale))
      fail(ErrorKind::domain,
           "cartan projection: factor is not unimodular (log|det| = " +
               std::to_string(drift) + ")");
    logs.array() -= drift / b.n;
    mu.segment(b.offset, b.n) = logs;
  }
  return ChamberVector{mu};
}

double riemannian_length(const RootSystemData& rs, const GroupElement& g) {
  return cartan_projection(rs, g).coords.norm();
}

}  // namespace wcg
