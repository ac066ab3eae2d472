#include "internal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qbayes::internal {

// Slack allowed on the minimum eigenvalue of a matrix that is PSD in exact
// arithmetic but was assembled from eq_tol-accurate pieces.
double assembled_slack(const CMatrix& m, const Tolerances& tol) {
  return std::max(tol.psd_tol, 10.0 * tol.eq_tol * std::max(1.0, max_abs(m)));
}

// Largest eigenvalue of Q^dagger (D - P_perp) Q, Q an orthonormal basis of
// range(P_perp). Positive values mean D exceeds P_perp somewhere.
double completion_excess(const CMatrix& d, const CMatrix& p_perp, const Tolerances& tol) {
  const CMatrix q = range_basis(p_perp, tol);
  if (q.cols() == 0) return 0.0;
  const CMatrix restricted = hermitian_part(q.adjoint() * d * q) -
                             CMatrix::Identity(q.cols(), q.cols());
  return hermitian_eig(restricted, tol).eigenvalues(0);
}

void require_density(const CMatrix& rho, Eigen::Index m, const Tolerances& tol, ErrorKind kind,
                     const std::string& what) {
  if (rho.rows() != m || rho.cols() != m) {
    throw Error(kind, what + " must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  if (!rho.allFinite()) throw Error(kind, what + " has non-finite entries");
  const double herm = hermitian_defect(rho);
  if (herm > tol.eq_tol) throw Error(kind, what + " is not Hermitian", herm);
  const auto psd = is_psd(hermitian_part(rho), tol);
  if (!psd.ok) throw Error(kind, what + " is not positive semidefinite", psd.min_eigenvalue);
  const double tr_err = std::abs(rho.trace() - Complex(1.0));
  if (tr_err > tol.eq_tol) throw Error(kind, what + " does not have unit trace", tr_err);
}

Channel channel_from_assembled(const CMatrix& choi, std::size_t dim_in, std::size_t dim_out,
                               const Tolerances& tol) {
  ChoiMatrix c{dim_in, dim_out, choi};
  const double slack = assembled_slack(choi, tol);
  Tolerances relaxed = tol;
  relaxed.psd_tol = std::max(tol.psd_tol, slack);
  try {
    return channel_of_choi(c, relaxed);
  } catch (const Error& e) {
    throw Error(ErrorKind::InternalInconsistency,
                std::string("assembled Choi matrix is not PSD: ") + e.what(), e.witness());
  }
}

}  // namespace qbayes::internal
