#pragma once

#include <cstddef>
#include <string>

#include "qbayes/channel.hpp"
#include "qbayes/linalg.hpp"

// Helpers shared by the matrix and direct-sum engines.
namespace qbayes::internal {

// Slack allowed on the minimum eigenvalue of a matrix that is PSD in exact
// arithmetic but was assembled from eq_tol-accurate pieces.
double assembled_slack(const CMatrix& m, const Tolerances& tol);

// Largest eigenvalue of Q^dagger D Q - 1, Q an orthonormal basis of range(p_perp).
double completion_excess(const CMatrix& d, const CMatrix& p_perp, const Tolerances& tol);

void require_density(const CMatrix& rho, Eigen::Index m, const Tolerances& tol, ErrorKind kind,
                     const std::string& what);

// channel_of_choi with PSD slack; a failure here is an internal inconsistency.
Channel channel_from_assembled(const CMatrix& choi, std::size_t dim_in, std::size_t dim_out,
                               const Tolerances& tol);

}  // namespace qbayes::internal
