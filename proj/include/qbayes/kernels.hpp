#pragma once

#include <cstddef>
#include <vector>

#include "qbayes/linalg.hpp"

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version; both must agree to rounding.
namespace qbayes::kernels {

// Choi matrix sum_ij E_ij (x) F(E_ij) of F(B) = sum_a V_a B V_a^dagger,
// V_a of shape dim_out x dim_in.
CMatrix choi_from_kraus_serial(const std::vector<CMatrix>& kraus, std::size_t dim_in,
                               std::size_t dim_out);
CMatrix choi_from_kraus_parallel(const std::vector<CMatrix>& kraus, std::size_t dim_in,
                                 std::size_t dim_out);

// Max over matrix units E_ij (size m) and E_kl (size n) of
//   | tr(sigma_w G(E_ij) E_kl) - tr(rho_w E_ij F(E_kl)) |
// where G: M_m -> M_n and F: M_n -> M_m are given by their Choi matrices.
// The weights (q_y, p_x) are folded into sigma_w and rho_w by the caller.
double bayes_residual_serial(const CMatrix& choi_g, const CMatrix& choi_f,
                             const CMatrix& sigma_w, const CMatrix& rho_w);
double bayes_residual_parallel(const CMatrix& choi_g, const CMatrix& choi_f,
                               const CMatrix& sigma_w, const CMatrix& rho_w);

}  // namespace qbayes::kernels
