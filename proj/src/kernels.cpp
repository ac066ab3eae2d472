#include "qbayes/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qbayes::kernels {

namespace {

void check_kraus_shapes(const std::vector<CMatrix>& kraus, Eigen::Index n, Eigen::Index m) {
  for (const auto& v : kraus) {
    if (v.rows() != m || v.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch,
                  "Kraus operator is " + std::to_string(v.rows()) + "x" +
                      std::to_string(v.cols()) + ", expected " + std::to_string(m) + "x" +
                      std::to_string(n));
    }
  }
}

// Block (i, j) of the Choi matrix: sum_a V_a[:, i] V_a[:, j]^dagger.
void fill_choi_row(const std::vector<CMatrix>& kraus, Eigen::Index i, Eigen::Index n,
                   Eigen::Index m, CMatrix& out) {
  for (Eigen::Index j = 0; j < n; ++j) {
    auto blk = out.block(i * m, j * m, m, m);
    blk.setZero();
    for (const auto& v : kraus) blk.noalias() += v.col(i) * v.col(j).adjoint();
  }
}

struct ResidualShape {
  Eigen::Index m;
  Eigen::Index n;
};

ResidualShape residual_shape(const CMatrix& choi_g, const CMatrix& choi_f,
                             const CMatrix& sigma_w, const CMatrix& rho_w) {
  const Eigen::Index m = rho_w.rows();
  const Eigen::Index n = sigma_w.rows();
  if (rho_w.cols() != m || sigma_w.cols() != n || choi_g.rows() != m * n ||
      choi_g.cols() != m * n || choi_f.rows() != m * n || choi_f.cols() != m * n) {
    throw Error(ErrorKind::DimensionMismatch, "Bayes residual operands have inconsistent shapes");
  }
  return {m, n};
}

// Residual contribution of a single input unit E_ij of G.
double residual_at(const CMatrix& choi_g, const std::vector<CMatrix>& right,
                   const CMatrix& sigma_w, Eigen::Index i, Eigen::Index j, Eigen::Index n) {
  // tr(sigma G(E_ij) E_kl) = (sigma G(E_ij))(l, k)
  // tr(rho E_ij F(E_kl))   = (F(E_kl) rho)(j, i)
  const CMatrix left = sigma_w * choi_g.block(i * n, j * n, n, n);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l)
      worst = std::max(worst, std::abs(left(l, k) - right[k * n + l](j, i)));
  return worst;
}

std::vector<CMatrix> right_products(const CMatrix& choi_f, const CMatrix& rho_w, Eigen::Index m,
                                    Eigen::Index n) {
  std::vector<CMatrix> right(static_cast<std::size_t>(n * n));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l)
      right[k * n + l] = choi_f.block(k * m, l * m, m, m) * rho_w;
  return right;
}

}  // namespace

CMatrix choi_from_kraus_serial(const std::vector<CMatrix>& kraus, std::size_t dim_in,
                               std::size_t dim_out) {
  const auto n = static_cast<Eigen::Index>(dim_in);
  const auto m = static_cast<Eigen::Index>(dim_out);
  check_kraus_shapes(kraus, n, m);
  CMatrix out(n * m, n * m);
  for (Eigen::Index i = 0; i < n; ++i) fill_choi_row(kraus, i, n, m, out);
  return out;
}

CMatrix choi_from_kraus_parallel(const std::vector<CMatrix>& kraus, std::size_t dim_in,
                                 std::size_t dim_out) {
  const auto n = static_cast<Eigen::Index>(dim_in);
  const auto m = static_cast<Eigen::Index>(dim_out);
  check_kraus_shapes(kraus, n, m);
  CMatrix out(n * m, n * m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) fill_choi_row(kraus, i, n, m, out);
  return out;
}

double bayes_residual_serial(const CMatrix& choi_g, const CMatrix& choi_f,
                             const CMatrix& sigma_w, const CMatrix& rho_w) {
  const ResidualShape shape = residual_shape(choi_g, choi_f, sigma_w, rho_w);
  const Eigen::Index m = shape.m;
  const Eigen::Index n = shape.n;
  const auto right = right_products(choi_f, rho_w, m, n);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      worst = std::max(worst, residual_at(choi_g, right, sigma_w, i, j, n));
  return worst;
}

double bayes_residual_parallel(const CMatrix& choi_g, const CMatrix& choi_f,
                               const CMatrix& sigma_w, const CMatrix& rho_w) {
  const ResidualShape shape = residual_shape(choi_g, choi_f, sigma_w, rho_w);
  const Eigen::Index m = shape.m;
  const Eigen::Index n = shape.n;
  const auto right = right_products(choi_f, rho_w, m, n);
  const Eigen::Index total = m * m;
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (Eigen::Index t = 0; t < total; ++t)
    worst = std::max(worst, residual_at(choi_g, right, sigma_w, t / m, t % m, n));
  return worst;
}

}  // namespace qbayes::kernels
