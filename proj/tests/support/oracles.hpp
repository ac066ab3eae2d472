#pragma once

// Test-only reference computations. They share no code with the library
// beyond the Eigen types: every quantity is recomputed from its definition.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace qbayes::oracle {

using Mat = Eigen::MatrixXcd;
using Cx = std::complex<double>;
using Map = std::function<Mat(const Mat&)>;

inline double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline Mat unit(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  Mat e = Mat::Zero(d, d);
  e(i, j) = 1.0;
  return e;
}

// sum_a V_a B V_a^dagger by explicit index sums.
inline Mat kraus_apply(const std::vector<Mat>& kraus, const Mat& b) {
  const Eigen::Index m = kraus.empty() ? 0 : kraus[0].rows();
  Mat out = Mat::Zero(m, m);
  for (const auto& v : kraus)
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) {
        Cx s = 0.0;
        for (Eigen::Index i = 0; i < b.rows(); ++i)
          for (Eigen::Index j = 0; j < b.cols(); ++j) s += v(r, i) * b(i, j) * std::conj(v(c, j));
        out(r, c) += s;
      }
  return out;
}

inline Map as_map(const std::vector<Mat>& kraus) {
  return [kraus](const Mat& b) { return kraus_apply(kraus, b); };
}

inline Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

// Choi matrix from the definition sum_ij E_ij (x) psi(E_ij).
inline Mat choi(const Map& psi, Eigen::Index n) {
  Mat out;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Mat term = kron(unit(n, i, j), psi(unit(n, i, j)));
      if (out.size() == 0) out = Mat::Zero(term.rows(), term.cols());
      out += term;
    }
  return out;
}

inline Mat partial_trace_first(const Mat& m, Eigen::Index d1, Eigen::Index d2) {
  Mat out = Mat::Zero(d2, d2);
  for (Eigen::Index k = 0; k < d2; ++k)
    for (Eigen::Index l = 0; l < d2; ++l)
      for (Eigen::Index a = 0; a < d1; ++a) out(k, l) += m(a * d2 + k, a * d2 + l);
  return out;
}

// Moore-Penrose pseudoinverse through the SVD.
inline Mat pinv(const Mat& a, double rel = 1e-9) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = rel * std::max(1.0, s.size() ? s(0) : 0.0);
  Mat sinv = Mat::Zero(a.cols(), a.rows());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) sinv(k, k) = 1.0 / s(k);
  return svd.matrixV() * sinv * svd.matrixU().adjoint();
}

// max over matrix units of |tr(sigma G(E_ij) E_kl) - tr(rho E_ij F(E_kl))|.
inline double bayes_residual(const Map& f, const Map& g, const Mat& rho, const Mat& sigma) {
  const Eigen::Index m = rho.rows();
  const Eigen::Index n = sigma.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Mat ga = g(unit(m, i, j));
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l) {
          const Cx lhs = (sigma * ga * unit(n, k, l)).trace();
          const Cx rhs = (rho * unit(m, i, j) * f(unit(n, k, l))).trace();
          worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
  return worst;
}

// Bayes' rule g(x|y) = f(y|x) p_x / q_y; columns with q_y = 0 left at -1.
inline Eigen::MatrixXd classical_bayes(const Eigen::MatrixXd& f, const Eigen::VectorXd& p) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(f.cols(), f.rows(), -1.0);
  for (Eigen::Index y = 0; y < f.rows(); ++y) {
    double q = 0.0;
    for (Eigen::Index x = 0; x < f.cols(); ++x) q += f(y, x) * p(x);
    if (q == 0.0) continue;
    for (Eigen::Index x = 0; x < f.cols(); ++x) g(x, y) = f(y, x) * p(x) / q;
  }
  return g;
}

inline Mat sqrt_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  Eigen::VectorXd l = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * l.cast<Cx>().asDiagonal() * es.eigenvectors().adjoint();
}

inline double min_eig(const Mat& a) {
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (a + a.adjoint())).eigenvalues().minCoeff();
}

}  // namespace qbayes::oracle
