#include "qbayes/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qbayes {

void Tolerances::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !(v <= 1e-3)) {
      throw Error(ErrorKind::InvalidTolerance,
                  std::string(name) + " must lie in (0, 1e-3], got " + std::to_string(v), v);
    }
  };
  check(rank_tol, "rank_tol");
  check(psd_tol, "psd_tol");
  check(eq_tol, "eq_tol");
}

double max_abs(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

double hermitian_defect(const CMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return max_abs(a - a.adjoint());
}

CMatrix hermitian_part(const CMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::NotSquare, std::string(what) + " is " + std::to_string(a.rows()) +
                                          "x" + std::to_string(a.cols()));
  }
}

void require_hermitian(const CMatrix& a, const Tolerances& tol, const char* what) {
  require_square(a, what);
  const double d = hermitian_defect(a);
  if (!(d <= tol.eq_tol)) {
    throw Error(ErrorKind::NotHermitian,
                std::string(what) + " is not Hermitian (max asymmetry " + std::to_string(d) + ")", d);
  }
}

HermitianSpectrum hermitian_eig(const CMatrix& a, const Tolerances& tol) {
  require_hermitian(a, tol, "hermitian_eig input");
  if (!a.allFinite()) throw Error(ErrorKind::NoConvergence, "input contains non-finite entries");
  HermitianSpectrum out;
  if (a.rows() == 0) {
    out.eigenvalues = RVector(0);
    out.eigenvectors = CMatrix(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "Hermitian eigensolver did not converge");
  }
  // Eigen returns ascending order.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

PsdCheck is_psd(const CMatrix& a, const Tolerances& tol) {
  PsdCheck out;
  if (a.rows() == 0) return out;
  const auto spec = hermitian_eig(a, tol);
  const Eigen::Index last = spec.eigenvalues.size() - 1;
  out.min_eigenvalue = spec.eigenvalues(last);
  out.ok = out.min_eigenvalue >= -tol.psd_tol;
  if (!out.ok) out.witness = spec.eigenvectors.col(last);
  return out;
}

double rank_threshold(const RVector& eigenvalues, const Tolerances& tol) {
  const double top = eigenvalues.size() ? eigenvalues(0) : 0.0;
  return tol.rank_tol * std::max(1.0, top);
}

namespace {

HermitianSpectrum psd_spectrum(const CMatrix& a, const Tolerances& tol, const char* what) {
  auto spec = hermitian_eig(a, tol);
  if (spec.eigenvalues.size() && spec.eigenvalues(spec.eigenvalues.size() - 1) < -tol.psd_tol) {
    const double w = spec.eigenvalues(spec.eigenvalues.size() - 1);
    throw Error(ErrorKind::NotPSD,
                std::string(what) + " has eigenvalue " + std::to_string(w), w);
  }
  return spec;
}

template <class Fn>
CMatrix spectral_function(const CMatrix& a, const Tolerances& tol, const char* what, Fn fn) {
  const auto spec = psd_spectrum(a, tol, what);
  const double thr = rank_threshold(spec.eigenvalues, tol);
  const Eigen::Index n = a.rows();
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    const double lam = spec.eigenvalues(k);
    if (!(lam > thr)) break;
    const auto u = spec.eigenvectors.col(k);
    out.noalias() += fn(lam) * (u * u.adjoint());
  }
  return hermitian_part(out);
}

}  // namespace

CMatrix support(const CMatrix& a, const Tolerances& tol) {
  return spectral_function(a, tol, "support input", [](double) { return 1.0; });
}

CMatrix pseudoinverse(const CMatrix& a, const Tolerances& tol) {
  return spectral_function(a, tol, "pseudoinverse input", [](double l) { return 1.0 / l; });
}

CMatrix psd_sqrt(const CMatrix& a, const Tolerances& tol) {
  return spectral_function(a, tol, "psd_sqrt input", [](double l) { return std::sqrt(l); });
}

CMatrix range_basis(const CMatrix& a, const Tolerances& tol) {
  const auto spec = psd_spectrum(a, tol, "range_basis input");
  const double thr = rank_threshold(spec.eigenvalues, tol);
  Eigen::Index r = 0;
  while (r < spec.eigenvalues.size() && spec.eigenvalues(r) > thr) ++r;
  return spec.eigenvectors.leftCols(r);
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix partial_trace_first(const CMatrix& m, std::size_t dim_first, std::size_t dim_second) {
  const auto d1 = static_cast<Eigen::Index>(dim_first);
  const auto d2 = static_cast<Eigen::Index>(dim_second);
  if (m.rows() != d1 * d2 || m.cols() != d1 * d2) {
    throw Error(ErrorKind::DimensionMismatch,
                "partial trace expects side " + std::to_string(d1 * d2) + ", got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  CMatrix out = CMatrix::Zero(d2, d2);
  for (Eigen::Index i = 0; i < d1; ++i) out += m.block(i * d2, i * d2, d2, d2);
  return out;
}

CMatrix matrix_unit(std::size_t d, std::size_t i, std::size_t j) {
  CMatrix e = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return e;
}

}  // namespace qbayes
