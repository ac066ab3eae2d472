#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "qbayes/error.hpp"

namespace qbayes {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

struct Tolerances {
  double rank_tol = 1e-9;  // relative: lambda counts iff lambda > rank_tol * max(1, lambda_max)
  double psd_tol = 1e-9;   // absolute slack on the minimum eigenvalue
  double eq_tol = 1e-8;    // entrywise max-norm equality

  // Throws InvalidTolerance unless each value lies in (0, 1e-3].
  void validate() const;
};

struct HermitianSpectrum {
  RVector eigenvalues;   // descending
  CMatrix eigenvectors;  // columns, orthonormal
};

struct PsdCheck {
  bool ok = true;
  double min_eigenvalue = 0.0;
  CVector witness;  // eigenvector of min_eigenvalue; empty when ok
};

double max_abs(const CMatrix& a);
double hermitian_defect(const CMatrix& a);  // max |A - A^dagger|
CMatrix hermitian_part(const CMatrix& a);   // (A + A^dagger) / 2

void require_square(const CMatrix& a, const char* what);
void require_hermitian(const CMatrix& a, const Tolerances& tol, const char* what);

HermitianSpectrum hermitian_eig(const CMatrix& a, const Tolerances& tol = {});
PsdCheck is_psd(const CMatrix& a, const Tolerances& tol = {});

// Eigenvalue threshold below which a spectrum entry is treated as zero.
double rank_threshold(const RVector& eigenvalues, const Tolerances& tol);

CMatrix support(const CMatrix& a, const Tolerances& tol = {});
CMatrix pseudoinverse(const CMatrix& a, const Tolerances& tol = {});
CMatrix psd_sqrt(const CMatrix& a, const Tolerances& tol = {});

// Orthonormal basis (columns) of the range of a PSD matrix.
CMatrix range_basis(const CMatrix& a, const Tolerances& tol = {});

CMatrix tensor(const CMatrix& a, const CMatrix& b);
CMatrix partial_trace_first(const CMatrix& m, std::size_t dim_first,
                            std::size_t dim_second);

// E_ij of size d (0-indexed).
CMatrix matrix_unit(std::size_t d, std::size_t i, std::size_t j);

}  // namespace qbayes
