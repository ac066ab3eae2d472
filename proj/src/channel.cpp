#include "qbayes/channel.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "qbayes/kernels.hpp"

namespace qbayes {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void check_choi_shape(const ChoiMatrix& c) {
  const Eigen::Index side = idx(c.dim_in * c.dim_out);
  if (c.matrix.rows() != side || c.matrix.cols() != side) {
    throw Error(ErrorKind::DimensionMismatch,
                "Choi matrix must have side " + std::to_string(side) + ", got " +
                    std::to_string(c.matrix.rows()) + "x" + std::to_string(c.matrix.cols()));
  }
}

// Inverse of the vectorization v[i*m + k] = V(k, i).
CMatrix unvec(const CVector& v, std::size_t dim_in, std::size_t dim_out) {
  const Eigen::Index n = idx(dim_in);
  const Eigen::Index m = idx(dim_out);
  CMatrix k(m, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index r = 0; r < m; ++r) k(r, i) = v(i * m + r);
  return k;
}

bool is_unitary(const CMatrix& u, const Tolerances& tol) {
  if (u.rows() != u.cols()) return false;
  return max_abs(u * u.adjoint() - CMatrix::Identity(u.rows(), u.rows())) <= tol.eq_tol;
}

}  // namespace

CMatrix ChoiMatrix::image_of_unit(std::size_t i, std::size_t j) const {
  const Eigen::Index m = idx(dim_out);
  return matrix.block(idx(i) * m, idx(j) * m, m, m);
}

Channel::Channel(std::size_t dim_in, std::size_t dim_out, std::vector<CMatrix> kraus)
    : dim_in_(dim_in), dim_out_(dim_out), kraus_(std::move(kraus)) {
  for (const auto& v : kraus_) {
    if (!v.allFinite()) throw Error(ErrorKind::InvalidProblem, "Kraus operator has non-finite entries");
  }
  choi_.dim_in = dim_in_;
  choi_.dim_out = dim_out_;
  choi_.matrix = kernels::choi_from_kraus_parallel(kraus_, dim_in_, dim_out_);
}

Channel Channel::identity(std::size_t d) {
  return Channel(d, d, {CMatrix::Identity(idx(d), idx(d))});
}

Channel Channel::adjoint_action(const CMatrix& v) {
  return Channel(static_cast<std::size_t>(v.cols()), static_cast<std::size_t>(v.rows()), {v});
}

LinearMap::LinearMap(ChoiMatrix choi) : choi_(std::move(choi)) { check_choi_shape(choi_); }

CMatrix apply_channel(const Channel& f, const CMatrix& b) {
  if (b.rows() != idx(f.dim_in()) || b.cols() != idx(f.dim_in())) {
    throw Error(ErrorKind::DimensionMismatch,
                "apply expects a " + std::to_string(f.dim_in()) + "x" + std::to_string(f.dim_in()) +
                    " input");
  }
  CMatrix out = CMatrix::Zero(idx(f.dim_out()), idx(f.dim_out()));
  for (const auto& v : f.kraus()) out.noalias() += v * b * v.adjoint();
  return out;
}

CMatrix apply_choi(const ChoiMatrix& f, const CMatrix& b) {
  check_choi_shape(f);
  if (b.rows() != idx(f.dim_in) || b.cols() != idx(f.dim_in)) {
    throw Error(ErrorKind::DimensionMismatch,
                "apply expects a " + std::to_string(f.dim_in) + "x" + std::to_string(f.dim_in) +
                    " input");
  }
  const Eigen::Index m = idx(f.dim_out);
  CMatrix out = CMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      if (b(i, j) != Complex(0.0)) out += b(i, j) * f.matrix.block(i * m, j * m, m, m);
  return out;
}

ChoiMatrix choi_of(const Channel& f) { return f.choi(); }

Channel channel_of_choi(const ChoiMatrix& c, const Tolerances& tol) {
  check_choi_shape(c);
  const auto spec = hermitian_eig(c.matrix, tol);
  const Eigen::Index last = spec.eigenvalues.size() - 1;
  if (last >= 0 && spec.eigenvalues(last) < -tol.psd_tol) {
    throw Error(ErrorKind::NotPSD,
                "Choi matrix has eigenvalue " + std::to_string(spec.eigenvalues(last)),
                spec.eigenvalues(last));
  }
  const double thr = rank_threshold(spec.eigenvalues, tol);
  std::vector<CMatrix> kraus;
  for (Eigen::Index k = 0; k <= last; ++k) {
    const double lam = spec.eigenvalues(k);
    if (!(lam > thr)) break;
    kraus.push_back(unvec(std::sqrt(lam) * spec.eigenvectors.col(k), c.dim_in, c.dim_out));
  }
  return Channel(c.dim_in, c.dim_out, std::move(kraus));
}

LinearMap linear_map_of_choi(const ChoiMatrix& c) { return LinearMap(c); }

Channel hs_dual(const Channel& f) {
  std::vector<CMatrix> kraus;
  kraus.reserve(f.kraus().size());
  for (const auto& v : f.kraus()) kraus.push_back(v.adjoint());
  return Channel(f.dim_out(), f.dim_in(), std::move(kraus));
}

CheckResult is_cp(const ChoiMatrix& c, const Tolerances& tol) {
  check_choi_shape(c);
  const auto res = is_psd(c.matrix, tol);
  return {res.ok, res.min_eigenvalue};
}

CheckResult is_cp(const Channel& f, const Tolerances& tol) { return is_cp(f.choi(), tol); }
CheckResult is_cp(const LinearMap& f, const Tolerances& tol) { return is_cp(f.choi(), tol); }

CheckResult is_unital(const Channel& f, const Tolerances& tol) {
  const Eigen::Index m = idx(f.dim_out());
  CMatrix sum = CMatrix::Zero(m, m);
  for (const auto& v : f.kraus()) sum.noalias() += v * v.adjoint();
  const double r = max_abs(sum - CMatrix::Identity(m, m));
  return {r <= tol.eq_tol, r};
}

CheckResult is_unital(const ChoiMatrix& c, const Tolerances& tol) {
  const Eigen::Index m = idx(c.dim_out);
  const double r = max_abs(apply(c, CMatrix(CMatrix::Identity(idx(c.dim_in), idx(c.dim_in)))) -
                           CMatrix::Identity(m, m));
  return {r <= tol.eq_tol, r};
}

CheckResult is_trace_preserving(const Channel& f, const Tolerances& tol) {
  const Eigen::Index n = idx(f.dim_in());
  CMatrix sum = CMatrix::Zero(n, n);
  for (const auto& v : f.kraus()) sum.noalias() += v.adjoint() * v;
  const double r = max_abs(sum - CMatrix::Identity(n, n));
  return {r <= tol.eq_tol, r};
}

double apply_distance(const ChoiMatrix& a, const ChoiMatrix& b) {
  if (a.dim_in != b.dim_in || a.dim_out != b.dim_out) {
    throw Error(ErrorKind::DimensionMismatch, "maps have different shapes");
  }
  // Entries of the Choi matrix are exactly the entries of the images of matrix units.
  return max_abs(a.matrix - b.matrix);
}

OrthogonalKraus orthogonal_kraus(const Channel& f, const Tolerances& tol) {
  const auto spec = hermitian_eig(hermitian_part(f.choi().matrix), tol);
  const Eigen::Index last = spec.eigenvalues.size() - 1;
  if (last >= 0 && spec.eigenvalues(last) < -tol.psd_tol) {
    throw Error(ErrorKind::NotCP, "Choi matrix has eigenvalue " + std::to_string(spec.eigenvalues(last)),
                spec.eigenvalues(last));
  }
  const double thr = rank_threshold(spec.eigenvalues, tol);
  std::vector<CMatrix> kraus;
  std::vector<double> weights;
  for (Eigen::Index k = 0; k <= last; ++k) {
    const double lam = spec.eigenvalues(k);
    if (!(lam > thr)) break;
    kraus.push_back(unvec(std::sqrt(lam) * spec.eigenvectors.col(k), f.dim_in(), f.dim_out()));
    weights.push_back(lam);
  }
  return {Channel(f.dim_in(), f.dim_out(), std::move(kraus)), std::move(weights)};
}

ChoiMatrix choi_pseudoinverse(const Channel& f, const Tolerances& tol) {
  const auto ok = orthogonal_kraus(f, tol);
  std::vector<CMatrix> scaled;
  for (std::size_t a = 0; a < ok.weights.size(); ++a)
    scaled.push_back(ok.channel.kraus()[a] / ok.weights[a]);
  return Channel(f.dim_in(), f.dim_out(), std::move(scaled)).choi();
}

MuDual::MuDual(std::size_t m) : m_(m) {}

CMatrix MuDual::on_unit(std::size_t i, std::size_t k) const {
  const Eigen::Index d = idx(m_);
  CMatrix out = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    // E_ij (x) E_jk has its single 1 at row i*d + j, column j*d + k.
    out(idx(i) * d + j, j * d + idx(k)) = 1.0;
  }
  return out;
}

CMatrix MuDual::operator()(const CMatrix& a) const {
  const Eigen::Index d = idx(m_);
  if (a.rows() != d || a.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "mu_dual expects a " + std::to_string(d) + "x" +
                                                  std::to_string(d) + " input");
  }
  CMatrix out = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index j = 0; j < d; ++j) out(i * d + j, j * d + k) += a(i, k);
  return out;
}

MuDual mu_dual(std::size_t m) {
  if (m == 0) throw Error(ErrorKind::DimensionMismatch, "mu_dual needs m >= 1");
  return MuDual(m);
}

CMatrix choi_block_permutation(std::size_t m, std::size_t n, std::size_t r) {
  if (r > n) {
    throw Error(ErrorKind::InvalidSplit,
                "split " + std::to_string(r) + " exceeds block size " + std::to_string(n));
  }
  const Eigen::Index side = idx(m * n);
  CMatrix u = CMatrix::Zero(side, side);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t source = i * n + k;
      const std::size_t target = k < r ? i * r + k : m * r + i * (n - r) + (k - r);
      u(idx(target), idx(source)) = 1.0;
    }
  }
  return u;
}

Channel conjugate(const Channel& f, const CMatrix& u, const CMatrix& v, const Tolerances& tol) {
  if (u.rows() != idx(f.dim_out()) || v.rows() != idx(f.dim_in())) {
    throw Error(ErrorKind::DimensionMismatch, "conjugating unitaries do not match the channel");
  }
  if (!is_unitary(u, tol)) throw Error(ErrorKind::NotUnitary, "U is not unitary");
  if (!is_unitary(v, tol)) throw Error(ErrorKind::NotUnitary, "V is not unitary");
  std::vector<CMatrix> kraus;
  kraus.reserve(f.kraus().size());
  for (const auto& k : f.kraus()) kraus.push_back(u * k * v);
  return Channel(f.dim_in(), f.dim_out(), std::move(kraus));
}

}  // namespace qbayes
