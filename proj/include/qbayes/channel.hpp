#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qbayes/linalg.hpp"

namespace qbayes {

// Choi matrix sum_ij E_ij^(n) (x) psi(E_ij^(n)) of a map psi: M_n -> M_m.
// Block (i, j) of side m holds psi(E_ij).
struct ChoiMatrix {
  std::size_t dim_in = 0;
  std::size_t dim_out = 0;
  CMatrix matrix;

  CMatrix image_of_unit(std::size_t i, std::size_t j) const;
};

// Completely positive map B |-> sum_a V_a B V_a^dagger from M_n to M_m.
// The Choi matrix is computed once at construction.
class Channel {
 public:
  Channel(std::size_t dim_in, std::size_t dim_out, std::vector<CMatrix> kraus);

  static Channel identity(std::size_t d);
  static Channel adjoint_action(const CMatrix& v);  // B |-> V B V^dagger

  std::size_t dim_in() const noexcept { return dim_in_; }
  std::size_t dim_out() const noexcept { return dim_out_; }
  const std::vector<CMatrix>& kraus() const noexcept { return kraus_; }
  const ChoiMatrix& choi() const noexcept { return choi_; }

 private:
  std::size_t dim_in_;
  std::size_t dim_out_;
  std::vector<CMatrix> kraus_;
  ChoiMatrix choi_;
};

// A linear map known only through its Choi matrix. Complete positivity is
// not verified; the value is usable for evaluation and checks only.
class LinearMap {
 public:
  explicit LinearMap(ChoiMatrix choi);
  explicit LinearMap(const Channel& channel) : LinearMap(channel.choi()) {}

  std::size_t dim_in() const noexcept { return choi_.dim_in; }
  std::size_t dim_out() const noexcept { return choi_.dim_out; }
  const ChoiMatrix& choi() const noexcept { return choi_; }

 private:
  ChoiMatrix choi_;
};

struct CheckResult {
  bool ok = false;
  double value = 0.0;  // min Choi eigenvalue for CP checks, max residual otherwise
};

CMatrix apply_channel(const Channel& f, const CMatrix& b);
CMatrix apply_choi(const ChoiMatrix& f, const CMatrix& b);

// Function object rather than an overload set so that argument-dependent
// lookup cannot pick std::apply for Eigen arguments.
struct ApplyFn {
  CMatrix operator()(const Channel& f, const CMatrix& b) const { return apply_channel(f, b); }
  CMatrix operator()(const LinearMap& f, const CMatrix& b) const { return apply_choi(f.choi(), b); }
  CMatrix operator()(const ChoiMatrix& f, const CMatrix& b) const { return apply_choi(f, b); }
};
inline constexpr ApplyFn apply{};

ChoiMatrix choi_of(const Channel& f);
Channel channel_of_choi(const ChoiMatrix& c, const Tolerances& tol = {});
LinearMap linear_map_of_choi(const ChoiMatrix& c);

Channel hs_dual(const Channel& f);

CheckResult is_cp(const Channel& f, const Tolerances& tol = {});
CheckResult is_cp(const LinearMap& f, const Tolerances& tol = {});
CheckResult is_cp(const ChoiMatrix& c, const Tolerances& tol = {});
CheckResult is_unital(const Channel& f, const Tolerances& tol = {});
CheckResult is_unital(const ChoiMatrix& c, const Tolerances& tol = {});
CheckResult is_trace_preserving(const Channel& f, const Tolerances& tol = {});

// Max entrywise distance between two maps over all matrix units.
double apply_distance(const ChoiMatrix& a, const ChoiMatrix& b);

struct OrthogonalKraus {
  Channel channel;              // pairwise Hilbert-Schmidt orthogonal Kraus list
  std::vector<double> weights;  // Lambda_a = tr(W_a^dagger W_a) > 0
};

OrthogonalKraus orthogonal_kraus(const Channel& f, const Tolerances& tol = {});
ChoiMatrix choi_pseudoinverse(const Channel& f, const Tolerances& tol = {});

// Evaluator for mu*(A) = sum_ik A_ik sum_j E_ij (x) E_jk on M_m.
class MuDual {
 public:
  explicit MuDual(std::size_t m);
  std::size_t dim() const noexcept { return m_; }
  CMatrix operator()(const CMatrix& a) const;
  CMatrix on_unit(std::size_t i, std::size_t k) const;

 private:
  std::size_t m_;
};

MuDual mu_dual(std::size_t m);

// Permutation U (U[target, source] = 1) of side m*n gathering the leading
// r x r corner of every n x n block into the leading (m r) x (m r) corner.
CMatrix choi_block_permutation(std::size_t m, std::size_t n, std::size_t r);

// Ad_U o F o Ad_V with Kraus operators U V_a V.
Channel conjugate(const Channel& f, const CMatrix& u, const CMatrix& v,
                  const Tolerances& tol = {});

}  // namespace qbayes
