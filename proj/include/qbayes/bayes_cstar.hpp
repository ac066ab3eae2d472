#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qbayes/bayes_matrix.hpp"
#include "qbayes/channel.hpp"

namespace qbayes {

using RMatrix = Eigen::MatrixXd;

// Direct sum of matrix algebras M_{d_0} + M_{d_1} + ...
struct CStarAlgebra {
  std::vector<std::size_t> blocks;

  std::size_t size() const noexcept { return blocks.size(); }
  bool is_trivial() const noexcept { return blocks.size() == 1 && blocks[0] == 1; }
  void validate() const;
};

// omega(A) = sum_x p_x tr(rho_x A_x).
struct CStarState {
  std::vector<double> weights;
  std::vector<CMatrix> densities;

  void validate(const CStarAlgebra& algebra, const Tolerances& tol) const;
};

// Linear map source -> target given blockwise; entry(t, s) maps
// M_{source[s]} -> M_{target[t]}. Entries are stored target-major.
// For F: B -> A the target is A (index x) and the source B (index y), so the
// stored order is x-major.
class BlockChannel {
 public:
  BlockChannel(CStarAlgebra source, CStarAlgebra target, std::vector<Channel> entries);

  const CStarAlgebra& source() const noexcept { return source_; }
  const CStarAlgebra& target() const noexcept { return target_; }
  const Channel& entry(std::size_t t, std::size_t s) const;
  const std::vector<Channel>& entries() const noexcept { return entries_; }

  // Zero map of the right shape at every position.
  static BlockChannel zeros(CStarAlgebra source, CStarAlgebra target);
  void set_entry(std::size_t t, std::size_t s, Channel c);

  // Max over target blocks of |sum_s entry(t, s)(1) - 1|.
  double unitality_residual() const;
  // Min Choi eigenvalue over all entries.
  double cp_min_eigenvalue(const Tolerances& tol = {}) const;

 private:
  CStarAlgebra source_;
  CStarAlgebra target_;
  std::vector<Channel> entries_;
};

struct CStarOutcome {
  BayesStatus status = BayesStatus::FailsSelfAdjoint;
  std::optional<BlockChannel> inverse;  // source A, target B; present iff Exists
  bool unique = false;
  double witness = 0.0;
  std::optional<std::size_t> fail_x;  // set for self-adjointness failures
  std::optional<std::size_t> fail_y;  // set for every failure
  std::optional<Certificates> certificates;
  Diagnostics diagnostics;

  bool exists() const noexcept { return status == BayesStatus::Exists; }
  std::optional<double> diagnostic(const std::string& name) const;
};

// xi = omega o F as a state on the source of F.
CStarState cstar_marginal(const BlockChannel& f, const CStarState& omega,
                          const Tolerances& tol = {});

CStarOutcome cstar_bayesian_invert(const BlockChannel& f, const CStarState& omega,
                                   const Tolerances& tol = {});

// Max over blocks and matrix-unit pairs of
// |q_y tr(sigma_y G_yx(E_ij) E_kl) - p_x tr(rho_x E_ij F_xy(E_kl))|.
double cstar_verify_bayes(const BlockChannel& f, const BlockChannel& g, const CStarState& omega,
                          const Tolerances& tol = {});

// Max over null blocks y and x of |P_x F_xy(E_kl) P_x|, P_x the support of p_x rho_x.
double null_block_corner_leak(const BlockChannel& f, const CStarState& omega,
                              const Tolerances& tol = {});

// Classical stochastic maps are column-stochastic: f(y, x) is the
// probability of y given x.
RMatrix classical_bayes(const RMatrix& f, const Eigen::VectorXd& p, const Tolerances& tol = {});
RMatrix classical_disintegration(const RMatrix& f, const Eigen::VectorXd& p,
                                 const Tolerances& tol = {});

// f: X ~> Y becomes the CPU map C^Y -> C^X with entry(x, y) = multiplication by f(y, x).
BlockChannel embed_classical(const RMatrix& f);
// Inverse of embed_classical: result(s, t) = entry(t, s)(1).
RMatrix project_classical(const BlockChannel& c);
CStarState classical_state(const Eigen::VectorXd& p);

// A POVM {F_y} on M_m as the CPU map C^Y -> M_m, together with omega = tr(rho .).
BlockChannel povm_to_cstar(const std::vector<CMatrix>& elements);
CStarState single_block_state(const CMatrix& rho);
// An ensemble {sigma_x} as the CPU map M_n -> C^X.
BlockChannel ensemble_to_cstar(const std::vector<CMatrix>& states);

// Single-block views.
BlockChannel block_of(const Channel& f);
Channel channel_of_single_block(const BlockChannel& c);

}  // namespace qbayes
