#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qbayes/channel.hpp"
#include "qbayes/linalg.hpp"

namespace qbayes {

// F: M_n -> M_m together with the state omega = tr(rho .) on M_m.
struct BayesProblem {
  Channel forward;
  CMatrix rho;
  Tolerances tol;
};

struct CornerData {
  CMatrix sigma;      // F*(rho), n x n
  CMatrix sigma_hat;  // pseudoinverse of sigma
  CMatrix p_xi;       // support of sigma
  CMatrix p_xi_perp;
  CMatrix frak_a;     // sum_ij E_ij (x) sigma_hat F*(rho E_ij) P_xi
  CMatrix frak_b;     // same with P_xi_perp on the right
};

enum class BayesStatus { Exists, FailsSelfAdjoint, FailsCompletion };

const char* to_string(BayesStatus status);

struct Certificates {
  double cp_min_eigenvalue = 0.0;
  double unitality_residual = 0.0;
  double bayes_residual = 0.0;
};

using Diagnostics = std::vector<std::pair<std::string, double>>;

struct BayesOutcome {
  BayesStatus status = BayesStatus::FailsSelfAdjoint;
  std::optional<Channel> inverse;  // present iff Exists
  bool unique = false;             // meaningful iff Exists
  double witness = 0.0;            // failure magnitude; 0 when Exists
  std::optional<Certificates> certificates;
  Diagnostics diagnostics;

  bool exists() const noexcept { return status == BayesStatus::Exists; }
  std::optional<double> diagnostic(const std::string& name) const;
};

struct SelfAdjointCheck {
  bool ok = false;
  double defect = 0.0;  // max |A - A^dagger|
};

// Throws InvalidProblem unless F is unital and rho is a density matrix on M_m.
void validate_problem(const BayesProblem& problem);

CornerData marginal(const BayesProblem& problem);
CMatrix corner_bayes_map(const CornerData& corner, const BayesProblem& problem, const CMatrix& a);
SelfAdjointCheck check_corner_selfadjoint(const CornerData& corner, const Tolerances& tol = {});
CMatrix completion_defect(const CornerData& corner, const Tolerances& tol = {});

BayesOutcome bayesian_invert(const BayesProblem& problem);

struct ResidualCheck {
  bool ok = false;
  double residual = 0.0;
};

// Checks tr(sigma G(E_ij) E_kl) = tr(rho E_ij F(E_kl)) on all matrix-unit pairs.
ResidualCheck verify_bayes_condition(const Channel& f, const ChoiMatrix& g, const CMatrix& rho,
                                     const Tolerances& tol = {});
ResidualCheck verify_bayes_condition(const Channel& f, const Channel& g, const CMatrix& rho,
                                     const Tolerances& tol = {});
ResidualCheck verify_bayes_condition(const Channel& f, const LinearMap& g, const CMatrix& rho,
                                     const Tolerances& tol = {});

// F(B) P = G(B) P on all matrix units, P the support of omega_density.
bool ae_equal(const ChoiMatrix& f, const ChoiMatrix& g, const CMatrix& omega_density,
              const Tolerances& tol = {});
bool ae_equal(const Channel& f, const Channel& g, const CMatrix& omega_density,
              const Tolerances& tol = {});

// Kraus form sqrt(sigma_hat) V_a^dagger sqrt(rho) of Ad_{P_xi} o G.
Channel corner_kraus(const BayesProblem& problem, const CornerData& corner);

// Residual of the commutation [Choi(Ad_U F Ad_V Ad_P), sigma_hat (x) rho] in
// eigenbases of rho and sigma; vanishes when the corner is self-adjoint.
double commutant_residual(const BayesProblem& problem, const CornerData& corner);

// Special cases. The commutative side of POVMs and ensembles is embedded as
// the diagonal of a matrix algebra: a POVM inverse is a channel M_m -> M_|Y|
// with diagonal outputs, an ensemble inverse is a channel M_|X| -> M_n that
// only reads the diagonal of its input.
BayesOutcome povm_bayes(const std::vector<CMatrix>& elements, const CMatrix& rho,
                        const Tolerances& tol = {});
BayesOutcome ensemble_bayes(const std::vector<CMatrix>& states, const std::vector<double>& p,
                            const Tolerances& tol = {});
BayesOutcome wave_collapse_invert(const std::vector<CMatrix>& projections, const CMatrix& rho,
                                  const Tolerances& tol = {});
Channel isometry_bayes(const CMatrix& v, const CMatrix& rho, const Tolerances& tol = {});

// Diagonal embeddings used by the special cases.
Channel povm_channel(const std::vector<CMatrix>& elements);  // M_|Y| -> M_m
Channel ensemble_channel(const std::vector<CMatrix>& states);  // M_n -> M_|X|
Channel collapse_channel(const std::vector<CMatrix>& projections);

// Factor L with [[A, B], [B^dagger, C]] = L L^dagger.
CMatrix schur_factor(const CMatrix& a, const CMatrix& b, const CMatrix& c,
                     const Tolerances& tol = {});

namespace detail {
// Completion with an arbitrary filler density tau on M_m in place of 1/m.
// Used to exhibit distinct inverses on non-unique instances.
Channel complete_with_filler(const BayesProblem& problem, const CMatrix& tau);
}  // namespace detail

}  // namespace qbayes
