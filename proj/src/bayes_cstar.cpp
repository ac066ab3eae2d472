#include "qbayes/bayes_cstar.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "internal.hpp"
#include "qbayes/kernels.hpp"

namespace qbayes {

using internal::assembled_slack;
using internal::channel_from_assembled;
using internal::completion_excess;
using internal::require_density;

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

Channel zero_channel(std::size_t dim_in, std::size_t dim_out) {
  return Channel(dim_in, dim_out, {});
}

// A |-> c tr(A) 1 from M_{dim_in} to M_{dim_out}.
Channel trace_filler(std::size_t dim_in, std::size_t dim_out, double c) {
  std::vector<CMatrix> kraus;
  const double s = std::sqrt(c);
  for (std::size_t k = 0; k < dim_out; ++k) {
    for (std::size_t j = 0; j < dim_in; ++j) {
      CMatrix e = CMatrix::Zero(idx(dim_out), idx(dim_in));
      e(idx(k), idx(j)) = s;
      kraus.push_back(std::move(e));
    }
  }
  return Channel(dim_in, dim_out, std::move(kraus));
}

// S_y = sum_x p_x F*_xy(rho_x); q_y = tr(S_y).
std::vector<CMatrix> weighted_marginals(const BlockChannel& f, const CStarState& omega) {
  const std::size_t nx = f.target().size();
  const std::size_t ny = f.source().size();
  std::vector<CMatrix> out(ny);
  for (std::size_t y = 0; y < ny; ++y) {
    const Eigen::Index n = idx(f.source().blocks[y]);
    out[y] = CMatrix::Zero(n, n);
    for (std::size_t x = 0; x < nx; ++x) {
      const double px = std::max(omega.weights[x], 0.0);
      if (px == 0.0) continue;
      out[y] += px * apply(hs_dual(f.entry(x, y)), hermitian_part(omega.densities[x]));
    }
    out[y] = hermitian_part(out[y]);
  }
  return out;
}

void require_compatible(const BlockChannel& f, const CStarState& omega, const Tolerances& tol) {
  tol.validate();
  omega.validate(f.target(), tol);
  const double unital = f.unitality_residual();
  if (unital > tol.eq_tol) {
    throw Error(ErrorKind::InvalidProblem, "block channel is not unital", unital);
  }
}

struct YBlock {
  bool null = false;
  double q = 0.0;
  CMatrix sigma, sigma_hat, q_proj, q_perp;
  std::vector<CMatrix> frak_a, frak_b;  // indexed by x
};

}  // namespace

void CStarAlgebra::validate() const {
  if (blocks.empty()) throw Error(ErrorKind::InvalidProblem, "algebra has no blocks");
  for (auto d : blocks)
    if (d == 0) throw Error(ErrorKind::InvalidProblem, "algebra block of dimension 0");
}

void CStarState::validate(const CStarAlgebra& algebra, const Tolerances& tol) const {
  algebra.validate();
  if (weights.size() != algebra.size() || densities.size() != algebra.size()) {
    throw Error(ErrorKind::InvalidProblem, "state does not match the number of blocks");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < weights.size(); ++x) {
    if (!(weights[x] >= -tol.psd_tol)) {
      throw Error(ErrorKind::InvalidProblem, "negative block weight", weights[x]);
    }
    total += weights[x];
    require_density(densities[x], idx(algebra.blocks[x]), tol, ErrorKind::InvalidProblem,
                    "block density " + std::to_string(x));
  }
  if (std::abs(total - 1.0) > tol.eq_tol) {
    throw Error(ErrorKind::InvalidProblem, "block weights do not sum to 1", total);
  }
}

BlockChannel::BlockChannel(CStarAlgebra source, CStarAlgebra target, std::vector<Channel> entries)
    : source_(std::move(source)), target_(std::move(target)), entries_(std::move(entries)) {
  source_.validate();
  target_.validate();
  if (entries_.size() != source_.size() * target_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "block channel needs " +
                                                  std::to_string(source_.size() * target_.size()) +
                                                  " entries, got " + std::to_string(entries_.size()));
  }
  for (std::size_t t = 0; t < target_.size(); ++t) {
    for (std::size_t s = 0; s < source_.size(); ++s) {
      const auto& e = entry(t, s);
      if (e.dim_in() != source_.blocks[s] || e.dim_out() != target_.blocks[t]) {
        throw Error(ErrorKind::DimensionMismatch,
                    "entry (" + std::to_string(t) + ", " + std::to_string(s) + ") has the wrong shape");
      }
    }
  }
}

const Channel& BlockChannel::entry(std::size_t t, std::size_t s) const {
  return entries_.at(t * source_.size() + s);
}

BlockChannel BlockChannel::zeros(CStarAlgebra source, CStarAlgebra target) {
  std::vector<Channel> entries;
  for (std::size_t t = 0; t < target.size(); ++t)
    for (std::size_t s = 0; s < source.size(); ++s)
      entries.push_back(zero_channel(source.blocks[s], target.blocks[t]));
  return BlockChannel(std::move(source), std::move(target), std::move(entries));
}

void BlockChannel::set_entry(std::size_t t, std::size_t s, Channel c) {
  if (c.dim_in() != source_.blocks.at(s) || c.dim_out() != target_.blocks.at(t)) {
    throw Error(ErrorKind::DimensionMismatch, "entry has the wrong shape");
  }
  entries_.at(t * source_.size() + s) = std::move(c);
}

double BlockChannel::unitality_residual() const {
  double worst = 0.0;
  for (std::size_t t = 0; t < target_.size(); ++t) {
    const Eigen::Index m = idx(target_.blocks[t]);
    CMatrix sum = CMatrix::Zero(m, m);
    for (std::size_t s = 0; s < source_.size(); ++s) {
      const Eigen::Index n = idx(source_.blocks[s]);
      sum += apply(entry(t, s), CMatrix(CMatrix::Identity(n, n)));
    }
    worst = std::max(worst, max_abs(sum - CMatrix::Identity(m, m)));
  }
  return worst;
}

double BlockChannel::cp_min_eigenvalue(const Tolerances& tol) const {
  double worst = INFINITY;
  for (const auto& e : entries_) worst = std::min(worst, is_cp(e, tol).value);
  return worst;
}

std::optional<double> CStarOutcome::diagnostic(const std::string& name) const {
  for (const auto& [k, v] : diagnostics)
    if (k == name) return v;
  return std::nullopt;
}

CStarState cstar_marginal(const BlockChannel& f, const CStarState& omega, const Tolerances& tol) {
  if (omega.weights.size() != f.target().size() || omega.densities.size() != f.target().size()) {
    throw Error(ErrorKind::DimensionMismatch, "state does not match the target of the channel");
  }
  for (std::size_t x = 0; x < f.target().size(); ++x) {
    const Eigen::Index m = idx(f.target().blocks[x]);
    if (omega.densities[x].rows() != m || omega.densities[x].cols() != m) {
      throw Error(ErrorKind::DimensionMismatch, "block density has the wrong size");
    }
  }
  const auto s = weighted_marginals(f, omega);
  CStarState xi;
  for (std::size_t y = 0; y < s.size(); ++y) {
    const double q = s[y].trace().real();
    const Eigen::Index n = s[y].rows();
    xi.weights.push_back(q);
    xi.densities.push_back(q > tol.rank_tol ? CMatrix(s[y] / q)
                                            : CMatrix(CMatrix::Identity(n, n) / static_cast<double>(n)));
  }
  return xi;
}

CStarOutcome cstar_bayesian_invert(const BlockChannel& f, const CStarState& omega,
                                   const Tolerances& tol) {
  require_compatible(f, omega, tol);
  const std::size_t nx = f.target().size();
  const std::size_t ny = f.source().size();
  const auto s = weighted_marginals(f, omega);

  CStarOutcome out;
  out.diagnostics.emplace_back("null_block_corner_leak", null_block_corner_leak(f, omega, tol));

  std::vector<YBlock> yb(ny);
  bool any_null = false;
  double worst_sa = 0.0;
  std::size_t sa_x = 0, sa_y = 0;
  for (std::size_t y = 0; y < ny; ++y) {
    auto& b = yb[y];
    const Eigen::Index n = idx(f.source().blocks[y]);
    b.q = s[y].trace().real();
    if (!(b.q > tol.rank_tol)) {
      b.null = true;
      any_null = true;
      continue;
    }
    b.sigma = hermitian_part(s[y] / b.q);
    b.sigma_hat = pseudoinverse(b.sigma, tol);
    b.q_proj = support(b.sigma, tol);
    b.q_perp = CMatrix::Identity(n, n) - b.q_proj;
    for (std::size_t x = 0; x < nx; ++x) {
      const Eigen::Index m = idx(f.target().blocks[x]);
      CMatrix a = CMatrix::Zero(m * n, m * n);
      CMatrix bb = CMatrix::Zero(m * n, m * n);
      const double px = std::max(omega.weights[x], 0.0);
      if (px > 0.0) {
        const auto& fxy = f.entry(x, y);
        const CMatrix rho = hermitian_part(omega.densities[x]);
        std::vector<CMatrix> vr;
        for (const auto& v : fxy.kraus()) vr.push_back(v.adjoint() * rho);
        for (Eigen::Index i = 0; i < m; ++i) {
          for (Eigen::Index j = 0; j < m; ++j) {
            CMatrix fstar = CMatrix::Zero(n, n);
            for (std::size_t k = 0; k < vr.size(); ++k)
              fstar.noalias() += vr[k].col(i) * fxy.kraus()[k].row(j);
            const CMatrix z = (px / b.q) * (b.sigma_hat * fstar);
            a.block(i * n, j * n, n, n) = z * b.q_proj;
            bb.block(i * n, j * n, n, n) = z * b.q_perp;
          }
        }
      }
      const double defect = hermitian_defect(a);
      if (defect > worst_sa) {
        worst_sa = defect;
        sa_x = x;
        sa_y = y;
      }
      b.frak_a.push_back(std::move(a));
      b.frak_b.push_back(std::move(bb));
    }
  }
  out.diagnostics.emplace_back("selfadjoint_defect", worst_sa);
  if (worst_sa > tol.eq_tol) {
    out.status = BayesStatus::FailsSelfAdjoint;
    out.witness = worst_sa;
    out.fail_x = sa_x;
    out.fail_y = sa_y;
    return out;
  }

  // Completion test per y, accumulating the pieces needed for assembly.
  std::vector<std::vector<CMatrix>> bab(ny);
  std::vector<CMatrix> defect(ny);
  double worst_excess = 0.0;
  std::size_t ex_y = 0;
  bool have_excess = false;
  for (std::size_t y = 0; y < ny; ++y) {
    auto& b = yb[y];
    if (b.null) continue;
    const Eigen::Index n = idx(f.source().blocks[y]);
    defect[y] = CMatrix::Zero(n, n);
    for (std::size_t x = 0; x < nx; ++x) {
      const CMatrix a = hermitian_part(b.frak_a[x]);
      if (a.rows()) {
        const double min_eig = hermitian_eig(a, tol).eigenvalues(a.rows() - 1);
        if (min_eig < -assembled_slack(a, tol)) {
          throw Error(ErrorKind::InternalInconsistency,
                      "self-adjoint corner block is not PSD", min_eig);
        }
      }
      const CMatrix prod = hermitian_part(b.frak_b[x].adjoint() * pseudoinverse(a, tol) * b.frak_b[x]);
      defect[y] += partial_trace_first(prod, f.target().blocks[x], f.source().blocks[y]);
      bab[y].push_back(prod);
    }
    defect[y] = hermitian_part(defect[y]);
    const double excess = completion_excess(defect[y], b.q_perp, tol);
    if (!have_excess || excess > worst_excess) {
      worst_excess = excess;
      ex_y = y;
      have_excess = true;
    }
  }
  out.diagnostics.emplace_back("completion_excess", have_excess ? worst_excess : 0.0);
  if (have_excess && worst_excess > tol.psd_tol) {
    out.status = BayesStatus::FailsCompletion;
    out.witness = worst_excess;
    out.fail_y = ex_y;
    return out;
  }

  BlockChannel g = BlockChannel::zeros(f.target(), f.source());
  bool all_tight = true;
  for (std::size_t y = 0; y < ny; ++y) {
    const auto& b = yb[y];
    const std::size_t n = f.source().blocks[y];
    for (std::size_t x = 0; x < nx; ++x) {
      const std::size_t m = f.target().blocks[x];
      const double c = 1.0 / (static_cast<double>(m) * static_cast<double>(nx));
      if (b.null) {
        g.set_entry(y, x, trace_filler(m, n, c));
        continue;
      }
      const CMatrix filler = c * tensor(CMatrix::Identity(idx(m), idx(m)), b.q_perp - defect[y]);
      const CMatrix choi = hermitian_part(b.frak_a[x] + b.frak_b[x] + b.frak_b[x].adjoint() +
                                          bab[y][x] + filler);
      g.set_entry(y, x, channel_from_assembled(choi, m, n, tol));
    }
    if (!b.null && max_abs(defect[y] - b.q_perp) > tol.eq_tol) all_tight = false;
  }

  Certificates cert;
  cert.cp_min_eigenvalue = g.cp_min_eigenvalue(tol);
  cert.unitality_residual = g.unitality_residual();
  cert.bayes_residual = cstar_verify_bayes(f, g, omega, tol);
  if (cert.cp_min_eigenvalue < -tol.psd_tol || cert.unitality_residual > tol.eq_tol ||
      cert.bayes_residual > 10.0 * tol.eq_tol) {
    throw Error(ErrorKind::InternalInconsistency, "constructed block inverse failed verification",
                cert.bayes_residual);
  }

  out.status = BayesStatus::Exists;
  out.unique = f.target().is_trivial() || (!any_null && all_tight);
  out.certificates = cert;
  out.inverse = std::move(g);
  return out;
}

double cstar_verify_bayes(const BlockChannel& f, const BlockChannel& g, const CStarState& omega,
                          const Tolerances& tol) {
  (void)tol;
  if (g.source().blocks != f.target().blocks || g.target().blocks != f.source().blocks) {
    throw Error(ErrorKind::DimensionMismatch, "candidate inverse has the wrong block structure");
  }
  if (omega.weights.size() != f.target().size() || omega.densities.size() != f.target().size()) {
    throw Error(ErrorKind::DimensionMismatch, "state does not match the target of the channel");
  }
  const auto s = weighted_marginals(f, omega);
  double worst = 0.0;
  for (std::size_t x = 0; x < f.target().size(); ++x) {
    const CMatrix rho_w = std::max(omega.weights[x], 0.0) * hermitian_part(omega.densities[x]);
    for (std::size_t y = 0; y < f.source().size(); ++y) {
      worst = std::max(worst, kernels::bayes_residual_parallel(g.entry(y, x).choi().matrix,
                                                               f.entry(x, y).choi().matrix, s[y],
                                                               rho_w));
    }
  }
  return worst;
}

double null_block_corner_leak(const BlockChannel& f, const CStarState& omega,
                              const Tolerances& tol) {
  const auto s = weighted_marginals(f, omega);
  double worst = 0.0;
  for (std::size_t y = 0; y < f.source().size(); ++y) {
    if (s[y].trace().real() > tol.rank_tol) continue;
    const Eigen::Index n = idx(f.source().blocks[y]);
    for (std::size_t x = 0; x < f.target().size(); ++x) {
      const double px = std::max(omega.weights[x], 0.0);
      if (px == 0.0) continue;
      const Eigen::Index m = idx(f.target().blocks[x]);
      const CMatrix p = support(hermitian_part(px * omega.densities[x]), tol);
      const CMatrix& choi = f.entry(x, y).choi().matrix;
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
          worst = std::max(worst, max_abs(p * choi.block(k * m, l * m, m, m) * p));
    }
  }
  return worst;
}

RMatrix classical_bayes(const RMatrix& f, const Eigen::VectorXd& p, const Tolerances& tol) {
  const Eigen::Index ny = f.rows();
  const Eigen::Index nx = f.cols();
  if (nx == 0 || ny == 0) throw Error(ErrorKind::NotStochastic, "empty stochastic matrix");
  if (p.size() != nx) throw Error(ErrorKind::NotStochastic, "prior does not match the columns of f");
  if (!f.allFinite() || !p.allFinite()) throw Error(ErrorKind::NotStochastic, "non-finite entries");
  if (f.minCoeff() < -tol.eq_tol) throw Error(ErrorKind::NotStochastic, "negative entry", f.minCoeff());
  if (p.minCoeff() < -tol.eq_tol) throw Error(ErrorKind::NotStochastic, "negative prior", p.minCoeff());
  for (Eigen::Index x = 0; x < nx; ++x) {
    const double err = std::abs(f.col(x).sum() - 1.0);
    if (err > tol.eq_tol) throw Error(ErrorKind::NotStochastic, "column does not sum to 1", err);
  }
  const double perr = std::abs(p.sum() - 1.0);
  if (perr > tol.eq_tol) throw Error(ErrorKind::NotStochastic, "prior does not sum to 1", perr);

  const Eigen::VectorXd q = f * p;
  RMatrix g(nx, ny);
  for (Eigen::Index y = 0; y < ny; ++y) {
    for (Eigen::Index x = 0; x < nx; ++x) {
      g(x, y) = q(y) > tol.rank_tol ? f(y, x) * p(x) / q(y) : 1.0 / static_cast<double>(nx);
    }
  }
  return g;
}

RMatrix classical_disintegration(const RMatrix& f, const Eigen::VectorXd& p,
                                 const Tolerances& tol) {
  for (Eigen::Index x = 0; x < f.cols(); ++x) {
    int ones = 0;
    for (Eigen::Index y = 0; y < f.rows(); ++y) {
      const double v = f(y, x);
      if (std::abs(v - 1.0) <= tol.eq_tol) {
        ++ones;
      } else if (std::abs(v) > tol.eq_tol) {
        throw Error(ErrorKind::NotDeterministic, "column " + std::to_string(x) + " is not a Dirac measure", v);
      }
    }
    if (ones != 1) {
      throw Error(ErrorKind::NotDeterministic, "column " + std::to_string(x) + " is not a Dirac measure");
    }
  }
  return classical_bayes(f, p, tol);
}

BlockChannel embed_classical(const RMatrix& f) {
  CStarAlgebra source{std::vector<std::size_t>(static_cast<std::size_t>(f.rows()), 1)};
  CStarAlgebra target{std::vector<std::size_t>(static_cast<std::size_t>(f.cols()), 1)};
  BlockChannel out = BlockChannel::zeros(source, target);
  for (Eigen::Index x = 0; x < f.cols(); ++x) {
    for (Eigen::Index y = 0; y < f.rows(); ++y) {
      if (f(y, x) > 0.0) {
        CMatrix k(1, 1);
        k(0, 0) = std::sqrt(f(y, x));
        out.set_entry(static_cast<std::size_t>(x), static_cast<std::size_t>(y), Channel(1, 1, {k}));
      }
    }
  }
  return out;
}

RMatrix project_classical(const BlockChannel& c) {
  for (auto d : c.source().blocks)
    if (d != 1) throw Error(ErrorKind::DimensionMismatch, "source is not commutative");
  for (auto d : c.target().blocks)
    if (d != 1) throw Error(ErrorKind::DimensionMismatch, "target is not commutative");
  RMatrix out(idx(c.source().size()), idx(c.target().size()));
  for (std::size_t s = 0; s < c.source().size(); ++s)
    for (std::size_t t = 0; t < c.target().size(); ++t)
      out(idx(s), idx(t)) = c.entry(t, s).choi().matrix(0, 0).real();
  return out;
}

CStarState classical_state(const Eigen::VectorXd& p) {
  CStarState st;
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    st.weights.push_back(p(x));
    st.densities.push_back(CMatrix::Ones(1, 1));
  }
  return st;
}

BlockChannel povm_to_cstar(const std::vector<CMatrix>& elements) {
  if (elements.empty()) throw Error(ErrorKind::NotAPOVM, "POVM has no elements");
  const std::size_t m = static_cast<std::size_t>(elements.front().rows());
  CStarAlgebra source{std::vector<std::size_t>(elements.size(), 1)};
  CStarAlgebra target{{m}};
  BlockChannel out = BlockChannel::zeros(source, target);
  for (std::size_t y = 0; y < elements.size(); ++y) {
    const CMatrix root = psd_sqrt(hermitian_part(elements[y]));
    std::vector<CMatrix> kraus;
    for (Eigen::Index k = 0; k < root.cols(); ++k) kraus.push_back(root.col(k));
    out.set_entry(0, y, Channel(1, m, std::move(kraus)));
  }
  return out;
}

CStarState single_block_state(const CMatrix& rho) { return CStarState{{1.0}, {rho}}; }

BlockChannel ensemble_to_cstar(const std::vector<CMatrix>& states) {
  if (states.empty()) throw Error(ErrorKind::NotAnEnsemble, "ensemble has no states");
  const std::size_t n = static_cast<std::size_t>(states.front().rows());
  CStarAlgebra source{{n}};
  CStarAlgebra target{std::vector<std::size_t>(states.size(), 1)};
  BlockChannel out = BlockChannel::zeros(source, target);
  for (std::size_t x = 0; x < states.size(); ++x) {
    const CMatrix root = psd_sqrt(hermitian_part(states[x]));
    std::vector<CMatrix> kraus;
    for (Eigen::Index k = 0; k < root.rows(); ++k) kraus.push_back(root.row(k));
    out.set_entry(x, 0, Channel(n, 1, std::move(kraus)));
  }
  return out;
}

BlockChannel block_of(const Channel& f) {
  return BlockChannel(CStarAlgebra{{f.dim_in()}}, CStarAlgebra{{f.dim_out()}}, {f});
}

Channel channel_of_single_block(const BlockChannel& c) {
  if (c.source().size() != 1 || c.target().size() != 1) {
    throw Error(ErrorKind::DimensionMismatch, "block channel has more than one block");
  }
  return c.entry(0, 0);
}

}  // namespace qbayes
