#include "qbayes/bayes_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qbayes/kernels.hpp"
#include "internal.hpp"

namespace qbayes {

using internal::assembled_slack;
using internal::channel_from_assembled;
using internal::completion_excess;
using internal::require_density;

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

struct CompletionParts {
  CMatrix a_hat;  // pseudoinverse of frak_a
  CMatrix bab;    // frak_b^dagger a_hat frak_b
  CMatrix defect; // tr_1(bab)
};

CompletionParts completion_parts(const CornerData& corner, const Tolerances& tol) {
  const Eigen::Index n = corner.sigma.rows();
  const Eigen::Index m = n ? corner.frak_a.rows() / n : 0;
  CompletionParts parts;
  parts.a_hat = pseudoinverse(hermitian_part(corner.frak_a), tol);
  parts.bab = hermitian_part(corner.frak_b.adjoint() * parts.a_hat * corner.frak_b);
  parts.defect = hermitian_part(
      partial_trace_first(parts.bab, static_cast<std::size_t>(m), static_cast<std::size_t>(n)));
  return parts;
}

CMatrix assemble_choi(const CornerData& corner, const CompletionParts& parts, const CMatrix& tau) {
  const CMatrix filler = tensor(tau, corner.p_xi_perp - parts.defect);
  const CMatrix choi = corner.frak_a + corner.frak_b + corner.frak_b.adjoint() + parts.bab + filler;
  return hermitian_part(choi);
}

Certificates certify(const Channel& f, const Channel& g, const CMatrix& rho, const Tolerances& tol) {
  Certificates c;
  c.cp_min_eigenvalue = is_cp(g, tol).value;
  c.unitality_residual = is_unital(g, tol).value;
  c.bayes_residual = verify_bayes_condition(f, g, rho, tol).residual;
  return c;
}

void assert_certificates(const Certificates& c, const Tolerances& tol, const char* what) {
  if (c.cp_min_eigenvalue < -tol.psd_tol || c.unitality_residual > tol.eq_tol ||
      c.bayes_residual > 10.0 * tol.eq_tol) {
    throw Error(ErrorKind::InternalInconsistency,
                std::string(what) + " failed verification (cp " + std::to_string(c.cp_min_eigenvalue) +
                    ", unitality " + std::to_string(c.unitality_residual) + ", bayes " +
                    std::to_string(c.bayes_residual) + ")",
                c.bayes_residual);
  }
}

// omega o G on the output state sigma: G*(sigma) must reproduce rho.
double state_preservation_residual(const Channel& g, const CMatrix& sigma, const CMatrix& rho) {
  return max_abs(apply(hs_dual(g), sigma) - rho);
}

CMatrix diag_unit(std::size_t d, std::size_t k) {
  CMatrix e = CMatrix::Zero(idx(d), 1);
  e(idx(k), 0) = 1.0;
  return e;
}

}  // namespace

const char* to_string(BayesStatus status) {
  switch (status) {
    case BayesStatus::Exists: return "Exists";
    case BayesStatus::FailsSelfAdjoint: return "FailsSelfAdjoint";
    case BayesStatus::FailsCompletion: return "FailsCompletion";
  }
  return "Unknown";
}

std::optional<double> BayesOutcome::diagnostic(const std::string& name) const {
  for (const auto& [k, v] : diagnostics)
    if (k == name) return v;
  return std::nullopt;
}

void validate_problem(const BayesProblem& problem) {
  const auto& tol = problem.tol;
  tol.validate();
  const auto unital = is_unital(problem.forward, tol);
  if (!unital.ok) {
    throw Error(ErrorKind::InvalidProblem, "forward map is not unital", unital.value);
  }
  require_density(problem.rho, idx(problem.forward.dim_out()), tol, ErrorKind::InvalidProblem,
                  "rho");
}

CornerData marginal(const BayesProblem& problem) {
  validate_problem(problem);
  const auto& f = problem.forward;
  const auto& tol = problem.tol;
  const Eigen::Index m = idx(f.dim_out());
  const Eigen::Index n = idx(f.dim_in());
  const CMatrix rho = hermitian_part(problem.rho);

  CornerData c;
  c.sigma = hermitian_part(apply(hs_dual(f), rho));
  c.sigma_hat = pseudoinverse(c.sigma, tol);
  c.p_xi = support(c.sigma, tol);
  c.p_xi_perp = CMatrix::Identity(n, n) - c.p_xi;

  // F*(rho E_ij) = sum_a (V_a^dagger rho)[:, i] V_a[j, :]
  std::vector<CMatrix> vr;
  vr.reserve(f.kraus().size());
  for (const auto& v : f.kraus()) vr.push_back(v.adjoint() * rho);

  c.frak_a = CMatrix::Zero(m * n, m * n);
  c.frak_b = CMatrix::Zero(m * n, m * n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      CMatrix fstar = CMatrix::Zero(n, n);
      for (std::size_t a = 0; a < vr.size(); ++a)
        fstar.noalias() += vr[a].col(i) * f.kraus()[a].row(j);
      const CMatrix x = c.sigma_hat * fstar;
      c.frak_a.block(i * n, j * n, n, n) = x * c.p_xi;
      c.frak_b.block(i * n, j * n, n, n) = x * c.p_xi_perp;
    }
  }
  return c;
}

CMatrix corner_bayes_map(const CornerData& corner, const BayesProblem& problem, const CMatrix& a) {
  const Eigen::Index m = idx(problem.forward.dim_out());
  if (a.rows() != m || a.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch, "corner_bayes_map expects an m x m input");
  }
  return corner.sigma_hat * apply(hs_dual(problem.forward), problem.rho * a);
}

SelfAdjointCheck check_corner_selfadjoint(const CornerData& corner, const Tolerances& tol) {
  SelfAdjointCheck out;
  out.defect = hermitian_defect(corner.frak_a);
  out.ok = out.defect <= tol.eq_tol;
  if (out.ok) {
    const CMatrix a = hermitian_part(corner.frak_a);
    const double min_eig = a.rows() ? hermitian_eig(a, tol).eigenvalues(a.rows() - 1) : 0.0;
    if (min_eig < -assembled_slack(a, tol)) {
      throw Error(ErrorKind::InternalInconsistency,
                  "self-adjoint corner Choi matrix is not PSD (min eigenvalue " +
                      std::to_string(min_eig) + ")",
                  min_eig);
    }
  }
  return out;
}

CMatrix completion_defect(const CornerData& corner, const Tolerances& tol) {
  const auto sa = check_corner_selfadjoint(corner, tol);
  if (!sa.ok) {
    throw Error(ErrorKind::CornerNotSelfAdjoint, "corner Choi matrix is not self-adjoint",
                sa.defect);
  }
  const auto parts = completion_parts(corner, tol);
  const double leak = max_abs(corner.p_xi * parts.defect);
  if (leak > 10.0 * tol.eq_tol * std::max(1.0, max_abs(parts.defect))) {
    throw Error(ErrorKind::InternalInconsistency,
                "completion defect is not supported in P_xi_perp", leak);
  }
  return parts.defect;
}

double commutant_residual(const BayesProblem& problem, const CornerData& corner) {
  const auto& tol = problem.tol;
  const Eigen::Index n = corner.sigma.rows();
  const auto rho_spec = hermitian_eig(hermitian_part(problem.rho), tol);
  const auto sig_spec = hermitian_eig(corner.sigma, tol);
  const double thr = rank_threshold(sig_spec.eigenvalues, tol);

  const CMatrix u = rho_spec.eigenvectors.adjoint();
  const CMatrix& v = sig_spec.eigenvectors;
  CMatrix p_bold = CMatrix::Zero(n, n);
  CMatrix sigma_hat_bold = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (sig_spec.eigenvalues(k) > thr) {
      p_bold(k, k) = 1.0;
      sigma_hat_bold(k, k) = 1.0 / sig_spec.eigenvalues(k);
    }
  }
  std::vector<CMatrix> kraus;
  for (const auto& k : problem.forward.kraus()) kraus.push_back(u * k * v * p_bold);
  const Channel rotated(problem.forward.dim_in(), problem.forward.dim_out(), std::move(kraus));
  const CMatrix rho_bold = rho_spec.eigenvalues.cast<Complex>().asDiagonal();
  const CMatrix weight = tensor(sigma_hat_bold, rho_bold);
  const CMatrix& choi = rotated.choi().matrix;
  return max_abs(choi * weight - weight * choi);
}

BayesOutcome bayesian_invert(const BayesProblem& problem) {
  const auto& tol = problem.tol;
  const CornerData corner = marginal(problem);
  const std::size_t m = problem.forward.dim_out();
  const std::size_t n = problem.forward.dim_in();

  BayesOutcome out;
  out.diagnostics.emplace_back("commutant_residual", commutant_residual(problem, corner));

  const auto sa = check_corner_selfadjoint(corner, tol);
  out.diagnostics.emplace_back("selfadjoint_defect", sa.defect);
  if (!sa.ok) {
    out.status = BayesStatus::FailsSelfAdjoint;
    out.witness = sa.defect;
    return out;
  }

  const CMatrix defect = completion_defect(corner, tol);
  const double excess = completion_excess(defect, corner.p_xi_perp, tol);
  out.diagnostics.emplace_back("completion_excess", excess);
  if (excess > tol.psd_tol) {
    out.status = BayesStatus::FailsCompletion;
    out.witness = excess;
    return out;
  }

  const auto parts = completion_parts(corner, tol);
  const CMatrix tau = CMatrix::Identity(idx(m), idx(m)) / static_cast<double>(m);
  Channel g = channel_from_assembled(assemble_choi(corner, parts, tau), m, n, tol);

  const auto cert = certify(problem.forward, g, problem.rho, tol);
  assert_certificates(cert, tol, "constructed inverse");

  out.status = BayesStatus::Exists;
  // With m = 1 the only unital map out of M_1 is fixed, whatever D is.
  out.unique = max_abs(defect - corner.p_xi_perp) <= tol.eq_tol || m == 1;
  out.certificates = cert;
  out.diagnostics.emplace_back("state_preservation_residual",
                               state_preservation_residual(g, corner.sigma, problem.rho));
  out.inverse = std::move(g);
  return out;
}

ResidualCheck verify_bayes_condition(const Channel& f, const ChoiMatrix& g, const CMatrix& rho,
                                     const Tolerances& tol) {
  if (g.dim_in != f.dim_out() || g.dim_out != f.dim_in()) {
    throw Error(ErrorKind::DimensionMismatch, "candidate inverse has the wrong shape");
  }
  if (rho.rows() != idx(f.dim_out()) || rho.cols() != idx(f.dim_out())) {
    throw Error(ErrorKind::DimensionMismatch, "rho does not match the channel output");
  }
  const CMatrix sigma = apply(hs_dual(f), rho);
  ResidualCheck out;
  out.residual = kernels::bayes_residual_parallel(g.matrix, f.choi().matrix, sigma, rho);
  out.ok = out.residual <= tol.eq_tol;
  return out;
}

ResidualCheck verify_bayes_condition(const Channel& f, const Channel& g, const CMatrix& rho,
                                     const Tolerances& tol) {
  return verify_bayes_condition(f, g.choi(), rho, tol);
}

ResidualCheck verify_bayes_condition(const Channel& f, const LinearMap& g, const CMatrix& rho,
                                     const Tolerances& tol) {
  return verify_bayes_condition(f, g.choi(), rho, tol);
}

bool ae_equal(const ChoiMatrix& f, const ChoiMatrix& g, const CMatrix& omega_density,
              const Tolerances& tol) {
  if (f.dim_in != g.dim_in || f.dim_out != g.dim_out) {
    throw Error(ErrorKind::DimensionMismatch, "maps have different shapes");
  }
  const Eigen::Index m = idx(f.dim_out);
  if (omega_density.rows() != m || omega_density.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch, "state does not live on the output algebra");
  }
  const CMatrix p = support(hermitian_part(omega_density), tol);
  const CMatrix diff = f.matrix - g.matrix;
  double worst = 0.0;
  for (std::size_t i = 0; i < f.dim_in; ++i)
    for (std::size_t j = 0; j < f.dim_in; ++j)
      worst = std::max(worst, max_abs(diff.block(idx(i) * m, idx(j) * m, m, m) * p));
  return worst <= tol.eq_tol;
}

bool ae_equal(const Channel& f, const Channel& g, const CMatrix& omega_density,
              const Tolerances& tol) {
  return ae_equal(f.choi(), g.choi(), omega_density, tol);
}

Channel corner_kraus(const BayesProblem& problem, const CornerData& corner) {
  const auto sa = check_corner_selfadjoint(corner, problem.tol);
  if (!sa.ok) {
    throw Error(ErrorKind::CornerNotSelfAdjoint, "corner Choi matrix is not self-adjoint",
                sa.defect);
  }
  const CMatrix left = psd_sqrt(corner.sigma_hat, problem.tol);
  const CMatrix right = psd_sqrt(hermitian_part(problem.rho), problem.tol);
  std::vector<CMatrix> kraus;
  for (const auto& v : problem.forward.kraus()) kraus.push_back(left * v.adjoint() * right);
  return Channel(problem.forward.dim_out(), problem.forward.dim_in(), std::move(kraus));
}

Channel povm_channel(const std::vector<CMatrix>& elements) {
  if (elements.empty()) throw Error(ErrorKind::NotAPOVM, "POVM has no elements");
  const std::size_t m = static_cast<std::size_t>(elements.front().rows());
  const std::size_t ny = elements.size();
  std::vector<CMatrix> kraus;
  for (std::size_t y = 0; y < ny; ++y) {
    const CMatrix root = psd_sqrt(hermitian_part(elements[y]));
    for (Eigen::Index k = 0; k < root.cols(); ++k)
      kraus.push_back(root.col(k) * diag_unit(ny, y).adjoint());
  }
  return Channel(ny, m, std::move(kraus));
}

Channel ensemble_channel(const std::vector<CMatrix>& states) {
  if (states.empty()) throw Error(ErrorKind::NotAnEnsemble, "ensemble has no states");
  const std::size_t n = static_cast<std::size_t>(states.front().rows());
  const std::size_t nx = states.size();
  std::vector<CMatrix> kraus;
  for (std::size_t x = 0; x < nx; ++x) {
    const CMatrix root = psd_sqrt(hermitian_part(states[x]));
    for (Eigen::Index k = 0; k < root.rows(); ++k)
      kraus.push_back(diag_unit(nx, x) * root.row(k));
  }
  return Channel(n, nx, std::move(kraus));
}

Channel collapse_channel(const std::vector<CMatrix>& projections) {
  if (projections.empty()) throw Error(ErrorKind::NotAResolution, "no projections given");
  const std::size_t m = static_cast<std::size_t>(projections.front().rows());
  return Channel(m, m, projections);
}

BayesOutcome povm_bayes(const std::vector<CMatrix>& elements, const CMatrix& rho,
                        const Tolerances& tol) {
  tol.validate();
  if (elements.empty()) throw Error(ErrorKind::NotAPOVM, "POVM has no elements");
  const Eigen::Index m = elements.front().rows();
  CMatrix total = CMatrix::Zero(m, m);
  for (const auto& e : elements) {
    if (e.rows() != m || e.cols() != m) throw Error(ErrorKind::NotAPOVM, "POVM elements differ in size");
    const double herm = hermitian_defect(e);
    if (herm > tol.eq_tol) throw Error(ErrorKind::NotAPOVM, "POVM element is not Hermitian", herm);
    const auto psd = is_psd(hermitian_part(e), tol);
    if (!psd.ok) throw Error(ErrorKind::NotAPOVM, "POVM element is not PSD", psd.min_eigenvalue);
    total += e;
  }
  const double sum_err = max_abs(total - CMatrix::Identity(m, m));
  if (sum_err > tol.eq_tol) throw Error(ErrorKind::NotAPOVM, "POVM elements do not sum to 1", sum_err);
  require_density(rho, m, tol, ErrorKind::InvalidProblem, "rho");

  const std::size_t ny = elements.size();
  const CMatrix r = hermitian_part(rho);
  std::vector<double> q(ny);
  double commutator = 0.0;
  CMatrix fixed_point = CMatrix::Zero(m, m);
  std::vector<CMatrix> roots(ny);
  bool null_block = false;
  for (std::size_t y = 0; y < ny; ++y) {
    const CMatrix fy = hermitian_part(elements[y]);
    q[y] = (r * fy).trace().real();
    roots[y] = psd_sqrt(fy, tol);
    fixed_point += roots[y] * r * roots[y];
    if (q[y] > tol.rank_tol) {
      commutator = std::max(commutator, max_abs(r * fy - fy * r));
    } else {
      null_block = true;
    }
  }

  BayesOutcome out;
  out.diagnostics.emplace_back("max_commutator", commutator);
  out.diagnostics.emplace_back("fixed_point_residual", max_abs(fixed_point - r));
  if (commutator > tol.eq_tol) {
    out.status = BayesStatus::FailsSelfAdjoint;
    out.witness = commutator;
    return out;
  }

  const CMatrix root_rho = psd_sqrt(r, tol);
  std::vector<CMatrix> kraus;
  for (std::size_t y = 0; y < ny; ++y) {
    const CMatrix ey = diag_unit(ny, y);
    if (q[y] > tol.rank_tol) {
      // tr(rho A F_y) / q_y = sum_k x_k A x_k^dagger, x_k rows of sqrt(F_y) sqrt(rho)
      const CMatrix x = roots[y] * root_rho / std::sqrt(q[y]);
      for (Eigen::Index k = 0; k < m; ++k) kraus.push_back(ey * x.row(k));
    } else {
      for (Eigen::Index k = 0; k < m; ++k)
        kraus.push_back(ey * diag_unit(static_cast<std::size_t>(m), static_cast<std::size_t>(k)).adjoint() /
                        std::sqrt(static_cast<double>(m)));
    }
  }
  Channel g(static_cast<std::size_t>(m), ny, std::move(kraus));
  const auto cert = certify(povm_channel(elements), g, r, tol);
  assert_certificates(cert, tol, "POVM inverse");
  out.status = BayesStatus::Exists;
  out.unique = !null_block || m == 1;
  out.certificates = cert;
  out.inverse = std::move(g);
  return out;
}

BayesOutcome ensemble_bayes(const std::vector<CMatrix>& states, const std::vector<double>& p,
                            const Tolerances& tol) {
  tol.validate();
  if (states.empty()) throw Error(ErrorKind::NotAnEnsemble, "ensemble has no states");
  if (states.size() != p.size()) {
    throw Error(ErrorKind::NotAnEnsemble, "number of weights does not match number of states");
  }
  const Eigen::Index n = states.front().rows();
  double psum = 0.0;
  for (double w : p) {
    if (!(w >= -tol.psd_tol)) throw Error(ErrorKind::NotAnEnsemble, "negative weight", w);
    psum += w;
  }
  if (std::abs(psum - 1.0) > tol.eq_tol) {
    throw Error(ErrorKind::NotAnEnsemble, "weights do not sum to 1", psum);
  }
  for (const auto& s : states) require_density(s, n, tol, ErrorKind::NotAnEnsemble, "ensemble state");

  const std::size_t nx = states.size();
  CMatrix sigma = CMatrix::Zero(n, n);
  for (std::size_t x = 0; x < nx; ++x) sigma += std::max(p[x], 0.0) * hermitian_part(states[x]);
  sigma = hermitian_part(sigma);
  const CMatrix sigma_hat = pseudoinverse(sigma, tol);
  const CMatrix p_xi = support(sigma, tol);
  const CMatrix p_perp = CMatrix::Identity(n, n) - p_xi;

  double commutator = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    const CMatrix sx = hermitian_part(states[x]);
    commutator = std::max(commutator, std::max(p[x], 0.0) * max_abs(sigma * sx - sx * sigma));
  }
  BayesOutcome out;
  out.diagnostics.emplace_back("max_commutator", commutator);
  if (commutator > tol.eq_tol) {
    out.status = BayesStatus::FailsSelfAdjoint;
    out.witness = commutator;
    return out;
  }

  std::vector<CMatrix> kraus;
  for (std::size_t x = 0; x < nx; ++x) {
    const double px = std::max(p[x], 0.0);
    const CMatrix gx = hermitian_part(px * (sigma_hat * hermitian_part(states[x]) + p_perp));
    const CMatrix root = psd_sqrt(gx, tol);
    const CMatrix ex = diag_unit(nx, x);
    for (Eigen::Index k = 0; k < n; ++k) kraus.push_back(root.col(k) * ex.adjoint());
  }
  Channel g(nx, static_cast<std::size_t>(n), std::move(kraus));
  CMatrix rho = CMatrix::Zero(idx(nx), idx(nx));
  for (std::size_t x = 0; x < nx; ++x) rho(idx(x), idx(x)) = std::max(p[x], 0.0);
  const auto cert = certify(ensemble_channel(states), g, rho, tol);
  assert_certificates(cert, tol, "ensemble inverse");
  out.status = BayesStatus::Exists;
  out.unique = max_abs(p_perp) <= tol.eq_tol || nx == 1;
  out.certificates = cert;
  out.inverse = std::move(g);
  return out;
}

BayesOutcome wave_collapse_invert(const std::vector<CMatrix>& projections, const CMatrix& rho,
                                  const Tolerances& tol) {
  tol.validate();
  if (projections.empty()) throw Error(ErrorKind::NotAResolution, "no projections given");
  const Eigen::Index m = projections.front().rows();
  CMatrix total = CMatrix::Zero(m, m);
  for (std::size_t a = 0; a < projections.size(); ++a) {
    const CMatrix& p = projections[a];
    if (p.rows() != m || p.cols() != m) {
      throw Error(ErrorKind::NotAResolution, "projections differ in size");
    }
    const double idem = std::max(max_abs(p * p - p), hermitian_defect(p));
    if (idem > tol.eq_tol) throw Error(ErrorKind::NotAResolution, "not an orthogonal projection", idem);
    for (std::size_t b = a + 1; b < projections.size(); ++b) {
      const double overlap = max_abs(p * projections[b]);
      if (overlap > tol.eq_tol) {
        throw Error(ErrorKind::NotAResolution, "projections are not pairwise orthogonal", overlap);
      }
    }
    total += p;
  }
  const double sum_err = max_abs(total - CMatrix::Identity(m, m));
  if (sum_err > tol.eq_tol) throw Error(ErrorKind::NotAResolution, "projections do not sum to 1", sum_err);
  require_density(rho, m, tol, ErrorKind::InvalidProblem, "rho");

  const Channel f = collapse_channel(projections);
  const CMatrix r = hermitian_part(rho);
  const double coherence = max_abs(r - apply(f, r));

  BayesOutcome out;
  out.diagnostics.emplace_back("coherence", coherence);
  if (coherence <= tol.eq_tol) {
    const auto cert = certify(f, f, r, tol);
    assert_certificates(cert, tol, "wave collapse inverse");
    out.status = BayesStatus::Exists;
    out.unique = true;
    out.certificates = cert;
    out.inverse = f;
    return out;
  }
  const auto engine = bayesian_invert(BayesProblem{f, r, tol});
  out.status = engine.exists() ? BayesStatus::FailsSelfAdjoint : engine.status;
  out.witness = coherence;
  out.diagnostics.emplace_back("engine_witness", engine.witness);
  return out;
}

Channel isometry_bayes(const CMatrix& v, const CMatrix& rho, const Tolerances& tol) {
  tol.validate();
  const Eigen::Index m = v.rows();
  const Eigen::Index n = v.cols();
  if (m == 0 || n < m) throw Error(ErrorKind::NotCoisometry, "V must be m x n with m <= n");
  const double co = max_abs(v * v.adjoint() - CMatrix::Identity(m, m));
  if (co > tol.eq_tol) throw Error(ErrorKind::NotCoisometry, "V V^dagger != 1", co);
  require_density(rho, m, tol, ErrorKind::InvalidProblem, "rho");

  const CMatrix range = hermitian_part(v.adjoint() * v);
  const CMatrix kernel = CMatrix::Identity(n, n) - range;
  const CMatrix w = range_basis(kernel, tol);
  std::vector<CMatrix> kraus{v.adjoint()};
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index l = 0; l < w.cols(); ++l)
    for (Eigen::Index k = 0; k < m; ++k)
      kraus.push_back(scale * w.col(l) *
                      diag_unit(static_cast<std::size_t>(m), static_cast<std::size_t>(k)).adjoint());
  Channel g(static_cast<std::size_t>(m), static_cast<std::size_t>(n), std::move(kraus));

  const Channel f = Channel::adjoint_action(v);
  const CMatrix r = hermitian_part(rho);
  assert_certificates(certify(f, g, r, tol), tol, "isometry inverse");
  const CMatrix p_xi = support(hermitian_part(apply(hs_dual(f), r)), tol);
  const double outside = max_abs(p_xi * kernel);
  if (outside > 10.0 * tol.eq_tol) {
    throw Error(ErrorKind::InternalInconsistency, "support of xi is not below V^dagger V", outside);
  }
  return g;
}

CMatrix schur_factor(const CMatrix& a, const CMatrix& b, const CMatrix& c, const Tolerances& tol) {
  if (a.rows() != a.cols() || c.rows() != c.cols() || b.rows() != a.rows() || b.cols() != c.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "block shapes are inconsistent");
  }
  const double herm_a = hermitian_defect(a);
  if (herm_a > tol.eq_tol) {
    throw Error(ErrorKind::PreconditionFailed, "condition 1: A is not Hermitian", herm_a);
  }
  const CMatrix ah = hermitian_part(a);
  const auto psd_a = is_psd(ah, tol);
  if (!psd_a.ok) {
    throw Error(ErrorKind::PreconditionFailed, "condition 1: A is not PSD", psd_a.min_eigenvalue);
  }
  const double ker = max_abs(support(ah, tol) * b - b);
  if (ker > tol.eq_tol) {
    throw Error(ErrorKind::PreconditionFailed, "condition 2: ker A is not inside ker B^dagger", ker);
  }
  const CMatrix a_hat = pseudoinverse(ah, tol);
  const CMatrix schur = c - b.adjoint() * a_hat * b;
  const double herm_s = hermitian_defect(schur);
  if (herm_s > tol.eq_tol) {
    throw Error(ErrorKind::PreconditionFailed, "condition 3: C - B^dagger A^+ B is not Hermitian",
                herm_s);
  }
  const auto psd_s = is_psd(hermitian_part(schur), tol);
  if (!psd_s.ok) {
    throw Error(ErrorKind::PreconditionFailed, "condition 3: C - B^dagger A^+ B is not PSD",
                psd_s.min_eigenvalue);
  }
  const Eigen::Index p = a.rows();
  const Eigen::Index q = c.rows();
  CMatrix l = CMatrix::Zero(p + q, p + q);
  l.topLeftCorner(p, p) = psd_sqrt(ah, tol);
  l.bottomLeftCorner(q, p) = b.adjoint() * psd_sqrt(a_hat, tol);
  l.bottomRightCorner(q, q) = psd_sqrt(hermitian_part(schur), tol);
  return l;
}

namespace detail {

Channel complete_with_filler(const BayesProblem& problem, const CMatrix& tau) {
  const auto& tol = problem.tol;
  const std::size_t m = problem.forward.dim_out();
  require_density(tau, idx(m), tol, ErrorKind::InvalidProblem, "filler");
  const CornerData corner = marginal(problem);
  if (!check_corner_selfadjoint(corner, tol).ok) {
    throw Error(ErrorKind::InvalidProblem, "no Bayesian inverse exists");
  }
  const CMatrix defect = completion_defect(corner, tol);
  if (completion_excess(defect, corner.p_xi_perp, tol) > tol.psd_tol) {
    throw Error(ErrorKind::InvalidProblem, "no Bayesian inverse exists");
  }
  const auto parts = completion_parts(corner, tol);
  return channel_from_assembled(assemble_choi(corner, parts, hermitian_part(tau)), m,
                                problem.forward.dim_in(), tol);
}

}  // namespace detail

}  // namespace qbayes
