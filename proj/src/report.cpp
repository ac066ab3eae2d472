#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbayes/io.hpp"

namespace qbayes::io {

namespace {

Json tolerances_json(const Tolerances& tol) {
  Json j;
  j["eq"] = tol.eq_tol;
  j["rank"] = tol.rank_tol;
  j["psd"] = tol.psd_tol;
  return j;
}

Json provenance_json(const ProblemFile& problem, const Tolerances& tol) {
  Json j;
  j["input_digest"] = problem.digest;
  j["tolerances"] = tolerances_json(tol);
  j["version"] = kVersion;
  return j;
}

Json certificates_json(const Certificates& c, bool unique) {
  Json j;
  j["cp_min_eigenvalue"] = c.cp_min_eigenvalue;
  j["unitality_residual"] = c.unitality_residual;
  j["bayes_residual"] = c.bayes_residual;
  j["unique"] = unique;
  return j;
}

Json diagnostics_json(const Diagnostics& d) {
  Json j = Json::object();
  for (const auto& [name, value] : d) j[name] = value;
  return j;
}

int exit_code_of(BayesStatus s) {
  switch (s) {
    case BayesStatus::Exists: return 0;
    case BayesStatus::FailsSelfAdjoint: return 2;
    case BayesStatus::FailsCompletion: return 3;
  }
  return 5;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

InvertResult from_outcome(const ProblemFile& problem, const Tolerances& tol, const BayesOutcome& o) {
  Json r;
  r["status"] = to_string(o.status);
  r["kind"] = to_string(problem.kind);
  if (!o.exists()) r["witness"] = o.witness;
  if (o.inverse) r["inverse"] = channel_to_json(*o.inverse);
  if (o.certificates) r["certificates"] = certificates_json(*o.certificates, o.unique);
  r["diagnostics"] = diagnostics_json(o.diagnostics);
  r["provenance"] = provenance_json(problem, tol);
  return {std::move(r), exit_code_of(o.status)};
}

BlockChannel require_block(const std::optional<BlockChannel>& c) {
  if (!c) throw Error(ErrorKind::ParseError, "/channel: missing block channel");
  return *c;
}

struct ClassicalCert {
  Certificates cert;
  double column_sum_residual = 0.0;
};

// A classical inverse g: Y ~> X is CPU iff entries are nonnegative and columns
// sum to 1; the Bayes condition is g(x|y) q_y = f(y|x) p_x.
ClassicalCert classical_certificates(const RMatrix& f, const Eigen::VectorXd& p, const RMatrix& g) {
  if (g.rows() != f.cols() || g.cols() != f.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "candidate g must be |X| x |Y|");
  }
  const Eigen::VectorXd q = f * p;
  ClassicalCert out;
  out.cert.cp_min_eigenvalue = g.minCoeff();
  double col = 0.0;
  for (Eigen::Index y = 0; y < g.cols(); ++y) col = std::max(col, std::abs(g.col(y).sum() - 1.0));
  out.cert.unitality_residual = col;
  out.column_sum_residual = col;
  double bayes = 0.0;
  for (Eigen::Index x = 0; x < f.cols(); ++x)
    for (Eigen::Index y = 0; y < f.rows(); ++y)
      bayes = std::max(bayes, std::abs(g(x, y) * q(y) - f(y, x) * p(x)));
  out.cert.bayes_residual = bayes;
  return out;
}

InvertResult invert_classical(const ProblemFile& problem, const Tolerances& tol) {
  const RMatrix g = classical_bayes(problem.f, problem.p, tol);
  const auto cc = classical_certificates(problem.f, problem.p, g);
  const Eigen::VectorXd q = problem.f * problem.p;
  const bool unique = q.minCoeff() > tol.rank_tol || problem.f.cols() == 1;

  // The same instance pushed through the direct-sum engine.
  const auto cs = cstar_bayesian_invert(embed_classical(problem.f), classical_state(problem.p), tol);
  double agreement = 0.0;
  if (cs.inverse) agreement = (project_classical(*cs.inverse) - g).cwiseAbs().maxCoeff();

  Json r;
  r["status"] = to_string(BayesStatus::Exists);
  r["kind"] = to_string(problem.kind);
  Json inv;
  inv["g"] = real_matrix_to_json(g);
  r["inverse"] = std::move(inv);
  r["certificates"] = certificates_json(cc.cert, unique);
  Json d;
  d["cstar_agreement"] = cs.inverse ? agreement : -1.0;
  r["diagnostics"] = std::move(d);
  r["provenance"] = provenance_json(problem, tol);
  return {std::move(r), 0};
}

InvertResult invert_isometry(const ProblemFile& problem, const Tolerances& tol) {
  const Channel g = isometry_bayes(problem.v, problem.rho, tol);
  const auto engine = bayesian_invert(BayesProblem{Channel::adjoint_action(problem.v), problem.rho, tol});
  if (!engine.exists()) {
    throw Error(ErrorKind::InternalInconsistency, "engine rejects an isometry instance");
  }
  BayesOutcome o;
  o.status = BayesStatus::Exists;
  o.unique = engine.unique;
  o.inverse = g;
  const Channel f = Channel::adjoint_action(problem.v);
  Certificates c;
  c.cp_min_eigenvalue = is_cp(g, tol).value;
  c.unitality_residual = is_unital(g, tol).value;
  c.bayes_residual = verify_bayes_condition(f, g, problem.rho, tol).residual;
  o.certificates = c;
  o.diagnostics.emplace_back("engine_distance", apply_distance(g.choi(), engine.inverse->choi()));
  return from_outcome(problem, tol, o);
}

InvertResult invert_cstar(const ProblemFile& problem, const Tolerances& tol) {
  if (!problem.state) throw Error(ErrorKind::ParseError, "/state: missing state");
  const auto o = cstar_bayesian_invert(require_block(problem.block_channel), *problem.state, tol);
  Json r;
  r["status"] = to_string(o.status);
  r["kind"] = to_string(problem.kind);
  if (!o.exists()) {
    r["witness"] = o.witness;
    Json fj;
    fj["x"] = o.fail_x ? Json(*o.fail_x) : Json();
    fj["y"] = o.fail_y ? Json(*o.fail_y) : Json();
    r["failure"] = std::move(fj);
  }
  if (o.inverse) r["inverse"] = block_channel_to_json(*o.inverse);
  if (o.certificates) r["certificates"] = certificates_json(*o.certificates, o.unique);
  r["diagnostics"] = diagnostics_json(o.diagnostics);
  r["provenance"] = provenance_json(problem, tol);
  return {std::move(r), exit_code_of(o.status)};
}

// Forward channel and density that the Bayes condition of each kind is checked against.
struct MatrixView {
  Channel forward;
  CMatrix rho;
};

CMatrix diagonal_of(const Eigen::VectorXd& p) {
  CMatrix d = CMatrix::Zero(p.size(), p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) d(k, k) = p(k);
  return d;
}

MatrixView matrix_view(const ProblemFile& problem) {
  switch (problem.kind) {
    case ProblemKind::Matrix:
      if (!problem.channel) throw Error(ErrorKind::ParseError, "/channel: missing channel");
      return {*problem.channel, problem.rho};
    case ProblemKind::Povm: return {povm_channel(problem.operators), problem.rho};
    case ProblemKind::Ensemble: return {ensemble_channel(problem.operators), diagonal_of(problem.p)};
    case ProblemKind::Collapse: return {collapse_channel(problem.operators), problem.rho};
    case ProblemKind::Isometry: return {Channel::adjoint_action(problem.v), problem.rho};
    default: break;
  }
  throw Error(ErrorKind::InternalInconsistency, "no matrix view for this kind");
}

BayesOutcome engine_outcome(const ProblemFile& problem, const Tolerances& tol) {
  switch (problem.kind) {
    case ProblemKind::Matrix: return bayesian_invert(BayesProblem{*problem.channel, problem.rho, tol});
    case ProblemKind::Povm: return povm_bayes(problem.operators, problem.rho, tol);
    case ProblemKind::Ensemble: return ensemble_bayes(problem.operators, to_std(problem.p), tol);
    case ProblemKind::Collapse: return wave_collapse_invert(problem.operators, problem.rho, tol);
    case ProblemKind::Isometry: {
      BayesOutcome o;
      o.status = BayesStatus::Exists;
      o.inverse = isometry_bayes(problem.v, problem.rho, tol);
      return o;
    }
    default: break;
  }
  throw Error(ErrorKind::InternalInconsistency, "no engine for this kind");
}

// Largest off-diagonal entry of any image of a matrix unit.
double diagonal_leak(const Channel& g) {
  const auto& c = g.choi();
  double worst = 0.0;
  for (std::size_t i = 0; i < c.dim_in; ++i)
    for (std::size_t j = 0; j < c.dim_in; ++j) {
      CMatrix b = c.image_of_unit(i, j);
      b.diagonal().setZero();
      worst = std::max(worst, max_abs(b));
    }
  return worst;
}

const Json& inverse_payload(const Json& candidate) {
  if (candidate.is_object() && candidate.contains("inverse")) return candidate["inverse"];
  if (candidate.is_object() && candidate.contains("status")) {
    throw Error(ErrorKind::ParseError, "/inverse: report carries no inverse");
  }
  return candidate;
}

Json thresholds_json(const Tolerances& tol) {
  Json j;
  j["cp_min_eigenvalue"] = -tol.psd_tol;
  j["unitality_residual"] = tol.eq_tol;
  j["bayes_residual"] = 10.0 * tol.eq_tol;
  return j;
}

bool passes(const Certificates& c, const Tolerances& tol) {
  return c.cp_min_eigenvalue >= -tol.psd_tol && c.unitality_residual <= tol.eq_tol &&
         c.bayes_residual <= 10.0 * tol.eq_tol;
}

Json check_certs_json(const Certificates& c) {
  Json j;
  j["cp_min_eigenvalue"] = c.cp_min_eigenvalue;
  j["unitality_residual"] = c.unitality_residual;
  j["bayes_residual"] = c.bayes_residual;
  return j;
}

}  // namespace

InvertResult run_invert(const ProblemFile& problem, const Tolerances& tol) {
  tol.validate();
  switch (problem.kind) {
    case ProblemKind::Classical: return invert_classical(problem, tol);
    case ProblemKind::CStar: return invert_cstar(problem, tol);
    case ProblemKind::Isometry: return invert_isometry(problem, tol);
    default: return from_outcome(problem, tol, engine_outcome(problem, tol));
  }
}

CheckResultReport run_check(const ProblemFile& problem, const Json& candidate, const Tolerances& tol) {
  tol.validate();
  const Json& payload = inverse_payload(candidate);
  Json r;
  r["kind"] = to_string(problem.kind);
  Certificates c;
  bool pass = false;
  Json extra = Json::object();

  if (problem.kind == ProblemKind::Classical) {
    classical_bayes(problem.f, problem.p, tol);  // validates the problem
    const RMatrix g = real_matrix_from_json(payload.is_object() && payload.contains("g") ? payload["g"] : payload,
                                            "/inverse/g");
    c = classical_certificates(problem.f, problem.p, g).cert;
    pass = passes(c, tol);
  } else if (problem.kind == ProblemKind::CStar) {
    if (!problem.state) throw Error(ErrorKind::ParseError, "/state: missing state");
    const BlockChannel f = require_block(problem.block_channel);
    problem.state->validate(f.target(), tol);
    const BlockChannel g = block_channel_from_json(payload, "/inverse");
    c.cp_min_eigenvalue = g.cp_min_eigenvalue(tol);
    c.unitality_residual = g.unitality_residual();
    c.bayes_residual = cstar_verify_bayes(f, g, *problem.state, tol);
    pass = passes(c, tol);
  } else {
    const auto engine = engine_outcome(problem, tol);  // validates the problem
    const MatrixView view = matrix_view(problem);
    const Channel g = channel_from_json(payload, "/inverse");
    if (g.dim_in() != view.forward.dim_out() || g.dim_out() != view.forward.dim_in()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "candidate must map M_" + std::to_string(view.forward.dim_out()) + " to M_" +
                      std::to_string(view.forward.dim_in()));
    }
    c.cp_min_eigenvalue = is_cp(g, tol).value;
    c.unitality_residual = is_unital(g, tol).value;
    c.bayes_residual = verify_bayes_condition(view.forward, g, view.rho, tol).residual;
    pass = passes(c, tol);
    if (problem.kind == ProblemKind::Povm) {
      const double leak = diagonal_leak(g);
      extra["diagonal_leak"] = leak;
      pass = pass && leak <= tol.eq_tol;
    }
    if (engine.inverse) {
      const CMatrix sigma = apply(hs_dual(view.forward), view.rho);
      extra["ae_equal_to_engine"] = ae_equal(g, *engine.inverse, sigma, tol);
    }
  }

  r["pass"] = pass;
  Json cj = check_certs_json(c);
  for (auto it = extra.begin(); it != extra.end(); ++it) cj[it.key()] = *it;
  r["certificates"] = std::move(cj);
  r["thresholds"] = thresholds_json(tol);
  r["provenance"] = provenance_json(problem, tol);
  return {std::move(r), pass};
}

std::string render_text(const Json& report) {
  std::ostringstream os;
  auto scalar = [](const Json& v) {
    if (v.is_number_float()) {
      std::ostringstream s;
      s.precision(10);
      s << v.get<double>();
      return s.str();
    }
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  if (report.contains("status")) os << "status: " << scalar(report["status"]) << '\n';
  if (report.contains("pass")) os << "pass: " << scalar(report["pass"]) << '\n';
  if (report.contains("kind")) os << "kind: " << scalar(report["kind"]) << '\n';
  if (report.contains("witness")) os << "witness: " << scalar(report["witness"]) << '\n';
  if (report.contains("failure")) {
    os << "failure:";
    for (auto it = report["failure"].begin(); it != report["failure"].end(); ++it)
      os << ' ' << it.key() << '=' << scalar(*it);
    os << '\n';
  }
  for (const char* section : {"certificates", "thresholds", "diagnostics"}) {
    if (!report.contains(section) || report[section].empty()) continue;
    os << section << ":\n";
    for (auto it = report[section].begin(); it != report[section].end(); ++it)
      os << "  " << it.key() << ": " << scalar(*it) << '\n';
  }
  if (report.contains("inverse")) {
    const Json& inv = report["inverse"];
    os << "inverse:";
    if (inv.contains("g")) {
      os << '\n';
      for (const auto& row : inv["g"]) {
        os << ' ';
        for (const auto& v : row) os << ' ' << scalar(v);
        os << '\n';
      }
    } else if (inv.contains("kraus")) {
      os << " M_" << inv["dim_in"].dump() << " -> M_" << inv["dim_out"].dump() << ", "
         << inv["kraus"].size() << " Kraus operators\n";
    } else if (inv.contains("entries")) {
      os << ' ' << inv["entries"].size() << " nonzero blocks\n";
    } else {
      os << '\n';
    }
  }
  if (report.contains("provenance")) {
    const Json& p = report["provenance"];
    os << "input: " << scalar(p["input_digest"]) << '\n';
    os << "tolerances:";
    for (auto it = p["tolerances"].begin(); it != p["tolerances"].end(); ++it)
      os << ' ' << it.key() << '=' << scalar(*it);
    os << '\n';
    os << "version: " << scalar(p["version"]) << '\n';
  }
  return os.str();
}

}  // namespace qbayes::io
