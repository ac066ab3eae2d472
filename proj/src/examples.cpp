#include <cmath>
#include <functional>
#include <map>

#include "qbayes/io.hpp"

namespace qbayes::io {

namespace {

CMatrix diag(std::initializer_list<double> d) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index k = 0;
  for (double v : d) m(k, k) = v, ++k;
  return m;
}

CMatrix real(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> entries) {
  CMatrix m(rows, cols);
  auto it = entries.begin();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = *it++;
  return m;
}

Json list(const std::vector<CMatrix>& ms) {
  Json j = Json::array();
  for (const auto& m : ms) j.push_back(matrix_to_json(m));
  return j;
}

Json bitflip(double lambda1, double p1) {
  const CMatrix x = real(2, 2, {0, 1, 1, 0});
  const Channel f(2, 2, {std::sqrt(lambda1) * CMatrix::Identity(2, 2), std::sqrt(1.0 - lambda1) * x});
  Json j;
  j["kind"] = "matrix";
  j["channel"] = channel_to_json(f);
  j["rho"] = matrix_to_json(diag({p1, 1.0 - p1}));
  return j;
}

Json support_gap(double q) {
  const double a = std::sqrt(q);
  const double b = std::sqrt(1.0 - q);
  const Channel f(3, 2, {real(2, 3, {a, 0, 0, 0, 0, b}), real(2, 3, {0, b, 0, 0, 0, a})});
  Json j;
  j["kind"] = "matrix";
  j["channel"] = channel_to_json(f);
  j["rho"] = matrix_to_json(diag({1.0, 0.0}));
  return j;
}

Json grocery() {
  Json j;
  j["kind"] = "classical";
  j["f"] = Json::array({Json::array({0.9, 0.6}), Json::array({0.1, 0.4})});
  j["p"] = Json::array({0.3, 0.7});
  return j;
}

Json povm(const std::vector<CMatrix>& elements, const CMatrix& rho) {
  Json j;
  j["kind"] = "povm";
  j["elements"] = list(elements);
  j["rho"] = matrix_to_json(rho);
  return j;
}

Json ensemble(const std::vector<CMatrix>& states, std::vector<double> p) {
  Json j;
  j["kind"] = "ensemble";
  j["states"] = list(states);
  j["p"] = std::move(p);
  return j;
}

Json collapse(const CMatrix& rho) {
  Json j;
  j["kind"] = "collapse";
  j["projections"] = list({diag({1, 0}), diag({0, 1})});
  j["rho"] = matrix_to_json(rho);
  return j;
}

Json isometry_embed() {
  Json j;
  j["kind"] = "isometry";
  j["v"] = matrix_to_json(real(2, 3, {1, 0, 0, 0, 1, 0}));
  j["rho"] = matrix_to_json(real(2, 2, {0.7, 0.1, 0.1, 0.3}));
  return j;
}

// F(B) = 1_p (x) B on M_n with p = 2, n = 3 and rho = tau (x) sigma, sigma of rank 2.
Json star_homo() {
  const Eigen::Index p = 2;
  const Eigen::Index n = 3;
  std::vector<CMatrix> kraus;
  for (Eigen::Index i = 0; i < p; ++i) {
    CMatrix e = CMatrix::Zero(p, 1);
    e(i, 0) = 1.0;
    kraus.push_back(tensor(e, CMatrix::Identity(n, n)));
  }
  const Channel f(static_cast<std::size_t>(n), static_cast<std::size_t>(p * n), std::move(kraus));
  const CMatrix tau = real(2, 2, {0.6, 0.2, 0.2, 0.4});
  CVector a = CVector::Zero(n);
  CVector b = CVector::Zero(n);
  a(0) = 1.0;
  b(1) = b(2) = 1.0 / std::sqrt(2.0);
  const CMatrix sigma = 0.5 * (a * a.adjoint() + b * b.adjoint());
  Json j;
  j["kind"] = "matrix";
  j["channel"] = channel_to_json(f);
  j["rho"] = matrix_to_json(tensor(tau, sigma));
  return j;
}

Json cstar_povm() {
  Json j;
  j["kind"] = "cstar";
  j["channel"] = block_channel_to_json(povm_to_cstar({diag({0.7, 0.2}), diag({0.3, 0.8})}));
  j["state"] = state_to_json(single_block_state(diag({0.6, 0.4})));
  return j;
}

const std::map<std::string, std::function<Json()>>& catalog() {
  static const std::map<std::string, std::function<Json()>> c = {
      {"bitflip-half", [] { return bitflip(0.4, 0.5); }},
      {"bitflip-biased", [] { return bitflip(0.4, 0.3); }},
      {"support-gap", [] { return support_gap(0.3); }},
      {"grocery", grocery},
      {"povm-commuting", [] { return povm({diag({0.7, 0.2}), diag({0.3, 0.8})}, diag({0.6, 0.4})); }},
      {"povm-noncommuting",
       [] {
         return povm({real(2, 2, {0.5, 0.3, 0.3, 0.5}), real(2, 2, {0.5, -0.3, -0.3, 0.5})},
                     diag({0.7, 0.3}));
       }},
      {"ensemble-commuting", [] { return ensemble({diag({0.8, 0.2}), diag({0.1, 0.9})}, {0.5, 0.5}); }},
      {"ensemble-noncommuting",
       [] { return ensemble({diag({1, 0}), real(2, 2, {0.5, 0.5, 0.5, 0.5})}, {0.5, 0.5}); }},
      {"collapse-coherent", [] { return collapse(real(2, 2, {0.5, 0.5, 0.5, 0.5})); }},
      {"collapse-decohered", [] { return collapse(diag({0.7, 0.3})); }},
      {"isometry-embed", isometry_embed},
      {"star-homo-disintegration", star_homo},
      {"cstar-povm-commuting", cstar_povm},
  };
  return c;
}

}  // namespace

std::vector<std::string> example_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : catalog()) out.push_back(name);
  return out;
}

Json example_problem(const std::string& name) {
  const auto& c = catalog();
  auto it = c.find(name);
  if (it == c.end()) throw Error(ErrorKind::UnknownExample, "no bundled example named \"" + name + "\"");
  return it->second();
}

}  // namespace qbayes::io
