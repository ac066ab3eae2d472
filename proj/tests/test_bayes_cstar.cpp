#include <gtest/gtest.h>

#include "qbayes/bayes_cstar.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace qbayes;
using qbayes::testing::Gen;

namespace {

CMatrix diag(std::initializer_list<double> d) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index k = 0;
  for (double v : d) m(k, k) = v, ++k;
  return m;
}

Eigen::MatrixXd grocery_f() {
  Eigen::MatrixXd f(2, 2);
  f << 0.9, 0.6, 0.1, 0.4;
  return f;
}

Eigen::VectorXd grocery_p() { return Eigen::Vector2d(0.3, 0.7); }

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Channel bitflip(double l1) {
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return Channel(2, 2, {std::sqrt(l1) * CMatrix::Identity(2, 2), std::sqrt(1 - l1) * x});
}

Channel support_gap(double q) {
  CMatrix v1 = CMatrix::Zero(2, 3), v2 = CMatrix::Zero(2, 3);
  v1(0, 0) = std::sqrt(q);
  v1(1, 2) = std::sqrt(1 - q);
  v2(0, 1) = std::sqrt(1 - q);
  v2(1, 2) = std::sqrt(q);
  return Channel(3, 2, {v1, v2});
}

}  // namespace

TEST(CStarMarginal, Examples) {
  Gen g(71);
  const Channel f = g.cpu_channel(3, 2, 2);
  const CMatrix rho = g.density(2);
  const auto xi = cstar_marginal(block_of(f), single_block_state(rho));
  ASSERT_EQ(xi.weights.size(), 1u);
  EXPECT_NEAR(xi.weights[0], 1.0, 1e-12);
  EXPECT_LE(max_abs(xi.densities[0] - marginal({f, rho, {}}).sigma), 1e-12);

  const Eigen::MatrixXd fs = g.stochastic(3, 4);
  const Eigen::VectorXd p = vec(g.probabilities(4));
  const auto xc = cstar_marginal(embed_classical(fs), classical_state(p));
  const Eigen::VectorXd q = fs * p;
  for (Eigen::Index y = 0; y < 3; ++y) EXPECT_NEAR(xc.weights[static_cast<std::size_t>(y)], q(y), 1e-12);

  const auto elements = g.povm(3, 3);
  const CMatrix r3 = g.density(3);
  const auto xq = cstar_marginal(povm_to_cstar(elements), single_block_state(r3));
  for (std::size_t y = 0; y < 3; ++y) EXPECT_NEAR(xq.weights[y], (r3 * elements[y]).trace().real(), 1e-12);
}

TEST(CStarInvert, SingleBlockReduction) {
  Gen g(72);
  std::vector<BayesProblem> corpus{
      {bitflip(0.4), diag({0.5, 0.5}), {}},
      {bitflip(0.4), diag({0.3, 0.7}), {}},
      {support_gap(0.3), diag({1, 0}), {}},
      {Channel::adjoint_action(g.coisometry(2, 4)), g.density(2), {}},
      {Channel::adjoint_action(g.coisometry(2, 3)), g.pure_state(2), {}},
      {Channel::adjoint_action(g.unitary(3)), g.density(3, 2), {}},
  };
  for (const auto& p : corpus) {
    const auto m = bayesian_invert(p);
    const auto c = cstar_bayesian_invert(block_of(p.forward), single_block_state(p.rho), p.tol);
    EXPECT_EQ(m.status, c.status);
    if (m.exists()) {
      EXPECT_EQ(m.unique, c.unique);
      EXPECT_LE(apply_distance(m.inverse->choi(), channel_of_single_block(*c.inverse).choi()), 1e-8);
    } else {
      EXPECT_NEAR(m.witness, c.witness, 1e-9);
    }
  }
}

TEST(CStarInvert, ClassicalFormula) {
  Gen g(73);
  for (int t = 0; t < 30; ++t) {
    const auto ny = g.index(1, 4), nx = g.index(1, 4);
    const Eigen::MatrixXd f = g.stochastic(ny, nx, true);
    const Eigen::VectorXd p = vec(g.probabilities(nx, true));
    const auto out = cstar_bayesian_invert(embed_classical(f), classical_state(p));
    ASSERT_TRUE(out.exists());
    const Eigen::MatrixXd got = project_classical(*out.inverse);
    const Eigen::MatrixXd expect = oracle::classical_bayes(f, p);
    for (Eigen::Index y = 0; y < f.rows(); ++y)
      for (Eigen::Index x = 0; x < f.cols(); ++x) {
        const double e = expect(x, y) < 0 ? 1.0 / static_cast<double>(nx) : expect(x, y);
        EXPECT_NEAR(got(x, y), e, 1e-12);
      }
  }
}

TEST(CStarInvert, InstrumentShaped) {
  Gen g(74);
  int exists = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 2, ny = 2;
    CStarAlgebra source{std::vector<std::size_t>(ny, m)};
    CStarAlgebra target{{m}};
    BlockChannel f = BlockChannel::zeros(source, target);
    // Odd trials: a generic instrument. Even trials: F_y = t_y Ad_{U_y}, whose
    // inverse U_y^dagger (.) U_y always exists for invertible rho.
    if (t % 2) {
      const Channel all = g.cpu_channel(m, m, ny * 2);
      for (std::size_t y = 0; y < ny; ++y)
        f.set_entry(0, y, Channel(m, m, {all.kraus()[2 * y], all.kraus()[2 * y + 1]}));
    } else {
      const auto t_y = g.probabilities(ny);
      for (std::size_t y = 0; y < ny; ++y)
        f.set_entry(0, y, Channel(m, m, {std::sqrt(t_y[y]) * g.unitary(2)}));
    }
    const CMatrix rho = g.density(2);
    const CStarState omega{{1.0}, {rho}};
    const auto out = cstar_bayesian_invert(f, omega);
    if (!out.exists()) {
      EXPECT_TRUE(out.fail_y.has_value());
      continue;
    }
    ++exists;
    for (std::size_t y = 0; y < ny; ++y) {
      EXPECT_GE(is_cp(out.inverse->entry(y, 0)).value,
                -1e-9);
      EXPECT_LE(max_abs(apply(out.inverse->entry(y, 0), CMatrix::Identity(2, 2)) - CMatrix::Identity(2, 2)),
                1e-9);
    }
    EXPECT_LE(cstar_verify_bayes(f, *out.inverse, omega), 1e-8);
  }
  EXPECT_GT(exists, 0);
}

TEST(CStarInvert, NullBlocksGetFiller) {
  // Second source block is never reached: F_{x,1} = 0 for every x.
  CStarAlgebra source{{2, 1}};
  CStarAlgebra target{{2, 1}};
  BlockChannel f = BlockChannel::zeros(source, target);
  f.set_entry(0, 0, Channel::identity(2));
  f.set_entry(1, 1, Channel::identity(1));
  const CStarState omega{{1.0, 0.0}, {diag({0.4, 0.6}), CMatrix::Identity(1, 1)}};
  const auto out = cstar_bayesian_invert(f, omega);
  ASSERT_TRUE(out.exists());
  EXPECT_FALSE(out.unique);
  Gen g(75);
  const CMatrix a = g.gaussian(2, 2);
  const CMatrix filled = apply(out.inverse->entry(1, 0), a);
  EXPECT_LE(max_abs(filled - a.trace() / 4.0 * CMatrix::Identity(1, 1)), 1e-12);
  EXPECT_LE(max_abs(apply(out.inverse->entry(1, 1), CMatrix::Ones(1, 1)) - 0.5 * CMatrix::Ones(1, 1)), 1e-12);
  EXPECT_LE(cstar_verify_bayes(f, *out.inverse, omega), 1e-12);
  EXPECT_LE(null_block_corner_leak(f, omega), 1e-12);
}

TEST(CStarVerify, Examples) {
  Eigen::MatrixXd g(2, 2);
  g << 0.27 / 0.69, 0.03 / 0.31, 0.42 / 0.69, 0.28 / 0.31;
  const auto fe = embed_classical(grocery_f());
  const auto omega = classical_state(grocery_p());
  EXPECT_LE(cstar_verify_bayes(fe, embed_classical(g), omega), 1e-15);

  Gen gen(76);
  for (int t = 0; t < 10; ++t) {
    const auto elements = gen.povm(2, 3);
    const CMatrix rho = gen.density(2);
    const auto f = povm_to_cstar(elements);
    const auto st = single_block_state(rho);
    const auto out = cstar_bayesian_invert(f, st);
    if (out.exists()) EXPECT_LE(cstar_verify_bayes(f, *out.inverse, st), 1e-7);
  }

  Eigen::MatrixXd bad = g;
  bad(0, 0) += 1e-3;
  bad(1, 0) -= 1e-3;
  EXPECT_GE(cstar_verify_bayes(fe, embed_classical(bad), omega), 1e-4);
}

TEST(ClassicalBayes, Examples) {
  const Eigen::MatrixXd g = classical_bayes(grocery_f(), grocery_p());
  EXPECT_NEAR(g(0, 0), 0.27 / 0.69, 1e-12);
  EXPECT_NEAR(g(0, 1), 0.03 / 0.31, 1e-12);
  EXPECT_NEAR(g(0, 0), 0.391, 5e-4);
  EXPECT_NEAR(g(0, 1), 0.097, 5e-4);

  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(3, 3);
  perm(1, 0) = perm(2, 1) = perm(0, 2) = 1.0;
  EXPECT_LE((classical_bayes(perm, Eigen::Vector3d(0.2, 0.3, 0.5)) - perm.transpose()).cwiseAbs().maxCoeff(),
            1e-15);

  Gen gen(77);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd f = gen.stochastic(gen.index(1, 5), gen.index(1, 5));
    const Eigen::VectorXd p = vec(gen.probabilities(static_cast<std::size_t>(f.cols())));
    const Eigen::MatrixXd r = classical_bayes(f, p);
    const Eigen::VectorXd q = f * p;
    for (Eigen::Index x = 0; x < f.cols(); ++x)
      for (Eigen::Index y = 0; y < f.rows(); ++y) EXPECT_NEAR(r(x, y) * q(y), f(y, x) * p(x), 1e-12);
    for (Eigen::Index y = 0; y < f.rows(); ++y) EXPECT_NEAR(r.col(y).sum(), 1.0, 1e-12);
  }
  Eigen::MatrixXd notstoch = grocery_f();
  notstoch(0, 0) = 0.5;
  try {
    classical_bayes(notstoch, grocery_p());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotStochastic);
  }
}

TEST(ClassicalDisintegration, Examples) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_LE((classical_disintegration(id, Eigen::Vector3d(0.2, 0.3, 0.5)) - id).cwiseAbs().maxCoeff(), 1e-15);

  Eigen::MatrixXd merge(1, 2);
  merge << 1, 1;
  const Eigen::MatrixXd r = classical_disintegration(merge, Eigen::Vector2d(1.0 / 3, 2.0 / 3));
  EXPECT_NEAR(r(0, 0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(r(1, 0), 2.0 / 3, 1e-15);

  Gen gen(78);
  for (int t = 0; t < 20; ++t) {
    const auto nx = gen.index(1, 5), ny = gen.index(1, 4);
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
    for (std::size_t x = 0; x < nx; ++x) f(static_cast<Eigen::Index>(gen.index(0, ny - 1)), static_cast<Eigen::Index>(x)) = 1.0;
    const Eigen::VectorXd p = vec(gen.probabilities(nx));
    const Eigen::MatrixXd rr = classical_disintegration(f, p);
    const Eigen::VectorXd q = f * p;
    // r is a section q-a.e. and pushes q to p.
    const Eigen::MatrixXd fr = f * rr;
    for (Eigen::Index y = 0; y < f.rows(); ++y)
      if (q(y) > 0) EXPECT_NEAR(fr(y, y), 1.0, 1e-12);
    EXPECT_LE((rr * q - p).cwiseAbs().maxCoeff(), 1e-12);
  }
  Eigen::MatrixXd soft = grocery_f();
  try {
    classical_disintegration(soft, grocery_p());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotDeterministic);
  }
}

TEST(EmbedClassical, Examples) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  const auto e = embed_classical(id);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y)
      EXPECT_NEAR(std::abs(e.entry(x, y).choi().matrix(0, 0)), x == y ? 1.0 : 0.0, 1e-15);

  const auto out = cstar_bayesian_invert(embed_classical(grocery_f()), classical_state(grocery_p()));
  ASSERT_TRUE(out.exists());
  EXPECT_LE((project_classical(*out.inverse) - classical_bayes(grocery_f(), grocery_p())).cwiseAbs().maxCoeff(),
            1e-12);

  Gen gen(79);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd f = gen.stochastic(gen.index(1, 4), gen.index(1, 4));
    const Eigen::VectorXd p = vec(gen.probabilities(static_cast<std::size_t>(f.cols())));
    EXPECT_LE((project_classical(embed_classical(f)) - f).cwiseAbs().maxCoeff(), 1e-15);
    const Eigen::MatrixXd gg = gen.stochastic(static_cast<std::size_t>(f.cols()), static_cast<std::size_t>(f.rows()));
    double classical = 0.0;
    const Eigen::VectorXd q = f * p;
    for (Eigen::Index x = 0; x < f.cols(); ++x)
      for (Eigen::Index y = 0; y < f.rows(); ++y)
        classical = std::max(classical, std::abs(gg(x, y) * q(y) - f(y, x) * p(x)));
    EXPECT_NEAR(cstar_verify_bayes(embed_classical(f), embed_classical(gg), classical_state(p)), classical, 1e-12);
  }
}

TEST(BlockChannel, Validation) {
  CStarAlgebra s{{2}};
  CStarAlgebra t{{2, 1}};
  EXPECT_THROW(BlockChannel(s, t, {Channel::identity(2)}), Error);
  EXPECT_THROW((CStarAlgebra{{}}.validate()), Error);
  EXPECT_THROW((CStarAlgebra{{0}}.validate()), Error);
  const CStarState bad{{0.5, 0.6}, {CMatrix::Identity(2, 2) / 2.0, CMatrix::Ones(1, 1)}};
  EXPECT_THROW(bad.validate(t, {}), Error);
}
