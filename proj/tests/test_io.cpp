#include <gtest/gtest.h>

#include "qbayes/io.hpp"
#include "support/random.hpp"

using namespace qbayes;
using namespace qbayes::io;
using qbayes::testing::Gen;

namespace {

ProblemFile example(const std::string& name) { return parse_problem(dump(example_problem(name))); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InternalInconsistency;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Json, MatrixRoundTrip) {
  Gen g(81);
  const CMatrix m = g.gaussian(3, 2);
  EXPECT_EQ(matrix_from_json(Json::parse(dump(matrix_to_json(m))), "/m"), m);
  const CMatrix r = matrix_from_json(Json::parse("[[1, [0, 2]], [3.5, -1]]"), "/m");
  EXPECT_EQ(r(0, 1), Complex(0, 2));
  EXPECT_EQ(r(1, 0), Complex(3.5, 0));
}

TEST(Json, ChannelRoundTrip) {
  Gen g(82);
  const Channel c = g.cpu_channel(3, 2, 2);
  const Channel back = channel_from_json(Json::parse(dump(channel_to_json(c))), "/c");
  EXPECT_EQ(back.choi().matrix, c.choi().matrix);
  const BlockChannel b = povm_to_cstar(g.povm(2, 3));
  const BlockChannel bb = block_channel_from_json(Json::parse(dump(block_channel_to_json(b))), "/b");
  for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(bb.entry(0, s).choi().matrix, b.entry(0, s).choi().matrix);
}

TEST(Parse, Diagnostics) {
  const std::string text = "{\n  \"kind\": \"matrix\",\n  \"rho\": [[1, 0], [0 0]]\n}";
  const auto msg = message_of([&] { parse_problem(text); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_EQ(kind_of([&] { parse_problem(text); }), ErrorKind::ParseError);

  const auto missing = message_of([] { parse_problem(R"({"kind":"matrix","rho":[[1]]})"); });
  EXPECT_NE(missing.find("channel"), std::string::npos) << missing;

  const auto ragged = message_of([] {
    parse_problem(R"({"kind":"povm","elements":[[[1,0],[0,1]]],"rho":[[1,0],[0]]})");
  });
  EXPECT_NE(ragged.find("/rho/1"), std::string::npos) << ragged;

  const auto shape = message_of([] {
    parse_problem(R"({"kind":"matrix","channel":{"dim_in":2,"dim_out":2,"kraus":[[[1]]]},"rho":[[1]]})");
  });
  EXPECT_NE(shape.find("/channel/kraus/0"), std::string::npos) << shape;

  EXPECT_EQ(kind_of([] { parse_problem(R"({"kind":"banana"})"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse_problem(R"({"kind":"classical","f":[[1]],"p":[1],"tolerances":{"eqq":1}})"); }),
            ErrorKind::ParseError);
}

TEST(Tolerances, Precedence) {
  ToleranceOverrides file{1e-7, std::nullopt, 1e-6};
  ToleranceOverrides flags{1e-5, std::nullopt, std::nullopt};
  const Tolerances t = resolve_tolerances(file, flags);
  EXPECT_EQ(t.eq_tol, 1e-5);
  EXPECT_EQ(t.rank_tol, 1e-9);
  EXPECT_EQ(t.psd_tol, 1e-6);
  EXPECT_THROW(resolve_tolerances({}, {1.0, std::nullopt, std::nullopt}), Error);
}

TEST(Invert, CatalogOutcomes) {
  const std::map<std::string, int> expected{
      {"bitflip-half", 0},      {"bitflip-biased", 2},        {"support-gap", 3},
      {"grocery", 0},           {"povm-commuting", 0},        {"povm-noncommuting", 2},
      {"ensemble-commuting", 0}, {"ensemble-noncommuting", 2}, {"collapse-coherent", 2},
      {"collapse-decohered", 0}, {"isometry-embed", 0},       {"star-homo-disintegration", 0},
      {"cstar-povm-commuting", 0},
  };
  for (const auto& name : example_names()) {
    ASSERT_TRUE(expected.count(name)) << name;
    const ProblemFile p = example(name);
    const auto r = run_invert(p, resolve_tolerances(p.tolerances, {}));
    EXPECT_EQ(r.exit_code, expected.at(name)) << name;
    EXPECT_EQ(r.report.contains("certificates"), r.exit_code == 0) << name;
    EXPECT_EQ(r.report.contains("witness"), r.exit_code != 0) << name;
    if (r.exit_code == 0) {
      const auto c = run_check(p, r.report, resolve_tolerances(p.tolerances, {}));
      EXPECT_TRUE(c.pass) << name << "\n" << dump(c.report);
    }
  }
}

TEST(Invert, GroceryAndSupportGapNumbers) {
  const auto gr = run_invert(example("grocery"), {});
  const auto& g = gr.report["inverse"]["g"];
  EXPECT_NEAR(g[0][0].get<double>(), 0.27 / 0.69, 1e-12);
  EXPECT_NEAR(g[0][1].get<double>(), 0.03 / 0.31, 1e-12);
  const auto gap = run_invert(example("support-gap"), {});
  EXPECT_NEAR(gap.report["witness"].get<double>(), 58.0 / 21.0 - 1.0, 1e-9);
  EXPECT_EQ(gap.report["status"], "FailsCompletion");
}

TEST(Invert, Deterministic) {
  for (const auto& name : example_names()) {
    const std::string text = dump(example_problem(name));
    const auto a = dump(run_invert(parse_problem(text), {}).report);
    const auto b = dump(run_invert(parse_problem(text), {}).report);
    EXPECT_EQ(a, b) << name;
  }
  const auto r = run_invert(example("bitflip-half"), {});
  EXPECT_EQ(r.report["provenance"]["version"], kVersion);
  EXPECT_EQ(r.report["provenance"]["input_digest"].get<std::string>().rfind("sha256:", 0), 0u);
}

TEST(Check, Examples) {
  const ProblemFile bf = example("bitflip-half");
  const Json own = channel_to_json(*bf.channel);
  EXPECT_TRUE(run_check(bf, own, {}).pass);

  const ProblemFile wc = example("collapse-decohered");
  Json f = Json::object();
  std::vector<CMatrix> kraus = wc.operators;
  EXPECT_TRUE(run_check(wc, channel_to_json(Channel(2, 2, kraus)), {}).pass);

  const ProblemFile gr = example("grocery");
  Json g = run_invert(gr, {}).report["inverse"];
  g["g"][0][0] = g["g"][0][0].get<double>() + 1e-3;
  g["g"][1][0] = g["g"][1][0].get<double>() - 1e-3;
  const auto bad = run_check(gr, g, {});
  EXPECT_FALSE(bad.pass);
  EXPECT_GE(bad.report["certificates"]["bayes_residual"].get<double>(), 1e-4);

  const ProblemFile fail = example("bitflip-biased");
  EXPECT_FALSE(run_check(fail, own, {}).pass);
  EXPECT_EQ(kind_of([&] { run_check(fail, run_invert(fail, {}).report, {}); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { run_check(bf, channel_to_json(Channel::identity(3)), {}); }),
            ErrorKind::DimensionMismatch);
}

TEST(Examples, Catalog) {
  const auto names = example_names();
  for (const char* required : {"bitflip-half", "bitflip-biased", "support-gap", "grocery", "povm-commuting",
                               "povm-noncommuting", "ensemble-commuting", "collapse-coherent",
                               "isometry-embed", "star-homo-disintegration"})
    EXPECT_NE(std::find(names.begin(), names.end(), required), names.end()) << required;
  EXPECT_EQ(kind_of([] { example_problem("nope"); }), ErrorKind::UnknownExample);
}

TEST(Render, Text) {
  const auto r = run_invert(example("support-gap"), {});
  const std::string t = render_text(r.report);
  EXPECT_NE(t.find("status: FailsCompletion"), std::string::npos);
  EXPECT_NE(t.find("witness: 1.76190476"), std::string::npos) << t;
}
