#include "support.hpp"

using namespace gaudin;
using gaudin::testing::error_kind_of;

namespace {

json top_config() {
  return json::parse(R"({
    "model": {"kind": "elliptic", "N": 2, "tau": [0.3, 1.0],
              "marked_points": [[0.1, 0.1], [0.5, 0.4]], "lambda": [0.9, 1.1]},
    "field": {"dimension": "0+1"},
    "flow": [{"kind": "first", "site": 1, "coef": 1}, {"kind": "h0", "coef": [0, 0.5]}],
    "evolution": {"dt": 0.001, "T": 0.01}
  })");
}

}  // namespace

TEST(Config, ScenarioPresetsParse) {
  for (const auto& name : scenario_names()) {
    const RunConfig c = parse_config(json{{"scenario", name}, {"seed", 3}});
    EXPECT_TRUE(c.field_theory);
    EXPECT_EQ(c.G, 256);
    // CFL step with T rounded up to a whole number of steps.
    EXPECT_NEAR(c.evolution.steps() * c.evolution.dt, c.evolution.T, 1e-12);
    EXPECT_GE(c.evolution.T, 0.1 - 1e-12);
    const LoopState st = initial_loop_state(c);
    EXPECT_EQ(int(st.fields.size()), c.model->n());
  }
}

TEST(Config, UserKeysOverridePresets) {
  json doc = {{"scenario", "heisenberg"}, {"model", {{"k", 0.5}}}, {"evolution", {{"dt", 1e-5}, {"T", 1e-4}}}};
  const RunConfig c = parse_config(doc);
  EXPECT_EQ(c.model->k(), cplx(0.5));
  EXPECT_EQ(c.evolution.dt, 1e-5);
  EXPECT_EQ(c.evolution.steps(), 10);
}

TEST(Config, FlowTermsAndSites) {
  const RunConfig c = parse_config(top_config());
  ASSERT_EQ(c.flow.terms.size(), 2u);
  EXPECT_EQ(c.flow.terms[0].second.kind, FlowKind::first);
  EXPECT_EQ(c.flow.terms[0].second.site, 0);
  EXPECT_EQ(c.flow.terms[1].second.kind, FlowKind::h0);
  EXPECT_EQ(c.flow.terms[1].first, cplx(0, 0.5));
  EXPECT_FALSE(c.field_theory);
  const SpinState s = initial_spin_state(c);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_LT(std::abs(casimir(*c.model, s, 1) - 1.1 * 1.1 / 2.0), 1e-12);
}

TEST(Config, BareLambdaIsShared) {
  json doc = top_config();
  doc["model"]["lambda"] = 0.7;
  EXPECT_EQ(parse_config(doc).model->lambda(1), cplx(0.7));
}

TEST(Config, Rejections) {
  auto bad = [](auto edit) {
    json d = top_config();
    edit(d);
    return error_kind_of([&] { parse_config(d); });
  };
  EXPECT_EQ(bad([](json& d) { d["bogus"] = 1; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["model"]["lambda"] = json::array({1.0}); }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["model"]["kind"] = "hyperbolic"; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["flow"] = "first:3"; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["flow"] = "third:1"; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["evolution"]["dt"] = "fast"; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["evolution"]["dt"] = "cfl"; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["evolution"]["T"] = "long"; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["field"] = {{"dimension", "1+1"}, {"G", 100}}; }), ErrorKind::config);
  EXPECT_EQ(bad([](json& d) {
              d["field"] = {{"dimension", "1+1"}};
              d["flow"] = "h0";
            }),
            ErrorKind::config);
  EXPECT_EQ(bad([](json& d) { d["model"]["tau"] = json::array({0.0, 0.05}); }), ErrorKind::domain);
  EXPECT_EQ(error_kind_of([] { parse_config(json{{"scenario", "nope"}}); }), ErrorKind::config);
}

TEST(Config, LoopStateJsonRoundTrip) {
  const RunConfig c = parse_config(json{{"scenario", "pcm"}, {"seed", 1}});
  const LoopState st = initial_loop_state(c);
  const json j = loop_state_json(st, 64);
  const LoopState back = loop_state_from_json(j, *c.model);
  for (double x : {0.0, 1.0, 3.3})
    for (int a = 0; a < 2; ++a) EXPECT_LT((back.jets_at(x)[a].s - st.jets_at(x)[a].s).norm(), 1e-12);
}

TEST(Config, ComplexNumbersAreArrays) {
  EXPECT_EQ(cjson(cplx(1.5, -2)).dump(), "[1.5,-2.0]");
  EXPECT_EQ(to_cplx(json(3), "x"), cplx(3));
  EXPECT_EQ(error_kind_of([] { to_cplx(json::array({1, 2, 3}), "x"); }), ErrorKind::config);
}
