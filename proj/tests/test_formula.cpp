#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"
#include "gamevo/formula.hpp"
#include "gamevo/presets.hpp"
#include "gamevo/search.hpp"
#include "gamevo/synth.hpp"

#include <gtest/gtest.h>

using namespace gamevo;

namespace {

CovariateRegistry registry() {
  return CovariateRegistry({Covariate::numeric("Temp"), Covariate::cyclic("Hour", 24.0), Covariate::categorical("Day", 7),
                            Covariate::numeric("Cloud"), Covariate::categorical("Break", 5),
                            Covariate::numeric("Wind"), Covariate::cyclic("PosYear", 1.0)});
}

bool has_message(const std::vector<Violation> &v, const std::string &needle) {
  for (const auto &x : v) {
    if (x.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

} // namespace

TEST(Signature, IgnoresBasis) {
  EXPECT_EQ(canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10))),
            canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(20))));
  EXPECT_EQ(canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10))),
            canonical_signature(Effect::univariate("Temp", BasisSpec::linear())));
}

TEST(Signature, SymmetricInCovariateOrder) {
  const auto a = Effect::tensor("Temp", "Hour", {BasisFamily::CubicSpline, 5}, {BasisFamily::CyclicSpline, 6});
  const auto b = Effect::tensor("Hour", "Temp", {BasisFamily::CyclicSpline, 6}, {BasisFamily::CubicSpline, 5});
  EXPECT_EQ(canonical_signature(a), canonical_signature(b));
}

TEST(Signature, IncludesEngineeringParameters) {
  EXPECT_NE(canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10), ExpSmooth{0.95})),
            canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10), ExpSmooth{0.99})));
  EXPECT_NE(canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10), ExpSmooth{0.95})),
            canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10))));
  EXPECT_NE(canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10), LagSet{{1}})),
            canonical_signature(Effect::univariate("Temp", BasisSpec::cubic(10), LagSet{{2}})));
}

TEST(Validate, DuplicateSignatureNamesIndices) {
  AdaptiveModel m;
  m.formula.effects = {Effect::univariate("Temp", BasisSpec::cubic(10)), Effect::univariate("Day", BasisSpec::categorical(7)),
                       Effect::univariate("Temp", BasisSpec::cubic(20))};
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].effects, (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(has_message(v, "duplicate signature at indices 0,2"));
}

TEST(Validate, EmptyFormula) {
  EXPECT_TRUE(has_message(validate(AdaptiveModel{}), "K >= 1"));
}

TEST(Validate, QDimension) {
  AdaptiveModel m;
  for (const char *n : {"Temp", "Cloud", "Wind", "PosYear"}) m.formula.effects.push_back(Effect::univariate(n, BasisSpec::cubic(8)));
  m.q_diag = std::vector<double>{1e-3, 1e-3, 1e-3};
  EXPECT_TRUE(has_message(validate(m), "Q dimension"));
  m.q_diag->push_back(-1.0);
  EXPECT_FALSE(validate(m).empty());
  m.q_diag->back() = 0.0;
  EXPECT_TRUE(validate(m).empty());
}

TEST(Validate, TwoCategoricalsForbidden) {
  const auto e = Effect::tensor("Day", "Break", {BasisFamily::Categorical, 7}, {BasisFamily::Categorical, 5});
  EXPECT_TRUE(has_message(validate_effect(e), "two categorical"));
}

TEST(Validate, FamilyMustMatchCovariateKind) {
  const auto reg = registry();
  EXPECT_FALSE(validate_effect(Effect::univariate("Day", BasisSpec::cubic(7)), &reg).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Temp", BasisSpec::categorical(7)), &reg).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Day", BasisSpec::categorical(6)), &reg).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Nope", BasisSpec::cubic(6)), &reg).empty());
  EXPECT_TRUE(validate_effect(Effect::univariate("Day", BasisSpec::categorical(7)), &reg).empty());
}

TEST(Validate, EngineeringChecks) {
  EXPECT_FALSE(validate_effect(Effect::univariate("Temp", BasisSpec::cubic(6), ExpSmooth{1.5})).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Day", BasisSpec::categorical(3), CategorySelect{{false, false, false}})).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Day", BasisSpec::categorical(3), CategorySelect{{true, false}})).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Temp", BasisSpec::cubic(6), LagSet{{1, 1}})).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Day", BasisSpec::categorical(7), DaySet{{8}})).empty());
  EXPECT_FALSE(validate_effect(Effect::univariate("Day", BasisSpec::categorical(7), ExpSmooth{0.5})).empty());
}

TEST(Validate, IsPure) {
  AdaptiveModel m;
  m.formula.effects = {Effect::univariate("Temp", BasisSpec::cubic(2))};
  EXPECT_EQ(validate(m), validate(m));
}

TEST(Dsl, ParsesSimpleSpline) {
  const Formula f = parse_formula("s(Temp, bs=cr, k=10)");
  ASSERT_EQ(f.effects.size(), 1u);
  EXPECT_EQ(f.effects[0], Effect::univariate("Temp", BasisSpec::cubic(10)));
}

TEST(Dsl, ParsesEveryForm) {
  const auto reg = registry();
  const AdaptiveModel m = deserialize(
      "lin(Wind) + s(Hour, bs=cc, k=8) + cat(Day) + cat(Break, select=10100) + smooth(Temp, alpha=0.9, bs=cr, k=6)"
      " + lag(Cloud, offsets=[1,7], bs=cr, k=5) + te(Temp, Hour, bs=(cr,cc), k=(4,5)) | Q=[0,1e-3,1,2,3,4,5]",
      &reg);
  ASSERT_EQ(m.formula.size(), 7u);
  EXPECT_EQ(m.formula.effects[0].basis, BasisSpec::linear());
  EXPECT_EQ(m.formula.effects[2].basis, BasisSpec::categorical(7));
  EXPECT_EQ(std::get<CategorySelect>(m.formula.effects[3].engineering[0]).selected,
            (std::vector<bool>{true, false, true, false, false}));
  EXPECT_DOUBLE_EQ(std::get<ExpSmooth>(m.formula.effects[4].engineering[0]).alpha, 0.9);
  EXPECT_EQ(std::get<LagSet>(m.formula.effects[5].engineering[0]).offsets, (std::vector<int>{1, 7}));
  EXPECT_EQ(m.formula.effects[6].basis.size, 20);
  ASSERT_TRUE(m.q_diag);
  EXPECT_DOUBLE_EQ((*m.q_diag)[1], 1e-3);
  EXPECT_TRUE(validate(m, &reg).empty());
}

TEST(Dsl, MissingCommaIsAParseError) {
  try {
    parse_formula("s(Temp bs=cr");
    FAIL() << "expected a parse error";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 8u);
    EXPECT_NE(std::string(e.what()).find("expected ','"), std::string::npos);
  }
}

TEST(Dsl, ErrorsCarryPosition) {
  EXPECT_THROW(parse_formula("s(Temp, k=)"), ParseError);
  EXPECT_THROW(parse_formula("s(Temp, bs=zz)"), ParseError);
  EXPECT_THROW(parse_formula("s(Temp) +"), ParseError);
  EXPECT_THROW(parse_formula("cat(Day)"), ParseError);
  try {
    parse_formula("s(Temp)\n + q(Day)");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Dsl, PresetRoundTrips) {
  for (int h = 0; h < 24; ++h) {
    AdaptiveModel m;
    m.formula = sota_formula(h);
    EXPECT_EQ(deserialize(serialize(m)), m);
    EXPECT_EQ(model_from_json(to_json(m)), m);
  }
}

TEST(Dsl, RandomModelsRoundTrip) {
  SearchConfig cfg;
  cfg.registry = synth_registry();
  cfg.smoothable = {"Temp"};
  cfg.lag_covariates = {"Temp", "Wind"};
  cfg.offset_lists = {{1}, {1, 7}, {2, 3, 14}};
  cfg.day_covariates = {"Day"};
  cfg.day_lists = {{6, 7}, {1, 2, 3, 4, 5}};
  cfg.p_bivar = 0.4;
  for (int kalman = 0; kalman < 2; ++kalman) {
    cfg.kalman = kalman;
    for (std::uint64_t s = 0; s < 300; ++s) {
      Rng rng(s);
      const AdaptiveModel m = generate_model(cfg, rng);
      ASSERT_TRUE(validate(m, &cfg.registry).empty()) << serialize(m);
      const std::string text = serialize(m);
      EXPECT_EQ(deserialize(text, &cfg.registry), m) << text;
      EXPECT_EQ(model_from_json(to_json(m)), m) << text;
    }
  }
}

TEST(Registry, RejectsBadCovariates) {
  CovariateRegistry r;
  r.add(Covariate::numeric("a"));
  EXPECT_THROW(r.add(Covariate::numeric("a")), std::invalid_argument);
  EXPECT_THROW(r.add(Covariate::categorical("c", 1)), std::invalid_argument);
  EXPECT_THROW(r.add(Covariate::cyclic("p", 0.0)), std::invalid_argument);
  EXPECT_EQ(registry_from_json(to_json(synth_registry())).all(), synth_registry().all());
}
