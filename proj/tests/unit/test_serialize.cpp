#include <gtest/gtest.h>

#include <cmath>

#include "komatsu/error.hpp"
#include "komatsu/examples.hpp"
#include "komatsu/serialize.hpp"

using namespace komatsu;

TEST(Serialize, NonFiniteNumbers) {
  EXPECT_EQ(num(std::numeric_limits<double>::infinity()), Json("inf"));
  EXPECT_EQ(num(-std::numeric_limits<double>::infinity()), Json("-inf"));
  EXPECT_EQ(num(std::nan("")), Json("nan"));
  EXPECT_EQ(num(1.5), Json(1.5));
  EXPECT_EQ(dump(Json{{"b", 1}, {"a", 2}}), "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}

TEST(Serialize, ExactIntegersAsStrings) {
  const auto ws = liouville_witnesses(ContinuedFraction::factorial_tower(6), 2);
  const Json j = to_json(ws[2]);
  EXPECT_EQ(j.at("q"), Json("100000001"));
  EXPECT_EQ(j.at("p"), Json("1001000010"));
}

TEST(Serialize, CoefficientParsing) {
  EXPECT_EQ(exact_complex_from_json(Json("1/2 - alpha")), (ExactComplex{AlphaAffine{BigRational(1, 2), -1}, {}}));
  EXPECT_EQ(exact_complex_from_json(Json(3)), (ExactComplex{AlphaAffine::rational(3), {}}));
  EXPECT_EQ(exact_complex_from_json(Json{{"im", "1/2"}}),
            (ExactComplex{{}, AlphaAffine::rational(BigRational(1, 2))}));
  EXPECT_THROW(exact_complex_from_json(Json(0.5)), ConfigError);
  EXPECT_THROW(exact_complex_from_json(Json{{"real", "1"}}), ConfigError);
}

TEST(Serialize, ExprRoundTrip) {
  const ExampleDef d = example_def("t1s3_Laq_half_i");
  const Expr back = expr_from_json(to_json(d.q));
  ASSERT_EQ(back.terms.size(), d.q.terms.size());
  for (std::size_t k = 0; k < back.terms.size(); ++k) {
    EXPECT_EQ(back.terms[k].coef, d.q.terms[k].coef);
    EXPECT_EQ(back.terms[k].f1, d.q.terms[k].f1);
    EXPECT_EQ(back.terms[k].f2, d.q.terms[k].f2);
  }
  EXPECT_THROW(expr_from_json(Json{{"coef", 1}}), ConfigError);
  EXPECT_THROW(expr_from_json(Json::array({Json{{"x3", "one"}}})), ConfigError);
}

TEST(Serialize, OperatorFileRoundTrip) {
  const Json j = Json::parse(R"({"schema": 1, "name": "f", "groups": "t1xs3",
    "a": [{"coef": "alpha"}, {"coef": 1, "x1": "sin_t"}],
    "q": [{"coef": {"im": "1/2"}}], "resolution": {"band1": 3, "band2": 2}})");
  const OperatorFile f = operator_file_from_json(j);
  EXPECT_EQ(f.res.band1, 3);
  EXPECT_EQ(f.res.band2, 2);
  EXPECT_EQ(f.a.terms.size(), 2u);
  const OperatorFile g = operator_file_from_json(to_json(f));
  EXPECT_EQ(to_json(g), to_json(f));
  const OperatorSpec s = build_operator(f, 2);
  EXPECT_LT(s.A_residual, 1e-10);
  EXPECT_EQ(to_json(s).at("groups"), Json("t1xs3"));
}

TEST(Serialize, OperatorFileRejectsUnknownKeys) {
  EXPECT_THROW(operator_file_from_json(Json::parse(R"({"groups": "t1xs3", "a": [], "extra": 1})")), ConfigError);
  EXPECT_THROW(operator_file_from_json(Json::parse(R"({"a": []})")), ConfigError);
  EXPECT_THROW(operator_file_from_json(Json::parse(R"({"schema": 2, "groups": "t1xs3", "a": []})")), ConfigError);
}

TEST(Serialize, SampledOperator) {
  const GridPtr g = shared_grid(GroupKind::Torus, 8);
  Json vals = Json::array();
  for (int i = 0; i < g->size(); ++i) vals.push_back(std::sin(g->point(i).t) + 3.0);
  Json j{{"groups", "t1xs3"}, {"a", Json{{"samples", Json{{"band", 8}, {"values", vals}}}}}};
  const OperatorFile f = operator_file_from_json(j);
  ASSERT_TRUE(f.a_samples.has_value());
  const OperatorSpec s = build_operator(f, 2);
  EXPECT_FALSE(s.exact);
  EXPECT_NEAR(s.a0.real(), 3.0, 1e-12);
}

TEST(Serialize, JobConfig) {
  const JobConfig c = job_config_from_json(Json::parse(
      R"({"schema": 1, "example": "t1s3_La", "weights": [{"gevrey": 1}, {"custom": [1, 1, 2, 6]}],
          "cutoffs": [100, 200], "N_grid": [1], "convergent": 3})"));
  ASSERT_TRUE(c.example.has_value());
  EXPECT_EQ(c.analyze.weights.size(), 2u);
  EXPECT_EQ(c.analyze.cutoffs.size(), 2u);
  EXPECT_EQ(*c.convergent, 3);
  EXPECT_THROW(job_config_from_json(Json::parse(R"({"example": "x", "bogus": 1})")), ConfigError);
  EXPECT_THROW(job_config_from_json(Json::parse(R"({"cutoffs": []})")), ConfigError);
  EXPECT_THROW(weight_from_json(Json::parse(R"({"gevrey": 1, "custom": [1]})")), ConfigError);
}

TEST(Serialize, SpectrumCsvRoundTrip) {
  const Spectrum s = random_spectrum(GroupKind::Torus, 2, GroupKind::SU2, 3, 5);
  const std::string csv = spectrum_csv(s);
  EXPECT_EQ(csv.rfind("xi,m,n,eta,r,s,re,im\n", 0), 0u);
  const Spectrum back = spectrum_from_csv(csv, GroupKind::Torus, GroupKind::SU2);
  ASSERT_EQ(back.coef.rows(), s.coef.rows());
  ASSERT_EQ(back.coef.cols(), s.coef.cols());
  EXPECT_EQ((back.coef - s.coef).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(decay_csv(s).rfind("scale,modulus\n", 0), 0u);
}

TEST(Serialize, ReportsAreDeterministic) {
  const OperatorSpec s = make_example("t1s3_La");
  AnalyzeOptions o;
  o.cutoffs = {100, 200};
  o.resonance_cutoff = 200;
  EXPECT_EQ(dump(to_json(analyze(s, o))), dump(to_json(analyze(s, o))));
}
