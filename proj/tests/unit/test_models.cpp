#include <doctest.h>

#include "pdmp/diagnostics.hpp"
#include "pdmp/error.hpp"
#include "pdmp/models.hpp"

using namespace pdmp;
using nlohmann::json;

TEST_CASE("gene model") {
  const auto c = gene_expression_model({1, 1, 1, 1});
  CHECK(c->intensity().is_constant());
  CHECK(c->regimes() == 1);
  CHECK(c->hazard().has_closed_form());
  CHECK(run_assumption_suite(*c).rate_condition_margin == doctest::Approx(1.0));
  const auto s = gene_expression_model();
  CHECK(s->lambda_lower() == 1.0);
  CHECK(s->lambda_upper() == 1.5);
  CHECK(s->intensity()(1.0) == 1.25);
  CHECK(s->hazard().has_closed_form());
  CHECK(run_assumption_suite(*s).rate_condition_margin == doctest::Approx(0.5));
  // lambda in [1, 2]: boundary case with zero margin.
  const auto edge = gene_expression_model({1, 1, 1, 2});
  CHECK(drift_constants(*edge).margin == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS(gene_expression_model({1, 1, 2, 1}));
  CHECK_THROWS(gene_expression_model({0, 1, 1, 1}));
  CHECK_THROWS(gene_expression_model({1, -1, 1, 1}));
}

TEST_CASE("two-regime models") {
  const auto m = two_regime_model();
  CHECK(m->regimes() == 2);
  CHECK(m->domain().upper == 1.0);
  for (double t : {0.0, 0.5, 2.0, 10.0}) {
    CHECK(std::abs(m->flow()(1, t, 0.3) - m->flow()(0, t, 0.3)) ==
          doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-12));
  }
  CHECK(m->declared().beta == doctest::Approx(0.5));
  const auto b = two_regime_model({1, TwoRegimeJump::bursts, 1});
  CHECK_FALSE(b->domain().bounded());
  CHECK(b->jump().finite_parameter_set() == false);
  CHECK(compute_beta(*b, 0.0) == doctest::Approx(b->declared().beta).epsilon(1e-8));
}

TEST_CASE("negative controls carry their designation") {
  CHECK(expanding_flow_model()->designated_failure() == "flow_envelope");
  CHECK(overdriven_gene_model()->designated_failure() == "rate_condition");
  CHECK(absorbing_switching_model()->designated_failure() == "switching");
  CHECK_FALSE(gene_expression_model()->negative_control());
}

TEST_CASE("construction from json") {
  const auto m = model_from_json(json::parse(
      R"({"name":"gene","params":{"kappa":2,"burst_mean":0.5,"lambda_low":1,"lambda_high":1}})"));
  CHECK(m->intensity().is_constant());
  CHECK(model_from_json(json::parse(R"({"name":"two_regime","params":{"jump":"bursts"}})"))
            ->domain()
            .bounded() == false);
  for (const auto& name : model_names()) {
    CHECK_NOTHROW(model_from_json(json{{"name", name}}));
  }
  CHECK_THROWS_AS(model_from_json(json::parse(R"({"name":"nope"})")), ConfigError);
  CHECK_THROWS_AS(model_from_json(json::parse(R"({"name":"gene","params":{"kapa":1}})")), ConfigError);
  CHECK_THROWS_AS(model_from_json(json::parse(R"({"name":"gene","extra":1})")), ConfigError);
  CHECK_THROWS_AS(model_from_json(json::parse(R"({"name":"two_regime","params":{"jump":"x"}})")),
                  ConfigError);
  CHECK_THROWS_AS(model_from_json(json::parse(R"({"name":"gene","params":{"kappa":-1}})")),
                  ConfigError);
}
