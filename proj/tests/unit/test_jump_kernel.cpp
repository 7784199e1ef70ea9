#include <doctest.h>

#include <array>
#include <memory>

#include "pdmp/jump_kernel.hpp"
#include "pdmp/models.hpp"
#include "support.hpp"

using namespace pdmp;

TEST_CASE("theta sampling") {
  Rng rng = make_stream(41, 0);
  const AdditiveBurstKernel burst(1.0);
  std::vector<double> th(100000);
  for (auto& t : th) t = burst.sample_theta(0.0, rng);
  CHECK(std::abs(test::mean(th) - 1.0) <= 0.02);

  const FiniteIfsKernel single({{0.5, 0.0}}, std::vector<double>{1.0});
  const FiniteIfsKernel pinned({{1.0, 0.0}, {2.0, 0.0}}, std::vector<double>{1.0, 0.0});
  for (int k = 0; k < 1000; ++k) {
    CHECK(single.sample_theta(3.0, rng) == 0.0);
    CHECK(pinned.sample_theta(3.0, rng) == 0.0);
  }
  CHECK_THROWS(FiniteIfsKernel({{1.0, 0.0}}, std::vector<double>{0.7}));
}

TEST_CASE("sample_jump") {
  Rng rng = make_stream(42, 0);
  const AdditiveBurstKernel burst(1.0);
  std::vector<double> inc(100000);
  for (auto& d : inc) {
    const double out = sample_jump(burst, 2.0, rng);
    CHECK(out >= 2.0);
    d = out - 2.0;
  }
  CHECK(std::abs(test::mean(inc) - 1.0) <= 0.02);
  const FiniteIfsKernel half({{0.5, 0.0}}, std::vector<double>{1.0});
  CHECK(sample_jump(half, 4.0, rng) == 2.0);

  // gamma(0) for the gene model: E |w_theta(0) - 0| = 1.
  const auto gene = gene_expression_model({1, 1, 1, 1});
  std::vector<double> d(100000);
  for (auto& v : d) v = std::abs(sample_jump(gene->jump(), 0.0, rng));
  CHECK(std::abs(test::mean(d) - 1.0) <= 0.02);
}

TEST_CASE("regime switching") {
  Rng rng = make_stream(43, 0);
  const SwitchingMatrix one;
  CHECK(one.size() == 1);
  for (int k = 0; k < 100; ++k) CHECK(sample_regime(one, 0, 1.0, rng) == 0);

  const auto uniform = SwitchingMatrix::constant({{0.5, 0.5}, {0.5, 0.5}});
  int zeros = 0;
  for (int k = 0; k < 100000; ++k) zeros += sample_regime(uniform, 1, 0.0, rng) == 0;
  CHECK(std::abs(zeros / 1e5 - 0.5) <= 0.005);

  const auto absorbing = SwitchingMatrix::constant({{1.0, 0.0}, {0.0, 1.0}});
  for (int k = 0; k < 1000; ++k) CHECK(sample_regime(absorbing, 0, test::uniform(rng, 0, 1), rng) == 0);
  CHECK_THROWS(SwitchingMatrix::constant({{0.5, 0.4}, {0.5, 0.5}}));
}

TEST_CASE("switching rows are stochastic on shipped models") {
  Rng rng = make_stream(44, 0);
  for (const auto& m : {two_regime_model(), two_regime_model({1, TwoRegimeJump::bursts, 1})}) {
    const auto& pi = m->switching();
    for (int k = 0; k < 1000; ++k) {
      const double y = test::uniform(rng, 0, 5);
      for (std::size_t i = 0; i < pi.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < pi.size(); ++j) s += pi(i, j, y);
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("densities integrate to one against the reference measure") {
  Rng rng = make_stream(45, 0);
  for (const auto& m : {gene_expression_model(), two_regime_model(),
                        two_regime_model({1, TwoRegimeJump::bursts, 2.0})}) {
    const auto rule = m->jump().reference_rule();
    for (int k = 0; k < 1000; ++k) {
      const double y = test::uniform(rng, 0, 1);
      double s = 0.0;
      for (const auto& node : rule) s += node.weight * m->jump().density(node.theta, y);
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("post-jump kernel") {
  Rng rng = make_stream(46, 0);
  const auto gene = gene_expression_model({1, 1, 1, 1});
  std::vector<double> y(20000);
  for (auto& v : y) v = post_jump_sample(gene->post_jump(), {0.0, 0}, rng).y;
  CHECK(std::abs(test::mean(y) - 1.0) <= 0.03);

  // Deterministic jump and switching: fully deterministic output.
  auto det = std::make_shared<FiniteIfsKernel>(std::vector<AffineMap>{{0.5, 0.1}}, std::vector<double>{1.0});
  const PostJumpKernel k(det, SwitchingMatrix::constant({{0.0, 1.0}, {1.0, 0.0}}),
                         std::make_shared<ConstantIntensity>(2.0));
  for (int n = 0; n < 10; ++n) CHECK(k.sample({1.0, 0}, rng) == StatePoint{0.6, 1});
  CHECK(w_tilde_weight(k, {5.0, 1}) == 2.0);

  const auto sd = gene_expression_model({1, 1, 1, 2});
  CHECK(w_tilde_weight(sd->post_jump(), {1.0, 0}) == 1.5);
  for (int n = 0; n < 1000; ++n) {
    const double w = w_tilde_weight(sd->post_jump(), {test::uniform(rng, 0, 100), 0});
    CHECK(w >= 1.0);
    CHECK(w <= 2.0);
  }
}

TEST_CASE("composite law factorizes on a two-map two-regime toy") {
  // Map 0 lands at 0.25, map 1 at 0.75; pi is evaluated at the landing point.
  auto maps = std::make_shared<FiniteIfsKernel>(std::vector<AffineMap>{{0.0, 0.25}, {0.0, 0.75}},
                                                std::vector<double>{0.3, 0.7});
  std::vector<std::vector<SwitchingMatrix::Entry>> rows(2);
  rows[0] = {[](double y) { return y; }, [](double y) { return 1.0 - y; }};
  rows[1] = {[](double) { return 0.5; }, [](double) { return 0.5; }};
  const PostJumpKernel k(maps, SwitchingMatrix(rows, {0.0, 1.0}),
                         std::make_shared<ConstantIntensity>(1.0));
  Rng rng = make_stream(47, 0);
  std::array<std::array<double, 2>, 2> freq{};
  const int n = 200000;
  for (int r = 0; r < n; ++r) {
    const auto x = k.sample({0.4, 0}, rng);
    freq[x.y > 0.5][x.regime] += 1.0 / n;
  }
  const double p[2] = {0.3, 0.7}, land[2] = {0.25, 0.75};
  for (int a = 0; a < 2; ++a) {
    for (int j = 0; j < 2; ++j) {
      const double target = p[a] * (j == 0 ? land[a] : 1.0 - land[a]);
      CHECK(std::abs(freq[a][j] - target) <= 4.0 * std::sqrt(target * (1 - target) / n));
    }
  }
}

namespace {

// Contraction on average with theta drawn at u: E|w(u) - w(v)| <= L_w |u - v|.
void check_contraction_on_average(const ModelSpec& m, double y_hi) {
  Rng rng = make_stream(48, 0);
  const double L_w = m.declared().L_w;
  for (int pair = 0; pair < 50; ++pair) {
    const double u = test::uniform(rng, 0, y_hi), v = test::uniform(rng, 0, y_hi);
    std::vector<double> d(5000);
    for (auto& e : d) {
      const double th = m.jump().sample_theta(u, rng);
      e = std::abs(m.jump().map(th, u) - m.jump().map(th, v));
    }
    CHECK(test::mean(d) <= L_w * std::abs(u - v) + 3 * test::standard_error(d) + 1e-12 * (1 + u + v));
  }
}

}  // namespace

TEST_CASE("contraction on average and the jump drift inequality") {
  check_contraction_on_average(*gene_expression_model(), 10.0);
  check_contraction_on_average(*two_regime_model(), 1.0);
  // E V(w(y)) <= L_w V(y) + gamma with V = |. - 0|.
  for (const auto& m : {gene_expression_model(), two_regime_model()}) {
    Rng rng = make_stream(49, 0);
    for (double y : {0.0, 0.3, 0.9}) {
      std::vector<double> v(20000);
      for (auto& e : v) e = std::abs(sample_jump(m->jump(), y, rng));
      CHECK(test::mean(v) <= m->declared().L_w * y + m->declared().gamma + 3 * test::standard_error(v));
    }
  }
}

TEST_CASE("continuity smoke test for the finite IFS") {
  // g(y) = sin(y) is 1-Lipschitz and bounded by 1.
  const auto m = two_regime_model();
  const double L_w = m->declared().L_w, L_p = m->declared().L_p;
  Rng rng = make_stream(50, 0);
  auto expect = [&](double y) {
    return (m->jump().density(0, y) * std::sin(m->jump().map(0, y)) +
            m->jump().density(1, y) * std::sin(m->jump().map(1, y)));
  };
  for (int k = 0; k < 1000; ++k) {
    const double y = test::uniform(rng, 0, 1), y0 = test::uniform(rng, 0, 1);
    CHECK(std::abs(expect(y) - expect(y0)) <= (L_w + L_p) * std::abs(y - y0) + 1e-12);
  }
}
