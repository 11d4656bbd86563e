#include <doctest.h>

#include <cmath>
#include <vector>

#include "erw/equilibria.hpp"
#include "erw/error.hpp"

using namespace erw;

TEST_SUITE("equilibria") {

TEST_CASE("k=1 has the single fixed point 1/2") {
  for (double p : {0.55, 0.7, 0.9, 0.3}) {
    const auto cs = find_crossings(UrnFunction::linear(p));
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].y_star == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cs[0].stability == Stability::Stable);
  }
}

TEST_CASE("k=3 bifurcates at 5/6") {
  const auto below = find_crossings(UrnFunction::majority(3, 0.8));
  REQUIRE(below.size() == 1);
  CHECK(below[0].stability == Stability::Stable);

  const auto above = find_crossings(UrnFunction::majority(3, 0.9));
  REQUIRE(above.size() == 3);
  const auto pair = attractors_k3(0.9);
  CHECK(above[0].y_star == doctest::Approx(pair.y_minus).epsilon(1e-12));
  CHECK(above[2].y_star == doctest::Approx(pair.y_plus).epsilon(1e-12));
  CHECK(above[0].stability == Stability::Stable);
  CHECK(above[1].stability == Stability::Unstable);
  CHECK(above[2].stability == Stability::Stable);
  CHECK(above[1].slope == doctest::Approx(1.2));
  // slope at the outer roots of the k=3 urn is 6(1 - p)
  CHECK(above[0].slope == doctest::Approx(0.6).epsilon(1e-9));

  const auto critical = find_crossings(UrnFunction::majority(3, 5.0 / 6.0));
  REQUIRE(critical.size() == 1);
  CHECK(critical[0].stability == Stability::Tangent);
}

TEST_CASE("every reported crossing is a root and roots alternate in stability") {
  for (int k : {3, 5, 9, 21}) {
    for (double p = 0.55; p < 1.0; p += 0.05) {
      const auto f = UrnFunction::majority(k, p);
      const auto cs = find_crossings(f);
      for (std::size_t i = 0; i < cs.size(); ++i) {
        CHECK(std::fabs(f(cs[i].y_star) - cs[i].y_star) < 1e-10);
        if (i > 0 && cs[i].stability != Stability::Tangent && cs[i - 1].stability != Stability::Tangent) {
          CHECK(cs[i].stability != cs[i - 1].stability);
        }
      }
      // symmetric urn: roots come in pairs around 1/2
      for (std::size_t i = 0; i < cs.size(); ++i) {
        CHECK(cs[i].y_star == doctest::Approx(1.0 - cs[cs.size() - 1 - i].y_star).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("attractor pair closed form") {
  const auto a = attractors_k3(0.9);
  CHECK(a.y_minus == doctest::Approx(0.146447).epsilon(1e-6));
  CHECK(a.y_plus == doctest::Approx(0.853553).epsilon(1e-6));
  CHECK(a.x_plus == doctest::Approx(-a.x_minus));
  const auto one = attractors_k3(1.0);
  CHECK(one.y_minus == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(one.y_plus == doctest::Approx(1.0));
  for (double p : {0.8, 5.0 / 6.0, 0.6}) {
    try {
      (void)attractors_k3(p);
      FAIL("expected no bifurcation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoBifurcation);
    }
  }
}

TEST_CASE("critical parameters: closed forms and root finding agree") {
  const auto k1 = critical_params_numeric(1);
  CHECK_FALSE(k1.p_c.has_value());
  CHECK(*k1.p_star == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_FALSE(k1.p_star_star.has_value());

  const auto k3 = critical_params_numeric(3);
  CHECK(std::fabs(*k3.p_c - 5.0 / 6.0) < 1e-9);
  CHECK(std::fabs(*k3.p_star - 2.0 / 3.0) < 1e-9);
  CHECK(std::fabs(*k3.p_star_star - 11.0 / 12.0) < 1e-9);

  const auto exact = critical_params(3);
  CHECK(*exact.p_c == 5.0 / 6.0);

  // k=5: pi'(1/2) = (2p - 1) 15/8
  const auto k5 = critical_params(5);
  CHECK(*k5.p_c == doctest::Approx(0.5 + 4.0 / 15.0).epsilon(1e-9));
  CHECK(*k5.p_star == doctest::Approx(0.5 + 2.0 / 15.0).epsilon(1e-9));
  CHECK(*k5.p_star_star > *k5.p_c);

  const auto step = critical_params_step_limit();
  CHECK(*step.p_c == 0.5);
}

TEST_CASE("step limit crossings") {
  const auto cs = find_crossings(UrnFunction::step_limit(0.8));
  REQUIRE(cs.size() == 3);
  CHECK(cs[0].y_star == doctest::Approx(0.2));
  CHECK(cs[1].stability == Stability::Unstable);
  CHECK(cs[2].y_star == doctest::Approx(0.8));
}

TEST_CASE("phase diagram structure") {
  std::vector<double> grid;
  for (int i = 0; i < 97; ++i) grid.push_back(0.51 + 0.005 * i);
  const auto rows = phase_diagram(3, grid);
  REQUIRE(rows.size() == grid.size());
  for (const auto& r : rows) {
    if (r.p > 5.0 / 6.0 + 1e-9) {
      CHECK(r.regime == "bistable");
      REQUIRE(r.x_plus.has_value());
      CHECK(*r.band_lo == *r.x_minus);
      CHECK(*r.x_plus == doctest::Approx(attractors_k3(r.p).x_plus).epsilon(1e-9));
    } else if (r.p < 5.0 / 6.0 - 1e-9) {
      CHECK(r.regime == "single");
      CHECK(r.x_zero.has_value());
      CHECK_FALSE(r.band_lo.has_value());
    }
  }
  const double bad[] = {0.4};
  CHECK_THROWS_AS(phase_diagram(3, bad), Error);
}

}  // TEST_SUITE
