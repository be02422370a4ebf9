#include <doctest.h>

#include <cfloat>
#include <cmath>
#include <numbers>

#include "aimsgp/transforms.hpp"
#include "test_support.hpp"

using namespace aims;

TEST_CASE("log / logit map round-trips") {
  HyperParams phi = support::oracle_params();
  HyperParams back = from_unconstrained(to_unconstrained(phi));
  CHECK(back.lengths[0] == doctest::Approx(phi.lengths[0]).epsilon(1e-14));
  CHECK(back.lengths[1] == doctest::Approx(phi.lengths[1]).epsilon(1e-14));
  CHECK(back.nugget == doctest::Approx(phi.nugget).epsilon(1e-12));

  Vector z(3);
  z << -2.5, 1.75, 0.3;
  Vector z2 = to_unconstrained(from_unconstrained(z));
  CHECK((z - z2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unconstrained map is total on extreme coordinates") {
  Vector z(3);
  z << 800.0, -800.0, 1.0e4;
  HyperParams phi = from_unconstrained(z);
  CHECK(phi.lengths[0] == DBL_MAX);
  CHECK(phi.lengths[1] > 0.0);
  CHECK(phi.nugget == 1.0);
  CHECK_NOTHROW(phi.validate());

  z[2] = -1.0e4;
  phi = from_unconstrained(z);
  CHECK(phi.nugget == kNuggetFloor);
  CHECK_NOTHROW(phi.validate());
}

TEST_CASE("boundary nuggets have no finite unconstrained image") {
  HyperParams phi = support::oracle_params();
  phi.nugget = kNuggetFloor;
  CHECK_THROWS_AS(to_unconstrained(phi), std::domain_error);
  phi.nugget = 1.0;
  CHECK_THROWS_AS(to_unconstrained(phi), std::domain_error);
}

TEST_CASE("hyper-parameter prior draws cover their supports") {
  RandomStream rng(17);
  const int n = 4000;
  const int p = 3;
  double log_len_sum = 0.0;
  int nugget_below_half = 0, nugget_below_q25 = 0;
  const double q25 = std::pow(std::sin(std::numbers::pi / 8.0), 2);  // arcsine 25% point
  for (int i = 0; i < n; ++i) {
    Vector z = meta_prior_sample(rng, p);
    REQUIRE(z.size() == p + 1);
    HyperParams phi = from_unconstrained(z);
    for (int d = 0; d < p; ++d) {
      REQUIRE(z[d] >= -7.0);
      REQUIRE(z[d] <= 7.0);
      log_len_sum += z[d];
    }
    REQUIRE(phi.nugget > kNuggetFloor);
    REQUIRE(phi.nugget < 1.0);
    nugget_below_half += phi.nugget < 0.5;
    nugget_below_q25 += phi.nugget < q25;
  }
  CHECK(std::abs(log_len_sum / (n * p)) < 0.3);
  CHECK(std::abs(nugget_below_half / double(n) - 0.5) < 0.03);
  CHECK(std::abs(nugget_below_q25 / double(n) - 0.25) < 0.03);
}

TEST_CASE("lognormal length prior density") {
  LogPrior prior = make_lognormal_prior(0.0, 1.0);
  HyperParams phi;
  phi.lengths = Vector::Ones(2);
  phi.nugget = 0.1;
  CHECK(prior(phi) == doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(1e-12));

  LogPrior wide = make_lognormal_prior(0.5, 2.0);
  phi.lengths = Vector(1);
  phi.lengths << 3.0;
  double lp = std::log(3.0);
  double expected = -lp - std::log(2.0) - 0.5 * std::log(2.0 * std::numbers::pi) -
                    (lp - 0.5) * (lp - 0.5) / 8.0;
  CHECK(wide(phi) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("prior names parse strictly") {
  HyperParams phi = support::oracle_params();
  CHECK(make_prior("flat")(phi) == 0.0);
  CHECK(make_prior("lognormal(0,1)")(phi) == doctest::Approx(make_lognormal_prior(0, 1)(phi)));
  CHECK(make_prior("lognormal:0.5,2")(phi) ==
        doctest::Approx(make_lognormal_prior(0.5, 2)(phi)));
  CHECK_THROWS_AS(make_prior("banana"), std::invalid_argument);
  CHECK_THROWS_AS(make_prior("lognormal("), std::invalid_argument);
  CHECK_THROWS_AS(make_prior("lognormal(0,1)x"), std::invalid_argument);
  CHECK_THROWS_AS(make_prior(""), std::invalid_argument);
}
