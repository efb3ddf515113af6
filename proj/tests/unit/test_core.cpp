#include <catch2/catch_amalgamated.hpp>

#include <qabsorb/core.hpp>

using namespace qabsorb;

TEST_CASE("trapezoid integrates polynomials it should nail", "[core]") {
  // Linear functions are exact under the trapezoid rule.
  std::vector<double> lin(11);
  for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 3.0 * double(i) * 0.1 + 2.0;
  CHECK(trapezoid(lin, 0.1) == Catch::Approx(2.0 + 1.5).epsilon(1e-14));

  std::vector<cdouble> clin(11);
  for (std::size_t i = 0; i < clin.size(); ++i)
    clin[i] = cdouble(double(i) * 0.1, -2.0 * double(i) * 0.1);
  const cdouble got = trapezoid(clin, 0.1);
  CHECK(got.real() == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(got.imag() == Catch::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("cumulative trapezoid matches total and starts at zero", "[core]") {
  std::vector<double> v{1.0, 2.0, 4.0, 8.0};
  const auto cum = cumulative_trapezoid(v, 0.5);
  REQUIRE(cum.size() == v.size());
  CHECK(cum[0] == 0.0);
  CHECK(cum.back() == Catch::Approx(trapezoid(v, 0.5)).epsilon(1e-14));
  for (std::size_t i = 1; i < cum.size(); ++i) CHECK(cum[i] > cum[i - 1]);
}

TEST_CASE("adaptive Simpson hits smooth integrals to tolerance", "[core]") {
  const double got = adaptive_integrate<double>(
      [](double x) { return std::exp(-x * x); }, 0.0, 5.0, 1e-12);
  CHECK(got == Catch::Approx(0.5 * std::sqrt(pi) * std::erf(5.0)).epsilon(1e-11));

  const cdouble osc = adaptive_integrate<cdouble>(
      [](double x) { return std::exp(cdouble(0.0, 3.0 * x)); }, 0.0, 2.0, 1e-12);
  const cdouble exact = (std::exp(cdouble(0.0, 6.0)) - 1.0) / cdouble(0.0, 3.0);
  CHECK(std::abs(osc - exact) < 1e-10);
}

TEST_CASE("integrate_to_infinity respects its error budget", "[core]") {
  // f(t) = C / (t^2 + 1)^2 has Int_0^inf = C pi / 4 and tail bound C/t^3 -> use
  // coefficient C on the t^-3 envelope (f <= C / t^4 <= C / t^3 for t >= 1).
  const double C = 2.0;
  const ImproperIntegral r = integrate_to_infinity(
      [C](double t) { return C / ((t * t + 1.0) * (t * t + 1.0)); }, 1.0, C,
      1e-9);
  CHECK(std::abs(r.value + 0.5 * r.tail_bound - C * pi / 4.0) < 1e-8);
  CHECK(r.tail_bound >= 0.0);
  CHECK(r.t_max > 1.0);
}

TEST_CASE("integrate_to_infinity reports an unreachable tolerance", "[core]") {
  // Huge tail coefficient with a tiny cap forces the tail bound to dominate.
  CHECK_THROWS_AS(integrate_to_infinity([](double t) { return 1.0 / (1.0 + t * t); },
                                         1.0, 1e12, 1e-10, 1e2),
                  std::runtime_error);
}

TEST_CASE("grids expose exact endpoints and spacing", "[core]") {
  TimeGrid tg{0.0, 0.25, 8};
  CHECK(tg.size() == 9);
  CHECK(tg.time(0) == 0.0);
  CHECK(tg.t_end() == Catch::Approx(2.0));

  SpaceGrid sg{-1.0, 3.0, 5};
  CHECK(sg.spacing() == Catch::Approx(1.0));
  CHECK(sg.node(0) == -1.0);
  CHECK(sg.node(4) == 3.0);  // exact, not accumulated
}

TEST_CASE("physical parameters validate", "[core]") {
  PhysicalParams ok;
  CHECK_NOTHROW(ok.validate());
  PhysicalParams bad_mass;
  bad_mass.mass = 0.0;
  CHECK_THROWS_AS(bad_mass.validate(), std::invalid_argument);
  PhysicalParams bad_lambda;
  bad_lambda.lambda_left = -1.0;
  CHECK_THROWS_AS(bad_lambda.validate(), std::invalid_argument);
}

TEST_CASE("absorption strength conversion follows the convention switch", "[core]") {
  PhysicalParams p;
  p.hbar = 2.0;
  p.mass = 4.0;
  CHECK(kappa_factor(p, 3.0, RateConvention::pi_m) ==
        Catch::Approx(3.0 * 2.0 / (pi * 4.0)));
  CHECK(kappa_factor(p, 3.0, RateConvention::two_pi_m) ==
        Catch::Approx(3.0 * 2.0 / (2.0 * pi * 4.0)));
}

TEST_CASE("complex field validates length and finiteness", "[core]") {
  SpaceGrid g{0.0, 1.0, 4};
  std::vector<cdouble> vals(4, cdouble(0.1, 0.2));
  CHECK_NOTHROW(ComplexField(g, vals));
  vals.resize(3);
  CHECK_THROWS_AS(ComplexField(g, vals), std::invalid_argument);
  std::vector<cdouble> nan_vals(4, cdouble(std::nan(""), 0.0));
  CHECK_THROWS_AS(ComplexField(g, nan_vals), std::invalid_argument);
}
