#include "lfforge/fdgap.hpp"

#include <doctest.h>

#include <random>

using namespace lfforge;

TEST_CASE("desirable gap is the reciprocal of the equilibrium density") {
  const fd::FDParams p{VehicleClass::CAR, 20.0, 150.0};
  for (double v : {0.0, 7.5, 30.0, 64.0}) {
    const double k = fd::density_at_speed(p, v);
    CHECK(fd::desirable_gap(p, v) == doctest::Approx(1000.0 / k).epsilon(1e-12));
  }
  CHECK(fd::density_at_speed(p, 0.0) == doctest::Approx(150.0));
  CHECK_THROWS_AS(fd::desirable_gap(p, -1.0), std::domain_error);
}

TEST_CASE("vector form agrees with the scalar form") {
  const fd::FDParams p{VehicleClass::HV, 12.0, 80.0};
  Eigen::ArrayXd v = Eigen::ArrayXd::LinSpaced(14, 0.0, 65.0);
  const auto g = fd::desirable_gap(p, v);
  for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(g(i) == doctest::Approx(fd::desirable_gap(p, v(i))));
  v(3) = -0.1;
  CHECK_THROWS_AS(fd::desirable_gap(p, v), std::domain_error);
}

TEST_CASE("affine fit matches the closed-form regression") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i < 40; ++i) {
    const double v = 2.0 + 1.5 * i;
    s.emplace_back(v, 4.0 + 0.42 * v + noise(rng));
  }
  // Oracle: textbook slope = cov(v, s) / var(v).
  double mv = 0, ms = 0;
  for (auto [v, g] : s) mv += v, ms += g;
  mv /= s.size();
  ms /= s.size();
  double sxy = 0, sxx = 0;
  for (auto [v, g] : s) sxy += (v - mv) * (g - ms), sxx += (v - mv) * (v - mv);
  const double m = sxy / sxx, b = ms - m * mv;

  const auto fit = fd::fit_fd_params(VehicleClass::CAR, s);
  CHECK(fit.slope_m_per_kmh == doctest::Approx(m).epsilon(1e-10));
  CHECK(fit.intercept_m == doctest::Approx(b).epsilon(1e-10));
  CHECK(fit.params.jam_density == doctest::Approx(1000.0 / b).epsilon(1e-10));
  CHECK(fit.params.w_kmh == doctest::Approx(b / m).epsilon(1e-10));
  CHECK(fd::gap_slope(fit.params) == doctest::Approx(m).epsilon(1e-10));
}

TEST_CASE("fit rejects degenerate and non-physical samples") {
  const std::vector<std::pair<double, double>> one{{10, 5}, {10, 6}};
  CHECK_THROWS_AS(fd::fit_fd_params(VehicleClass::TW, one), DataError);
  const std::vector<std::pair<double, double>> falling{{10, 9}, {20, 5}, {30, 1}};
  CHECK_THROWS_AS(fd::fit_fd_params(VehicleClass::TW, falling), DataError);
}

TEST_CASE("gap table layout is speeds by classes") {
  const std::vector<fd::FDParams> ps{{VehicleClass::TW, 10, 300}, {VehicleClass::CAR, 20, 150}};
  const std::vector<double> speeds{5, 10, 15};
  const auto t = fd::gap_threshold_table(ps, speeds);
  REQUIRE(t.gaps.rows() == 3);
  REQUIRE(t.gaps.cols() == 2);
  CHECK(t.classes[1] == VehicleClass::CAR);
  CHECK(t.gaps(2, 1) == doctest::Approx(1000.0 * 35.0 / (20.0 * 150.0)));
}

TEST_CASE("default parameters are physical for every class") {
  for (auto c : kAllClasses) {
    const auto& p = fd::default_params().at(c);
    CHECK_NOTHROW(p.validate());
    CHECK(p.cls == c);
  }
}
