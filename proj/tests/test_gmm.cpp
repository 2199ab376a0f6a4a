#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "netsynth/errors.hpp"
#include "netsynth/gmm.hpp"

using namespace netsynth;

namespace {

std::vector<double> two_modes(Rng& rng, std::size_t n) {
  std::vector<double> x;
  for (std::size_t i = 0; i < n; ++i) x.push_back(i % 3 == 0 ? 50.0 + 2.0 * rng.normal() : 5.0 + 0.5 * rng.normal());
  return x;
}

}  // namespace

TEST_CASE("1-D EM recovers separated modes") {
  Rng rng(1);
  const auto x = two_modes(rng, 3000);
  const auto m = GaussianMixture1D::fit(x, 2, rng);
  REQUIRE(m.size() == 2);
  auto c = m.components();
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.mean < b.mean; });
  CHECK(c[0].mean == doctest::Approx(5.0).epsilon(0.01));
  CHECK(c[1].mean == doctest::Approx(50.0).epsilon(0.01));
  CHECK(c[0].stddev == doctest::Approx(0.5).epsilon(0.1));
  CHECK(c[1].stddev == doctest::Approx(2.0).epsilon(0.1));
  CHECK(c[0].weight == doctest::Approx(2.0 / 3.0).epsilon(0.02));
}

TEST_CASE("responsibilities are a distribution") {
  Rng rng(2);
  const auto m = GaussianMixture1D::fit(two_modes(rng, 600), 3, rng);
  for (double x : {-100.0, 0.0, 5.0, 27.0, 50.0, 1e6}) {
    const auto r = m.responsibilities(x);
    CHECK(std::accumulate(r.begin(), r.end(), 0.0) == doctest::Approx(1.0));
    for (double v : r) CHECK(v >= 0.0);
  }
  CHECK(std::isfinite(m.log_density(1e6)));
}

TEST_CASE("degenerate 1-D data") {
  Rng rng(3);
  const std::vector<double> constant(50, 7.5);
  const auto m = GaussianMixture1D::fit(constant, 4, rng);
  REQUIRE(m.size() == 1);
  CHECK(m.components()[0].mean == 7.5);
  CHECK(m.components()[0].stddev > 0.0);
  CHECK(m.components()[0].stddev < 1e-5);

  const std::vector<double> two_values{1.0, 1.0, 1.0, 9.0, 9.0};
  CHECK(GaussianMixture1D::fit(two_values, 5, rng).size() <= 2);
  CHECK_THROWS_AS(GaussianMixture1D::fit(std::vector<double>{}, 2, rng), PreconditionError);
  CHECK_THROWS_AS(GaussianMixture1D::fit(two_values, 0, rng), PreconditionError);
}

TEST_CASE("1-D sampling follows the mixture") {
  const GaussianMixture1D m({{0.25, -10.0, 1.0}, {0.75, 10.0, 2.0}});
  Rng rng(4);
  double mean = 0.0;
  std::size_t left = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = m.sample(rng);
    mean += x / n;
    left += x < 0.0;
  }
  CHECK(mean == doctest::Approx(5.0).epsilon(0.03));
  CHECK(static_cast<double>(left) / n == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("mixture json round trip") {
  Rng rng(5);
  const auto m = GaussianMixture1D::fit(two_modes(rng, 300), 2, rng);
  const nlohmann::json j = m;
  CHECK(j.get<GaussianMixture1D>() == m);
  const GaussianMixture2D m2({{1.0, {1.0, 2.0}, {1.0, 0.5, 2.0}}});
  const nlohmann::json j2 = m2;
  CHECK(j2.get<GaussianMixture2D>() == m2);
}

TEST_CASE("2-D EM recovers means and correlation") {
  Rng rng(6);
  std::vector<std::array<double, 2>> x;
  for (int i = 0; i < 4000; ++i) {
    const double a = rng.normal(), b = rng.normal();
    if (i % 2 == 0) {
      x.push_back({a, 0.8 * a + 0.6 * b});
    } else {
      x.push_back({100.0 + 3.0 * a, -50.0 + 0.5 * b});
    }
  }
  const auto m = GaussianMixture2D::fit(x, 2, rng);
  REQUIRE(m.size() == 2);
  auto c = m.components();
  std::sort(c.begin(), c.end(), [](const auto& p, const auto& q) { return p.mean[0] < q.mean[0]; });
  CHECK(c[0].mean[0] == doctest::Approx(0.0).scale(1.0).epsilon(0.1));
  CHECK(c[0].cov[1] == doctest::Approx(0.8).epsilon(0.1));
  CHECK(c[1].mean[0] == doctest::Approx(100.0).epsilon(0.01));
  CHECK(c[1].mean[1] == doctest::Approx(-50.0).epsilon(0.01));
  CHECK(c[1].cov[0] == doctest::Approx(9.0).epsilon(0.1));
  CHECK(c[0].weight == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("2-D point mass and single row") {
  Rng rng(7);
  const GaussianMixture2D spike({{1.0, {3.0, 4.0}, {0.0, 0.0, 0.0}}});
  for (int i = 0; i < 10; ++i) CHECK(spike.sample(rng) == std::array<double, 2>{3.0, 4.0});
  const std::vector<std::array<double, 2>> one{{2.0, 5.0}};
  const auto m = GaussianMixture2D::fit(one, 3, rng);
  REQUIRE(m.size() == 1);
  CHECK(m.components()[0].mean == std::array<double, 2>{2.0, 5.0});
}
