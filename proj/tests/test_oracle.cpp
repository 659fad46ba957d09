#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "selfadj/ea.hpp"
#include "selfadj/oracle.hpp"
#include "support/brute_force.hpp"

using namespace selfadj;

namespace {

// Best-of-lambda pmf from a plain CDF power, no log-space tricks.
std::vector<double> naive_best_of(const std::vector<double>& single, int lambda) {
  std::vector<double> out(single.size(), 0.0);
  double cdf = 0.0;
  double prev = 0.0;
  for (std::size_t j = 0; j < single.size(); ++j) {
    cdf += single[j];
    const double now = std::pow(std::min(cdf, 1.0), lambda);
    out[j] = now - prev;
    prev = now;
  }
  return out;
}

std::vector<std::int64_t> lambda_range(int hi) {
  std::vector<std::int64_t> v;
  for (int l = 1; l <= hi; ++l) v.push_back(l);
  return v;
}

}  // namespace

TEST_SUITE("theory_oracle") {
  TEST_CASE("n = 2 by hand") {
    const auto d = single_offspring_distribution(2, 1);
    CHECK(d.pmf[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d.pmf[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.pmf[2] == doctest::Approx(0.25).epsilon(1e-15));
    const auto b = best_of_lambda_distribution(2, 1, 2);
    CHECK(b.pmf[2] == doctest::Approx(7.0 / 16.0).epsilon(1e-15));
    const auto q = level_quantities(2, 1, 1);
    CHECK(q.p_plus == doctest::Approx(0.25));
    CHECK(q.p_zero == doctest::Approx(0.5));
    CHECK(q.p_minus == doctest::Approx(0.25));
    REQUIRE(q.delta_plus.has_value());
    REQUIRE(q.delta_minus.has_value());
    CHECK(*q.delta_plus == doctest::Approx(1.0));
    CHECK(*q.delta_minus == doctest::Approx(1.0));
  }

  TEST_CASE("n = 1 forces the flip") {
    const auto d = single_offspring_distribution(1, 0);
    CHECK(d.pmf[0] == 0.0);
    CHECK(d.pmf[1] == doctest::Approx(1.0));
  }

  TEST_CASE("single-offspring pmf matches mask enumeration") {
    for (int n = 1; n <= 10; ++n) {
      for (int i = 0; i <= n; ++i) {
        const auto ref = bf::single_pmf(n, i);
        const auto d = single_offspring_distribution(n, i);
        for (int j = 0; j <= n; ++j) {
          REQUIRE(std::abs(d.pmf[static_cast<std::size_t>(j)] - ref[static_cast<std::size_t>(j)]) < 1e-14);
        }
      }
    }
  }

  TEST_CASE("best-of-lambda pmf matches the plain CDF power") {
    for (int n : {3, 6, 10}) {
      for (int i = 0; i <= n; ++i) {
        const auto ref1 = bf::single_pmf(n, i);
        for (int lambda : {1, 2, 3, 5, 9}) {
          const auto ref = naive_best_of(ref1, lambda);
          const auto d = best_of_lambda_distribution(n, i, lambda);
          for (int j = 0; j <= n; ++j) {
            REQUIRE(std::abs(d.pmf[static_cast<std::size_t>(j)] - ref[static_cast<std::size_t>(j)]) < 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("lambda = 1 reproduces the single-offspring law") {
    for (int n : {10, 50, 163}) {
      OneMaxModel model(n);
      for (int i = 0; i <= n; ++i) {
        const auto a = model.single(i);
        const auto b = model.best_of(i, 1);
        for (int j = 0; j <= n; ++j) {
          REQUIRE(std::abs(a.pmf[static_cast<std::size_t>(j)] - b.pmf[static_cast<std::size_t>(j)]) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("normalization and nonnegativity") {
    for (int n : {2, 10, 50, 163, 500}) {
      OneMaxModel model(n);
      for (int i = 0; i <= n; ++i) {
        REQUIRE(std::abs(model.single(i).total() - 1.0) < 1e-12);
        for (int lambda : {1, 2, 7, 33, 64}) {
          const auto d = model.best_of(i, lambda);
          REQUIRE(std::abs(d.total() - 1.0) < 1e-12);
          for (double p : d.pmf) REQUIRE(p >= 0.0);
        }
      }
    }
  }

  TEST_CASE("fallback probability is the lambda-th power of the single one") {
    for (int n : {2, 5, 10, 23, 50}) {
      OneMaxModel model(n);
      for (int i = 0; i < n; ++i) {
        const double p1 = model.quantities(i, 1).p_minus;
        for (int lambda = 1; lambda <= 64; ++lambda) {
          REQUIRE(std::abs(model.quantities(i, lambda).p_minus - std::pow(p1, lambda)) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("improvement from i = n - 1 needs the lone zero to flip alone") {
    for (int n : {2, 3, 10, 100}) {
      const double expect = (1.0 / n) * std::pow(1.0 - 1.0 / n, n - 1);
      CHECK(level_quantities(n, n - 1, 1).p_plus == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK(level_quantities(2, 1, 1).p_plus == doctest::Approx(0.25));
  }

  TEST_CASE("level quantities agree with enumeration and sum to one") {
    for (int n = 2; n <= 8; ++n) {
      for (int i = 0; i < n; ++i) {
        const auto ref1 = bf::single_pmf(n, i);
        for (int lambda : {1, 2, 4}) {
          const auto ref = naive_best_of(ref1, lambda);
          double pp = 0, pm = 0, gp = 0, gm = 0;
          for (int j = 0; j <= n; ++j) {
            const double p = ref[static_cast<std::size_t>(j)];
            if (j > i) pp += p, gp += (j - i) * p;
            if (j < i) pm += p, gm += (i - j) * p;
          }
          const auto q = level_quantities(n, i, lambda);
          CHECK(std::abs(q.p_plus + q.p_zero + q.p_minus - 1.0) < 1e-12);
          CHECK(q.p_plus == doctest::Approx(pp).epsilon(1e-12));
          CHECK(q.p_minus == doctest::Approx(pm).epsilon(1e-12));
          REQUIRE(q.delta_plus.has_value());
          CHECK(*q.delta_plus == doctest::Approx(gp / pp).epsilon(1e-10));
          CHECK(*q.delta_plus >= 1.0);
          if (i == 0) {
            CHECK_FALSE(q.delta_minus.has_value());
          } else {
            REQUIRE(q.delta_minus.has_value());
            CHECK(*q.delta_minus == doctest::Approx(gm / pm).epsilon(1e-10));
            CHECK(*q.delta_minus >= 1.0);
          }
        }
      }
    }
  }

  TEST_CASE("conditional means at vanishing probability are undefined") {
    // Fallback from i = 500 with lambda = 400 has probability far below 1e-300.
    const auto q = level_quantities(1000, 500, 4000);
    CHECK(q.p_minus < 1e-300);
    CHECK_FALSE(q.delta_minus.has_value());
  }

  TEST_CASE("p+ is non-increasing in i and non-decreasing in lambda") {
    for (int n : {10, 50, 163}) {
      OneMaxModel model(n);
      for (int lambda = 1; lambda <= 64; ++lambda) {
        for (int i = 0; i < n; ++i) {
          const double p = model.quantities(i, lambda).p_plus;
          if (i + 1 < n) REQUIRE(model.quantities(i + 1, lambda).p_plus <= p + 1e-15);
          if (lambda < 64) REQUIRE(model.quantities(i, lambda + 1).p_plus >= p - 1e-15);
        }
      }
    }
  }

  TEST_CASE("potential values") {
    const auto g2 = PotentialSpec::g2(1.5);
    CHECK(potential_value(g2, 17.0, 1.0) == 17.0);
    CHECK(potential_value(g2, 17.0, 1.5) == doctest::Approx(19.2));
    const auto g1 = PotentialSpec::g1(1.5, 0.5, 100);
    const double cap = std::numbers::e * 100 * 1.5 * 1.5;
    CHECK(potential_value(g1, 40.0, cap) == doctest::Approx(40.0));
    CHECK(potential_value(g1, 40.0, 2 * cap) == 40.0);
    CHECK(g1.h(1.0) == doctest::Approx(bf::h_g1(1.0, 1.5, 0.5, 100)).epsilon(1e-14));
    CHECK(g1.h(7.3) < g1.h(8.0));
  }

  TEST_CASE("n = 2 g1 drift by hand") {
    // Four masks: none (stay), flip the one (lose), flip the zero (gain), both (stay).
    const double F = 1.5, s = 0.5;
    const auto h = [&](double l) { return bf::h_g1(l, F, s, 2); };
    const double up = 1.0 + h(1.0) - h(1.0);  // success keeps lambda at 1
    const double stay = h(std::pow(F, 1.0 / s)) - h(1.0);
    const double expect = 0.25 * up + 0.5 * stay + 0.25 * (stay - 1.0);
    const auto params = ControllerParams::make(F, s);
    CHECK(exact_potential_drift(PotentialSpec::g1(F, s, 2), 2, 1, 1.0, params) ==
          doctest::Approx(expect).epsilon(1e-13));
  }

  TEST_CASE("exact drift equals joint enumeration over offspring masks") {
    const double F = 1.5;
    for (int n = 1; n <= 6; ++n) {
      for (double s : {0.5, 1.0, 3.0}) {
        const auto params = ControllerParams::make(F, s);
        const auto g1 = PotentialSpec::g1(F, s, n);
        const auto g2 = PotentialSpec::g2(F);
        const auto h1 = [&](double l) { return bf::h_g1(l, F, s, n); };
        const auto h2 = [&](double l) { return bf::h_g2(l, F); };
        for (double lambda : {1.0, 1.3, 1.5, 2.0, 2.7, 3.0}) {
          if (n == 6 && lambda > 2.5 && s != 1.0) continue;  // keep the 2^18 tuples to one pass per n
          for (int i = 0; i < n; ++i) {
            REQUIRE(std::abs(exact_potential_drift(g1, n, i, lambda, params) - bf::joint_drift(n, i, lambda, F, s, h1)) <
                    1e-9);
            REQUIRE(std::abs(exact_potential_drift(g2, n, i, lambda, params) - bf::joint_drift(n, i, lambda, F, s, h2)) <
                    1e-9);
            REQUIRE(std::abs(exact_potential_drift(g1, n, i, lambda, params, GainMode::CappedGain) -
                             bf::joint_drift(n, i, lambda, F, s, h1, true)) < 1e-9);
          }
        }
      }
    }
  }

  TEST_CASE("exact g1 drift agrees with simulated generations") {
    const int n = 100, i = 70;
    const double F = 1.5, s = 1.0, lambda = 4.0;
    const auto params = ControllerParams::make(F, s);
    const auto f = FitnessFunction::parse("onemax", n);
    const Mutator m(n);
    Rng rng(31337);
    SearchPoint x(n);
    for (int b = 0; b < i; ++b) x.set(b, true);
    const auto h = [&](double l) { return bf::h_g1(l, F, s, n); };
    const int steps = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < steps; ++t) {
      auto st = AlgoState::initial(x, f, lambda);
      generation_comma(st, f, params, m, rng);
      const double d = static_cast<double>(st.fitness - i) + h(st.lambda) - h(lambda);
      sum += d;
      sum_sq += d * d;
    }
    const double mean = sum / steps;
    const double se = std::sqrt((sum_sq / steps - mean * mean) / steps);
    const double exact = exact_potential_drift(PotentialSpec::g1(F, s, n), n, i, lambda, params);
    CHECK(std::abs(mean - exact) <= 3.0 * se);
  }

  TEST_CASE("capping the gain never raises the g1 drift") {
    const int n = 200;
    const auto params = ControllerParams::make(1.5, 0.5);
    const auto spec = PotentialSpec::g1(1.5, 0.5, n);
    OneMaxModel model(n);
    for (const auto& st : g1_grid(n, params)) {
      REQUIRE(exact_potential_drift(model, spec, st.i, st.lambda_real, params, GainMode::CappedGain) <=
              exact_potential_drift(model, spec, st.i, st.lambda_real, params) + 1e-12);
    }
  }

  TEST_CASE("bound sandwich on the n = 200 grid") {
    const std::vector<std::int64_t> lambdas{1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 512};
    const auto report = check_bounds(200, lambdas);
    for (const auto& s : report.summaries) {
      CHECK_MESSAGE(s.checked > 0, s.bound);
      if (s.bound == "p_plus_upper_sharp" || s.bound == "p_plus_upper_chain") continue;
      CHECK_MESSAGE(s.violations == 0, s.bound);
    }
  }

  TEST_CASE("sharp single-offspring improvement bound holds near the optimum only") {
    // The 1.14 constant is valid for i close to n; far from the optimum the
    // exact improvement probability exceeds it.
    const auto report = check_bounds(500, {1});
    const auto* sharp = report.find("p_plus_upper_sharp");
    REQUIRE(sharp != nullptr);
    CHECK(sharp->violations > 0);
    CHECK(level_quantities(500, 0, 1).p_plus > 1.14 * std::pow(1.0 - 1.0 / 500, 499));
    OneMaxModel model(500);
    for (int i = 450; i < 500; ++i) {
      CHECK(model.quantities(i, 1).p_plus <= 1.14 * (500.0 - i) / 500 * std::pow(1.0 - 1.0 / 500, 499));
    }
  }

  TEST_CASE("special cases of the improvement bounds") {
    CHECK(level_quantities(163, 137, 1).p_plus <= 0.069);
    for (int i = 137; i <= 138; ++i) CHECK(level_quantities(163, i, 1).p_plus <= 0.069);
    OneMaxModel model(50);
    for (int i = 0; i < 50; ++i) {
      const auto q = model.quantities(i, 5);
      REQUIRE(q.delta_plus.has_value());
      CHECK(*q.delta_plus <= 3.413);
    }
    const auto rep = check_bounds(163, lambda_range(8));
    const auto* band = rep.find("p_plus_single_band");
    REQUIRE(band != nullptr);
    CHECK(band->checked == 2);
    CHECK(band->violations == 0);
    CHECK_THROWS_AS(check_bounds(1, {1}), std::invalid_argument);
  }

  TEST_CASE("forward drift series") {
    CHECK(forward_drift_series_bound(1) == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-12));
    double prev = 0.0;
    for (int l = 1; l <= 512; l *= 2) {
      const double v = forward_drift_series_bound(l);
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("drift grid check reports empty grids") {
    const auto params = ControllerParams::make(1.5, 18.0);
    const auto rep = drift_grid_check(PotentialSpec::g2(1.5), params, 100, {}, -0.0008, DriftDirection::AtMost);
    CHECK(rep.status == DriftStatus::NoStatesInBand);
    CHECK(rep.states == 0);
  }

  TEST_CASE("g2 band states sit near 84 to 85 percent of n") {
    const auto grid = g2_band_grid(1000, PotentialSpec::g2(1.5));
    REQUIRE_FALSE(grid.empty());
    const auto [lo, hi] = g2_band(1000);
    CHECK(lo == doctest::Approx(840.0 + 2.2 * std::pow(std::log(4.5), 2)));
    CHECK(hi == 850.0);
    for (const auto& st : grid) {
      // h(2.4) is about 10.2, so levels a few below 0.84n still enter the band.
      CHECK(st.i >= 834);
      CHECK(st.i <= 849);
      CHECK(st.lambda_real < 2.4 + 1e-9);
      const double g = potential_value(PotentialSpec::g2(1.5), st.i, st.lambda_real);
      CHECK(g > lo);
      CHECK(g < hi);
    }
  }

  TEST_CASE("g1 grid covers every level and the log-spaced tail") {
    const auto params = ControllerParams::make(1.5, 0.5);
    const auto grid = g1_grid(50, params);
    CHECK(grid.size() == 50u * (37u + 30u - 1u));  // lambda = 1 appears in both parts
    double top = 0.0;
    for (const auto& st : grid) top = std::max(top, st.lambda_real);
    CHECK(top == doctest::Approx(std::numbers::e * 50 * 2.25));
  }

  TEST_CASE("small drift check passes and flags a tightened threshold") {
    const auto params = ControllerParams::make(1.5, 0.5);
    const auto spec = PotentialSpec::g1(1.5, 0.5, 100);
    const auto grid = g1_grid(100, params);
    const auto ok = drift_grid_check(spec, params, 100, grid, -10.0, DriftDirection::AtLeast);
    CHECK(ok.status == DriftStatus::Pass);
    CHECK(ok.states == static_cast<std::int64_t>(grid.size()));
    REQUIRE(ok.extreme.has_value());
    const auto bad = drift_grid_check(spec, params, 100, grid, ok.extreme->drift + 1e-6, DriftDirection::AtLeast);
    CHECK(bad.status == DriftStatus::Fail);
    CHECK_FALSE(bad.violations.empty());
  }

  TEST_CASE("elitist runtime bound") {
    CHECK(elitist_runtime_bound(10, 4, 4, 1.5, 1.0, 1.0) == doctest::Approx(3.0));
    CHECK(elitist_runtime_bound(10, 4, 4, 2.0, 1.0, 3.0) == doctest::Approx(6.0));
    const double e = std::numbers::e;
    const double hand = 2.0 + (1.0 / e + 0.5 / std::log(2.0)) * 3.0 * 2.0 * e;
    CHECK(elitist_runtime_bound(2, 1, 2, 2.0, 1.0, 1.0) == doctest::Approx(hand).epsilon(1e-13));
    CHECK(hand == doctest::Approx(19.765).epsilon(1e-4));
    double prev = 0.0;
    for (int b = 0; b <= 100; ++b) {
      const double v = elitist_runtime_bound(100, 0, b, 1.5, 1.0, 1.0);
      CHECK(v >= prev);
      prev = v;
    }
    std::vector<double> ratios;
    for (int n : {100, 1000, 10000}) {
      ratios.push_back(elitist_runtime_bound(n, 0, n, 1.5, 1.0, 1.0) / (n * std::log(n)));
    }
    CHECK(*std::max_element(ratios.begin(), ratios.end()) < 2.0 * *std::min_element(ratios.begin(), ratios.end()));
  }
}
