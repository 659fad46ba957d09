#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfadj/ea.hpp"
#include "selfadj/oracle.hpp"

using namespace selfadj;

namespace {

SearchPoint with_ones(int n, int ones) {
  SearchPoint x(n);
  for (int b = 0; b < ones; ++b) x.set(b, true);
  return x;
}

RunSpec spec_for(Algorithm algo, double F, double s, std::optional<std::int64_t> max_gen,
                 TraceLevel trace = TraceLevel::Summary) {
  RunSpec spec;
  spec.algorithm = algo;
  spec.params = ControllerParams::make(F, s);
  spec.stop.max_generations = max_gen;
  spec.trace = trace;
  return spec;
}

// Empirical mask frequencies of a mutation operator against the exact
// product-form probabilities.
template <typename Mutate>
void check_mask_distribution(int n, Mutate mutate, std::uint64_t seed) {
  Rng rng(seed);
  const SearchPoint parent(n);
  const int draws = 400000;
  std::map<std::string, int> counts;
  for (int k = 0; k < draws; ++k) ++counts[mutate(parent, rng).to_string()];
  const double p = 1.0 / n;
  for (std::uint32_t m = 0; m < (1U << n); ++m) {
    SearchPoint y(n);
    for (int b = 0; b < n; ++b) y.set(b, ((m >> b) & 1U) != 0);
    const double exact = std::pow(p, y.ones()) * std::pow(1.0 - p, n - y.ones());
    const double freq = counts[y.to_string()] / static_cast<double>(draws);
    const double se = std::sqrt(exact * (1.0 - exact) / draws);
    REQUIRE(std::abs(freq - exact) <= 5.0 * se + 1e-5);
  }
}

}  // namespace

TEST_SUITE("ea_core") {
  TEST_CASE("controller parameters") {
    const auto p = ControllerParams::make(1.5, 4.0);
    CHECK(std::abs(std::pow(p.growth_factor, p.s) * p.shrink_factor - 1.0) < 1e-12);
    CHECK_THROWS_AS(ControllerParams::make(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ControllerParams::make(2.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("round_lambda rounds halves up") {
    CHECK(round_lambda(1.5) == 2);
    CHECK(round_lambda(2.49) == 2);
    CHECK(round_lambda(1.0) == 1);
    CHECK(round_lambda(1.49) == 1);
    CHECK(round_lambda(2.5) == 3);
  }

  TEST_CASE("update_lambda examples") {
    const auto p21 = ControllerParams::make(2.0, 1.0);
    CHECK(update_lambda(4.0, true, p21) == 2.0);
    CHECK(update_lambda(1.0, true, p21) == 1.0);
    CHECK(update_lambda(1.0, true, ControllerParams::make(7.0, 0.3)) == 1.0);
    // 1.5^(1/4) = 1.10668191970032...
    CHECK(update_lambda(1.0, false, ControllerParams::make(1.5, 4.0)) == doctest::Approx(1.1066819197003215).epsilon(1e-14));
  }

  TEST_CASE("lambda equilibrium and lower clamp") {
    for (double F : {1.1, 1.5, 2.0, 3.0}) {
      for (int s : {1, 2, 3, 4, 7}) {
        const auto p = ControllerParams::make(F, s);
        for (double start : {10.0, 123.4, 1e4}) {
          double l = start;
          for (int k = 0; k < s; ++k) l = update_lambda(l, false, p);
          l = update_lambda(l, true, p);
          CHECK(std::abs(l - start) / start < 1e-9);
          double m = start;
          m = update_lambda(m, true, p);
          for (int k = 0; k < s; ++k) m = update_lambda(m, false, p);
          CHECK(std::abs(m - start) / start < 1e-9);
        }
        double l = 1.3;
        for (int k = 0; k < 20; ++k) {
          l = update_lambda(l, true, p);
          CHECK(l >= 1.0);
        }
      }
    }
  }

  TEST_CASE("default static lambda") {
    CHECK(default_static_lambda(100) == 11);
    CHECK(default_static_lambda(1000) == 16);
    CHECK(default_static_lambda(1) == 1);
  }

  TEST_CASE("mutation of a single bit always flips it") {
    Rng rng(1);
    const auto x = SearchPoint::from_string("0");
    for (int k = 0; k < 100; ++k) CHECK(mutate(x, rng).to_string() == "1");
    const auto y = SearchPoint::from_string("1");
    CHECK(mutate(y, rng).to_string() == "0");
  }

  TEST_CASE("mutation leaves the parent untouched") {
    Rng rng(2);
    const auto x = SearchPoint::from_string("1011001");
    const auto copy = x;
    for (int k = 0; k < 100; ++k) (void)mutate(x, rng);
    CHECK(x == copy);
  }

  TEST_CASE("flip-count mutation and per-bit reference match the exact mask law") {
    for (int n : {1, 2, 3, 4, 6}) {
      const Mutator m(n);
      check_mask_distribution(n, [&](const SearchPoint& x, Rng& r) { return m.mutate(x, r); }, 100 + n);
      check_mask_distribution(n, [](const SearchPoint& x, Rng& r) { return mutate_per_bit(x, r); }, 200 + n);
    }
  }

  TEST_CASE("flip positions are distinct, per-position rate 1/n for n <= 16") {
    for (int n : {8, 16}) {
      const Mutator m(n);
      Rng rng(9);
      std::vector<int> hits(static_cast<std::size_t>(n), 0);
      std::vector<int> flips;
      const int draws = 200000;
      for (int k = 0; k < draws; ++k) {
        m.sample_flips(rng, flips);
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        for (int f : flips) {
          REQUIRE_FALSE(seen[static_cast<std::size_t>(f)]);
          seen[static_cast<std::size_t>(f)] = true;
          ++hits[static_cast<std::size_t>(f)];
        }
      }
      const double p = 1.0 / n;
      const double se = std::sqrt(p * (1 - p) / draws);
      for (int h : hits) CHECK(std::abs(h / static_cast<double>(draws) - p) < 5 * se);
    }
  }

  TEST_CASE("mutation statistics at n = 100") {
    const Mutator m(100);
    Rng rng(12345);
    std::vector<int> flips;
    const int draws = 1000000;
    long long total = 0;
    int zero = 0;
    for (int k = 0; k < draws; ++k) {
      m.sample_flips(rng, flips);
      total += static_cast<long long>(flips.size());
      if (flips.empty()) ++zero;
    }
    const double mean = total / static_cast<double>(draws);
    CHECK(mean >= 0.99);
    CHECK(mean <= 1.01);
    CHECK(std::abs(zero / static_cast<double>(draws) - std::pow(0.99, 100)) <= 0.003);
  }

  TEST_CASE("comma step on n = 1 always succeeds") {
    const auto f = FitnessFunction::parse("onemax", 1);
    const auto params = ControllerParams::make(1.5, 1.0);
    const Mutator m(1);
    Rng rng(4);
    auto st = AlgoState::initial(SearchPoint::from_string("0"), f, 1.0);
    const auto out = generation_comma(st, f, params, m, rng);
    CHECK(out.success);
    CHECK(st.fitness == 1);
    CHECK(st.x.to_string() == "1");
    CHECK(st.evaluations == 1);
    CHECK(st.generation == 1);
    CHECK(st.lambda == 1.0);
  }

  TEST_CASE("comma step: new fitness is the offspring maximum, lambda follows success") {
    const auto f = FitnessFunction::parse("onemax", 12);
    const auto params = ControllerParams::make(1.5, 2.0);
    const Mutator m(12);
    Rng rng(8);
    auto st = AlgoState::initial(with_ones(12, 9), f, 2.7);
    int ties = 0;
    for (int t = 0; t < 5000; ++t) {
      const auto before = st;
      const auto out = generation_comma(st, f, params, m, rng);
      REQUIRE(st.fitness == out.offspring_best);
      REQUIRE(st.fitness == f.evaluate(st.x));
      REQUIRE(out.lambda_int == round_lambda(before.lambda));
      REQUIRE(st.evaluations == before.evaluations + out.lambda_int);
      REQUIRE(out.success == (out.offspring_best > before.fitness));
      if (out.success) {
        REQUIRE(st.lambda == doctest::Approx(std::max(1.0, before.lambda / 1.5)).epsilon(1e-15));
      } else {
        REQUIRE(st.lambda == doctest::Approx(before.lambda * std::sqrt(1.5)).epsilon(1e-15));
      }
      if (out.offspring_best == before.fitness) ++ties;
      REQUIRE(st.best_so_far == std::max(before.best_so_far, st.fitness));
      REQUIRE(st.lambda >= 1.0);
      if (st.fitness == 12) st = AlgoState::initial(with_ones(12, 9), f, 2.7);
    }
    CHECK(ties > 0);
  }

  TEST_CASE("comma step improvement frequency matches the exact oracle") {
    const int n = 20;
    const auto f = FitnessFunction::parse("onemax", n);
    const auto params = ControllerParams::make(1.5, 1.0);
    const Mutator m(n);
    Rng rng(2024);
    const int steps = 100000;
    int improved = 0;
    for (int t = 0; t < steps; ++t) {
      auto st = AlgoState::initial(with_ones(n, 15), f, 3.0);
      if (generation_comma(st, f, params, m, rng).success) ++improved;
    }
    const double p = level_quantities(n, 15, 3).p_plus;
    const double se = std::sqrt(p * (1 - p) / steps);
    CHECK(std::abs(improved / static_cast<double>(steps) - p) <= 3 * se);
  }

  TEST_CASE("plus step: never worse, ties replace, success is strict") {
    const auto f = FitnessFunction::parse("onemax", 2);
    const auto params = ControllerParams::make(1.5, 1.0);
    const Mutator m(2);
    Rng rng(6);
    bool saw_tie_swap = false;
    for (int t = 0; t < 400; ++t) {
      auto st = AlgoState::initial(SearchPoint::from_string("10"), f, 1.0);
      const auto out = generation_plus(st, f, params, m, rng);
      REQUIRE(st.fitness >= 1);
      if (out.offspring_best < 1) {
        REQUIRE(st.x.to_string() == "10");
        REQUIRE(st.lambda == 1.5);
      }
      if (out.offspring_best == 1) {
        REQUIRE_FALSE(out.success);
        REQUIRE(st.lambda == 1.5);
        if (st.x.to_string() == "01") saw_tie_swap = true;
      }
      if (out.offspring_best == 2) {
        REQUIRE(out.success);
        REQUIRE(st.lambda == 1.0);
      }
    }
    CHECK(saw_tie_swap);
  }

  TEST_CASE("plus runs never lose fitness") {
    const auto f = FitnessFunction::parse("onemax", 50);
    auto spec = spec_for(Algorithm::plus(), 1.5, 3.0, 20000, TraceLevel::Full);
    const auto rec = run(spec, f, 77);
    for (std::size_t k = 1; k < rec.rows.size(); ++k) REQUIRE(rec.rows[k].fitness >= rec.rows[k - 1].fitness);
  }

  TEST_CASE("static runs keep lambda and reach the optimum") {
    const auto f = FitnessFunction::parse("onemax", 10);
    auto spec = spec_for(Algorithm::static_comma(5), 1.5, 1.0, 100000, TraceLevel::Full);
    const auto rec = run(spec, f, 3);
    CHECK(rec.stop_cause == StopCause::Optimum);
    for (const auto& r : rec.rows) {
      REQUIRE(r.lambda_real == 5.0);
      REQUIRE(r.lambda_int == 5);
    }
  }

  TEST_CASE("full traces: accounting and best-so-far invariants") {
    const auto f = FitnessFunction::parse("onemax", 60);
    auto spec = spec_for(Algorithm::comma(), 1.5, 2.0, 30000, TraceLevel::Full);
    const auto rec = run(spec, f, 99);
    REQUIRE(rec.rows.size() == static_cast<std::size_t>(rec.generations + 1));
    CHECK(rec.rows.front().evaluations == 0);
    std::int64_t sum = 0;
    std::int64_t best = rec.rows.front().fitness;
    for (std::size_t k = 1; k < rec.rows.size(); ++k) {
      sum += rec.rows[k - 1].lambda_int;
      best = std::max(best, rec.rows[k].fitness);
      REQUIRE(rec.rows[k].evaluations == sum);
      REQUIRE(rec.rows[k].best_so_far == best);
      REQUIRE(rec.rows[k].lambda_real >= 1.0);
      REQUIRE(rec.rows[k].lambda_int == round_lambda(rec.rows[k].lambda_real));
    }
    CHECK(rec.evaluations == sum);
  }

  TEST_CASE("identical seed, identical record") {
    const auto f = FitnessFunction::parse("onemax", 40);
    auto spec = spec_for(Algorithm::comma(), 1.5, 1.0, 20000, TraceLevel::Full);
    const auto a = run(spec, f, 5);
    const auto b = run(spec, f, 5);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      REQUIRE(a.rows[k].fitness == b.rows[k].fitness);
      REQUIRE(a.rows[k].lambda_real == b.rows[k].lambda_real);
      REQUIRE(a.rows[k].evaluations == b.rows[k].evaluations);
    }
    CHECK(a.stop_cause == b.stop_cause);
    CHECK(run(spec, f, 6).evaluations != a.evaluations);
  }

  TEST_CASE("success rate 1 solves n = 100, success rate 20 stalls at the cap") {
    const auto f = FitnessFunction::parse("onemax", 100);
    int solved = 0, capped = 0;
    for (std::uint64_t r = 0; r < 100; ++r) {
      if (run(spec_for(Algorithm::comma(), 1.5, 1.0, 50000), f, child_seed(1, r)).stop_cause == StopCause::Optimum) {
        ++solved;
      }
      if (run(spec_for(Algorithm::comma(), 1.5, 20.0, 50000), f, child_seed(2, r)).stop_cause ==
          StopCause::GenerationCap) {
        ++capped;
      }
    }
    CHECK(solved == 100);
    CHECK(capped >= 95);
  }

  TEST_CASE("lambda abort is a censored stop") {
    // From the local optimum of jump:10 no offspring improves, so lambda grows.
    const auto f = FitnessFunction::parse("jump:10", 20);
    auto spec = spec_for(Algorithm::plus(), 2.0, 1.0, std::nullopt);
    spec.stop.lambda_abort_threshold = 50.0;
    Rng rng(1);
    const auto rec = run_from(AlgoState::initial(with_ones(20, 10), f, 1.0), spec, f, rng);
    CHECK(rec.stop_cause == StopCause::LambdaAbort);
    CHECK(rec.censored());
    CHECK(rec.final_lambda > 50.0);
    CHECK(StoppingCondition::default_abort_threshold(10, ControllerParams::make(2.0, 1.0)) ==
          doctest::Approx(std::exp(1.0) * 2 * 1000 * 2));
  }

  TEST_CASE("caps and stop validation") {
    const auto f = FitnessFunction::parse("onemax", 200);
    auto spec = spec_for(Algorithm::comma(), 1.5, 1.0, std::nullopt);
    spec.stop.max_evaluations = 100;
    const auto rec = run(spec, f, 1);
    CHECK(rec.stop_cause == StopCause::EvaluationCap);
    CHECK(rec.evaluations >= 100);
    auto g = spec_for(Algorithm::comma(), 1.5, 1.0, 7);
    CHECK(run(g, f, 1).generations == 7);
    auto none = spec_for(Algorithm::comma(), 1.5, 1.0, std::nullopt);
    none.stop.stop_on_optimum = false;
    CHECK_THROWS_AS(run(none, f, 1), std::invalid_argument);
  }

  TEST_CASE("optimum at initialization stops immediately") {
    const auto f = FitnessFunction::parse("onemax", 5);
    auto spec = spec_for(Algorithm::comma(), 1.5, 1.0, 100);
    Rng rng(1);
    const auto rec = run_from(AlgoState::initial(with_ones(5, 5), f, 1.0), spec, f, rng);
    CHECK(rec.stop_cause == StopCause::Optimum);
    CHECK(rec.generations == 0);
    CHECK(rec.evaluations == 0);
  }

  TEST_CASE("non-ONEMAX functions run to their optimum") {
    for (const char* name : {"zeromax", "twomax", "ridge", "cliff:2", "jump:2"}) {
      const auto f = FitnessFunction::parse(name, 12);
      auto spec = spec_for(Algorithm::comma(), 1.5, 0.5, 200000);
      const auto rec = run(spec, f, 21);
      CHECK_MESSAGE(rec.stop_cause == StopCause::Optimum, name);
      CHECK(f.is_optimum(rec.final_fitness));
    }
  }

  TEST_CASE("names and parsing") {
    CHECK(Algorithm::parse_kind("plus") == AlgorithmKind::SelfAdjustingPlus);
    CHECK(Algorithm::static_comma(4).name() == "static:4");
    CHECK_THROWS_AS(Algorithm::parse_kind("mu"), std::invalid_argument);
    CHECK_THROWS_AS(Algorithm::static_comma(0), std::invalid_argument);
    CHECK(parse_trace_level("full") == TraceLevel::Full);
    CHECK(to_string(StopCause::LambdaAbort) == "lambda_abort");
  }
}
