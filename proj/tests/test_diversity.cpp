#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "optdiverse/diversity.hpp"
#include "optdiverse/verify.hpp"

using namespace optdiverse;

namespace {

// Direct summation, kept separate from the library implementation.
double sum_entropy(const std::vector<double>& p) {
  double h = 0;
  for (double x : p)
    if (x > 0) h -= x * std::log(x);
  return h;
}

double sum_cross_entropy(const std::vector<double>& p, const std::vector<double>& q) {
  double h = 0;
  for (std::size_t i = 0; i < p.size(); ++i) h -= p[i] * std::log(q[i]);
  return h;
}

}  // namespace

TEST_CASE("entropy") {
  CHECK(entropy(make_distribution({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(entropy(make_distribution({0.0, 1.0, 0.0, 0.0})) == 0.0);
  const std::vector<double> d{0.5, 0.25, 0.125, 0.125};
  CHECK(entropy(make_distribution(d)) == doctest::Approx(sum_entropy(d)).epsilon(1e-14));
  CHECK(entropy(make_distribution(d)) == doctest::Approx(1.213008).epsilon(1e-6));
}

TEST_CASE("cross_entropy") {
  const std::vector<double> p{0.9, 0.1}, q{0.1, 0.9};
  CHECK(cross_entropy(make_distribution(p), make_distribution(q)) ==
        doctest::Approx(sum_cross_entropy(p, q)).epsilon(1e-14));
  CHECK(cross_entropy(make_distribution(p), make_distribution(q)) == doctest::Approx(2.0828626).epsilon(1e-7));

  const auto same = make_distribution({0.2, 0.3, 0.5});
  CHECK(cross_entropy(same, same) == doctest::Approx(entropy(same)).epsilon(1e-14));
  const auto u = make_distribution({0.2, 0.2, 0.2, 0.2, 0.2});
  CHECK(cross_entropy(u, u) == doctest::Approx(std::log(5.0)).epsilon(1e-14));

  CHECK_THROWS_AS(cross_entropy(make_distribution({0.5, 0.5}), make_distribution({1.0, 0.0})), std::domain_error);
  CHECK(cross_entropy(make_distribution({1.0, 0.0}), make_distribution({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("option selection entropy") {
  const std::vector<double> row{0.3, 0.8};
  CHECK(option_selection_entropy(row, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(option_selection_entropy(std::vector<double>{1, 2, 3, 4}, 1.0) == doctest::Approx(std::log(4.0)));
  CHECK(option_selection_entropy(row, 0.0) == 0.0);
  CHECK(option_selection_entropy(row, 0.1) == doctest::Approx(sum_entropy({0.95, 0.05})).epsilon(1e-14));
  CHECK(option_selection_entropy(row, 0.1) == doctest::Approx(0.198515).epsilon(1e-6));
}

TEST_CASE("choose_pairs") {
  Rng rng(1);
  const auto all = choose_pairs(4, 6, rng);
  CHECK(all.size() == 6);
  for (int t = 0; t < 50; ++t) {
    const auto some = choose_pairs(6, 6, rng);
    REQUIRE(some.size() == 6);
    std::set<std::pair<int, int>> distinct(some.begin(), some.end());
    CHECK(distinct.size() == 6);
    for (auto [i, j] : some) {
      CHECK(0 <= i);
      CHECK(i < j);
      CHECK(j < 6);
    }
  }
}

TEST_CASE("pseudo_reward") {
  Rng rng(3);
  const StateId s{0};

  SUBCASE("identical policies give their entropy") {
    OptionModel m = OptionModel::init(2, 1, 4, 1.0);
    const double theta[] = {0.4, -0.3, 1.1, 0.0};
    for (int o = 0; o < 2; ++o) std::copy(theta, theta + 4, m.theta_pi(o, s).begin());
    const double h = entropy(policy_dist(m, 0, s));
    for (int i = 0; i < 20; ++i) CHECK(pseudo_reward(PolicyView(m), s, {}, 0.05, rng) == doctest::Approx(h));
  }

  SUBCASE("uniform policies") {
    const OptionModel m = OptionModel::init(4, 1, 4, 1e-3);
    CHECK(pseudo_reward(PolicyView(m), s, {}, 0.05, rng) == doctest::Approx(std::log(4.0)));
  }

  SUBCASE("all four terms") {
    const OptionModel m = OptionModel::init(2, 1, 4, 1e-3);
    BonusSpec full;
    full.include_option_entropies = true;
    full.include_policy_over_options_entropy = true;
    const double expected = 3 * std::log(4.0) + std::log(2.0);
    CHECK(pseudo_reward(PolicyView(m), s, full, 1.0, rng) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pseudo_reward(PolicyView(m), s, full, 1.0, rng) == doctest::Approx(4.852030).epsilon(1e-6));
  }

  SUBCASE("finite and non-negative") {
    for (double temperature : {1.0, 1e-3}) {
      for (int t = 0; t < 300; ++t) {
        const OptionModel m = random_model(4, 1, 4, temperature, rng);
        BonusSpec spec;
        spec.include_option_entropies = t % 2 == 0;
        spec.include_policy_over_options_entropy = t % 3 == 0;
        spec.direction = t % 5 == 0 ? PairDirection::symmetric : PairDirection::sampled;
        const double b = pseudo_reward(PolicyView(m), s, spec, 0.05, rng);
        CHECK(std::isfinite(b));
        CHECK(b >= 0.0);
      }
    }
  }

  SUBCASE("independent of termination parameters") {
    OptionModel m = random_model(4, 1, 4, 1.0, rng);
    Rng a(8), b(8);
    const double before = pseudo_reward(PolicyView(m), s, {}, 0.05, a);
    for (double& t : m.theta_beta_data()) t = -t + 3.0;
    CHECK(pseudo_reward(PolicyView(m), s, {}, 0.05, b) == before);
  }
}

TEST_CASE("augment") {
  CHECK(augment(0.7, 3.0, Tau(0.0)) == 0.7);
  CHECK(augment(0.7, 3.0, Tau(1.0)) == 3.0);
  CHECK(augment(1.0, 0.5, Tau(0.2)) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS(Tau(-0.1));
  CHECK_THROWS(Tau(1.5));

  Rng rng(4);
  std::uniform_real_distribution<double> u(-5, 5), t01(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const double r1 = u(rng), r2 = u(rng), b1 = u(rng), b2 = u(rng);
    const Tau tau(t01(rng));
    CHECK(augment(r1 + r2, b1 + b2, tau) == doctest::Approx(augment(r1, b1, tau) + augment(r2, b2, tau)));
    CHECK(augment(2 * r1, 2 * b1, tau) == doctest::Approx(2 * augment(r1, b1, tau)));
  }
}

TEST_CASE("DiversityTracker") {
  SUBCASE("fresh tracker") {
    for (TrackerMode mode : {TrackerMode::moving_mean_center, TrackerMode::buffer_standardize}) {
      const DiversityTracker t(mode);
      CHECK(t.count() == 0);
      CHECK(t.relative_diversity(5.0) == 0.0);
    }
  }

  SUBCASE("moving mean") {
    DiversityTracker t(TrackerMode::moving_mean_center);
    for (double x : {1.0, 2.0, 3.0}) t.record(x);
    CHECK(t.running_mean() == 2.0);
    CHECK(t.relative_diversity(2.0) == 0.0);
    CHECK(t.relative_diversity(3.5) == 1.5);
  }

  SUBCASE("buffer standardization") {
    DiversityTracker t(TrackerMode::buffer_standardize, 3);
    for (double x : {1.0, 2.0, 3.0}) t.record(x);
    CHECK(t.relative_diversity(3.0) == doctest::Approx(1.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK(t.relative_diversity(3.0) == doctest::Approx(1.224745).epsilon(1e-6));
    t.record(4.0);
    CHECK(t.buffer().size() == 3);
    CHECK(t.buffer().front() == 2.0);

    DiversityTracker flat(TrackerMode::buffer_standardize);
    for (int i = 0; i < 10; ++i) flat.record(0.3);
    CHECK(flat.relative_diversity(0.3) == 0.0);
    CHECK(flat.relative_diversity(9.0) == 0.0);

    DiversityTracker one(TrackerMode::buffer_standardize);
    one.record(2.0);
    CHECK(one.relative_diversity(4.0) == 0.0);
  }

  SUBCASE("standardized buffer has mean 0 and population std 1") {
    Rng rng(12);
    std::normal_distribution<double> n(3.0, 2.0);
    DiversityTracker t(TrackerMode::buffer_standardize, 50);
    for (int i = 0; i < 120; ++i) t.record(n(rng));
    std::vector<double> z;
    for (double x : t.buffer()) z.push_back(t.relative_diversity(x));
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double var = 0;
    for (double v : z) var += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::sqrt(var / z.size()) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("BonusSpec validation") {
  BonusSpec none;
  none.include_divergence = false;
  CHECK_THROWS_AS(none.validate(), ConfigError);
  BonusSpec zero_budget;
  zero_budget.pair_budget = 0;
  CHECK_THROWS_AS(zero_budget.validate(), ConfigError);
}
