#include <cmath>
#include <numeric>

#include "doctest.h"
#include "optdiverse/learner.hpp"
#include "optdiverse/option_model.hpp"
#include "optdiverse/verify.hpp"
#include "test_util.hpp"

using namespace optdiverse;

TEST_CASE("init rejects bad dimensions") {
  CHECK_THROWS_AS(OptionModel::init(1, 4, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(OptionModel::init(2, 0, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(OptionModel::init(2, 4, 1, 1.0), ConfigError);
  CHECK_THROWS_AS(OptionModel::init(2, 4, 4, 0.0), ConfigError);
}

TEST_CASE("default init") {
  const OptionModel m = OptionModel::init(3, 5, 4, 1e-3);
  for (int o = 0; o < 3; ++o)
    for (int s = 0; s < 5; ++s) {
      const ActionDistribution d = policy_dist(m, o, StateId{s});
      for (double p : d.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
      CHECK(termination_prob(m, o, StateId{s}) == 0.5);
    }

  const OptionModel c = OptionModel::init(3, 5, 4, 1.0, InitSpec{0, 0, 2.5, 0});
  for (int s = 0; s < 5; ++s) CHECK(option_value_v(c, StateId{s}) == 2.5);
}

TEST_CASE("policy_dist") {
  OptionModel m = OptionModel::init(2, 2, 4, 1.0);
  const StateId s{1};

  SUBCASE("single raised logit") {
    m.theta_pi(0, s)[0] = 1.0;
    const double e = std::exp(1.0);
    CHECK(policy_dist(m, 0, s).probs[0] == doctest::Approx(e / (e + 3.0)).epsilon(1e-14));
    CHECK(policy_dist(m, 0, s).probs[0] == doctest::Approx(0.47536).epsilon(1e-5));
  }

  SUBCASE("shift invariance") {
    const double theta[] = {0.3, -1.2, 2.0, 0.7};
    std::copy(theta, theta + 4, m.theta_pi(0, s).begin());
    const ActionDistribution before = policy_dist(m, 0, s);
    for (double& t : m.theta_pi(0, s)) t += 123.0;
    const ActionDistribution after = policy_dist(m, 0, s);
    for (int a = 0; a < 4; ++a) CHECK(after.probs[a] == doctest::Approx(before.probs[a]).epsilon(1e-12));
  }

  SUBCASE("log-probs stay finite when probabilities underflow") {
    OptionModel cold = OptionModel::init(2, 1, 4, 1e-3);
    cold.theta_pi(0, StateId{0})[2] = 5.0;
    const ActionDistribution d = policy_dist(cold, 0, StateId{0});
    CHECK(d.probs[2] == 1.0);
    CHECK(d.probs[0] == 0.0);
    CHECK(d.log_probs[0] == doctest::Approx(-5000.0));
    CHECK(std::isfinite(d.log_probs[0]));
  }
}

TEST_CASE("policy_dist stays normalised through updates") {
  Rng rng(5);
  std::normal_distribution<double> noise(0.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 3);
  for (double temperature : {1.0, 1e-3}) {
    OptionModel m = random_model(2, 6, 4, temperature, rng);
    for (int i = 0; i < 2000; ++i) {
      Transition tr;
      tr.s = StateId{pick(rng) % 6};
      tr.o = pick(rng) % 2;
      tr.a = pick(rng);
      m.q_u(tr.s, tr.o)[tr.a] = noise(rng);
      policy_update(m, tr, {0.5, 0.5, 0.5}, PolicyStep::logit);
    }
    for (int o = 0; o < 2; ++o)
      for (int s = 0; s < 6; ++s) {
        const ActionDistribution d = policy_dist(m, o, StateId{s});
        CHECK(std::accumulate(d.probs.begin(), d.probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t a = 0; a < d.size(); ++a) {
          CHECK(std::isfinite(d.log_probs[a]));
          if (temperature == 1.0) CHECK(d.probs[a] > 0.0);
        }
      }
  }
}

TEST_CASE("termination_prob") {
  OptionModel m = OptionModel::init(2, 1, 4, 1.0);
  const StateId s{0};
  CHECK(termination_prob(m, 0, s) == 0.5);
  m.theta_beta(0, s) = std::log(3.0);
  CHECK(termination_prob(m, 0, s) == doctest::Approx(0.75).epsilon(1e-15));

  double prev = 0.0;
  for (double x = -30.0; x <= 30.0; x += 0.5) {
    m.theta_beta(0, s) = x;
    const double b = termination_prob(m, 0, s);
    CHECK(b > 0.0);
    CHECK(b < 1.0);
    CHECK(b > prev);
    prev = b;
  }
  CHECK(sigmoid(1e6) == 1.0);
  CHECK(sigmoid(-800.0) >= 0.0);
}

TEST_CASE("select_option") {
  OptionModel m = OptionModel::init(2, 1, 4, 1.0);
  const StateId s{0};
  Rng rng(9);

  m.q_omega(s)[0] = 0.1;
  m.q_omega(s)[1] = 0.9;
  for (int i = 0; i < 1000; ++i) CHECK(select_option(m, s, 0.0, rng) == 1);

  m.q_omega(s)[0] = 0.5;
  m.q_omega(s)[1] = 0.5;
  for (int i = 0; i < 1000; ++i) CHECK(select_option(m, s, 0.0, rng) == 0);

  OptionModel four = OptionModel::init(4, 1, 4, 1.0);
  four.q_omega(s)[2] = 10.0;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10000; ++i) ++counts[select_option(four, s, 1.0, rng)];
  CHECK(chi_square_uniform(counts) < chi_square_5sigma(4));
}

TEST_CASE("greedy choice is invariant to a constant shift of option values") {
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    OptionModel m = random_model(4, 1, 4, 1.0, rng);
    const StateId s{0};
    const int before = greedy_option(m, s);
    Rng a(t), b(t);
    const int drawn = select_option(m, s, 0.0, a);
    for (double& q : m.q_omega(s)) q += 17.25;
    CHECK(greedy_option(m, s) == before);
    CHECK(select_option(m, s, 0.0, b) == drawn);
  }
}

TEST_CASE("option values") {
  OptionModel m = OptionModel::init(2, 1, 4, 1.0);
  const StateId s{0};
  m.q_omega(s)[0] = 0.2;
  m.q_omega(s)[1] = 0.7;
  CHECK(option_value_v(m, s) == 0.7);
  CHECK(option_value_v_epsilon(m, s, 0.1) == doctest::Approx(0.9 * 0.7 + 0.1 * 0.45));
  m.q_omega(s)[0] = 0.7;
  CHECK(option_value_v(m, s) == 0.7);

  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const OptionModel r = random_model(5, 1, 4, 1.0, rng);
    for (double q : r.q_omega(s)) CHECK(option_value_v(r, s) >= q);
  }
}

TEST_CASE("sampling") {
  Rng rng(17);
  const double d = 1e-12;
  const std::vector<double> sharp{1 - 3 * d, d, d, d};
  for (int i = 0; i < 10000; ++i) CHECK(sample_index(sharp, rng) == 0);

  const OptionModel m = OptionModel::init(2, 1, 4, 1.0);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10000; ++i) ++counts[sample_action(m, 0, StateId{0}, rng)];
  CHECK(chi_square_uniform(counts) < chi_square_5sigma(4));

  Rng a(99), b(99);
  for (int i = 0; i < 200; ++i) CHECK(sample_action(m, 1, StateId{0}, a) == sample_action(m, 1, StateId{0}, b));
}
