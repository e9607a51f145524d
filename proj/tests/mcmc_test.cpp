#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "junction/mcmc.hpp"

using namespace junction;

namespace {

// Three-state toy target used throughout: posterior mass (0.7, 0.2, 0.1),
// symmetric proposal picking one of the other two states.
const std::array<double, 3> kToyPosterior{0.7, 0.2, 0.1};

int toy_propose(int current, Rng& rng) {
  std::uniform_int_distribution<int> d(0, 1);
  const int other = d(rng);
  return (current + other + 1) % 3;
}

double toy_log_post(int s) { return std::log(kToyPosterior[static_cast<std::size_t>(s)]); }

// Occupancy of the chain's pre-step state, observed through the proposal
// hook (called exactly once per step with the current state).
std::array<double, 3> toy_occupancy(double temperature, std::uint64_t steps, std::uint64_t seed) {
  std::array<std::uint64_t, 3> counts{0, 0, 0};
  auto propose = [&counts](int s, Rng& rng) {
    counts[static_cast<std::size_t>(s)]++;
    return toy_propose(s, rng);
  };
  const AnnealingSchedule schedule{temperature, temperature, steps};
  run_chain(0, propose, toy_log_post, schedule, seed);
  std::array<double, 3> freq{};
  for (int s = 0; s < 3; ++s) {
    freq[static_cast<std::size_t>(s)] =
        static_cast<double>(counts[static_cast<std::size_t>(s)]) / static_cast<double>(steps);
  }
  return freq;
}

}  // namespace

TEST_CASE("acceptance probability") {
  CHECK(acceptance_probability(-3.0, -3.0, 1.0) == doctest::Approx(1.0));
  CHECK(acceptance_probability(std::log(0.5), 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(acceptance_probability(std::log(0.5), 0.0, 2.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(acceptance_probability(1.0, -5.0, 0.5) == doctest::Approx(1.0));
  CHECK(acceptance_probability(-std::numeric_limits<double>::infinity(), -1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(acceptance_probability(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("temperature decays geometrically between the endpoints") {
  const AnnealingSchedule s{2.0, 0.2, 1000};
  CHECK(annealing_temperature(s, 0) == doctest::Approx(2.0));
  CHECK(annealing_temperature(s, 500) == doctest::Approx(std::sqrt(2.0 * 0.2)));
  CHECK(annealing_temperature(s, 999) > 0.2);
  for (std::uint64_t k = 1; k < 1000; k += 37) {
    CHECK(annealing_temperature(s, k) < annealing_temperature(s, k - 1));
  }
}

TEST_CASE("zero steps returns the initial state") {
  const AnnealingSchedule schedule{2.0, 0.2, 0};
  const auto result = run_chain(2, toy_propose, toy_log_post, schedule, 1);
  CHECK(result.best_state == 2);
  CHECK(result.proposed_count == 0);
  CHECK(result.accepted_count == 0);
  CHECK(result.best_log_posterior == doctest::Approx(toy_log_post(2)));
}

TEST_CASE("the toy chain finds its mode") {
  const AnnealingSchedule schedule{2.0, 0.2, 10000};
  const auto result = run_chain(2, toy_propose, toy_log_post, schedule, 99);
  CHECK(result.best_state == 0);
  CHECK(result.proposed_count == 10000);
  CHECK(result.accepted_count <= result.proposed_count);
}

TEST_CASE("identical seeds give identical results") {
  const AnnealingSchedule schedule{2.0, 0.2, 5000};
  const auto a = run_chain(1, toy_propose, toy_log_post, schedule, 1234);
  const auto b = run_chain(1, toy_propose, toy_log_post, schedule, 1234);
  CHECK(a.best_state == b.best_state);
  CHECK(a.best_log_posterior == b.best_log_posterior);
  CHECK(a.accepted_count == b.accepted_count);
  CHECK(a.proposed_count == b.proposed_count);
}

TEST_CASE("an initial state with -inf posterior is rejected") {
  auto log_post = [](int) { return -std::numeric_limits<double>::infinity(); };
  const AnnealingSchedule schedule{2.0, 0.2, 10};
  CHECK_THROWS_AS(run_chain(0, toy_propose, log_post, schedule, 1), std::invalid_argument);
}

TEST_CASE("best log posterior is monotone over run prefixes") {
  double previous = -std::numeric_limits<double>::infinity();
  for (std::uint64_t steps : {10, 50, 200, 1000, 5000}) {
    const AnnealingSchedule schedule{2.0, 0.2, steps};
    const auto result = run_chain(2, toy_propose, toy_log_post, schedule, 77);
    CHECK(result.best_log_posterior >= previous);
    previous = result.best_log_posterior;
  }
}

TEST_CASE("fixed unit temperature reproduces the target distribution") {
  const auto freq = toy_occupancy(1.0, 1000000, 5);
  for (int s = 0; s < 3; ++s) {
    CHECK(std::fabs(freq[static_cast<std::size_t>(s)] -
                    kToyPosterior[static_cast<std::size_t>(s)]) < 0.01);
  }
}

TEST_CASE("fixed temperature T samples the tempered target") {
  // At T = 2 the chain follows the normalized square roots of the target
  // mass; this pins the exp(delta / T) acceptance form.
  std::array<double, 3> expected{};
  double norm = 0.0;
  for (int s = 0; s < 3; ++s) {
    expected[static_cast<std::size_t>(s)] =
        std::sqrt(kToyPosterior[static_cast<std::size_t>(s)]);
    norm += expected[static_cast<std::size_t>(s)];
  }
  for (double& e : expected) e /= norm;

  const auto freq = toy_occupancy(2.0, 1000000, 17);
  for (int s = 0; s < 3; ++s) {
    CHECK(std::fabs(freq[static_cast<std::size_t>(s)] - expected[static_cast<std::size_t>(s)]) <
          0.01);
  }
}
