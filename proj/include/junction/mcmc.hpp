#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include "junction/random.hpp"

namespace junction {

/// Geometric cooling from t_initial down to t_final over n_steps.
struct AnnealingSchedule {
  double t_initial = 2.0;
  double t_final = 0.2;
  std::uint64_t n_steps = 5000;
};

inline void validate(const AnnealingSchedule& s) {
  if (!(s.t_final > 0.0) || !(s.t_initial >= s.t_final)) {
    throw std::invalid_argument("AnnealingSchedule: need t_initial >= t_final > 0");
  }
}

inline double annealing_temperature(const AnnealingSchedule& s, std::uint64_t step) {
  if (s.n_steps == 0) return s.t_initial;
  const double frac = static_cast<double>(step) / static_cast<double>(s.n_steps);
  return s.t_initial * std::pow(s.t_final / s.t_initial, frac);
}

template <typename State>
struct ChainResult {
  State best_state;
  double best_log_posterior = -std::numeric_limits<double>::infinity();
  std::uint64_t accepted_count = 0;
  std::uint64_t proposed_count = 0;
};

/// Metropolis acceptance probability on a tempered log-posterior ratio.
inline double acceptance_probability(double log_post_new, double log_post_old,
                                     double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("acceptance_probability: temperature must be > 0");
  }
  if (std::isinf(log_post_new) && log_post_new < 0.0) return 0.0;
  const double delta = (log_post_new - log_post_old) / temperature;
  if (delta >= 0.0) return 1.0;
  return std::exp(delta);
}

/// Runs n_steps propose/evaluate/accept iterations and returns the best
/// state seen over the whole run (not the final state). All randomness is
/// drawn from a generator seeded with `seed`; identical inputs give an
/// identical result.
template <typename State, typename Propose, typename LogPosterior>
ChainResult<State> run_chain(State initial, Propose&& propose, LogPosterior&& log_posterior,
                             const AnnealingSchedule& schedule, std::uint64_t seed) {
  validate(schedule);
  double current_lp = log_posterior(initial);
  if (!std::isfinite(current_lp)) {
    throw std::invalid_argument("run_chain: initial state has non-finite log-posterior");
  }

  ChainResult<State> result;
  result.best_state = initial;
  result.best_log_posterior = current_lp;

  State current = std::move(initial);
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::uint64_t k = 0; k < schedule.n_steps; ++k) {
    const double temperature = annealing_temperature(schedule, k);
    State proposal = propose(current, rng);
    const double proposal_lp = log_posterior(proposal);
    const double a = acceptance_probability(proposal_lp, current_lp, temperature);
    ++result.proposed_count;
    if (unit(rng) < a) {
      current = std::move(proposal);
      current_lp = proposal_lp;
      ++result.accepted_count;
      if (current_lp > result.best_log_posterior) {
        result.best_log_posterior = current_lp;
        result.best_state = current;
      }
    }
  }
  return result;
}

}  // namespace junction
