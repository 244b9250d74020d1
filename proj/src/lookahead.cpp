#include "lossnet/lookahead.hpp"

#include <algorithm>
#include <limits>

namespace lossnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CounterfactualState CounterfactualState::from_live(const Simulation& sim) {
  CounterfactualState cf;
  cf.start_time = sim.now();
  cf.idle = sim.idle();
  cf.completions.reserve(sim.in_service().size());
  for (const auto& job : sim.in_service()) cf.completions.push_back(job.completion);
  std::make_heap(cf.completions.begin(), cf.completions.end(), std::greater<>{});
  cf.next_h_arrival = sim.next_arrival(JobClass::H);
  cf.ah_index = sim.cursor()[StreamId::AH];
  cf.sh_index = sim.cursor()[StreamId::SH];
  return cf;
}

std::uint64_t default_transition_cap(const ModelParams& params) {
  return 64ULL * static_cast<std::uint64_t>(params.n) *
         static_cast<std::uint64_t>(std::max(params.sqrt_level(), 1));
}

namespace {

// Shared rollout: advances the counterfactual one event at a time. Stops as
// soon as the idle count equals lower or upper, or the next event would land
// beyond the deadline (deadline < 0 means unbounded).
RaceOutcome roll(CounterfactualState& cf, const SamplePath& path, const ModelParams& params,
                 int lower, int upper, double deadline, std::uint64_t max_transitions,
                 std::vector<AccessEvent>* access_log) {
  RaceOutcome out;
  if (cf.idle <= lower) {
    out.verdict = RaceVerdict::HitLower;
    return out;
  }
  if (upper >= 0 && cf.idle >= upper) {
    // Skip-free from above: a walk starting at or above the level touches it
    // before anything lower.
    out.verdict = RaceVerdict::HitUpper;
    return out;
  }

  double t = cf.start_time;
  while (true) {
    const double t_c = cf.completions.empty() ? kInf : cf.completions.front();
    const double t_next = std::min(cf.next_h_arrival, t_c);
    if (deadline >= 0 && t_next > deadline) {
      out.verdict = RaceVerdict::WindowExpired;
      out.hit_time = deadline - cf.start_time;
      return out;
    }
    if (out.transitions++ >= max_transitions)
      throw TransitionCapExceeded("counterfactual race exceeded its transition cap");

    t = t_next;
    if (cf.next_h_arrival <= t_c) {
      if (cf.idle > 0) {
        const double s = path.value_at(StreamId::SH, cf.sh_index) / params.mu;
        if (access_log) access_log->push_back({StreamId::SH, cf.sh_index, t});
        ++cf.sh_index;
        cf.completions.push_back(t + s);
        std::push_heap(cf.completions.begin(), cf.completions.end(), std::greater<>{});
        --cf.idle;
      }
      const double gap = path.value_at(StreamId::AH, cf.ah_index) / (params.lambda_h * params.n);
      if (access_log) {
        // Under a deadline the rollout only uses whether this arrival lands
        // inside the window, which is known by the deadline itself.
        double realized = t + gap;
        if (deadline >= 0) realized = std::min(realized, deadline);
        access_log->push_back({StreamId::AH, cf.ah_index, realized});
      }
      ++cf.ah_index;
      cf.next_h_arrival = t + gap;
    } else {
      std::pop_heap(cf.completions.begin(), cf.completions.end(), std::greater<>{});
      cf.completions.pop_back();
      ++cf.idle;
    }

    if (cf.idle == lower) {
      out.verdict = RaceVerdict::HitLower;
      out.hit_time = t - cf.start_time;
      return out;
    }
    if (upper >= 0 && cf.idle == upper) {
      out.verdict = RaceVerdict::HitUpper;
      out.hit_time = t - cf.start_time;
      return out;
    }
  }
}

}  // namespace

RaceOutcome race_to_levels(CounterfactualState cf, const SamplePath& path,
                           const ModelParams& params, int lower, int upper,
                           std::uint64_t max_transitions, std::vector<AccessEvent>* access_log) {
  if (!(lower >= 0 && lower < upper))
    throw std::invalid_argument("race requires 0 <= lower < upper");
  return roll(cf, path, params, lower, upper, -1.0, max_transitions, access_log);
}

bool window_check(CounterfactualState cf, const SamplePath& path, const ModelParams& params,
                  double w, std::vector<AccessEvent>* access_log) {
  if (!(w > 0)) throw std::invalid_argument("window must be positive");
  // Skip-free from above: reaching 0 requires passing 1, so staying above 1
  // is exactly min(tau_0, tau_1) > w.
  const double deadline = cf.start_time + w;
  const RaceOutcome out = roll(cf, path, params, 1, -1, deadline,
                               std::numeric_limits<std::uint64_t>::max(), access_log);
  return out.verdict == RaceVerdict::WindowExpired;
}

Decision pfi_decide(const Simulation& sim, JobClass cls) {
  if (cls == JobClass::H) return sim.idle() > 0 ? Decision::Accept : Decision::Reject;
  const int upper = sim.params().sqrt_level();
  if (upper <= 1) return Decision::Reject;  // degenerate N <= 3
  const auto out = race_to_levels(CounterfactualState::from_live(sim), sim.path(), sim.params(),
                                  1, upper, default_transition_cap(sim.params()));
  return out.verdict == RaceVerdict::HitUpper ? Decision::Accept : Decision::Reject;
}

Decision sss_decide(const Simulation& sim, JobClass cls, double w) {
  if (cls == JobClass::H) return sim.idle() > 0 ? Decision::Accept : Decision::Reject;
  return window_check(CounterfactualState::from_live(sim), sim.path(), sim.params(), w)
             ? Decision::Accept
             : Decision::Reject;
}

}  // namespace lossnet
